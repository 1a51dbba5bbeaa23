#pragma once

#include <algorithm>
#include <stdexcept>

#include "proxkit/function.hpp"
#include "proxkit/metric.hpp"
#include "proxkit/prox.hpp"

namespace proxkit {

/// Quadratic perturbation g of f with P_1 g = (1-sigma) P_1 f. The prox map
/// of g is a (1-sigma)-contraction and g is strongly convex, so g has a
/// unique minimizer; sigma controls how far g sits from f in the metric.
inline ConvexFunction perturb(const ConvexFunction& f, double sigma) {
  return perturbed(f, sigma);
}

/// Coarse certified bound for sup_{||x|| <= radius} ||P_1 f(x)||, from
/// nonexpansiveness: ||P_1 f(x)|| <= ||P_1 f(0)|| + radius.
inline double m_bound(const ConvexFunction& f, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("m_bound: radius must be >= 0");
  return prox(f, 1.0, Vector::Zero(f.dim())).point.norm() + radius;
}

struct SigmaChoice {
  double sigma = 0.0;
  double m = 0.0;               // m_bound(f, shells)
  double predicted_upper = 0.0; // a-priori bound on d(dg, df) for this sigma
};

/// Picks sigma so that d(d perturb(f, sigma), df) < eps is guaranteed a
/// priori. The shell gap is sup ||P_1 g - P_1 f|| = sigma * sup ||P_1 f||
/// <= sigma * M on every probed ball, and a(t) <= t, so
/// d <= sigma * M + 2^-shells; sigma = eps/(2M) leaves the tail plenty of
/// room for any eps >= 2^-(shells-1).
inline SigmaChoice choose_sigma(const ConvexFunction& f, double eps, int shells = 20) {
  if (!(eps > 0.0)) throw std::invalid_argument("choose_sigma: eps must be > 0");
  if (shells < 1) throw std::invalid_argument("choose_sigma: shells must be >= 1");
  SigmaChoice c;
  c.m = m_bound(f, static_cast<double>(shells));
  c.sigma = std::min(0.5, eps / (2.0 * c.m + 1e-12));
  c.predicted_upper = c.sigma * c.m + std::pow(2.0, -shells);
  return c;
}

struct ContractionResult {
  ConvexFunction g;
  SigmaChoice choice;
};

/// One-shot: a strongly convex neighbor of f at metric distance < eps.
inline ContractionResult nearby_contraction(const ConvexFunction& f, double eps,
                                            int shells = 20) {
  const SigmaChoice c = choose_sigma(f, eps, shells);
  return ContractionResult{perturb(f, c.sigma), c};
}

}  // namespace proxkit
