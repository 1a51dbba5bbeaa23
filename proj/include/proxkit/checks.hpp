#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxkit/function.hpp"
#include "proxkit/metric.hpp"
#include "proxkit/prox.hpp"
#include "proxkit/rng.hpp"
#include "proxkit/subdifferential.hpp"

namespace proxkit {

/// Sampling budget shared by the black-box operator checks.
struct CheckSpec {
  int samples = 10000;
  int cycles = 1000;
  int max_cycle_len = 6;
  double radius = 10.0;  // probe points live in B_radius(0)
  std::uint64_t seed = 0x1337c0dedeadbeefull;
};

struct PairCheckReport {
  /// Most negative observed value of <x-y, Tx-Ty> - ||Tx-Ty||^2; nonnegative
  /// for every firmly nonexpansive map.
  double min_margin = kInf;
  Vector worst_x, worst_y;
  int samples = 0;

  bool passed(double tol) const { return min_margin >= -tol; }
};

/// Samples point pairs and evaluates the firm-nonexpansiveness inner-product
/// inequality. A negative margin beyond rounding disproves the property; a
/// clean pass is evidence, not proof.
inline PairCheckReport check_firmly_nonexpansive(const OperatorHandle& T,
                                                 const CheckSpec& spec = {}) {
  PairCheckReport rep;
  SeededRng rng(spec.seed);
  for (int s = 0; s < spec.samples; ++s) {
    const Vector x = rng.in_ball(T.dim, spec.radius);
    const Vector y = rng.in_ball(T.dim, spec.radius);
    const Vector dT = T(x) - T(y);
    const double margin = (x - y).dot(dT) - dT.squaredNorm();
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.worst_x = x;
      rep.worst_y = y;
    }
    ++rep.samples;
  }
  return rep;
}

struct CycleCheckReport {
  /// Most negative observed cycle sum
  /// sum_i <x_i - T x_i, T x_i - T x_{i+1}> (indices cyclic); nonnegative
  /// exactly when T is the unit-parameter proximal map of some convex
  /// function.
  double min_margin = kInf;
  std::vector<Vector> worst_cycle;
  int cycles = 0;

  bool passed(double tol) const { return min_margin >= -tol; }
};

/// Random-cycle test separating proximal maps from mere resolvents: firmly
/// nonexpansive maps that come from a non-symmetric monotone field (see
/// rotation_resolvent) violate it on some cycle of length >= 3.
inline CycleCheckReport check_cycle_inequality(const OperatorHandle& T,
                                               const CheckSpec& spec = {}) {
  if (spec.max_cycle_len < 2) {
    throw std::invalid_argument("check_cycle_inequality: max_cycle_len must be >= 2");
  }
  CycleCheckReport rep;
  SeededRng rng(spec.seed);
  std::vector<Vector> pts, imgs;
  for (int c = 0; c < spec.cycles; ++c) {
    const int len = static_cast<int>(rng.uniform_int(2, spec.max_cycle_len));
    pts.clear();
    imgs.clear();
    for (int i = 0; i < len; ++i) {
      pts.push_back(rng.in_ball(T.dim, spec.radius));
      imgs.push_back(T(pts.back()));
    }
    double sum = 0.0;
    for (int i = 0; i < len; ++i) {
      const int j = (i + 1) % len;
      sum += (pts[i] - imgs[i]).dot(imgs[i] - imgs[j]);
    }
    if (sum < rep.min_margin) {
      rep.min_margin = sum;
      rep.worst_cycle = pts;
    }
    ++rep.cycles;
  }
  return rep;
}

struct ResolventCheckReport {
  /// Worst violation of the inclusion x - P(x) in lambda * df(P(x)).
  double max_forward_gap = 0.0;
  /// Worst violation of P(y + lambda v) = y over sampled graph points
  /// v in df(y).
  double max_inverse_gap = 0.0;
  int samples = 0;

  double max_gap() const { return std::max(max_forward_gap, max_inverse_gap); }
};

/// Exercises both directions of the bijection between the prox map and the
/// subdifferential graph: forward, the prox point must satisfy the
/// optimality inclusion (measured exactly against the catalog
/// subdifferential); inverse, reconstructing x = y + lambda v from a graph
/// point must map back to y.
inline ResolventCheckReport check_resolvent_identity(const ConvexFunction& f,
                                                     double lambda,
                                                     const CheckSpec& spec = {}) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("check_resolvent_identity: lambda must be > 0");
  }
  ResolventCheckReport rep;
  SeededRng rng(spec.seed);
  const ProxOperator P(f, lambda);
  for (int s = 0; s < spec.samples; ++s) {
    const Vector x = rng.in_ball(f.dim(), spec.radius);
    const Vector y = P(x);
    // y lies in the range of P, hence in dom df.
    const SubdiffSet sub = subdifferential(f, y);
    const double fwd = sub.dist((x - y) / lambda);
    rep.max_forward_gap = std::max(rep.max_forward_gap, fwd);

    if (!sub.is_empty()) {
      const Vector v = sub.sample(rng, spec.radius);
      const double inv = (P(y + lambda * v) - y).norm();
      rep.max_inverse_gap = std::max(rep.max_inverse_gap, inv);
    }
    ++rep.samples;
  }
  return rep;
}

struct GraphicalProbeReport {
  std::vector<int> ks;
  /// gaps[i] = max over the shared sample set of ||P_1 f_k (x) - P_1 f(x)||
  /// with f_k = f + (1/k) * ||.||^2 / 2.
  std::vector<double> gaps;

  bool nonincreasing() const {
    for (std::size_t i = 1; i < gaps.size(); ++i) {
      if (gaps[i] > gaps[i - 1]) return false;
    }
    return true;
  }
};

/// Pointwise resolvent convergence along the quadratically regularized
/// family f_k -> f: the prox gaps on a fixed sample set must shrink as k
/// grows. Sample set: axis extremes of B_radius plus a low-discrepancy fill.
inline GraphicalProbeReport graphical_convergence_probe(const ConvexFunction& f,
                                                        const std::vector<int>& ks,
                                                        double radius = 10.0,
                                                        int samples = 512) {
  GraphicalProbeReport rep;
  const int dim = f.dim();
  std::vector<Vector> xs;
  for (int j = 0; j < dim; ++j) {
    Vector e = Vector::Zero(dim);
    e[j] = radius;
    xs.push_back(e);
    xs.push_back(-e);
  }
  for (Vector& v : halton_in_ball(dim, samples, radius)) xs.push_back(std::move(v));

  const ProxOperator P(f, 1.0);
  std::vector<Vector> base_imgs;
  base_imgs.reserve(xs.size());
  for (const Vector& x : xs) base_imgs.push_back(P(x));

  for (int k : ks) {
    if (k < 1) throw std::invalid_argument("graphical_convergence_probe: k must be >= 1");
    const ProxOperator Pk(add_quadratic_regularizer(f, 1.0 / k), 1.0);
    double gap = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      gap = std::max(gap, (Pk(xs[i]) - base_imgs[i]).norm());
    }
    rep.ks.push_back(k);
    rep.gaps.push_back(gap);
  }
  return rep;
}

struct CauchyProbeReport {
  /// Enclosure upper bounds for d between consecutive sequence members.
  std::vector<double> successive;
  /// Enclosure upper bounds for d(f_k, candidate).
  std::vector<double> to_candidate;

  bool gaps_nonincreasing() const {
    for (std::size_t i = 1; i < to_candidate.size(); ++i) {
      if (to_candidate[i] > to_candidate[i - 1]) return false;
    }
    return true;
  }
};

/// Desk-scale convergence probe in the metric: measures whether a sequence
/// looks Cauchy (successive distances shrink) and whether it approaches the
/// proposed limit. Uses metric upper bounds throughout, so small values are
/// certified small.
inline CauchyProbeReport cauchy_limit_probe(const std::vector<ConvexFunction>& seq,
                                            const ConvexFunction& candidate,
                                            const ProbeSpec& spec = {}) {
  if (seq.size() < 2) throw std::invalid_argument("cauchy_limit_probe: need >= 2 functions");
  CauchyProbeReport rep;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    rep.successive.push_back(metric(seq[i], seq[i + 1], spec).upper());
  }
  for (const ConvexFunction& fk : seq) {
    rep.to_candidate.push_back(metric(fk, candidate, spec).upper());
  }
  return rep;
}

/// Resolvent of the 90-degree rotation field on R^2: firmly nonexpansive
/// (the field is maximally monotone) yet not the proximal map of any convex
/// function; cycle sums equal minus the signed area of the image polygon, so
/// positively oriented cycles of length >= 3 witness the failure.
inline OperatorHandle rotation_resolvent() {
  return OperatorHandle{[](const Vector& x) {
                          Vector y(2);
                          y[0] = 0.5 * (x[0] + x[1]);
                          y[1] = 0.5 * (-x[0] + x[1]);
                          return y;
                        },
                        2, "rotation-resolvent"};
}

}  // namespace proxkit
