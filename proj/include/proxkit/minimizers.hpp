#pragma once

#include <cmath>
#include <string>

#include "proxkit/function.hpp"
#include "proxkit/prox.hpp"

namespace proxkit {

struct MinimizerInfo {
  enum class Kind {
    Unique,    // argmin is a singleton
    Set,       // argmin is a nonempty non-singleton set; `point` is a member
    Unbounded  // inf f = -inf (no minimizer)
  };
  Kind kind = Kind::Unique;
  Vector point;   // a minimizer (meaningless for Unbounded)
  double value = 0.0;  // min f; -inf for Unbounded
  std::string note;

  bool unique() const { return kind == Kind::Unique; }
  bool exists() const { return kind != Kind::Unbounded; }
};

/// Exact argmin description for every catalog node.
inline MinimizerInfo minimizer_info(const ConvexFunction& f) {
  const int n = f.dim();
  return std::visit(
      detail::Overloaded{
          [&](const ZeroNode&) {
            return MinimizerInfo{MinimizerInfo::Kind::Set, Vector::Zero(n), 0.0,
                                 "argmin is all of R^n"};
          },
          [&](const QuadraticNode& q) {
            // Rank decisions reuse the cached eigendecomposition.
            const double rank_tol = 1e-12 * std::max(1.0, q.eigenvalues.maxCoeff());
            const Vector w = q.eigenvectors.transpose() * q.b;
            Vector u(n);
            bool singular = false;
            for (int j = 0; j < n; ++j) {
              if (q.eigenvalues[j] > rank_tol) {
                u[j] = -w[j] / q.eigenvalues[j];
              } else {
                singular = true;
                if (std::abs(w[j]) > 1e-10 * (1.0 + q.b.norm())) {
                  // b has a component along the null space: f is linear and
                  // decreasing in that direction.
                  return MinimizerInfo{MinimizerInfo::Kind::Unbounded, Vector(),
                                       -kInf, "b is not in range(Q)"};
                }
                u[j] = 0.0;
              }
            }
            const Vector p = q.eigenvectors * u;
            const double value = q.c + 0.5 * q.b.dot(p);
            if (singular) {
              return MinimizerInfo{MinimizerInfo::Kind::Set, p, value,
                                   "argmin is the affine set p + null(Q)"};
            }
            return MinimizerInfo{MinimizerInfo::Kind::Unique, p, value, ""};
          },
          [&](const AbsSumNode&) {
            return MinimizerInfo{MinimizerInfo::Kind::Unique, Vector::Zero(n), 0.0, ""};
          },
          [&](const EuclNormNode&) {
            return MinimizerInfo{MinimizerInfo::Kind::Unique, Vector::Zero(n), 0.0, ""};
          },
          [&](const IndicatorBoxNode& b) {
            Vector p(n);
            bool unique = true;
            for (int j = 0; j < n; ++j) {
              p[j] = std::min(std::max(0.0, b.lo[j]), b.hi[j]);
              unique = unique && b.lo[j] == b.hi[j];
            }
            if (unique) return MinimizerInfo{MinimizerInfo::Kind::Unique, p, 0.0, ""};
            return MinimizerInfo{MinimizerInfo::Kind::Set, p, 0.0, "argmin is the box"};
          },
          [&](const IndicatorBallNode& b) {
            return MinimizerInfo{MinimizerInfo::Kind::Set, b.center, 0.0,
                                 "argmin is the ball"};
          },
          [&](const HuberNode&) {
            return MinimizerInfo{MinimizerInfo::Kind::Unique, Vector::Zero(n), 0.0, ""};
          },
          [&](const PerturbedNode& pn) {
            // 0 in dg(p) reduces to p = (1-sigma) * P_{(1/sigma) base}(0);
            // the perturbed function is strongly convex, so argmin is a point.
            const double sigma = pn.sigma;
            const Vector u = prox(*pn.base, 1.0 / sigma, Vector::Zero(n)).point;
            const Vector p = (1.0 - sigma) * u;
            return MinimizerInfo{MinimizerInfo::Kind::Unique, p, evaluate(f, p), ""};
          },
          [&](const ShiftedNode& s) {
            MinimizerInfo info = minimizer_info(*s.base);
            if (info.exists()) info.value += s.offset;
            return info;
          }},
      f.node());
}

}  // namespace proxkit
