#pragma once

#include <cfloat>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "proxkit/function.hpp"
#include "proxkit/subdifferential.hpp"

namespace proxkit {

struct ProxOptions {
  /// Guaranteed bound on ||returned point - exact prox point||.
  double tol = 1e-9;
  /// Iteration budget for the numeric path (per node).
  int max_iters = 10000;
  /// Route perturbed nodes through the iterative solver even when the
  /// structural identity applies. Exists so tests can exercise that path.
  bool force_numeric = false;
  /// Relative step beta in (0,1] for the splitting iteration; the induced
  /// contraction factor is (1-beta).
  double step_fraction = 0.7;
};

struct ProxResult {
  Vector point;
  /// Rigorous bound on ||point - exact prox point||. Closed forms report a
  /// rounding-level bound; the numeric path reports lambda * dist(0, dF(y))
  /// where dF is the subdifferential of the prox objective, valid because
  /// that objective is (1/lambda)-strongly convex.
  double accuracy = 0.0;
  /// Total iterations across all numeric nodes; 0 for pure closed forms.
  int iterations = 0;
  bool closed_form = true;
};

/// Iteration budget exhausted before the certificate reached tol.
/// Carries the best iterate seen so callers can still inspect it.
struct NonconvergenceError : std::runtime_error {
  Vector best_point;
  double best_accuracy;
  int iterations;
  NonconvergenceError(const std::string& msg, Vector point, double accuracy, int iters)
      : std::runtime_error(msg),
        best_point(std::move(point)),
        best_accuracy(accuracy),
        iterations(iters) {}
};

namespace detail {

/// Rounding-level accuracy bound for a closed-form prox evaluation.
inline double closed_form_accuracy(const Vector& x, const Vector& y) {
  return 100.0 * DBL_EPSILON * (1.0 + x.norm() + y.norm());
}

/// dist(0, d(f + ||.-x||^2/(2 lambda))(y)), computed exactly from the
/// catalog subdifferential. Infinite when y is outside dom f.
inline double prox_objective_residual(const ConvexFunction& f, double lambda,
                                      const Vector& x, const Vector& y) {
  const SubdiffSet s = subdifferential(f, y);
  if (s.is_empty()) return kInf;
  return s.translated((y - x) / lambda).min_norm();
}

struct ProxNode {
  virtual ~ProxNode() = default;
  virtual Vector eval(const Vector& x, int& iters) const = 0;
};

struct ZeroProx final : ProxNode {
  Vector eval(const Vector& x, int&) const override { return x; }
};

struct QuadraticProx final : ProxNode {
  // Solves (I + lambda Q) y = x - lambda b through the cached
  // eigendecomposition; dim 1 goes through exact scalar arithmetic.
  Matrix V;
  Vector d, b;
  double lambda;
  QuadraticProx(const QuadraticNode& n, double lam)
      : V(n.eigenvectors), d(n.eigenvalues), b(n.b), lambda(lam) {
    q1 = n.Q(0, 0);
  }
  double q1;
  Vector eval(const Vector& x, int&) const override {
    if (x.size() == 1) {
      Vector y(1);
      y[0] = (x[0] - lambda * b[0]) / (1.0 + lambda * q1);
      return y;
    }
    Vector w = V.transpose() * (x - lambda * b);
    for (int j = 0; j < w.size(); ++j) w[j] /= 1.0 + lambda * d[j];
    return V * w;
  }
};

struct AbsSumProx final : ProxNode {
  double threshold;  // lambda * weight
  explicit AbsSumProx(double t) : threshold(t) {}
  Vector eval(const Vector& x, int&) const override {
    Vector y(x.size());
    for (int j = 0; j < x.size(); ++j) {
      const double a = std::abs(x[j]) - threshold;
      y[j] = a > 0.0 ? (x[j] > 0.0 ? a : -a) : 0.0;
    }
    return y;
  }
};

struct EuclNormProx final : ProxNode {
  double threshold;  // lambda * weight
  explicit EuclNormProx(double t) : threshold(t) {}
  Vector eval(const Vector& x, int&) const override {
    const double n = x.norm();
    if (n <= threshold) return Vector::Zero(x.size());
    return (1.0 - threshold / n) * x;
  }
};

struct BoxProx final : ProxNode {
  Vector lo, hi;
  BoxProx(Vector l, Vector h) : lo(std::move(l)), hi(std::move(h)) {}
  Vector eval(const Vector& x, int&) const override {
    Vector y(x.size());
    for (int j = 0; j < x.size(); ++j) y[j] = std::min(std::max(x[j], lo[j]), hi[j]);
    return y;
  }
};

struct BallProx final : ProxNode {
  Vector center;
  double radius;
  BallProx(Vector c, double r) : center(std::move(c)), radius(r) {}
  Vector eval(const Vector& x, int&) const override {
    const Vector d = x - center;
    const double n = d.norm();
    if (n <= radius) return x;
    return center + (radius / n) * d;
  }
};

struct HuberProx final : ProxNode {
  double delta, lambda;
  HuberProx(double dl, double lam) : delta(dl), lambda(lam) {}
  Vector eval(const Vector& x, int&) const override {
    Vector y(x.size());
    const double knee = delta * (1.0 + lambda);
    for (int j = 0; j < x.size(); ++j) {
      if (std::abs(x[j]) <= knee) {
        y[j] = x[j] / (1.0 + lambda);
      } else {
        y[j] = x[j] - lambda * delta * (x[j] > 0.0 ? 1.0 : -1.0);
      }
    }
    return y;
  }
};

struct ShiftedProx final : ProxNode {
  std::unique_ptr<ProxNode> base;
  explicit ShiftedProx(std::unique_ptr<ProxNode> b) : base(std::move(b)) {}
  Vector eval(const Vector& x, int& iters) const override { return base->eval(x, iters); }
};

/// P_1 g = (1-sigma) P_1 base; exact, only valid at lambda = 1.
struct StructuralPerturbedProx final : ProxNode {
  std::unique_ptr<ProxNode> base;
  double sigma;
  StructuralPerturbedProx(std::unique_ptr<ProxNode> b, double s)
      : base(std::move(b)), sigma(s) {}
  Vector eval(const Vector& x, int& iters) const override {
    return (1.0 - sigma) * base->eval(x, iters);
  }
};

/// Minimizes g(y) + ||y - x||^2/(2 lambda) for a perturbed node g by
/// splitting off the smooth quadratic part s(y) = L/2 ||y - c||^2 and
/// iterating y <- prox_{t r}((1-beta) y + beta c) with t = beta/L, where
/// r(y) = (1-sigma) base(y/(1-sigma)). The map is a (1-beta)-contraction, so
/// the exactly evaluated certificate lambda * dist(0, dF(y)) drops
/// geometrically.
struct NumericPerturbedProx final : ProxNode {
  std::unique_ptr<ProxNode> inner;  // base compiled at lambda_inner
  ConvexFunction g;                 // the perturbed function, for certificates
  double sigma, lambda, beta, tol;
  int max_iters;
  NumericPerturbedProx(std::unique_ptr<ProxNode> in, ConvexFunction fn, double s,
                       double lam, double b, double tl, int mi)
      : inner(std::move(in)), g(std::move(fn)), sigma(s), lambda(lam), beta(b),
        tol(tl), max_iters(mi) {}

  Vector eval(const Vector& x, int& iters) const override {
    const double k = 1.0 - sigma;
    const double L = sigma / k + 1.0 / lambda;
    const Vector c = x / (lambda * L);
    Vector y = x;
    Vector best = x;
    double best_acc = kInf;
    for (int it = 0; it < max_iters; ++it) {
      const Vector z = (1.0 - beta) * y + beta * c;
      y = k * inner->eval(z / k, iters);
      ++iters;
      const double acc = lambda * prox_objective_residual(g, lambda, x, y);
      if (acc < best_acc) {
        best_acc = acc;
        best = y;
      }
      if (acc <= tol) return y;
    }
    throw NonconvergenceError(
        "prox: splitting iteration for " + describe(g) + " did not reach tol " +
            std::to_string(tol) + " within " + std::to_string(max_iters) +
            " iterations (best accuracy " + std::to_string(best_acc) + ")",
        best, best_acc, max_iters);
  }
};

inline std::unique_ptr<ProxNode> compile_prox(const ConvexFunction& f, double lambda,
                                              const ProxOptions& opts, bool& numeric) {
  return std::visit(
      Overloaded{
          [&](const ZeroNode&) -> std::unique_ptr<ProxNode> {
            return std::make_unique<ZeroProx>();
          },
          [&](const QuadraticNode& n) -> std::unique_ptr<ProxNode> {
            return std::make_unique<QuadraticProx>(n, lambda);
          },
          [&](const AbsSumNode& n) -> std::unique_ptr<ProxNode> {
            return std::make_unique<AbsSumProx>(lambda * n.weight);
          },
          [&](const EuclNormNode& n) -> std::unique_ptr<ProxNode> {
            return std::make_unique<EuclNormProx>(lambda * n.weight);
          },
          [&](const IndicatorBoxNode& n) -> std::unique_ptr<ProxNode> {
            return std::make_unique<BoxProx>(n.lo, n.hi);
          },
          [&](const IndicatorBallNode& n) -> std::unique_ptr<ProxNode> {
            return std::make_unique<BallProx>(n.center, n.radius);
          },
          [&](const HuberNode& n) -> std::unique_ptr<ProxNode> {
            return std::make_unique<HuberProx>(n.delta, lambda);
          },
          [&](const PerturbedNode& n) -> std::unique_ptr<ProxNode> {
            if (lambda == 1.0 && !opts.force_numeric) {
              return std::make_unique<StructuralPerturbedProx>(
                  compile_prox(*n.base, 1.0, opts, numeric), n.sigma);
            }
            numeric = true;
            const double k = 1.0 - n.sigma;
            const double L = n.sigma / k + 1.0 / lambda;
            const double lambda_inner = opts.step_fraction / (L * k);
            ProxOptions inner_opts = opts;
            inner_opts.tol = opts.tol * 0.05;  // keep inner error below outer budget
            return std::make_unique<NumericPerturbedProx>(
                compile_prox(*n.base, lambda_inner, inner_opts, numeric), f,
                n.sigma, lambda, opts.step_fraction, opts.tol, opts.max_iters);
          },
          [&](const ShiftedNode& n) -> std::unique_ptr<ProxNode> {
            return std::make_unique<ShiftedProx>(
                compile_prox(*n.base, lambda, opts, numeric));
          }},
      f.node());
}

}  // namespace detail

/// Reusable evaluator for x -> P_{lambda f}(x). Construction validates
/// arguments and caches everything per-node (factorizations, thresholds),
/// so repeated applications are allocation-light.
class ProxOperator {
 public:
  ProxOperator(ConvexFunction f, double lambda, ProxOptions opts = {})
      : f_(std::move(f)), lambda_(lambda), opts_(opts) {
    if (!(lambda > 0.0)) throw std::invalid_argument("ProxOperator: lambda must be > 0");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("ProxOperator: tol must be > 0");
    if (opts.max_iters < 1) throw std::invalid_argument("ProxOperator: max_iters must be >= 1");
    if (!(opts.step_fraction > 0.0 && opts.step_fraction <= 1.0)) {
      throw std::invalid_argument("ProxOperator: step_fraction must lie in (0,1]");
    }
    root_ = detail::compile_prox(f_, lambda_, opts_, numeric_);
  }

  const ConvexFunction& function() const { return f_; }
  double lambda() const { return lambda_; }
  int dim() const { return f_.dim(); }
  bool numeric() const { return numeric_; }

  ProxResult apply(const Vector& x) const {
    detail::check_dim(f_, x, "ProxOperator::apply");
    ProxResult r;
    r.iterations = 0;
    r.point = root_->eval(x, r.iterations);
    r.closed_form = !numeric_;
    r.accuracy = numeric_
                     ? lambda_ * detail::prox_objective_residual(f_, lambda_, x, r.point)
                     : detail::closed_form_accuracy(x, r.point);
    return r;
  }

  Vector operator()(const Vector& x) const {
    detail::check_dim(f_, x, "ProxOperator::operator()");
    int iters = 0;
    return root_->eval(x, iters);
  }

 private:
  ConvexFunction f_;
  double lambda_;
  ProxOptions opts_;
  bool numeric_ = false;
  std::unique_ptr<detail::ProxNode> root_;
};

inline ProxResult prox(const ConvexFunction& f, double lambda, const Vector& x,
                       const ProxOptions& opts = {}) {
  return ProxOperator(f, lambda, opts).apply(x);
}

/// Moreau envelope e_{lambda f}(x) = f(P_{lambda f}(x)) + ||P - x||^2/(2 lambda).
inline double moreau(const ConvexFunction& f, double lambda, const Vector& x,
                     const ProxOptions& opts = {}) {
  const ProxResult r = prox(f, lambda, x, opts);
  return evaluate(f, r.point) + (r.point - x).squaredNorm() / (2.0 * lambda);
}

/// Type-erased nonexpansive map on R^dim. The shared currency between the
/// metric, the dynamics probes, and the black-box checks: anything that can
/// be applied pointwise fits, not only proximal mappings.
struct OperatorHandle {
  std::function<Vector(const Vector&)> map;
  int dim = 0;
  std::string name;

  Vector operator()(const Vector& x) const { return map(x); }
};

inline OperatorHandle prox_operator(const ConvexFunction& f, double lambda = 1.0,
                                    ProxOptions opts = {}) {
  auto op = std::make_shared<ProxOperator>(f, lambda, opts);
  return OperatorHandle{[op](const Vector& x) { return (*op)(x); }, f.dim(),
                        "prox[" + describe(f) + "]"};
}

}  // namespace proxkit
