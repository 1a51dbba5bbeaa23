#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>

#include "proxkit/rng.hpp"

namespace proxkit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when an operation is not defined for a node type.
struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ConvexFunction;

// ---------------------------------------------------------------------------
// Catalog nodes. Every node describes a proper, lsc, convex function on R^n.
// ---------------------------------------------------------------------------

/// f(x) = 0.
struct ZeroNode {};

/// f(x) = x'Qx/2 + b'x + c with Q symmetric positive semidefinite.
/// The eigendecomposition is cached at construction (it backs both the PSD
/// check and minimizer queries).
struct QuadraticNode {
  Matrix Q;
  Vector b;
  double c = 0.0;
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // columns paired with eigenvalues
};

/// f(x) = w * sum_j |x_j|, w > 0.
struct AbsSumNode {
  double weight = 1.0;
};

/// f(x) = w * ||x||_2, w > 0.
struct EuclNormNode {
  double weight = 1.0;
};

/// Indicator of the box [lo, hi] (0 inside, +inf outside).
struct IndicatorBoxNode {
  Vector lo, hi;
};

/// Indicator of the closed ball B_radius(center), radius > 0.
struct IndicatorBallNode {
  Vector center;
  double radius = 1.0;
};

/// Separable Huber: f(x) = sum_j h(x_j) with
/// h(t) = t^2/2 for |t| <= delta, delta*(|t| - delta/2) otherwise.
struct HuberNode {
  double delta = 1.0;
};

/// g(x) = sigma/(1-sigma) * ||x||^2/2 + (1-sigma) * base(x/(1-sigma)),
/// sigma in (0,1). g is strongly convex and P_1 g = (1-sigma) P_1 base;
/// the node is kept unexpanded so that identity stays available exactly.
struct PerturbedNode {
  std::shared_ptr<const ConvexFunction> base;
  double sigma = 0.5;
};

/// base + offset. Same subdifferential and prox as base.
struct ShiftedNode {
  std::shared_ptr<const ConvexFunction> base;
  double offset = 0.0;
};

using FunctionNode =
    std::variant<ZeroNode, QuadraticNode, AbsSumNode, EuclNormNode,
                 IndicatorBoxNode, IndicatorBallNode, HuberNode, PerturbedNode,
                 ShiftedNode>;

/// Immutable description of a proper, lsc, convex function on R^n.
/// Cheap to copy; all operations on it are pure.
class ConvexFunction {
 public:
  ConvexFunction(FunctionNode node, int dim)
      : data_(std::make_shared<const Data>(Data{std::move(node), dim})) {
    if (dim < 1) throw std::invalid_argument("ConvexFunction: dim must be >= 1");
  }

  int dim() const { return data_->dim; }
  const FunctionNode& node() const { return data_->node; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&data_->node);
  }

 private:
  struct Data {
    FunctionNode node;
    int dim;
  };
  std::shared_ptr<const Data> data_;
};

namespace detail {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

/// Membership tolerance for indicator sets, relative to the scale involved.
inline double indicator_tol(double scale) {
  return 1e-12 * (1.0 + std::abs(scale));
}

inline void check_dim(const ConvexFunction& f, const Vector& x,
                      const char* where) {
  if (x.size() != f.dim()) {
    std::ostringstream os;
    os << where << ": dimension mismatch (function dim " << f.dim()
       << ", point dim " << x.size() << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Factories (validation happens here, nowhere else)
// ---------------------------------------------------------------------------

inline ConvexFunction zero(int dim) { return ConvexFunction(ZeroNode{}, dim); }

/// PSD is enforced with an eigenvalue floor of -1e-12; anything below is
/// rejected rather than silently clamped.
inline ConvexFunction quadratic(Matrix Q, Vector b, double c = 0.0) {
  if (Q.rows() != Q.cols()) throw std::invalid_argument("quadratic: Q must be square");
  if (Q.rows() != b.size()) throw std::invalid_argument("quadratic: Q and b dimensions differ");
  if (Q.rows() < 1) throw std::invalid_argument("quadratic: empty Q");
  const double scale = Q.cwiseAbs().maxCoeff();
  const double asym = (Q - Q.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * (1.0 + scale)) {
    throw std::invalid_argument("quadratic: Q is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(Q);
  if (es.info() != Eigen::Success) throw std::invalid_argument("quadratic: eigendecomposition failed");
  if (es.eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument("quadratic: Q has an eigenvalue below -1e-12 (not PSD)");
  }
  const int n = static_cast<int>(Q.rows());
  return ConvexFunction(
      QuadraticNode{std::move(Q), std::move(b), c, es.eigenvalues(), es.eigenvectors()}, n);
}

/// 1-D convenience: f(x) = q*x^2/2 + b*x + c.
inline ConvexFunction quadratic1d(double q, double b = 0.0, double c = 0.0) {
  Matrix Q(1, 1);
  Q(0, 0) = q;
  Vector bv(1);
  bv[0] = b;
  return quadratic(std::move(Q), std::move(bv), c);
}

inline ConvexFunction abs_sum(double weight, int dim) {
  if (!(weight > 0.0)) throw std::invalid_argument("abs_sum: weight must be > 0");
  return ConvexFunction(AbsSumNode{weight}, dim);
}

inline ConvexFunction eucl_norm(double weight, int dim) {
  if (!(weight > 0.0)) throw std::invalid_argument("eucl_norm: weight must be > 0");
  return ConvexFunction(EuclNormNode{weight}, dim);
}

inline ConvexFunction indicator_box(Vector lo, Vector hi) {
  if (lo.size() != hi.size() || lo.size() < 1) {
    throw std::invalid_argument("indicator_box: lo/hi dimensions differ or empty");
  }
  for (int j = 0; j < lo.size(); ++j) {
    if (!(lo[j] <= hi[j])) throw std::invalid_argument("indicator_box: requires lo <= hi");
  }
  const int n = static_cast<int>(lo.size());
  return ConvexFunction(IndicatorBoxNode{std::move(lo), std::move(hi)}, n);
}

inline ConvexFunction indicator_ball(Vector center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("indicator_ball: radius must be > 0");
  if (center.size() < 1) throw std::invalid_argument("indicator_ball: empty center");
  const int n = static_cast<int>(center.size());
  return ConvexFunction(IndicatorBallNode{std::move(center), radius}, n);
}

inline ConvexFunction huber(double delta, int dim) {
  if (!(delta > 0.0)) throw std::invalid_argument("huber: delta must be > 0");
  return ConvexFunction(HuberNode{delta}, dim);
}

inline ConvexFunction perturbed(const ConvexFunction& base, double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) {
    throw std::invalid_argument("perturbed: sigma must lie strictly in (0,1)");
  }
  return ConvexFunction(
      PerturbedNode{std::make_shared<const ConvexFunction>(base), sigma}, base.dim());
}

inline ConvexFunction shifted(const ConvexFunction& base, double offset) {
  if (!std::isfinite(offset)) throw std::invalid_argument("shifted: offset must be finite");
  return ConvexFunction(
      ShiftedNode{std::make_shared<const ConvexFunction>(base), offset}, base.dim());
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// f(x) as an extended real. +inf only for indicator nodes outside their set;
/// never -inf.
inline double evaluate(const ConvexFunction& f, const Vector& x) {
  detail::check_dim(f, x, "evaluate");
  return std::visit(
      detail::Overloaded{
          [&](const ZeroNode&) { return 0.0; },
          [&](const QuadraticNode& n) {
            return 0.5 * x.dot(n.Q * x) + n.b.dot(x) + n.c;
          },
          [&](const AbsSumNode& n) { return n.weight * x.lpNorm<1>(); },
          [&](const EuclNormNode& n) { return n.weight * x.norm(); },
          [&](const IndicatorBoxNode& n) {
            for (int j = 0; j < x.size(); ++j) {
              const double tol = detail::indicator_tol(std::max(std::abs(n.lo[j]), std::abs(n.hi[j])));
              if (x[j] < n.lo[j] - tol || x[j] > n.hi[j] + tol) return kInf;
            }
            return 0.0;
          },
          [&](const IndicatorBallNode& n) {
            const double tol = detail::indicator_tol(n.radius + n.center.norm());
            return (x - n.center).norm() <= n.radius + tol ? 0.0 : kInf;
          },
          [&](const HuberNode& n) {
            double s = 0.0;
            for (int j = 0; j < x.size(); ++j) {
              const double a = std::abs(x[j]);
              s += a <= n.delta ? 0.5 * a * a : n.delta * (a - 0.5 * n.delta);
            }
            return s;
          },
          [&](const PerturbedNode& n) {
            const double k = 1.0 - n.sigma;
            return n.sigma / k * 0.5 * x.squaredNorm() + k * evaluate(*n.base, x / k);
          },
          [&](const ShiftedNode& n) { return evaluate(*n.base, x) + n.offset; }},
      f.node());
}

inline bool in_domain(const ConvexFunction& f, const Vector& x) {
  return std::isfinite(evaluate(f, x));
}

// ---------------------------------------------------------------------------
// Structural helpers
// ---------------------------------------------------------------------------

/// Class representative: strips additive constants (Shifted wrappers) at
/// every level. Two functions in the same equivalence class normalize to
/// structurally equal descriptions.
inline ConvexFunction normalize(const ConvexFunction& f) {
  return std::visit(
      detail::Overloaded{
          [&](const ShiftedNode& n) { return normalize(*n.base); },
          [&](const PerturbedNode& n) { return perturbed(normalize(*n.base), n.sigma); },
          [&](const auto&) { return f; }},
      f.node());
}

/// Epigraphical scaling (s > 0): returns the node for x -> s * f(x/s).
/// Supported where the catalog is closed under it; Huber and Perturbed are
/// not (their curvature does not survive the scaling).
inline ConvexFunction scale_epigraph(const ConvexFunction& f, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("scale_epigraph: s must be > 0");
  return std::visit(
      detail::Overloaded{
          [&](const ZeroNode&) { return f; },
          [&](const QuadraticNode& n) { return quadratic(n.Q / s, n.b, s * n.c); },
          [&](const AbsSumNode&) { return f; },
          [&](const EuclNormNode&) { return f; },
          [&](const IndicatorBoxNode& n) -> ConvexFunction {
            return indicator_box(s * n.lo, s * n.hi);
          },
          [&](const IndicatorBallNode& n) -> ConvexFunction {
            return indicator_ball(s * n.center, s * n.radius);
          },
          [&](const HuberNode&) -> ConvexFunction {
            throw UnsupportedError("scale_epigraph: huber is not closed under epigraphical scaling");
          },
          [&](const PerturbedNode&) -> ConvexFunction {
            throw UnsupportedError("scale_epigraph: perturbed is not closed under epigraphical scaling");
          },
          [&](const ShiftedNode& n) -> ConvexFunction {
            return shifted(scale_epigraph(*n.base, s), s * n.offset);
          }},
      f.node());
}

/// f + mu/2 * ||.||^2 as a catalog member (mu > 0), via
/// Perturbed(scale_epigraph(f, 1+mu), mu/(1+mu)). Subject to the same
/// node-support limits as scale_epigraph.
inline ConvexFunction add_quadratic_regularizer(const ConvexFunction& f, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("add_quadratic_regularizer: mu must be > 0");
  return perturbed(scale_epigraph(f, 1.0 + mu), mu / (1.0 + mu));
}

namespace detail {

inline bool exact_eq(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a.data()[i] != b.data()[i]) return false;
  }
  return true;
}

inline bool exact_eq(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace detail

/// Exact structural equality (same node tree, bitwise-equal parameters).
/// Combined with normalize() this decides "equal up to an additive constant".
inline bool structurally_equal(const ConvexFunction& f, const ConvexFunction& g) {
  if (f.dim() != g.dim()) return false;
  if (f.node().index() != g.node().index()) return false;
  return std::visit(
      detail::Overloaded{
          [&](const ZeroNode&) { return true; },
          [&](const QuadraticNode& a) {
            const auto& b = *g.as<QuadraticNode>();
            return detail::exact_eq(a.Q, b.Q) && detail::exact_eq(a.b, b.b) && a.c == b.c;
          },
          [&](const AbsSumNode& a) { return a.weight == g.as<AbsSumNode>()->weight; },
          [&](const EuclNormNode& a) { return a.weight == g.as<EuclNormNode>()->weight; },
          [&](const IndicatorBoxNode& a) {
            const auto& b = *g.as<IndicatorBoxNode>();
            return detail::exact_eq(a.lo, b.lo) && detail::exact_eq(a.hi, b.hi);
          },
          [&](const IndicatorBallNode& a) {
            const auto& b = *g.as<IndicatorBallNode>();
            return detail::exact_eq(a.center, b.center) && a.radius == b.radius;
          },
          [&](const HuberNode& a) { return a.delta == g.as<HuberNode>()->delta; },
          [&](const PerturbedNode& a) {
            const auto& b = *g.as<PerturbedNode>();
            return a.sigma == b.sigma && structurally_equal(*a.base, *b.base);
          },
          [&](const ShiftedNode& a) {
            const auto& b = *g.as<ShiftedNode>();
            return a.offset == b.offset && structurally_equal(*a.base, *b.base);
          }},
      f.node());
}

inline std::string node_type_name(const ConvexFunction& f) {
  return std::visit(detail::Overloaded{[](const ZeroNode&) { return "zero"; },
                                       [](const QuadraticNode&) { return "quadratic"; },
                                       [](const AbsSumNode&) { return "abs_sum"; },
                                       [](const EuclNormNode&) { return "eucl_norm"; },
                                       [](const IndicatorBoxNode&) { return "indicator_box"; },
                                       [](const IndicatorBallNode&) { return "indicator_ball"; },
                                       [](const HuberNode&) { return "huber"; },
                                       [](const PerturbedNode&) { return "perturbed"; },
                                       [](const ShiftedNode&) { return "shifted"; }},
                    f.node());
}

inline std::string describe(const ConvexFunction& f) {
  std::ostringstream os;
  std::visit(detail::Overloaded{
                 [&](const ZeroNode&) { os << "zero(dim=" << f.dim() << ")"; },
                 [&](const QuadraticNode&) { os << "quadratic(dim=" << f.dim() << ")"; },
                 [&](const AbsSumNode& n) { os << "abs_sum(w=" << n.weight << ", dim=" << f.dim() << ")"; },
                 [&](const EuclNormNode& n) { os << "eucl_norm(w=" << n.weight << ", dim=" << f.dim() << ")"; },
                 [&](const IndicatorBoxNode&) { os << "indicator_box(dim=" << f.dim() << ")"; },
                 [&](const IndicatorBallNode& n) { os << "indicator_ball(r=" << n.radius << ", dim=" << f.dim() << ")"; },
                 [&](const HuberNode& n) { os << "huber(delta=" << n.delta << ", dim=" << f.dim() << ")"; },
                 [&](const PerturbedNode& n) { os << "perturbed(sigma=" << n.sigma << ", base=" << describe(*n.base) << ")"; },
                 [&](const ShiftedNode& n) { os << "shifted(c=" << n.offset << ", base=" << describe(*n.base) << ")"; }},
             f.node());
  return os.str();
}

}  // namespace proxkit
