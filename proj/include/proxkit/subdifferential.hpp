#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "proxkit/function.hpp"
#include "proxkit/rng.hpp"

namespace proxkit {

/// Closed convex set arising as a subdifferential value of a catalog node.
/// The five shapes below are closed under the translation needed by the
/// perturbed node; that closure is what keeps this exact rather than sampled.
class SubdiffSet {
 public:
  enum class Kind { Empty, Point, Box, Ball, Ray };

  static SubdiffSet empty(int dim, std::string reason) {
    SubdiffSet s;
    s.kind_ = Kind::Empty;
    s.dim_ = dim;
    s.reason_ = std::move(reason);
    return s;
  }
  static SubdiffSet point(Vector p) {
    SubdiffSet s;
    s.kind_ = Kind::Point;
    s.dim_ = static_cast<int>(p.size());
    s.a_ = std::move(p);
    return s;
  }
  /// Axis-aligned product of intervals; entries may be +-inf.
  static SubdiffSet box(Vector lo, Vector hi) {
    SubdiffSet s;
    s.kind_ = Kind::Box;
    s.dim_ = static_cast<int>(lo.size());
    s.a_ = std::move(lo);
    s.b_ = std::move(hi);
    return s;
  }
  static SubdiffSet ball(Vector center, double radius) {
    SubdiffSet s;
    s.kind_ = Kind::Ball;
    s.dim_ = static_cast<int>(center.size());
    s.a_ = std::move(center);
    s.radius_ = radius;
    return s;
  }
  /// {origin + t*dir : t >= 0}, dir a unit vector.
  static SubdiffSet ray(Vector origin, Vector dir) {
    SubdiffSet s;
    s.kind_ = Kind::Ray;
    s.dim_ = static_cast<int>(origin.size());
    s.a_ = std::move(origin);
    s.b_ = std::move(dir);
    return s;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_empty() const { return kind_ == Kind::Empty; }
  const std::string& reason() const { return reason_; }

  /// Euclidean projection of v onto the set. Throws for the empty set.
  Vector nearest(const Vector& v) const {
    switch (kind_) {
      case Kind::Empty:
        throw std::logic_error("SubdiffSet::nearest: set is empty (" + reason_ + ")");
      case Kind::Point:
        return a_;
      case Kind::Box: {
        Vector y(v.size());
        for (int j = 0; j < v.size(); ++j) y[j] = std::min(std::max(v[j], a_[j]), b_[j]);
        return y;
      }
      case Kind::Ball: {
        const Vector d = v - a_;
        const double n = d.norm();
        if (n <= radius_) return v;
        return a_ + (radius_ / n) * d;
      }
      case Kind::Ray: {
        const double t = std::max(0.0, b_.dot(v - a_));
        return a_ + t * b_;
      }
    }
    throw std::logic_error("SubdiffSet::nearest: unreachable");
  }

  double dist(const Vector& v) const {
    if (kind_ == Kind::Empty) return kInf;
    return (v - nearest(v)).norm();
  }

  bool contains(const Vector& v, double tol = 1e-12) const {
    if (kind_ == Kind::Empty) return false;
    return dist(v) <= tol;
  }

  /// dist(0, set); the quantity certificates and optimality checks consume.
  double min_norm() const {
    if (kind_ == Kind::Empty) return kInf;
    return dist(Vector::Zero(dim_));
  }

  /// A member of the set. Unbounded directions are explored up to `extent`.
  Vector sample(SeededRng& rng, double extent = 1.0) const {
    switch (kind_) {
      case Kind::Empty:
        throw std::logic_error("SubdiffSet::sample: set is empty (" + reason_ + ")");
      case Kind::Point:
        return a_;
      case Kind::Box: {
        Vector y(dim_);
        for (int j = 0; j < dim_; ++j) {
          const bool lo_inf = std::isinf(a_[j]);
          const bool hi_inf = std::isinf(b_[j]);
          if (lo_inf && hi_inf) {
            y[j] = rng.uniform(-extent, extent);
          } else if (lo_inf) {
            y[j] = rng.uniform(b_[j] - extent, b_[j]);
          } else if (hi_inf) {
            y[j] = rng.uniform(a_[j], a_[j] + extent);
          } else {
            y[j] = rng.uniform(a_[j], b_[j]);
          }
        }
        return y;
      }
      case Kind::Ball:
        return a_ + rng.in_ball(dim_, radius_);
      case Kind::Ray:
        return a_ + rng.uniform(0.0, extent) * b_;
    }
    throw std::logic_error("SubdiffSet::sample: unreachable");
  }

  /// set + offset. All five shapes are closed under this.
  SubdiffSet translated(const Vector& offset) const {
    SubdiffSet s = *this;
    switch (kind_) {
      case Kind::Empty:
        break;
      case Kind::Point:
      case Kind::Ball:
        s.a_ += offset;
        break;
      case Kind::Box:
        for (int j = 0; j < dim_; ++j) {
          if (std::isfinite(s.a_[j])) s.a_[j] += offset[j];
          if (std::isfinite(s.b_[j])) s.b_[j] += offset[j];
        }
        break;
      case Kind::Ray:
        s.a_ += offset;
        break;
    }
    return s;
  }

 private:
  Kind kind_ = Kind::Empty;
  int dim_ = 0;
  Vector a_, b_;
  double radius_ = 0.0;
  std::string reason_;
};

/// Exact subdifferential of f at x.
inline SubdiffSet subdifferential(const ConvexFunction& f, const Vector& x) {
  detail::check_dim(f, x, "subdifferential");
  return std::visit(
      detail::Overloaded{
          [&](const ZeroNode&) { return SubdiffSet::point(Vector::Zero(x.size())); },
          [&](const QuadraticNode& n) { return SubdiffSet::point(n.Q * x + n.b); },
          [&](const AbsSumNode& n) {
            Vector lo(x.size()), hi(x.size());
            for (int j = 0; j < x.size(); ++j) {
              if (x[j] > 0.0) {
                lo[j] = hi[j] = n.weight;
              } else if (x[j] < 0.0) {
                lo[j] = hi[j] = -n.weight;
              } else {
                lo[j] = -n.weight;
                hi[j] = n.weight;
              }
            }
            return SubdiffSet::box(std::move(lo), std::move(hi));
          },
          [&](const EuclNormNode& n) {
            const double nx = x.norm();
            if (nx == 0.0) return SubdiffSet::ball(Vector::Zero(x.size()), n.weight);
            return SubdiffSet::point((n.weight / nx) * x);
          },
          [&](const IndicatorBoxNode& n) {
            Vector lo(x.size()), hi(x.size());
            for (int j = 0; j < x.size(); ++j) {
              const double tol = detail::indicator_tol(std::max(std::abs(n.lo[j]), std::abs(n.hi[j])));
              if (x[j] < n.lo[j] - tol || x[j] > n.hi[j] + tol) {
                return SubdiffSet::empty(static_cast<int>(x.size()),
                                         "point outside the box");
              }
              const bool at_lo = std::abs(x[j] - n.lo[j]) <= tol;
              const bool at_hi = std::abs(x[j] - n.hi[j]) <= tol;
              lo[j] = at_lo ? -kInf : 0.0;
              hi[j] = at_hi ? kInf : 0.0;
            }
            return SubdiffSet::box(std::move(lo), std::move(hi));
          },
          [&](const IndicatorBallNode& n) {
            const Vector d = x - n.center;
            const double nd = d.norm();
            const double tol = detail::indicator_tol(n.radius + n.center.norm());
            if (nd > n.radius + tol) {
              return SubdiffSet::empty(static_cast<int>(x.size()),
                                       "point outside the ball");
            }
            if (nd >= n.radius - tol) {
              // Boundary: normal cone is the outward ray.
              return SubdiffSet::ray(Vector::Zero(x.size()), d / nd);
            }
            return SubdiffSet::point(Vector::Zero(x.size()));
          },
          [&](const HuberNode& n) {
            Vector g(x.size());
            for (int j = 0; j < x.size(); ++j) {
              g[j] = std::abs(x[j]) <= n.delta ? x[j] : n.delta * (x[j] > 0 ? 1.0 : -1.0);
            }
            return SubdiffSet::point(std::move(g));
          },
          [&](const PerturbedNode& n) {
            const double k = 1.0 - n.sigma;
            const SubdiffSet inner = subdifferential(*n.base, x / k);
            return inner.translated((n.sigma / k) * x);
          },
          [&](const ShiftedNode& n) { return subdifferential(*n.base, x); }},
      f.node());
}

}  // namespace proxkit
