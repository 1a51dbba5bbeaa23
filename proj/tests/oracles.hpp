// Reference implementations used only by tests. Everything here recomputes
// expected values through routes that share no code with the library paths
// under test: raw grid scans over the prox objective, directly coded series,
// and a substitution-based closed form for perturbed nodes.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "proxkit/function.hpp"
#include "proxkit/prox.hpp"

namespace oracle {

using Fn1d = std::function<double(double)>;

/// Literal full scan of phi(y) = f(y) + (y-x)^2/(2 lambda) over [lo, hi]
/// with step h. Slow; exists to validate prox_1d below.
inline double prox_1d_full(const Fn1d& f, double lambda, double x, double lo,
                           double hi, double h) {
  double best_y = lo, best_v = std::numeric_limits<double>::infinity();
  const long long n = static_cast<long long>(std::ceil((hi - lo) / h));
  for (long long i = 0; i <= n; ++i) {
    const double y = lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(n));
    const double v = f(y) + (y - x) * (y - x) / (2.0 * lambda);
    if (v < best_v) {
      best_v = v;
      best_y = y;
    }
  }
  return best_y;
}

/// Staged grid refinement for the same problem. The objective is convex
/// (catalog f plus a quadratic), so the true minimizer lies within one grid
/// cell of the grid argmin; shrinking to the argmin +-2 cells per stage
/// keeps it bracketed. Equivalence with the literal scan is itself tested.
inline double prox_1d(const Fn1d& f, double lambda, double x, double lo, double hi) {
  const int pts = 2000;
  for (int stage = 0; stage < 40 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++stage) {
    int best_i = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= pts; ++i) {
      const double y = lo + (hi - lo) * (static_cast<double>(i) / pts);
      const double v = f(y) + (y - x) * (y - x) / (2.0 * lambda);
      if (v < best_v) {
        best_v = v;
        best_i = i;
      }
    }
    const double step = (hi - lo) / pts;
    const double new_lo = lo + step * std::max(0, best_i - 2);
    const double new_hi = lo + step * std::min(pts, best_i + 2);
    lo = new_lo;
    hi = new_hi;
  }
  return 0.5 * (lo + hi);
}

/// Plain-coded 1-D evaluators mirroring the written definitions of the
/// catalog members (not the library's visit machinery).
inline Fn1d abs_fn(double w) {
  return [w](double y) { return w * std::abs(y); };
}
inline Fn1d quad_fn(double q, double b, double c) {
  return [=](double y) { return 0.5 * q * y * y + b * y + c; };
}
inline Fn1d huber_fn(double delta) {
  return [delta](double y) {
    const double a = std::abs(y);
    return a <= delta ? 0.5 * a * a : delta * (a - 0.5 * delta);
  };
}
inline Fn1d box_fn(double lo, double hi) {
  return [=](double y) {
    return (y < lo || y > hi) ? std::numeric_limits<double>::infinity() : 0.0;
  };
}
inline Fn1d perturbed_fn(const Fn1d& base, double sigma) {
  return [base, sigma](double y) {
    const double k = 1.0 - sigma;
    return sigma / k * 0.5 * y * y + k * base(y / k);
  };
}

/// sum_{i=1}^{terms} 2^-i * (i/2) / (1 + i/2): the shell series for the
/// distance between the zero function and the half-squared-norm, whose shell
/// suprema are exactly i/2. Ascending order with a halving weight, matching
/// how the library accumulates shells.
inline double halfnorm_series(int terms) {
  double s = 0.0, w = 1.0;
  for (int i = 1; i <= terms; ++i) {
    w *= 0.5;
    const double t = static_cast<double>(i) / 2.0;
    s += w * (t / (1.0 + t));
  }
  return s;
}

/// Independent closed form for P_{lambda g} when g is base perturbed by
/// sigma. Substituting y = (1-sigma) u into the optimality inclusion
/// 0 in dg(y) + (y - x)/lambda collapses it to
///   u + (1/A) d(base)(u) contains x/(lambda A),  A = sigma + (1-sigma)/lambda,
/// i.e. u = P_{(1/A) base}(x/(lambda A)). Shares the base's closed forms with
/// the library but none of the structural or iterative perturbed paths.
inline proxkit::Vector perturbed_prox_reference(const proxkit::ConvexFunction& base,
                                                double sigma, double lambda,
                                                const proxkit::Vector& x) {
  const double A = sigma + (1.0 - sigma) / lambda;
  return (1.0 - sigma) *
         proxkit::prox(base, 1.0 / A, x / (lambda * A)).point;
}

}  // namespace oracle
