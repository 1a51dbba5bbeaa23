#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "proxkit/prox.hpp"
#include "proxkit/rng.hpp"

namespace proxkit {

enum class ProbeVerdict { Positive, Negative, Inconclusive };

inline const char* to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::Positive: return "positive";
    case ProbeVerdict::Negative: return "negative";
    case ProbeVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct IterateOptions {
  int max_steps = 200000;
  /// Certification target for ||final - true limit||.
  double target_accuracy = 1e-9;
};

struct IterateOutcome {
  Vector point;            // last iterate
  int steps = 0;
  double residual = 0.0;   // ||x_{n} - x_{n-1}|| at the last step
  /// Bound on ||point - lim_n T^n x0||, certified from the residual and the
  /// observed contraction ratio (sum of the geometric tail). Infinite when
  /// not converged.
  double limit_accuracy = 0.0;
  bool converged = false;
};

/// Runs x <- T(x) until the distance to the limit is certifiably below
/// target_accuracy or the budget runs out. Certification: if residuals decay
/// with ratio rho < 1 then ||x_n - x*|| <= r_n * rho/(1 - rho); the ratio is
/// estimated as the max over the last three steps, so plateaus (ratio ~ 1,
/// e.g. soft-thresholding far from the kink) postpone the stop instead of
/// corrupting the bound. `on_step(n, x)` fires after every application.
template <class Callback>
IterateOutcome iterate(const OperatorHandle& T, Vector x, const IterateOptions& opts,
                       Callback&& on_step) {
  IterateOutcome out;
  double ratios[3] = {kInf, kInf, kInf};
  double r_prev = -1.0;
  for (int n = 1; n <= opts.max_steps; ++n) {
    Vector next = T(x);
    const double r = (next - x).norm();
    x = std::move(next);
    on_step(n, x);
    out.steps = n;
    out.residual = r;
    if (r == 0.0) {
      out.converged = true;
      out.limit_accuracy = 0.0;
      break;
    }
    if (r_prev > 0.0) {
      ratios[n % 3] = r / r_prev;
      const double rho = std::max({ratios[0], ratios[1], ratios[2]});
      if (rho < 0.9999) {
        const double bound = r * rho / (1.0 - rho);
        out.limit_accuracy = bound;
        if (bound <= opts.target_accuracy) {
          out.converged = true;
          break;
        }
      }
    }
    r_prev = r;
  }
  out.point = std::move(x);
  if (!out.converged) out.limit_accuracy = kInf;
  return out;
}

inline IterateOutcome iterate(const OperatorHandle& T, Vector x,
                              const IterateOptions& opts = {}) {
  return iterate(T, std::move(x), opts, [](int, const Vector&) {});
}

struct DynamicsOptions {
  int max_steps = 200000;
  /// Limit spread at or below this is a positive verdict; at or above
  /// spread_factor times this, negative. Per-start limits are resolved to
  /// tol/20 so the gray zone is set by the dynamics, not by the solver.
  double tol = 1e-8;
  double spread_factor = 10.0;
  int starts = 64;
};

struct StartOutcome {
  Vector start;
  Vector limit;            // last iterate; within limit_accuracy of the true limit
  int steps = 0;
  double limit_accuracy = 0.0;
  bool converged = false;
};

namespace detail {

/// Axis extremes of B_s(0) followed by a low-discrepancy fill, `count` total.
inline std::vector<Vector> probe_starts(int dim, double radius, int count) {
  std::vector<Vector> starts;
  for (int j = 0; j < dim && static_cast<int>(starts.size()) < count; ++j) {
    Vector e = Vector::Zero(dim);
    e[j] = radius;
    starts.push_back(e);
    if (static_cast<int>(starts.size()) < count) starts.push_back(-e);
  }
  const int fill = count - static_cast<int>(starts.size());
  if (fill > 0) {
    for (Vector& v : halton_in_ball(dim, fill, radius)) starts.push_back(std::move(v));
  }
  return starts;
}

inline double limit_diameter(const std::vector<StartOutcome>& outcomes) {
  double diam = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    for (std::size_t j = i + 1; j < outcomes.size(); ++j) {
      diam = std::max(diam, (outcomes[i].limit - outcomes[j].limit).norm());
    }
  }
  return diam;
}

}  // namespace detail

struct SuperRegularityReport {
  ProbeVerdict verdict = ProbeVerdict::Inconclusive;
  /// Diameter of the empirical limit set over all starts.
  double spread = 0.0;
  /// Common limit candidate (first start's limit); meaningful when positive.
  Vector representative;
  int num_converged = 0;
  std::vector<StartOutcome> outcomes;
  std::string note;
};

/// Tests whether T^n converges to one point uniformly over B_radius(0):
/// iterates from axis extremes plus a low-discrepancy fill and measures the
/// spread of the limits. Spread <= tol: positive (single attractor at this
/// resolution). Spread >= spread_factor * tol: negative (genuinely distinct
/// limits). Anything else, or any non-converged start: inconclusive.
inline SuperRegularityReport super_regularity_probe(const OperatorHandle& T,
                                                    double ball_radius,
                                                    const DynamicsOptions& opts = {}) {
  if (!(ball_radius > 0.0)) {
    throw std::invalid_argument("super_regularity_probe: ball_radius must be > 0");
  }
  SuperRegularityReport rep;
  IterateOptions it;
  it.max_steps = opts.max_steps;
  it.target_accuracy = opts.tol / 20.0;
  bool all_converged = true;
  for (const Vector& x0 : detail::probe_starts(T.dim, ball_radius, opts.starts)) {
    IterateOutcome out = iterate(T, x0, it);
    StartOutcome so;
    so.start = x0;
    so.limit = std::move(out.point);
    so.steps = out.steps;
    so.limit_accuracy = out.limit_accuracy;
    so.converged = out.converged;
    all_converged = all_converged && out.converged;
    rep.num_converged += out.converged ? 1 : 0;
    rep.outcomes.push_back(std::move(so));
  }
  if (!all_converged) {
    rep.verdict = ProbeVerdict::Inconclusive;
    rep.note = "some trajectories did not certifiably converge within the budget";
    return rep;
  }
  rep.spread = detail::limit_diameter(rep.outcomes);
  rep.representative = rep.outcomes.front().limit;
  if (rep.spread <= opts.tol) {
    rep.verdict = ProbeVerdict::Positive;
  } else if (rep.spread >= opts.spread_factor * opts.tol) {
    rep.verdict = ProbeVerdict::Negative;
    rep.note = "limits of distinct starts separate";
  } else {
    rep.verdict = ProbeVerdict::Inconclusive;
    rep.note = "limit spread falls between the verdict thresholds";
  }
  return rep;
}

struct StabilityReport {
  ProbeVerdict verdict = ProbeVerdict::Inconclusive;
  /// Smallest n such that every observed trajectory satisfies
  /// ||x_m - target|| < eps for all m >= n (certified through the limit
  /// accuracy bound once a trajectory converges).
  int n0 = 0;
  /// max over starts of ||limit - target||.
  double worst_limit_gap = 0.0;
  int num_starts = 0;
  std::vector<StartOutcome> outcomes;
  std::string note;
};

/// Orbit-stability check: runs T from starts across B_radius(0) and reports
/// after how many steps all trajectories enter and stay in B_eps(target).
/// The tail beyond the observed steps is covered by the convergence
/// certificate: once ||limit - target|| + 2 * limit_accuracy < eps the
/// trajectory cannot leave again (distance to its own limit is nonexpansive
/// under a firmly nonexpansive T).
inline StabilityReport stability_probe(const OperatorHandle& T, const Vector& target,
                                       double ball_radius, double eps,
                                       const DynamicsOptions& opts = {}) {
  if (!(eps > 0.0)) throw std::invalid_argument("stability_probe: eps must be > 0");
  if (!(ball_radius > 0.0)) {
    throw std::invalid_argument("stability_probe: ball_radius must be > 0");
  }
  StabilityReport rep;
  IterateOptions it;
  it.max_steps = opts.max_steps;
  it.target_accuracy = std::min(opts.tol / 20.0, eps / 100.0);
  int n0 = 0;
  bool all_certified = true;
  bool escapes = false;
  for (const Vector& x0 : detail::probe_starts(T.dim, ball_radius, opts.starts)) {
    int last_violation = (x0 - target).norm() >= eps ? 0 : -1;
    IterateOutcome out = iterate(T, x0, it, [&](int n, const Vector& x) {
      if ((x - target).norm() >= eps) last_violation = n;
    });
    StartOutcome so;
    so.start = x0;
    so.limit = std::move(out.point);
    so.steps = out.steps;
    so.limit_accuracy = out.limit_accuracy;
    so.converged = out.converged;
    ++rep.num_starts;
    const double gap = (so.limit - target).norm();
    rep.worst_limit_gap = std::max(rep.worst_limit_gap, gap);
    if (!out.converged) {
      all_certified = false;
    } else if (gap + 2.0 * out.limit_accuracy >= eps) {
      // The trajectory settles at (or cannot be separated from) a point
      // outside B_eps(target): it violates for all large n.
      escapes = true;
    }
    n0 = std::max(n0, last_violation + 1);
    rep.outcomes.push_back(std::move(so));
  }
  rep.n0 = n0;
  if (escapes) {
    rep.verdict = ProbeVerdict::Negative;
    rep.note = "a trajectory settles outside the eps-ball around the target";
  } else if (!all_certified) {
    rep.verdict = ProbeVerdict::Inconclusive;
    rep.note = "some trajectories did not certifiably converge within the budget";
  } else {
    rep.verdict = ProbeVerdict::Positive;
  }
  return rep;
}

}  // namespace proxkit
