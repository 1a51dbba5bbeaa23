#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "proxkit/function.hpp"
#include "proxkit/prox.hpp"
#include "proxkit/rng.hpp"

namespace proxkit {

/// a(t) = t/(1+t) on [0, inf], a(inf) = 1. Increasing, subadditive, < 1.
inline double gauge(double t) {
  if (std::isinf(t)) return 1.0;
  return t / (1.0 + t);
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

/// How shell suprema are probed.
///
/// Dimensions 1 and 2 use a deterministic mesh with covering radius
/// mesh_step; the pointwise gap between two nonexpansive maps is 2-Lipschitz,
/// so [mesh max, mesh max + 2*mesh_step] encloses the true supremum. Mesh
/// size grows like (radius/mesh_step)^dim, so pick mesh_step accordingly in
/// dimension 2.
///
/// Dimension >= 3 falls back to random sampling (samples_per_radius * radius
/// points per shell, plus the origin and axis extremes); that yields a
/// certified lower bound but only an empirical upper value, and the whole
/// estimate is flagged heuristic.
struct ProbeSpec {
  int shells = 20;
  double mesh_step = 1e-3;
  int samples_per_radius = 4096;
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
  int threads = 1;
};

struct ShellEstimate {
  int radius = 0;
  double lower = 0.0;  // certified: attained at a probed point
  double upper = 0.0;  // certified only when mesh == true
  std::int64_t samples = 0;
  bool mesh = true;
};

/// Enclosure of d(F, G) = sum_{i>=1} 2^-i a(sup_{||x||<=i} ||F(x)-G(x)||),
/// truncated after `shells` terms; the discarded tail lies in [0, 2^-shells)
/// and is folded into the upper bound.
struct MetricEstimate {
  Interval value;
  std::vector<ShellEstimate> shells;
  std::uint64_t seed = 0;
  /// Set when any shell used random sampling; value.hi is then an empirical
  /// estimate (plus the tail), not a certified bound.
  bool heuristic = false;

  double lower() const { return value.lo; }
  double upper() const { return value.hi; }
  double midpoint() const { return value.midpoint(); }
};

namespace detail {

/// Visits a finite point set whose covering radius for the ball B_radius(0)
/// is at most h. Dimensions 1 and 2 only.
template <class F>
void for_each_mesh_point(int dim, double radius, double h, F&& fn) {
  if (dim == 1) {
    const std::int64_t K = static_cast<std::int64_t>(std::ceil(radius / h));
    Vector x(1);
    for (std::int64_t j = 0; j <= K; ++j) {
      // Endpoints land on +-radius exactly; suprema of even profiles are
      // often attained there and tests rely on hitting them without rounding.
      x[0] = -radius + 2.0 * radius * (static_cast<double>(j) / static_cast<double>(K));
      fn(x);
    }
    return;
  }
  if (dim == 2) {
    // Square grid with spacing <= h*sqrt(2) has covering radius <= h; grid
    // points outside the ball are projected onto the sphere, which cannot
    // increase the covering radius (the projection is nonexpansive).
    const double target = h * std::sqrt(2.0);
    const std::int64_t K = static_cast<std::int64_t>(std::ceil(2.0 * radius / target));
    Vector x(2);
    for (std::int64_t j = 0; j <= K; ++j) {
      const double u = -radius + 2.0 * radius * (static_cast<double>(j) / static_cast<double>(K));
      for (std::int64_t k = 0; k <= K; ++k) {
        const double v = -radius + 2.0 * radius * (static_cast<double>(k) / static_cast<double>(K));
        x[0] = u;
        x[1] = v;
        const double n = x.norm();
        if (n > radius) x *= radius / n;
        fn(x);
      }
    }
    return;
  }
  throw std::logic_error("for_each_mesh_point: only dims 1 and 2 have meshes");
}

inline ShellEstimate shell_estimate(const OperatorHandle& F, const OperatorHandle& G,
                                    int radius, const ProbeSpec& spec) {
  ShellEstimate est;
  est.radius = radius;
  double sup = 0.0;
  std::int64_t count = 0;
  const auto probe = [&](const Vector& x) {
    const double gap = (F(x) - G(x)).norm();
    if (gap > sup) sup = gap;
    ++count;
  };
  if (F.dim <= 2) {
    for_each_mesh_point(F.dim, static_cast<double>(radius), spec.mesh_step, probe);
    est.mesh = true;
    est.lower = sup;
    est.upper = sup + 2.0 * spec.mesh_step;
  } else {
    SeededRng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(radius)));
    Vector x = Vector::Zero(F.dim);
    probe(x);
    for (int j = 0; j < F.dim; ++j) {
      x.setZero();
      x[j] = radius;
      probe(x);
      x[j] = -radius;
      probe(x);
    }
    const std::int64_t m = static_cast<std::int64_t>(spec.samples_per_radius) * radius;
    for (std::int64_t s = 0; s < m; ++s) probe(rng.in_ball(F.dim, radius));
    est.mesh = false;
    est.lower = sup;
    est.upper = sup;
  }
  est.samples = count;
  return est;
}

}  // namespace detail

/// Enclosure of the operator metric between two maps on the same space.
/// Deterministic for a fixed spec; with threads > 1 the shells are probed
/// concurrently (F and G must then be safe to apply from multiple threads)
/// and recombined in shell order, so the result does not change.
inline MetricEstimate operator_metric(const OperatorHandle& F, const OperatorHandle& G,
                                      const ProbeSpec& spec = {}) {
  if (F.dim != G.dim) throw std::invalid_argument("operator_metric: dimension mismatch");
  if (spec.shells < 1) throw std::invalid_argument("operator_metric: shells must be >= 1");
  if (!(spec.mesh_step > 0.0)) throw std::invalid_argument("operator_metric: mesh_step must be > 0");

  MetricEstimate est;
  est.seed = spec.seed;
  est.shells.resize(spec.shells);
  if (spec.threads > 1) {
    std::vector<std::future<ShellEstimate>> futs;
    futs.reserve(spec.shells);
    for (int i = 1; i <= spec.shells; ++i) {
      futs.push_back(std::async(std::launch::async, [&, i] {
        return detail::shell_estimate(F, G, i, spec);
      }));
    }
    for (int i = 0; i < spec.shells; ++i) est.shells[i] = futs[i].get();
  } else {
    for (int i = 1; i <= spec.shells; ++i) {
      est.shells[i - 1] = detail::shell_estimate(F, G, i, spec);
    }
  }

  // Fixed ascending summation order keeps the result reproducible bit for bit.
  double lo = 0.0, hi = 0.0, w = 1.0;
  for (const ShellEstimate& sh : est.shells) {
    w *= 0.5;
    lo += w * gauge(sh.lower);
    hi += w * gauge(sh.upper);
    est.heuristic = est.heuristic || !sh.mesh;
  }
  hi += w;  // tail: sum_{i>shells} 2^-i a(s_i) < 2^-shells
  est.value = Interval{lo, hi};
  return est;
}

/// d(df, dg) through the resolvent embedding: the distance between the
/// subdifferentials is probed entirely via the unit-parameter proximal maps.
inline MetricEstimate metric(const ConvexFunction& f, const ConvexFunction& g,
                             const ProbeSpec& spec = {}) {
  return operator_metric(prox_operator(f), prox_operator(g), spec);
}

// ---------------------------------------------------------------------------
// Axiom verification on a finite catalog
// ---------------------------------------------------------------------------

struct AxiomPair {
  int i = 0, j = 0;
  Interval d;
  bool same_class = false;  // equal after normalize(), i.e. differ by a constant
};

struct AxiomReport {
  std::vector<AxiomPair> pairs;      // ordered pairs i != j
  std::vector<Interval> self;        // d(f_i, f_i)
  bool identity_ok = false;          // every d(f,f) has lower bound exactly 0
  bool symmetry_ok = false;          // d(f,g) == d(g,f) bit for bit
  double triangle_min_margin = 0.0;  // min over triples of d(i,j)+d(j,k)-d(i,k), lower bounds
  double min_distinct_lower = 0.0;   // smallest certified d over distinct classes
  double max_same_class_upper = 0.0; // largest upper bound over same-class pairs (0 if none)
  bool separation_ok = false;

  bool passed(double triangle_tol = 1e-6) const {
    return identity_ok && symmetry_ok && separation_ok &&
           triangle_min_margin >= -triangle_tol;
  }
};

/// Checks the metric axioms empirically on a list of functions: vanishing on
/// the diagonal, symmetry (exact, since probes are deterministic), the
/// triangle inequality on certified lower bounds, and separation (zero within
/// an additive-constant class, strictly positive across classes).
inline AxiomReport verify_metric_axioms(const std::vector<ConvexFunction>& fns,
                                        const ProbeSpec& spec = {},
                                        double same_class_tol = 5e-3) {
  const int n = static_cast<int>(fns.size());
  if (n < 2) throw std::invalid_argument("verify_metric_axioms: need at least 2 functions");

  std::vector<OperatorHandle> ops;
  ops.reserve(n);
  for (const ConvexFunction& f : fns) ops.push_back(prox_operator(f));

  AxiomReport rep;
  std::vector<std::vector<Interval>> d(n, std::vector<Interval>(n));
  rep.identity_ok = true;
  rep.symmetry_ok = true;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const MetricEstimate e = operator_metric(ops[i], ops[j], spec);
      d[i][j] = e.value;
      if (i == j) {
        rep.self.push_back(e.value);
        rep.identity_ok = rep.identity_ok && e.value.lo == 0.0;
      } else {
        AxiomPair p;
        p.i = i;
        p.j = j;
        p.d = e.value;
        p.same_class = structurally_equal(normalize(fns[i]), normalize(fns[j]));
        rep.pairs.push_back(p);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      rep.symmetry_ok = rep.symmetry_ok && d[i][j].lo == d[j][i].lo && d[i][j].hi == d[j][i].hi;
    }
  }

  rep.triangle_min_margin = kInf;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        const double margin = d[i][j].lo + d[j][k].lo - d[i][k].lo;
        if (margin < rep.triangle_min_margin) rep.triangle_min_margin = margin;
      }
    }
  }

  rep.min_distinct_lower = kInf;
  rep.max_same_class_upper = 0.0;
  bool has_distinct = false;
  for (const AxiomPair& p : rep.pairs) {
    if (p.same_class) {
      rep.max_same_class_upper = std::max(rep.max_same_class_upper, p.d.hi);
    } else {
      has_distinct = true;
      rep.min_distinct_lower = std::min(rep.min_distinct_lower, p.d.lo);
    }
  }
  if (!has_distinct) rep.min_distinct_lower = 0.0;
  rep.separation_ok = (!has_distinct || rep.min_distinct_lower > 0.0) &&
                      rep.max_same_class_upper <= same_class_tol;
  return rep;
}

}  // namespace proxkit
