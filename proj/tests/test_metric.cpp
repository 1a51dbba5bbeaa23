#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "oracles.hpp"
#include "proxkit/metric.hpp"

using namespace proxkit;

namespace {

Vector vec1(double a) {
  Vector v(1);
  v[0] = a;
  return v;
}

ProbeSpec coarse_spec(int shells = 8, double h = 0.05) {
  ProbeSpec spec;
  spec.shells = shells;
  spec.mesh_step = h;
  return spec;
}

}  // namespace

TEST_CASE("gauge is increasing, subadditive, bounded by one") {
  CHECK(gauge(0.0) == 0.0);
  CHECK(gauge(3.0) == 0.75);
  CHECK(gauge(kInf) == 1.0);
  double prev = -1.0;
  for (double t = 0.0; t <= 50.0; t += 0.37) {
    const double g = gauge(t);
    CHECK(g > prev);
    CHECK(g < 1.0);
    prev = g;
  }
  for (const double s : {0.2, 1.0, 4.0}) {
    for (const double t : {0.1, 2.5, 9.0}) {
      CHECK(gauge(s + t) <= gauge(s) + gauge(t) + 1e-15);
    }
  }
}

TEST_CASE("zero versus half squared norm matches the series oracle") {
  // P1 of x^2/2 is x/2, so the gap against the identity at radius i is i/2,
  // attained at the mesh endpoint. The lower bound is then the exact
  // partial sum of 2^-i * a(i/2).
  ProbeSpec spec;
  spec.shells = 20;
  spec.mesh_step = 1e-3;
  const MetricEstimate d = metric(zero(1), quadratic1d(1.0), spec);
  CHECK_FALSE(d.heuristic);
  CHECK((int)d.shells.size() == 20);
  const double series20 = oracle::halfnorm_series(20);
  CHECK(d.lower() == series20);  // endpoint-exact mesh, identical summation
  CHECK(d.upper() >= oracle::halfnorm_series(40));
  CHECK(d.upper() - d.lower() < 3e-3);
  CHECK(d.midpoint() == Catch::Approx((d.lower() + d.upper()) / 2.0));
}

TEST_CASE("identity and symmetry are exact") {
  const ConvexFunction f = abs_sum(1.0, 1);
  const ConvexFunction g = quadratic1d(2.0, 1.0);
  const ProbeSpec spec = coarse_spec();
  const MetricEstimate self = metric(f, f, spec);
  CHECK(self.lower() == 0.0);
  const MetricEstimate dfg = metric(f, g, spec);
  const MetricEstimate dgf = metric(g, f, spec);
  CHECK(dfg.lower() == dgf.lower());
  CHECK(dfg.upper() == dgf.upper());
}

TEST_CASE("shifted copies are metrically indistinguishable") {
  const ConvexFunction f = huber(0.5, 1);
  const ConvexFunction g = shifted(f, 42.0);
  const MetricEstimate d = metric(f, g, coarse_spec(20, 1e-3));
  CHECK(d.lower() == 0.0);
  CHECK(d.upper() < 5e-3);
}

TEST_CASE("metric axioms hold on a small catalog") {
  std::vector<ConvexFunction> fns = {
      zero(1),
      quadratic1d(1.0),
      abs_sum(1.0, 1),
      shifted(abs_sum(1.0, 1), 3.0),
      huber(0.5, 1),
  };
  // Mesh fine enough that same-class pairs certify below the 5e-3 default:
  // their upper bound is about a(2h) + 2^-shells.
  const AxiomReport rep = verify_metric_axioms(fns, coarse_spec(12, 1e-3));
  CHECK(rep.identity_ok);
  CHECK(rep.symmetry_ok);
  CHECK(rep.triangle_min_margin >= -1e-6);
  CHECK(rep.min_distinct_lower > 0.0);
  CHECK(rep.max_same_class_upper < 5e-3);
  CHECK(rep.separation_ok);
  CHECK(rep.passed());
  // The shifted |.| pairs off with plain |.| as the same operator class.
  bool found_same_class_pair = false;
  for (const AxiomPair& p : rep.pairs) {
    if (p.same_class) {
      found_same_class_pair = true;
      CHECK(p.d.lo == 0.0);
    }
  }
  CHECK(found_same_class_pair);
}

TEST_CASE("two dimensional mesh brackets a known gap") {
  // P1 of ||.|| shrinks by one unit toward the origin, so against the
  // identity the gap is min(||x||, 1): below 0.5 for radius-... no — it is
  // exactly 1 on every shell of radius >= 1, and a(1) = 0.5, so the metric
  // is 0.5 * a(r1 gap) + sum_{i>=2} 2^-i * 0.5 ... with r=1 shells the gap
  // is min(i, 1) = 1 for all i >= 1, giving sum 2^-i * 0.5 = 0.5 ... times
  // a(1) = 0.5 -> total 0.5.
  ProbeSpec spec;
  spec.shells = 14;
  spec.mesh_step = 0.02;
  const MetricEstimate d = metric(zero(2), eucl_norm(1.0, 2), spec);
  CHECK_FALSE(d.heuristic);
  CHECK(d.lower() >= 0.48);
  CHECK(d.upper() <= 0.52);
  CHECK(d.lower() <= 0.5);
  CHECK(d.upper() >= 0.5);
}

TEST_CASE("dimension three and up falls back to sampling") {
  ProbeSpec spec;
  spec.shells = 6;
  spec.samples_per_radius = 256;
  const ConvexFunction g3 = quadratic(Matrix::Identity(3, 3), Vector::Zero(3));
  const MetricEstimate d = metric(zero(3), g3, spec);
  CHECK(d.heuristic);
  // No mesh enclosure: per-shell upper equals the empirical max, and the
  // interval width is exactly the 2^-shells tail.
  CHECK(d.upper() - d.lower() == std::pow(2.0, -spec.shells));
  CHECK(d.lower() > 0.0);
  for (const ShellEstimate& sh : d.shells) {
    CHECK_FALSE(sh.mesh);
    CHECK(sh.lower == sh.upper);
  }
}

TEST_CASE("more shells only add mass") {
  const ConvexFunction f = zero(1);
  const ConvexFunction g = quadratic1d(1.0);
  const MetricEstimate d10 = metric(f, g, coarse_spec(10, 1e-3));
  const MetricEstimate d20 = metric(f, g, coarse_spec(20, 1e-3));
  CHECK(d10.lower() < d20.lower());
  // The deeper tail certificate is tighter.
  CHECK(d20.upper() - d20.lower() < d10.upper() - d10.lower());
}

TEST_CASE("threaded evaluation is bitwise identical to serial") {
  ProbeSpec serial = coarse_spec(12, 2e-3);
  ProbeSpec threaded = serial;
  threaded.threads = 3;
  const ConvexFunction f = abs_sum(1.0, 1);
  const ConvexFunction g = huber(0.5, 1);
  const MetricEstimate a = metric(f, g, serial);
  const MetricEstimate b = metric(f, g, threaded);
  CHECK(a.lower() == b.lower());
  CHECK(a.upper() == b.upper());
  REQUIRE(a.shells.size() == b.shells.size());
  for (size_t i = 0; i < a.shells.size(); ++i) {
    CHECK(a.shells[i].lower == b.shells[i].lower);
    CHECK(a.shells[i].upper == b.shells[i].upper);
  }
}

TEST_CASE("operator metric accepts raw handles") {
  const OperatorHandle id{[](const Vector& x) { return x; }, 1, "identity"};
  const OperatorHandle half{[](const Vector& x) { return (0.5 * x).eval(); }, 1, "half"};
  const MetricEstimate d = operator_metric(id, half, coarse_spec(20, 1e-3));
  CHECK(d.lower() == oracle::halfnorm_series(20));
}

TEST_CASE("metric validation") {
  ProbeSpec bad;
  bad.shells = 0;
  CHECK_THROWS_AS(metric(zero(1), zero(1), bad), std::invalid_argument);
  bad = ProbeSpec{};
  bad.mesh_step = 0.0;
  CHECK_THROWS_AS(metric(zero(1), zero(1), bad), std::invalid_argument);
  // Dimension mismatch between the two operators.
  CHECK_THROWS_AS(metric(zero(1), zero(2), ProbeSpec{}), std::invalid_argument);
}
