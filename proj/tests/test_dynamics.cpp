#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "proxkit/dynamics.hpp"
#include "proxkit/prox.hpp"

using namespace proxkit;

namespace {

Vector vec1(double a) {
  Vector v(1);
  v[0] = a;
  return v;
}

}  // namespace

TEST_CASE("iterate certifies the distance to the limit") {
  const OperatorHandle half{[](const Vector& x) { return (0.5 * x).eval(); }, 1, "half"};
  const IterateOutcome out = iterate(half, vec1(1.0));
  CHECK(out.converged);
  CHECK(out.limit_accuracy <= 1e-9);
  CHECK(std::abs(out.point[0]) <= out.limit_accuracy);

  // Slow contraction: the geometric-tail certificate must still stop in
  // budget and the bound must actually cover the limit gap.
  const double c = 3.0;
  const OperatorHandle slow{
      [c](const Vector& x) { return (0.999 * x + vec1(0.001 * c)).eval(); }, 1, "slow"};
  const IterateOutcome sout = iterate(slow, vec1(c + 1.0));
  CHECK(sout.converged);
  CHECK(sout.steps < 200000);
  CHECK(std::abs(sout.point[0] - c) <= sout.limit_accuracy);
  CHECK(sout.limit_accuracy <= 1e-9);
}

TEST_CASE("iterate detects exact fixed points") {
  const OperatorHandle T = prox_operator(indicator_box(vec1(-1), vec1(1)));
  const IterateOutcome out = iterate(T, vec1(5.0));
  CHECK(out.converged);
  CHECK(out.limit_accuracy == 0.0);
  CHECK(out.point[0] == 1.0);
  CHECK(out.steps == 2);  // 5 -> 1, then 1 -> 1
}

TEST_CASE("iterate gives up gracefully on non-contractive maps") {
  const OperatorHandle rot{
      [](const Vector& x) {
        Vector y(2);
        y[0] = -x[1];
        y[1] = x[0];
        return y;
      },
      2, "quarter-turn"};
  IterateOptions opts;
  opts.max_steps = 500;
  Vector x0(2);
  x0 << 1.0, 0.0;
  const IterateOutcome out = iterate(rot, x0, opts);
  CHECK_FALSE(out.converged);
  CHECK(out.limit_accuracy == kInf);
  CHECK(out.steps == 500);
}

TEST_CASE("probe starts cover axis extremes and stay in the ball") {
  const auto starts = detail::probe_starts(2, 3.0, 10);
  REQUIRE(starts.size() == 10);
  CHECK(starts[0][0] == 3.0);
  CHECK(starts[1][0] == -3.0);
  CHECK(starts[2][1] == 3.0);
  CHECK(starts[3][1] == -3.0);
  for (const Vector& s : starts) CHECK(s.norm() <= 3.0 + 1e-12);
}

TEST_CASE("super-regularity probe: single attractor cases come back positive") {
  DynamicsOptions opts;
  opts.starts = 16;

  // Strongly convex: unique minimizer 2.
  const auto quad = super_regularity_probe(prox_operator(quadratic1d(1.0, -2.0)), 5.0, opts);
  CHECK(quad.verdict == ProbeVerdict::Positive);
  CHECK(quad.num_converged == 16);
  CHECK(std::abs(quad.representative[0] - 2.0) <= 1e-8);

  // Soft thresholding reaches 0 exactly in finitely many steps.
  const auto soft = super_regularity_probe(prox_operator(abs_sum(1.0, 1)), 5.0, opts);
  CHECK(soft.verdict == ProbeVerdict::Positive);
  CHECK(soft.representative[0] == 0.0);

  // Norm shrinkage in the plane.
  const auto norm2 = super_regularity_probe(prox_operator(eucl_norm(1.0, 2)), 5.0, opts);
  CHECK(norm2.verdict == ProbeVerdict::Positive);
  CHECK(norm2.representative.norm() <= 1e-8);

  // Scaled identity from a quadratic perturbation of the zero function.
  const auto pert = super_regularity_probe(prox_operator(perturbed(zero(1), 0.5)), 5.0, opts);
  CHECK(pert.verdict == ProbeVerdict::Positive);
  CHECK(std::abs(pert.representative[0]) <= 1e-8);
}

TEST_CASE("super-regularity probe: flat landscapes come back negative") {
  DynamicsOptions opts;
  opts.starts = 16;
  // The zero function fixes every point.
  const auto flat = super_regularity_probe(prox_operator(zero(1)), 3.0, opts);
  CHECK(flat.verdict == ProbeVerdict::Negative);
  CHECK(flat.spread >= 6.0 - 1e-12);
  // A box projection fixes the whole box.
  const auto box =
      super_regularity_probe(prox_operator(indicator_box(vec1(-1), vec1(1))), 3.0, opts);
  CHECK(box.verdict == ProbeVerdict::Negative);
}

TEST_CASE("super-regularity probe: non-converging dynamics are inconclusive") {
  const OperatorHandle rot{
      [](const Vector& x) {
        Vector y(2);
        const double ct = std::cos(0.7), st = std::sin(0.7);
        y[0] = ct * x[0] - st * x[1];
        y[1] = st * x[0] + ct * x[1];
        return y;
      },
      2, "rotation"};
  DynamicsOptions opts;
  opts.max_steps = 300;
  opts.starts = 8;
  const auto rep = super_regularity_probe(rot, 2.0, opts);
  CHECK(rep.verdict == ProbeVerdict::Inconclusive);
  CHECK_FALSE(rep.note.empty());
}

TEST_CASE("stability probe: orbits enter and stay near the minimizer") {
  const OperatorHandle T = prox_operator(quadratic1d(1.0, -2.0));
  DynamicsOptions opts;
  opts.starts = 16;
  const auto rep = stability_probe(T, vec1(2.0), 5.0, 0.1, opts);
  CHECK(rep.verdict == ProbeVerdict::Positive);
  CHECK(rep.n0 > 0);    // starts at distance 5 begin outside the 0.1-ball
  CHECK(rep.n0 < 100);  // halving dynamics: ~7 steps to cross
  CHECK(rep.worst_limit_gap <= 1e-8);
  // Spot check the claim: re-run one trajectory and look for violations at
  // or beyond n0.
  Vector x = vec1(5.0);
  for (int n = 1; n <= 200; ++n) {
    x = T(x);
    if (n >= rep.n0) CHECK(std::abs(x[0] - 2.0) < 0.1);
  }
}

TEST_CASE("stability probe: wrong target is detected") {
  const OperatorHandle T = prox_operator(quadratic1d(1.0, -2.0));
  DynamicsOptions opts;
  opts.starts = 8;
  const auto rep = stability_probe(T, vec1(10.0), 5.0, 0.1, opts);
  CHECK(rep.verdict == ProbeVerdict::Negative);
  CHECK(rep.worst_limit_gap >= 7.9);
}

TEST_CASE("dynamics argument validation") {
  const OperatorHandle T = prox_operator(zero(1));
  CHECK_THROWS_AS(super_regularity_probe(T, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(stability_probe(T, vec1(0), 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(stability_probe(T, vec1(0), -1.0, 0.1), std::invalid_argument);
}
