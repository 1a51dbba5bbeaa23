// Validates the test oracles themselves before anything else leans on them:
// the staged grid scan must agree with a literal full scan, and both must
// reproduce hand-derived prox values.

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

TEST_CASE("staged grid refinement matches the literal full scan") {
  struct Case {
    oracle::Fn1d f;
    double lambda, x;
  };
  const Case cases[] = {
      {oracle::abs_fn(1.0), 1.0, 3.0},
      {oracle::abs_fn(2.0), 0.5, -4.2},
      {oracle::quad_fn(1.0, 0.0, 0.0), 1.0, 8.0},
      {oracle::quad_fn(3.0, -2.0, 1.0), 2.0, 0.7},
      {oracle::huber_fn(0.5), 1.0, 1.9},
      {oracle::box_fn(-1.0, 1.0), 1.0, 2.5},
      {oracle::perturbed_fn(oracle::abs_fn(1.0), 0.25), 1.0, 3.0},
  };
  for (const Case& c : cases) {
    const double staged = oracle::prox_1d(c.f, c.lambda, c.x, -10.0, 10.0);
    const double full = oracle::prox_1d_full(c.f, c.lambda, c.x, -10.0, 10.0, 1e-6);
    REQUIRE(staged == Catch::Approx(full).margin(2e-6));
  }
}

TEST_CASE("grid oracle reproduces hand-derived prox values") {
  // Soft threshold: argmin |y| + (y-3)^2/2 = 3 - 1 = 2.
  REQUIRE(oracle::prox_1d(oracle::abs_fn(1.0), 1.0, 3.0, -10.0, 10.0) ==
          Catch::Approx(2.0).margin(1e-10));
  // Quadratic shrink: argmin y^2/2 + (y-8)^2/2 = 4.
  REQUIRE(oracle::prox_1d(oracle::quad_fn(1.0, 0.0, 0.0), 1.0, 8.0, -10.0, 10.0) ==
          Catch::Approx(4.0).margin(1e-10));
  // Box clamp.
  REQUIRE(oracle::prox_1d(oracle::box_fn(-1.0, 1.0), 1.0, 2.5, -10.0, 10.0) ==
          Catch::Approx(1.0).margin(1e-10));
  // Huber with delta = 0.5 at x inside the quadratic zone: x/(1+lambda).
  REQUIRE(oracle::prox_1d(oracle::huber_fn(0.5), 1.0, 0.8, -10.0, 10.0) ==
          Catch::Approx(0.4).margin(1e-10));
  // Huber outside the knee: x - lambda*delta.
  REQUIRE(oracle::prox_1d(oracle::huber_fn(0.5), 1.0, 3.0, -10.0, 10.0) ==
          Catch::Approx(2.5).margin(1e-10));
  // Perturbed zero function, sigma = 1/2: g = y^2/2, prox at 6 is 3.
  REQUIRE(oracle::prox_1d(oracle::perturbed_fn([](double) { return 0.0; }, 0.5), 1.0,
                          6.0, -10.0, 10.0) == Catch::Approx(3.0).margin(1e-10));
}

TEST_CASE("series oracle partial sums behave") {
  // First term: 2^-1 * (1/2)/(3/2) = 1/6.
  REQUIRE(oracle::halfnorm_series(1) == Catch::Approx(1.0 / 6.0).epsilon(1e-15));
  // Monotone in the number of terms, gap below the dropped tail bound.
  const double s20 = oracle::halfnorm_series(20);
  const double s40 = oracle::halfnorm_series(40);
  REQUIRE(s40 > s20);
  REQUIRE(s40 - s20 < std::pow(2.0, -20));
}

TEST_CASE("perturbed reference formula collapses to the identity at lambda 1") {
  const proxkit::ConvexFunction base = proxkit::abs_sum(1.0, 1);
  proxkit::Vector x(1);
  x[0] = 3.0;
  const proxkit::Vector y = oracle::perturbed_prox_reference(base, 0.25, 1.0, x);
  // (1 - sigma) * P_1 base(x) = 0.75 * 2.
  REQUIRE(y[0] == Catch::Approx(1.5).margin(1e-12));
  // And against the grid on the perturbed objective directly.
  const double grid = oracle::prox_1d(oracle::perturbed_fn(oracle::abs_fn(1.0), 0.25),
                                      1.0, 3.0, -10.0, 10.0);
  REQUIRE(y[0] == Catch::Approx(grid).margin(1e-9));
}
