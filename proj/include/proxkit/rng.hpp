#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace proxkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// splitmix64 step; used to derive independent sub-seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic sampling. The standard <random> distributions are
// implementation-defined, so doubles are built from raw engine output to keep
// report payloads reproducible byte-for-byte.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Independent stream derived from this rng's seed; order-insensitive.
  SeededRng fork(std::uint64_t stream) const {
    return SeededRng(mix_seed(seed_, stream));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  /// Standard normal via Box-Muller.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

  Vector gaussian_vector(int dim) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = gaussian();
    return v;
  }

  /// Uniform in the closed ball B_radius(0).
  Vector in_ball(int dim, double radius) {
    Vector dir = gaussian_vector(dim);
    double n = dir.norm();
    while (n == 0.0) {
      dir = gaussian_vector(dim);
      n = dir.norm();
    }
    const double r = radius * std::pow(unit(), 1.0 / dim);
    return (r / n) * dir;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

namespace detail {

inline double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

inline constexpr std::uint64_t kHaltonPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};

}  // namespace detail

/// Low-discrepancy points in B_radius(0): Halton points in the cube,
/// rejecting those outside the unit ball. `offset` shifts the sequence so
/// distinct probes draw distinct point sets.
inline std::vector<Vector> halton_in_ball(int dim, int count, double radius,
                                          std::uint64_t offset = 0) {
  if (dim < 1 || dim > 8) throw std::invalid_argument("halton_in_ball: dim must be in [1,8]");
  std::vector<Vector> pts;
  pts.reserve(count);
  std::uint64_t index = offset + 1;
  while (static_cast<int>(pts.size()) < count) {
    Vector p(dim);
    for (int j = 0; j < dim; ++j) {
      p[j] = 2.0 * detail::halton(index, detail::kHaltonPrimes[j]) - 1.0;
    }
    ++index;
    if (p.norm() <= 1.0) pts.push_back(radius * p);
  }
  return pts;
}

}  // namespace proxkit
