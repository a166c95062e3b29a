#pragma once

// Uniform directions on the unit sphere S^{dim-1} from normalized Gaussian
// vectors. Vector i is a function of (seed, i) only, so nested and
// partitioned generation reproduce sequential output bit for bit.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

#include "mmv/errors.hpp"
#include "mmv/parallel.hpp"

namespace mmv {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// SplitMix64 finalizer (Steele, Lea & Flood).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream keyed by (seed, index): draw k is
/// splitmix64(key + k * gamma). Cheap to construct, so each sample owns one.
class KeyedStream {
 public:
  KeyedStream(std::uint64_t seed, std::uint64_t index) noexcept
      : key_(splitmix64(seed ^ splitmix64(index ^ 0x6a09e667f3bcc909ULL))) {}

  std::uint64_t next() noexcept {
    return splitmix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on (0, 1].
  double uniform_open0() noexcept {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }
  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t n) noexcept { return n == 0 ? 0 : next() % n; }

  /// Standard normal via Box-Muller; one value per call keeps the draw
  /// sequence independent of call pairing.
  double normal() noexcept {
    const double u1 = uniform_open0();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// M unit vectors in R^dim stored as rows.
struct DirectionSet {
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::size_t first_index = 0;
  RowMatrix vectors;

  std::size_t count() const noexcept { return static_cast<std::size_t>(vectors.rows()); }
  auto operator[](std::size_t i) const { return vectors.row(static_cast<Eigen::Index>(i)); }
};

/// Writes direction number `index` of the (dim, seed) sequence into out.
template <typename Row>
void sphere_direction(std::size_t dim, std::uint64_t seed, std::uint64_t index, Row&& out) {
  KeyedStream rng(seed, index);
  for (;;) {
    double norm2 = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double g = rng.normal();
      out[static_cast<Eigen::Index>(d)] = g;
      norm2 += g * g;
    }
    const double norm = std::sqrt(norm2);
    if (norm >= 1e-8) {
      for (std::size_t d = 0; d < dim; ++d) out[static_cast<Eigen::Index>(d)] /= norm;
      return;
    }
  }
}

/// Directions first_index .. first_index + m - 1 of the (dim, seed) sequence.
inline DirectionSet sample_sphere(std::size_t dim, std::size_t m, std::uint64_t seed,
                                  std::size_t first_index = 0) {
  if (dim < 1) throw ConfigError("sample_sphere: dim must be >= 1");
  if (m < 1) throw ConfigError("sample_sphere: count must be >= 1");
  DirectionSet set{dim, seed, first_index,
                   RowMatrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(dim))};
  parallel_for(m, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      sphere_direction(dim, seed, first_index + i, set.vectors.row(static_cast<Eigen::Index>(i)));
  }, 4096);
  return set;
}

}  // namespace mmv
