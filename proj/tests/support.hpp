#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "mmv/experiments.hpp"
#include "mmv/spectral.hpp"
#include "mmv/sphere.hpp"

namespace mmv::test {

/// Uniform [lo, hi) matrix from a keyed stream.
inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo = 0.0,
                            double hi = 1.0) {
  KeyedStream rng(seed, 0xabc);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = lo + (hi - lo) * rng.uniform();
  return m;
}

/// Random positive colour system on a q-sample 1 nm grid.
inline ColourSystem toy_system(std::size_t q, Eigen::Index n, std::uint64_t seed) {
  const WavelengthGrid grid(400.0, 400.0 + static_cast<double>(q - 1), 1.0);
  return {grid, random_matrix(static_cast<Eigen::Index>(q), n, seed, 0.05, 1.0)};
}

inline MismatchProblem toy_problem(std::size_t q, std::uint64_t seed, double grey = 0.5) {
  return grey_problem(toy_system(q, 3, seed), toy_system(q, 3, seed + 1000), grey);
}

inline MismatchProblem headline(const std::string& phi, const std::string& psi, double grey = 0.5,
                                double step = 1.0) {
  return illuminant_change_problem(phi, psi, grey, step);
}

}  // namespace mmv::test
