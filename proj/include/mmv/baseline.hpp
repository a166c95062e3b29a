#pragma once

// Five-transition boundary approximation: random step spectra with at most
// five transitions, moved by Nelder-Mead until Phi(r) = z0, then mapped
// through Psi and hulled.
//
// Transition positions are continuous. In grid units u = (lambda - lambda_min)
// / step, sample j covers the cell (j - 1, j]; a transition at u switches the
// covered part of each cell, so sample j takes the new value with weight
// clamp(j - u, 0, 1). Integer u reproduces the binary evaluation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmv/errors.hpp"
#include "mmv/mismatch.hpp"
#include "mmv/parallel.hpp"
#include "mmv/spectral.hpp"
#include "mmv/sphere.hpp"

namespace mmv {

struct StepSpectrum {
  /// Transition wavelengths in nm, non-decreasing.
  std::vector<double> transitions;
  bool starts_high = false;
};

struct FitResult {
  StepSpectrum spectrum;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline double grid_position(const WavelengthGrid& grid, double lambda) {
  const double u = (lambda - grid.lambda_min()) / grid.step();
  return std::clamp(u, 0.0, static_cast<double>(grid.size() - 1));
}

/// Weighted step values on the grid for transitions at sorted positions u.
inline Vector step_values(const std::vector<double>& u, bool starts_high, std::size_t q) {
  Vector r = Vector::Constant(static_cast<Eigen::Index>(q), starts_high ? 1.0 : 0.0);
  double sign = starts_high ? -1.0 : 1.0;
  for (double ut : u) {
    for (std::size_t j = 0; j < q; ++j)
      r[static_cast<Eigen::Index>(j)] += sign * std::clamp(static_cast<double>(j) - ut, 0.0, 1.0);
    sign = -sign;
  }
  return r.cwiseMax(0.0).cwiseMin(1.0);
}

/// Phi(step spectrum) in O(m N) from suffix sums of the weighted sensor rows.
class StepResponse {
 public:
  explicit StepResponse(const ColourSystem& sys)
      : rows_(sys.grid().step() * sys.values()), suffix_(rows_.rows() + 1, rows_.cols()) {
    suffix_.row(rows_.rows()).setZero();
    for (Eigen::Index j = rows_.rows() - 1; j >= 0; --j) suffix_.row(j) = suffix_.row(j + 1) + rows_.row(j);
  }

  Eigen::Index samples() const noexcept { return rows_.rows(); }

  /// Positions must be sorted and inside [0, q - 1].
  Vector operator()(const double* u, std::size_t m, bool starts_high) const {
    Vector z = starts_high ? Vector(suffix_.row(0).transpose()) : Vector(Vector::Zero(rows_.cols()));
    double sign = starts_high ? -1.0 : 1.0;
    for (std::size_t t = 0; t < m; ++t) {
      const double f = std::floor(u[t]);
      const double a = u[t] - f;
      const Eigen::Index next = static_cast<Eigen::Index>(f) + 1;
      if (next < rows_.rows()) z += sign * (suffix_.row(next) - a * rows_.row(next)).transpose();
      sign = -sign;
    }
    return z;
  }

 private:
  Matrix rows_;
  Matrix suffix_;
};

}  // namespace detail

/// Binary reflectance: the value flips after each transition wavelength (a
/// transition at grid point lambda_j affects indices > j).
inline Reflectance evaluate(const StepSpectrum& s, const WavelengthGrid& grid) {
  std::vector<double> u;
  u.reserve(s.transitions.size());
  for (double l : s.transitions) u.push_back(std::floor(detail::grid_position(grid, l) + 1e-9));
  std::sort(u.begin(), u.end());
  return {grid, detail::step_values(u, s.starts_high, grid.size())};
}

/// Reflectance with partial cells at non-grid transition wavelengths.
inline Reflectance evaluate_continuous(const StepSpectrum& s, const WavelengthGrid& grid) {
  std::vector<double> u;
  u.reserve(s.transitions.size());
  for (double l : s.transitions) u.push_back(detail::grid_position(grid, l));
  std::sort(u.begin(), u.end());
  return {grid, detail::step_values(u, s.starts_high, grid.size())};
}

/// Acceptance threshold on |Phi(r) - z0|.
inline double baseline_tolerance(const MismatchProblem& p) { return 1e-6 * p.z0.cwiseAbs().maxCoeff(); }

/// Nelder-Mead over transition positions minimizing |Phi(r) - z0|^2. The seed
/// is a vertex of the initial simplex, so the result is never worse than it.
inline FitResult fit_to_target(const MismatchProblem& p, const StepSpectrum& seed) {
  const WavelengthGrid& grid = p.phi.grid();
  const detail::StepResponse response(p.phi);
  const double hi = static_cast<double>(grid.size() - 1);
  const double tol = baseline_tolerance(p);
  const std::size_t m = seed.transitions.size();

  std::vector<double> scratch(m);
  auto objective = [&](const Vector& x) {
    for (std::size_t t = 0; t < m; ++t) scratch[t] = std::clamp(x[static_cast<Eigen::Index>(t)], 0.0, hi);
    std::sort(scratch.begin(), scratch.end());
    return (response(scratch.data(), m, seed.starts_high) - p.z0).squaredNorm();
  };
  auto finish = [&](const Vector& x, double f, std::size_t iters) {
    FitResult out;
    out.spectrum.starts_high = seed.starts_high;
    std::vector<double> u(m);
    for (std::size_t t = 0; t < m; ++t) u[t] = std::clamp(x[static_cast<Eigen::Index>(t)], 0.0, hi);
    std::sort(u.begin(), u.end());
    for (double ut : u) out.spectrum.transitions.push_back(grid.lambda_min() + ut * grid.step());
    out.residual = std::sqrt(f);
    out.iterations = iters;
    out.converged = out.residual <= tol;
    return out;
  };

  Vector x0(static_cast<Eigen::Index>(m));
  for (std::size_t t = 0; t < m; ++t) x0[static_cast<Eigen::Index>(t)] = detail::grid_position(grid, seed.transitions[t]);
  const double f0 = objective(x0);
  if (m == 0 || std::sqrt(f0) <= tol) return finish(x0, f0, 0);

  const auto n = static_cast<Eigen::Index>(m);
  std::vector<Vector> simplex(m + 1, x0);
  std::vector<double> values(m + 1, f0);
  const double step = 0.05 * hi;
  for (Eigen::Index t = 0; t < n; ++t) {
    Vector& v = simplex[static_cast<std::size_t>(t) + 1];
    v[t] += (v[t] + step <= hi) ? step : -step;
    values[static_cast<std::size_t>(t) + 1] = objective(v);
  }

  std::vector<std::size_t> order(m + 1);
  const std::size_t cap = 200 * m;
  std::size_t iter = 0;
  for (; iter < cap; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[m - 1];
    if (std::sqrt(values[best]) <= tol) break;

    Vector centroid = Vector::Zero(n);
    for (std::size_t i = 0; i <= m; ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(m);

    const Vector reflected = centroid + (centroid - simplex[worst]);
    const double fr = objective(reflected);
    if (fr < values[best]) {
      const Vector expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = objective(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Vector contracted = outside ? Vector(centroid + 0.5 * (reflected - centroid))
                                      : Vector(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = objective(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = objective(simplex[i]);
    }
  }
  const std::size_t best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  return finish(simplex[best], values[best], iter);
}

/// Seed spectrum number `index`: transition count uniform on 0..5, uniform
/// wavelengths, random polarity.
inline StepSpectrum random_step_spectrum(const WavelengthGrid& grid, std::uint64_t seed, std::uint64_t index) {
  KeyedStream rng(seed, index);
  StepSpectrum s;
  const std::size_t m = rng.below(6);
  s.starts_high = (rng.next() >> 63) != 0;
  for (std::size_t t = 0; t < m; ++t) s.transitions.push_back(grid.lambda_min() + rng.uniform() * (grid.last() - grid.lambda_min()));
  std::sort(s.transitions.begin(), s.transitions.end());
  return s;
}

/// Hull of Psi responses of the accepted fits among n_seeds random seeds.
/// Rejected seeds are discarded without replacement.
inline MmvResult baseline_mmv(const MismatchProblem& p, std::size_t n_seeds, std::uint64_t seed) {
  std::vector<std::optional<Reflectance>> fits(n_seeds);
  parallel_for(n_seeds, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const FitResult fit = fit_to_target(p, random_step_spectrum(p.phi.grid(), seed, i));
      if (fit.converged) fits[i].emplace(evaluate_continuous(fit.spectrum, p.phi.grid()));
    }
  }, 8);

  MmvResult res;
  res.method = MmvMethod::baseline5;
  res.sample_count = n_seeds;
  res.wavelength_step = p.phi.grid().step();
  for (auto& r : fits) {
    if (!r) continue;
    res.points.push_back(detail::psi_response(p, r->values()));
    res.spectra.push_back(std::move(*r));
  }
  if (res.points.size() < 4)
    throw NumericalError("baseline_mmv: only " + std::to_string(res.points.size()) + " of " +
                         std::to_string(n_seeds) + " seeds reached the target");
  detail::hull_points(res);
  return res;
}

}  // namespace mmv
