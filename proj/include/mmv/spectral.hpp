#pragma once

// Wavelength grids, sampled spectra, colour systems and the colour formation
// equation in its rectangle-rule discretization.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mmv/errors.hpp"

namespace mmv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sensor responses (Φ(r), Ψ(r) or the stacked Γ(r)).
using ColourResponse = Eigen::VectorXd;

/// Uniform sampling lambda_min + i * step, i in [0, q).
class WavelengthGrid {
 public:
  WavelengthGrid(double lambda_min, double lambda_max, double step)
      : min_(lambda_min), max_(lambda_max), step_(step) {
    if (!std::isfinite(lambda_min) || !std::isfinite(lambda_max) ||
        !std::isfinite(step) || step <= 0.0)
      throw DataError("wavelength grid: invalid bounds or step");
    // The small slack absorbs representation error in (max - min) / step.
    const double span = (lambda_max - lambda_min) / step;
    if (span < 0.0) throw DataError("wavelength grid: lambda_max < lambda_min");
    size_ = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    if (size_ < 2) throw DataError("wavelength grid: fewer than two samples");
  }

  /// 380-730 nm, the visible range used throughout the experiments.
  static WavelengthGrid visible(double step = 1.0) { return {380.0, 730.0, step}; }

  double lambda_min() const noexcept { return min_; }
  double lambda_max() const noexcept { return max_; }
  double step() const noexcept { return step_; }
  std::size_t size() const noexcept { return size_; }
  /// Last sample point; equals lambda_max when the range is a multiple of step.
  double last() const noexcept { return min_ + static_cast<double>(size_ - 1) * step_; }
  double operator[](std::size_t i) const noexcept {
    return min_ + static_cast<double>(i) * step_;
  }

  friend bool operator==(const WavelengthGrid& a, const WavelengthGrid& b) noexcept {
    return a.min_ == b.min_ && a.step_ == b.step_ && a.size_ == b.size_;
  }

 private:
  double min_;
  double max_;
  double step_;
  std::size_t size_;
};

/// A named per-wavelength quantity on a grid.
struct Spectrum {
  Spectrum(WavelengthGrid g, std::vector<double> v, std::string n = {})
      : grid(g), values(std::move(v)), name(std::move(n)) {
    if (values.size() != grid.size())
      throw DataError("spectrum '" + name + "': value count does not match grid");
    for (double x : values)
      if (!std::isfinite(x)) throw DataError("spectrum '" + name + "': non-finite value");
  }

  WavelengthGrid grid;
  std::vector<double> values;
  std::string name;
};

/// Reflectance spectrum, every sample in [0, 1].
class Reflectance {
 public:
  Reflectance(WavelengthGrid grid, Vector values) : grid_(grid), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != grid_.size())
      throw DataError("reflectance: value count does not match grid");
    for (double x : values_)
      if (!(x >= 0.0 && x <= 1.0)) throw DataError("reflectance: value outside [0, 1]");
  }

  static Reflectance constant(WavelengthGrid grid, double level) {
    return {grid, Vector::Constant(static_cast<Eigen::Index>(grid.size()), level)};
  }

  const WavelengthGrid& grid() const noexcept { return grid_; }
  const Vector& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return grid_.size(); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

 private:
  WavelengthGrid grid_;
  Vector values_;
};

/// N sensor-times-illuminant spectra sampled on a shared grid (q x N).
class ColourSystem {
 public:
  ColourSystem(WavelengthGrid grid, Matrix values, std::vector<std::string> names = {})
      : grid_(grid), values_(std::move(values)), names_(std::move(names)) {
    if (static_cast<std::size_t>(values_.rows()) != grid_.size())
      throw DataError("colour system: row count does not match grid");
    if (values_.cols() < 1) throw DataError("colour system: needs at least one sensor");
    if (!values_.allFinite()) throw DataError("colour system: non-finite entry");
    if (names_.empty())
      for (Eigen::Index i = 0; i < values_.cols(); ++i) names_.push_back("s" + std::to_string(i));
    if (names_.size() != static_cast<std::size_t>(values_.cols()))
      throw DataError("colour system: name count does not match sensor count");
  }

  const WavelengthGrid& grid() const noexcept { return grid_; }
  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t sensors() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  std::size_t samples() const noexcept { return grid_.size(); }

 private:
  WavelengthGrid grid_;
  Matrix values_;
  std::vector<std::string> names_;
};

struct SpectralTableFormat {
  char delimiter = ',';
  char comment = '#';
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

}  // namespace detail

/// Reads a CSV spectral table: a wavelength column followed by one column per
/// named spectrum. Rows must be strictly increasing and uniformly spaced.
/// Errors name the 1-based data row (header excluded).
inline std::vector<Spectrum> load_spectral_table(std::istream& in,
                                                 const SpectralTableFormat& format = {}) {
  std::string line;
  std::vector<std::string> names;
  bool have_header = false;
  std::vector<double> wavelengths;
  std::vector<std::vector<double>> columns;
  std::size_t row = 0;

  while (std::getline(in, line)) {
    const std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == format.comment) continue;
    const auto fields = detail::split(view, format.delimiter);
    if (!have_header) {
      if (fields.size() < 1) throw DataError("spectral table: empty header");
      for (std::size_t i = 1; i < fields.size(); ++i) names.emplace_back(fields[i]);
      columns.resize(names.size());
      have_header = true;
      continue;
    }
    ++row;
    const std::string where = "spectral table row " + std::to_string(row);
    if (fields.size() != names.size() + 1)
      throw DataError(where + ": expected " + std::to_string(names.size() + 1) + " fields");
    double lambda = 0.0;
    if (!detail::parse_double(fields[0], lambda) || !std::isfinite(lambda))
      throw DataError(where + ": bad wavelength");
    if (!wavelengths.empty() && !(lambda > wavelengths.back()))
      throw DataError(where + ": wavelengths not strictly increasing");
    wavelengths.push_back(lambda);
    for (std::size_t c = 0; c < names.size(); ++c) {
      double v = 0.0;
      if (!detail::parse_double(fields[c + 1], v) || !std::isfinite(v))
        throw DataError(where + ": bad value in column '" + names[c] + "'");
      columns[c].push_back(v);
    }
  }

  if (!have_header) throw DataError("spectral table: missing header");
  if (wavelengths.empty()) return {};
  if (wavelengths.size() < 2) throw DataError("spectral table: needs at least two rows");

  const double step = wavelengths[1] - wavelengths[0];
  for (std::size_t i = 2; i < wavelengths.size(); ++i) {
    if (std::abs((wavelengths[i] - wavelengths[i - 1]) - step) > 1e-6 * step)
      throw DataError("spectral table row " + std::to_string(i + 1) + ": non-uniform spacing");
  }
  const WavelengthGrid grid(wavelengths.front(), wavelengths.back(), step);
  if (grid.size() != wavelengths.size())
    throw DataError("spectral table: grid reconstruction mismatch");

  std::vector<Spectrum> out;
  out.reserve(names.size());
  for (std::size_t c = 0; c < names.size(); ++c) out.emplace_back(grid, std::move(columns[c]), names[c]);
  return out;
}

inline std::vector<Spectrum> load_spectral_file(const std::string& path,
                                                const SpectralTableFormat& format = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open spectral file: " + path);
  try {
    return load_spectral_table(in, format);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

/// Linear interpolation onto target; the target range must lie inside the source.
inline Spectrum resample(const Spectrum& s, const WavelengthGrid& target) {
  const WavelengthGrid& src = s.grid;
  if (src == target) return s;
  const double tol = 1e-9 * src.step();
  if (target.lambda_min() < src.lambda_min() - tol || target.last() > src.last() + tol)
    throw DataError("resample '" + s.name + "': target range [" + std::to_string(target.lambda_min()) +
                    ", " + std::to_string(target.last()) + "] outside source range");
  std::vector<double> out(target.size());
  const std::size_t last = src.size() - 1;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double u = (target[i] - src.lambda_min()) / src.step();
    const double nearest = std::round(u);
    if (std::abs(u - nearest) < 1e-9) {
      out[i] = s.values[std::min(static_cast<std::size_t>(std::max(nearest, 0.0)), last)];
      continue;
    }
    const std::size_t j = std::min(static_cast<std::size_t>(std::max(std::floor(u), 0.0)), last - 1);
    const double t = u - static_cast<double>(j);
    out[i] = (1.0 - t) * s.values[j] + t * s.values[j + 1];
  }
  return {target, std::move(out), s.name};
}

/// Column i is cmfs[i] * illuminant, both resampled onto grid.
inline ColourSystem make_colour_system(std::span<const Spectrum> cmfs, const Spectrum& illuminant,
                                       const WavelengthGrid& grid) {
  const Spectrum e = resample(illuminant, grid);
  Matrix values(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(cmfs.size()));
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cmfs.size(); ++c) {
    const Spectrum cmf = resample(cmfs[c], grid);
    if (!(cmf.grid == e.grid)) throw DataError("make_colour_system: grid mismatch after resampling");
    for (std::size_t j = 0; j < grid.size(); ++j)
      values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = cmf.values[j] * e.values[j];
    names.push_back(cmfs[c].name + "*" + illuminant.name);
  }
  return {grid, std::move(values), std::move(names)};
}

/// Rectangle rule: step * sum_j r_j s_i(lambda_j).
inline ColourResponse respond(const ColourSystem& sys, const Eigen::Ref<const Vector>& r) {
  if (static_cast<std::size_t>(r.size()) != sys.samples())
    throw DataError("respond: reflectance length does not match colour system");
  return sys.grid().step() * (sys.values().transpose() * r);
}

inline ColourResponse respond(const ColourSystem& sys, const Reflectance& r) {
  if (!(sys.grid() == r.grid())) throw DataError("respond: grid mismatch");
  return respond(sys, r.values());
}

/// Concatenates columns, phi first.
inline ColourSystem stack(const ColourSystem& phi, const ColourSystem& psi) {
  if (!(phi.grid() == psi.grid())) throw DataError("stack: grid mismatch");
  if (phi.sensors() != psi.sensors()) throw DataError("stack: sensor count mismatch");
  Matrix values(phi.values().rows(), phi.values().cols() + psi.values().cols());
  values << phi.values(), psi.values();
  std::vector<std::string> names = phi.names();
  names.insert(names.end(), psi.names().begin(), psi.names().end());
  return {phi.grid(), std::move(values), std::move(names)};
}

/// S = U D V^T with U = S V D^-1. Columns of U are ordered by decreasing
/// singular value and signed so that each column's largest-magnitude entry is
/// positive (the matching column of V carries the same sign).
struct Orthonormalization {
  ColourSystem basis;
  Vector singular_values;
  Matrix right_vectors;  // V, N x N
};

inline Orthonormalization orthonormalize(const ColourSystem& sys, double rank_tolerance = 1e-10) {
  const Matrix& s = sys.values();
  Eigen::JacobiSVD<Matrix> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector sigma = svd.singularValues();
  const double largest = sigma.size() > 0 ? sigma[0] : 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] > rank_tolerance * largest))
      throw NumericalError("orthonormalize: rank deficient, singular value " + std::to_string(i) +
                           " is " + std::to_string(sigma[i]));
  }
  Matrix v = svd.matrixV();
  Matrix u = svd.matrixU();
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    u.col(c).cwiseAbs().maxCoeff(&arg);
    if (u(arg, c) < 0.0) {
      u.col(c) *= -1.0;
      v.col(c) *= -1.0;
    }
  }
  std::vector<std::string> names;
  for (Eigen::Index c = 0; c < u.cols(); ++c) names.push_back("u" + std::to_string(c));
  return {ColourSystem(sys.grid(), std::move(u), std::move(names)), sigma, std::move(v)};
}

}  // namespace mmv
