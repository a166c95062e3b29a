#pragma once

// Metamer mismatch volumes M(z0, Phi, Psi) = Psi(Phi^-1(z0)).
//
//  * mmv_lp: for each sampled 6-D direction k, maximize (S k)^T r (or
//    (U k)^T r with U the orthonormalized stacked system) subject to
//    Phi(r) = z0, 0 <= r <= 1; the Psi responses of the maximizers are
//    boundary points of M.
//  * mmv_halfspace: every sampled k gives a supporting half-space
//    k . x <= k . Gamma(r_opt(k)) of the 6-D solid; fixing the Phi block to
//    z0 leaves half-spaces in Psi space whose intersection contains M.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mmv/errors.hpp"
#include "mmv/geometry.hpp"
#include "mmv/lp.hpp"
#include "mmv/ocs.hpp"
#include "mmv/parallel.hpp"
#include "mmv/spectral.hpp"
#include "mmv/sphere.hpp"

namespace mmv {

enum class MmvMethod { lp_original, lp_orthonormal, halfspace_original, halfspace_orthonormal, baseline5 };

inline std::string_view to_string(MmvMethod m) {
  switch (m) {
    case MmvMethod::lp_original: return "lp_original";
    case MmvMethod::lp_orthonormal: return "lp_orthonormal";
    case MmvMethod::halfspace_original: return "halfspace_original";
    case MmvMethod::halfspace_orthonormal: return "halfspace_orthonormal";
    case MmvMethod::baseline5: return "baseline5";
  }
  return "unknown";
}

inline std::optional<MmvMethod> parse_method(std::string_view s) {
  for (MmvMethod m : {MmvMethod::lp_original, MmvMethod::lp_orthonormal, MmvMethod::halfspace_original,
                      MmvMethod::halfspace_orthonormal, MmvMethod::baseline5})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

/// The half-space slice is degenerate (empty or lower-dimensional).
class DegenerateSliceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct MismatchProblem {
  ColourSystem phi;
  ColourSystem psi;
  ColourResponse z0;
};

/// Validates shapes and that z0 lies in Phi's object colour solid.
inline MismatchProblem make_problem(ColourSystem phi, ColourSystem psi, ColourResponse z0) {
  if (!(phi.grid() == psi.grid())) throw DataError("mismatch problem: grid mismatch");
  if (phi.sensors() != 3 || psi.sensors() != 3)
    throw DataError("mismatch problem: both colour systems need 3 sensors");
  if (static_cast<std::size_t>(z0.size()) != phi.sensors()) throw DataError("mismatch problem: z0 size");
  const BoxedLp lp{Vector::Zero(static_cast<Eigen::Index>(phi.samples())), phi.grid().step() * phi.values(), z0};
  if (!feasible_point(lp)) throw DataError("mismatch problem: z0 lies outside the object colour solid of phi");
  return {std::move(phi), std::move(psi), std::move(z0)};
}

/// z0 = Phi(level * 1), the flat grey of the given reflectivity.
inline MismatchProblem grey_problem(ColourSystem phi, ColourSystem psi, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("grey level must lie in (0, 1)");
  ColourResponse z0 = respond(phi, Reflectance::constant(phi.grid(), level));
  return make_problem(std::move(phi), std::move(psi), std::move(z0));
}

struct MmvResult {
  MmvMethod method = MmvMethod::lp_original;
  /// Boundary points in Psi space (all samples for LP and baseline methods,
  /// hull vertices for the half-space method).
  std::vector<Vec3> points;
  /// Reflectances matching `points` (LP and baseline methods only).
  std::vector<Reflectance> spectra;
  Hull3 hull;
  double volume = 0.0;
  std::size_t sample_count = 0;
  double wavelength_step = 0.0;
  /// Half-spaces supporting the final slice (half-space method only).
  std::size_t binding_halfspaces = 0;
  /// Flat or too few distinct points: hull empty, volume 0.
  bool degenerate = false;
};

namespace detail {

inline void hull_points(MmvResult& res) {
  try {
    res.hull = convex_hull(res.points);
    res.volume = volume(res.hull);
    res.degenerate = false;
  } catch (const GeometryError&) {
    res.hull = Hull3{};
    res.volume = 0.0;
    res.degenerate = true;
  }
}

inline Vec3 psi_response(const MismatchProblem& p, const Eigen::Ref<const Vector>& r) {
  return respond(p.psi, r).head<3>();
}

}  // namespace detail

/// Strictly interior metamer: the mean of the LP maximizers of +-Psi_i.
/// Returns (reflectance, its Psi response).
inline std::pair<Vector, Vec3> interior_metamer(const MismatchProblem& p) {
  const BoxedSimplex simplex(p.phi.grid().step() * p.phi.values(), p.z0);
  const auto start = simplex.feasible_basis();
  if (!start) throw DataError("mismatch problem: z0 lies outside the object colour solid of phi");
  Vector mean = Vector::Zero(static_cast<Eigen::Index>(p.phi.samples()));
  for (Eigen::Index i = 0; i < 3; ++i)
    for (double sign : {1.0, -1.0}) mean += simplex.maximize(sign * p.psi.values().col(i), &*start).r;
  mean /= 6.0;
  return {mean, detail::psi_response(p, mean)};
}

/// Spherical sampling + linear programming.
inline MmvResult mmv_lp(const MismatchProblem& p, const DirectionSet& dirs, bool use_orthonormal) {
  if (dirs.dim != 6) throw DataError("mmv_lp: directions must be 6-dimensional");
  const ColourSystem stacked = stack(p.phi, p.psi);
  const Matrix basis = use_orthonormal ? orthonormalize(stacked).basis.values() : stacked.values();
  const BoxedSimplex simplex(p.phi.grid().step() * p.phi.values(), p.z0);
  const auto start = simplex.feasible_basis();
  if (!start) throw DataError("mmv_lp: z0 lies outside the object colour solid of phi");

  const std::size_t m = dirs.count();
  std::vector<Vector> solutions(m);
  parallel_for(m, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Vector c = basis * dirs[i].transpose();
      LpSolution sol;
      try {
        sol = simplex.maximize(c, &*start);
      } catch (const NumericalError& e) {
        throw NumericalError("mmv_lp: direction " + std::to_string(dirs.first_index + i) + ": " + e.what());
      }
      if (sol.status != LpStatus::optimal)
        throw NumericalError("mmv_lp: direction " + std::to_string(dirs.first_index + i) + " not optimal");
      solutions[i] = std::move(sol.r);
    }
  }, 16);

  MmvResult res;
  res.method = use_orthonormal ? MmvMethod::lp_orthonormal : MmvMethod::lp_original;
  res.sample_count = m;
  res.wavelength_step = p.phi.grid().step();
  res.points.reserve(m);
  res.spectra.reserve(m);
  for (Vector& r : solutions) {
    res.points.push_back(detail::psi_response(p, r));
    res.spectra.emplace_back(p.phi.grid(), std::move(r));
  }
  detail::hull_points(res);
  return res;
}

/// Half-spaces of the Psi-space slice induced by 6-D normals (rows of `normals`)
/// of the stacked system's solid. Rows with a vanishing Psi block are dropped.
inline std::vector<Halfspace3> slice_halfspaces(const ColourSystem& stacked, const ColourResponse& z0,
                                                const RowMatrix& normals) {
  const RowMatrix gamma = support_points(stacked, normals);
  std::vector<Halfspace3> out;
  out.reserve(static_cast<std::size_t>(normals.rows()));
  for (Eigen::Index i = 0; i < normals.rows(); ++i) {
    const auto k = normals.row(i);
    const double b = k.dot(gamma.row(i));
    const Vec3 a = k.tail<3>().transpose();
    const double len = a.norm();
    if (len < 1e-12) continue;
    const double off = b - k.head<3>().dot(z0.head<3>());
    out.push_back({a / len, off / len});
  }
  return out;
}

struct HalfspaceSweepOptions {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  bool use_orthonormal = true;
  /// Sample counts at which to record a result (each <= count); count itself
  /// is always recorded last.
  std::vector<std::size_t> checkpoints;
  std::size_t chunk = 1u << 16;
};

/// Optimization-free slicing over nested direction prefixes. Redundant
/// half-spaces are pruned after every chunk, which is exact because a
/// constraint redundant in a subset stays redundant in any superset.
inline std::vector<MmvResult> mmv_halfspace_sweep(const MismatchProblem& p, const HalfspaceSweepOptions& opt) {
  if (opt.count < 1) throw ConfigError("mmv_halfspace: sample count must be positive");
  const ColourSystem stacked = stack(p.phi, p.psi);
  std::optional<Matrix> to_s;  // maps U-space directions into S-space normals
  if (opt.use_orthonormal) {
    const Orthonormalization o = orthonormalize(stacked);
    to_s = o.right_vectors * o.singular_values.cwiseInverse().asDiagonal();
  }
  const Vec3 hint = interior_metamer(p).second;

  std::vector<std::size_t> marks = opt.checkpoints;
  marks.push_back(opt.count);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  if (marks.front() == 0 || marks.back() > opt.count)
    throw ConfigError("mmv_halfspace: checkpoints must lie in [1, count]");

  std::vector<MmvResult> results;
  std::vector<Halfspace3> kept;
  std::size_t done = 0;
  std::size_t next_mark = 0;
  while (done < opt.count) {
    const std::size_t len = std::min(opt.chunk, marks[next_mark] - done);
    DirectionSet dirs = sample_sphere(6, len, opt.seed, done);
    if (to_s) {
      RowMatrix mapped = dirs.vectors * to_s->transpose();
      mapped.rowwise().normalize();
      dirs.vectors = std::move(mapped);
    }
    std::vector<Halfspace3> fresh = slice_halfspaces(stacked, p.z0, dirs.vectors);
    kept.insert(kept.end(), fresh.begin(), fresh.end());
    done += len;

    HalfspaceIntersection cut;
    try {
      cut = halfspace_intersection(kept, hint);
    } catch (const GeometryError& e) {
      if (e.kind() == GeometryError::Kind::unbounded && done < marks[next_mark]) continue;
      throw DegenerateSliceError(std::string("mmv_halfspace: ") + e.what());
    }
    std::vector<Halfspace3> binding;
    binding.reserve(cut.binding.size());
    for (std::size_t i : cut.binding) binding.push_back(kept[i]);
    kept = std::move(binding);

    if (done == marks[next_mark]) {
      MmvResult res;
      res.method = opt.use_orthonormal ? MmvMethod::halfspace_orthonormal : MmvMethod::halfspace_original;
      res.sample_count = done;
      res.wavelength_step = p.phi.grid().step();
      res.hull = cut.hull;
      res.points = cut.hull.vertices;
      res.volume = volume(cut.hull);
      res.binding_halfspaces = kept.size();
      results.push_back(std::move(res));
      ++next_mark;
    }
  }
  return results;
}

inline MmvResult mmv_halfspace(const MismatchProblem& p, std::size_t count, std::uint64_t seed,
                               bool use_orthonormal) {
  return mmv_halfspace_sweep(p, {count, seed, use_orthonormal, {}, 1u << 16}).back();
}

/// Variant over an explicit direction set (rows are used in order).
inline MmvResult mmv_halfspace(const MismatchProblem& p, const DirectionSet& dirs, bool use_orthonormal) {
  if (dirs.dim != 6) throw DataError("mmv_halfspace: directions must be 6-dimensional");
  const ColourSystem stacked = stack(p.phi, p.psi);
  RowMatrix normals = dirs.vectors;
  if (use_orthonormal) {
    const Orthonormalization o = orthonormalize(stacked);
    normals = normals * (o.right_vectors * o.singular_values.cwiseInverse().asDiagonal()).transpose();
    normals.rowwise().normalize();
  }
  const std::vector<Halfspace3> hs = slice_halfspaces(stacked, p.z0, normals);
  HalfspaceIntersection cut;
  try {
    cut = halfspace_intersection(hs, interior_metamer(p).second);
  } catch (const GeometryError& e) {
    throw DegenerateSliceError(std::string("mmv_halfspace: ") + e.what());
  }
  MmvResult res;
  res.method = use_orthonormal ? MmvMethod::halfspace_orthonormal : MmvMethod::halfspace_original;
  res.sample_count = dirs.count();
  res.wavelength_step = p.phi.grid().step();
  res.hull = cut.hull;
  res.points = cut.hull.vertices;
  res.volume = volume(cut.hull);
  res.binding_halfspaces = cut.binding.size();
  return res;
}

/// The same result restricted to its first m samples (nested direction sets).
inline MmvResult prefix_result(const MmvResult& full, std::size_t m) {
  if (m < 1 || m > full.points.size()) throw ConfigError("prefix_result: prefix length out of range");
  if (full.spectra.size() != full.points.size()) throw DataError("prefix_result: result has no per-sample spectra");
  MmvResult res;
  res.method = full.method;
  res.sample_count = m;
  res.wavelength_step = full.wavelength_step;
  res.points.assign(full.points.begin(), full.points.begin() + static_cast<std::ptrdiff_t>(m));
  res.spectra.assign(full.spectra.begin(), full.spectra.begin() + static_cast<std::ptrdiff_t>(m));
  detail::hull_points(res);
  return res;
}

/// Transition count -> number of spectra, after thresholding at 0.5.
inline std::map<std::size_t, std::size_t> classify_transitions(const MmvResult& result) {
  if (result.spectra.empty()) throw DataError("classify_transitions: result carries no spectra");
  std::map<std::size_t, std::size_t> hist;
  for (const Reflectance& r : result.spectra) {
    const Vector binary = (r.values().array() >= 0.5).cast<double>().matrix();
    ++hist[count_transitions(binary)];
  }
  return hist;
}

/// Histogram over `subset` spectra drawn without replacement (seeded partial
/// Fisher-Yates); all spectra when there are no more than `subset`.
inline std::map<std::size_t, std::size_t> classify_transitions(const MmvResult& result, std::size_t subset,
                                                                std::uint64_t seed) {
  if (result.spectra.size() <= subset) return classify_transitions(result);
  std::vector<std::size_t> idx(result.spectra.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  KeyedStream rng(seed, 0);
  MmvResult picked;
  for (std::size_t i = 0; i < subset; ++i) {
    std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    picked.spectra.push_back(result.spectra[idx[i]]);
  }
  return classify_transitions(picked);
}

}  // namespace mmv
