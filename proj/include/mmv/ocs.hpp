#pragma once

// Object colour solid boundary from sampled normals: the response maximal in
// direction k is produced by the reflectance that is 1 wherever k . s >= 0.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "mmv/errors.hpp"
#include "mmv/parallel.hpp"
#include "mmv/spectral.hpp"
#include "mmv/sphere.hpp"

namespace mmv {

struct BoundarySample {
  Vector direction;
  Reflectance reflectance;
  ColourResponse response;
  std::size_t transitions = 0;
};

/// Normals in rows, b_i = k_i . Gamma_i. Represents {x : K x <= b}.
struct HalfspaceRep {
  RowMatrix normals;
  Vector offsets;

  std::size_t count() const noexcept { return static_cast<std::size_t>(offsets.size()); }
};

inline std::size_t count_transitions(const Eigen::Ref<const Vector>& r) {
  std::size_t n = 0;
  for (Eigen::Index j = 1; j < r.size(); ++j)
    if (r[j] != r[j - 1]) ++n;
  return n;
}

inline std::size_t count_transitions(const Reflectance& r) { return count_transitions(r.values()); }

namespace detail {

inline void check_direction(const ColourSystem& sys, Eigen::Index dim) {
  if (static_cast<std::size_t>(dim) != sys.sensors())
    throw DataError("direction dimension does not match colour system sensor count");
}

}  // namespace detail

/// Binary reflectance maximizing k . respond(sys, r); ties (k . s = 0) give 1.
inline Reflectance optimal_reflectance(const ColourSystem& sys, const Eigen::Ref<const Vector>& k) {
  detail::check_direction(sys, k.size());
  const Vector proj = sys.values() * k;
  return {sys.grid(), (proj.array() >= 0.0).cast<double>().matrix()};
}

inline std::vector<BoundarySample> build_boundary(const ColourSystem& sys, const DirectionSet& dirs) {
  detail::check_direction(sys, static_cast<Eigen::Index>(dirs.dim));
  std::vector<std::optional<BoundarySample>> slots(dirs.count());
  parallel_for(dirs.count(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Vector k = dirs[i].transpose();
      Reflectance r = optimal_reflectance(sys, k);
      ColourResponse z = respond(sys, r);
      const std::size_t m = count_transitions(r);
      slots[i].emplace(BoundarySample{k, std::move(r), std::move(z), m});
    }
  });
  std::vector<BoundarySample> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Indices of the first sample carrying each distinct reflectance, in order.
inline std::vector<std::size_t> unique_reflectances(const std::vector<BoundarySample>& samples) {
  std::unordered_multimap<std::uint64_t, std::size_t> seen;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vector& r = samples[i].reflectance.values();
    std::uint64_t h = 1469598103934665603ULL;
    for (Eigen::Index j = 0; j < r.size(); ++j) h = (h ^ (r[j] > 0.5 ? 1u : 0u) ^ static_cast<std::uint64_t>(j)) * 1099511628211ULL;
    bool dup = false;
    const auto range = seen.equal_range(h);
    for (auto it = range.first; it != range.second && !dup; ++it)
      dup = samples[it->second].reflectance.values() == r;
    if (dup) continue;
    seen.emplace(h, i);
    keep.push_back(i);
  }
  return keep;
}

/// Response of the optimal reflectance for k without materializing it.
inline ColourResponse optimal_response(const ColourSystem& sys, const Eigen::Ref<const Vector>& k) {
  const Matrix& s = sys.values();
  ColourResponse z = ColourResponse::Zero(s.cols());
  const Vector proj = s * k;
  for (Eigen::Index j = 0; j < s.rows(); ++j)
    if (proj[j] >= 0.0) z += s.row(j).transpose();
  return sys.grid().step() * z;
}

/// Rows Gamma(r_opt(k_i)) for the rows k_i of `normals`, blocked so both
/// products run as dense matrix multiplies.
inline RowMatrix support_points(const ColourSystem& sys, const RowMatrix& normals) {
  detail::check_direction(sys, normals.cols());
  constexpr Eigen::Index kBlock = 2048;
  const Matrix& s = sys.values();
  const Eigen::Index t = normals.rows();
  RowMatrix out(t, s.cols());
  const Eigen::Index blocks = (t + kBlock - 1) / kBlock;
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t bb, std::size_t be) {
    for (std::size_t blk = bb; blk < be; ++blk) {
      const Eigen::Index first = static_cast<Eigen::Index>(blk) * kBlock;
      const Eigen::Index len = std::min(kBlock, t - first);
      const Matrix k = normals.middleRows(first, len).transpose();  // N x len
      const Matrix mask = ((s * k).array() >= 0.0).cast<double>();  // q x len
      out.middleRows(first, len) = sys.grid().step() * (mask.transpose() * s);
    }
  }, 1);
  return out;
}

/// b_i = k_i . Gamma_i.
inline Vector support_offsets(const ColourSystem& sys, const RowMatrix& normals) {
  const RowMatrix gamma = support_points(sys, normals);
  return (normals.array() * gamma.array()).rowwise().sum();
}

inline HalfspaceRep build_halfspace_rep(const ColourSystem& sys, const DirectionSet& dirs) {
  detail::check_direction(sys, static_cast<Eigen::Index>(dirs.dim));
  return {dirs.vectors, support_offsets(sys, dirs.vectors)};
}

}  // namespace mmv
