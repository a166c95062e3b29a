#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mmv/geometry.hpp"
#include "mmv/sphere.hpp"

namespace mmv::test {

/// Vertices of {x : a_i . x <= b_i} by solving every triple of planes and
/// keeping the feasible, pairwise-distinct solutions.
inline std::vector<Vec3> enumerate_vertices(const std::vector<Halfspace3>& hs, double tol = 1e-9) {
  std::vector<Vec3> out;
  const std::size_t n = hs.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        Eigen::Matrix3d a;
        a.row(0) = hs[i].normal.transpose();
        a.row(1) = hs[j].normal.transpose();
        a.row(2) = hs[k].normal.transpose();
        if (std::abs(a.determinant()) < 1e-10) continue;
        const Vec3 x = a.partialPivLu().solve(Vec3(hs[i].offset, hs[j].offset, hs[k].offset));
        bool feasible = true;
        for (const Halfspace3& h : hs)
          if (h.normal.dot(x) > h.offset + tol) feasible = false;
        if (!feasible) continue;
        bool dup = false;
        for (const Vec3& v : out) dup = dup || (v - x).norm() < 1e-7;
        if (!dup) out.push_back(x);
      }
  return out;
}

/// True when the unit normals lie in no closed hemisphere, i.e. every
/// intersection with positive offsets is bounded. A closed hemisphere holding
/// all normals can be rotated until its boundary passes through two of them.
inline bool normals_surround_origin(const std::vector<Halfspace3>& hs) {
  for (std::size_t i = 0; i < hs.size(); ++i)
    for (std::size_t j = i + 1; j < hs.size(); ++j) {
      const Vec3 u = hs[i].normal.cross(hs[j].normal);
      if (u.norm() < 1e-12) continue;
      for (double sign : {1.0, -1.0}) {
        bool all = true;
        for (const Halfspace3& h : hs) all = all && sign * u.dot(h.normal) >= -1e-12;
        if (all) return false;
      }
    }
  return true;
}

/// Random bounded polytope: t unit normals with offsets in [0.5, 1.5] about
/// a random centre; redrawn until bounded.
inline std::vector<Halfspace3> random_polytope(std::size_t t, std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    const DirectionSet d = sample_sphere(3, t, seed * 1000003 + attempt);
    KeyedStream rng(seed, attempt + 77);
    const Vec3 centre(rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5);
    std::vector<Halfspace3> hs;
    for (std::size_t i = 0; i < t; ++i) {
      const Vec3 n = d[i].transpose();
      hs.push_back({n, n.dot(centre) + 0.5 + rng.uniform()});
    }
    if (normals_surround_origin(hs)) return hs;
  }
}

/// Largest distance from a point of `a` to its nearest point of `b`.
inline double set_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double worst = 0.0;
  for (const Vec3& x : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& y : b) best = std::min(best, (x - y).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

inline std::vector<Halfspace3> unit_cube_halfspaces() {
  std::vector<Halfspace3> hs;
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 e = Vec3::Zero();
    e[axis] = 1.0;
    hs.push_back({e, 1.0});
    hs.push_back({-e, 0.0});
  }
  return hs;
}

}  // namespace mmv::test
