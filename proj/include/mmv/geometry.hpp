#pragma once

// 3-D convex geometry: quickhull, hull volume, Chebyshev centre and
// half-space intersection through the point/plane duality transform.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "mmv/errors.hpp"
#include "mmv/lp.hpp"

namespace mmv {

using Vec3 = Eigen::Vector3d;

/// Closed convex polytope as a triangulated surface. Faces are wound
/// counter-clockwise seen from outside; face_normals point outward.
struct Hull3 {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec3> face_normals;
  /// Input index of each vertex.
  std::vector<std::size_t> source;
  /// Containment tolerance used during construction.
  double tolerance = 0.0;
};

/// The set {x : normal . x <= offset}, |normal| = 1.
struct Halfspace3 {
  Vec3 normal;
  double offset = 0.0;
};

namespace detail {

class QuickHull {
 public:
  explicit QuickHull(std::span<const Vec3> points) : pts_(points) {}

  Hull3 run() {
    if (pts_.size() < 4)
      throw GeometryError(GeometryError::Kind::too_few_points, "convex_hull: fewer than 4 points");
    Vec3 lo = pts_[0], hi = pts_[0];
    for (const Vec3& p : pts_) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    if (!lo.allFinite() || !hi.allFinite())
      throw GeometryError(GeometryError::Kind::flat, "convex_hull: non-finite input");
    eps_ = 1e-9 * (hi - lo).norm();
    initial_simplex(lo, hi);
    expand();
    return collect();
  }

 private:
  struct Face {
    std::array<int, 3> v{};
    std::array<int, 3> adj{};  // adj[i] shares edge v[i] -> v[i+1]
    Vec3 n;
    double d = 0.0;
    std::vector<int> outside;
    int farthest = -1;
    double far_dist = 0.0;
    bool alive = true;
  };

  double dist(const Face& f, int p) const { return f.n.dot(pts_[static_cast<std::size_t>(p)]) - f.d; }

  void set_plane(Face& f, const Vec3* fallback = nullptr) const {
    const Vec3& a = pts_[static_cast<std::size_t>(f.v[0])];
    const Vec3& b = pts_[static_cast<std::size_t>(f.v[1])];
    const Vec3& c = pts_[static_cast<std::size_t>(f.v[2])];
    Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    if (len > 0.0) {
      n /= len;
    } else if (fallback != nullptr) {
      n = *fallback;
    }
    f.n = n;
    f.d = n.dot((a + b + c) / 3.0);
  }

  void flat(const char* what) const { throw GeometryError(GeometryError::Kind::flat, what); }

  void initial_simplex(const Vec3& lo, const Vec3& hi) {
    if ((hi - lo).norm() == 0.0) flat("convex_hull: all points coincide");
    std::array<int, 6> ext{};
    for (int axis = 0; axis < 3; ++axis) {
      int imin = 0, imax = 0;
      for (std::size_t i = 0; i < pts_.size(); ++i) {
        if (pts_[i][axis] < pts_[static_cast<std::size_t>(imin)][axis]) imin = static_cast<int>(i);
        if (pts_[i][axis] > pts_[static_cast<std::size_t>(imax)][axis]) imax = static_cast<int>(i);
      }
      ext[static_cast<std::size_t>(2 * axis)] = imin;
      ext[static_cast<std::size_t>(2 * axis + 1)] = imax;
    }
    int a = ext[0], b = ext[1];
    double best = -1.0;
    for (int i : ext)
      for (int j : ext) {
        const double d2 = (P(i) - P(j)).squaredNorm();
        if (d2 > best) {
          best = d2;
          a = i;
          b = j;
        }
      }
    if (std::sqrt(best) <= eps_) flat("convex_hull: all points coincide");

    const Vec3 ab = (P(b) - P(a)).normalized();
    int c = -1;
    best = -1.0;
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      const Vec3 ap = pts_[i] - P(a);
      const double d = (ap - ab * ab.dot(ap)).norm();
      if (d > best) {
        best = d;
        c = static_cast<int>(i);
      }
    }
    if (best <= eps_) flat("convex_hull: collinear input");

    const Vec3 n = (P(b) - P(a)).cross(P(c) - P(a)).normalized();
    int d = -1;
    best = -1.0;
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      const double h = std::abs(n.dot(pts_[i] - P(a)));
      if (h > best) {
        best = h;
        d = static_cast<int>(i);
      }
    }
    if (best <= eps_) flat("convex_hull: coplanar input");

    // Wind (a, b, c) so that d lies below it.
    if (n.dot(P(d) - P(a)) > 0.0) std::swap(b, c);
    const std::array<std::array<int, 3>, 4> tri = {{{a, b, c}, {a, d, b}, {b, d, c}, {c, d, a}}};
    for (const auto& t : tri) {
      Face f;
      f.v = t;
      set_plane(f);
      faces_.push_back(std::move(f));
    }
    // Edge adjacency of the tetrahedron.
    for (int i = 0; i < 4; ++i)
      for (int e = 0; e < 3; ++e) {
        const int u = faces_[static_cast<std::size_t>(i)].v[static_cast<std::size_t>(e)];
        const int w = faces_[static_cast<std::size_t>(i)].v[static_cast<std::size_t>((e + 1) % 3)];
        for (int j = 0; j < 4; ++j) {
          if (j == i) continue;
          for (int k = 0; k < 3; ++k) {
            const auto& fj = faces_[static_cast<std::size_t>(j)];
            if (fj.v[static_cast<std::size_t>(k)] == w && fj.v[static_cast<std::size_t>((k + 1) % 3)] == u)
              faces_[static_cast<std::size_t>(i)].adj[static_cast<std::size_t>(e)] = j;
          }
        }
      }

    std::vector<int> all;
    all.reserve(pts_.size());
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      const int ii = static_cast<int>(i);
      if (ii == a || ii == b || ii == c || ii == d) continue;
      all.push_back(ii);
    }
    assign(all, 0, 4);
    for (int i = 0; i < 4; ++i) pending_.push_back(i);
  }

  const Vec3& P(int i) const { return pts_[static_cast<std::size_t>(i)]; }

  // Moves each point to the first face in [first, last) it lies outside of.
  void assign(const std::vector<int>& points, std::size_t first, std::size_t last) {
    for (int p : points) {
      for (std::size_t f = first; f < last; ++f) {
        Face& face = faces_[f];
        const double h = dist(face, p);
        if (h > eps_) {
          face.outside.push_back(p);
          if (h > face.far_dist) {
            face.far_dist = h;
            face.farthest = p;
          }
          break;
        }
      }
    }
  }

  void expand() {
    std::vector<int> mark(faces_.size(), 0);  // 1 visible, 2 checked invisible
    std::vector<int> visible;
    std::vector<std::pair<int, int>> horizon;  // (visible face, edge)
    struct Frame {
      int face;
      int start;
      int k;
    };
    std::vector<Frame> stack;

    while (!pending_.empty()) {
      const int fi = pending_.back();
      pending_.pop_back();
      if (!faces_[static_cast<std::size_t>(fi)].alive || faces_[static_cast<std::size_t>(fi)].outside.empty())
        continue;
      const int eye = faces_[static_cast<std::size_t>(fi)].farthest;
      mark.resize(faces_.size(), 0);

      visible.clear();
      horizon.clear();
      stack.clear();
      mark[static_cast<std::size_t>(fi)] = 1;
      visible.push_back(fi);
      stack.push_back({fi, 0, 0});
      while (!stack.empty()) {
        Frame& top = stack.back();
        if (top.k == 3) {
          stack.pop_back();
          continue;
        }
        const int e = (top.start + top.k) % 3;
        ++top.k;
        const int face = top.face;
        const int g = faces_[static_cast<std::size_t>(face)].adj[static_cast<std::size_t>(e)];
        if (mark[static_cast<std::size_t>(g)] == 1) continue;
        if (mark[static_cast<std::size_t>(g)] == 0 && dist(faces_[static_cast<std::size_t>(g)], eye) > eps_) {
          mark[static_cast<std::size_t>(g)] = 1;
          visible.push_back(g);
          int back = 0;
          for (int k = 0; k < 3; ++k)
            if (faces_[static_cast<std::size_t>(g)].adj[static_cast<std::size_t>(k)] == face) back = k;
          stack.push_back({g, back, 1});
          continue;
        }
        mark[static_cast<std::size_t>(g)] = 2;
        horizon.emplace_back(face, e);
      }

      bool loop_ok = horizon.size() >= 3;
      for (std::size_t h = 0; loop_ok && h < horizon.size(); ++h) {
        const auto [f1, e1] = horizon[h];
        const auto [f2, e2] = horizon[(h + 1) % horizon.size()];
        const int end = faces_[static_cast<std::size_t>(f1)].v[static_cast<std::size_t>((e1 + 1) % 3)];
        const int start = faces_[static_cast<std::size_t>(f2)].v[static_cast<std::size_t>(e2)];
        loop_ok = end == start;
      }
      for (int v : visible) mark[static_cast<std::size_t>(v)] = 0;
      for (const auto& [f, e] : horizon)
        mark[static_cast<std::size_t>(faces_[static_cast<std::size_t>(f)].adj[static_cast<std::size_t>(e)])] = 0;

      if (!loop_ok) {
        // Numerically inconsistent visibility: treat the eye as lying on the hull.
        Face& f = faces_[static_cast<std::size_t>(fi)];
        f.outside.erase(std::find(f.outside.begin(), f.outside.end(), eye));
        refresh_farthest(f);
        ++skipped_;
        pending_.push_back(fi);
        continue;
      }

      const std::size_t first_new = faces_.size();
      const std::size_t count = horizon.size();
      for (std::size_t h = 0; h < count; ++h) {
        const auto [vf, e] = horizon[h];
        const Face& old = faces_[static_cast<std::size_t>(vf)];
        const int outer = old.adj[static_cast<std::size_t>(e)];
        Face nf;
        nf.v = {old.v[static_cast<std::size_t>(e)], old.v[static_cast<std::size_t>((e + 1) % 3)], eye};
        nf.adj[0] = outer;
        nf.adj[1] = static_cast<int>(first_new + (h + 1) % count);
        nf.adj[2] = static_cast<int>(first_new + (h + count - 1) % count);
        const Vec3 fallback = old.n;
        set_plane(nf, &fallback);
        Face& of = faces_[static_cast<std::size_t>(outer)];
        for (int k = 0; k < 3; ++k)
          if (of.adj[static_cast<std::size_t>(k)] == vf) of.adj[static_cast<std::size_t>(k)] = static_cast<int>(first_new + h);
        faces_.push_back(std::move(nf));
      }

      std::vector<int> orphans;
      for (int v : visible) {
        Face& f = faces_[static_cast<std::size_t>(v)];
        f.alive = false;
        for (int p : f.outside)
          if (p != eye) orphans.push_back(p);
        f.outside.clear();
        f.outside.shrink_to_fit();
      }
      assign(orphans, first_new, faces_.size());
      for (std::size_t f = first_new; f < faces_.size(); ++f) pending_.push_back(static_cast<int>(f));
    }
  }

  void refresh_farthest(Face& f) const {
    f.farthest = -1;
    f.far_dist = 0.0;
    for (int p : f.outside) {
      const double h = dist(f, p);
      if (h > f.far_dist) {
        f.far_dist = h;
        f.farthest = p;
      }
    }
  }

  Hull3 collect() const {
    Hull3 hull;
    hull.tolerance = eps_;
    std::vector<int> remap(pts_.size(), -1);
    for (const Face& f : faces_) {
      if (!f.alive) continue;
      std::array<int, 3> tri{};
      for (int k = 0; k < 3; ++k) {
        const int p = f.v[static_cast<std::size_t>(k)];
        if (remap[static_cast<std::size_t>(p)] < 0) {
          remap[static_cast<std::size_t>(p)] = static_cast<int>(hull.vertices.size());
          hull.vertices.push_back(P(p));
          hull.source.push_back(static_cast<std::size_t>(p));
        }
        tri[static_cast<std::size_t>(k)] = remap[static_cast<std::size_t>(p)];
      }
      hull.faces.push_back(tri);
      hull.face_normals.push_back(f.n);
    }
    return hull;
  }

  std::span<const Vec3> pts_;
  std::vector<Face> faces_;
  std::vector<int> pending_;
  double eps_ = 0.0;
  std::size_t skipped_ = 0;
};

}  // namespace detail

/// Quickhull. Every input point ends up on or inside all face planes within
/// 1e-9 times the bounding-box diagonal.
inline Hull3 convex_hull(std::span<const Vec3> points) { return detail::QuickHull(points).run(); }

inline double volume(const Hull3& h) {
  if (h.vertices.empty()) return 0.0;
  Vec3 c = Vec3::Zero();
  for (const Vec3& v : h.vertices) c += v;
  c /= static_cast<double>(h.vertices.size());
  double vol = 0.0;
  for (const auto& f : h.faces) {
    const Vec3& a = h.vertices[static_cast<std::size_t>(f[0])];
    const Vec3& b = h.vertices[static_cast<std::size_t>(f[1])];
    const Vec3& d = h.vertices[static_cast<std::size_t>(f[2])];
    vol += (a - c).dot((b - c).cross(d - c));
  }
  return std::max(0.0, vol / 6.0);
}

struct ChebyshevCentre {
  Vec3 centre;
  double radius = 0.0;  // min over half-spaces of offset - normal . centre
};

/// Largest inscribed ball of the intersection, solved as the dual of
/// max s s.t. a_i . x + s <= b_i:
///   max -b^T y  s.t.  sum y_i (a_i, 1) = (0, 0, 0, 1),  0 <= y <= 1,
/// whose equality multipliers are (-x, -s).
inline ChebyshevCentre interior_point(std::span<const Halfspace3> halfspaces) {
  const std::size_t t = halfspaces.size();
  // Four zero columns keep the LP well-formed for tiny inputs.
  const Eigen::Index cols = static_cast<Eigen::Index>(t + 4);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(cols, 4);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(cols);
  double scale = 0.0;
  for (std::size_t i = 0; i < t; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    a.block<1, 3>(row, 0) = halfspaces[i].normal.transpose();
    a(row, 3) = 1.0;
    c[row] = -halfspaces[i].offset;
    scale = std::max(scale, std::abs(halfspaces[i].offset));
  }
  const BoxedSimplex simplex(a, Eigen::Vector4d(0.0, 0.0, 0.0, 1.0));
  const LpSolution sol = simplex.maximize(c);
  if (sol.status != LpStatus::optimal)
    throw GeometryError(GeometryError::Kind::unbounded,
                        "interior_point: half-space normals do not surround the origin (unbounded)");
  ChebyshevCentre out;
  out.centre = -sol.duals.head<3>();
  out.radius = std::numeric_limits<double>::infinity();
  for (const Halfspace3& h : halfspaces) out.radius = std::min(out.radius, h.offset - h.normal.dot(out.centre));
  const double tol = 1e-12 * std::max(1.0, scale);
  if (!(out.radius > tol))
    throw GeometryError(GeometryError::Kind::infeasible,
                        "interior_point: intersection is empty or flat, max-min slack " +
                            std::to_string(out.radius),
                        out.radius);
  return out;
}

struct HalfspaceIntersection {
  Hull3 hull;
  Vec3 interior;
  /// Indices of the half-spaces supporting a facet (dual hull vertices).
  std::vector<std::size_t> binding;
};

/// Vertex representation of the intersection of the half-spaces. With the
/// interior point moved to the origin, a . x <= b maps to the dual point a / b;
/// facets of the dual hull map back to primal vertices.
inline HalfspaceIntersection halfspace_intersection(std::span<const Halfspace3> halfspaces,
                                                    std::optional<Vec3> interior_hint = std::nullopt) {
  Vec3 centre;
  bool have_centre = false;
  if (interior_hint) {
    double min_slack = std::numeric_limits<double>::infinity();
    double max_slack = 0.0;
    for (const Halfspace3& h : halfspaces) {
      const double s = h.offset - h.normal.dot(*interior_hint);
      min_slack = std::min(min_slack, s);
      max_slack = std::max(max_slack, s);
    }
    if (min_slack > 1e-9 * max_slack) {
      centre = *interior_hint;
      have_centre = true;
    }
  }
  if (!have_centre) centre = interior_point(halfspaces).centre;

  std::vector<Vec3> dual(halfspaces.size());
  for (std::size_t i = 0; i < halfspaces.size(); ++i) {
    const double b = halfspaces[i].offset - halfspaces[i].normal.dot(centre);
    dual[i] = halfspaces[i].normal / b;
  }
  Hull3 dual_hull;
  try {
    dual_hull = convex_hull(dual);
  } catch (const GeometryError& e) {
    throw GeometryError(GeometryError::Kind::unbounded,
                        std::string("halfspace_intersection: unbounded (") + e.what() + ")");
  }

  std::vector<Vec3> primal;
  primal.reserve(dual_hull.faces.size());
  for (std::size_t f = 0; f < dual_hull.faces.size(); ++f) {
    const Vec3& n = dual_hull.face_normals[f];
    const double d = n.dot(dual_hull.vertices[static_cast<std::size_t>(dual_hull.faces[f][0])]);
    if (!(d > dual_hull.tolerance))
      throw GeometryError(GeometryError::Kind::unbounded,
                          "halfspace_intersection: unbounded (dual hull does not contain the origin)");
    primal.push_back(centre + n / d);
  }

  HalfspaceIntersection out;
  out.hull = convex_hull(primal);
  out.interior = centre;
  out.binding = dual_hull.source;
  std::sort(out.binding.begin(), out.binding.end());
  return out;
}

}  // namespace mmv
