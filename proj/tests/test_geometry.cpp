#include <gtest/gtest.h>

#include "geometry_oracle.hpp"
#include "mmv/geometry.hpp"
#include "mmv/sphere.hpp"

using namespace mmv;

namespace {

std::vector<Vec3> cube_corners() {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) pts.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  return pts;
}

bool hull_contains(const Hull3& h, const Vec3& x, double slack) {
  for (std::size_t f = 0; f < h.faces.size(); ++f) {
    const Vec3& n = h.face_normals[f];
    if (n.dot(x - h.vertices[static_cast<std::size_t>(h.faces[f][0])]) > slack) return false;
  }
  return true;
}

}  // namespace

TEST(ConvexHull, UnitCubeWithInteriorPoint) {
  std::vector<Vec3> pts = cube_corners();
  pts.emplace_back(0.5, 0.5, 0.5);
  pts.emplace_back(0.5, 0.5, 1.0);  // on a face
  const Hull3 h = convex_hull(pts);
  EXPECT_EQ(h.vertices.size(), 8u);
  EXPECT_EQ(h.faces.size(), 12u);
  EXPECT_NEAR(volume(h), 1.0, 1e-12);
}

TEST(ConvexHull, TetrahedronVolumeMatchesDeterminant) {
  KeyedStream rng(3, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec3> p;
    for (int i = 0; i < 4; ++i) p.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
    Eigen::Matrix3d m;
    m << (p[1] - p[0]).transpose(), (p[2] - p[0]).transpose(), (p[3] - p[0]).transpose();
    const double expected = std::abs(m.determinant()) / 6.0;
    if (expected < 1e-6) continue;
    EXPECT_NEAR(volume(convex_hull(p)), expected, 1e-12);
  }
}

TEST(ConvexHull, DegenerateInputsAreTyped) {
  const std::vector<Vec3> three{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  try {
    convex_hull(three);
    FAIL();
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.kind(), GeometryError::Kind::too_few_points);
  }
  std::vector<Vec3> plane;
  for (int i = 0; i < 20; ++i) plane.emplace_back(i % 5, i / 5, 2.0);
  try {
    convex_hull(plane);
    FAIL();
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.kind(), GeometryError::Kind::flat);
  }
  std::vector<Vec3> same(10, Vec3(1, 2, 3));
  EXPECT_THROW(convex_hull(same), GeometryError);
}

TEST(ConvexHull, BallSamplesContainedAndEulerHolds) {
  const DirectionSet d = sample_sphere(3, 20000, 4);
  KeyedStream rng(4, 1);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < d.count(); ++i) pts.push_back(std::cbrt(rng.uniform()) * d[i].transpose());
  const Hull3 h = convex_hull(pts);
  for (const Vec3& p : pts) ASSERT_TRUE(hull_contains(h, p, h.tolerance));
  // Triangulated sphere: V - E + F = 2 with E = 3F / 2.
  EXPECT_EQ(static_cast<long>(h.vertices.size()) - static_cast<long>(3 * h.faces.size() / 2) +
                static_cast<long>(h.faces.size()),
            2);
  EXPECT_LT(volume(h), 4.0 / 3.0 * 3.14159265358979);
  EXPECT_GT(volume(h), 0.9 * 4.0 / 3.0 * 3.14159265358979);
}

TEST(ConvexHull, InvariantUnderInputOrder) {
  const DirectionSet d = sample_sphere(3, 500, 6);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < d.count(); ++i) pts.push_back(d[i].transpose());
  std::vector<Vec3> rev(pts.rbegin(), pts.rend());
  EXPECT_NEAR(volume(convex_hull(pts)), volume(convex_hull(rev)), 1e-12);
}

TEST(InteriorPoint, CubeCentre) {
  const auto hs = test::unit_cube_halfspaces();
  const ChebyshevCentre c = interior_point(hs);
  EXPECT_LT((c.centre - Vec3(0.5, 0.5, 0.5)).norm(), 1e-12);
  EXPECT_NEAR(c.radius, 0.5, 1e-12);
}

TEST(InteriorPoint, EmptyAndUnboundedAreTyped) {
  auto hs = test::unit_cube_halfspaces();
  hs.push_back({Vec3(1, 0, 0), -0.5});  // x <= -0.5 against x >= 0
  try {
    interior_point(hs);
    FAIL();
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.kind(), GeometryError::Kind::infeasible);
  }
  const std::vector<Halfspace3> open{{Vec3(1, 0, 0), 1.0}, {Vec3(0, 1, 0), 1.0}, {Vec3(0, 0, 1), 1.0}};
  try {
    halfspace_intersection(open);
    FAIL();
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.kind(), GeometryError::Kind::unbounded);
  }
}

TEST(HalfspaceIntersection, CubeFromSixPlanes) {
  const auto hs = test::unit_cube_halfspaces();
  const HalfspaceIntersection cut = halfspace_intersection(hs);
  EXPECT_EQ(cut.hull.vertices.size(), 8u);
  EXPECT_NEAR(volume(cut.hull), 1.0, 1e-12);
  EXPECT_EQ(cut.binding.size(), 6u);
  EXPECT_LT(test::set_distance(cut.hull.vertices, cube_corners()), 1e-12);
}

TEST(HalfspaceIntersection, RedundantPlanesAreNotBinding) {
  auto hs = test::unit_cube_halfspaces();
  hs.push_back({Vec3(1, 1, 1).normalized(), 10.0});
  const HalfspaceIntersection cut = halfspace_intersection(hs, Vec3(0.3, 0.3, 0.3));
  EXPECT_EQ(cut.binding, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(HalfspaceIntersection, BadHintFallsBackToCentre) {
  const auto hs = test::unit_cube_halfspaces();
  const HalfspaceIntersection cut = halfspace_intersection(hs, Vec3(2.0, 2.0, 2.0));
  EXPECT_NEAR(volume(cut.hull), 1.0, 1e-12);
}

TEST(HalfspaceIntersection, MatchesPlaneTripleEnumeration) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto hs = test::random_polytope(8 + seed % 25, seed);
    const std::vector<Vec3> oracle = test::enumerate_vertices(hs);
    const HalfspaceIntersection cut = halfspace_intersection(hs);
    EXPECT_LT(test::set_distance(oracle, cut.hull.vertices), 1e-7) << "seed " << seed;
    EXPECT_LT(test::set_distance(cut.hull.vertices, oracle), 1e-7) << "seed " << seed;
  }
}
