#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "forma/mesh.hpp"

using namespace forma;
constexpr double pi = std::numbers::pi;

TEST(CapMesh, EulerCharacteristicIsOneAtEveryLevel) {
  for (int level = 1; level <= 6; ++level) {
    const auto m = generate_cap_mesh(1.0, level);
    EXPECT_EQ(euler_characteristic(m), 1) << "level " << level;
  }
}

TEST(CapMesh, BoundaryVerticesAnchoredOnRing) {
  const auto m = generate_cap_mesh(1.0, 4);
  const auto boundary = boundary_vertices(m);
  ASSERT_FALSE(boundary.empty());
  EXPECT_EQ(boundary.size(), m.anchored_count());
  for (auto v : boundary) EXPECT_TRUE(m.is_anchored(v));

  for (int level : {1, 3, 5}) {
    const auto cap = generate_cap_mesh(5.2, level);
    for (auto v : boundary_vertices(cap)) {
      const auto& p = cap.vertex(v);
      EXPECT_NEAR(std::hypot(p.x(), p.y()), 5.2, 1e-9);
      EXPECT_EQ(p.z(), 0.0);
    }
  }
}

TEST(CapMesh, VerticesLieOnSphere) {
  const auto m = generate_cap_mesh(6.0, 3);
  for (const auto& p : m.vertices()) {
    EXPECT_NEAR(p.norm(), 6.0, 1e-9);
    EXPECT_GE(p.z(), 0.0);
  }
}

TEST(CapMesh, TrianglesFaceOutward) {
  const auto m = generate_cap_mesh(2.0, 3);
  for (const auto& t : m.triangles()) {
    const Point3 c = (m.vertex(t[0]) + m.vertex(t[1]) + m.vertex(t[2])) / 3.0;
    EXPECT_GT(triangle_area_vector(m, t).dot(c), 0.0);
  }
}

TEST(CapMesh, AreaAndVolumeAgainstHemisphere) {
  for (double r : {1.0, 5.2, 6.0}) {
    const auto m = generate_cap_mesh(r, 5);
    EXPECT_NEAR(surface_area(m), 2 * pi * r * r, 0.01 * 2 * pi * r * r) << r;
    const double v = 2.0 / 3.0 * pi * r * r * r;
    EXPECT_NEAR(enclosed_volume(m, Plane::horizontal(0.0)), v, 0.01 * v) << r;
  }
  EXPECT_NEAR(enclosed_volume(generate_cap_mesh(5.2, 5), Plane::horizontal(0.0)), 294.5, 2.945);
}

TEST(CapMesh, MetricErrorsDecreaseWithLevel) {
  const double r = 1.0;
  double prev_area = 1e9, prev_vol = 1e9;
  for (int level = 1; level <= 7; ++level) {
    const auto m = generate_cap_mesh(r, level);
    const double ea = std::abs(surface_area(m) - 2 * pi) / (2 * pi);
    const double ev = std::abs(enclosed_volume(m, Plane::horizontal(0.0)) - 2 * pi / 3) / (2 * pi / 3);
    EXPECT_LT(ea, prev_area) << level;
    EXPECT_LT(ev, prev_vol) << level;
    prev_area = ea;
    prev_vol = ev;
  }
}

TEST(CapMesh, RejectsBadArguments) {
  EXPECT_THROW(generate_cap_mesh(0.0, 3), PreconditionError);
  EXPECT_THROW(generate_cap_mesh(-1.0, 3), PreconditionError);
  EXPECT_THROW(generate_cap_mesh(1.0, 0), PreconditionError);
  EXPECT_THROW(generate_cap_mesh(1.0, 21), LimitError);
  EXPECT_THROW(generate_cap_mesh(1.0, 8, CapMeshOptions{1000}), LimitError);
}

TEST(SurfaceArea, SingleAndDegenerateTriangles) {
  const TriMesh tri({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  EXPECT_DOUBLE_EQ(surface_area(tri), 0.5);
  const TriMesh flat({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 1, 2}});
  EXPECT_DOUBLE_EQ(surface_area(flat), 0.0);
}

TEST(EnclosedVolume, FlatDiscIsZero) {
  const auto cap = generate_cap_mesh(3.0, 3);
  auto pts = cap.vertices();
  for (auto& p : pts) p.z() = 0.0;
  const auto disc = cap.with_vertices(pts);
  EXPECT_NEAR(enclosed_volume(disc, Plane::horizontal(0.0)), 0.0, 1e-12);
}

TEST(EnclosedVolume, RequiresBoundaryOnPlane) {
  const auto cap = generate_cap_mesh(3.0, 2);
  EXPECT_THROW(enclosed_volume(cap, Plane::horizontal(0.5)), PreconditionError);
}

TEST(TriMesh, ValidatesConstruction) {
  EXPECT_THROW(TriMesh({{0, 0, 0}, {1, 0, 0}}, {{0, 1, 2}}), PreconditionError);
  EXPECT_THROW(TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 1}}), PreconditionError);
  EXPECT_THROW(TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}, {true}), PreconditionError);
}

TEST(MeshTopology, RejectsNonManifoldEdge) {
  const TriMesh m({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}},
                  {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}});
  EXPECT_THROW(MeshTopology{m}, GeometryError);
}

TEST(MeshTopology, CountsMatchCapFormula) {
  const int level = 4;
  const int n = 1 << level;
  const auto m = generate_cap_mesh(1.0, level);
  EXPECT_EQ(m.triangle_count(), static_cast<std::size_t>(6 * n * n));
  EXPECT_EQ(m.vertex_count(), static_cast<std::size_t>(1 + 3 * n * (n + 1)));
  const MeshTopology topo(m);
  std::size_t boundary = 0;
  for (std::size_t e = 0; e < topo.edges.size(); ++e) boundary += topo.is_boundary_edge(e);
  EXPECT_EQ(boundary, static_cast<std::size_t>(6 * n));
}
