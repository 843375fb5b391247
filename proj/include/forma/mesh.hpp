#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "forma/error.hpp"

namespace forma {

using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using Triangle = std::array<std::uint32_t, 3>;

struct Plane {
  Point3 origin = Point3::Zero();
  Vec3 normal = Vec3::UnitZ();

  // Normalizes `normal`; throws on a zero or non-finite direction.
  static Plane through(const Point3& origin, const Vec3& normal) {
    const double n = normal.norm();
    if (!(n > 0.0) || !std::isfinite(n) || !origin.allFinite()) {
      throw PreconditionError("plane normal must be a finite non-zero vector");
    }
    return Plane{origin, normal / n};
  }

  static Plane horizontal(double z) { return Plane{Point3(0.0, 0.0, z), Vec3::UnitZ()}; }

  double signed_distance(const Point3& p) const { return normal.dot(p - origin); }
};

struct Polyline3 {
  std::vector<Point3> points;
  // Closed polylines store each point once; the closing segment is implied.
  bool closed = false;

  double length() const {
    double total = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      total += (points[i] - points[i - 1]).norm();
    }
    if (closed && points.size() > 1) {
      total += (points.front() - points.back()).norm();
    }
    return total;
  }
};

// Indexed triangle surface. Values are validated on construction and never
// mutated afterwards; geometric operations return new meshes.
class TriMesh {
public:
  TriMesh() = default;

  TriMesh(std::vector<Point3> vertices, std::vector<Triangle> triangles,
          std::vector<bool> anchored = {})
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)),
        anchored_(std::move(anchored)) {
    if (anchored_.empty()) anchored_.assign(vertices_.size(), false);
    validate();
  }

  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t triangle_count() const noexcept { return triangles_.size(); }

  const std::vector<Point3>& vertices() const noexcept { return vertices_; }
  const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  const std::vector<bool>& anchored() const noexcept { return anchored_; }

  const Point3& vertex(std::size_t i) const { return vertices_[i]; }
  bool is_anchored(std::size_t i) const { return anchored_[i]; }

  std::size_t anchored_count() const {
    return static_cast<std::size_t>(std::count(anchored_.begin(), anchored_.end(), true));
  }

  // Same connectivity and anchors, new coordinates.
  TriMesh with_vertices(std::vector<Point3> vertices) const {
    if (vertices.size() != vertices_.size()) {
      throw PreconditionError("replacement vertex list has a different size");
    }
    return TriMesh(std::move(vertices), triangles_, anchored_);
  }

private:
  void validate() const {
    if (anchored_.size() != vertices_.size()) {
      throw PreconditionError("anchored flag count does not match vertex count");
    }
    for (const auto& p : vertices_) {
      if (!p.allFinite()) throw PreconditionError("mesh vertex has a non-finite coordinate");
    }
    const auto n = vertices_.size();
    for (const auto& t : triangles_) {
      if (t[0] >= n || t[1] >= n || t[2] >= n) {
        throw PreconditionError("triangle references a vertex index out of range");
      }
      if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
        throw PreconditionError("triangle repeats a vertex");
      }
    }
  }

  std::vector<Point3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<bool> anchored_;
};

// Edge connectivity derived from a TriMesh. Edges are sorted by (lo, hi)
// vertex index so every traversal built on top of this is deterministic.
struct MeshTopology {
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

  std::vector<std::array<std::uint32_t, 2>> edges;           // lo < hi
  std::vector<std::array<std::uint32_t, 2>> edge_triangles;  // second may be kNone
  std::vector<std::array<std::uint32_t, 3>> triangle_edges;  // (v0v1, v1v2, v2v0)

  explicit MeshTopology(const TriMesh& mesh) {
    const auto& tris = mesh.triangles();
    struct HalfEdge {
      std::uint32_t lo, hi, tri, slot;
    };
    std::vector<HalfEdge> half;
    half.reserve(tris.size() * 3);
    for (std::uint32_t t = 0; t < tris.size(); ++t) {
      for (std::uint32_t k = 0; k < 3; ++k) {
        const auto a = tris[t][k];
        const auto b = tris[t][(k + 1) % 3];
        half.push_back({std::min(a, b), std::max(a, b), t, k});
      }
    }
    std::sort(half.begin(), half.end(), [](const HalfEdge& x, const HalfEdge& y) {
      return std::tie(x.lo, x.hi, x.tri, x.slot) < std::tie(y.lo, y.hi, y.tri, y.slot);
    });
    triangle_edges.assign(tris.size(), {kNone, kNone, kNone});
    for (std::size_t i = 0; i < half.size();) {
      std::size_t j = i;
      while (j < half.size() && half[j].lo == half[i].lo && half[j].hi == half[i].hi) ++j;
      if (j - i > 2) {
        throw GeometryError("non-manifold edge (" + std::to_string(half[i].lo) + ", " +
                            std::to_string(half[i].hi) + ") shared by more than two triangles");
      }
      const auto id = static_cast<std::uint32_t>(edges.size());
      edges.push_back({half[i].lo, half[i].hi});
      edge_triangles.push_back({half[i].tri, j - i == 2 ? half[i + 1].tri : kNone});
      for (std::size_t k = i; k < j; ++k) triangle_edges[half[k].tri][half[k].slot] = id;
      i = j;
    }
  }

  bool is_boundary_edge(std::size_t e) const { return edge_triangles[e][1] == kNone; }
};

inline Vec3 triangle_area_vector(const TriMesh& mesh, const Triangle& t) {
  const auto& a = mesh.vertex(t[0]);
  return 0.5 * (mesh.vertex(t[1]) - a).cross(mesh.vertex(t[2]) - a);
}

inline double triangle_area(const TriMesh& mesh, const Triangle& t) {
  return triangle_area_vector(mesh, t).norm();
}

inline double surface_area(const TriMesh& mesh) {
  double total = 0.0;
  for (const auto& t : mesh.triangles()) total += triangle_area(mesh, t);
  return total;
}

inline std::vector<double> triangle_areas(const TriMesh& mesh) {
  std::vector<double> out;
  out.reserve(mesh.triangle_count());
  for (const auto& t : mesh.triangles()) out.push_back(triangle_area(mesh, t));
  return out;
}

inline long euler_characteristic(const TriMesh& mesh) {
  const MeshTopology topo(mesh);
  return static_cast<long>(mesh.vertex_count()) - static_cast<long>(topo.edges.size()) +
         static_cast<long>(mesh.triangle_count());
}

// Sorted indices of vertices on at least one boundary edge.
inline std::vector<std::uint32_t> boundary_vertices(const TriMesh& mesh) {
  const MeshTopology topo(mesh);
  std::vector<bool> on(mesh.vertex_count(), false);
  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    if (topo.is_boundary_edge(e)) on[topo.edges[e][0]] = on[topo.edges[e][1]] = true;
  }
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < on.size(); ++i) {
    if (on[i]) out.push_back(i);
  }
  return out;
}

// Area-weighted vertex normals (unit length; zero for isolated vertices).
inline std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
  std::vector<Vec3> n(mesh.vertex_count(), Vec3::Zero());
  for (const auto& t : mesh.triangles()) {
    const Vec3 w = triangle_area_vector(mesh, t);
    for (auto v : t) n[v] += w;
  }
  for (auto& v : n) {
    const double len = v.norm();
    if (len > 0.0) v /= len;
  }
  return n;
}

// Volume between the surface and `base_plane`, as the sum of signed
// tetrahedra against a point of the plane. Any boundary must lie on the plane.
inline double enclosed_volume(const TriMesh& mesh, const Plane& base_plane,
                              double boundary_tolerance = 1e-6) {
  for (auto v : boundary_vertices(mesh)) {
    if (std::abs(base_plane.signed_distance(mesh.vertex(v))) > boundary_tolerance) {
      throw PreconditionError("mesh boundary vertex " + std::to_string(v) +
                              " does not lie on the base plane");
    }
  }
  const Point3& o = base_plane.origin;
  double six_v = 0.0;
  for (const auto& t : mesh.triangles()) {
    const Vec3 a = mesh.vertex(t[0]) - o;
    const Vec3 b = mesh.vertex(t[1]) - o;
    const Vec3 c = mesh.vertex(t[2]) - o;
    six_v += a.dot(b.cross(c));
  }
  return six_v / 6.0;
}

struct CapMeshOptions {
  std::size_t max_vertices = 1'000'000;
};

// Hemispherical cap of `radius` centred on the origin, base ring in z = 0.
//
// The cap is a hexagonal pyramid whose six faces are refined 2^level times
// per edge and mapped onto the sphere along rings of constant polar angle:
// ring k (k = 0..n) sits at polar angle (pi/2)(k/n) and carries 6k vertices
// spaced evenly in azimuth. Ring n is the exact base circle and is anchored.
// Triangle count is 6 * 4^level; triangle areas stay within a factor ~1.6.
inline TriMesh generate_cap_mesh(double radius, int subdivision_level,
                                 const CapMeshOptions& options = {}) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw PreconditionError("cap radius must be positive and finite");
  }
  if (subdivision_level < 1) throw PreconditionError("subdivision level must be >= 1");
  if (subdivision_level > 20) {
    throw LimitError("subdivision level " + std::to_string(subdivision_level) +
                     " exceeds the vertex cap of " + std::to_string(options.max_vertices));
  }
  const std::size_t n = std::size_t{1} << subdivision_level;
  const std::size_t vertex_total = 1 + 3 * n * (n + 1);
  if (vertex_total > options.max_vertices) {
    throw LimitError("subdivision level " + std::to_string(subdivision_level) + " needs " +
                     std::to_string(vertex_total) + " vertices, above the cap of " +
                     std::to_string(options.max_vertices));
  }

  auto ring_start = [](std::size_t k) -> std::size_t { return k == 0 ? 0 : 1 + 3 * k * (k - 1); };
  auto index = [&](std::size_t k, std::size_t j) -> std::uint32_t {
    if (k == 0) return 0;
    return static_cast<std::uint32_t>(ring_start(k) + j % (6 * k));
  };

  std::vector<Point3> vertices;
  std::vector<bool> anchored;
  vertices.reserve(vertex_total);
  anchored.reserve(vertex_total);
  vertices.emplace_back(0.0, 0.0, radius);
  anchored.push_back(false);
  for (std::size_t k = 1; k <= n; ++k) {
    const double polar = 0.5 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    const double sp = k == n ? 1.0 : std::sin(polar);
    const double z = k == n ? 0.0 : radius * std::cos(polar);
    for (std::size_t j = 0; j < 6 * k; ++j) {
      const double az = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(6 * k);
      vertices.emplace_back(radius * sp * std::cos(az), radius * sp * std::sin(az), z);
      anchored.push_back(k == n);
    }
  }

  std::vector<Triangle> triangles;
  triangles.reserve(6 * n * n);
  for (std::size_t k = 1; k <= n; ++k) {
    for (std::size_t s = 0; s < 6; ++s) {
      const std::size_t inner0 = s * (k - 1);
      const std::size_t outer0 = s * k;
      for (std::size_t i = 0; i < k; ++i) {
        triangles.push_back({index(k - 1, inner0 + i), index(k, outer0 + i), index(k, outer0 + i + 1)});
        if (i + 1 < k) {
          triangles.push_back(
              {index(k - 1, inner0 + i), index(k, outer0 + i + 1), index(k - 1, inner0 + i + 1)});
        }
      }
    }
  }
  return TriMesh(std::move(vertices), std::move(triangles), std::move(anchored));
}

} // namespace forma
