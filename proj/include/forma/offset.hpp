#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "forma/mesh.hpp"

namespace forma {

struct OffsetOptions {
  // When set, boundary vertices move parallel to this plane so a cap that
  // stands on the plane keeps standing on it.
  std::optional<Plane> base_plane;
  // Offsets that shrink any sampled edge curvature radius below this
  // fraction of its original value are rejected as folding.
  double min_stretch = 0.05;
};

// Moves every vertex along its area-weighted outward normal by `distance`.
//
// Folding is detected two ways: per edge, the normal curvature
// k = (n_j - n_i).(p_j - p_i) / |p_j - p_i|^2 must keep 1 + distance * k
// above `min_stretch`; and no triangle may flip its orientation.
inline TriMesh offset_mesh(const TriMesh& mesh, double distance,
                           const OffsetOptions& options = {}) {
  if (!std::isfinite(distance)) throw PreconditionError("offset distance must be finite");
  if (distance == 0.0) return mesh;

  auto normals = vertex_normals(mesh);
  const MeshTopology topo(mesh);
  if (options.base_plane) {
    const Vec3& up = options.base_plane->normal;
    std::vector<bool> on_boundary(mesh.vertex_count(), false);
    for (std::size_t e = 0; e < topo.edges.size(); ++e) {
      if (topo.is_boundary_edge(e)) on_boundary[topo.edges[e][0]] = on_boundary[topo.edges[e][1]] = true;
    }
    for (std::size_t i = 0; i < normals.size(); ++i) {
      if (!on_boundary[i]) continue;
      Vec3 flat = normals[i] - normals[i].dot(up) * up;
      const double len = flat.norm();
      if (len > 1e-12) normals[i] = flat / len;
    }
  }
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (normals[i].squaredNorm() == 0.0) {
      throw GeometryError("vertex " + std::to_string(i) + " has no well-defined normal");
    }
  }

  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    const auto [a, b] = topo.edges[e];
    const Vec3 d = mesh.vertex(b) - mesh.vertex(a);
    const double k = (normals[b] - normals[a]).dot(d) / d.squaredNorm();
    if (1.0 + distance * k <= options.min_stretch) {
      throw GeometryError("offset by " + std::to_string(distance) +
                          " m self-intersects near edge (" + std::to_string(a) + ", " +
                          std::to_string(b) + "); local curvature radius " +
                          std::to_string(1.0 / std::abs(k)) + " m");
    }
  }

  std::vector<Point3> moved(mesh.vertex_count());
  for (std::size_t i = 0; i < moved.size(); ++i) moved[i] = mesh.vertex(i) + distance * normals[i];
  TriMesh out = mesh.with_vertices(std::move(moved));

  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    if (triangle_area_vector(mesh, tri).dot(triangle_area_vector(out, tri)) <= 0.0) {
      throw GeometryError("offset by " + std::to_string(distance) + " m flips triangle " +
                          std::to_string(t));
    }
  }
  return out;
}

} // namespace forma
