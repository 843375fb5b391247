#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "forma/mesh.hpp"

namespace forma {

struct ContourOptions {
  // Consecutive points closer than this are merged.
  double chain_tolerance = 1e-7;
  // Polylines shorter than this are dropped (tangent planes, float noise).
  double min_length = 1e-3;
};

namespace detail {

inline void merge_close_points(Polyline3& line, double tol) {
  auto& pts = line.points;
  if (pts.empty()) return;
  std::vector<Point3> kept;
  kept.reserve(pts.size());
  kept.push_back(pts.front());
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if ((pts[i] - kept.back()).norm() > tol) kept.push_back(pts[i]);
  }
  if (line.closed) {
    while (kept.size() > 1 && (kept.back() - kept.front()).norm() <= tol) kept.pop_back();
  }
  pts = std::move(kept);
}

} // namespace detail

// Zero level set of a per-vertex field on a mesh, by marching triangles.
//
// A vertex is "above" when its value is strictly positive, so vertices lying
// exactly on the level are treated as below; every triangle then has zero or
// two crossing edges. Crossings are chained through shared edges, not by
// coordinate matching: chains ending on boundary edges become open
// polylines, all others come back closed. Output order is deterministic.
inline std::vector<Polyline3> zero_level_set(const TriMesh& mesh, std::span<const double> field,
                                             const ContourOptions& options = {}) {
  if (field.size() != mesh.vertex_count()) {
    throw PreconditionError("scalar field size does not match vertex count");
  }
  const MeshTopology topo(mesh);
  const auto& tris = mesh.triangles();
  const std::size_t edge_count = topo.edges.size();

  auto above = [&](std::uint32_t v) { return field[v] > 0.0; };
  std::vector<bool> crossing(edge_count, false);
  std::vector<Point3> crossing_point(edge_count);
  for (std::size_t e = 0; e < edge_count; ++e) {
    const auto [a, b] = topo.edges[e];
    if (above(a) == above(b)) continue;
    crossing[e] = true;
    const double fa = field[a];
    const double fb = field[b];
    const double t = fa / (fa - fb);
    crossing_point[e] = mesh.vertex(a) + t * (mesh.vertex(b) - mesh.vertex(a));
  }

  constexpr auto kNone = MeshTopology::kNone;
  // Each crossing edge links to at most two others, one per adjacent triangle.
  std::vector<std::array<std::uint32_t, 2>> link(edge_count, {kNone, kNone});
  auto attach = [&](std::uint32_t e, std::uint32_t other) {
    auto& slots = link[e];
    (slots[0] == kNone ? slots[0] : slots[1]) = other;
  };
  for (std::size_t t = 0; t < tris.size(); ++t) {
    std::uint32_t found[2];
    int count = 0;
    for (auto e : topo.triangle_edges[t]) {
      if (crossing[e]) found[count++] = e;
    }
    if (count == 2) {
      attach(found[0], found[1]);
      attach(found[1], found[0]);
    }
  }

  std::vector<bool> visited(edge_count, false);
  std::vector<Polyline3> out;
  auto walk = [&](std::uint32_t start, bool closed) {
    Polyline3 line;
    line.closed = closed;
    std::uint32_t prev = kNone;
    std::uint32_t cur = start;
    while (cur != kNone && !visited[cur]) {
      visited[cur] = true;
      line.points.push_back(crossing_point[cur]);
      const auto& l = link[cur];
      std::uint32_t next = l[0] != prev && l[0] != kNone && !visited[l[0]] ? l[0] : l[1];
      if (next != kNone && visited[next]) next = kNone;
      prev = cur;
      cur = next;
    }
    detail::merge_close_points(line, options.chain_tolerance);
    if (line.closed && line.points.size() < 3) return;
    if (!line.closed && line.points.size() < 2) return;
    if (line.length() < options.min_length) return;
    out.push_back(std::move(line));
  };

  // Open chains first (they start on boundary edges), then the loops.
  for (std::uint32_t e = 0; e < edge_count; ++e) {
    if (!crossing[e] || visited[e]) continue;
    const bool endpoint = link[e][0] == kNone || link[e][1] == kNone;
    if (endpoint) walk(e, false);
  }
  for (std::uint32_t e = 0; e < edge_count; ++e) {
    if (crossing[e] && !visited[e]) walk(e, true);
  }
  return out;
}

// Signed area of a closed polyline projected onto the plane with `normal`.
inline double projected_area(const Polyline3& line, const Vec3& normal) {
  if (line.points.size() < 3) return 0.0;
  Vec3 twice = Vec3::Zero();
  const auto& p = line.points;
  for (std::size_t i = 0; i < p.size(); ++i) {
    twice += p[i].cross(p[(i + 1) % p.size()]);
  }
  return 0.5 * twice.dot(normal);
}

// Intersection of the mesh with a plane. Closed loops are oriented
// counter-clockwise about the plane normal.
inline std::vector<Polyline3> slice_by_plane(const TriMesh& mesh, const Plane& plane,
                                             const ContourOptions& options = {}) {
  std::vector<double> d(mesh.vertex_count());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = plane.signed_distance(mesh.vertex(i));
  auto lines = zero_level_set(mesh, d, options);
  for (auto& l : lines) {
    if (l.closed && projected_area(l, plane.normal) < 0.0) {
      std::reverse(l.points.begin(), l.points.end());
    }
  }
  return lines;
}

inline double total_length(std::span<const Polyline3> lines) {
  double sum = 0.0;
  for (const auto& l : lines) sum += l.length();
  return sum;
}

} // namespace forma
