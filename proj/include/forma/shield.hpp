#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "forma/contour.hpp"
#include "forma/fea.hpp"
#include "forma/material.hpp"
#include "forma/mesh.hpp"
#include "forma/offset.hpp"

namespace forma {

struct ShieldSpec {
  double gap = 0.15;            // m, membrane to shield inner face
  double thickness = 0.5;       // m
  double density = 1500.0;      // kg/m^3
  double bulking_factor = 1.3;  // loose excavated volume per in-situ volume
  double layer_height = 0.05;   // m
  int meridian_count = 24;

  void validate() const {
    if (!(gap >= 0.0)) throw PreconditionError("shield gap must be >= 0");
    if (!(thickness > 0.0)) throw PreconditionError("shield thickness must be > 0");
    if (!(density >= 0.0)) throw PreconditionError("shield density must be >= 0");
    if (!(bulking_factor >= 1.0)) throw PreconditionError("bulking factor must be >= 1");
    if (!(layer_height > 0.0)) throw PreconditionError("layer height must be > 0");
    if (meridian_count < 4) throw PreconditionError("meridian count must be >= 4");
  }
};

struct PodSpec {
  double diameter = 6.0;        // m
  double height = 4.0;          // m
  double core_diameter = 1.5;   // m, rotational shaft
  double drill_duration = 20.0; // h

  void validate() const {
    if (!(diameter > 0.0 && height > 0.0 && core_diameter > 0.0 && drill_duration > 0.0)) {
      throw PreconditionError("pod dimensions and drill duration must be positive");
    }
    if (!(core_diameter < diameter)) throw PreconditionError("pod core must be narrower than the pod");
  }
};

// Single exponential attenuation model. Placeholder values.
struct DoseConfig {
  double target_transmission = 0.5;
  double halving_thickness = 0.5;  // m
};

struct ShieldSurfaces {
  TriMesh inner;
  TriMesh mid;
  TriMesh outer;
  double min_clearance = 0.0;  // smallest inner-vertex distance to the membrane
};

// Distance from p to triangle abc (closest-point by region classification).
inline double point_triangle_distance(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return ap.norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return bp.norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + (d1 / (d1 - d3)) * ab)).norm();
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return cp.norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + (d2 / (d2 - d6)) * ac)).norm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return (p - (b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  return (p - (a + ab * (vb * denom) + ac * (vc * denom))).norm();
}

// Smallest distance from any vertex of `probe` to the surface of `target`.
inline double min_vertex_distance(const TriMesh& probe, const TriMesh& target) {
  struct Bound {
    Point3 center;
    double radius;
  };
  std::vector<Bound> bounds;
  bounds.reserve(target.triangle_count());
  for (const auto& t : target.triangles()) {
    const Point3 c = (target.vertex(t[0]) + target.vertex(t[1]) + target.vertex(t[2])) / 3.0;
    double r = 0.0;
    for (auto v : t) r = std::max(r, (target.vertex(v) - c).norm());
    bounds.push_back({c, r});
  }
  double best_all = std::numeric_limits<double>::infinity();
  for (const auto& p : probe.vertices()) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      if ((p - bounds[i].center).norm() - bounds[i].radius >= best) continue;
      const auto& t = target.triangles()[i];
      best = std::min(best, point_triangle_distance(p, target.vertex(t[0]), target.vertex(t[1]), target.vertex(t[2])));
    }
    best_all = std::min(best_all, best);
  }
  return best_all;
}

// Inner, mid and outer shield surfaces as normal offsets of the membrane;
// the base ring stays on z = 0.
inline ShieldSurfaces generate_shield(const TriMesh& membrane, const ShieldSpec& spec) {
  spec.validate();
  OffsetOptions opt;
  opt.base_plane = Plane::horizontal(0.0);
  ShieldSurfaces s{offset_mesh(membrane, spec.gap, opt),
                   offset_mesh(membrane, spec.gap + 0.5 * spec.thickness, opt),
                   offset_mesh(membrane, spec.gap + spec.thickness, opt)};
  s.min_clearance = min_vertex_distance(s.inner, membrane);
  if (s.min_clearance < 0.95 * spec.gap) {
    std::ostringstream msg;
    msg << "shield inner face comes within " << s.min_clearance << " m of the membrane (gap " << spec.gap << " m)";
    throw GeometryError(msg.str());
  }
  return s;
}

inline double attenuation_min_thickness(double target_transmission, double halving_thickness) {
  if (!(target_transmission > 0.0 && target_transmission <= 1.0)) {
    throw PreconditionError("target transmission must be in (0, 1]");
  }
  if (!(halving_thickness > 0.0)) throw PreconditionError("halving thickness must be > 0");
  return halving_thickness * std::log2(1.0 / target_transmission);
}

struct SizingBounds {
  double min = 0.05;        // m
  double max = 3.0;         // m
  double resolution = 0.01; // m
};

struct ThicknessSizing {
  double thickness = 0.0;
  double structural_thickness = 0.0;
  double radiation_thickness = 0.0;
  std::string governing;                  // "structural" or "radiation"
  double structural_max_von_mises = 0.0;  // Pa, at structural_thickness
  int fea_solves = 0;
};

// Self-weight membrane analysis of the shield mid-surface for thickness t.
inline AnalysisResult shield_self_weight(const TriMesh& membrane, const ShieldSpec& spec,
                                         const MaterialSpec& material, double t, double gravity,
                                         const SolverOptions& solver = {}) {
  OffsetOptions opt;
  opt.base_plane = Plane::horizontal(0.0);
  const TriMesh mid = offset_mesh(membrane, spec.gap + 0.5 * t, opt);
  const std::vector<LoadCase> loads{GravitySelfWeight{gravity, -Vec3::UnitZ()}};
  const auto fixed = anchored_vertices(mid);
  return assemble_and_solve(mid, material.with_thickness(t), loads, fixed, solver);
}

// t* = max(structural, radiation). Structural: smallest t in bounds whose
// self-weight peak von Mises stays within the allowable, by bisection.
inline ThicknessSizing size_thickness(const TriMesh& membrane, const ShieldSpec& spec,
                                      const MaterialSpec& material, const DoseConfig& dose,
                                      double gravity = kLunarGravity, const SizingBounds& bounds = {}) {
  spec.validate();
  material.validate();
  ThicknessSizing out;
  out.radiation_thickness = attenuation_min_thickness(dose.target_transmission, dose.halving_thickness);

  auto stress_at = [&](double t) {
    ++out.fea_solves;
    return shield_self_weight(membrane, spec, material, t, gravity).max_von_mises;
  };
  const double allow = material.allowable_stress;
  double lo = bounds.min;
  double hi = bounds.max;
  const double s_lo = stress_at(lo);
  if (s_lo <= allow) {
    out.structural_thickness = lo;
    out.structural_max_von_mises = s_lo;
  } else {
    const double s_hi = stress_at(hi);
    if (s_hi > allow) {
      std::ostringstream msg;
      msg << "no shield thickness in [" << bounds.min << ", " << bounds.max
          << "] m keeps self-weight stress within " << allow << " Pa: peak von Mises "
          << s_lo << " Pa at " << bounds.min << " m, " << s_hi << " Pa at " << bounds.max << " m";
      throw SizingError(msg.str());
    }
    double s_best = s_hi;
    while (hi - lo > bounds.resolution) {
      const double midt = 0.5 * (lo + hi);
      const double s = stress_at(midt);
      if (s <= allow) {
        hi = midt;
        s_best = s;
      } else {
        lo = midt;
      }
    }
    out.structural_thickness = hi;
    out.structural_max_von_mises = s_best;
  }
  if (out.radiation_thickness > bounds.max) {
    std::ostringstream msg;
    msg << "radiation shielding needs " << out.radiation_thickness << " m, above the " << bounds.max
        << " m thickness bound";
    throw SizingError(msg.str());
  }
  if (out.radiation_thickness > out.structural_thickness) {
    out.thickness = out.radiation_thickness;
    out.governing = "radiation";
  } else {
    out.thickness = out.structural_thickness;
    out.governing = "structural";
  }
  return out;
}

struct ToolpathLayer {
  int index = 0;   // k, with z = k * layer_height
  double z = 0.0;
  std::vector<Polyline3> contours;
  double path_length = 0.0;
};

struct Toolpaths {
  std::vector<ToolpathLayer> horizontal;  // bottom-up
  std::vector<Polyline3> vertical;        // base-to-apex meridians
};

namespace detail {

// Part of an open polyline on the side dir.(x, y) >= 0 of a vertical plane.
inline Polyline3 clip_to_half_plane(const Polyline3& line, const Vec3& dir) {
  Polyline3 out;
  const auto& p = line.points;
  auto side = [&](const Point3& q) { return dir.dot(q); };
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double si = side(p[i]);
    if (si >= 0.0) out.points.push_back(p[i]);
    if (i + 1 < p.size()) {
      const double sj = side(p[i + 1]);
      if ((si >= 0.0) != (sj >= 0.0)) {
        const double t = si / (si - sj);
        out.points.push_back(p[i] + t * (p[i + 1] - p[i]));
      }
    }
  }
  return out;
}

} // namespace detail

// Horizontal print layers at z = k * layer_height (empty layers dropped)
// and meridian guide curves on equally spaced half-planes through the z axis.
inline Toolpaths toolpaths(const TriMesh& mid, const ShieldSpec& spec, const ContourOptions& options = {}) {
  spec.validate();
  Toolpaths out;
  double apex = -std::numeric_limits<double>::infinity();
  for (const auto& p : mid.vertices()) apex = std::max(apex, p.z());

  for (int k = 0; static_cast<double>(k) * spec.layer_height <= apex; ++k) {
    const double z = static_cast<double>(k) * spec.layer_height;
    auto loops = slice_by_plane(mid, Plane::horizontal(z), options);
    if (loops.empty()) continue;
    ToolpathLayer layer{k, z, std::move(loops), 0.0};
    for (const auto& c : layer.contours) {
      if (!c.closed) {
        throw GeometryError("open contour in print layer " + std::to_string(k) + " at z = " + std::to_string(z));
      }
      layer.path_length += c.length();
    }
    out.horizontal.push_back(std::move(layer));
  }

  for (int j = 0; j < spec.meridian_count; ++j) {
    const double az = 2.0 * std::numbers::pi * j / spec.meridian_count;
    const Vec3 dir(std::cos(az), std::sin(az), 0.0);
    const Vec3 normal(-std::sin(az), std::cos(az), 0.0);
    Polyline3 meridian;
    for (const auto& arch : slice_by_plane(mid, Plane{Point3::Zero(), normal}, options)) {
      auto half = detail::clip_to_half_plane(arch, dir);
      if (half.points.size() > meridian.points.size()) meridian = std::move(half);
    }
    if (meridian.points.size() >= 2) {
      if (meridian.points.front().z() > meridian.points.back().z()) {
        std::reverse(meridian.points.begin(), meridian.points.end());
      }
      out.vertical.push_back(std::move(meridian));
    }
  }
  return out;
}

struct RegolithBudget {
  double excavated_volume = 0.0;       // m^3 in situ
  double available_loose_volume = 0.0; // m^3
  double shield_volume = 0.0;          // m^3
  double shield_mass = 0.0;            // kg
  double margin_volume = 0.0;          // m^3, available - shield
  double print_duration = 0.0;         // h
  double drill_rate = 0.0;             // m^3/h
  double drill_duration = 0.0;         // h
};

// Shield volume is the thin-shell estimate mid-surface area * thickness.
inline RegolithBudget regolith_budget(const PodSpec& pod, double mid_surface_area, const ShieldSpec& spec,
                                      double deposition_rate) {
  pod.validate();
  spec.validate();
  if (!(deposition_rate > 0.0)) throw PreconditionError("deposition rate must be > 0");
  RegolithBudget b;
  const double r = 0.5 * pod.diameter;
  b.excavated_volume = std::numbers::pi * r * r * pod.height;
  b.available_loose_volume = b.excavated_volume * spec.bulking_factor;
  b.shield_volume = mid_surface_area * spec.thickness;
  b.shield_mass = b.shield_volume * spec.density;
  b.margin_volume = b.available_loose_volume - b.shield_volume;
  b.print_duration = b.shield_volume / deposition_rate;
  b.drill_duration = pod.drill_duration;
  b.drill_rate = b.excavated_volume / pod.drill_duration;
  return b;
}

} // namespace forma
