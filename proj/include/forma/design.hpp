#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "forma/contour.hpp"
#include "forma/formfind.hpp"
#include "forma/mesh.hpp"

namespace forma {

// How usable floor area is counted on a cap: the base disc, one mezzanine
// slab at a fixed height, and optionally the buried pod's floor.
//
// Defaults are a calibration: with a 3.15 m mezzanine and the 6 m pod floor
// a 5.2 m hemisphere totals ~167 m^2.
struct FloorModel {
  double mezzanine_height = 3.15;       // m
  bool include_pod_floor = true;
  double pod_radius = 3.0;              // m
  double min_cross_section_radius = 1.0;  // m; smaller mezzanine slices count as 0

  void validate() const {
    if (!(mezzanine_height >= 0.0)) throw PreconditionError("mezzanine height must be >= 0");
    if (!(pod_radius > 0.0)) throw PreconditionError("pod radius must be > 0");
    if (!(min_cross_section_radius >= 0.0)) throw PreconditionError("min cross-section radius must be >= 0");
  }
};

struct CrewConstraint {
  int crew_count = 6;
  double area_per_crew = 26.5;  // m^2, calibrated so 6 crew need 159 m^2

  double required_area() const { return crew_count * area_per_crew; }
};

struct DesignPoint {
  double radius = 0.0;
  double volume = 0.0;
  double shell_surface = 0.0;
  double floor_area_total = 0.0;
  bool feasible = false;
  bool evaluated = false;      // false when form finding failed
  std::string mesh_ref;        // where the relaxed mesh is persisted, if it is
  std::string note;            // failure reason for unevaluated points
  std::shared_ptr<const FormFoundResult> formfound;
};

inline double base_slice_epsilon() { return 1e-6; }

// Area enclosed by the closed loops of a horizontal slice.
inline double slice_area(const TriMesh& mesh, double z) {
  double area = 0.0;
  for (const auto& loop : slice_by_plane(mesh, Plane::horizontal(z))) {
    if (loop.closed) area += std::abs(projected_area(loop, Vec3::UnitZ()));
  }
  return area;
}

inline double floor_area_total(const TriMesh& mesh, const FloorModel& model) {
  model.validate();
  const double base = slice_area(mesh, base_slice_epsilon());
  double mezzanine = slice_area(mesh, model.mezzanine_height);
  const double min_area = std::numbers::pi * model.min_cross_section_radius * model.min_cross_section_radius;
  if (mezzanine < min_area) mezzanine = 0.0;
  const double pod = model.include_pod_floor ? std::numbers::pi * model.pod_radius * model.pod_radius : 0.0;
  return base + mezzanine + pod;
}

struct DesignSettings {
  FormFindConfig formfind;
  int subdivision_level = 5;
  FloorModel floor;
  CrewConstraint crew;
};

// Generate -> form-find -> measure. Form-finding failures give an
// unevaluated, infeasible point instead of an exception.
inline DesignPoint evaluate_design(double radius, const DesignSettings& settings) {
  if (!(radius > 0.0)) throw PreconditionError("design radius must be > 0");
  DesignPoint p;
  p.radius = radius;
  try {
    const TriMesh cap = generate_cap_mesh(radius, settings.subdivision_level);
    auto ff = std::make_shared<FormFoundResult>(form_find(cap, settings.formfind));
    const TriMesh& m = ff->mesh;
    p.volume = enclosed_volume(m, Plane::horizontal(0.0));
    p.shell_surface = surface_area(m);
    p.floor_area_total = floor_area_total(m, settings.floor);
    p.feasible = p.floor_area_total >= settings.crew.required_area();
    p.evaluated = true;
    p.formfound = std::move(ff);
  } catch (const Error& e) {
    p.feasible = false;
    p.evaluated = false;
    p.note = e.what();
  }
  return p;
}

enum class SelectionRule { constrained_min_surface, knee };

inline std::string to_string(SelectionRule r) {
  return r == SelectionRule::knee ? "knee" : "constrained_min_surface";
}

inline std::optional<SelectionRule> parse_selection_rule(const std::string& s) {
  if (s == "constrained_min_surface") return SelectionRule::constrained_min_surface;
  if (s == "knee") return SelectionRule::knee;
  return std::nullopt;
}

struct ParetoFront {
  std::vector<DesignPoint> points;   // non-dominated, ordered by radius
  std::vector<std::size_t> members;  // indices into the input list
  std::optional<std::size_t> knee_index;
  std::string selection_rule;
};

// a dominates b: volume >=, surface <=, floor area >=, one of them strictly.
inline bool dominates(const DesignPoint& a, const DesignPoint& b) {
  const bool no_worse = a.volume >= b.volume && a.shell_surface <= b.shell_surface &&
                        a.floor_area_total >= b.floor_area_total;
  const bool better = a.volume > b.volume || a.shell_surface < b.shell_surface ||
                      a.floor_area_total > b.floor_area_total;
  return no_worse && better;
}

namespace detail {

// Distance of each front point from the chord joining the first and last
// point, in objectives min-max normalised over the front.
inline std::vector<double> chord_distances(const std::vector<DesignPoint>& pts) {
  std::vector<double> dist(pts.size(), 0.0);
  if (pts.size() < 3) return dist;
  std::array<double, 3> lo{}, hi{};
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  auto obj = [](const DesignPoint& p) { return std::array<double, 3>{p.volume, p.shell_surface, p.floor_area_total}; };
  for (const auto& p : pts) {
    const auto o = obj(p);
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], o[k]);
      hi[k] = std::max(hi[k], o[k]);
    }
  }
  auto norm = [&](const DesignPoint& p) {
    const auto o = obj(p);
    Vec3 v;
    for (int k = 0; k < 3; ++k) v(k) = hi[k] > lo[k] ? (o[k] - lo[k]) / (hi[k] - lo[k]) : 0.0;
    return v;
  };
  const Vec3 a = norm(pts.front());
  const Vec3 b = norm(pts.back());
  const Vec3 chord = b - a;
  const double len = chord.norm();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 d = norm(pts[i]) - a;
    dist[i] = len > 0.0 ? d.cross(chord).norm() / len : d.norm();
  }
  return dist;
}

} // namespace detail

// Non-dominated subset of the evaluated points, stable-sorted by radius.
inline ParetoFront pareto_front(const std::vector<DesignPoint>& points) {
  if (points.empty()) throw PreconditionError("Pareto front needs at least one point");
  ParetoFront front;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].evaluated) continue;
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      dominated = j != i && points[j].evaluated && dominates(points[j], points[i]);
    }
    if (!dominated) front.members.push_back(i);
  }
  std::stable_sort(front.members.begin(), front.members.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].radius < points[b].radius; });
  for (auto i : front.members) front.points.push_back(points[i]);

  const auto dist = detail::chord_distances(front.points);
  if (!dist.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < dist.size(); ++i) {
      if (dist[i] > dist[best]) best = i;
    }
    front.knee_index = best;
  }
  return front;
}

// Picks the design from a front. Both rules consider feasible members only;
// ties go to the smaller radius.
inline DesignPoint select_design(ParetoFront& front, SelectionRule rule) {
  if (front.points.empty()) throw SelectionError("cannot select from an empty Pareto front");
  front.selection_rule = to_string(rule);
  std::optional<std::size_t> best;
  if (rule == SelectionRule::constrained_min_surface) {
    for (std::size_t i = 0; i < front.points.size(); ++i) {
      const auto& p = front.points[i];
      if (!p.feasible) continue;
      if (!best || p.shell_surface < front.points[*best].shell_surface ||
          (p.shell_surface == front.points[*best].shell_surface && p.radius < front.points[*best].radius)) {
        best = i;
      }
    }
  } else {
    const auto dist = detail::chord_distances(front.points);
    for (std::size_t i = 0; i < front.points.size(); ++i) {
      const auto& p = front.points[i];
      if (!p.feasible) continue;
      if (!best || dist[i] > dist[*best] ||
          (dist[i] == dist[*best] && p.radius < front.points[*best].radius)) {
        best = i;
      }
    }
  }
  if (!best) {
    const DesignPoint* nearest = nullptr;
    for (const auto& p : front.points) {
      if (!nearest || p.floor_area_total > nearest->floor_area_total) nearest = &p;
    }
    std::ostringstream msg;
    msg << "no feasible design on the Pareto front; nearest candidate: radius " << nearest->radius
        << " m with floor area " << nearest->floor_area_total << " m^2";
    throw SelectionError(msg.str());
  }
  return front.points[*best];
}

struct SweepResult {
  std::vector<DesignPoint> points;  // ascending radius
  ParetoFront front;
  DesignPoint selected;
};

inline std::vector<double> sweep_radii(double radius_min, double radius_max, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw PreconditionError("sweep step must be > 0");
  if (!(radius_min > 0.0) || !(radius_max >= radius_min)) {
    throw PreconditionError("sweep bounds must satisfy 0 < radius_min <= radius_max");
  }
  const auto count = static_cast<std::size_t>(std::floor((radius_max - radius_min) / step + 1e-9)) + 1;
  std::vector<double> radii;
  radii.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    // Rounded to the nanometre so 4.0 + 12 * 0.1 prints as 5.2.
    radii.push_back(std::round((radius_min + static_cast<double>(i) * step) * 1e9) / 1e9);
  }
  return radii;
}

// Evaluates every radius (up to `jobs` at a time), builds the front and
// selects. Results do not depend on `jobs` or on completion order.
inline SweepResult sweep(double radius_min, double radius_max, double step, const DesignSettings& settings,
                         SelectionRule rule = SelectionRule::constrained_min_surface, unsigned jobs = 1) {
  const auto radii = sweep_radii(radius_min, radius_max, step);
  SweepResult out;
  out.points.resize(radii.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < radii.size(); i = next++) {
      out.points[i] = evaluate_design(radii[i], settings);
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(radii.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (std::none_of(out.points.begin(), out.points.end(), [](const DesignPoint& p) { return p.evaluated; })) {
    throw Error("every design point failed: " + out.points.front().note);
  }
  out.front = pareto_front(out.points);
  out.selected = select_design(out.front, rule);
  return out;
}

} // namespace forma
