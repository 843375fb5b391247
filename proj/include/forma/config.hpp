#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "forma/design.hpp"
#include "forma/error.hpp"
#include "forma/formfind.hpp"
#include "forma/material.hpp"
#include "forma/obj_io.hpp"
#include "forma/shield.hpp"

namespace forma {

using json = nlohmann::json;

enum class Severity { error, warning };

inline const char* to_string(Severity s) { return s == Severity::error ? "error" : "warning"; }

struct Finding {
  std::string path;  // dotted field path, e.g. "formfind.pressure"
  std::string message;
  Severity severity = Severity::error;
};

struct PipelineConfig {
  int subdivision_level = 5;
  std::size_t max_vertices = 1'000'000;

  double pressure = 101325.0;
  double rest_length_factor = 1.0;
  Damping damping = Damping::kinetic;
  double viscous_coefficient = 0.0;
  std::size_t max_iterations = 200'000;
  std::optional<double> residual_tolerance;
  double time_step_safety = 0.5;
  bool write_trace = false;

  std::map<std::string, MaterialSpec> materials{{"kevlar", default_kevlar()},
                                                {"sintered_regolith", default_regolith()}};
  std::string membrane_material = "kevlar";
  std::string shield_material = "sintered_regolith";

  FloorModel floor;
  CrewConstraint crew;

  double radius_min = 4.0;
  double radius_max = 7.0;
  double radius_step = 0.1;
  SelectionRule selection_rule = SelectionRule::constrained_min_surface;

  ShieldSpec shield;  // thickness comes from sizing, density from the shield material
  SizingBounds thickness_bounds;
  PodSpec pod;
  DoseConfig dose;
  double deposition_rate = 1.0;  // m^3/h
  double gravity = kLunarGravity;

  std::string output_directory = "out";
  std::uint64_t seed = 0;  // reserved; the pipeline is deterministic
  unsigned jobs = 1;

  const MaterialSpec& membrane() const { return materials.at(membrane_material); }
  const MaterialSpec& shield_mat() const { return materials.at(shield_material); }

  FormFindConfig formfind() const {
    FormFindConfig c = FormFindConfig::for_material(membrane(), pressure);
    c.rest_length_factor = rest_length_factor;
    c.damping = damping;
    c.viscous_coefficient = viscous_coefficient;
    c.max_iterations = max_iterations;
    c.residual_tolerance = residual_tolerance;
    c.time_step_safety = time_step_safety;
    c.record_trace = write_trace;
    return c;
  }

  DesignSettings design() const {
    DesignSettings s;
    s.formfind = formfind();
    s.subdivision_level = subdivision_level;
    s.floor = floor;
    s.crew = crew;
    return s;
  }
};

struct ParsedConfig {
  PipelineConfig config;
  std::vector<Finding> findings;

  bool ok() const {
    for (const auto& f : findings) {
      if (f.severity == Severity::error) return false;
    }
    return true;
  }
};

namespace detail {

class ConfigReader {
public:
  using Check = std::function<std::optional<std::string>(double)>;

  explicit ConfigReader(std::vector<Finding>& findings) : findings_(findings) {}

  void error(const std::string& path, const std::string& msg) { findings_.push_back({path, msg, Severity::error}); }
  void warning(const std::string& path, const std::string& msg) {
    findings_.push_back({path, msg, Severity::warning});
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  // Flags unknown keys; returns false (with an error) when `j` is not an object.
  bool known_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) {
      error(path.empty() ? "<root>" : path, "expected an object");
      return false;
    }
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items()) {
      if (!allowed.count(k)) warning(join(path, k), "unknown key (ignored)");
    }
    return true;
  }

  const json* child(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  void number(const json& obj, const char* key, const std::string& path, double& out, const Check& check = {}) {
    const json* v = child(obj, key);
    if (!v) return;
    const auto p = join(path, key);
    if (!v->is_number()) {
      error(p, "expected a number");
      return;
    }
    const double x = v->get<double>();
    if (check) {
      if (auto msg = check(x)) {
        error(p, *msg);
        return;
      }
    }
    out = x;
  }

  template <typename Int>
  void integer(const json& obj, const char* key, const std::string& path, Int& out, long long lo, long long hi) {
    const json* v = child(obj, key);
    if (!v) return;
    const auto p = join(path, key);
    if (!v->is_number_integer()) {
      error(p, "expected an integer");
      return;
    }
    const auto x = v->get<long long>();
    if (x < lo || x > hi) {
      error(p, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return;
    }
    out = static_cast<Int>(x);
  }

  void boolean(const json& obj, const char* key, const std::string& path, bool& out) {
    const json* v = child(obj, key);
    if (!v) return;
    if (!v->is_boolean()) {
      error(join(path, key), "expected true or false");
      return;
    }
    out = v->get<bool>();
  }

  void string(const json& obj, const char* key, const std::string& path, std::string& out) {
    const json* v = child(obj, key);
    if (!v) return;
    if (!v->is_string()) {
      error(join(path, key), "expected a string");
      return;
    }
    out = v->get<std::string>();
  }

private:
  std::vector<Finding>& findings_;
};

inline ConfigReader::Check positive() {
  return [](double x) -> std::optional<std::string> {
    if (!(x > 0.0) || !std::isfinite(x)) return "must be > 0";
    return std::nullopt;
  };
}

inline ConfigReader::Check non_negative() {
  return [](double x) -> std::optional<std::string> {
    if (!(x >= 0.0) || !std::isfinite(x)) return "must be >= 0";
    return std::nullopt;
  };
}

inline ConfigReader::Check at_least(double lo) {
  return [lo](double x) -> std::optional<std::string> {
    if (!(x >= lo) || !std::isfinite(x)) return "must be >= " + format_double(lo);
    return std::nullopt;
  };
}

inline ConfigReader::Check in_half_open(double lo, double hi) {
  return [lo, hi](double x) -> std::optional<std::string> {
    if (!(x > lo && x <= hi)) return "must be in (" + format_double(lo) + ", " + format_double(hi) + "]";
    return std::nullopt;
  };
}

inline void read_material(ConfigReader& rd, const json& j, const std::string& path, MaterialSpec& m) {
  if (!rd.known_keys(j, path,
                     {"youngs_modulus", "poisson_ratio", "density", "thickness",
                      "tensile_strength", "allowable_stress"})) {
    return;
  }
  rd.number(j, "youngs_modulus", path, m.youngs_modulus, positive());
  rd.number(j, "poisson_ratio", path, m.poisson_ratio, [](double x) -> std::optional<std::string> {
    if (!(x >= 0.0 && x < 0.5)) return "must be in [0, 0.5)";
    return std::nullopt;
  });
  rd.number(j, "density", path, m.density, non_negative());
  rd.number(j, "thickness", path, m.thickness, positive());
  rd.number(j, "tensile_strength", path, m.tensile_strength, positive());
  rd.number(j, "allowable_stress", path, m.allowable_stress, positive());
}

} // namespace detail

// Reads a pipeline config. Missing keys keep their defaults; every problem is
// reported as a finding rather than thrown.
inline ParsedConfig parse_config(const json& root) {
  ParsedConfig parsed;
  auto& c = parsed.config;
  detail::ConfigReader rd(parsed.findings);
  using detail::positive;
  using detail::non_negative;

  if (!rd.known_keys(root, "",
                     {"mesh", "formfind", "materials", "membrane_material", "shield_material", "floor",
                      "crew", "sweep", "shield", "pod", "dose", "deposition_rate", "gravity",
                      "output_directory", "seed", "jobs"})) {
    return parsed;
  }

  if (const json* j = rd.child(root, "mesh"); j && rd.known_keys(*j, "mesh", {"subdivision_level", "max_vertices"})) {
    rd.integer(*j, "subdivision_level", "mesh", c.subdivision_level, 1, 20);
    rd.integer(*j, "max_vertices", "mesh", c.max_vertices, 1, 1'000'000'000);
  }

  if (const json* j = rd.child(root, "formfind");
      j && rd.known_keys(*j, "formfind",
                         {"pressure", "rest_length_factor", "damping", "viscous_coefficient",
                          "max_iterations", "residual_tolerance", "time_step_safety", "write_trace"})) {
    const std::string p = "formfind";
    rd.number(*j, "pressure", p, c.pressure, non_negative());
    rd.number(*j, "rest_length_factor", p, c.rest_length_factor, positive());
    std::string damping = c.damping == Damping::kinetic ? "kinetic" : "viscous";
    rd.string(*j, "damping", p, damping);
    if (damping == "kinetic") {
      c.damping = Damping::kinetic;
    } else if (damping == "viscous") {
      c.damping = Damping::viscous;
    } else {
      rd.error(p + ".damping", "must be \"kinetic\" or \"viscous\"");
    }
    rd.number(*j, "viscous_coefficient", p, c.viscous_coefficient, non_negative());
    rd.integer(*j, "max_iterations", p, c.max_iterations, 1, 1'000'000'000);
    if (const json* t = rd.child(*j, "residual_tolerance"); t && !t->is_null()) {
      double tol = 0.0;
      rd.number(*j, "residual_tolerance", p, tol, positive());
      if (tol > 0.0) c.residual_tolerance = tol;
    }
    rd.number(*j, "time_step_safety", p, c.time_step_safety, detail::in_half_open(0.0, 1.0));
    rd.boolean(*j, "write_trace", p, c.write_trace);
    if (c.damping == Damping::viscous && !(c.viscous_coefficient > 0.0)) {
      rd.error(p + ".viscous_coefficient", "viscous damping needs a positive coefficient");
    }
  }

  if (const json* j = rd.child(root, "materials")) {
    if (!j->is_object()) {
      rd.error("materials", "expected an object");
    } else {
      for (const auto& [name, spec] : j->items()) {
        MaterialSpec m = c.materials.count(name) ? c.materials.at(name) : MaterialSpec{name};
        detail::read_material(rd, spec, "materials." + name, m);
        c.materials[name] = m;
      }
    }
  }
  rd.string(root, "membrane_material", "", c.membrane_material);
  rd.string(root, "shield_material", "", c.shield_material);
  for (const auto& [key, name] : {std::pair{"membrane_material", c.membrane_material},
                                  std::pair{"shield_material", c.shield_material}}) {
    if (!c.materials.count(name)) {
      rd.error(key, "references undefined material '" + name + "'");
      continue;
    }
    try {
      c.materials.at(name).validate();
    } catch (const Error& e) {
      rd.error("materials." + name, e.what());
    }
  }

  if (const json* j = rd.child(root, "floor");
      j && rd.known_keys(*j, "floor",
                         {"mezzanine_height", "include_pod_floor", "pod_radius", "min_cross_section_radius"})) {
    rd.number(*j, "mezzanine_height", "floor", c.floor.mezzanine_height, non_negative());
    rd.boolean(*j, "include_pod_floor", "floor", c.floor.include_pod_floor);
    rd.number(*j, "pod_radius", "floor", c.floor.pod_radius, positive());
    rd.number(*j, "min_cross_section_radius", "floor", c.floor.min_cross_section_radius, non_negative());
  }

  if (const json* j = rd.child(root, "crew"); j && rd.known_keys(*j, "crew", {"crew_count", "area_per_crew"})) {
    rd.integer(*j, "crew_count", "crew", c.crew.crew_count, 0, 1'000'000);
    rd.number(*j, "area_per_crew", "crew", c.crew.area_per_crew, non_negative());
  }

  if (const json* j = rd.child(root, "sweep");
      j && rd.known_keys(*j, "sweep", {"radius_min", "radius_max", "step", "selection_rule"})) {
    rd.number(*j, "radius_min", "sweep", c.radius_min, positive());
    rd.number(*j, "radius_max", "sweep", c.radius_max, positive());
    rd.number(*j, "step", "sweep", c.radius_step, positive());
    std::string rule = to_string(c.selection_rule);
    rd.string(*j, "selection_rule", "sweep", rule);
    if (auto r = parse_selection_rule(rule)) {
      c.selection_rule = *r;
    } else {
      rd.error("sweep.selection_rule", "must be \"constrained_min_surface\" or \"knee\"");
    }
    if (c.radius_min > c.radius_max) {
      rd.error("sweep.radius_min", "radius_min (" + format_double(c.radius_min) +
                                         ") is greater than radius_max (" + format_double(c.radius_max) + ")");
    }
  }

  if (const json* j = rd.child(root, "shield");
      j && rd.known_keys(*j, "shield",
                         {"gap", "bulking_factor", "layer_height", "meridian_count", "thickness_min",
                          "thickness_max", "thickness_resolution"})) {
    rd.number(*j, "gap", "shield", c.shield.gap, non_negative());
    rd.number(*j, "bulking_factor", "shield", c.shield.bulking_factor, detail::at_least(1.0));
    rd.number(*j, "layer_height", "shield", c.shield.layer_height, positive());
    rd.integer(*j, "meridian_count", "shield", c.shield.meridian_count, 4, 100'000);
    rd.number(*j, "thickness_min", "shield", c.thickness_bounds.min, positive());
    rd.number(*j, "thickness_max", "shield", c.thickness_bounds.max, positive());
    rd.number(*j, "thickness_resolution", "shield", c.thickness_bounds.resolution, positive());
    if (c.thickness_bounds.min >= c.thickness_bounds.max) {
      rd.error("shield.thickness_min", "must be below shield.thickness_max");
    }
  }

  if (const json* j = rd.child(root, "pod");
      j && rd.known_keys(*j, "pod", {"diameter", "height", "core_diameter", "drill_duration"})) {
    rd.number(*j, "diameter", "pod", c.pod.diameter, positive());
    rd.number(*j, "height", "pod", c.pod.height, positive());
    rd.number(*j, "core_diameter", "pod", c.pod.core_diameter, positive());
    rd.number(*j, "drill_duration", "pod", c.pod.drill_duration, positive());
    if (!(c.pod.core_diameter < c.pod.diameter)) rd.error("pod.core_diameter", "must be smaller than pod.diameter");
  }

  if (const json* j = rd.child(root, "dose");
      j && rd.known_keys(*j, "dose", {"target_transmission", "halving_thickness"})) {
    rd.number(*j, "target_transmission", "dose", c.dose.target_transmission, detail::in_half_open(0.0, 1.0));
    rd.number(*j, "halving_thickness", "dose", c.dose.halving_thickness, positive());
  }

  rd.number(root, "deposition_rate", "", c.deposition_rate, positive());
  rd.number(root, "gravity", "", c.gravity, positive());
  rd.string(root, "output_directory", "", c.output_directory);
  rd.integer(root, "seed", "", c.seed, 0, std::numeric_limits<long long>::max());
  rd.integer(root, "jobs", "", c.jobs, 1, 1024);

  if (!c.output_directory.empty()) {
    std::error_code ec;
    const std::filesystem::path out(c.output_directory);
    if (std::filesystem::exists(out, ec) && !std::filesystem::is_directory(out, ec)) {
      rd.error("output_directory", "exists and is not a directory");
    }
  } else {
    rd.error("output_directory", "must not be empty");
  }

  if (c.materials.count(c.shield_material)) c.shield.density = c.shield_mat().density;
  return parsed;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse config file " + path.string() + ": " + e.what());
  }
}

inline ParsedConfig load_config(const std::filesystem::path& path) { return parse_config(read_json_file(path)); }

// Empty for a valid config; errors and warnings otherwise, in field order.
inline std::vector<Finding> validate_config(const std::filesystem::path& path) {
  return load_config(path).findings;
}

} // namespace forma
