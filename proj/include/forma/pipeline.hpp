#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "json.hpp"

#include "forma/config.hpp"
#include "forma/csv.hpp"
#include "forma/design.hpp"
#include "forma/fea.hpp"
#include "forma/formfind.hpp"
#include "forma/obj_io.hpp"
#include "forma/shield.hpp"
#include "forma/sphere_fit.hpp"

namespace forma {

inline std::string sha256_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string() + " for hashing");
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed for " + path.string());
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

enum class ExitCode : int { success = 0, validation = 2, stage_failure = 3 };

struct PipelineOutcome {
  ExitCode exit_code = ExitCode::success;
  std::string failed_stage;
  std::string error;
  json report;
};

namespace detail {

inline json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json fea_summary(const AnalysisResult& r) {
  return {{"max_displacement_m", r.max_displacement},
          {"max_von_mises_pa", r.max_von_mises},
          {"reaction_sum_n", vec_json(r.reaction_sum)},
          {"applied_load_n", vec_json(r.applied_load_sum)},
          {"solver_iterations", r.solver_iterations},
          {"solver_relative_residual", r.solver_residual}};
}

inline json design_json(const DesignPoint& p) {
  return {{"radius_m", p.radius},
          {"volume_m3", p.volume},
          {"shell_surface_m2", p.shell_surface},
          {"floor_area_m2", p.floor_area_total},
          {"feasible", p.feasible},
          {"mesh_ref", p.mesh_ref}};
}

inline std::string radius_tag(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", r);
  return buf;
}

// Runs named stages in order, timing each; the first failure stops the run
// and is recorded, leaving earlier artifacts in place.
class StageRunner {
public:
  StageRunner(std::filesystem::path out_dir, json& timings) : out_(std::move(out_dir)), timings_(timings) {}

  bool run(const std::string& name, const std::function<void()>& body) {
    if (failed_) return false;
    spdlog::info("stage {}: start", name);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const std::exception& e) {
      failed_ = true;
      failed_stage_ = name;
      error_ = e.what();
      spdlog::error("stage {} failed: {}", name, error_);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    timings_[name + "_s"] = secs;
    if (!failed_) spdlog::info("stage {}: done in {:.3f} s", name, secs);
    return !failed_;
  }

  std::filesystem::path file(const std::string& rel) {
    files_.push_back(rel);
    return out_ / rel;
  }

  const std::filesystem::path& out_dir() const { return out_; }
  bool failed() const { return failed_; }
  const std::string& failed_stage() const { return failed_stage_; }
  const std::string& error() const { return error_; }

  json manifest() const {
    std::vector<std::string> sorted = files_;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    json m = json::array();
    for (const auto& rel : sorted) {
      const auto path = out_ / rel;
      if (!std::filesystem::exists(path)) continue;
      m.push_back({{"file", rel},
                   {"bytes", std::filesystem::file_size(path)},
                   {"sha256", sha256_hex(path)}});
    }
    return m;
  }

private:
  std::filesystem::path out_;
  json& timings_;
  std::vector<std::string> files_;
  bool failed_ = false;
  std::string failed_stage_;
  std::string error_;
};

// Sizing, shield surfaces, shield FEA, toolpaths and budget on a membrane.
inline void run_shield_stages(StageRunner& stages, const PipelineConfig& cfg, const TriMesh& membrane,
                              json& results) {
  ThicknessSizing sizing;
  ShieldSpec spec = cfg.shield;
  std::optional<ShieldSurfaces> surfaces;

  stages.run("shield_sizing", [&] {
    sizing = size_thickness(membrane, spec, cfg.shield_mat(), cfg.dose, cfg.gravity, cfg.thickness_bounds);
    spec.thickness = sizing.thickness;
    results["shield"] = {{"thickness_m", sizing.thickness},
                         {"structural_thickness_m", sizing.structural_thickness},
                         {"radiation_thickness_m", sizing.radiation_thickness},
                         {"governing", sizing.governing},
                         {"structural_max_von_mises_pa", sizing.structural_max_von_mises},
                         {"allowable_stress_pa", cfg.shield_mat().allowable_stress},
                         {"gap_m", spec.gap},
                         {"sizing_fea_solves", sizing.fea_solves}};
  });

  stages.run("shield_geometry", [&] {
    surfaces = generate_shield(membrane, spec);
    write_obj(surfaces->inner, stages.file("shield_inner.obj"));
    write_obj(surfaces->mid, stages.file("shield_mid.obj"));
    write_obj(surfaces->outer, stages.file("shield_outer.obj"));
    auto& s = results["shield"];
    s["min_clearance_m"] = surfaces->min_clearance;
    s["inner_fitted_radius_m"] = fit_sphere_free_vertices(surfaces->inner).radius;
    s["mid_fitted_radius_m"] = fit_sphere_free_vertices(surfaces->mid).radius;
    s["outer_fitted_radius_m"] = fit_sphere_free_vertices(surfaces->outer).radius;
  });

  stages.run("fea_shield", [&] {
    const MaterialSpec mat = cfg.shield_mat().with_thickness(spec.thickness);
    const std::vector<LoadCase> loads{GravitySelfWeight{cfg.gravity, -Vec3::UnitZ()}};
    const auto r = assemble_and_solve(surfaces->mid, mat, loads, anchored_vertices(surfaces->mid));
    write_file(stages.file("fea_shield.csv"), [&](std::ostream& o) { write_fea_csv(o, surfaces->mid, r); });
    results["shield"]["fea"] = fea_summary(r);
    results["shield"]["utilization"] = r.max_von_mises / mat.allowable_stress;
  });

  stages.run("toolpaths", [&] {
    const auto paths = toolpaths(surfaces->mid, spec);
    write_file(stages.file("toolpaths.csv"), [&](std::ostream& o) { write_toolpath_csv(o, paths.horizontal); });
    write_file(stages.file("meridians.csv"), [&](std::ostream& o) { write_meridian_csv(o, paths.vertical); });
    double length = 0.0;
    std::size_t contours = 0;
    for (const auto& l : paths.horizontal) {
      length += l.path_length;
      contours += l.contours.size();
    }
    results["toolpaths"] = {{"layer_count", paths.horizontal.size()},
                            {"contour_count", contours},
                            {"meridian_count", paths.vertical.size()},
                            {"layer_height_m", spec.layer_height},
                            {"horizontal_path_length_m", length},
                            {"top_layer_z_m", paths.horizontal.empty() ? 0.0 : paths.horizontal.back().z}};
  });

  stages.run("budget", [&] {
    const auto b = regolith_budget(cfg.pod, surface_area(surfaces->mid), spec, cfg.deposition_rate);
    results["budget"] = {{"excavated_volume_m3", b.excavated_volume},
                         {"available_loose_volume_m3", b.available_loose_volume},
                         {"shield_volume_m3", b.shield_volume},
                         {"shield_mass_kg", b.shield_mass},
                         {"margin_volume_m3", b.margin_volume},
                         {"print_duration_h", b.print_duration},
                         {"deposition_rate_m3_per_h", cfg.deposition_rate},
                         {"bulking_factor", spec.bulking_factor}};
    results["deployment"] = {{"pod_diameter_m", cfg.pod.diameter},
                             {"pod_height_m", cfg.pod.height},
                             {"core_diameter_m", cfg.pod.core_diameter},
                             {"drill_duration_h", b.drill_duration},
                             {"excavation_rate_m3_per_h", b.drill_rate},
                             {"excavated_volume_m3", b.excavated_volume}};
  });
}

inline void run_sweep_stage(StageRunner& stages, const PipelineConfig& cfg, unsigned jobs, json& results,
                            std::optional<SweepResult>& out) {
  stages.run("sweep", [&] {
    auto sw = sweep(cfg.radius_min, cfg.radius_max, cfg.radius_step, cfg.design(), cfg.selection_rule, jobs);
    std::filesystem::create_directories(stages.out_dir() / "meshes");
    for (auto& p : sw.points) {
      if (!p.formfound) continue;
      p.mesh_ref = "meshes/membrane_r" + radius_tag(p.radius) + ".obj";
      write_obj(p.formfound->mesh, stages.file(p.mesh_ref));
      if (p.radius == sw.selected.radius) sw.selected.mesh_ref = p.mesh_ref;
    }
    write_file(stages.file("pareto.csv"), [&](std::ostream& o) { write_pareto_csv(o, sw); });

    json failed = json::array();
    for (const auto& p : sw.points) {
      if (!p.evaluated) failed.push_back({{"radius_m", p.radius}, {"error", p.note}});
    }
    results["sweep"] = {{"radius_min_m", cfg.radius_min},
                        {"radius_max_m", cfg.radius_max},
                        {"step_m", cfg.radius_step},
                        {"subdivision_level", cfg.subdivision_level},
                        {"point_count", sw.points.size()},
                        {"front_size", sw.front.points.size()},
                        {"selection_rule", sw.front.selection_rule},
                        {"required_floor_area_m2", cfg.crew.required_area()},
                        {"knee_radius_m", sw.front.knee_index ? json(sw.front.points[*sw.front.knee_index].radius)
                                                              : json(nullptr)},
                        {"failed_points", failed}};
    results["selected"] = design_json(sw.selected);
    out = std::move(sw);
  });
}

inline PipelineOutcome finish(StageRunner& stages, json results, json timings, const std::filesystem::path& out_dir) {
  PipelineOutcome outcome;
  results["manifest"] = stages.manifest();
  json report;
  report["status"] = stages.failed() ? "failed" : "ok";
  report["failed_stage"] = stages.failed() ? json(stages.failed_stage()) : json(nullptr);
  report["error"] = stages.failed() ? json(stages.error()) : json(nullptr);
  report["results"] = std::move(results);
  report["timings"] = std::move(timings);
  write_file(out_dir / "report.json", [&](std::ostream& o) { o << report.dump(2) << '\n'; });
  outcome.exit_code = stages.failed() ? ExitCode::stage_failure : ExitCode::success;
  outcome.failed_stage = stages.failed_stage();
  outcome.error = stages.error();
  outcome.report = std::move(report);
  return outcome;
}

} // namespace detail

// Full chain: sweep -> form-found membrane -> membrane FEA -> shield sizing
// and geometry -> shield FEA -> toolpaths -> budget. Everything lands in
// `out_dir` together with report.json.
inline PipelineOutcome run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                                    unsigned jobs = 1) {
  std::filesystem::create_directories(out_dir);
  json results = json::object();
  json timings = json::object();
  detail::StageRunner stages(out_dir, timings);
  const auto t0 = std::chrono::steady_clock::now();

  std::optional<SweepResult> sw;
  detail::run_sweep_stage(stages, cfg, jobs, results, sw);

  std::shared_ptr<const FormFoundResult> ff;
  stages.run("membrane", [&] {
    ff = sw->selected.formfound;
    if (!ff) throw Error("selected design has no form-found mesh");
    write_obj(ff->mesh, stages.file("membrane.obj"));
    if (cfg.write_trace) {
      write_file(stages.file("formfind_trace.csv"),
                 [&](std::ostream& o) { write_relaxation_trace_csv(o, ff->trace); });
    }
    const auto check = membrane_tension_check(*ff, cfg.membrane());
    results["formfinding"] = {{"iterations", ff->iterations},
                              {"final_residual_n", ff->final_residual},
                              {"residual_tolerance_n", ff->residual_tolerance},
                              {"fitted_radius_m", ff->fitted_sphere.radius},
                              {"fitted_center_m", detail::vec_json(ff->fitted_sphere.center)},
                              {"fitted_rms_m", ff->fitted_sphere.rms},
                              {"max_edge_tension_n", ff->max_edge_tension},
                              {"pressure_pa", ff->pressure}};
    results["membrane"] = {{"material", cfg.membrane_material},
                           {"thin_wall_stress_pa", check.max_stress},
                           {"allowable_stress_pa", check.allowable},
                           {"utilization", check.utilization},
                           {"over_limit", check.over_limit}};
  });

  stages.run("fea_membrane", [&] {
    const std::vector<LoadCase> loads{InternalPressure{cfg.pressure}};
    const auto r = assemble_and_solve(ff->mesh, cfg.membrane(), loads, anchored_vertices(ff->mesh));
    write_file(stages.file("fea_membrane.csv"), [&](std::ostream& o) { write_fea_csv(o, ff->mesh, r); });

    // Displacement-magnitude isocurves at eight evenly spaced interior levels.
    std::vector<double> magnitude;
    magnitude.reserve(r.displacements.size());
    for (const auto& u : r.displacements) magnitude.push_back(u.norm());
    std::vector<double> levels;
    for (int i = 1; i <= 8; ++i) levels.push_back(r.max_displacement * i / 9.0);
    const auto iso = extract_isocontours(ff->mesh, magnitude, levels);
    write_file(stages.file("fea_membrane_isocurves.csv"),
               [&](std::ostream& o) { write_polyline_csv(o, iso, "displacement_m"); });
    results["membrane"]["fea"] = detail::fea_summary(r);
  });

  if (ff) detail::run_shield_stages(stages, cfg, ff->mesh, results);

  timings["total_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return detail::finish(stages, std::move(results), std::move(timings), out_dir);
}

// Sweep stage only: pareto.csv, persisted meshes and report.json.
inline PipelineOutcome run_sweep_only(const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                                      unsigned jobs = 1) {
  std::filesystem::create_directories(out_dir);
  json results = json::object();
  json timings = json::object();
  detail::StageRunner stages(out_dir, timings);
  std::optional<SweepResult> sw;
  detail::run_sweep_stage(stages, cfg, jobs, results, sw);
  return detail::finish(stages, std::move(results), std::move(timings), out_dir);
}

// Shield stages on an existing membrane OBJ (anchor comments mark the base ring).
inline PipelineOutcome run_shield_only(const PipelineConfig& cfg, const std::filesystem::path& membrane_obj,
                                       const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  json results = json::object();
  json timings = json::object();
  detail::StageRunner stages(out_dir, timings);
  std::optional<TriMesh> membrane;
  stages.run("load_membrane", [&] {
    membrane = read_obj(membrane_obj);
    if (membrane->anchored_count() == 0) throw PreconditionError("membrane OBJ has no '# anchor' lines");
    results["membrane"] = {{"source", membrane_obj.filename().string()},
                           {"vertex_count", membrane->vertex_count()},
                           {"fitted_radius_m", fit_sphere_free_vertices(*membrane).radius}};
  });
  if (membrane) detail::run_shield_stages(stages, cfg, *membrane, results);
  return detail::finish(stages, std::move(results), std::move(timings), out_dir);
}

} // namespace forma
