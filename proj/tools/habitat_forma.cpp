// habitat-forma: command-line driver for the design pipeline.
//
//   habitat-forma run      --config cfg.json --out dir [--jobs N]
//   habitat-forma validate --config cfg.json
//   habitat-forma sweep    --config cfg.json --out dir [--jobs N]
//   habitat-forma shield   --config cfg.json --membrane membrane.obj --out dir
//
// Exit codes: 0 ok, 2 config/validation error, 3 stage failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "forma/config.hpp"
#include "forma/pipeline.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("habitat-forma");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("HABITAT_FORMA_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"
    if (level != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("HABITAT_FORMA_LOG='{}' not recognised; using 'warn'", env);
    }
  }
}

void print_findings(const std::vector<forma::Finding>& findings) {
  for (const auto& f : findings) {
    std::cerr << forma::to_string(f.severity) << ": " << (f.path.empty() ? "<root>" : f.path) << ": "
              << f.message << '\n';
  }
}

// Loads and validates; prints findings. nullopt means exit 2.
std::optional<forma::PipelineConfig> load(const std::string& path) {
  try {
    auto parsed = forma::load_config(path);
    print_findings(parsed.findings);
    if (!parsed.ok()) return std::nullopt;
    return parsed.config;
  } catch (const forma::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return std::nullopt;
  }
}

int report(const forma::PipelineOutcome& out, const std::string& dir) {
  if (out.exit_code == forma::ExitCode::success) {
    std::cout << "wrote " << dir << "/report.json\n";
  } else {
    std::cerr << "stage '" << out.failed_stage << "' failed: " << out.error << '\n'
              << "partial report in " << dir << "/report.json\n";
  }
  return static_cast<int>(out.exit_code);
}

} // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Inflatable lunar habitat design pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string membrane_path;
  unsigned jobs = 0;

  auto* run = app.add_subcommand("run", "full pipeline");
  run->add_option("--config", config_path, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory (defaults to config output_directory)");
  run->add_option("--jobs", jobs, "concurrent design evaluations")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "check a config and list findings");
  validate->add_option("--config", config_path, "pipeline config (JSON)")->required();

  auto* sweep = app.add_subcommand("sweep", "radius sweep and selection only");
  sweep->add_option("--config", config_path, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--jobs", jobs, "concurrent design evaluations")->check(CLI::PositiveNumber);

  auto* shield = app.add_subcommand("shield", "shield stages on an existing membrane OBJ");
  shield->add_option("--config", config_path, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  shield->add_option("--membrane", membrane_path, "membrane OBJ with '# anchor' lines")
      ->required()
      ->check(CLI::ExistingFile);
  shield->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*validate) {
    try {
      const auto findings = forma::validate_config(config_path);
      print_findings(findings);
      bool errors = false;
      for (const auto& f : findings) errors = errors || f.severity == forma::Severity::error;
      if (findings.empty()) std::cout << "ok\n";
      return errors ? 2 : 0;
    } catch (const forma::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
  }

  auto cfg = load(config_path);
  if (!cfg) return 2;
  if (out_dir.empty()) out_dir = cfg->output_directory;
  if (jobs == 0) jobs = cfg->jobs;

  try {
    if (*run) return report(forma::run_pipeline(*cfg, out_dir, jobs), out_dir);
    if (*sweep) return report(forma::run_sweep_only(*cfg, out_dir, jobs), out_dir);
    return report(forma::run_shield_only(*cfg, membrane_path, out_dir), out_dir);
  } catch (const std::exception& e) {
    // Only reachable when the output directory itself cannot be written.
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
