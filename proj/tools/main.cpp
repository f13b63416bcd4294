#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "c3bf/config.hpp"
#include "c3bf/scenarios.hpp"
#include "c3bf/sim.hpp"

namespace fs = std::filesystem;
using namespace c3bf;

namespace {

struct CommonOpts {
  std::string scenario;
  std::string config_path;
  std::string filter_mode;
  double duration = -1.0;
  double dt = -1.0;
  std::string integrator;
  std::string out_dir = ".";
  bool no_trace = false;
  bool no_metrics = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_filter = true) {
  cmd->add_option("--scenario", opts.scenario, "builtin scenario name");
  cmd->add_option("--config", opts.config_path, "scenario config file");
  if (with_filter) {
    cmd->add_option("--filter", opts.filter_mode, "filter mode override (c3bf|distance|none)");
  }
  cmd->add_option("--duration", opts.duration, "simulated duration override [s]");
  cmd->add_option("--dt", opts.dt, "control step override [s]");
  cmd->add_option("--integrator", opts.integrator, "integrator override (semi_implicit_euler|rk4)");
  cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
}

SimConfig resolve_config(const CommonOpts& opts) {
  if (opts.scenario.empty() == opts.config_path.empty()) {
    throw std::runtime_error("exactly one of --scenario or --config is required");
  }
  SimConfig cfg = opts.scenario.empty() ? load_config_file(opts.config_path)
                                        : builtin_scenario(opts.scenario);
  if (!opts.filter_mode.empty()) {
    if (opts.filter_mode == "c3bf") {
      cfg.safety.mode = FilterMode::c3bf;
    } else if (opts.filter_mode == "distance") {
      cfg.safety.mode = FilterMode::distance;
    } else if (opts.filter_mode == "none") {
      cfg.safety.mode = FilterMode::none;
    } else {
      throw std::runtime_error("unknown filter mode '" + opts.filter_mode + "'");
    }
  }
  if (opts.duration > 0.0) cfg.duration = opts.duration;
  if (opts.dt > 0.0) cfg.dt = opts.dt;
  if (!opts.integrator.empty()) {
    if (opts.integrator == "semi_implicit_euler") {
      cfg.integrator = Integrator::semi_implicit_euler;
    } else if (opts.integrator == "rk4") {
      cfg.integrator = Integrator::rk4;
    } else {
      throw std::runtime_error("unknown integrator '" + opts.integrator + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return os;
}

void print_summary(const SimConfig& cfg, const RunResult& result) {
  std::printf("scenario %-10s mode %-8s steps %-6zu", cfg.name.c_str(),
              cfg.safety.mode == FilterMode::c3bf       ? "c3bf"
              : cfg.safety.mode == FilterMode::distance ? "distance"
                                                        : "none",
              result.trace.size());
  if (result.aborted) {
    std::printf("  ABORTED: %s\n", result.abort_reason.c_str());
    return;
  }
  const RunMetrics& m = result.metrics;
  std::printf("  min_sep %+.4f  min_h %+.5f  collision %s  rmse %.4f  effort %.4f  active %.1f%%\n",
              m.min_separation, m.min_h, m.collision ? "YES" : "no",
              m.tracking_rmse_tail, m.effort_deviation, 100.0 * m.active_fraction);
}

int cmd_run(const CommonOpts& opts) {
  const SimConfig cfg = resolve_config(opts);
  const RunResult result = run_scenario(cfg);
  fs::create_directories(opts.out_dir);
  if (!opts.no_trace) {
    auto os = open_out(fs::path(opts.out_dir) / (cfg.name + ".trace.csv"));
    write_trace_csv(os, cfg, result.trace);
  }
  if (!opts.no_metrics) {
    auto os = open_out(fs::path(opts.out_dir) / (cfg.name + ".metrics.json"));
    write_metrics_json(os, result.metrics);
  }
  if (!opts.quiet) print_summary(cfg, result);
  if (result.aborted) {
    std::cerr << "run aborted: " << result.abort_reason << "\n";
    return 1;
  }
  return result.metrics.collision ? 2 : 0;
}

int cmd_compare(const CommonOpts& opts) {
  const SimConfig base = resolve_config(opts);
  const FilterMode modes[] = {FilterMode::c3bf, FilterMode::distance, FilterMode::none};
  const char* mode_names[] = {"c3bf", "distance", "none"};

  fs::create_directories(opts.out_dir);
  auto os = open_out(fs::path(opts.out_dir) / (base.name + ".compare.json"));
  os << "{\n  \"scenario\": \"" << base.name << "\",\n  \"modes\": {\n";

  if (!opts.quiet) {
    std::printf("%-10s %14s %10s %14s %10s %10s\n", "mode", "min_sep", "collision",
                "effort_dev", "active", "rmse");
  }
  for (int i = 0; i < 3; ++i) {
    SimConfig cfg = base;
    cfg.safety.mode = modes[i];
    const RunResult result = run_scenario(cfg);
    if (result.aborted) {
      std::cerr << "mode " << mode_names[i] << " aborted: " << result.abort_reason << "\n";
      return 1;
    }
    const RunMetrics& m = result.metrics;
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "    \"%s\": {\"min_separation\": %.17g, \"collision\": %s, "
                  "\"min_h\": %.17g, \"tracking_rmse_tail\": %.17g, "
                  "\"effort_deviation\": %.17g, \"active_fraction\": %.17g}%s\n",
                  mode_names[i], m.min_separation, m.collision ? "true" : "false",
                  m.min_h, m.tracking_rmse_tail, m.effort_deviation, m.active_fraction,
                  i < 2 ? "," : "");
    os << buf;
    if (!opts.quiet) {
      std::printf("%-10s %14.4f %10s %14.4f %9.1f%% %10.4f\n", mode_names[i],
                  m.min_separation, m.collision ? "YES" : "no", m.effort_deviation,
                  100.0 * m.active_fraction, m.tracking_rmse_tail);
    }
  }
  os << "  }\n}\n";
  return 0;
}

int cmd_export(const CommonOpts& opts) {
  const SimConfig cfg = resolve_config(opts);
  fs::create_directories(opts.out_dir);
  const fs::path path = fs::path(opts.out_dir) / (cfg.name + ".config");
  save_config_file(path.string(), cfg);
  if (!opts.quiet) std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collision-cone CBF safety filtering on an impedance-controlled arm"};
  app.require_subcommand(1);

  CommonOpts run_opts, cmp_opts, exp_opts;
  CLI::App* run = app.add_subcommand("run", "run one scenario and write trace/metrics");
  add_common(run, run_opts);
  run->add_flag("--no-trace", run_opts.no_trace, "skip trace CSV");
  run->add_flag("--no-metrics", run_opts.no_metrics, "skip metrics JSON");
  run->add_flag("--quiet", run_opts.quiet, "suppress the summary line");

  CLI::App* cmp = app.add_subcommand("compare", "run a scenario under c3bf/distance/none");
  add_common(cmp, cmp_opts, /*with_filter=*/false);
  cmp->add_flag("--quiet", cmp_opts.quiet, "suppress the table");

  CLI::App* list = app.add_subcommand("list-scenarios", "print builtin scenario names");

  CLI::App* exp = app.add_subcommand("export-config", "write a scenario as a config file");
  add_common(exp, exp_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (cmp->parsed()) return cmd_compare(cmp_opts);
    if (list->parsed()) {
      for (const std::string& name : builtin_scenario_names()) {
        std::printf("%s\n", name.c_str());
      }
      return 0;
    }
    if (exp->parsed()) return cmd_export(exp_opts);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
