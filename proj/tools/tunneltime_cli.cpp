#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tunneltime/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tunneltime::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_run_summary(const tunneltime::RunResult& res) {
  const auto& s = res.summary;
  std::printf("wrote %s\n", res.curves_path.string().c_str());
  std::printf("wrote %s\n", res.summary_path.string().c_str());
  if (s.contains("tau_w")) {
    std::printf("tau_w = %.10g a.u. (plateau spread %.3g, %s)\n",
                s["tau_w"].get<double>(), s["plateau_spread"].get<double>(),
                s["converged"].get<bool>() ? "converged" : "NOT converged");
  } else if (s.contains("field_a")) {
    std::printf("pz peak: %.10g (field a), %.10g (field b); analytic %.10g; "
                "relative shift %.3g\n",
                s["field_a"]["pz_peak"].get<double>(),
                s["field_b"]["pz_peak"].get<double>(),
                s["most_probable_pz_analytic"].get<double>(),
                s["peak_shift_rel"].get<double>());
  } else if (s.contains("z_exit")) {
    std::printf("z_exit = %.10g a.u.; window offset %.10g (spread %.3g, "
                "window z scale %.3g)\n",
                s["z_exit"].get<double>(), s["z_offset_mean"].get<double>(),
                s["z_offset_spread"].get<double>(),
                s["z_window_scale"].get<double>());
  }
  std::printf("wall time %.3f s\n", s["wall_time_seconds"].get<double>());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tunneling-time observables of a zero-range state in a static field"};
  app.require_subcommand(1);

  auto* cmd_run = app.add_subcommand("run", "execute a scenario, write curves and summary");
  std::string scenario, config_path, out_dir;
  int threads = -1;
  cmd_run->add_option("--scenario", scenario, "named scenario (see list-scenarios)");
  cmd_run->add_option("--config", config_path, "JSON config file");
  cmd_run->add_option("--out", out_dir,
                      "output directory (overrides config and TUNNELTIME_OUT_DIR)");
  cmd_run->add_option("--threads", threads, "worker threads (0 = hardware)");

  auto* cmd_list = app.add_subcommand("list-scenarios", "list the named scenarios");

  auto* cmd_val = app.add_subcommand("validate", "check a config file and report");
  std::string val_path;
  cmd_val->add_option("--config", val_path, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(cmd_list)) {
      std::printf("%-8s %-7s %8s %10s  %s\n", "name", "regime", "kappa", "ratio",
                  "emits");
      for (const auto& sc : tunneltime::scenarios())
        std::printf("%-8s %-7s %8g %10.6g  %s\n", sc.name,
                    tunneltime::to_string(sc.regime), sc.kappa, sc.ratio, sc.emits);
      std::printf("%-8s %-7s %8s %10s  %s\n", "custom", "-", "-", "-",
                  "explicit parameters via --config");
      return 0;
    }
    if (app.got_subcommand(cmd_val)) {
      const tunneltime::RunConfig cfg = tunneltime::validate_config(read_file(val_path));
      const tunneltime::DerivedParams d = tunneltime::derive(cfg.params);
      std::printf("OK: scenario %s (regime %s, kappa=%g, ratio=%g)\n",
                  cfg.scenario.c_str(), tunneltime::to_string(cfg.params.regime),
                  cfg.params.kappa, cfg.params.ratio);
      std::printf("derived: Ip=%.10g Ea=%.10g E0=%.10g eps0=%.10g\n", d.Ip, d.Ea,
                  d.E0, d.eps0);
      return 0;
    }
    // run
    tunneltime::RunConfig cfg;
    std::string config_text;
    if (!config_path.empty()) config_text = read_file(config_path);
    const bool config_blank =
        config_text.find_first_not_of(" \t\r\n") == std::string::npos;
    if (!config_path.empty() && !config_blank) {
      cfg = tunneltime::validate_config(config_text);
      if (!scenario.empty() && scenario != cfg.scenario)
        throw tunneltime::ConfigError("--scenario '" + scenario +
                                      "' conflicts with config scenario '" +
                                      cfg.scenario + "'");
    } else if (!scenario.empty()) {
      cfg = tunneltime::default_config(scenario);
    } else if (!config_path.empty()) {
      throw tunneltime::ConfigError("config file '" + config_path +
                                    "' is empty; name a scenario in it or pass --scenario");
    } else {
      throw tunneltime::ConfigError("run needs --scenario and/or --config");
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads >= 0) cfg.threads = threads;
    print_run_summary(tunneltime::run_scenario(cfg));
    return 0;
  } catch (const tunneltime::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
