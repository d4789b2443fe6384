#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tunneltime/classical.hpp"
#include "tunneltime/params.hpp"
#include "tunneltime/tunneling.hpp"
#include "tunneltime/wigner.hpp"

namespace tunneltime {

enum class Spacing { linear, geometric };

struct GridSpec {
  double x_min = 0.0;
  double x_max = 0.0;
  int n = 161;
  Spacing spacing = Spacing::linear;
};

struct ScanSpec {  // pz range as multipliers of Ip/c
  double lo_mult = -1.5;
  double hi_mult = 1.0;
  int n = 121;
};

struct RunConfig {
  std::string scenario = "fig1a";
  ScenarioParams params{};
  std::optional<GridSpec> grid{};  // default: 161 linear points on [0, 20 xe]
  double window_lo = 10.0;         // delay window, multipliers of |xe|
  double window_hi = 20.0;
  ContourSpec contour{};
  DerivativeMethod method = DerivativeMethod::integrand;
  ScanSpec scan{};
  bool z_curves = false;  // rel only: emit transverse curves instead of time
  int threads = 1;
  std::string out_dir{};  // empty: $TUNNELTIME_OUT_DIR, then ./out
};

struct ScenarioInfo {
  const char* name;
  Regime regime;
  double kappa;
  double ratio;
  const char* emits;
};

inline const std::array<ScenarioInfo, 6>& scenarios() {
  static const std::array<ScenarioInfo, 6> table{{
      {"fig1a", Regime::nonrel, 1.0, 1.0 / 7.0, "time curves + delay"},
      {"fig1b", Regime::nonrel, 1.0, 1.0, "time curves + delay"},
      {"fig2", Regime::rel, 90.0, 1.0 / 7.0,
       "transverse-momentum scan at two field strengths"},
      {"fig3a", Regime::rel, 90.0, 1.0 / 7.0, "time curves + delay"},
      {"fig3b", Regime::rel, 90.0, 1.0, "time curves + delay"},
      {"fig4", Regime::rel, 90.0, 10.0, "transverse curves + exit offset"},
  }};
  return table;
}

inline const ScenarioInfo* find_scenario(const std::string& name) {
  for (const auto& s : scenarios())
    if (name == s.name) return &s;
  return nullptr;
}

namespace detail {

using njson = nlohmann::json;

inline void expect_keys(const njson& j, std::initializer_list<const char*> allowed,
                        const char* where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError(std::string("unknown key '") + item.key() + "' in " + where);
  }
}

inline double get_num(const njson& j, const char* key, const char* where) {
  const auto& v = j.at(key);
  if (!v.is_number())
    throw ConfigError(std::string("'") + key + "' in " + where + " must be a number");
  return v.get<double>();
}

inline int get_int(const njson& j, const char* key, const char* where) {
  const auto& v = j.at(key);
  if (!v.is_number_integer())
    throw ConfigError(std::string("'") + key + "' in " + where + " must be an integer");
  return v.get<int>();
}

inline bool get_bool(const njson& j, const char* key, const char* where) {
  const auto& v = j.at(key);
  if (!v.is_boolean())
    throw ConfigError(std::string("'") + key + "' in " + where + " must be a boolean");
  return v.get<bool>();
}

inline std::string get_str(const njson& j, const char* key, const char* where) {
  const auto& v = j.at(key);
  if (!v.is_string())
    throw ConfigError(std::string("'") + key + "' in " + where + " must be a string");
  return v.get<std::string>();
}

inline std::string fmt17(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

inline void write_text(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out.good())
    throw std::runtime_error("failed to write " + p.string());
}

}  // namespace detail

inline GridSpec parse_grid(const detail::njson& j) {
  detail::expect_keys(j, {"x_min", "x_max", "n", "spacing"}, "grid");
  GridSpec g;
  if (j.contains("x_min")) g.x_min = detail::get_num(j, "x_min", "grid");
  if (!j.contains("x_max")) throw ConfigError("grid requires 'x_max'");
  g.x_max = detail::get_num(j, "x_max", "grid");
  if (j.contains("n")) g.n = detail::get_int(j, "n", "grid");
  if (j.contains("spacing")) {
    const std::string s = detail::get_str(j, "spacing", "grid");
    if (s == "linear")
      g.spacing = Spacing::linear;
    else if (s == "geometric")
      g.spacing = Spacing::geometric;
    else
      throw ConfigError("grid spacing must be 'linear' or 'geometric'");
  }
  if (g.n < 2 || g.n > 200000) throw ConfigError("grid n must lie in [2, 200000]");
  if (g.x_min == g.x_max) throw ConfigError("grid needs x_min != x_max");
  if (g.spacing == Spacing::geometric &&
      !(g.x_min * g.x_max > 0.0))
    throw ConfigError("geometric grid needs nonzero x_min, x_max of equal sign");
  return g;
}

inline std::vector<double> make_grid(const GridSpec& g) {
  std::vector<double> xs(g.n);
  if (g.spacing == Spacing::linear) {
    for (int i = 0; i < g.n; ++i)
      xs[i] = g.x_min + (g.x_max - g.x_min) * i / (g.n - 1);
  } else {
    const double sgn = g.x_min > 0.0 ? 1.0 : -1.0;
    const double la = std::log(std::abs(g.x_min));
    const double lb = std::log(std::abs(g.x_max));
    for (int i = 0; i < g.n; ++i)
      xs[i] = sgn * std::exp(la + (lb - la) * i / (g.n - 1));
  }
  return xs;
}

inline ContourSpec parse_contour(const detail::njson& j, const ContourSpec& base) {
  detail::expect_keys(j,
                      {"rotation_angle", "t_split", "rel_tol", "abs_tol",
                       "max_subdivisions", "head_arg", "tail_arg", "tail_min",
                       "eta", "pin_geometry"},
                      "contour");
  ContourSpec c = base;
  if (j.contains("rotation_angle"))
    c.rotation_angle = detail::get_num(j, "rotation_angle", "contour");
  if (j.contains("t_split")) c.t_split = detail::get_num(j, "t_split", "contour");
  if (j.contains("rel_tol")) c.rel_tol = detail::get_num(j, "rel_tol", "contour");
  if (j.contains("abs_tol")) c.abs_tol = detail::get_num(j, "abs_tol", "contour");
  if (j.contains("max_subdivisions"))
    c.max_subdivisions = detail::get_int(j, "max_subdivisions", "contour");
  if (j.contains("head_arg")) c.head_arg = detail::get_num(j, "head_arg", "contour");
  if (j.contains("tail_arg")) c.tail_arg = detail::get_num(j, "tail_arg", "contour");
  if (j.contains("tail_min")) c.tail_min = detail::get_num(j, "tail_min", "contour");
  if (j.contains("eta")) c.eta = detail::get_num(j, "eta", "contour");
  if (j.contains("pin_geometry"))
    c.pin_geometry = detail::get_bool(j, "pin_geometry", "contour");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline RunConfig config_from_json(const detail::njson& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::expect_keys(j,
                      {"scenario", "regime", "kappa", "ratio", "c", "grid",
                       "window", "contour", "derivative_method", "scan",
                       "z_curves", "threads", "out_dir"},
                      "config");
  RunConfig cfg;
  if (!j.contains("scenario")) throw ConfigError("config requires 'scenario'");
  cfg.scenario = detail::get_str(j, "scenario", "config");

  const ScenarioInfo* info = find_scenario(cfg.scenario);
  if (!info && cfg.scenario != "custom")
    throw ConfigError("unknown scenario '" + cfg.scenario + "'");

  if (info) {
    for (const char* k : {"regime", "kappa", "ratio", "c"})
      if (j.contains(k))
        throw ConfigError(std::string("'") + k + "' is fixed by scenario '" +
                          cfg.scenario + "' and cannot be overridden");
    cfg.params.regime = info->regime;
    cfg.params.kappa = info->kappa;
    cfg.params.ratio = info->ratio;
  } else {
    if (!j.contains("regime") || !j.contains("kappa") || !j.contains("ratio"))
      throw ConfigError("custom scenario requires 'regime', 'kappa' and 'ratio'");
    const std::string reg = detail::get_str(j, "regime", "config");
    if (reg == "nonrel")
      cfg.params.regime = Regime::nonrel;
    else if (reg == "rel")
      cfg.params.regime = Regime::rel;
    else
      throw ConfigError("regime must be 'nonrel' or 'rel'");
    cfg.params.kappa = detail::get_num(j, "kappa", "config");
    cfg.params.ratio = detail::get_num(j, "ratio", "config");
    if (j.contains("c")) cfg.params.c = detail::get_num(j, "c", "config");
  }
  try {
    validate(cfg.params);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  const bool is_scan = cfg.scenario == "fig2";
  if (j.contains("scan")) {
    if (!is_scan) throw ConfigError("'scan' applies only to scenario fig2");
    const auto& js = j.at("scan");
    detail::expect_keys(js, {"lo_mult", "hi_mult", "n"}, "scan");
    if (js.contains("lo_mult")) cfg.scan.lo_mult = detail::get_num(js, "lo_mult", "scan");
    if (js.contains("hi_mult")) cfg.scan.hi_mult = detail::get_num(js, "hi_mult", "scan");
    if (js.contains("n")) cfg.scan.n = detail::get_int(js, "n", "scan");
    if (!(cfg.scan.lo_mult < cfg.scan.hi_mult))
      throw ConfigError("scan needs lo_mult < hi_mult");
    if (cfg.scan.n < 3 || cfg.scan.n > 100001)
      throw ConfigError("scan n must lie in [3, 100001]");
  }
  if (j.contains("grid")) {
    if (is_scan) throw ConfigError("'grid' does not apply to scenario fig2");
    cfg.grid = parse_grid(j.at("grid"));
  }
  if (cfg.scenario == "custom" && !cfg.grid)
    throw ConfigError("custom scenario requires 'grid'");
  if (j.contains("window")) {
    if (is_scan) throw ConfigError("'window' does not apply to scenario fig2");
    const auto& jw = j.at("window");
    detail::expect_keys(jw, {"lo", "hi"}, "window");
    if (jw.contains("lo")) cfg.window_lo = detail::get_num(jw, "lo", "window");
    if (jw.contains("hi")) cfg.window_hi = detail::get_num(jw, "hi", "window");
    if (!(cfg.window_lo >= 1.0) || !(cfg.window_hi > cfg.window_lo))
      throw ConfigError("window needs 1 <= lo < hi (multipliers of |xe|)");
  }
  if (j.contains("z_curves")) {
    if (cfg.scenario != "custom")
      throw ConfigError("'z_curves' applies only to scenario custom");
    cfg.z_curves = detail::get_bool(j, "z_curves", "config");
    if (cfg.z_curves && cfg.params.regime != Regime::rel)
      throw ConfigError("'z_curves' requires the rel regime");
  }
  if (j.contains("contour")) cfg.contour = parse_contour(j.at("contour"), cfg.contour);
  if (j.contains("derivative_method")) {
    const std::string m = detail::get_str(j, "derivative_method", "config");
    if (m == "integrand")
      cfg.method = DerivativeMethod::integrand;
    else if (m == "finite_difference")
      cfg.method = DerivativeMethod::finite_difference;
    else
      throw ConfigError("derivative_method must be 'integrand' or 'finite_difference'");
  }
  if (j.contains("threads")) {
    cfg.threads = detail::get_int(j, "threads", "config");
    if (cfg.threads < 0 || cfg.threads > 1024)
      throw ConfigError("threads must lie in [0, 1024] (0 = hardware)");
  }
  if (j.contains("out_dir")) cfg.out_dir = detail::get_str(j, "out_dir", "config");
  return cfg;
}

inline RunConfig validate_config(const std::string& text) {
  detail::njson j;
  try {
    j = detail::njson::parse(text);
  } catch (const detail::njson::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const detail::njson::exception& e) {
    throw ConfigError(std::string("config malformed: ") + e.what());
  }
}

inline RunConfig default_config(const std::string& scenario) {
  detail::njson j;
  j["scenario"] = scenario;
  if (scenario == "custom")
    throw ConfigError("scenario 'custom' needs an explicit config file");
  return config_from_json(j);
}

struct RunResult {
  detail::njson summary;
  std::filesystem::path curves_path;
  std::filesystem::path summary_path;
};

namespace detail {

inline std::filesystem::path resolve_out_dir(const RunConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("TUNNELTIME_OUT_DIR"); env && *env)
    return env;
  return "./out";
}

inline std::string curve_table(const std::vector<std::string>& header,
                               const std::vector<const std::vector<double>*>& cols) {
  std::string out;
  for (const auto& h : header) out += "# " + h + "\n";
  const std::size_t rows = cols.empty() ? 0 : cols[0]->size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out += ' ';
      out += fmt17((*cols[c])[r]);
    }
    out += '\n';
  }
  return out;
}

inline njson scan_block(const MomentumScan& s, const DerivedParams& d, double c,
                        double ratio) {
  njson b;
  b["ratio"] = ratio;
  b["E0"] = d.E0;
  b["pz_peak"] = s.pz_peak;
  b["log_t2_peak"] = s.log_peak;
  b["edge_peak"] = s.edge_peak;
  const double xe = exit_rel(d.Ip, d.E0, s.pz_peak, c);
  b["qz_exit_peak"] = kinetic_momentum(xe, s.pz_peak, d.E0, c);
  b["momentum_transfer_peak"] = -(d.E0 / c) * xe;
  const double pz_an = most_probable_pz(d.Ip, c);
  b["peak_dev_rel"] = std::abs(s.pz_peak - pz_an) / std::abs(pz_an);
  return b;
}

}  // namespace detail

// Execute a run: compute the scenario's curves or scan, write
// <scenario>_curves.txt and <scenario>_summary.json into the output
// directory, and return the summary. Output bytes are independent of the
// thread count; the summary is deterministic except wall_time_seconds.
inline RunResult run_scenario(const RunConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const DerivedParams d = derive(cfg.params);
  const double c = cfg.params.c;

  detail::njson s;
  s["scenario"] = cfg.scenario;
  s["regime"] = to_string(cfg.params.regime);
  s["kappa"] = cfg.params.kappa;
  s["ratio"] = cfg.params.ratio;
  s["c"] = c;
  s["Ip"] = d.Ip;
  s["Ea"] = d.Ea;
  s["E0"] = d.E0;
  s["eps0"] = d.eps0;
  s["derivative_method"] = to_string(cfg.method);
  s["contour"] = {{"rotation_angle", cfg.contour.rotation_angle},
                  {"rel_tol", cfg.contour.rel_tol},
                  {"abs_tol", cfg.contour.abs_tol},
                  {"max_subdivisions", cfg.contour.max_subdivisions},
                  {"eta", cfg.contour.eta}};

  const std::filesystem::path dir = detail::resolve_out_dir(cfg);
  std::filesystem::create_directories(dir);
  RunResult res;
  res.curves_path = dir / (cfg.scenario + "_curves.txt");
  res.summary_path = dir / (cfg.scenario + "_summary.json");

  std::string curves;
  const std::string param_line =
      "params: regime=" + std::string(to_string(cfg.params.regime)) +
      " kappa=" + detail::fmt17(cfg.params.kappa) +
      " ratio=" + detail::fmt17(cfg.params.ratio) + " c=" + detail::fmt17(c);

  if (cfg.scenario == "fig2") {
    const double pz_lo = cfg.scan.lo_mult * d.Ip / c;
    const double pz_hi = cfg.scan.hi_mult * d.Ip / c;
    ScenarioParams pb = cfg.params;
    pb.ratio = 1.0;
    const DerivedParams db = derive(pb);
    const MomentumScan sa =
        scan_pz(d, c, pz_lo, pz_hi, cfg.scan.n, cfg.contour, cfg.threads);
    const MomentumScan sb =
        scan_pz(db, c, pz_lo, pz_hi, cfg.scan.n, cfg.contour, cfg.threads);
    s["scan"] = {{"lo_mult", cfg.scan.lo_mult},
                 {"hi_mult", cfg.scan.hi_mult},
                 {"n", cfg.scan.n}};
    s["most_probable_pz_analytic"] = most_probable_pz(d.Ip, c);
    s["field_a"] = detail::scan_block(sa, d, c, cfg.params.ratio);
    s["field_b"] = detail::scan_block(sb, db, c, 1.0);
    s["peak_shift_rel"] = std::abs(sa.pz_peak - sb.pz_peak) /
                          std::max(std::abs(sa.pz_peak), std::abs(sb.pz_peak));
    // Each field's transmission is normalized to 1 at its refined peak so the
    // two curves are comparable on one plot; the raw peak values stay in the
    // summary (log_t2_peak), so absolute transmissions are recoverable.
    std::vector<double> norm_a = sa.log_t2, norm_b = sb.log_t2;
    for (double& v : norm_a) v -= sa.log_peak;
    for (double& v : norm_b) v -= sb.log_peak;
    curves = detail::curve_table(
        {cfg.scenario + " transverse-momentum scan", param_line,
         "field a: E0=" + detail::fmt17(d.E0) + "  field b: E0=" + detail::fmt17(db.E0),
         "log_t2 columns are ln T^2 shifted so each field's peak T^2 = 1; "
         "raw peak values: summary log_t2_peak",
         "columns: pz qz_exit_a log_t2_a qz_exit_b log_t2_b"},
        {&sa.pz, &sa.qz_exit, &norm_a, &sb.qz_exit, &norm_b});
  } else if (cfg.params.regime == Regime::nonrel) {
    const NonrelTrajectory tr = traj_nr(d.Ip, d.E0);
    s["x_e"] = tr.xe;
    GridSpec g = cfg.grid.value_or(GridSpec{0.0, 20.0 * tr.xe, 161, Spacing::linear});
    s["grid"] = {{"x_min", g.x_min},
                 {"x_max", g.x_max},
                 {"n", g.n},
                 {"spacing", g.spacing == Spacing::linear ? "linear" : "geometric"}};
    const std::vector<double> xs = make_grid(g);
    const TrajectoryCurve w = wigner_time_curve_nr(xs, d.eps0, d.E0, cfg.contour,
                                                   cfg.method, cfg.threads);
    TrajectoryCurve cl;
    cl.params_id = w.params_id;
    cl.x = xs;
    for (double x : xs) cl.value.push_back(tr.time_at(x));
    std::vector<double> delta(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) delta[i] = w.value[i] - cl.value[i];
    const DelayReport rep =
        wigner_delay(w, cl, tr.xe, cfg.window_lo, cfg.window_hi);
    s["tau_w"] = rep.tau_w;
    s["plateau_spread"] = rep.spread;
    s["converged"] = rep.converged;
    s["window"] = {{"lo_mult", cfg.window_lo},
                   {"hi_mult", cfg.window_hi},
                   {"x_lo", rep.window_lo},
                   {"x_hi", rep.window_hi},
                   {"n_points", rep.n_points}};
    curves = detail::curve_table(
        {cfg.scenario + " time curves", param_line,
         "columns: x t_wigner t_classical delta"},
        {&xs, &w.value, &cl.value, &delta});
  } else {
    const double pz0 = most_probable_pz(d.Ip, c);
    const RelTrajectory tr = traj_rel(d.Ip, d.E0, pz0, c);
    const RelArgs a{.eps = d.eps0, .pz = pz0, .E0 = d.E0, .c = c};
    s["pz0"] = pz0;
    s["x_e"] = tr.xe;
    s["vz0"] = tr.vz0;
    GridSpec g = cfg.grid.value_or(GridSpec{0.0, 20.0 * tr.xe, 161, Spacing::linear});
    s["grid"] = {{"x_min", g.x_min},
                 {"x_max", g.x_max},
                 {"n", g.n},
                 {"spacing", g.spacing == Spacing::linear ? "linear" : "geometric"}};
    const std::vector<double> xs = make_grid(g);
    const bool zmode = cfg.scenario == "fig4" || cfg.z_curves;
    if (zmode) {
      const TrajectoryCurve zw =
          wigner_z_curve_rel(xs, a, cfg.contour, cfg.method, cfg.threads);
      TrajectoryCurve zc;
      zc.params_id = zw.params_id;
      zc.x = xs;
      for (double x : xs) zc.value.push_back(x > tr.xe ? 0.0 : tr.z_at(x));
      std::vector<double> delta(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i)
        delta[i] = zw.value[i] - zc.value[i];
      const double z_exit = -(pz_slope_rel(tr.xe, a, cfg.contour, cfg.method) -
                              pz_slope_rel(0.0, a, cfg.contour, cfg.method));
      const OffsetReport rep =
          wigner_offset(zw, zc, tr.xe, cfg.window_lo, cfg.window_hi, z_exit);
      s["z_exit"] = rep.z_exit;
      s["z_offset_mean"] = rep.offset_mean;
      s["z_offset_spread"] = rep.offset_spread;
      s["z_window_scale"] = rep.window_scale;
      s["z_converged"] = rep.converged;
      s["window"] = {{"lo_mult", cfg.window_lo},
                     {"hi_mult", cfg.window_hi},
                     {"n_points", rep.n_points}};
      curves = detail::curve_table(
          {cfg.scenario + " transverse curves", param_line,
           "pz0=" + detail::fmt17(pz0) + " x_e=" + detail::fmt17(tr.xe),
           "columns: x z_wigner z_classical delta"},
          {&xs, &zw.value, &zc.value, &delta});
    } else {
      const TrajectoryCurve w =
          wigner_time_curve_rel(xs, a, cfg.contour, cfg.method, cfg.threads);
      TrajectoryCurve cl;
      cl.params_id = w.params_id;
      cl.x = xs;
      for (double x : xs) cl.value.push_back(x > tr.xe ? 0.0 : tr.t_at(x));
      std::vector<double> delta(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i)
        delta[i] = w.value[i] - cl.value[i];
      const DelayReport rep =
          wigner_delay(w, cl, tr.xe, cfg.window_lo, cfg.window_hi);
      s["tau_w"] = rep.tau_w;
      s["plateau_spread"] = rep.spread;
      s["converged"] = rep.converged;
      s["window"] = {{"lo_mult", cfg.window_lo},
                     {"hi_mult", cfg.window_hi},
                     {"x_lo", rep.window_lo},
                     {"x_hi", rep.window_hi},
                     {"n_points", rep.n_points}};
      curves = detail::curve_table(
          {cfg.scenario + " time curves", param_line,
           "pz0=" + detail::fmt17(pz0) + " x_e=" + detail::fmt17(tr.xe),
           "columns: x t_wigner t_classical delta"},
          {&xs, &w.value, &cl.value, &delta});
    }
  }

  detail::write_text(res.curves_path, curves);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  s["wall_time_seconds"] = wall;
  res.summary = s;
  detail::write_text(res.summary_path, s.dump(2) + "\n");
  return res;
}

}  // namespace tunneltime
