#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>

#include "voimpc/error.hpp"
#include "voimpc/io.hpp"

namespace voimpc::cli {
namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<double> initial_soe;
  std::string out;
};

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

ConfigOverrides overrides_from(const CommonOptions& o) {
  ConfigOverrides ov;
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw InputError("--set expects key=value, got '" + s + "'");
    }
    ov.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.initial_soe) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "{\"soe\": %.17g}", *o.initial_soe);
    ov.emplace_back("initial", buf);
  }
  return ov;
}

// Commands that never touch the battery's starting point still need a config
// that validates, so a missing one falls back to the defaults at full charge.
RunConfig load(const CommonOptions& o, ConfigOverrides extra = {}) {
  auto ov = overrides_from(o);
  ov.insert(ov.end(), extra.begin(), extra.end());
  if (o.config.empty()) {
    return parse_run_config(R"({"initial": {"soe": 1.0}})", fs::current_path(), ov);
  }
  return load_run_config(o.config, ov);
}

void print_summary(std::ostream& out, const TraceSummary& s) {
  out << "windows " << s.windows << '\n'
      << "cumulative_voi " << number(s.cumulative_voi) << '\n'
      << "terminal_soe " << number(s.terminal_soe) << '\n'
      << "depleted_windows " << s.depleted_windows << '\n'
      << "mean_f_s " << number(s.mean_f_s) << '\n'
      << "mean_f_t " << number(s.mean_f_t) << '\n';
}

void finish_run(std::ostream& out, const Trace& trace, const fs::path& path) {
  write_trace(trace, path);
  print_summary(out, summarize(trace));
  out << "trace " << path.string() << '\n';
}

fs::path output_path(const CommonOptions& o, const RunConfig& cfg) {
  return o.out.empty() ? cfg.output : fs::path(o.out);
}

void add_config(CLI::App* sub, CommonOptions& o, bool required) {
  auto* opt = sub->add_option("--config", o.config, "JSON run configuration");
  if (required) {
    opt->required();
  }
  opt->check(CLI::ExistingFile);
  sub->add_option("--set", o.sets, "override a config key, e.g. --set mpc.w_e=0.9")
      ->allow_extra_args(false);
}

int simulate(const CommonOptions& o, std::ostream& out) {
  const auto cfg = load(o);
  const auto model = cfg.node_model();
  const auto dataset = cfg.load_dataset();
  const auto trace =
      run_hindcast(dataset, model, cfg.mpc, cfg.initial_z(model.battery), cfg.sim);
  finish_run(out, trace, output_path(o, cfg));
  return 0;
}

int baseline(const CommonOptions& o, double f_s, double f_t, std::ostream& out) {
  const auto cfg = load(o);
  const auto model = cfg.node_model();
  const auto dataset = cfg.load_dataset();
  const auto trace = run_static_baseline(dataset, {f_s, f_t}, model, cfg.mpc,
                                         cfg.initial_z(model.battery), cfg.sim);
  finish_run(out, trace, output_path(o, cfg));
  return 0;
}

int profile_shutdown(const CommonOptions& o, double f_s, double f_t, std::ostream& out) {
  const auto cfg = load(o);
  const auto model = cfg.node_model();
  const double hours = shutdown_time(model.profile, model.battery, f_s, f_t);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", hours);
  out << buf << '\n';
  return 0;
}

int voi_curve(const CommonOptions& o, std::optional<double> f_s, std::optional<double> f_t,
              std::ostream& out) {
  const auto cfg = load(o);
  const auto dataset = cfg.load_dataset();
  auto averse = VoiParams::risk_averse();
  auto inclined = VoiParams::risk_inclined();
  averse.delta = inclined.delta = cfg.voi.delta;
  const Decision fixed{f_s.value_or(cfg.mpc.f_s_max), f_t.value_or(cfg.mpc.f_t_max)};
  check_decision(fixed, cfg.mpc, cfg.profile, "voi-curve");
  const auto rows = emit_voi_curve(averse, inclined, {dataset.timestamps, dataset.process}, fixed);
  const fs::path path = o.out.empty() ? fs::path("voi_curve.csv") : fs::path(o.out);
  write_voi_curve(rows, path);
  out << "rows " << rows.size() << '\n' << "curve " << path.string() << '\n';
  return 0;
}

int gen_scenario(const CommonOptions& o, const std::string& out_dir, std::ostream& out) {
  const auto cfg = load(o);
  const auto dataset = cfg.load_dataset();
  fs::create_directories(out_dir);
  const fs::path process = fs::path(out_dir) / "process.csv";
  const fs::path irradiance = fs::path(out_dir) / "irradiance.csv";
  write_timeseries({dataset.timestamps, dataset.process}, "level", process);
  write_timeseries({dataset.timestamps, dataset.irradiance}, "irradiance", irradiance);
  out << "windows " << dataset.size() << '\n'
      << "process " << process.string() << '\n'
      << "irradiance " << irradiance.string() << '\n';
  return 0;
}

int sweep(const CommonOptions& o, const std::string& param, std::vector<std::string> values,
          std::ostream& out) {
  std::erase(values, std::string{});
  if (values.empty()) throw CLI::ValidationError("--values", "needs at least one value");
  // Load once up front so a bad base config fails before any run starts.
  load(o);
  std::vector<std::future<TraceSummary>> runs;
  for (const auto& value : values) {
    runs.push_back(std::async(std::launch::async, [&o, &param, value] {
      const auto cfg = load(o, {{param, value}});
      const auto model = cfg.node_model();
      return summarize(run_hindcast(cfg.load_dataset(), model, cfg.mpc,
                                    cfg.initial_z(model.battery), cfg.sim));
    }));
  }
  std::ostringstream table;
  table << "param,value,windows,cumulative_voi,terminal_soe,depleted_windows,mean_f_s,mean_f_t\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto s = runs[i].get();
    table << param << ',' << values[i] << ',' << s.windows << ',' << number(s.cumulative_voi)
          << ',' << number(s.terminal_soe) << ',' << s.depleted_windows << ','
          << number(s.mean_f_s) << ',' << number(s.mean_f_t) << '\n';
  }
  out << table.str();
  if (!o.out.empty()) {
    std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open " + o.out + " for writing");
    file << table.str();
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Value-of-information MPC scheduler for energy-harvesting sensor nodes", "voimpc"};
  app.require_subcommand(1);
  app.footer(config_reference());

  CommonOptions common;
  double f_s = 0.0, f_t = 0.0;
  std::optional<double> curve_fs, curve_ft;
  std::string param, out_dir;
  std::vector<std::string> values;

  auto* sim = app.add_subcommand("simulate", "run the MPC hindcast and write a trace");
  add_config(sim, common, true);
  sim->add_option("--initial-soe", common.initial_soe, "initial state of energy in [0, 1]");
  sim->add_option("--out", common.out, "trace CSV (default: config output)");

  auto* base = app.add_subcommand("baseline", "hindcast with fixed frequencies");
  add_config(base, common, true);
  base->add_option("--fs", f_s, "samples per hour")->required();
  base->add_option("--ft", f_t, "transmissions per hour")->required();
  base->add_option("--initial-soe", common.initial_soe, "initial state of energy in [0, 1]");
  base->add_option("--out", common.out, "trace CSV (default: config output)");

  auto* curve = app.add_subcommand("voi-curve", "VoI of a risk-averse and a risk-inclined planner");
  add_config(curve, common, false);
  curve->add_option("--fs", curve_fs, "fixed samples per hour (default f_s_max)");
  curve->add_option("--ft", curve_ft, "fixed transmissions per hour (default f_t_max)");
  curve->add_option("--out", common.out, "curve CSV (default voi_curve.csv)");

  auto* shutdown = app.add_subcommand("profile-shutdown", "hours until the SoC floor without harvest");
  add_config(shutdown, common, false);
  shutdown->add_option("--fs", f_s, "samples per hour")->required();
  shutdown->add_option("--ft", f_t, "transmissions per hour")->required();

  auto* sw = app.add_subcommand("sweep", "repeat simulate over values of one config key");
  add_config(sw, common, true);
  sw->add_option("--param", param, "dotted config key, e.g. mpc.w_e")->required();
  sw->add_option("--values", values, "comma-separated JSON values")
      ->required()
      ->delimiter(',');
  sw->add_option("--initial-soe", common.initial_soe, "initial state of energy in [0, 1]");
  sw->add_option("--out", common.out, "summary CSV");

  auto* gen = app.add_subcommand("gen-scenario", "write the configured dataset as CSVs");
  add_config(gen, common, false);
  gen->add_option("--out-dir", out_dir, "output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (*sim) return simulate(common, out);
    if (*base) return baseline(common, f_s, f_t, out);
    if (*curve) return voi_curve(common, curve_fs, curve_ft, out);
    if (*shutdown) return profile_shutdown(common, f_s, f_t, out);
    if (*sw) return sweep(common, param, values, out);
    if (*gen) return gen_scenario(common, out_dir, out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace voimpc::cli
