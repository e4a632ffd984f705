// Command-line front end: run, sweep-k, sweep-gamma, classify-map, validate.

#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cqed/config.hpp"
#include "cqed/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::string solver;
  std::string input;
  std::optional<int> traj;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "INI configuration file")->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "output CSV (default: config output.path, else stdout)");
  app->add_option("--solver", f.solver, "exact | factorized | mcwf")
      ->check(CLI::IsMember({"exact", "factorized", "mcwf"}));
  app->add_option("--input", f.input, "input field state: W, GHZ or mixed:<p>");
  app->add_option("--traj", f.traj, "number of trajectories (mcwf)")->check(CLI::PositiveNumber);
  app->add_option("--seed", f.seed, "base seed (mcwf)");
  app->add_option("--dt", f.dt, "integration step")->check(CLI::PositiveNumber);
}

cqed::RunConfig resolve(const CommonFlags& f) {
  cqed::RunConfig cfg = f.config.empty() ? cqed::RunConfig{} : cqed::load_config(f.config);
  auto& sc = cfg.scenario;
  if (!f.solver.empty()) sc.solver.kind = cqed::parse_solver(f.solver);
  if (f.traj) sc.solver.n_traj = *f.traj;
  if (f.seed) sc.solver.seed = *f.seed;
  if (f.dt) sc.grid.dt = *f.dt;
  if (!f.input.empty()) {
    if (f.input == "W" || f.input == "w") {
      sc.input = cqed::InputStateSpec::w();
    } else if (f.input == "GHZ" || f.input == "ghz") {
      sc.input = cqed::InputStateSpec::ghz();
    } else if (f.input.rfind("mixed:", 0) == 0) {
      sc.input = cqed::InputStateSpec::mixed(std::stod(f.input.substr(6)));
    } else {
      throw std::invalid_argument(fmt::format("unknown --input '{}'", f.input));
    }
  }
  if (!f.out.empty()) sc.output_path = f.out;
  sc.validate();
  return cfg;
}

template <class Write>
void emit(const std::string& path, Write&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot open {}", path));
  write(out);
}

int run_sweep(const CommonFlags& flags, cqed::RateKind kind) {
  const auto cfg = resolve(flags);
  const auto rates = cfg.sweep_rates.value_or(cqed::default_rates(kind));
  const double fixed = cfg.sweep_fixed_rate.value_or(cqed::default_fixed_rate(kind));
  const auto result = cqed::dissipation_sweep(cfg.scenario.input, kind, rates, fixed, cfg.scenario.model);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& name : result.quantities) {
    const auto& f = result.fits.at(name);
    std::cerr << fmt::format("{:>9}  f0 = {:.4f}  decay = {:.4f}  log-residual = {:.2e}\n", name, f.f0, f.decay,
                             f.residual);
  }
  emit(cfg.scenario.output_path, [&](std::ostream& out) { cqed::write_sweep_csv(out, result); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-system simulator for three-channel cavity-QED state transfer"};
  app.require_subcommand(1);

  CommonFlags run_flags, sk_flags, sg_flags, map_flags;
  auto* run = app.add_subcommand("run", "time series of one scenario");
  add_common(run, run_flags);
  auto* sweep_k = app.add_subcommand("sweep-k", "peak decay against the cavity decay rate");
  add_common(sweep_k, sk_flags);
  auto* sweep_g = app.add_subcommand("sweep-gamma", "peak decay against the atomic decay rate");
  add_common(sweep_g, sg_flags);
  auto* map = app.add_subcommand("classify-map", "classification over mixture weight and time");
  add_common(map, map_flags);
  auto* val = app.add_subcommand("validate", "oracle and invariant checks");
  bool quick = false;
  std::string report_path;
  val->add_flag("--quick", quick, "shorter windows and fewer trajectories");
  val->add_option("--out", report_path, "write the report to this file as well");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto cfg = resolve(run_flags);
      const std::string path = cfg.scenario.output_path;
      cfg.scenario.output_path.clear();
      const auto rows = cqed::run_scenario(cfg.scenario);
      emit(path, [&](std::ostream& out) { cqed::write_scenario_csv(out, rows, cfg.scenario.observables); });
    } else if (sweep_k->parsed()) {
      return run_sweep(sk_flags, cqed::RateKind::Cavity);
    } else if (sweep_g->parsed()) {
      return run_sweep(sg_flags, cqed::RateKind::Atomic);
    } else if (map->parsed()) {
      const auto cfg = resolve(map_flags);
      std::vector<double> ps(cfg.map_p_points);
      for (int i = 0; i < cfg.map_p_points; ++i) ps[i] = static_cast<double>(i) / (cfg.map_p_points - 1);
      const double tau_max = cfg.map_tau_max.value_or(2.0 * std::numbers::pi + cfg.scenario.model.tau_off);
      std::vector<double> taus(cfg.map_tau_points);
      for (int i = 0; i < cfg.map_tau_points; ++i) taus[i] = tau_max * i / (cfg.map_tau_points - 1);
      const auto rows = cqed::classification_map(ps, taus, cfg.map_subsystem, cfg.scenario.model);
      emit(cfg.scenario.output_path, [&](std::ostream& out) { cqed::write_map_csv(out, rows); });
    } else if (val->parsed()) {
      const auto report = cqed::validate(quick);
      cqed::write_report(std::cout, report);
      if (!report_path.empty()) emit(report_path, [&](std::ostream& out) { cqed::write_report(out, report); });
      return report.all_passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
