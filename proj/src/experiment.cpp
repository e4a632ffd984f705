#include "cqed/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace cqed {

SolverKind parse_solver(const std::string& name) {
  if (name == "exact") return SolverKind::Exact;
  if (name == "factorized") return SolverKind::Factorized;
  if (name == "mcwf") return SolverKind::Mcwf;
  throw std::invalid_argument(fmt::format("unknown solver '{}' (expected exact, factorized or mcwf)", name));
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Exact: return "exact";
    case SolverKind::Factorized: return "factorized";
    case SolverKind::Mcwf: return "mcwf";
  }
  return "?";
}

void ScenarioConfig::validate() const {
  model.validate();
  input.validate();
  grid.validate();
  if (grid.sample_times.empty()) throw std::invalid_argument("scenario has no sample times");
  if (solver.kind == SolverKind::Mcwf && solver.n_traj < 1) {
    throw std::invalid_argument("mcwf solver needs at least one trajectory");
  }
  const auto& known = scenario_columns();
  for (const auto& name : observables) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw std::invalid_argument(fmt::format("unknown observable '{}'", name));
    }
  }
}

std::vector<SampleRow> run_scenario(const ScenarioConfig& config) {
  config.validate();
  std::vector<SampleRow> rows;
  const DensityMatrix rho0 = initial_state(config.input);
  switch (config.solver.kind) {
    case SolverKind::Exact: {
      const ObserveOptions opts{1e-9, true};
      lindblad_exact(rho0, config.model, config.grid, [&](double tau, const DensityMatrix& rho) {
        rows.push_back(observe(tau, FullStateView(rho), config.input, opts));
      });
      break;
    }
    case SolverKind::Factorized: {
      const ObserveOptions opts{1e-9, true};
      factorized_evolution(rho0, config.model, config.grid, [&](double tau, const StateView& view) {
        rows.push_back(observe(tau, view, config.input, opts));
      });
      break;
    }
    case SolverKind::Mcwf: {
      EnsembleOptions eo;
      eo.workers = config.solver.workers;
      const auto ens =
          mcwf_ensemble(config.input, config.model, config.grid, config.solver.n_traj, config.solver.seed, eo);
      for (std::size_t k = 0; k < ens.sample_times.size(); ++k) {
        const DensityMatrix rho = repair_positivity(ens.rho_at_index(k));
        const double se = std::max(ens.std_errors.at("F_ghz_a")[k], ens.std_errors.at("F_w_a")[k]);
        const ObserveOptions opts{std::max(1e-9, 3.0 * se), false};
        rows.push_back(observe(ens.sample_times[k], FullStateView(rho), config.input, opts));
      }
      break;
    }
  }
  if (!config.output_path.empty()) {
    std::ofstream out(config.output_path);
    if (!out) throw std::runtime_error(fmt::format("cannot open {}", config.output_path));
    write_scenario_csv(out, rows, config.observables);
  }
  return rows;
}

double peak_time(int index, PeakKind kind, double tau_off) {
  if (index < 0) throw std::invalid_argument("peak index must be non-negative");
  const double shift = kind == PeakKind::Atomic ? 0.0 : 0.5;
  return tau_off + (index + shift) * std::numbers::pi;
}

FitResult fit_exponential(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument(fmt::format("exponential fit needs 3 points, got {}", points.size()));
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, f] : points) {
    if (!(f > 0.0)) throw std::invalid_argument(fmt::format("non-positive value {} at rate {}", f, x));
    const double y = std::log(f);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  const double det = n * sxx - sx * sx;
  if (!(std::abs(det) > 1e-14 * std::max(1.0, n * sxx))) {
    throw std::invalid_argument("exponential fit is degenerate: all rates are equal");
  }
  const double slope = (n * sxy - sx * sy) / det;
  const double intercept = (sy - slope * sx) / n;
  double ss = 0.0;
  for (const auto& [x, f] : points) {
    const double r = std::log(f) - (intercept + slope * x);
    ss += r * r;
  }
  return {std::exp(intercept), -slope, std::sqrt(ss / n), static_cast<int>(points.size())};
}

std::vector<double> default_p_grid() {
  std::vector<double> p(101);
  for (int i = 0; i <= 100; ++i) p[i] = i / 100.0;
  return p;
}

std::vector<double> default_map_tau_grid(double tau_off) {
  const double end = 2.0 * std::numbers::pi + tau_off;
  std::vector<double> tau(600);
  for (int i = 0; i < 600; ++i) tau[i] = end * i / 599.0;
  return tau;
}

std::vector<MapRow> classification_map(const std::vector<double>& p_grid, const std::vector<double>& tau_grid,
                                       Subsystem subsystem, const ModelParams& params) {
  if (p_grid.empty() || tau_grid.empty()) throw std::invalid_argument("classification map needs nonempty grids");
  for (double p : p_grid) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(fmt::format("p = {} outside [0, 1]", p));
  }
  std::vector<double> taus = tau_grid;
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  if (taus.front() < 0.0) throw std::invalid_argument("classification map needs tau >= 0");
  const TimeGrid grid{0.0, taus.back(), 1e-3, taus};

  const auto sites = subsystem_sites(subsystem);
  std::vector<Matrix> ghz_red;
  std::vector<Matrix> w_red;
  factorized_evolution(initial_state(InputStateSpec::ghz()), params, grid,
                       [&](double, const StateView& v) { ghz_red.push_back(v.reduced(sites).entries()); });
  factorized_evolution(initial_state(InputStateSpec::w()), params, grid,
                       [&](double, const StateView& v) { w_red.push_back(v.reduced(sites).entries()); });

  std::vector<double> ps = p_grid;
  std::sort(ps.begin(), ps.end());
  std::vector<MapRow> rows;
  rows.reserve(ps.size() * taus.size());
  const auto space = HilbertSpace::qubits(3);
  for (double p : ps) {
    for (std::size_t k = 0; k < taus.size(); ++k) {
      const DensityMatrix rho(space, p * ghz_red[k] + (1.0 - p) * w_red[k]);
      const double e = tripartite_negativity(rho);
      rows.push_back({p, taus[k], e, classify(witness_expectations(rho, true), e)});
    }
  }
  return rows;
}

void write_map_csv(std::ostream& out, const std::vector<MapRow>& rows) {
  out << "p,tau,E,class_label\n";
  for (const auto& r : rows) out << fmt::format("{:.17g},{:.17g},{:.17g},{}\n", r.p, r.tau, r.tripartite, to_string(r.label));
}

}  // namespace cqed
