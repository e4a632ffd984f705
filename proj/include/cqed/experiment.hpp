#pragma once

// Scenario engine: time series of every figure of merit, dissipation sweeps
// with exponential fits, and the (p, tau) classification map.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "cqed/dynamics.hpp"
#include "cqed/metrics.hpp"
#include "cqed/model.hpp"
#include "cqed/time_grid.hpp"

namespace cqed {

enum class SolverKind { Exact, Factorized, Mcwf };

struct SolverConfig {
  SolverKind kind = SolverKind::Exact;
  int n_traj = 2000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

SolverKind parse_solver(const std::string& name);
std::string to_string(SolverKind kind);

struct ScenarioConfig {
  ModelParams model;
  InputStateSpec input = InputStateSpec::w();
  TimeGrid grid = TimeGrid::uniform(0.0, 12.0, 1e-3, 0.01);
  SolverConfig solver;
  /// CSV columns after tau; empty selects all of them.
  std::vector<std::string> observables;
  std::string output_path;

  void validate() const;
};

// --- time series --------------------------------------------------------------

/// Every column a scenario can emit, in output order (tau excluded).
/// Pair negativities are averaged over the pairs of each category: same
/// kind (aa, cc, ff) and mixed kinds split into same-channel partners and
/// cross-channel pairs.
const std::vector<std::string>& scenario_columns();

struct SampleRow {
  double tau = 0.0;
  std::map<std::string, double> values;
  ClassificationLabel label = ClassificationLabel::PptAll;
};

struct ObserveOptions {
  /// Witness tolerance for the class label.
  double class_tol = 1e-9;
  /// Require per-channel observables to agree across J within 1e-9.
  bool check_channel_symmetry = false;
};

SampleRow observe(double tau, const StateView& state, const InputStateSpec& input, const ObserveOptions& options);

std::vector<SampleRow> run_scenario(const ScenarioConfig& config);

/// CSV with header "tau,<columns>"; class_label is written as text.
void write_scenario_csv(std::ostream& out, const std::vector<SampleRow>& rows, const std::vector<std::string>& columns);

// --- peak times -----------------------------------------------------------------

enum class PeakKind { Atomic, Cavity };

/// tau_m = tau_off + m pi (atoms) and tau_n = tau_off + (n + 1/2) pi (cavities).
double peak_time(int index, PeakKind kind, double tau_off = std::numbers::pi / std::numbers::sqrt2);

// --- fits and sweeps ------------------------------------------------------------

struct FitResult {
  double f0 = 0.0;
  double decay = 0.0;
  /// RMS residual of log(value).
  double residual = 0.0;
  int n_points = 0;
};

/// Least squares of log(value) against rate: value = f0 exp(-decay rate).
/// Rejects fewer than 3 points, non-positive values and a degenerate rate set.
FitResult fit_exponential(const std::vector<std::pair<double, double>>& points);

enum class RateKind { Cavity, Atomic };

struct SweepQuantity {
  std::string name;
  PeakKind subsystem;
  int peak_index;
  enum class Measure { FidelityBest, FidelityRaw, Tripartite } measure;
};

/// F_a0, F_a0_raw, E_a0, E_a1, F_c0, F_c0_raw, E_c0, E_c1.
const std::vector<SweepQuantity>& sweep_quantities();

struct SweepResult {
  RateKind rate_kind = RateKind::Cavity;
  std::vector<double> rates;
  double fixed_other_rate = 0.0;
  std::vector<std::string> quantities;
  /// Peak value and its location per quantity, one entry per rate.
  std::map<std::string, std::vector<double>> peak_values;
  std::map<std::string, std::vector<double>> peak_taus;
  std::map<std::string, FitResult> fits;
  std::vector<std::string> warnings;
};

/// Cavity sweeps in the default grid run over small rates, where the decay
/// of the peaks is exponential.
std::vector<double> default_rates(RateKind kind);
double default_fixed_rate(RateKind kind);

/// Half-width of the window searched around each nominal peak time.
inline constexpr double kPeakWindow = 0.3;

SweepResult dissipation_sweep(const InputStateSpec& input, RateKind rate_kind, const std::vector<double>& rates,
                              double fixed_other_rate, const ModelParams& base = {});

void write_sweep_csv(std::ostream& out, const SweepResult& result);

// --- classification map -------------------------------------------------------

enum class Subsystem { Atoms, Cavities };

struct MapRow {
  double p;
  double tau;
  double tripartite;
  ClassificationLabel label;
};

/// Classifies the reduced state of p GHZ + (1 - p) W at every (p, tau),
/// evolving the two pure inputs once and combining them by linearity. Rows
/// are sorted by (p, tau).
std::vector<MapRow> classification_map(const std::vector<double>& p_grid, const std::vector<double>& tau_grid,
                                       Subsystem subsystem, const ModelParams& params = {});

std::vector<double> default_p_grid();
std::vector<double> default_map_tau_grid(double tau_off = std::numbers::pi / std::numbers::sqrt2);

void write_map_csv(std::ostream& out, const std::vector<MapRow>& rows);

// --- validation ---------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool passed;
  double measured;
  double tolerance;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

/// Oracle equivalences, conservation laws and analytic values. Quick mode
/// shortens the windows and uses fewer trajectories.
ValidationReport validate(bool quick = false);

void write_report(std::ostream& out, const ValidationReport& report);

// --- helpers ------------------------------------------------------------------

/// Canonical site positions of one kind.
std::vector<int> subsystem_sites(Subsystem subsystem);

}  // namespace cqed
