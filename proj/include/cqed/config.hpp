#pragma once

// INI-style configuration:
//
//   [model]   g_a, g_c, k_tilde, gamma_tilde, tau_off
//   [input]   state = W | GHZ | mixed | custom, p, amplitudes_re, amplitudes_im
//   [grid]    tau_start, tau_end, dt, sample_step
//   [solver]  kind = exact | factorized | mcwf, trajectories, seed, workers
//   [sweep]   rates (comma separated), fixed_rate
//   [map]     p_points, tau_points, tau_max, subsystem = atoms | cavities
//   [output]  path, observables (comma separated)
//
// Every key is optional; unknown sections and keys are errors.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cqed/experiment.hpp"

namespace cqed {

struct RunConfig {
  ScenarioConfig scenario;
  std::optional<std::vector<double>> sweep_rates;
  std::optional<double> sweep_fixed_rate;
  int map_p_points = 101;
  int map_tau_points = 600;
  /// Defaults to 2 pi + tau_off.
  std::optional<double> map_tau_max;
  Subsystem map_subsystem = Subsystem::Atoms;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

}  // namespace cqed
