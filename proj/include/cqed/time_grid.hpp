#pragma once

#include <vector>

namespace cqed {

/// Integration window, base step and output times (all dimensionless).
struct TimeGrid {
  double tau_start = 0.0;
  double tau_end = 0.0;
  double dt = 1e-3;
  /// Strictly increasing, inside [tau_start, tau_end].
  std::vector<double> sample_times;

  /// Samples at tau_start, tau_start + sample_step, ... up to tau_end.
  static TimeGrid uniform(double tau_start, double tau_end, double dt, double sample_step);
  /// Window [0, max(samples)] with the given samples.
  static TimeGrid at(std::vector<double> samples, double dt = 1e-3);

  void validate() const;
};

/// Step boundaries used by every integrator: tau_start + k dt, every sample
/// time and tau_off (when inside the window), merged so that sample times
/// and tau_off are hit exactly.
std::vector<double> integration_points(const TimeGrid& grid, double tau_off);

}  // namespace cqed
