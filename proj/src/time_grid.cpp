#include "cqed/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace cqed {

namespace {
constexpr double kMergeTol = 1e-9;
}

TimeGrid TimeGrid::uniform(double tau_start, double tau_end, double dt, double sample_step) {
  if (!(sample_step > 0.0)) throw std::invalid_argument("sample step must be positive");
  if (!(tau_end >= tau_start)) throw std::invalid_argument("tau_end precedes tau_start");
  TimeGrid grid{tau_start, tau_end, dt, {}};
  const auto n = static_cast<long>(std::floor((tau_end - tau_start) / sample_step + 1e-9));
  for (long k = 0; k <= n; ++k) grid.sample_times.push_back(tau_start + static_cast<double>(k) * sample_step);
  if (tau_end - grid.sample_times.back() > kMergeTol) grid.sample_times.push_back(tau_end);
  grid.validate();
  return grid;
}

TimeGrid TimeGrid::at(std::vector<double> samples, double dt) {
  if (samples.empty()) throw std::invalid_argument("no sample times given");
  std::sort(samples.begin(), samples.end());
  TimeGrid grid{0.0, samples.back(), dt, std::move(samples)};
  grid.validate();
  return grid;
}

void TimeGrid::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(tau_end >= tau_start)) throw std::invalid_argument("tau_end precedes tau_start");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    const double t = sample_times[i];
    if (t < tau_start - kMergeTol || t > tau_end + kMergeTol) {
      throw std::invalid_argument(fmt::format("sample time {} outside [{}, {}]", t, tau_start, tau_end));
    }
    if (i > 0 && !(t > sample_times[i - 1])) throw std::invalid_argument("sample times must be strictly increasing");
  }
}

std::vector<double> integration_points(const TimeGrid& grid, double tau_off) {
  grid.validate();
  struct Point {
    double tau;
    bool pinned;
  };
  std::vector<Point> pts;
  const auto steps = static_cast<long>(std::ceil((grid.tau_end - grid.tau_start) / grid.dt - 1e-9));
  for (long k = 0; k <= steps; ++k) {
    pts.push_back({std::min(grid.tau_start + static_cast<double>(k) * grid.dt, grid.tau_end), false});
  }
  pts.push_back({grid.tau_end, true});
  pts.push_back({grid.tau_start, true});
  for (double t : grid.sample_times) pts.push_back({t, true});
  if (tau_off > grid.tau_start && tau_off < grid.tau_end) pts.push_back({tau_off, true});

  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.tau < b.tau; });
  std::vector<Point> merged;
  for (const auto& p : pts) {
    if (!merged.empty() && p.tau - merged.back().tau < kMergeTol) {
      if (p.pinned && !merged.back().pinned) merged.back() = p;
      continue;
    }
    merged.push_back(p);
  }
  std::vector<double> out;
  out.reserve(merged.size());
  for (const auto& p : merged) out.push_back(p.tau);
  return out;
}

}  // namespace cqed
