#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "cqed/experiment.hpp"

namespace cqed {

namespace {

// Coarse scan of the window, then Brent refinement around the best sample.
constexpr int kScanPoints = 61;
constexpr int kBrentBits = 40;

}  // namespace

const std::vector<SweepQuantity>& sweep_quantities() {
  using M = SweepQuantity::Measure;
  static const std::vector<SweepQuantity> q = {
      {"F_a0", PeakKind::Atomic, 0, M::FidelityBest}, {"F_a0_raw", PeakKind::Atomic, 0, M::FidelityRaw},
      {"E_a0", PeakKind::Atomic, 0, M::Tripartite},   {"E_a1", PeakKind::Atomic, 1, M::Tripartite},
      {"F_c0", PeakKind::Cavity, 0, M::FidelityBest}, {"F_c0_raw", PeakKind::Cavity, 0, M::FidelityRaw},
      {"E_c0", PeakKind::Cavity, 0, M::Tripartite},   {"E_c1", PeakKind::Cavity, 1, M::Tripartite},
  };
  return q;
}

std::vector<double> default_rates(RateKind kind) {
  if (kind == RateKind::Atomic) return {0.01, 0.02, 0.04, 0.06, 0.08, 0.1};
  std::vector<double> k;
  for (int i = 0; i <= 10; ++i) k.push_back(i / 100.0);
  return k;
}

double default_fixed_rate(RateKind kind) { return kind == RateKind::Atomic ? 0.1 : 0.0; }

SweepResult dissipation_sweep(const InputStateSpec& input, RateKind rate_kind, const std::vector<double>& rates,
                              double fixed_other_rate, const ModelParams& base) {
  if (!input.is_pure()) throw std::invalid_argument("dissipation sweeps need a pure input state");
  if (rates.empty()) throw std::invalid_argument("no rates to sweep");
  for (double r : rates) {
    if (!(r >= 0.0)) throw std::invalid_argument(fmt::format("negative rate {}", r));
  }
  if (!(fixed_other_rate >= 0.0)) throw std::invalid_argument("negative fixed rate");

  SweepResult result;
  result.rate_kind = rate_kind;
  result.rates = rates;
  result.fixed_other_rate = fixed_other_rate;
  for (const auto& q : sweep_quantities()) result.quantities.push_back(q.name);

  const auto state = std::make_shared<const ChannelDecomposedState>(initial_state(input));
  for (double rate : rates) {
    ModelParams params = base;
    params.k_tilde = rate_kind == RateKind::Cavity ? rate : fixed_other_rate;
    params.gamma_tilde = rate_kind == RateKind::Atomic ? rate : fixed_other_rate;
    const ChannelPropagator prop(params);

    for (const auto& q : sweep_quantities()) {
      const auto sites = subsystem_sites(q.subsystem == PeakKind::Atomic ? Subsystem::Atoms : Subsystem::Cavities);
      auto value = [&](double tau) {
        const DensityMatrix rho = FactorizedStateView(state, prop.channel_map(tau)).reduced(sites);
        switch (q.measure) {
          case SweepQuantity::Measure::FidelityBest: return fidelity_to_map(rho, input, FidelityFrame::BestPhase);
          case SweepQuantity::Measure::FidelityRaw: return fidelity_to_map(rho, input, FidelityFrame::Raw);
          case SweepQuantity::Measure::Tripartite: return tripartite_negativity(rho);
        }
        return 0.0;
      };
      const double nominal = peak_time(q.peak_index, q.subsystem, params.tau_off);
      const double lo = std::max(0.0, nominal - kPeakWindow);
      const double hi = nominal + kPeakWindow;
      const double step = (hi - lo) / (kScanPoints - 1);
      double best_tau = lo;
      double best = -1.0;
      for (int i = 0; i < kScanPoints; ++i) {
        const double t = lo + i * step;
        const double v = value(t);
        if (v > best) {
          best = v;
          best_tau = t;
        }
      }
      const auto [t_ref, neg_ref] = boost::math::tools::brent_find_minima(
          [&](double t) { return -value(t); }, std::max(lo, best_tau - step), std::min(hi, best_tau + step),
          kBrentBits);
      if (-neg_ref > best) {
        best = -neg_ref;
        best_tau = t_ref;
      }
      result.peak_values[q.name].push_back(best);
      result.peak_taus[q.name].push_back(best_tau);
    }
  }

  for (const auto& name : result.quantities) {
    std::vector<std::pair<double, double>> pts;
    const auto& vals = result.peak_values[name];
    for (std::size_t i = 0; i < rates.size(); ++i) {
      if (vals[i] > 0.0) {
        pts.emplace_back(rates[i], vals[i]);
      } else {
        result.warnings.push_back(fmt::format("{}: non-positive peak {} at rate {} excluded from fit", name, vals[i],
                                              rates[i]));
      }
    }
    result.fits[name] = fit_exponential(pts);
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "row,quantity,rate,tau_peak,value,f0,decay,residual\n";
  for (const auto& name : result.quantities) {
    for (std::size_t i = 0; i < result.rates.size(); ++i) {
      out << fmt::format("peak,{},{:.17g},{:.17g},{:.17g},,,\n", name, result.rates[i], result.peak_taus.at(name)[i],
                         result.peak_values.at(name)[i]);
    }
  }
  for (const auto& name : result.quantities) {
    const auto& f = result.fits.at(name);
    out << fmt::format("fit,{},,,,{:.17g},{:.17g},{:.17g}\n", name, f.f0, f.decay, f.residual);
  }
}

}  // namespace cqed
