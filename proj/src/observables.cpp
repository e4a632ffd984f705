#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "cqed/experiment.hpp"

namespace cqed {

namespace {

constexpr double kSymmetryTol = 1e-9;

struct PairCategory {
  const char* column;
  Kind first;
  Kind second;
  // 1: same channel only, -1: different channels only, 0: all pairs.
  int channel_rule;
};

const PairCategory kPairCategories[] = {
    {"neg_aa", Kind::Atom, Kind::Atom, -1},        {"neg_cc", Kind::Cavity, Kind::Cavity, -1},
    {"neg_ff", Kind::Field, Kind::Field, -1},      {"neg_ac_same", Kind::Cavity, Kind::Atom, 1},
    {"neg_ac_cross", Kind::Cavity, Kind::Atom, -1}, {"neg_af_same", Kind::Field, Kind::Atom, 1},
    {"neg_af_cross", Kind::Field, Kind::Atom, -1},  {"neg_cf_same", Kind::Field, Kind::Cavity, 1},
    {"neg_cf_cross", Kind::Field, Kind::Cavity, -1},
};

bool symmetric_input(const InputStateSpec& input) { return input.variant != InputStateSpec::Variant::CustomPure; }

}  // namespace

std::vector<int> subsystem_sites(Subsystem subsystem) {
  return sites_of(subsystem == Subsystem::Atoms ? Kind::Atom : Kind::Cavity);
}

const std::vector<std::string>& scenario_columns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c = {"N_c",      "N_f",      "p_e",      "E_a",     "E_c",     "E_f",    "F_a_raw",
                                  "F_a_best", "F_c_raw",  "F_c_best", "mu_a",    "mu_c",    "wG",     "wW1",
                                  "wW2",      "wG_raw",   "wW1_raw",  "wW2_raw", "class_label"};
    for (const auto& p : kPairCategories) c.emplace_back(p.column);
    return c;
  }();
  return columns;
}

SampleRow observe(double tau, const StateView& state, const InputStateSpec& input, const ObserveOptions& options) {
  SampleRow row;
  row.tau = tau;
  auto& v = row.values;

  // Per-channel populations.
  const std::pair<const char*, Kind> populations[] = {{"N_c", Kind::Cavity}, {"N_f", Kind::Field}, {"p_e", Kind::Atom}};
  for (const auto& [name, kind] : populations) {
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int pos : sites_of(kind)) {
      const double n = state.reduced({pos}).entries()(1, 1).real();
      sum += n;
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    if (options.check_channel_symmetry && symmetric_input(input) && hi - lo > kSymmetryTol) {
      throw std::runtime_error(
          fmt::format("channel symmetry broken for {} at tau = {}: spread {:.3g}", name, tau, hi - lo));
    }
    v[name] = sum / kNumChannels;
  }

  const DensityMatrix atoms = state.reduced(sites_of(Kind::Atom));
  const DensityMatrix cavities = state.reduced(sites_of(Kind::Cavity));
  const DensityMatrix fields = state.reduced(sites_of(Kind::Field));
  v["E_a"] = tripartite_negativity(atoms);
  v["E_c"] = tripartite_negativity(cavities);
  v["E_f"] = tripartite_negativity(fields);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (input.is_pure()) {
    v["F_a_raw"] = fidelity_to_map(atoms, input, FidelityFrame::Raw);
    v["F_a_best"] = fidelity_to_map(atoms, input, FidelityFrame::BestPhase);
    v["F_c_raw"] = fidelity_to_map(cavities, input, FidelityFrame::Raw);
    v["F_c_best"] = fidelity_to_map(cavities, input, FidelityFrame::BestPhase);
  } else {
    v["F_a_raw"] = v["F_a_best"] = v["F_c_raw"] = v["F_c_best"] = nan;
  }
  v["mu_a"] = purity(atoms);
  v["mu_c"] = purity(cavities);

  const WitnessValues best = witness_expectations(atoms, true);
  const WitnessValues raw = witness_expectations(atoms, false);
  v["wG"] = best.w_g;
  v["wW1"] = best.w_w1;
  v["wW2"] = best.w_w2;
  v["wG_raw"] = raw.w_g;
  v["wW1_raw"] = raw.w_w1;
  v["wW2_raw"] = raw.w_w2;
  row.label = classify(best, v["E_a"], options.class_tol);

  for (const auto& cat : kPairCategories) {
    double sum = 0.0;
    int count = 0;
    for (int j1 = 0; j1 < kNumChannels; ++j1) {
      for (int j2 = 0; j2 < kNumChannels; ++j2) {
        if (cat.first == cat.second && j2 <= j1) continue;
        if (cat.channel_rule == 1 && j1 != j2) continue;
        if (cat.channel_rule == -1 && j1 == j2) continue;
        const int a = SiteIndex{cat.first, static_cast<Channel>(j1)}.position();
        const int b = SiteIndex{cat.second, static_cast<Channel>(j2)}.position();
        sum += negativity(state.reduced({a, b}));
        ++count;
      }
    }
    v[cat.column] = sum / count;
  }
  return row;
}

void write_scenario_csv(std::ostream& out, const std::vector<SampleRow>& rows, const std::vector<std::string>& columns) {
  const auto& cols = columns.empty() ? scenario_columns() : columns;
  out << "tau";
  for (const auto& c : cols) out << ',' << c;
  out << '\n';
  for (const auto& row : rows) {
    out << fmt::format("{:.17g}", row.tau);
    for (const auto& c : cols) {
      if (c == "class_label") {
        out << ',' << to_string(row.label);
      } else {
        out << ',' << fmt::format("{:.17g}", row.values.at(c));
      }
    }
    out << '\n';
  }
}

}  // namespace cqed
