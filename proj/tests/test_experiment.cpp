#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "cqed/experiment.hpp"

using namespace cqed;

namespace {

const double kTauOff = std::numbers::pi / std::numbers::sqrt2;
const double kPi = std::numbers::pi;

ScenarioConfig scenario(const InputStateSpec& input, TimeGrid grid, SolverKind kind = SolverKind::Factorized) {
  ScenarioConfig c;
  c.input = input;
  c.grid = std::move(grid);
  c.solver.kind = kind;
  return c;
}

double overlap(const DensityMatrix& rho, const Vector& v) { return (v.adjoint() * rho.entries() * v)(0, 0).real(); }

}  // namespace

TEST_CASE("peak times") {
  CHECK(peak_time(0, PeakKind::Atomic) == doctest::Approx(2.2214).epsilon(1e-4));
  CHECK(peak_time(0, PeakKind::Cavity) == doctest::Approx(3.7922).epsilon(1e-4));
  CHECK(peak_time(1, PeakKind::Atomic) == doctest::Approx(5.3630).epsilon(1e-4));
  CHECK_THROWS_AS(peak_time(-1, PeakKind::Atomic), std::invalid_argument);
}

TEST_CASE("exponential fit") {
  std::vector<std::pair<double, double>> pts;
  for (double k : {0.0, 0.05, 0.1, 0.3}) pts.emplace_back(k, 0.9 * std::exp(-2.0 * k));
  const FitResult f = fit_exponential(pts);
  CHECK(std::abs(f.decay - 2.0) < 1e-9);
  CHECK(std::abs(f.f0 - 0.9) < 1e-12);
  CHECK(f.residual < 1e-12);
  CHECK(f.n_points == 4);
  CHECK(fit_exponential({{0.0, 0.5}, {0.1, 0.5}, {0.2, 0.5}}).decay == doctest::Approx(0.0));
  CHECK(fit_exponential({{0.0, 1.0}, {0.1, 0.8}, {0.2, 0.7}}).residual > 0.0);
  CHECK_THROWS_AS(fit_exponential({{0.0, 1.0}, {0.1, 0.9}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_exponential({{0.1, 1.0}, {0.1, 0.9}, {0.1, 0.8}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_exponential({{0.0, 1.0}, {0.1, 0.0}, {0.2, 0.8}}), std::invalid_argument);
}

TEST_CASE("scenario configuration") {
  ScenarioConfig c;
  CHECK_NOTHROW(c.validate());
  c.observables = {"E_a", "nonsense"};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.observables = {};
  c.solver.kind = SolverKind::Mcwf;
  c.solver.n_traj = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(parse_solver("mcwf") == SolverKind::Mcwf);
  CHECK(to_string(SolverKind::Factorized) == "factorized");
  CHECK_THROWS_AS(parse_solver("euler"), std::invalid_argument);
}

TEST_CASE("scenario time series") {
  SUBCASE("lossless W at tau_off, both deterministic solvers") {
    for (SolverKind kind : {SolverKind::Exact, SolverKind::Factorized}) {
      const auto rows = run_scenario(scenario(InputStateSpec::w(), TimeGrid::at({kTauOff}), kind));
      REQUIRE(rows.size() == 1);
      CHECK(std::abs(rows[0].values.at("E_a") - 2.0 * std::sqrt(2.0) / 3.0) < 1e-3);
      CHECK(rows[0].values.at("F_a_raw") > 1.0 - 1e-6);
      CHECK(rows[0].values.at("N_f") < 1e-4);
      CHECK(rows[0].label == ClassificationLabel::WClass);
    }
  }
  SUBCASE("csv layout") {
    auto cfg = scenario(InputStateSpec::mixed(0.3), TimeGrid::uniform(0.0, 1.0, 1e-3, 0.5));
    const auto rows = run_scenario(cfg);
    std::ostringstream all;
    write_scenario_csv(all, rows, {});
    std::string header;
    std::istringstream in(all.str());
    std::getline(in, header);
    std::string expected = "tau";
    for (const auto& c : scenario_columns()) expected += "," + c;
    CHECK(header == expected);
    int lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == 3);
    CHECK(std::isnan(rows[0].values.at("F_a_raw")));
    CHECK(all.str().find("nan") != std::string::npos);

    std::ostringstream some;
    write_scenario_csv(some, rows, {"E_a", "class_label"});
    CHECK(some.str().rfind("tau,E_a,class_label\n0,0,PPT\n", 0) == 0);
  }
  SUBCASE("every column is present in every row") {
    const auto rows = run_scenario(scenario(InputStateSpec::ghz(), TimeGrid::at({1.0, 4.0})));
    for (const auto& r : rows) {
      for (const auto& c : scenario_columns()) {
        if (c != "class_label") CHECK(r.values.count(c) == 1);
      }
    }
  }
  SUBCASE("mcwf solver") {
    auto cfg = scenario(InputStateSpec::w(), TimeGrid::uniform(0.0, 2.5, 1e-3, 0.5), SolverKind::Mcwf);
    cfg.model.k_tilde = 0.2;
    cfg.solver.n_traj = 64;
    cfg.solver.seed = 3;
    const auto a = run_scenario(cfg);
    const auto b = run_scenario(cfg);
    std::ostringstream sa, sb;
    write_scenario_csv(sa, a, {});
    write_scenario_csv(sb, b, {});
    CHECK(sa.str() == sb.str());
    CHECK(a.size() == 6);
  }
  SUBCASE("broken channel symmetry is reported") {
    std::array<Complex, 8> amps{};
    amps[0b100] = 1.0;
    const DensityMatrix asym = initial_state(InputStateSpec::custom(amps));
    CHECK_THROWS_AS(observe(0.0, FullStateView(asym), InputStateSpec::w(), {1e-9, true}), std::runtime_error);
    CHECK_NOTHROW(observe(0.0, FullStateView(asym), InputStateSpec::custom(amps), {1e-9, true}));
  }
}

TEST_CASE("pair negativities, lossless GHZ") {
  std::vector<double> samples;
  for (double t = kTauOff; t < kTauOff + kPi; t += 0.05) samples.push_back(t);
  const auto rows = run_scenario(scenario(InputStateSpec::ghz(), TimeGrid::at(samples)));
  double partner = 0.0;
  for (const auto& r : rows) {
    for (const char* c : {"neg_aa", "neg_cc", "neg_ff", "neg_ac_cross", "neg_af_same", "neg_af_cross", "neg_cf_same",
                          "neg_cf_cross"}) {
      CHECK(r.values.at(c) < 1e-8);
    }
    partner = std::max(partner, r.values.at("neg_ac_same"));
  }
  CHECK(partner == doctest::Approx(0.21).epsilon(0.05));
}

TEST_CASE("state mapping at the peak times") {
  for (const auto& spec : {InputStateSpec::w(), InputStateSpec::ghz()}) {
    CAPTURE(spec.label());
    const Vector psi = three_qubit_state(spec);
    std::vector<double> samples{kTauOff};
    for (int m = 0; m < 3; ++m) samples.push_back(peak_time(m, PeakKind::Cavity));
    for (int m = 1; m < 3; ++m) samples.push_back(peak_time(m, PeakKind::Atomic));
    std::sort(samples.begin(), samples.end());
    const auto states = lindblad_exact(initial_state(spec), ModelParams{}, TimeGrid::at(samples));
    for (int m = 0; m < 3; ++m) {
      const double phi_a = m % 2 == 0 ? -kPi / 2 : kPi / 2;
      const Vector ta = local_phase_rotation(phi_a, Kind::Atom).entries() * psi;
      const auto atoms = partial_trace(states.at(peak_time(m, PeakKind::Atomic)), std::span<const int>(sites_of(Kind::Atom)));
      CHECK(overlap(atoms, ta) > 1.0 - 1e-6);
      const double phi_c = m % 2 == 0 ? 0.0 : kPi;
      const Vector tc = local_phase_rotation(phi_c, Kind::Cavity).entries() * psi;
      const auto cavs = partial_trace(states.at(peak_time(m, PeakKind::Cavity)), std::span<const int>(sites_of(Kind::Cavity)));
      CHECK(overlap(cavs, tc) > 1.0 - 1e-6);
    }
    // Whole state at tau_off.
    Vector full = Vector::Zero(512);
    for (int a = 0; a < 8; ++a) full(a) = std::pow(kI, std::popcount(static_cast<unsigned>(a))) * psi(a);
    CHECK(overlap(states.at(kTauOff), full) > 1.0 - 1e-6);
  }
}

TEST_CASE("atomic purity oscillates at twice the Rabi frequency") {
  std::vector<double> samples;
  for (double t = kTauOff; t < kTauOff + 2.0 * kPi; t += 0.002) samples.push_back(t);
  const auto rows = run_scenario(scenario(InputStateSpec::w(), TimeGrid::at(samples)));
  std::vector<double> maxima;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    const double m = rows[i].values.at("mu_a");
    if (m > rows[i - 1].values.at("mu_a") && m >= rows[i + 1].values.at("mu_a") && m > 0.99) maxima.push_back(rows[i].tau);
  }
  REQUIRE(maxima.size() >= 3);
  for (std::size_t i = 1; i < maxima.size(); ++i) CHECK(std::abs(maxima[i] - maxima[i - 1] - kPi / 2) < 0.02);
  const auto mid = run_scenario(scenario(InputStateSpec::w(), TimeGrid::at({kTauOff + kPi / 4})));
  CHECK(mid[0].values.at("mu_a") < 1.0 - 1e-3);
}

TEST_CASE("dissipation sweep") {
  CHECK_THROWS_AS(dissipation_sweep(InputStateSpec::w(), RateKind::Cavity, {0.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(dissipation_sweep(InputStateSpec::w(), RateKind::Cavity, {0.0, -0.1, 0.1}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(dissipation_sweep(InputStateSpec::mixed(0.5), RateKind::Cavity, {0.0, 0.1, 0.2}, 0.0),
                  std::invalid_argument);

  const auto r = dissipation_sweep(InputStateSpec::w(), RateKind::Cavity, {0.0, 0.05, 0.1}, 0.0);
  CHECK(r.quantities.size() == sweep_quantities().size());
  for (const auto& name : r.quantities) {
    CHECK(r.peak_values.at(name).size() == 3);
    CHECK(std::isfinite(r.fits.at(name).decay));
    // Peak values fall with the loss rate and sit inside the search window.
    CHECK(r.peak_values.at(name)[2] < r.peak_values.at(name)[0]);
  }
  CHECK(r.peak_values.at("E_a0")[0] == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-6));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(r.peak_taus.at("E_c1")[i] - peak_time(1, PeakKind::Cavity)) <= kPeakWindow + 1e-12);
  }

  std::ostringstream out;
  write_sweep_csv(out, r);
  CHECK(out.str().rfind("row,quantity,rate,tau_peak,value,f0,decay,residual\npeak,F_a0,0,", 0) == 0);
  CHECK(out.str().find("\nfit,E_c1,,,,") != std::string::npos);

  for (const auto& name : r.quantities) CHECK(r.fits.at(name).n_points == 3);
  CHECK(r.warnings.empty());
}

TEST_CASE("classification map") {
  const double tau0 = peak_time(0, PeakKind::Atomic);
  const auto rows = classification_map({0.4, 0.2, 0.9, 0.6}, {tau0, 0.0}, Subsystem::Atoms);
  REQUIRE(rows.size() == 8);
  CHECK(std::is_sorted(rows.begin(), rows.end(),
                       [](const MapRow& a, const MapRow& b) { return std::tie(a.p, a.tau) < std::tie(b.p, b.tau); }));
  auto label_at = [&](double p, double tau) {
    for (const auto& r : rows) {
      if (r.p == p && r.tau == tau) return r.label;
    }
    FAIL("missing row");
    return ClassificationLabel::PptAll;
  };
  CHECK(label_at(0.2, tau0) == ClassificationLabel::WClass);
  CHECK(label_at(0.6, tau0) == ClassificationLabel::WClass);
  CHECK(label_at(0.9, tau0) == ClassificationLabel::GhzClass);
  const auto b = label_at(0.4, tau0);
  CHECK((b == ClassificationLabel::EntangledUnclassified || b == ClassificationLabel::PptAll));
  CHECK(label_at(0.9, 0.0) == ClassificationLabel::PptAll);

  SUBCASE("linearity shortcut matches a direct mixed-input run") {
    const auto direct = run_scenario(scenario(InputStateSpec::mixed(0.6), TimeGrid::at({tau0})));
    for (const auto& r : rows) {
      if (r.p == 0.6 && r.tau == tau0) CHECK(std::abs(r.tripartite - direct[0].values.at("E_a")) < 1e-10);
    }
  }
  SUBCASE("cavities show no genuine tripartite class during the transient") {
    std::vector<double> taus;
    for (double t = 0.0; t <= kTauOff; t += 0.02) taus.push_back(t);
    for (const auto& r : classification_map(default_p_grid(), taus, Subsystem::Cavities)) {
      CHECK(r.label != ClassificationLabel::GhzClass);
      CHECK(r.label != ClassificationLabel::WClass);
    }
  }
  SUBCASE("grids and csv") {
    CHECK(default_p_grid().size() == 101);
    const auto taus = default_map_tau_grid();
    CHECK(taus.size() == 600);
    CHECK(taus.back() == doctest::Approx(2.0 * kPi + kTauOff));
    CHECK_THROWS_AS(classification_map({}, {0.0}, Subsystem::Atoms), std::invalid_argument);
    CHECK_THROWS_AS(classification_map({1.5}, {0.0}, Subsystem::Atoms), std::invalid_argument);
    CHECK_THROWS_AS(classification_map({0.5}, {-1.0}, Subsystem::Atoms), std::invalid_argument);
    std::ostringstream out;
    write_map_csv(out, classification_map({0.5}, {0.0}, Subsystem::Atoms));
    CHECK(out.str() == "p,tau,E,class_label\n0.5,0,0,PPT\n");
  }
}

TEST_CASE("validation report") {
  const ValidationReport report = validate(true);
  CHECK(report.checks.size() >= 10);
  for (const auto& c : report.checks) {
    CAPTURE(c.name);
    CHECK(c.passed);
  }
  std::ostringstream out;
  write_report(out, report);
  CHECK(out.str().find("[PASS] factorized vs exact") != std::string::npos);
  ValidationReport bad = report;
  bad.checks.push_back({"forced", false, 1.0, 0.5});
  CHECK_FALSE(bad.all_passed());
}
