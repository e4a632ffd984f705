#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cqed/metrics.hpp"
#include "support.hpp"

using namespace cqed;
using cqed::testing::kron;

namespace {

const auto q2 = HilbertSpace::qubits(2);
const auto q3 = HilbertSpace::qubits(3);

DensityMatrix pure3(const Vector& v) { return DensityMatrix::pure(StateVector(q3, v)); }

Matrix projector(const Vector& v) { return v * v.adjoint(); }

Matrix local3(const Matrix& a, const Matrix& b, const Matrix& c) { return kron(a, kron(b, c)); }

DensityMatrix mixture(double p) {
  return {q3, p * projector(ghz_state()) + (1.0 - p) * projector(w_state())};
}

}  // namespace

TEST_CASE("negativity") {
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  CHECK(negativity(DensityMatrix::pure(StateVector(q2, bell))) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(negativity(DensityMatrix::pure(StateVector(q2, bell)), {1}) == doctest::Approx(1.0).epsilon(1e-12));

  const DensityMatrix w2 = partial_trace(pure3(w_state()), {0, 1});
  CHECK(negativity(w2) == doctest::Approx((std::sqrt(5.0) - 1.0) / 3.0).epsilon(1e-12));

  std::mt19937_64 rng(4);
  const DensityMatrix product(q2, kron(cqed::testing::random_density(rng, 2, 2), cqed::testing::random_density(rng, 2, 1)));
  CHECK(negativity(product) == 0.0);
  CHECK_THROWS(negativity(product, {2}));

  SUBCASE("invariant under local unitaries") {
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix rho = cqed::testing::random_density(rng, 8, 2);
      const Matrix u = local3(cqed::testing::random_unitary_2x2(rng), cqed::testing::random_unitary_2x2(rng),
                              cqed::testing::random_unitary_2x2(rng));
      const DensityMatrix a(q3, rho);
      const DensityMatrix b(q3, u * rho * u.adjoint());
      for (int cut = 0; cut < 3; ++cut) CHECK(std::abs(negativity(a, {cut}) - negativity(b, {cut})) < 1e-10);
    }
  }
}

TEST_CASE("tripartite negativity") {
  CHECK(tripartite_negativity(pure3(ghz_state())) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tripartite_negativity(pure3(w_state())) == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-12));
  CHECK(tripartite_negativity(pure3(Vector::Unit(8, 0))) == 0.0);

  SUBCASE("zero on states that are PPT across a cut") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      // qubit k | entangled pair, for each k
      const int k = trial % 3;
      const Matrix single = cqed::testing::random_density(rng, 2, 2);
      const Matrix pair = cqed::testing::random_density(rng, 4, 1);
      Matrix rho = kron(single, pair);
      if (k != 0) {
        // Permute qubit 0 into slot k.
        Matrix perm = Matrix::Zero(8, 8);
        for (int x = 0; x < 8; ++x) {
          int bits[3] = {(x >> 2) & 1, (x >> 1) & 1, x & 1};
          std::swap(bits[0], bits[k]);
          perm((bits[0] << 2) | (bits[1] << 1) | bits[2], x) = 1.0;
        }
        rho = perm * rho * perm.adjoint();
      }
      const DensityMatrix r(q3, rho);
      CHECK(negativity(r, {k}) < 1e-12);
      CHECK(tripartite_negativity(r) == 0.0);
    }
  }
}

TEST_CASE("purity") {
  CHECK(purity(pure3(w_state())) == doctest::Approx(1.0));
  CHECK(purity(DensityMatrix(q3, Matrix::Identity(8, 8) / 8.0)) == doctest::Approx(0.125));
}

TEST_CASE("fidelity frames") {
  const Matrix u = local_phase_rotation(-std::numbers::pi / 2, Kind::Atom).entries();
  SUBCASE("W image is a global phase away") {
    const DensityMatrix rho = pure3(u * w_state());
    CHECK(fidelity_to_map(rho, InputStateSpec::w(), FidelityFrame::Raw) == doctest::Approx(1.0));
  }
  SUBCASE("GHZ image needs the phase frame") {
    const DensityMatrix rho = pure3(u * ghz_state());
    CHECK(fidelity_to_map(rho, InputStateSpec::ghz(), FidelityFrame::Raw) == doctest::Approx(0.5));
    CHECK(fidelity_to_map(rho, InputStateSpec::ghz(), FidelityFrame::BestPhase) == doctest::Approx(1.0).epsilon(1e-12));
    const PhaseOverlap best = best_phase_overlap(rho, ghz_state());
    CHECK(std::abs(std::remainder(3.0 * best.phi + 3.0 * std::numbers::pi / 2, 2.0 * std::numbers::pi)) < 1e-9);
  }
  SUBCASE("target projector scores one in both frames") {
    std::array<Complex, 8> amps{};
    amps[1] = 0.6;
    amps[6] = Complex(0.0, 0.8);
    const auto spec = InputStateSpec::custom(amps);
    const DensityMatrix rho = pure3(three_qubit_state(spec));
    CHECK(fidelity_to_map(rho, spec, FidelityFrame::Raw) == doctest::Approx(1.0));
    CHECK(fidelity_to_map(rho, spec, FidelityFrame::BestPhase) == doctest::Approx(1.0));
  }
  SUBCASE("best frame is the maximum over the phase grid, never below raw") {
    // Brute force over the same candidates: 256 grid points plus 0, +-pi/2, pi.
    auto brute = [](const DensityMatrix& rho, const Vector& t) {
      std::vector<double> phis{0.0, std::numbers::pi / 2, -std::numbers::pi / 2, std::numbers::pi};
      for (int k = 0; k < 256; ++k) phis.push_back(-std::numbers::pi + 2.0 * std::numbers::pi * k / 256);
      double best = -1.0;
      for (double phi : phis) {
        const Vector v = local_phase_rotation(phi, Kind::Atom).entries() * t;
        best = std::max(best, (v.adjoint() * rho.entries() * v)(0, 0).real());
      }
      return best;
    };
    std::mt19937_64 rng(10);
    const DensityMatrix rotated = pure3(local_phase_rotation(0.123, Kind::Atom).entries() * ghz_state());
    const double f = fidelity_to_map(rotated, InputStateSpec::ghz(), FidelityFrame::BestPhase);
    CHECK(std::abs(f - brute(rotated, ghz_state())) < 1e-12);
    // Grid spacing bounds the loss for an off-grid phase.
    CHECK(f > std::pow(std::cos(3.0 * std::numbers::pi / 256 / 2), 2) - 1e-12);
    for (int trial = 0; trial < 20; ++trial) {
      const DensityMatrix rho(q3, cqed::testing::random_density(rng, 8, 3));
      const double best = fidelity_to_map(rho, InputStateSpec::ghz(), FidelityFrame::BestPhase);
      CHECK(best >= fidelity_to_map(rho, InputStateSpec::ghz(), FidelityFrame::Raw) - 1e-15);
      CHECK(std::abs(best - brute(rho, ghz_state())) < 1e-12);
    }
  }
  CHECK_THROWS_AS(fidelity_to_map(mixture(0.5), InputStateSpec::mixed(0.5), FidelityFrame::Raw), std::invalid_argument);
}

TEST_CASE("witnesses") {
  const WitnessValues g = witness_expectations(pure3(ghz_state()), false);
  CHECK(g.w_g == doctest::Approx(-0.25));
  CHECK(g.w_w2 == doctest::Approx(-0.5));
  const WitnessValues w = witness_expectations(pure3(w_state()), false);
  CHECK(w.w_w1 == doctest::Approx(-1.0 / 3.0));
  CHECK(w.w_g == doctest::Approx(0.75));
  for (double p : {0.0, 0.2, 0.5, 0.74, 0.76, 1.0}) {
    CHECK(witness_expectations(mixture(p), false).w_g == doctest::Approx(0.75 - p));
  }

  SUBCASE("frame optimization never increases a witness") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
      const DensityMatrix rho(q3, cqed::testing::random_density(rng, 8, 1 + trial % 4));
      const WitnessValues raw = witness_expectations(rho, false);
      const WitnessValues opt = witness_expectations(rho, true);
      CHECK(opt.w_g <= raw.w_g + 1e-15);
      CHECK(opt.w_w1 <= raw.w_w1 + 1e-15);
      CHECK(opt.w_w2 <= raw.w_w2 + 1e-15);
    }
  }
  SUBCASE("sound on fully separable states") {
    std::mt19937_64 rng(14);
    double worst = 1.0;
    for (int trial = 0; trial < 10000; ++trial) {
      const Vector v = kron(cqed::testing::random_vector(rng, 2),
                            kron(cqed::testing::random_vector(rng, 2), cqed::testing::random_vector(rng, 2)));
      const WitnessValues opt = witness_expectations(pure3(v), true);
      worst = std::min({worst, opt.w_g, opt.w_w1, opt.w_w2});
    }
    CHECK(worst >= 0.0);
  }
}

TEST_CASE("classification") {
  CHECK(classify(pure3(ghz_state())) == ClassificationLabel::GhzClass);
  CHECK(classify(pure3(w_state())) == ClassificationLabel::WClass);
  CHECK(classify(pure3(Vector::Unit(8, 0))) == ClassificationLabel::PptAll);
  CHECK(to_string(ClassificationLabel::EntangledUnclassified) == "ENT");

  // Mixtures in the mapped atomic frame, as they appear at tau_m.
  const Matrix u = local_phase_rotation(-std::numbers::pi / 2, Kind::Atom).entries();
  auto at_peak = [&](double p) { return DensityMatrix(q3, u * mixture(p).entries() * u.adjoint()); };
  CHECK(classify(at_peak(0.9)) == ClassificationLabel::GhzClass);
  CHECK(classify(at_peak(0.2)) == ClassificationLabel::WClass);
  CHECK(classify(at_peak(0.6)) == ClassificationLabel::WClass);
  const auto b = classify(at_peak(0.4));
  CHECK((b == ClassificationLabel::EntangledUnclassified || b == ClassificationLabel::PptAll));

  // Label precedence on synthetic witness values.
  CHECK(classify(WitnessValues{-1e-3, -1e-3, -1e-3}, 0.5) == ClassificationLabel::GhzClass);
  CHECK(classify(WitnessValues{1e-3, 1e-3, -1e-3}, 0.5) == ClassificationLabel::WClass);
  CHECK(classify(WitnessValues{1e-3, -1e-3, 1e-3}, 0.5) == ClassificationLabel::WClass);
  CHECK(classify(WitnessValues{1e-3, 1e-3, 1e-3}, 0.5) == ClassificationLabel::EntangledUnclassified);
  CHECK(classify(WitnessValues{1e-3, 1e-3, 1e-3}, 0.0) == ClassificationLabel::PptAll);
  CHECK(classify(WitnessValues{-1e-3, 1e-3, 1e-3}, 0.5, 1e-2) == ClassificationLabel::EntangledUnclassified);
}
