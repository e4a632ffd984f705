#include "cqed/metrics.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace cqed {

namespace {

constexpr double kEigenCutoff = 1e-12;
constexpr int kPhaseGrid = 256;

int qubit_count(const DensityMatrix& rho) {
  const Eigen::Index d = rho.dim();
  if (d != 4 && d != 8) throw std::invalid_argument(fmt::format("expected a 2- or 3-qubit state, got dimension {}", d));
  return d == 4 ? 2 : 3;
}

void require_three_qubits(const DensityMatrix& rho) {
  if (rho.dim() != 8) throw std::invalid_argument(fmt::format("expected a 3-qubit state, got dimension {}", rho.dim()));
}

// Coefficients c_d, d = -3..3, of  <t| U_phi^dag rho U_phi |t> = sum_d c_d e^{i phi d}.
std::array<Complex, 7> phase_harmonics(const Matrix& rho, const Vector& t) {
  std::array<Complex, 7> c{};
  for (int x = 0; x < 8; ++x) {
    for (int y = 0; y < 8; ++y) {
      const int d = std::popcount(static_cast<unsigned>(x)) - std::popcount(static_cast<unsigned>(y));
      c[d + 3] += std::conj(t(x)) * rho(x, y) * t(y);
    }
  }
  return c;
}

double eval_harmonics(const std::array<Complex, 7>& c, double phi) {
  Complex s{};
  for (int d = -3; d <= 3; ++d) s += c[d + 3] * std::exp(kI * (phi * d));
  return s.real();
}

}  // namespace

double negativity(const DensityMatrix& rho, Bipartition cut) {
  const int n = qubit_count(rho);
  if (cut.side_one < 0 || cut.side_one >= n) {
    throw std::invalid_argument(fmt::format("cut qubit {} out of range", cut.side_one));
  }
  const int sites[] = {cut.side_one};
  Matrix pt = partial_transpose(rho, sites).entries();
  pt = 0.5 * (pt + pt.adjoint()).eval();
  const Eigen::SelfAdjointEigenSolver<Matrix> es(pt, Eigen::EigenvaluesOnly);
  double neg = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) < -kEigenCutoff) neg -= es.eigenvalues()(i);
  }
  return 2.0 * neg;
}

double tripartite_negativity(const DensityMatrix& rho) {
  require_three_qubits(rho);
  double prod = 1.0;
  for (int q = 0; q < 3; ++q) {
    const double v = negativity(rho, {q});
    if (v == 0.0) return 0.0;
    prod *= v;
  }
  return std::cbrt(prod);
}

double purity(const DensityMatrix& rho) { return (rho.entries() * rho.entries()).trace().real(); }

PhaseOverlap best_phase_overlap(const DensityMatrix& rho, const Vector& target) {
  require_three_qubits(rho);
  const auto c = phase_harmonics(rho.entries(), target);
  PhaseOverlap best{eval_harmonics(c, 0.0), 0.0};
  auto consider = [&](double phi) {
    const double v = eval_harmonics(c, phi);
    if (v > best.value) best = {v, phi};
  };
  constexpr double pi = std::numbers::pi;
  for (double phi : {pi / 2, -pi / 2, pi}) consider(phi);
  for (int k = 1; k < kPhaseGrid; ++k) consider(-pi + 2.0 * pi * k / kPhaseGrid);
  return best;
}

double fidelity_to_map(const DensityMatrix& rho, const InputStateSpec& input, FidelityFrame frame) {
  require_three_qubits(rho);
  const Vector target = three_qubit_state(input);
  if (frame == FidelityFrame::BestPhase) return best_phase_overlap(rho, target).value;
  return (target.adjoint() * rho.entries() * target)(0, 0).real();
}

WitnessValues witness_expectations(const DensityMatrix& rho, bool frame_optimize) {
  require_three_qubits(rho);
  const Vector ghz = ghz_state();
  const Vector w = w_state();
  double f_ghz;
  double f_w;
  if (frame_optimize) {
    f_ghz = best_phase_overlap(rho, ghz).value;
    f_w = best_phase_overlap(rho, w).value;
  } else {
    f_ghz = (ghz.adjoint() * rho.entries() * ghz)(0, 0).real();
    f_w = (w.adjoint() * rho.entries() * w)(0, 0).real();
  }
  return {0.75 - f_ghz, 0.5 - f_ghz, 2.0 / 3.0 - f_w};
}

std::string to_string(ClassificationLabel label) {
  switch (label) {
    case ClassificationLabel::GhzClass: return "GHZ";
    case ClassificationLabel::WClass: return "W";
    case ClassificationLabel::EntangledUnclassified: return "ENT";
    case ClassificationLabel::PptAll: return "PPT";
  }
  return "?";
}

ClassificationLabel classify(const WitnessValues& optimized, double tripartite, double tol) {
  if (optimized.w_g < -tol) return ClassificationLabel::GhzClass;
  if (optimized.w_w1 < -tol || optimized.w_w2 < -tol) return ClassificationLabel::WClass;
  if (tripartite > tol) return ClassificationLabel::EntangledUnclassified;
  return ClassificationLabel::PptAll;
}

ClassificationLabel classify(const DensityMatrix& rho, double tol) {
  return classify(witness_expectations(rho, true), tripartite_negativity(rho), tol);
}

}  // namespace cqed
