#pragma once

// Entanglement figures of merit for two- and three-qubit reduced states.
// Negativities use the doubled convention N = ||rho^T||_1 - 1, so a Bell
// pair and a GHZ state both score 1.

#include <string>

#include "cqed/model.hpp"
#include "cqed/tensor.hpp"

namespace cqed {

/// One qubit (position inside the reduced state) against the rest.
struct Bipartition {
  int side_one = 0;
};

double negativity(const DensityMatrix& rho, Bipartition cut = {});

/// Geometric mean of the three 1|23 negativities of a three-qubit state.
double tripartite_negativity(const DensityMatrix& rho);

double purity(const DensityMatrix& rho);

enum class FidelityFrame { Raw, BestPhase };

/// max over phi of <target| U_phi^dag rho U_phi |target>, U_phi the uniform
/// local phase rotation. phi runs over 256 grid points plus 0, +-pi/2, pi.
struct PhaseOverlap {
  double value;
  double phi;
};
PhaseOverlap best_phase_overlap(const DensityMatrix& rho, const Vector& target);

/// Overlap of a three-qubit state with the image of the (pure) input field
/// state. Rejects a proper GHZ/W mixture.
double fidelity_to_map(const DensityMatrix& rho, const InputStateSpec& input, FidelityFrame frame);

struct WitnessValues {
  /// 3/4 - |GHZ><GHZ|
  double w_g;
  /// 1/2 - |GHZ><GHZ|
  double w_w2;
  /// 2/3 - |W><W|
  double w_w1;
};

/// Tr[W rho] for the three witnesses; with frame_optimize each value is
/// minimized over the uniform local phase family.
WitnessValues witness_expectations(const DensityMatrix& rho, bool frame_optimize);

enum class ClassificationLabel { GhzClass, WClass, EntangledUnclassified, PptAll };

std::string to_string(ClassificationLabel label);

/// GhzClass if W_G < -tol, else WClass if W_W1 or W_W2 < -tol (both frame
/// optimized), else EntangledUnclassified if the tripartite negativity
/// exceeds tol, else PptAll.
ClassificationLabel classify(const DensityMatrix& rho, double tol = 1e-9);
ClassificationLabel classify(const WitnessValues& optimized, double tripartite, double tol = 1e-9);

}  // namespace cqed
