#pragma once

// Physical model: three input field modes f_J, three cavity modes c_J and
// three atoms, J = A, B, C. Fields and cavities are truncated to {|0>, |1>}.
// This is exact for inputs carrying at most one excitation per channel,
// since the coupling conserves the channel excitation number and the
// collapse operators only lower it.
//
// Units: hbar = 1 and time is tau = g t, so every rate is dimensionless.

#include <array>
#include <numbers>
#include <string>
#include <vector>

#include "cqed/tensor.hpp"

namespace cqed {

struct ModelParams {
  /// Atom-cavity coupling in units of the reference coupling g.
  double g_a = 1.0;
  /// Cavity-input coupling in units of g.
  double g_c = 1.0;
  /// Cavity decay rate k / g.
  double k_tilde = 0.0;
  /// Atomic spontaneous emission rate gamma / g.
  double gamma_tilde = 0.0;
  /// Drive turn-off time; the input field has fully entered the cavities
  /// after one Tavis-Cummings cycle at frequency sqrt(2).
  double tau_off = std::numbers::pi / std::numbers::sqrt2;

  void validate() const;
  bool lossless() const { return k_tilde == 0.0 && gamma_tilde == 0.0; }
};

/// Field preparation. The 8 amplitudes of a custom state are indexed by the
/// field qubits (f_A f_B f_C), f_A most significant.
struct InputStateSpec {
  enum class Variant { W, GHZ, MixedGHZW, CustomPure };

  Variant variant = Variant::W;
  double p = 0.0;
  std::array<Complex, 8> amplitudes{};

  static InputStateSpec w() { return {Variant::W}; }
  static InputStateSpec ghz() { return {Variant::GHZ}; }
  static InputStateSpec mixed(double p);
  static InputStateSpec custom(const std::array<Complex, 8>& amplitudes);

  void validate() const;
  bool is_pure() const;
  std::string label() const;
};

/// (|001> + |010> + |100>) / sqrt(3) on three qubits.
Vector w_state();
/// (|000> + |111>) / sqrt(2) on three qubits.
Vector ghz_state();

/// Three-qubit pure state named by a pure spec (the field part of the
/// input, and equally its image on atoms or cavities under |0> <-> |g>).
/// Rejects a proper mixture.
Vector three_qubit_state(const InputStateSpec& spec);

/// Three-qubit density matrix of the field preparation.
DensityMatrix field_density(const InputStateSpec& spec);

/// One stored entry of a sparse operator on the full space.
struct OperatorEntry {
  Eigen::Index row;
  Eigen::Index col;
  Complex value;
};

/// Nonzero entries of interaction_hamiltonian.
std::vector<OperatorEntry> interaction_entries(const ModelParams& params, bool drive_on);

/// Nonzero entries of each collapse operator, in collapse_operators() order;
/// a zero rate gives an empty list.
std::vector<std::vector<OperatorEntry>> collapse_entries(const ModelParams& params);

/// Diagonal entry of sum_k C_k^dag C_k at basis state x.
double loss_rate(Eigen::Index x, const ModelParams& params);

/// H^I / g as a 512x512 Hermitian matrix; the f-c terms are dropped when the
/// drive is off.
OperatorMatrix interaction_hamiltonian(const ModelParams& params, bool drive_on);

/// sqrt(k) c_A, sqrt(k) c_B, sqrt(k) c_C, sqrt(gamma) s_A, sqrt(gamma) s_B, sqrt(gamma) s_C.
std::vector<OperatorMatrix> collapse_operators(const ModelParams& params);

/// H^I / g - (i/2) sum_k C_k^dag C_k.
OperatorMatrix effective_hamiltonian(const ModelParams& params, bool drive_on);

/// Full 512-dim initial state: field per spec, cavities empty, atoms in |g>.
DensityMatrix initial_state(const InputStateSpec& spec);
/// Pure variant of initial_state; rejects a proper mixture.
StateVector initial_pure_state(const InputStateSpec& spec);

/// Embeds a three-qubit field state into the full space.
StateVector embed_field_state(const Vector& field_amplitudes);

/// Uniform local phase rotation exp(-i phi n) on each of three qubits:
/// diagonal with entry exp(-i phi * excitation count).
OperatorMatrix local_phase_rotation(double phi, Kind kind);

/// Diagonal of local_phase_rotation as a plain vector.
Vector phase_rotation_diagonal(double phi);

/// Per-channel excitation number f^dag f + c^dag c + s^dag s on channel J.
OperatorMatrix channel_excitation(Channel channel);

/// P rho P with P = (-1)^(total excitation number), a product of local
/// Z operators. Half a vacuum Rabi period after the drive is off acts as P.
DensityMatrix excitation_parity_conjugate(const DensityMatrix& rho);

/// Number operator of a single site.
OperatorMatrix number_operator(SiteIndex site);

/// Bit of the canonical basis index that holds `site`.
constexpr int site_bit(int site) { return kNumSites - 1 - site; }

}  // namespace cqed
