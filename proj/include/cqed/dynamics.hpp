#pragma once

// Time evolution of the open system.
//
//  - lindblad_exact: RK4 integration of the master equation on the full
//    512-dim space. This is the reference every other route is checked
//    against.
//  - factorized_evolution: the Liouvillian is a sum of commuting
//    single-channel generators, so the evolution map is E^{(x)3} with E
//    acting on one 8-dim channel (a 64x64 superoperator).
//  - mcwf_trajectory / mcwf_ensemble: Monte Carlo wave-function unraveling.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cqed/model.hpp"
#include "cqed/tensor.hpp"
#include "cqed/time_grid.hpp"

namespace cqed {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Read access to the state at one sample time; implementations may hold
/// the full density matrix or compute reductions directly.
class StateView {
 public:
  virtual ~StateView() = default;
  virtual DensityMatrix reduced(std::span<const int> keep) const = 0;
  virtual DensityMatrix full() const = 0;
  DensityMatrix reduced(std::initializer_list<int> keep) const {
    return reduced(std::span<const int>(keep.begin(), keep.size()));
  }
};

class FullStateView final : public StateView {
 public:
  explicit FullStateView(const DensityMatrix& rho) : rho_(rho) {}
  DensityMatrix reduced(std::span<const int> keep) const override;
  DensityMatrix full() const override { return rho_; }
  using StateView::reduced;

 private:
  const DensityMatrix& rho_;
};

using DensitySink = std::function<void(double tau, const DensityMatrix& rho)>;
using ViewSink = std::function<void(double tau, const StateView& state)>;

// --- exact master equation --------------------------------------------------

/// Smallest set of basis states containing the support of rho0 that is
/// mapped into itself by H (drive on or off) and every collapse operator.
/// The state stays supported on S x S for all times. Sorted ascending.
std::vector<Eigen::Index> invariant_support(const DensityMatrix& rho0, const ModelParams& params);
/// Same closure starting from a set of basis states.
std::vector<Eigen::Index> invariant_support(std::vector<Eigen::Index> seed, const ModelParams& params);

struct ExactOptions {
  /// Integrate only the S x S block of invariant_support(). Exact; turning
  /// it off integrates all 512 x 512 entries.
  bool restrict_to_support = true;
};

/// d rho / d tau = -i[H, rho] + sum_k (C_k rho C_k^dag - {C_k^dag C_k, rho}/2),
/// classical RK4 with step grid.dt, split exactly at tau_off. The state is
/// symmetrized at every sample. Throws IntegrationError when the trace
/// drifts by more than 1e-6 or the state becomes non-finite.
void lindblad_exact(const DensityMatrix& rho0, const ModelParams& params, const TimeGrid& grid,
                    const DensitySink& sink, const ExactOptions& options = {});
std::map<double, DensityMatrix> lindblad_exact(const DensityMatrix& rho0, const ModelParams& params,
                                               const TimeGrid& grid, const ExactOptions& options = {});

// --- channel-factorized fast path -------------------------------------------

/// Single-channel Liouvillian and propagators. Channel basis index is
/// f*4 + c*2 + a; superoperators act on column-stacked 8x8 matrices.
class ChannelPropagator {
 public:
  explicit ChannelPropagator(const ModelParams& params);

  const Matrix& liouvillian(bool drive_on) const { return drive_on ? l_on_ : l_off_; }
  /// exp(L_on * min(tau, tau_off)) followed by exp(L_off * (tau - tau_off)).
  Matrix channel_map(double tau) const;
  /// exp(L * h) for the given phase.
  Matrix step(double h, bool drive_on) const;
  const ModelParams& params() const { return params_; }

 private:
  ModelParams params_;
  Matrix l_on_;
  Matrix l_off_;
};

/// rho0 in channel-grouped coordinates, stored by its nonzero entries.
class ChannelDecomposedState {
 public:
  explicit ChannelDecomposedState(const DensityMatrix& rho0);
  struct Entry {
    std::array<int, 3> row;  // channel-local indices for A, B, C
    std::array<int, 3> col;
    Complex value;
  };
  const std::vector<Entry>& entries() const { return entries_; }
  const DensityMatrix& original() const { return rho0_; }

 private:
  DensityMatrix rho0_;
  std::vector<Entry> entries_;
};

/// State E^{(x)3}(rho0) for a given 64x64 channel map, evaluated lazily.
class FactorizedStateView final : public StateView {
 public:
  FactorizedStateView(std::shared_ptr<const ChannelDecomposedState> rho0, Matrix channel_map);
  DensityMatrix reduced(std::span<const int> keep) const override;
  DensityMatrix full() const override;
  using StateView::reduced;

 private:
  std::shared_ptr<const ChannelDecomposedState> rho0_;
  Matrix map_;
};

void factorized_evolution(const DensityMatrix& rho0, const ModelParams& params, const TimeGrid& grid,
                          const ViewSink& sink);
void factorized_evolution(const DensityMatrix& rho0, const ModelParams& params, const TimeGrid& grid,
                          const DensitySink& sink);
std::map<double, DensityMatrix> factorized_evolution(const DensityMatrix& rho0, const ModelParams& params,
                                                     const TimeGrid& grid);

// --- Monte Carlo wave function ----------------------------------------------

struct JumpRecord {
  double tau;
  /// Index into collapse_operators(): 0..2 cavities A..C, 3..5 atoms A..C.
  int channel;
};

struct TrajectoryResult {
  std::map<double, StateVector> states;
  std::vector<JumpRecord> jumps;
};

/// One trajectory with a first-order jump test per step: with probability
/// dt * sum_k <C_k^dag C_k> a jump C_k psi / |C_k psi| happens (k drawn
/// proportionally to its rate), otherwise psi evolves under exp(-i H_e dt)
/// and is renormalized. Rejects dt * max total jump rate >= 0.1.
TrajectoryResult mcwf_trajectory(const StateVector& psi0, const ModelParams& params, const TimeGrid& grid,
                                 std::uint64_t seed);

struct TrajectoryEnsembleResult {
  std::vector<double> sample_times;
  /// Basis states the ensemble can populate; the averaged density matrix
  /// vanishes outside support x support.
  std::vector<Eigen::Index> support;
  /// Averaged density matrix restricted to the support, one per sample.
  std::vector<Matrix> compact_rho;
  int n_trajectories = 0;
  /// Standard error of the mean per observable, one entry per sample time.
  /// Keys: N_c, N_f, p_e (channel means), F_ghz_a, F_w_a (raw-frame atomic
  /// overlaps with GHZ and W).
  std::map<std::string, std::vector<double>> std_errors;

  DensityMatrix rho_at_index(std::size_t k) const;
  DensityMatrix rho_at(double tau) const;
  std::size_t index_of(double tau) const;
};

struct EnsembleOptions {
  /// 0 picks std::thread::hardware_concurrency().
  unsigned workers = 0;
  /// Trajectories per reduction chunk. Results do not depend on the number
  /// of workers, only on this value.
  int chunk_size = 32;
};

/// Averages n_traj trajectories; trajectory i uses seed base_seed + i. For
/// a GHZ/W mixture each trajectory starts in GHZ with probability p.
TrajectoryEnsembleResult mcwf_ensemble(const InputStateSpec& spec, const ModelParams& params, const TimeGrid& grid,
                                       int n_traj, std::uint64_t base_seed, const EnsembleOptions& options = {});

/// Clips eigenvalues in (-1e-6, 0) to zero and renormalizes; larger negative
/// eigenvalues are left alone and reported by the caller.
DensityMatrix repair_positivity(const DensityMatrix& rho, double clip = 1e-6);

}  // namespace cqed
