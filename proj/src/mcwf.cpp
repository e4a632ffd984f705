#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "cqed/dynamics.hpp"

namespace cqed {

namespace {

constexpr double kSampleTol = 1e-9;
constexpr double kMaxJumpProbability = 0.1;

struct JumpTerm {
  Eigen::Index dst;
  Eigen::Index src;
  Complex coeff;
};

struct CompactJump {
  int channel;  // index into collapse_operators()
  std::vector<JumpTerm> terms;
};

// No-jump propagators and jump operators restricted to an invariant support.
// Immutable after construction, so one engine serves every worker.
class TrajectoryEngine {
 public:
  TrajectoryEngine(const ModelParams& params, std::vector<Eigen::Index> support, const std::vector<double>& points)
      : params_(params), support_(std::move(support)), points_(points) {
    const auto m = static_cast<Eigen::Index>(support_.size());
    std::vector<Eigen::Index> local(HilbertSpace::full_system().total_dim(), -1);
    for (Eigen::Index i = 0; i < m; ++i) local[support_[i]] = i;
    auto effective = [&](bool on) {
      Matrix h = Matrix::Zero(m, m);
      for (const auto& e : interaction_entries(params, on)) {
        if (local[e.col] >= 0 && local[e.row] >= 0) h(local[e.row], local[e.col]) += e.value;
      }
      for (Eigen::Index i = 0; i < m; ++i) h(i, i) -= 0.5 * kI * loss_rate(support_[i], params);
      return h;
    };
    const Matrix h_on = effective(true);
    const Matrix h_off = effective(false);
    const auto ops = collapse_entries(params);
    for (std::size_t k = 0; k < ops.size(); ++k) {
      CompactJump jump{static_cast<int>(k), {}};
      for (const auto& e : ops[k]) {
        if (local[e.col] >= 0 && local[e.row] >= 0) jump.terms.push_back({local[e.row], local[e.col], e.value});
      }
      if (!jump.terms.empty()) jumps_.push_back(std::move(jump));
    }
    steps_.reserve(points_.size());
    for (std::size_t n = 1; n < points_.size(); ++n) {
      const double h = points_[n] - points_[n - 1];
      const bool on = points_[n] <= params.tau_off + kSampleTol;
      const auto key = std::make_pair(h, on);
      auto it = propagators_.find(key);
      if (it == propagators_.end()) {
        it = propagators_.emplace(key, Matrix((-kI * h * (on ? h_on : h_off)).exp())).first;
      }
      steps_.push_back(&it->second);
    }
  }

  const std::vector<Eigen::Index>& support() const { return support_; }

  Vector compress(const Vector& full) const {
    Vector out(static_cast<Eigen::Index>(support_.size()));
    for (std::size_t i = 0; i < support_.size(); ++i) out(static_cast<Eigen::Index>(i)) = full(support_[i]);
    return out;
  }

  // Runs one trajectory; on_sample(sample index, psi) gets the compact state.
  template <class F>
  void run(Vector psi, const std::vector<double>& samples, std::mt19937_64& rng, std::vector<JumpRecord>* jumps,
           F&& on_sample) const {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::size_t next = 0;
    Vector tmp(psi.size());
    std::vector<double> weights(jumps_.size());
    auto emit = [&](double tau) {
      while (next < samples.size() && std::abs(samples[next] - tau) < kSampleTol) on_sample(next++, psi);
    };
    emit(points_.front());
    for (std::size_t n = 1; n < points_.size(); ++n) {
      const double h = points_[n] - points_[n - 1];
      double total = 0.0;
      for (std::size_t k = 0; k < jumps_.size(); ++k) {
        double w = 0.0;
        for (const auto& t : jumps_[k].terms) w += std::norm(t.coeff * psi(t.src));
        weights[k] = w;
        total += w;
      }
      const double r = uniform(rng);
      if (r < h * total) {
        // Pick the channel with probability proportional to its rate.
        double target = r / h;
        std::size_t k = 0;
        while (k + 1 < jumps_.size() && target >= weights[k]) target -= weights[k++];
        tmp.setZero();
        for (const auto& t : jumps_[k].terms) tmp(t.dst) += t.coeff * psi(t.src);
        psi = tmp / tmp.norm();
        if (jumps != nullptr) jumps->push_back({points_[n], jumps_[k].channel});
      } else {
        tmp.noalias() = *steps_[n - 1] * psi;
        psi = tmp / tmp.norm();
      }
      emit(points_[n]);
    }
  }

 private:
  ModelParams params_;
  std::vector<Eigen::Index> support_;
  std::vector<double> points_;
  std::vector<CompactJump> jumps_;
  std::map<std::pair<double, bool>, Matrix> propagators_;
  std::vector<const Matrix*> steps_;
};

void check_step(const ModelParams& params, const TimeGrid& grid) {
  const double max_rate = 3.0 * params.k_tilde + 3.0 * params.gamma_tilde;
  if (grid.dt * max_rate >= kMaxJumpProbability) {
    throw std::invalid_argument(
        fmt::format("dt * total jump rate = {:.3g} must stay below {}; reduce dt", grid.dt * max_rate,
                    kMaxJumpProbability));
  }
}

// Per-chunk running sums; merged in chunk order.
struct ChunkSums {
  std::vector<Matrix> rho;
  std::map<std::string, std::vector<double>> sum;
  std::map<std::string, std::vector<double>> sum_sq;
};

const char* const kObservables[] = {"N_c", "N_f", "p_e", "F_ghz_a", "F_w_a"};

}  // namespace

TrajectoryResult mcwf_trajectory(const StateVector& psi0, const ModelParams& params, const TimeGrid& grid,
                                 std::uint64_t seed) {
  params.validate();
  grid.validate();
  check_step(params, grid);
  if (!(psi0.space() == HilbertSpace::full_system())) {
    throw std::invalid_argument("mcwf_trajectory expects a state on the full nine-site space");
  }
  std::vector<Eigen::Index> occupied;
  for (Eigen::Index x = 0; x < psi0.amplitudes().size(); ++x) {
    if (psi0.amplitudes()(x) != Complex{}) occupied.push_back(x);
  }
  const TrajectoryEngine engine(params, invariant_support(std::move(occupied), params),
                                integration_points(grid, params.tau_off));
  std::mt19937_64 rng(seed);
  TrajectoryResult result;
  const auto& support = engine.support();
  engine.run(engine.compress(psi0.amplitudes()), grid.sample_times, rng, &result.jumps,
             [&](std::size_t k, const Vector& psi) {
               Vector full = Vector::Zero(psi0.space().total_dim());
               for (std::size_t i = 0; i < support.size(); ++i) full(support[i]) = psi(static_cast<Eigen::Index>(i));
               result.states.emplace(grid.sample_times[k], StateVector::normalized(psi0.space(), std::move(full)));
             });
  return result;
}

TrajectoryEnsembleResult mcwf_ensemble(const InputStateSpec& spec, const ModelParams& params, const TimeGrid& grid,
                                       int n_traj, std::uint64_t base_seed, const EnsembleOptions& options) {
  params.validate();
  grid.validate();
  spec.validate();
  check_step(params, grid);
  if (n_traj < 1) throw std::invalid_argument("need at least one trajectory");
  if (options.chunk_size < 1) throw std::invalid_argument("chunk size must be positive");

  // One engine per pure starting state (two for a GHZ/W mixture).
  const auto points = integration_points(grid, params.tau_off);
  std::vector<StateVector> starts;
  if (spec.is_pure()) {
    starts.push_back(initial_pure_state(spec));
  } else {
    starts.push_back(initial_pure_state(InputStateSpec::ghz()));
    starts.push_back(initial_pure_state(InputStateSpec::w()));
  }
  std::vector<TrajectoryEngine> engines;
  std::vector<Vector> start_compact;
  std::vector<char> in_support(512, 0);
  for (const auto& s : starts) {
    engines.emplace_back(params, invariant_support(DensityMatrix::pure(s), params), points);
    start_compact.push_back(engines.back().compress(s.amplitudes()));
    for (Eigen::Index x : engines.back().support()) in_support[x] = 1;
  }
  TrajectoryEnsembleResult result;
  result.sample_times = grid.sample_times;
  result.n_trajectories = n_traj;
  for (Eigen::Index x = 0; x < 512; ++x) {
    if (in_support[x]) result.support.push_back(x);
  }
  const auto m = static_cast<Eigen::Index>(result.support.size());
  const std::size_t n_samples = grid.sample_times.size();

  // Position of every engine-local index inside the ensemble support, and
  // the per-basis-state observable weights.
  std::vector<std::vector<Eigen::Index>> slot(engines.size());
  for (std::size_t e = 0; e < engines.size(); ++e) {
    for (Eigen::Index x : engines[e].support()) {
      slot[e].push_back(std::lower_bound(result.support.begin(), result.support.end(), x) - result.support.begin());
    }
  }
  auto bit_count = [](Eigen::Index x, Kind kind) {
    int n = 0;
    for (int pos : sites_of(kind)) n += static_cast<int>((x >> site_bit(pos)) & 1);
    return n / 3.0;
  };
  const Vector ghz = ghz_state();
  const Vector w = w_state();

  auto observe = [&](std::size_t e, const Vector& psi, std::array<double, 5>& out) {
    out.fill(0.0);
    // Group amplitudes by the non-atomic part of the index for the atomic
    // overlaps; atoms are the three lowest bits.
    std::array<std::array<Complex, 8>, 64> by_rest{};
    const auto& sup = engines[e].support();
    for (std::size_t i = 0; i < sup.size(); ++i) {
      const Complex a = psi(static_cast<Eigen::Index>(i));
      const double p = std::norm(a);
      out[0] += p * bit_count(sup[i], Kind::Cavity);
      out[1] += p * bit_count(sup[i], Kind::Field);
      out[2] += p * bit_count(sup[i], Kind::Atom);
      by_rest[sup[i] >> 3][sup[i] & 7] += a;
    }
    for (const auto& amp : by_rest) {
      Complex og{}, ow{};
      for (int a = 0; a < 8; ++a) {
        og += std::conj(ghz(a)) * amp[a];
        ow += std::conj(w(a)) * amp[a];
      }
      out[3] += std::norm(og);
      out[4] += std::norm(ow);
    }
  };

  const int chunk = options.chunk_size;
  const int n_chunks = (n_traj + chunk - 1) / chunk;
  auto run_chunk = [&](int c) {
    ChunkSums sums;
    sums.rho.assign(n_samples, Matrix::Zero(m, m));
    for (const char* key : kObservables) {
      sums.sum[key].assign(n_samples, 0.0);
      sums.sum_sq[key].assign(n_samples, 0.0);
    }
    const int end = std::min(n_traj, (c + 1) * chunk);
    for (int i = c * chunk; i < end; ++i) {
      std::mt19937_64 rng(base_seed + static_cast<std::uint64_t>(i));
      std::size_t e = 0;
      if (!spec.is_pure()) e = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < spec.p ? 0 : 1;
      const auto& sl = slot[e];
      engines[e].run(start_compact[e], grid.sample_times, rng, nullptr, [&](std::size_t k, const Vector& psi) {
        Matrix& r = sums.rho[k];
        const auto d = static_cast<Eigen::Index>(sl.size());
        for (Eigen::Index b = 0; b < d; ++b) {
          const Complex cb = std::conj(psi(b));
          if (cb == Complex{}) continue;
          for (Eigen::Index a = 0; a < d; ++a) r(sl[a], sl[b]) += psi(a) * cb;
        }
        std::array<double, 5> obs{};
        observe(e, psi, obs);
        for (int q = 0; q < 5; ++q) {
          sums.sum[kObservables[q]][k] += obs[q];
          sums.sum_sq[kObservables[q]][k] += obs[q] * obs[q];
        }
      });
    }
    return sums;
  };

  ChunkSums total;
  total.rho.assign(n_samples, Matrix::Zero(m, m));
  for (const char* key : kObservables) {
    total.sum[key].assign(n_samples, 0.0);
    total.sum_sq[key].assign(n_samples, 0.0);
  }
  auto merge = [&](const ChunkSums& s) {
    for (std::size_t k = 0; k < n_samples; ++k) total.rho[k] += s.rho[k];
    for (const char* key : kObservables) {
      for (std::size_t k = 0; k < n_samples; ++k) {
        total.sum[key][k] += s.sum.at(key)[k];
        total.sum_sq[key][k] += s.sum_sq.at(key)[k];
      }
    }
  };

  unsigned workers = options.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.workers;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n_chunks));
  if (workers <= 1) {
    for (int c = 0; c < n_chunks; ++c) merge(run_chunk(c));
  } else {
    // Chunks finish out of order; they are merged strictly in chunk order.
    std::atomic<int> next_chunk{0};
    std::mutex mutex;
    std::map<int, ChunkSums> pending;
    int next_merge = 0;
    std::exception_ptr error;
    auto worker = [&] {
      try {
        for (int c = next_chunk++; c < n_chunks; c = next_chunk++) {
          ChunkSums s = run_chunk(c);
          std::lock_guard lock(mutex);
          pending.emplace(c, std::move(s));
          for (auto it = pending.find(next_merge); it != pending.end(); it = pending.find(next_merge)) {
            merge(it->second);
            pending.erase(it);
            ++next_merge;
          }
        }
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
      }
    };
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
  }

  const double n = n_traj;
  for (std::size_t k = 0; k < n_samples; ++k) {
    Matrix r = total.rho[k] / n;
    result.compact_rho.push_back(0.5 * (r + r.adjoint()));
  }
  for (const char* key : kObservables) {
    auto& se = result.std_errors[key];
    se.resize(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
      const double mean = total.sum[key][k] / n;
      const double var = n > 1 ? std::max(0.0, (total.sum_sq[key][k] - n * mean * mean) / (n - 1)) : 0.0;
      se[k] = std::sqrt(var / n);
    }
  }
  return result;
}

std::size_t TrajectoryEnsembleResult::index_of(double tau) const {
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    if (std::abs(sample_times[k] - tau) < kSampleTol) return k;
  }
  throw std::out_of_range(fmt::format("no ensemble sample at tau = {}", tau));
}

DensityMatrix TrajectoryEnsembleResult::rho_at_index(std::size_t k) const {
  const auto space = HilbertSpace::full_system();
  Matrix full = Matrix::Zero(space.total_dim(), space.total_dim());
  const Matrix& r = compact_rho.at(k);
  for (std::size_t j = 0; j < support.size(); ++j) {
    for (std::size_t i = 0; i < support.size(); ++i) {
      full(support[i], support[j]) = r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return {space, std::move(full)};
}

DensityMatrix TrajectoryEnsembleResult::rho_at(double tau) const { return rho_at_index(index_of(tau)); }

DensityMatrix repair_positivity(const DensityMatrix& rho, double clip) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.entries());
  Eigen::VectorXd ev = es.eigenvalues();
  bool changed = false;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < 0.0 && ev(i) > -clip) {
      ev(i) = 0.0;
      changed = true;
    }
  }
  if (!changed) return rho;
  Matrix out = es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  out /= out.trace().real();
  out = 0.5 * (out + out.adjoint()).eval();
  return {rho.space(), std::move(out)};
}

}  // namespace cqed
