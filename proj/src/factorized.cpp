#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "cqed/dynamics.hpp"

namespace cqed {

namespace {

constexpr int kChannelDim = 8;
constexpr int kSuperDim = kChannelDim * kChannelDim;
// Above this many nonzero entries of rho0 the dense mode contraction is
// cheaper than summing Kronecker products entry by entry.
constexpr std::size_t kSparseEntryLimit = 128;
constexpr double kSampleTol = 1e-9;

// Local bit of each kind inside a channel index f*4 + c*2 + a.
constexpr int local_bit(Kind kind) { return 2 - static_cast<int>(kind); }

int channel_local_index(Eigen::Index full, int channel) {
  int x = 0;
  for (Kind kind : {Kind::Field, Kind::Cavity, Kind::Atom}) {
    const int pos = SiteIndex{kind, static_cast<Channel>(channel)}.position();
    if ((full >> site_bit(pos)) & 1) x |= 1 << local_bit(kind);
  }
  return x;
}

Eigen::Index full_index(const std::array<int, 3>& local) {
  Eigen::Index full = 0;
  for (int j = 0; j < kNumChannels; ++j) {
    for (Kind kind : {Kind::Field, Kind::Cavity, Kind::Atom}) {
      if ((local[j] >> local_bit(kind)) & 1) {
        full |= Eigen::Index{1} << site_bit(SiteIndex{kind, static_cast<Channel>(j)}.position());
      }
    }
  }
  return full;
}

Matrix channel_operator(Kind kind) {
  Matrix low = Matrix::Zero(kChannelDim, kChannelDim);
  const int bit = 1 << local_bit(kind);
  for (int y = 0; y < kChannelDim; ++y) {
    if (y & bit) low(y ^ bit, y) = 1.0;
  }
  return low;
}

// -i (I (x) h - h^T (x) I) + sum_k (conj(C) (x) C - (1/2) I (x) C^dag C - (1/2) (C^dag C)^T (x) I)
// for column-stacked vec(rho).
Matrix channel_liouvillian(const ModelParams& p, bool drive_on) {
  const Matrix c = channel_operator(Kind::Cavity);
  const Matrix s = channel_operator(Kind::Atom);
  const Matrix f = channel_operator(Kind::Field);
  Matrix h = p.g_a * (c * s.adjoint() + c.adjoint() * s);
  if (drive_on) h += kI * p.g_c * (c * f.adjoint() - c.adjoint() * f);
  const Matrix id = Matrix::Identity(kChannelDim, kChannelDim);
  auto kron = [](const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
      }
    }
    return out;
  };
  Matrix l = -kI * (kron(id, h) - kron(h.transpose(), id));
  const std::pair<double, const Matrix*> jumps[] = {{p.k_tilde, &c}, {p.gamma_tilde, &s}};
  for (const auto& [rate, op] : jumps) {
    if (rate == 0.0) continue;
    const Matrix cc = rate * (op->adjoint() * *op);
    l += rate * kron(op->conjugate(), *op) - 0.5 * kron(id, cc) - 0.5 * kron(cc.transpose(), id);
  }
  return l;
}

// Column (x, y) of the channel map reshaped to the 8x8 image of |x><y|.
Matrix image_of(const Matrix& map, int x, int y) {
  return map.col(x + kChannelDim * y).reshaped(kChannelDim, kChannelDim);
}

// Partial trace of an 8x8 channel matrix onto the kinds in `keep_mask`
// (bits as in local_bit), kept bits ordered f, c, a.
Matrix channel_reduce(const Matrix& m, int keep_mask) {
  const int kept = std::popcount(static_cast<unsigned>(keep_mask));
  const int d = 1 << kept;
  if (kept == 3) return m;
  auto compress = [keep_mask](int x) {
    int out = 0;
    for (int b = 2; b >= 0; --b) {
      if (keep_mask & (1 << b)) out = (out << 1) | ((x >> b) & 1);
    }
    return out;
  };
  Matrix out = Matrix::Zero(d, d);
  for (int x = 0; x < kChannelDim; ++x) {
    for (int y = 0; y < kChannelDim; ++y) {
      if ((x & ~keep_mask) == (y & ~keep_mask)) out(compress(x), compress(y)) += m(x, y);
    }
  }
  return out;
}

Matrix kron3(const Matrix& a, const Matrix& b, const Matrix& c) {
  Matrix bc(b.rows() * c.rows(), b.cols() * c.cols());
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) bc.block(i * c.rows(), j * c.cols(), c.rows(), c.cols()) = b(i, j) * c;
  }
  Matrix out(a.rows() * bc.rows(), a.cols() * bc.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * bc.rows(), j * bc.cols(), bc.rows(), bc.cols()) = a(i, j) * bc;
    }
  }
  return out;
}

// Applies the 8x8-per-channel map to a full 512x512 matrix by contracting
// one channel at a time.
Matrix apply_dense(const Matrix& rho, const Matrix& map) {
  Matrix cur = rho;
  for (int j = 0; j < kNumChannels; ++j) {
    Matrix next = Matrix::Zero(rho.rows(), rho.cols());
    std::array<Eigen::Index, kChannelDim> offset{};
    for (int x = 0; x < kChannelDim; ++x) {
      std::array<int, 3> local{0, 0, 0};
      local[j] = x;
      offset[x] = full_index(local);
    }
    Eigen::Index channel_mask = offset[kChannelDim - 1];
    for (Eigen::Index r = 0; r < rho.rows(); ++r) {
      if (r & channel_mask) continue;
      for (Eigen::Index c = 0; c < rho.cols(); ++c) {
        if (c & channel_mask) continue;
        // 64-vector of this channel's block at (r, c), mapped in place.
        Eigen::Matrix<Complex, kSuperDim, 1> v;
        for (int y = 0; y < kChannelDim; ++y) {
          for (int x = 0; x < kChannelDim; ++x) v(x + kChannelDim * y) = cur(r | offset[x], c | offset[y]);
        }
        const Eigen::Matrix<Complex, kSuperDim, 1> w = map * v;
        for (int y = 0; y < kChannelDim; ++y) {
          for (int x = 0; x < kChannelDim; ++x) next(r | offset[x], c | offset[y]) = w(x + kChannelDim * y);
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

ChannelPropagator::ChannelPropagator(const ModelParams& params)
    : params_(params), l_on_(channel_liouvillian(params, true)), l_off_(channel_liouvillian(params, false)) {
  params.validate();
}

Matrix ChannelPropagator::step(double h, bool drive_on) const {
  return (liouvillian(drive_on) * h).exp();
}

Matrix ChannelPropagator::channel_map(double tau) const {
  if (tau < 0.0) throw std::invalid_argument("channel_map needs tau >= 0");
  const double t_on = std::min(tau, params_.tau_off);
  Matrix map = step(t_on, true);
  if (tau > params_.tau_off) map = step(tau - params_.tau_off, false) * map;
  return map;
}

ChannelDecomposedState::ChannelDecomposedState(const DensityMatrix& rho0) : rho0_(rho0) {
  if (!(rho0.space() == HilbertSpace::full_system())) {
    throw std::invalid_argument("factorized evolution expects a state on the full nine-site space");
  }
  const Matrix& m = rho0.entries();
  for (Eigen::Index y = 0; y < m.cols(); ++y) {
    for (Eigen::Index x = 0; x < m.rows(); ++x) {
      if (m(x, y) == Complex{}) continue;
      Entry e;
      for (int j = 0; j < kNumChannels; ++j) {
        e.row[j] = channel_local_index(x, j);
        e.col[j] = channel_local_index(y, j);
      }
      e.value = m(x, y);
      entries_.push_back(e);
    }
  }
}

FactorizedStateView::FactorizedStateView(std::shared_ptr<const ChannelDecomposedState> rho0, Matrix channel_map)
    : rho0_(std::move(rho0)), map_(std::move(channel_map)) {}

DensityMatrix FactorizedStateView::full() const {
  const auto space = HilbertSpace::full_system();
  const auto& entries = rho0_->entries();
  Matrix out;
  if (entries.size() > kSparseEntryLimit) {
    out = apply_dense(rho0_->original().entries(), map_);
  } else {
    // Grouped index X = xA * 64 + xB * 8 + xC, permuted to canonical order.
    Matrix grouped = Matrix::Zero(space.total_dim(), space.total_dim());
    for (const auto& e : entries) {
      grouped += e.value * kron3(image_of(map_, e.row[0], e.col[0]), image_of(map_, e.row[1], e.col[1]),
                                 image_of(map_, e.row[2], e.col[2]));
    }
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(space.total_dim()));
    for (Eigen::Index g = 0; g < space.total_dim(); ++g) {
      perm[g] = full_index({static_cast<int>(g >> 6), static_cast<int>((g >> 3) & 7), static_cast<int>(g & 7)});
    }
    out.resize(space.total_dim(), space.total_dim());
    for (Eigen::Index j = 0; j < space.total_dim(); ++j) {
      for (Eigen::Index i = 0; i < space.total_dim(); ++i) out(perm[i], perm[j]) = grouped(i, j);
    }
  }
  out = 0.5 * (out + out.adjoint()).eval();
  return {space, std::move(out)};
}

DensityMatrix FactorizedStateView::reduced(std::span<const int> keep) const {
  if (keep.empty()) throw std::invalid_argument("partial trace needs at least one kept site");
  const auto& entries = rho0_->entries();
  if (entries.size() > kSparseEntryLimit) return partial_trace(full(), keep);

  std::array<int, 3> keep_mask{0, 0, 0};
  for (int pos : keep) {
    const SiteIndex site = SiteIndex::from_position(pos);
    keep_mask[static_cast<int>(site.channel)] |= 1 << local_bit(site.kind);
  }
  // Kept sites in grouped order (channel-major, then f, c, a) and in
  // ascending canonical order.
  std::vector<int> grouped_sites;
  for (int j = 0; j < kNumChannels; ++j) {
    for (Kind kind : {Kind::Field, Kind::Cavity, Kind::Atom}) {
      if (keep_mask[j] & (1 << local_bit(kind))) {
        grouped_sites.push_back(SiteIndex{kind, static_cast<Channel>(j)}.position());
      }
    }
  }
  std::vector<int> canonical = grouped_sites;
  std::sort(canonical.begin(), canonical.end());
  const int n = static_cast<int>(grouped_sites.size());
  const Eigen::Index dim = Eigen::Index{1} << n;

  Matrix grouped = Matrix::Zero(dim, dim);
  for (const auto& e : entries) {
    grouped += e.value * kron3(channel_reduce(image_of(map_, e.row[0], e.col[0]), keep_mask[0]),
                               channel_reduce(image_of(map_, e.row[1], e.col[1]), keep_mask[1]),
                               channel_reduce(image_of(map_, e.row[2], e.col[2]), keep_mask[2]));
  }
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(dim));
  for (Eigen::Index g = 0; g < dim; ++g) {
    Eigen::Index c = 0;
    for (int k = 0; k < n; ++k) {
      const Eigen::Index bit = (g >> (n - 1 - k)) & 1;
      const auto slot = std::find(canonical.begin(), canonical.end(), grouped_sites[k]) - canonical.begin();
      c |= bit << (n - 1 - slot);
    }
    perm[g] = c;
  }
  Matrix out(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) out(perm[i], perm[j]) = grouped(i, j);
  }
  out = 0.5 * (out + out.adjoint()).eval();
  return {HilbertSpace::qubits(n), std::move(out)};
}

void factorized_evolution(const DensityMatrix& rho0, const ModelParams& params, const TimeGrid& grid,
                          const ViewSink& sink) {
  grid.validate();
  const ChannelPropagator prop(params);
  auto state = std::make_shared<const ChannelDecomposedState>(rho0);

  // Maps are advanced sample to sample; propagators for repeated step
  // lengths are cached.
  std::map<std::pair<double, bool>, Matrix> cache;
  auto step = [&](double h, bool on) -> const Matrix& {
    auto it = cache.find({h, on});
    if (it == cache.end()) it = cache.emplace(std::make_pair(h, on), prop.step(h, on)).first;
    return it->second;
  };
  auto advance = [&](Matrix& map, double from, double to) {
    if (from < params.tau_off && to > params.tau_off) {
      map = step(params.tau_off - from, true) * map;
      from = params.tau_off;
    }
    if (to > from) map = step(to - from, from < params.tau_off - kSampleTol) * map;
  };

  Matrix map = Matrix::Identity(kSuperDim, kSuperDim);
  double tau = grid.tau_start;
  for (double sample : grid.sample_times) {
    advance(map, tau, sample);
    tau = sample;
    sink(sample, FactorizedStateView(state, map));
  }
}

void factorized_evolution(const DensityMatrix& rho0, const ModelParams& params, const TimeGrid& grid,
                          const DensitySink& sink) {
  factorized_evolution(rho0, params, grid, [&](double tau, const StateView& view) { sink(tau, view.full()); });
}

std::map<double, DensityMatrix> factorized_evolution(const DensityMatrix& rho0, const ModelParams& params,
                                                     const TimeGrid& grid) {
  std::map<double, DensityMatrix> out;
  factorized_evolution(rho0, params, grid, [&](double tau, const DensityMatrix& rho) { out.emplace(tau, rho); });
  return out;
}

}  // namespace cqed
