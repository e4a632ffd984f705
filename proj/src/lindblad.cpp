#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Sparse>

#include <fmt/format.h>

#include "cqed/dynamics.hpp"

namespace cqed {

namespace {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

constexpr double kTraceTol = 1e-6;
constexpr double kSampleTol = 1e-9;

SparseMatrix restrict_sparse(const Matrix& m, const std::vector<Eigen::Index>& support) {
  const auto n = static_cast<Eigen::Index>(support.size());
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Complex v = m(support[i], support[j]);
      if (v != Complex{}) triplets.emplace_back(i, j, v);
    }
  }
  SparseMatrix out(n, n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

// dst += src * s, one axpy dst.col(j) += v * src.col(i) per stored
// entry s(i, j) = v.
void add_dense_times_sparse(const Matrix& src, const SparseMatrix& s, Matrix& dst) {
  const Eigen::Index n = src.rows();
  for (Eigen::Index j = 0; j < s.outerSize(); ++j) {
    Complex* d = dst.data() + j * n;
    for (SparseMatrix::InnerIterator it(s, j); it; ++it) {
      const Complex v = it.value();
      const Complex* c = src.data() + it.row() * n;
      for (Eigen::Index i = 0; i < n; ++i) d[i] += v * c[i];
    }
  }
}

// Right-hand side of the master equation for a Hermitian argument, written
// as  B + B^dag  with  B = rho K^dag + (1/2) sum_k C_k rho C_k^dag  and
// K = -i H_e. The symmetrization pass is fused with the RK4 stage update so
// each stage touches memory once.
class LindbladGenerator {
 public:
  LindbladGenerator(const OperatorMatrix& h_eff, const std::vector<OperatorMatrix>& jumps,
                    const std::vector<Eigen::Index>& support)
      : dim_(static_cast<Eigen::Index>(support.size())) {
    k_adj_ = restrict_sparse(Matrix(kI * h_eff.entries().adjoint()), support);
    for (const auto& c : jumps) {
      SparseMatrix cs = restrict_sparse(c.entries(), support);
      if (cs.nonZeros() == 0) continue;
      SparseMatrix cs_adj = cs.adjoint();
      jumps_.push_back(std::move(cs));
      jumps_adj_.push_back(std::move(cs_adj));
    }
    b_.resize(dim_, dim_);
    t_.resize(dim_, dim_);
  }

  // Calls f(k, d) for every element of d = L(x), k being the column-major
  // offset.
  template <class F>
  void for_each(const Matrix& x, F&& f) {
    form_b(x);
    const Eigen::Index n = dim_;
    const Complex* b = b_.data();
    constexpr Eigen::Index kBlock = 32;
    for (Eigen::Index jb = 0; jb < n; jb += kBlock) {
      for (Eigen::Index ib = 0; ib < n; ib += kBlock) {
        const Eigen::Index jend = std::min(jb + kBlock, n);
        const Eigen::Index iend = std::min(ib + kBlock, n);
        for (Eigen::Index j = jb; j < jend; ++j) {
          for (Eigen::Index i = ib; i < iend; ++i) {
            f(j * n + i, b[j * n + i] + std::conj(b[i * n + j]));
          }
        }
      }
    }
  }

 private:
  void form_b(const Matrix& x) {
    b_.setZero();
    add_dense_times_sparse(x, k_adj_, b_);
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      t_.setZero();
      add_dense_times_sparse(x, jumps_adj_[k], t_);
      b_.noalias() += 0.5 * (jumps_[k] * t_);
    }
  }

  Eigen::Index dim_;
  SparseMatrix k_adj_;
  std::vector<SparseMatrix> jumps_;
  std::vector<SparseMatrix> jumps_adj_;
  Matrix b_;
  Matrix t_;
};

class Rk4 {
 public:
  explicit Rk4(Eigen::Index dim) : acc_(dim, dim), tmp_(dim, dim) {}

  void step(LindbladGenerator& gen, Matrix& rho, double h) {
    Complex* r = rho.data();
    Complex* acc = acc_.data();
    Complex* tmp = tmp_.data();
    const double h2 = h / 2.0;
    const double h3 = h / 3.0;
    const double h6 = h / 6.0;
    gen.for_each(rho, [=](Eigen::Index k, Complex d) {
      acc[k] = r[k] + h6 * d;
      tmp[k] = r[k] + h2 * d;
    });
    gen.for_each(tmp_, [=](Eigen::Index k, Complex d) {
      acc[k] += h3 * d;
      tmp[k] = r[k] + h2 * d;
    });
    gen.for_each(tmp_, [=](Eigen::Index k, Complex d) {
      acc[k] += h3 * d;
      tmp[k] = r[k] + h * d;
    });
    gen.for_each(tmp_, [=](Eigen::Index k, Complex d) { r[k] = acc[k] + h6 * d; });
  }

 private:
  Matrix acc_, tmp_;
};

}  // namespace

std::vector<Eigen::Index> invariant_support(const DensityMatrix& rho0, const ModelParams& params) {
  std::vector<Eigen::Index> seed;
  for (Eigen::Index x = 0; x < rho0.dim(); ++x) {
    if (rho0.entries().col(x).squaredNorm() > 0.0) seed.push_back(x);
  }
  return invariant_support(std::move(seed), params);
}

std::vector<Eigen::Index> invariant_support(std::vector<Eigen::Index> seed, const ModelParams& params) {
  const Eigen::Index dim = HilbertSpace::full_system().total_dim();
  // Adjacency col -> rows over H (drive on and off) and every collapse operator.
  std::vector<std::vector<Eigen::Index>> next(static_cast<std::size_t>(dim));
  auto add = [&](const std::vector<OperatorEntry>& entries) {
    for (const auto& e : entries) next[e.col].push_back(e.row);
  };
  add(interaction_entries(params, true));
  add(interaction_entries(params, false));
  for (const auto& c : collapse_entries(params)) add(c);

  std::vector<char> in(static_cast<std::size_t>(dim), 0);
  std::vector<Eigen::Index> queue;
  for (Eigen::Index x : seed) {
    if (x < 0 || x >= dim) throw std::invalid_argument(fmt::format("basis index {} out of range", x));
    if (!in[x]) {
      in[x] = 1;
      queue.push_back(x);
    }
  }
  for (std::size_t q = 0; q < queue.size(); ++q) {
    for (Eigen::Index x : next[queue[q]]) {
      if (!in[x]) {
        in[x] = 1;
        queue.push_back(x);
      }
    }
  }
  std::sort(queue.begin(), queue.end());
  return queue;
}

void lindblad_exact(const DensityMatrix& rho0, const ModelParams& params, const TimeGrid& grid,
                    const DensitySink& sink, const ExactOptions& options) {
  params.validate();
  if (!(rho0.space() == HilbertSpace::full_system())) {
    throw std::invalid_argument("lindblad_exact expects a state on the full nine-site space");
  }
  std::vector<Eigen::Index> support;
  if (options.restrict_to_support) {
    support = invariant_support(rho0, params);
  } else {
    support.resize(static_cast<std::size_t>(rho0.dim()));
    std::iota(support.begin(), support.end(), Eigen::Index{0});
  }
  const auto m = static_cast<Eigen::Index>(support.size());

  const auto jumps = collapse_operators(params);
  LindbladGenerator gen_on(effective_hamiltonian(params, true), jumps, support);
  LindbladGenerator gen_off(effective_hamiltonian(params, false), jumps, support);
  Rk4 rk4(m);

  Matrix rho(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) rho(i, j) = rho0.entries()(support[i], support[j]);
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const double trace0 = rho.trace().real();
  const auto points = integration_points(grid, params.tau_off);
  std::size_t next_sample = 0;
  Matrix full = Matrix::Zero(rho0.dim(), rho0.dim());

  auto emit = [&](double tau) {
    while (next_sample < grid.sample_times.size() && std::abs(grid.sample_times[next_sample] - tau) < kSampleTol) {
      rho = 0.5 * (rho + rho.adjoint()).eval();
      const double tr = rho.trace().real();
      if (!std::isfinite(tr) || !rho.allFinite()) {
        throw IntegrationError(fmt::format("non-finite state at tau = {}", tau));
      }
      if (std::abs(tr - trace0) > kTraceTol) {
        throw IntegrationError(fmt::format("trace drift {:.3g} at tau = {}; reduce dt", tr - trace0, tau));
      }
      for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) full(support[i], support[j]) = rho(i, j);
      }
      sink(grid.sample_times[next_sample], DensityMatrix(rho0.space(), full));
      ++next_sample;
    }
  };

  emit(points.front());
  for (std::size_t n = 1; n < points.size(); ++n) {
    const double h = points[n] - points[n - 1];
    const bool drive_on = points[n] <= params.tau_off + kSampleTol;
    rk4.step(drive_on ? gen_on : gen_off, rho, h);
    emit(points[n]);
  }
}

std::map<double, DensityMatrix> lindblad_exact(const DensityMatrix& rho0, const ModelParams& params,
                                               const TimeGrid& grid, const ExactOptions& options) {
  std::map<double, DensityMatrix> out;
  lindblad_exact(
      rho0, params, grid, [&](double tau, const DensityMatrix& rho) { out.emplace(tau, rho); }, options);
  return out;
}

DensityMatrix FullStateView::reduced(std::span<const int> keep) const { return partial_trace(rho_, keep); }

}  // namespace cqed
