#include "cqed/tensor.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace cqed {

namespace {

std::vector<int> sorted_unique(std::span<const int> sites, int num_sites) {
  std::vector<int> out(sites.begin(), sites.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (int s : out) {
    if (s < 0 || s >= num_sites) {
      throw std::invalid_argument(fmt::format("site {} outside a {}-site space", s, num_sites));
    }
  }
  return out;
}

// Flat-index offsets of every multi-index over `sites` (ascending), with the
// last listed site varying fastest.
std::vector<Eigen::Index> offsets_over(const HilbertSpace& space, std::span<const int> sites) {
  std::vector<Eigen::Index> offsets{0};
  for (int s : sites) {
    std::vector<Eigen::Index> next;
    next.reserve(offsets.size() * space.local_dim(s));
    for (Eigen::Index base : offsets) {
      for (int d = 0; d < space.local_dim(s); ++d) next.push_back(base + d * space.stride(s));
    }
    offsets = std::move(next);
  }
  return offsets;
}

std::vector<int> complement(std::span<const int> sites, int num_sites) {
  std::vector<int> out;
  for (int s = 0; s < num_sites; ++s) {
    if (std::find(sites.begin(), sites.end(), s) == sites.end()) out.push_back(s);
  }
  return out;
}

}  // namespace

SiteIndex SiteIndex::from_position(int position) {
  if (position < 0 || position >= kNumSites) {
    throw std::invalid_argument(fmt::format("site position {} out of range", position));
  }
  return {static_cast<Kind>(position / 3), static_cast<Channel>(position % 3)};
}

std::string SiteIndex::name() const {
  static constexpr const char* kKinds[] = {"f", "c", "a"};
  static constexpr const char* kChannels[] = {"A", "B", "C"};
  return fmt::format("{}_{}", kKinds[static_cast<int>(kind)], kChannels[static_cast<int>(channel)]);
}

std::vector<int> sites_of(Kind kind) {
  const int base = 3 * static_cast<int>(kind);
  return {base, base + 1, base + 2};
}

HilbertSpace::HilbertSpace(std::vector<int> local_dims) : local_dims_(std::move(local_dims)) {
  if (local_dims_.empty()) throw std::invalid_argument("a Hilbert space needs at least one site");
  strides_.assign(local_dims_.size(), 1);
  for (int s = num_sites() - 1; s >= 0; --s) {
    if (local_dims_[s] < 1) throw std::invalid_argument("local dimensions must be positive");
    strides_[s] = total_dim_;
    total_dim_ *= local_dims_[s];
  }
}

HilbertSpace HilbertSpace::qubits(int n) { return HilbertSpace(std::vector<int>(n, 2)); }

HilbertSpace HilbertSpace::full_system() { return qubits(kNumSites); }

HilbertSpace HilbertSpace::subspace(std::span<const int> sites) const {
  std::vector<int> dims;
  for (int s : sorted_unique(sites, num_sites())) dims.push_back(local_dims_[s]);
  return HilbertSpace(std::move(dims));
}

// ---------------------------------------------------------------------------

OperatorMatrix::OperatorMatrix(HilbertSpace space, Matrix entries)
    : space_(std::move(space)), entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() != space_.total_dim()) {
    throw std::invalid_argument(fmt::format("operator of shape {}x{} does not match space dimension {}",
                                            entries_.rows(), entries_.cols(), space_.total_dim()));
  }
}

OperatorMatrix OperatorMatrix::identity(const HilbertSpace& space) {
  return {space, Matrix::Identity(space.total_dim(), space.total_dim())};
}

OperatorMatrix OperatorMatrix::zero(const HilbertSpace& space) {
  return {space, Matrix::Zero(space.total_dim(), space.total_dim())};
}

bool OperatorMatrix::is_hermitian(double tol) const {
  return max_abs(entries_ - entries_.adjoint()) < tol;
}

OperatorMatrix OperatorMatrix::adjoint() const { return {space_, entries_.adjoint()}; }

OperatorMatrix& OperatorMatrix::operator+=(const OperatorMatrix& other) {
  if (!(space_ == other.space_)) throw std::invalid_argument("operator spaces differ");
  entries_ += other.entries_;
  return *this;
}

OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (!(a.space_ == b.space_)) throw std::invalid_argument("operator spaces differ");
  return {a.space_, a.entries_ - b.entries_};
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (!(a.space_ == b.space_)) throw std::invalid_argument("operator spaces differ");
  return {a.space_, a.entries_ * b.entries_};
}

OperatorMatrix operator*(Complex s, const OperatorMatrix& a) { return {a.space_, s * a.entries_}; }

// ---------------------------------------------------------------------------

StateVector::StateVector(HilbertSpace space, Vector amplitudes)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != space_.total_dim()) {
    throw std::invalid_argument("state vector length does not match space dimension");
  }
  const double norm = amplitudes_.norm();
  if (std::abs(norm - 1.0) > 1e-10) {
    throw std::invalid_argument(fmt::format("state vector is not normalized (norm {})", norm));
  }
}

StateVector StateVector::normalized(HilbertSpace space, Vector amplitudes) {
  const double norm = amplitudes.norm();
  if (norm == 0.0) throw std::invalid_argument("cannot normalize the zero vector");
  amplitudes /= norm;
  return {std::move(space), std::move(amplitudes)};
}

StateVector StateVector::basis(HilbertSpace space, Eigen::Index index) {
  Vector v = Vector::Zero(space.total_dim());
  v(index) = 1.0;
  return {std::move(space), std::move(v)};
}

// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(HilbertSpace space, Matrix entries)
    : space_(std::move(space)), entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() != space_.total_dim()) {
    throw std::invalid_argument("density matrix shape does not match space dimension");
  }
  const double asym = max_abs(entries_ - entries_.adjoint());
  if (asym > 1e-10) {
    throw std::invalid_argument(fmt::format("density matrix is not Hermitian (deviation {:.3g})", asym));
  }
  const Complex tr = entries_.trace();
  if (std::abs(tr - 1.0) > 1e-8) {
    throw std::invalid_argument(fmt::format("density matrix trace is {:.12g}", tr.real()));
  }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  const Vector& v = psi.amplitudes();
  return {psi.space(), v * v.adjoint()};
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------

OperatorMatrix embed(const Matrix& local_op, int site, const HilbertSpace& space) {
  if (site < 0 || site >= space.num_sites()) throw std::invalid_argument("embed: site out of range");
  const int d = space.local_dim(site);
  if (local_op.rows() != d || local_op.cols() != d) {
    throw std::invalid_argument(
        fmt::format("embed: local operator is {}x{}, site {} has dimension {}", local_op.rows(),
                    local_op.cols(), site, d));
  }
  const Eigen::Index right = space.stride(site);
  const Eigen::Index left = space.total_dim() / (right * d);
  Matrix out = Matrix::Zero(space.total_dim(), space.total_dim());
  for (Eigen::Index l = 0; l < left; ++l) {
    for (int x = 0; x < d; ++x) {
      for (int y = 0; y < d; ++y) {
        const Complex v = local_op(x, y);
        if (v == Complex{}) continue;
        const Eigen::Index row0 = (l * d + x) * right;
        const Eigen::Index col0 = (l * d + y) * right;
        for (Eigen::Index r = 0; r < right; ++r) out(row0 + r, col0 + r) = v;
      }
    }
  }
  return {space, std::move(out)};
}

OperatorMatrix embed(const Matrix& local_op, SiteIndex site) {
  return embed(local_op, site.position(), HilbertSpace::full_system());
}

Matrix partial_trace(const Matrix& m, const HilbertSpace& space, std::span<const int> keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  const std::vector<int> kept = sorted_unique(keep, space.num_sites());
  const std::vector<int> traced = complement(kept, space.num_sites());
  const auto kept_off = offsets_over(space, kept);
  const auto traced_off = offsets_over(space, traced);
  const auto n = static_cast<Eigen::Index>(kept_off.size());
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index b = 0; b < n; ++b) {
    for (Eigen::Index a = 0; a < n; ++a) {
      Complex acc{};
      for (Eigen::Index t : traced_off) acc += m(kept_off[a] + t, kept_off[b] + t);
      out(a, b) = acc;
    }
  }
  return out;
}

OperatorMatrix partial_trace(const OperatorMatrix& op, std::span<const int> keep) {
  return {op.space().subspace(keep), partial_trace(op.entries(), op.space(), keep)};
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  Matrix reduced = partial_trace(rho.entries(), rho.space(), keep);
  // Summation can leave a last-bit asymmetry; the reduced state is Hermitian
  // by construction.
  Matrix sym = 0.5 * (reduced + reduced.adjoint());
  return {rho.space().subspace(keep), std::move(sym)};
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const SiteIndex> keep) {
  std::vector<int> positions;
  for (const auto& s : keep) positions.push_back(s.position());
  return partial_trace(rho, std::span<const int>(positions));
}

OperatorMatrix partial_transpose(const OperatorMatrix& op, std::span<const int> sites) {
  const HilbertSpace& space = op.space();
  const std::vector<int> tr = sorted_unique(sites, space.num_sites());
  const Eigen::Index dim = space.total_dim();
  // Contribution of the transposed digits to each flat index.
  std::vector<Eigen::Index> part(dim, 0);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (int s : tr) part[i] += ((i / space.stride(s)) % space.local_dim(s)) * space.stride(s);
  }
  const Matrix& m = op.entries();
  Matrix out(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      out(i, j) = m(i - part[i] + part[j], j - part[j] + part[i]);
    }
  }
  return {space, std::move(out)};
}

OperatorMatrix partial_transpose(const DensityMatrix& rho, std::span<const int> sites) {
  return partial_transpose(rho.as_operator(), sites);
}

Complex expectation(const OperatorMatrix& op, const StateVector& psi) {
  if (!(op.space() == psi.space())) throw std::invalid_argument("expectation: spaces differ");
  return psi.amplitudes().dot(op.entries() * psi.amplitudes());
}

Complex expectation(const OperatorMatrix& op, const DensityMatrix& rho) {
  if (!(op.space() == rho.space())) throw std::invalid_argument("expectation: spaces differ");
  // Tr[O rho] without forming the product.
  return (op.entries().transpose().array() * rho.entries().array()).sum();
}

double trace_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("trace_distance: shapes differ");
  Matrix diff = a - b;
  diff = 0.5 * (diff + diff.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (!(a.space() == b.space())) throw std::invalid_argument("trace_distance: spaces differ");
  return trace_distance(a.entries(), b.entries());
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Matrix lowering_2x2() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

Matrix number_2x2() {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 1) = 1.0;
  return m;
}

Matrix identity_2x2() { return Matrix::Identity(2, 2); }

}  // namespace cqed
