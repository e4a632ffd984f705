#pragma once

// Tensor-product bookkeeping for the nine-site system and the dense
// linear-algebra primitives built on it.
//
// Basis convention: site 0 is the most significant digit of a basis index,
// i.e. an operator embedded at site s is I ⊗ ... ⊗ op ⊗ ... ⊗ I with op in
// slot s counting from the left.

#include <complex>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cqed {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

enum class Kind { Field = 0, Cavity = 1, Atom = 2 };
enum class Channel { A = 0, B = 1, C = 2 };

inline constexpr int kNumChannels = 3;
inline constexpr int kNumSites = 9;

/// A single two-level subsystem of the full model, labelled by what it is
/// (field mode, cavity mode, atom) and which channel J = A, B, C it belongs
/// to. Canonical positions: f_A f_B f_C c_A c_B c_C a_A a_B a_C.
struct SiteIndex {
  Kind kind;
  Channel channel;

  constexpr int position() const {
    return 3 * static_cast<int>(kind) + static_cast<int>(channel);
  }
  static SiteIndex from_position(int position);
  std::string name() const;

  friend constexpr bool operator==(SiteIndex, SiteIndex) = default;
};

/// The three sites of one kind, in channel order.
std::vector<int> sites_of(Kind kind);

class HilbertSpace {
 public:
  explicit HilbertSpace(std::vector<int> local_dims);

  static HilbertSpace qubits(int n);
  /// Nine qubits in canonical site order, total dimension 512.
  static HilbertSpace full_system();

  int num_sites() const { return static_cast<int>(local_dims_.size()); }
  int local_dim(int site) const { return local_dims_.at(site); }
  std::span<const int> local_dims() const { return local_dims_; }
  Eigen::Index total_dim() const { return total_dim_; }
  /// Distance in the flat index between consecutive values of `site`.
  Eigen::Index stride(int site) const { return strides_.at(site); }

  /// Space spanned by the listed sites, in ascending site order.
  HilbertSpace subspace(std::span<const int> sites) const;

  friend bool operator==(const HilbertSpace& a, const HilbertSpace& b) {
    return a.local_dims_ == b.local_dims_;
  }

 private:
  std::vector<int> local_dims_;
  std::vector<Eigen::Index> strides_;
  Eigen::Index total_dim_ = 1;
};

/// Dense operator on a tensor-product space.
class OperatorMatrix {
 public:
  OperatorMatrix(HilbertSpace space, Matrix entries);

  static OperatorMatrix identity(const HilbertSpace& space);
  static OperatorMatrix zero(const HilbertSpace& space);

  const HilbertSpace& space() const { return space_; }
  const Matrix& entries() const { return entries_; }
  Eigen::Index dim() const { return entries_.rows(); }

  bool is_hermitian(double tol = 1e-12) const;
  OperatorMatrix adjoint() const;

  OperatorMatrix& operator+=(const OperatorMatrix& other);
  friend OperatorMatrix operator+(OperatorMatrix a, const OperatorMatrix& b) { return a += b; }
  friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator*(Complex s, const OperatorMatrix& a);

 private:
  HilbertSpace space_;
  Matrix entries_;
};

/// Normalized pure state.
class StateVector {
 public:
  /// Rejects amplitudes whose norm differs from 1 by more than 1e-10.
  StateVector(HilbertSpace space, Vector amplitudes);
  /// Normalizes the given amplitudes; rejects the zero vector.
  static StateVector normalized(HilbertSpace space, Vector amplitudes);
  static StateVector basis(HilbertSpace space, Eigen::Index index);

  const HilbertSpace& space() const { return space_; }
  const Vector& amplitudes() const { return amplitudes_; }

 private:
  HilbertSpace space_;
  Vector amplitudes_;
};

/// Hermitian, unit-trace, positive-semidefinite matrix.
///
/// The constructor checks shape, Hermiticity (1e-10) and trace (1e-8).
/// Positivity needs an eigensolve, so it is checked on request only.
class DensityMatrix {
 public:
  DensityMatrix(HilbertSpace space, Matrix entries);

  static DensityMatrix pure(const StateVector& psi);

  const HilbertSpace& space() const { return space_; }
  const Matrix& entries() const { return entries_; }
  Eigen::Index dim() const { return entries_.rows(); }

  double trace() const { return entries_.trace().real(); }
  double min_eigenvalue() const;
  bool is_positive(double tol = 1e-8) const { return min_eigenvalue() >= -tol; }

  OperatorMatrix as_operator() const { return {space_, entries_}; }

 private:
  HilbertSpace space_;
  Matrix entries_;
};

/// I ⊗ ... ⊗ local_op ⊗ ... ⊗ I with local_op at `site`.
OperatorMatrix embed(const Matrix& local_op, int site, const HilbertSpace& space);
OperatorMatrix embed(const Matrix& local_op, SiteIndex site);

/// Traces out every site not in `keep`. The result is ordered by ascending
/// site position regardless of the order of `keep`.
OperatorMatrix partial_trace(const OperatorMatrix& op, std::span<const int> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<int> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const SiteIndex> keep);

/// Raw-matrix variant used by the hot paths.
Matrix partial_trace(const Matrix& m, const HilbertSpace& space, std::span<const int> keep);

/// Transposes the tensor indices of `sites`.
OperatorMatrix partial_transpose(const OperatorMatrix& op, std::span<const int> sites);
OperatorMatrix partial_transpose(const DensityMatrix& rho, std::span<const int> sites);

Complex expectation(const OperatorMatrix& op, const StateVector& psi);
Complex expectation(const OperatorMatrix& op, const DensityMatrix& rho);

/// Half the trace norm of the difference.
double trace_distance(const Matrix& a, const Matrix& b);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

double max_abs(const Matrix& m);

/// Single-qubit building blocks in the {|0>, |1>} basis.
Matrix lowering_2x2();
Matrix number_2x2();
Matrix identity_2x2();

}  // namespace cqed
