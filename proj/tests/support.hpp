#pragma once

#include <cmath>
#include <random>

#include "cqed/tensor.hpp"

namespace cqed::testing {

inline Matrix random_unitary_2x2(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Matrix m(2, 2);
  for (int i = 0; i < 4; ++i) m(i / 2, i % 2) = Complex(n(rng), n(rng));
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ();
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> n;
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(n(rng), n(rng));
  return v.normalized();
}

/// Random mixed state of rank `rank`.
inline Matrix random_density(std::mt19937_64& rng, Eigen::Index dim, int rank) {
  Matrix rho = Matrix::Zero(dim, dim);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  double total = 0.0;
  for (int r = 0; r < rank; ++r) {
    const Vector v = random_vector(rng, dim);
    const double w = u(rng);
    rho += w * v * v.adjoint();
    total += w;
  }
  return rho / total;
}

/// Kronecker product a (x) b, a acting on the more significant digit.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

}  // namespace cqed::testing
