#pragma once

#include <cmath>
#include <utility>

#include "dephase/error.hpp"
#include "dephase/matrix.hpp"

namespace dephase {

inline constexpr double kStateTolerance = 1e-12;
inline constexpr double kPositivityFloor = 1e-10;

/// A Hermitian, unit-trace, positive-semidefinite matrix on a register of
/// qubits A.. (2^n square). Only `checked` validates; `trusted` is for results of
/// maps already known to preserve these properties.
class DensityMatrix {
 public:
  static DensityMatrix checked(ComplexMatrix m) {
    const int n = register_size_for(m);
    if (hermiticity_defect(m) > kStateTolerance) throw Error(ErrorCode::NotHermitian, "density matrix is not Hermitian");
    if (std::abs(m.trace() - Complex{1.0, 0.0}) > kStateTolerance)
      throw Error(ErrorCode::NotNormalized, "density matrix trace differs from 1");
    if (hermitian_eigenvalues(m).back() < -kPositivityFloor)
      throw Error(ErrorCode::NotPositive, "density matrix has a negative eigenvalue");
    return DensityMatrix(std::move(m), n);
  }

  static DensityMatrix trusted(ComplexMatrix m) {
    const int n = register_size_for(m);
    return DensityMatrix(std::move(m), n);
  }

  const ComplexMatrix& matrix() const noexcept { return m_; }
  int qubits() const noexcept { return n_; }
  QubitSet labels() const { return QubitSet::first(n_); }
  std::size_t dim() const noexcept { return m_.rows(); }

  const Complex& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

 private:
  DensityMatrix(ComplexMatrix m, int n) : m_(std::move(m)), n_(n) {}

  static int register_size_for(const ComplexMatrix& m) {
    switch (m.dim()) {
      case 2: return 1;
      case 4: return 2;
      case 8: return 3;
      default: throw Error(ErrorCode::DimensionMismatch, "density matrix dimension must be 2, 4 or 8");
    }
  }

  ComplexMatrix m_;
  int n_ = 0;
};

inline double frobenius_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return frobenius_distance(a.matrix(), b.matrix());
}

/// Reduced state on `keep`, which must lie within the register of `rho`.
inline DensityMatrix reduce(const DensityMatrix& rho, QubitSet keep) {
  return DensityMatrix::trusted(partial_trace(rho.matrix(), keep, rho.labels()));
}

}  // namespace dephase
