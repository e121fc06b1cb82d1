#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "dephase/density.hpp"
#include "dephase/error.hpp"
#include "dephase/matrix.hpp"

namespace dephase {

/// sigma_y (x) sigma_y: anti-diagonal (-1, 1, 1, -1).
inline ComplexMatrix sigma_yy() {
  ComplexMatrix m(4, 4);
  m(0, 3) = -1.0;
  m(1, 2) = 1.0;
  m(2, 1) = 1.0;
  m(3, 0) = -1.0;
  return m;
}

struct SpinFlip {
  ComplexMatrix flipped;  ///< (sigma_y x sigma_y) rho* (sigma_y x sigma_y)
  ComplexMatrix product;  ///< rho times the flipped matrix (not Hermitian in general)
};

inline SpinFlip spin_flip(const ComplexMatrix& rho) {
  if (!rho.is_square() || rho.rows() != 4) throw Error(ErrorCode::DimensionMismatch, "spin flip needs a 4x4 matrix");
  const ComplexMatrix yy = sigma_yy();
  ComplexMatrix flipped = yy * rho.conjugate() * yy;
  ComplexMatrix product = rho * flipped;
  return {std::move(flipped), std::move(product)};
}

struct ConcurrenceResult {
  double value = 0.0;
  std::array<double, 4> lambdas{};  ///< eigenvalues of rho * rho~, descending
};

/// Concurrence max(0, sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4)).
///
/// The l_i are obtained as eigenvalues of the Hermitian matrix
/// sqrt(rho) rho~ sqrt(rho), which is similar to rho rho~. Values down to
/// -1e-10 are clamped to zero; anything more negative means rho was not PSD.
/// Eigenvalues within kRelativeRankFloor of zero relative to l1 are also
/// zeroed, since their square roots would otherwise carry ~1e-8 of noise.
inline ConcurrenceResult concurrence(const ComplexMatrix& rho) {
  if (!rho.is_square() || rho.rows() != 4) throw Error(ErrorCode::DimensionMismatch, "concurrence needs a two-qubit state");
  const ComplexMatrix root = psd_sqrt(rho, kPositivityFloor);
  const ComplexMatrix flipped = spin_flip(rho).flipped;
  ComplexMatrix r = root * flipped * root;
  // Symmetrise away rounding so the eigensolver sees an exactly Hermitian input.
  r = (r + r.adjoint()) * Complex{0.5, 0.0};
  const auto eig = hermitian_eigenvalues(r);

  ConcurrenceResult out;
  const double noise = kRelativeRankFloor * std::max(eig[0], 0.0);
  for (std::size_t k = 0; k < 4; ++k) {
    if (eig[k] < -kPositivityFloor) throw Error(ErrorCode::NotPositive, "rho rho~ has a negative eigenvalue; input is not a state");
    out.lambdas[k] = eig[k] <= noise ? 0.0 : eig[k];
  }
  const double c = std::sqrt(out.lambdas[0]) - std::sqrt(out.lambdas[1]) - std::sqrt(out.lambdas[2]) - std::sqrt(out.lambdas[3]);
  out.value = std::clamp(c, 0.0, 1.0);
  return out;
}

inline ConcurrenceResult concurrence(const DensityMatrix& rho) { return concurrence(rho.matrix()); }

/// Binary entropy in bits, with h(0) = h(1) = 0.
inline double binary_entropy(double x) {
  auto term = [](double p) { return p <= 0.0 ? 0.0 : -p * std::log2(p); };
  return term(x) + term(1.0 - x);
}

inline double entanglement_of_formation(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw Error(ErrorCode::InvalidArgument, "concurrence must lie in [0, 1]");
  return binary_entropy((1.0 + std::sqrt(1.0 - c * c)) / 2.0);
}

}  // namespace dephase
