#pragma once

// Dense complex matrices for registers of at most three qubits, plus the
// qubit-labelled tensor operations (Kronecker product, partial trace) and a
// Jacobi eigensolver for Hermitian input.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dephase/error.hpp"

namespace dephase {

using Complex = std::complex<double>;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}

  /// Row-major initialisation; the entry count must equal rows*cols.
  ComplexMatrix(std::size_t rows, std::size_t cols, std::initializer_list<Complex> entries)
      : rows_(rows), cols_(cols), data_(entries) {
    if (data_.size() != rows * cols) {
      throw Error(ErrorCode::DimensionMismatch, "entry count does not match shape");
    }
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(std::span<const Complex> diag) {
    ComplexMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }

  static ComplexMatrix diagonal(std::initializer_list<double> diag) {
    std::vector<Complex> d(diag.begin(), diag.end());
    return diagonal(std::span<const Complex>(d));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  /// Side length of a square matrix.
  std::size_t dim() const {
    if (!is_square()) throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
    return rows_;
  }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const Complex> entries() const noexcept { return data_; }
  std::span<Complex> entries() noexcept { return data_; }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  ComplexMatrix conjugate() const {
    ComplexMatrix out = *this;
    for (auto& z : out.data_) z = std::conj(z);
    return out;
  }

  Complex trace() const {
    Complex t{0.0, 0.0};
    for (std::size_t i = 0; i < dim(); ++i) t += (*this)(i, i);
    return t;
  }

  std::vector<Complex> diagonal_entries() const {
    std::vector<Complex> d(dim());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, i);
    return d;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& rhs) {
    require_same_shape(rhs);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
    return *this;
  }

  ComplexMatrix& operator-=(const ComplexMatrix& rhs) {
    require_same_shape(rhs);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
    return *this;
  }

  ComplexMatrix& operator*=(Complex s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorCode::DimensionMismatch, "inner dimensions differ");
    ComplexMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex{0.0, 0.0}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  void require_same_shape(const ComplexMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
      throw Error(ErrorCode::DimensionMismatch, "shapes differ");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

// ---------------------------------------------------------------------------
// Qubit labels

/// Register position: A is the leftmost (most significant) tensor factor.
enum class Qubit : std::uint8_t { A = 0, B = 1, C = 2 };

inline constexpr int kMaxQubits = 3;

inline char to_char(Qubit q) { return static_cast<char>('A' + static_cast<int>(q)); }

/// Ordered set of qubit labels, stored as a bitmask and always iterated A < B < C.
class QubitSet {
 public:
  constexpr QubitSet() = default;
  constexpr QubitSet(std::initializer_list<Qubit> qs) {
    for (Qubit q : qs) insert(q);
  }

  /// The register {A, ..., } of the given size.
  static QubitSet first(int n) {
    if (n < 1 || n > kMaxQubits) throw Error(ErrorCode::InvalidArgument, "register size must be 1..3");
    QubitSet s;
    for (int i = 0; i < n; ++i) s.insert(static_cast<Qubit>(i));
    return s;
  }

  /// Parses labels such as "AB" or "c"; duplicates are rejected.
  static QubitSet parse(std::string_view text) {
    QubitSet s;
    for (char ch : text) {
      const char up = (ch >= 'a' && ch <= 'z') ? static_cast<char>(ch - 'a' + 'A') : ch;
      if (up < 'A' || up > 'C') throw Error(ErrorCode::InvalidArgument, "unknown qubit label '" + std::string(1, ch) + "'");
      const auto q = static_cast<Qubit>(up - 'A');
      if (s.contains(q)) throw Error(ErrorCode::InvalidArgument, "duplicate qubit label in '" + std::string(text) + "'");
      s.insert(q);
    }
    return s;
  }

  constexpr void insert(Qubit q) { bits_ |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(q)); }
  constexpr bool contains(Qubit q) const { return (bits_ >> static_cast<unsigned>(q)) & 1u; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t mask() const { return bits_; }

  int size() const {
    int n = 0;
    for (int i = 0; i < kMaxQubits; ++i) n += (bits_ >> i) & 1;
    return n;
  }

  bool is_subset_of(QubitSet other) const { return (bits_ & ~other.bits_) == 0; }
  bool intersects(QubitSet other) const { return (bits_ & other.bits_) != 0; }

  QubitSet without(QubitSet other) const {
    QubitSet s;
    s.bits_ = static_cast<std::uint8_t>(bits_ & ~other.bits_);
    return s;
  }

  std::vector<Qubit> qubits() const {
    std::vector<Qubit> out;
    for (int i = 0; i < kMaxQubits; ++i)
      if ((bits_ >> i) & 1) out.push_back(static_cast<Qubit>(i));
    return out;
  }

  std::string to_string() const {
    std::string s;
    for (Qubit q : qubits()) s.push_back(to_char(q));
    return s;
  }

  friend constexpr bool operator==(QubitSet, QubitSet) = default;
  friend constexpr bool operator<(QubitSet a, QubitSet b) {
    // Size first, then lexicographic label order: A, B, C, AB, AC, BC, ABC.
    const int sa = std::popcount(a.bits_), sb = std::popcount(b.bits_);
    if (sa != sb) return sa < sb;
    for (int i = 0; i < kMaxQubits; ++i) {
      const bool ia = (a.bits_ >> i) & 1, ib = (b.bits_ >> i) & 1;
      if (ia != ib) return ia;
    }
    return false;
  }

 private:
  std::uint8_t bits_ = 0;
};

/// Bit of basis index `index` belonging to the qubit at `position` in an n-qubit register.
inline int qubit_bit(std::size_t index, int position, int n) {
  return static_cast<int>((index >> (n - 1 - position)) & 1u);
}

// ---------------------------------------------------------------------------
// Tensor operations

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

/// Reduced matrix on `keep`, with factors in A < B < C order. `total` names the
/// register `rho` lives on.
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, QubitSet keep, QubitSet total) {
  const int n = total.size();
  if (n == 0 || rho.dim() != (std::size_t{1} << n))
    throw Error(ErrorCode::DimensionMismatch, "matrix dimension does not match register " + total.to_string());
  if (keep.empty() || !keep.is_subset_of(total))
    throw Error(ErrorCode::InvalidArgument, "kept qubits " + keep.to_string() + " not a nonempty subset of " + total.to_string());

  const auto labels = total.qubits();
  std::vector<int> kept_pos, traced_pos;
  for (int p = 0; p < n; ++p) (keep.contains(labels[p]) ? kept_pos : traced_pos).push_back(p);

  const int nk = static_cast<int>(kept_pos.size());
  const int nt = static_cast<int>(traced_pos.size());
  auto full_index = [&](std::size_t kept_bits, std::size_t env_bits) {
    std::size_t idx = 0;
    for (int i = 0; i < nk; ++i)
      if ((kept_bits >> (nk - 1 - i)) & 1u) idx |= std::size_t{1} << (n - 1 - kept_pos[i]);
    for (int i = 0; i < nt; ++i)
      if ((env_bits >> (nt - 1 - i)) & 1u) idx |= std::size_t{1} << (n - 1 - traced_pos[i]);
    return idx;
  };

  const std::size_t dk = std::size_t{1} << nk;
  const std::size_t de = std::size_t{1} << nt;
  ComplexMatrix out(dk, dk);
  for (std::size_t i = 0; i < dk; ++i)
    for (std::size_t j = 0; j < dk; ++j) {
      Complex s{0.0, 0.0};
      for (std::size_t e = 0; e < de; ++e) s += rho(full_index(i, e), full_index(j, e));
      out(i, j) = s;
    }
  return out;
}

inline double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::DimensionMismatch, "frobenius_distance of differently shaped matrices");
  double s = 0.0;
  const auto ea = a.entries(), eb = b.entries();
  for (std::size_t k = 0; k < ea.size(); ++k) s += std::norm(ea[k] - eb[k]);
  return std::sqrt(s);
}

/// Largest entry magnitude.
inline double max_abs(const ComplexMatrix& m) {
  double best = 0.0;
  for (const auto& z : m.entries()) best = std::max(best, std::abs(z));
  return best;
}

inline double hermiticity_defect(const ComplexMatrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = i; j < m.dim(); ++j) worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
  return worst;
}

/// Largest off-diagonal magnitude; zero for a diagonal matrix.
inline double off_diagonal_max(const ComplexMatrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j)
      if (i != j) worst = std::max(worst, std::abs(m(i, j)));
  return worst;
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver

struct EigenSystem {
  std::vector<double> values;  ///< descending
  ComplexMatrix vectors;       ///< column k pairs with values[k]
};

inline constexpr double kHermitianTolerance = 1e-10;

/// Cyclic complex Jacobi. Each rotation first removes the phase of the pivot,
/// then applies a real Givens rotation, so the iteration stays unitary.
inline EigenSystem hermitian_eigensystem(const ComplexMatrix& m, double tolerance = kHermitianTolerance) {
  const std::size_t n = m.dim();
  if (hermiticity_defect(m) > tolerance)
    throw Error(ErrorCode::NotHermitian, "eigensolver input deviates from Hermitian by more than tolerance");

  ComplexMatrix a = m;
  for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();
  ComplexMatrix v = ComplexMatrix::identity(n);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };
  double scale = 0.0;
  for (const auto& z : a.entries()) scale += std::norm(z);
  scale = std::max(std::sqrt(scale), 1e-300);

  for (int sweep = 0; sweep < 100 && off_norm() > 1e-15 * scale; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag < 1e-300) continue;
        const Complex phase = apq / mag;  // e^{i phi}
        const double app = a(p, p).real(), aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // G = diag(1, e^{-i phi}) * [[c, s], [-s, c]]
        const Complex gpp = c, gpq = s;
        const Complex gqp = -s * std::conj(phase), gqq = c * std::conj(phase);

        for (std::size_t k = 0; k < n; ++k) {  // a <- a G
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * gpp + akq * gqp;
          a(k, q) = akp * gpq + akq * gqq;
        }
        for (std::size_t k = 0; k < n; ++k) {  // a <- G^dagger a
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
          a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {  // v <- v G
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * gpp + vkq * gqp;
          v(k, q) = vkp * gpq + vkq * gqq;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x).real() > a(y, y).real(); });

  EigenSystem out{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

/// Real eigenvalues, sorted descending.
inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m, double tolerance = kHermitianTolerance) {
  return hermitian_eigensystem(m, tolerance).values;
}

/// Eigenvalues at or below this fraction of the largest one are rounding noise.
inline constexpr double kRelativeRankFloor = 1e-14;

/// Principal square root of a positive-semidefinite Hermitian matrix. Eigenvalues
/// in [-floor, 0) and those within kRelativeRankFloor of zero relative to the
/// largest are treated as zero.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& m, double floor = 1e-10) {
  const auto es = hermitian_eigensystem(m);
  const std::size_t n = m.dim();
  const double noise = n == 0 ? 0.0 : kRelativeRankFloor * std::max(es.values.front(), 0.0);
  ComplexMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = es.values[k];
    if (lam < -floor) throw Error(ErrorCode::NotPositive, "matrix has a negative eigenvalue");
    const double r = lam <= noise ? 0.0 : std::sqrt(lam);
    if (r == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += r * es.vectors(i, k) * std::conj(es.vectors(j, k));
  }
  return out;
}

}  // namespace dephase
