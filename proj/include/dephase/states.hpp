#pragma once

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dephase/density.hpp"
#include "dephase/error.hpp"
#include "dephase/matrix.hpp"

namespace dephase {

/// Two-qubit classes use the basis |++>,|+->,|-+>,|--> (indices 0..3); the
/// three-qubit classes use |000>..|111> (indices 0..7).
enum class StateClass { Fragile, Fragile2, Robust, Robust2, Generic2, W, GHZ };

struct StateClassInfo {
  StateClass cls;
  std::string_view name;
  int qubits;
  std::vector<std::size_t> support;         ///< basis index of each coefficient
  std::vector<std::string_view> coeff_names;
};

inline const std::vector<StateClassInfo>& state_classes() {
  static const std::vector<StateClassInfo> table = {
      {StateClass::Fragile, "fragile", 2, {0, 1, 3}, {"a", "b", "d"}},
      {StateClass::Fragile2, "fragile2", 2, {0, 2, 3}, {"a", "c", "d"}},
      {StateClass::Robust, "robust", 2, {0, 1, 2}, {"a", "b", "c"}},
      {StateClass::Robust2, "robust2", 2, {1, 2, 3}, {"b", "c", "d"}},
      {StateClass::Generic2, "generic2", 2, {0, 1, 2, 3}, {"a", "b", "c", "d"}},
      {StateClass::W, "w", 3, {1, 2, 4}, {"a1", "a2", "a4"}},
      {StateClass::GHZ, "ghz", 3, {0, 7}, {"a0", "a7"}},
  };
  return table;
}

inline const StateClassInfo& info(StateClass cls) {
  for (const auto& i : state_classes())
    if (i.cls == cls) return i;
  throw Error(ErrorCode::InvalidArgument, "unknown state class");
}

inline StateClass parse_state_class(std::string_view name) {
  for (const auto& i : state_classes())
    if (i.name == name) return i.cls;
  throw Error(ErrorCode::InvalidArgument, "unknown state class '" + std::string(name) + "'");
}

inline constexpr double kNormalizationTolerance = 1e-9;

/// Coefficients selecting a pure state of one class, in the class's coefficient order.
struct StateSpec {
  StateClass cls = StateClass::Fragile;
  std::vector<Complex> coefficients;

  static StateSpec fragile(Complex a, Complex b, Complex d) { return {StateClass::Fragile, {a, b, d}}; }
  static StateSpec fragile2(Complex a, Complex c, Complex d) { return {StateClass::Fragile2, {a, c, d}}; }
  static StateSpec robust(Complex a, Complex b, Complex c) { return {StateClass::Robust, {a, b, c}}; }
  static StateSpec robust2(Complex b, Complex c, Complex d) { return {StateClass::Robust2, {b, c, d}}; }
  static StateSpec generic2(Complex a, Complex b, Complex c, Complex d) { return {StateClass::Generic2, {a, b, c, d}}; }
  static StateSpec w(Complex a1, Complex a2, Complex a4) { return {StateClass::W, {a1, a2, a4}}; }
  static StateSpec ghz(Complex a0, Complex a7) { return {StateClass::GHZ, {a0, a7}}; }

  int qubits() const { return info(cls).qubits; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& c : coefficients) s += std::norm(c);
    return s;
  }

  /// Coefficient count must match the class; normalisation is checked, never repaired.
  void validate() const {
    const auto& ci = info(cls);
    if (coefficients.size() != ci.support.size())
      throw Error(ErrorCode::InvalidArgument, std::string(ci.name) + " state needs " + std::to_string(ci.support.size()) + " coefficients");
    for (const auto& c : coefficients)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw Error(ErrorCode::InvalidArgument, "non-finite coefficient");
    if (std::abs(norm_squared() - 1.0) > kNormalizationTolerance)
      throw Error(ErrorCode::NotNormalized, "coefficients of " + std::string(ci.name) + " state have squared norm " + std::to_string(norm_squared()));
  }

  std::vector<Complex> amplitudes() const {
    validate();
    const auto& ci = info(cls);
    std::vector<Complex> psi(std::size_t{1} << ci.qubits, Complex{0.0, 0.0});
    for (std::size_t k = 0; k < ci.support.size(); ++k) psi[ci.support[k]] = coefficients[k];
    return psi;
  }
};

/// Normalised coefficients with independent standard-normal real and imaginary
/// parts, drawn from a generator seeded with `seed`.
inline StateSpec draw_state(StateClass cls, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  StateSpec s{cls, {}};
  double norm = 0.0;
  for (std::size_t k = 0; k < info(cls).support.size(); ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    s.coefficients.emplace_back(re, im);
    norm += re * re + im * im;
  }
  for (auto& c : s.coefficients) c /= std::sqrt(norm);
  return s;
}

/// |psi><psi| in the computational ordering.
inline DensityMatrix projector(const StateSpec& spec) {
  const auto psi = spec.amplitudes();
  ComplexMatrix m(psi.size(), psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i)
    for (std::size_t j = 0; j < psi.size(); ++j) m(i, j) = psi[i] * std::conj(psi[j]);
  return DensityMatrix::trusted(std::move(m));
}

/// Every one- and two-qubit reduction of a 2- or 3-qubit state, keyed by the kept qubits.
inline std::map<QubitSet, DensityMatrix> reduced_all(const DensityMatrix& rho) {
  if (rho.qubits() < 2) throw Error(ErrorCode::InvalidArgument, "reductions need at least two qubits");
  const QubitSet reg = rho.labels();
  std::map<QubitSet, DensityMatrix> out;
  for (unsigned mask = 1; mask < (1u << rho.qubits()) - 1; ++mask) {
    QubitSet keep;
    for (int q = 0; q < rho.qubits(); ++q)
      if ((mask >> q) & 1u) keep.insert(static_cast<Qubit>(q));
    out.emplace(keep, DensityMatrix::trusted(partial_trace(rho.matrix(), keep, reg)));
  }
  return out;
}

}  // namespace dephase
