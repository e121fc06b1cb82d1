#pragma once

// Shared generators for the test suites.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "dephase/analytic.hpp"
#include "dephase/matrix.hpp"
#include "dephase/states.hpp"

namespace dephase::testing {

inline Complex random_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng)};
}

/// Haar-like random normalised coefficients for a state class.
inline StateSpec random_spec(StateClass cls, std::mt19937_64& rng) {
  StateSpec s{cls, {}};
  double norm = 0.0;
  for (std::size_t k = 0; k < info(cls).support.size(); ++k) {
    s.coefficients.push_back(random_complex(rng));
    norm += std::norm(s.coefficients.back());
  }
  for (auto& c : s.coefficients) c /= std::sqrt(norm);
  return s;
}

/// Random full-rank mixed state of the given dimension: G G^dagger / tr.
inline ComplexMatrix random_density(std::size_t dim, std::mt19937_64& rng) {
  ComplexMatrix g(dim, dim);
  for (auto& z : g.entries()) z = random_complex(rng);
  ComplexMatrix rho = g * g.adjoint();
  rho *= Complex{1.0 / rho.trace().real(), 0.0};
  return rho;
}

inline ComplexMatrix random_hermitian(std::size_t dim, std::mt19937_64& rng) {
  ComplexMatrix g(dim, dim);
  for (auto& z : g.entries()) z = random_complex(rng);
  return (g + g.adjoint()) * Complex{0.5, 0.0};
}

/// Random 2x2 unitary e^{i a} [[cos t e^{i b}, sin t e^{i c}], [-sin t e^{-i c}, cos t e^{-i b}]].
inline ComplexMatrix random_unitary2(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  const double a = u(rng), b = u(rng), c = u(rng), t = u(rng) / 4.0;
  const Complex ea = std::polar(1.0, a);
  return ComplexMatrix(2, 2, {ea * std::cos(t) * std::polar(1.0, b), ea * std::sin(t) * std::polar(1.0, c),
                              -ea * std::sin(t) * std::polar(1.0, -c), ea * std::cos(t) * std::polar(1.0, -b)});
}

inline double min_eigenvalue(const ComplexMatrix& m) { return hermitian_eigenvalues(m).back(); }

/// Every (class, reference scenario) pair with a closed form.
inline std::vector<std::pair<StateClass, PaperScenario>> closed_form_pairs() {
  std::vector<std::pair<StateClass, PaperScenario>> out;
  for (auto c : {StateClass::Fragile, StateClass::Fragile2, StateClass::Robust, StateClass::Robust2})
    out.emplace_back(c, PaperScenario::Collective2);
  for (auto c : {StateClass::W, StateClass::GHZ})
    for (auto s : kThreeQubitScenarios) out.emplace_back(c, s);
  return out;
}

}  // namespace dephase::testing
