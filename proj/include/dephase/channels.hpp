#pragma once

// Pure-dephasing channels in operator-sum form. Every decomposition operator
// here is a real diagonal matrix, built from a per-basis-state pattern so that
// non-adjacent supports (e.g. the pair AC) need no permutation.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dephase/density.hpp"
#include "dephase/error.hpp"
#include "dephase/matrix.hpp"

namespace dephase {

struct DephasingParams {
  double rate = 0.0;  ///< Gamma, inverse time
  double time = 0.0;

  void validate() const {
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw Error(ErrorCode::InvalidArgument, "dephasing rate must be finite and >= 0");
    if (!(time >= 0.0) || !std::isfinite(time)) throw Error(ErrorCode::InvalidArgument, "time must be finite and >= 0");
  }
};

/// gamma(t) = exp(-Gamma t / 2), the phase-relaxation factor.
inline double gamma(const DephasingParams& p) {
  p.validate();
  return std::exp(-p.rate * p.time / 2.0);
}

struct OmegaFactors {
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
};

inline OmegaFactors omega_factors_from_gamma(double g) {
  const double g2 = g * g;
  const double one_minus_g2 = std::max(0.0, 1.0 - g2);
  return {std::sqrt(one_minus_g2), -g2 * std::sqrt(one_minus_g2), std::sqrt(one_minus_g2 * std::max(0.0, 1.0 - g2 * g2))};
}

inline OmegaFactors omega_factors(const DephasingParams& p) { return omega_factors_from_gamma(gamma(p)); }

// ---------------------------------------------------------------------------
// Channel descriptions

enum class ChannelKind { Local, PairCollective, TripleCollective };

inline const char* to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::Local: return "local";
    case ChannelKind::PairCollective: return "pair";
    case ChannelKind::TripleCollective: return "triple";
  }
  return "?";
}

struct Channel {
  ChannelKind kind = ChannelKind::Local;
  QubitSet support;
  double rate = 0.0;

  static Channel local(Qubit q, double rate) { return {ChannelKind::Local, QubitSet{q}, rate}; }
  static Channel pair(Qubit q1, Qubit q2, double rate) {
    if (q1 == q2) throw Error(ErrorCode::InvalidArgument, "pair-collective channel needs two distinct qubits");
    return {ChannelKind::PairCollective, QubitSet{q1, q2}, rate};
  }
  static Channel triple(double rate) { return {ChannelKind::TripleCollective, QubitSet{Qubit::A, Qubit::B, Qubit::C}, rate}; }

  /// D(A), E(BC), F(ABC) style label.
  std::string label() const {
    const char* prefix = kind == ChannelKind::Local ? "D" : kind == ChannelKind::PairCollective ? "E" : "F";
    return std::string(prefix) + "(" + support.to_string() + ")";
  }

  void validate() const {
    const int expected = kind == ChannelKind::Local ? 1 : kind == ChannelKind::PairCollective ? 2 : 3;
    if (support.size() != expected)
      throw Error(ErrorCode::InvalidScenario, std::string(to_string(kind)) + " channel needs " + std::to_string(expected) + " qubit(s)");
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw Error(ErrorCode::InvalidScenario, "channel rate must be finite and >= 0");
  }
};

struct KrausSet {
  std::vector<ComplexMatrix> operators;
};

inline constexpr double kCompletenessTolerance = 1e-12;
inline constexpr double kCompletenessRefusal = 1e-9;

namespace detail {

/// Diagonal matrix on an n-qubit register whose entry for basis state m is f(m).
inline ComplexMatrix diagonal_from(int n, const std::function<double(std::size_t)>& f) {
  const std::size_t dim = std::size_t{1} << n;
  ComplexMatrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = f(i);
  return m;
}

inline void require_register(int n) {
  if (n < 1 || n > kMaxQubits) throw Error(ErrorCode::InvalidArgument, "register size must be 1..3");
}

inline void require_in_register(Qubit q, int n) {
  if (static_cast<int>(q) >= n)
    throw Error(ErrorCode::InvalidArgument, std::string("qubit ") + to_char(q) + " outside a " + std::to_string(n) + "-qubit register");
}

}  // namespace detail

/// diag(1, gamma) and diag(0, omega) on qubit q, identity elsewhere.
inline KrausSet build_local_kraus(Qubit q, int n, const DephasingParams& p) {
  detail::require_register(n);
  detail::require_in_register(q, n);
  const double g = gamma(p);
  const double w = std::sqrt(std::max(0.0, 1.0 - g * g));
  const int pos = static_cast<int>(q);
  return {{detail::diagonal_from(n, [&](std::size_t m) { return qubit_bit(m, pos, n) ? g : 1.0; }),
           detail::diagonal_from(n, [&](std::size_t m) { return qubit_bit(m, pos, n) ? w : 0.0; })}};
}

/// Patterns (g,1,1,g), (w1,0,0,w2), (0,0,0,w3) over the pair states 00,01,10,11,
/// identity on any remaining qubit.
inline KrausSet build_pair_collective_kraus(Qubit q1, Qubit q2, int n, const DephasingParams& p) {
  detail::require_register(n);
  if (q1 == q2) throw Error(ErrorCode::InvalidArgument, "pair-collective channel needs two distinct qubits");
  detail::require_in_register(q1, n);
  detail::require_in_register(q2, n);
  const double g = gamma(p);
  const auto w = omega_factors_from_gamma(g);
  const int p1 = std::min(static_cast<int>(q1), static_cast<int>(q2));
  const int p2 = std::max(static_cast<int>(q1), static_cast<int>(q2));
  auto pair_state = [&](std::size_t m) { return 2 * qubit_bit(m, p1, n) + qubit_bit(m, p2, n); };
  return {{detail::diagonal_from(n, [&](std::size_t m) { const int s = pair_state(m); return (s == 0 || s == 3) ? g : 1.0; }),
           detail::diagonal_from(n, [&](std::size_t m) { const int s = pair_state(m); return s == 0 ? w.w1 : s == 3 ? w.w2 : 0.0; }),
           detail::diagonal_from(n, [&](std::size_t m) { return pair_state(m) == 3 ? w.w3 : 0.0; })}};
}

/// diag(g,1,...,1,g), diag(w1,0,...,0,w2), diag(0,...,0,w3) on the full three-qubit register.
inline KrausSet build_triple_collective_kraus(int n, const DephasingParams& p) {
  if (n != 3) throw Error(ErrorCode::InvalidArgument, "triple-collective channel requires a 3-qubit register");
  const double g = gamma(p);
  const auto w = omega_factors_from_gamma(g);
  return {{detail::diagonal_from(n, [&](std::size_t m) { return (m == 0 || m == 7) ? g : 1.0; }),
           detail::diagonal_from(n, [&](std::size_t m) { return m == 0 ? w.w1 : m == 7 ? w.w2 : 0.0; }),
           detail::diagonal_from(n, [&](std::size_t m) { return m == 7 ? w.w3 : 0.0; })}};
}

inline KrausSet build_kraus(const Channel& ch, int n, double t) {
  ch.validate();
  const DephasingParams p{ch.rate, t};
  const auto qs = ch.support.qubits();
  switch (ch.kind) {
    case ChannelKind::Local: return build_local_kraus(qs[0], n, p);
    case ChannelKind::PairCollective: return build_pair_collective_kraus(qs[0], qs[1], n, p);
    case ChannelKind::TripleCollective: return build_triple_collective_kraus(n, p);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown channel kind");
}

/// Max-norm of sum_k K_k^dagger K_k - I.
inline double verify_completeness(const KrausSet& ks) {
  if (ks.operators.empty()) throw Error(ErrorCode::InvalidArgument, "empty Kraus set");
  const std::size_t dim = ks.operators.front().dim();
  ComplexMatrix sum(dim, dim);
  for (const auto& k : ks.operators) sum += k.adjoint() * k;
  return max_abs(sum - ComplexMatrix::identity(dim));
}

/// sum_k K_k rho K_k^dagger. Refuses sets whose completeness defect exceeds 1e-9.
inline DensityMatrix apply_kraus(const DensityMatrix& rho, const KrausSet& ks) {
  for (const auto& k : ks.operators)
    if (k.rows() != rho.dim() || k.cols() != rho.dim())
      throw Error(ErrorCode::DimensionMismatch, "Kraus operator dimension differs from the state");
  const double defect = verify_completeness(ks);
  if (defect > kCompletenessRefusal)
    throw Error(ErrorCode::IncompleteKrausSet, "Kraus set violates completeness by " + std::to_string(defect));
  ComplexMatrix out(rho.dim(), rho.dim());
  for (const auto& k : ks.operators) out += k * rho.matrix() * k.adjoint();
  return DensityMatrix::trusted(std::move(out));
}

// ---------------------------------------------------------------------------
// Scenarios

struct NoiseScenario {
  int qubits = 2;
  std::vector<Channel> channels;
  /// Lifts the one-noise-type-per-qubit restriction. Such scenarios are for
  /// exploration only and are never classified as reference environments.
  bool allow_shared_qubits = false;

  void validate() const {
    if (qubits != 2 && qubits != 3) throw Error(ErrorCode::InvalidScenario, "register size must be 2 or 3");
    const QubitSet reg = QubitSet::first(qubits);
    QubitSet seen;
    for (std::size_t i = 0; i < channels.size(); ++i) {
      const auto& ch = channels[i];
      ch.validate();
      if (!ch.support.is_subset_of(reg))
        throw Error(ErrorCode::InvalidScenario, "channel " + std::to_string(i) + " (" + ch.label() + ") lies outside the register");
      if (!allow_shared_qubits && ch.support.intersects(seen))
        throw Error(ErrorCode::InvalidScenario,
                    "channel " + std::to_string(i) + " (" + ch.label() + ") acts on a qubit already subject to another channel");
      for (Qubit q : ch.support.qubits()) seen.insert(q);
    }
  }

  bool has_kind(ChannelKind k) const {
    for (const auto& ch : channels)
      if (ch.kind == k) return true;
    return false;
  }

  /// Smallest positive rate, or 0 if every channel is off.
  double min_rate() const {
    double best = 0.0;
    for (const auto& ch : channels)
      if (ch.rate > 0.0 && (best == 0.0 || ch.rate < best)) best = ch.rate;
    return best;
  }

  std::string label() const {
    if (channels.empty()) return "none";
    std::string s;
    for (const auto& ch : channels) s += ch.label();
    return s;
  }
};

/// Applies each channel's operator sum at time t in list order. The operators
/// are diagonal, so the order does not affect the result.
inline DensityMatrix evolve(const DensityMatrix& rho0, const NoiseScenario& scenario, double t) {
  scenario.validate();
  if (rho0.qubits() != scenario.qubits)
    throw Error(ErrorCode::InvalidScenario, "scenario register size differs from the state");
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "time must be finite and >= 0");
  DensityMatrix rho = rho0;
  for (const auto& ch : scenario.channels) rho = apply_kraus(rho, build_kraus(ch, scenario.qubits, t));
  return rho;
}

}  // namespace dephase
