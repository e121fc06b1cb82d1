#pragma once

// Monte Carlo ensemble average over classical white-noise fields coupled via
// sigma_z sums. The Hamiltonians are diagonal and commute at all times, so each
// trajectory is fully described by the accumulated field phases; these are
// drawn as exact Gaussian increments of variance Gamma*dt per step. The
// coupling constant cancels between the correlator and the Hamiltonian and is
// never materialised.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "dephase/channels.hpp"
#include "dephase/density.hpp"
#include "dephase/states.hpp"

namespace dephase {

/// A noise field is described by the same (scale, support, rate) triple as the
/// channel it induces.
using FieldSpec = Channel;

struct TrajectoryConfig {
  std::size_t n_trajectories = 10000;
  double dt = 0.01;
  std::uint64_t seed = 1;
  double t_final = 1.0;
  unsigned threads = 1;

  void validate() const {
    if (n_trajectories < 1) throw Error(ErrorCode::InvalidArgument, "need at least one trajectory");
    if (!(t_final > 0.0) || !std::isfinite(t_final)) throw Error(ErrorCode::InvalidArgument, "t_final must be positive");
    if (!(dt > 0.0) || dt > t_final) throw Error(ErrorCode::InvalidArgument, "dt must lie in (0, t_final]");
    if (threads < 1) throw Error(ErrorCode::InvalidArgument, "threads must be >= 1");
  }
};

/// splitmix64 finaliser.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of trajectory k; depends only on (seed, k).
inline std::uint64_t trajectory_seed(std::uint64_t seed, std::uint64_t k) { return mix64(mix64(seed) ^ mix64(k + 0x632be59bd9b4e019ULL)); }

/// Eigenvalue of the sigma_z sum over `support` for basis state m (|0> -> +1).
inline int sigma_z_sum(std::size_t m, QubitSet support, int n) {
  int s = 0;
  for (Qubit q : support.qubits()) s += qubit_bit(m, static_cast<int>(q), n) ? -1 : 1;
  return s;
}

struct MonteCarloResult {
  ComplexMatrix mean;
  ComplexMatrix std_error;  ///< real and imaginary parts hold the standard errors of the respective components
  std::size_t n_trajectories = 0;
};

namespace detail {

inline void validate_fields(const std::vector<FieldSpec>& fields, int n) {
  const QubitSet reg = QubitSet::first(n);
  for (const auto& f : fields) {
    f.validate();
    if (!f.support.is_subset_of(reg))
      throw Error(ErrorCode::InvalidScenario, "field " + f.label() + " lies outside the " + std::to_string(n) + "-qubit register");
  }
}

/// Phase accrued by each basis state along trajectory k.
inline void trajectory_phases(const std::vector<FieldSpec>& fields, const std::vector<std::vector<int>>& spins, const TrajectoryConfig& cfg,
                              std::uint64_t k, std::span<double> theta) {
  std::mt19937_64 rng(trajectory_seed(cfg.seed, k));
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_final / cfg.dt - 1e-12));
  std::fill(theta.begin(), theta.end(), 0.0);
  for (std::size_t f = 0; f < fields.size(); ++f) {
    double phi = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const double h = std::min(cfg.dt, cfg.t_final - static_cast<double>(s) * cfg.dt);
      phi += std::sqrt(fields[f].rate * h) * normal(rng);
    }
    for (std::size_t m = 0; m < theta.size(); ++m) theta[m] += 0.5 * spins[f][m] * phi;
  }
}

}  // namespace detail

/// Mean of U rho0 U^dagger over trajectories. Output is bit-identical for a
/// given (seed, config, inputs) whatever the thread count: trajectories are
/// generated in parallel but accumulated in index order.
inline MonteCarloResult simulate_average(const DensityMatrix& rho0, const std::vector<FieldSpec>& fields, const TrajectoryConfig& cfg) {
  cfg.validate();
  const int n = rho0.qubits();
  detail::validate_fields(fields, n);
  const std::size_t dim = rho0.dim();

  std::vector<std::vector<int>> spins(fields.size(), std::vector<int>(dim));
  for (std::size_t f = 0; f < fields.size(); ++f)
    for (std::size_t m = 0; m < dim; ++m) spins[f][m] = sigma_z_sum(m, fields[f].support, n);

  std::vector<Complex> sum(dim * dim, 0.0);
  std::vector<double> sq_re(dim * dim, 0.0), sq_im(dim * dim, 0.0);

  constexpr std::size_t kBlock = 1 << 14;
  std::vector<double> theta(kBlock * dim);
  for (std::size_t begin = 0; begin < cfg.n_trajectories; begin += kBlock) {
    const std::size_t count = std::min(kBlock, cfg.n_trajectories - begin);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(cfg.threads, count));
    auto work = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k < hi; ++k)
        detail::trajectory_phases(fields, spins, cfg, begin + k, std::span<double>(theta.data() + k * dim, dim));
    };
    if (workers <= 1) {
      work(0, count);
    } else {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (count + workers - 1) / workers;
      for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk, hi = std::min(count, lo + chunk);
        if (lo < hi) pool.emplace_back(work, lo, hi);
      }
    }
    for (std::size_t k = 0; k < count; ++k) {
      const double* th = theta.data() + k * dim;
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
          const Complex z = rho0(i, j) * std::polar(1.0, th[i] - th[j]);
          sum[i * dim + j] += z;
          sq_re[i * dim + j] += z.real() * z.real();
          sq_im[i * dim + j] += z.imag() * z.imag();
        }
    }
  }

  const double nt = static_cast<double>(cfg.n_trajectories);
  MonteCarloResult out{ComplexMatrix(dim, dim), ComplexMatrix(dim, dim), cfg.n_trajectories};
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      const std::size_t idx = i * dim + j;
      const Complex mean = sum[idx] / nt;
      out.mean(i, j) = mean;
      if (cfg.n_trajectories > 1) {
        const double var_re = std::max(0.0, (sq_re[idx] - nt * mean.real() * mean.real()) / (nt - 1.0));
        const double var_im = std::max(0.0, (sq_im[idx] - nt * mean.imag() * mean.imag()) / (nt - 1.0));
        out.std_error(i, j) = Complex{std::sqrt(var_re / nt), std::sqrt(var_im / nt)};
      }
    }
  // Populations never acquire a phase.
  for (std::size_t i = 0; i < dim; ++i) out.mean(i, i) = rho0(i, i);
  return out;
}

/// Exact ensemble average for Gaussian phase diffusion: element (m, n) is
/// multiplied by exp(-Gamma t (dS/2)^2 / 2) per field, dS the sigma_z-sum gap.
inline DensityMatrix phase_diffusion_expectation(const DensityMatrix& rho0, const std::vector<FieldSpec>& fields, double t) {
  const int n = rho0.qubits();
  detail::validate_fields(fields, n);
  ComplexMatrix m = rho0.matrix();
  for (std::size_t i = 0; i < rho0.dim(); ++i)
    for (std::size_t j = 0; j < rho0.dim(); ++j) {
      double exponent = 0.0;
      for (const auto& f : fields) {
        const double half_gap = 0.5 * (sigma_z_sum(i, f.support, n) - sigma_z_sum(j, f.support, n));
        exponent += f.rate * t * half_gap * half_gap / 2.0;
      }
      m(i, j) *= std::exp(-exponent);
    }
  return DensityMatrix::trusted(std::move(m));
}

// ---------------------------------------------------------------------------
// Comparison with the operator-sum channels

struct ElementZScore {
  std::size_t row = 0;
  std::size_t col = 0;
  double z_re = 0.0;
  double z_im = 0.0;
};

inline constexpr double kDistanceBoundFactor = 5.0;
inline constexpr double kZScoreBound = 4.0;

struct ChannelComparison {
  ComplexMatrix kraus;
  ComplexMatrix monte_carlo;
  ComplexMatrix diffusion;         ///< closed-form phase-diffusion average
  double distance = 0.0;           ///< |MC - Kraus|_F
  double statistical_scale = 0.0;  ///< 1/sqrt(n)
  double distance_bound = 0.0;     ///< 5/sqrt(n)
  double max_abs_z = 0.0;
  std::vector<ElementZScore> z_scores;  ///< upper triangle, elements with nonzero spread
  double diffusion_vs_kraus = 0.0;
  double diffusion_vs_mc = 0.0;
  bool informational = false;  ///< equivalence not established; not a pass/fail check
  bool passed = false;
};

/// Channels whose operator sum equals the phase-diffusion average.
inline bool equivalence_established(const NoiseScenario& sc) { return !sc.has_kind(ChannelKind::TripleCollective); }

inline ChannelComparison compare_to_channel(const StateSpec& spec, const NoiseScenario& sc, const TrajectoryConfig& cfg,
                                            bool force_informational = false) {
  sc.validate();
  cfg.validate();
  const bool established = equivalence_established(sc);
  if (!established && !force_informational)
    throw Error(ErrorCode::EquivalenceNotEstablished,
                "the three-qubit collective channel is not the ensemble average of its field; rerun with the informational flag");
  const DensityMatrix rho0 = projector(spec);
  if (rho0.qubits() != sc.qubits) throw Error(ErrorCode::InvalidScenario, "scenario register size differs from the state");

  const auto mc = simulate_average(rho0, sc.channels, cfg);
  const DensityMatrix kraus = evolve(rho0, sc, cfg.t_final);
  const DensityMatrix diff = phase_diffusion_expectation(rho0, sc.channels, cfg.t_final);

  ChannelComparison out;
  out.kraus = kraus.matrix();
  out.monte_carlo = mc.mean;
  out.diffusion = diff.matrix();
  out.distance = frobenius_distance(mc.mean, kraus.matrix());
  out.statistical_scale = 1.0 / std::sqrt(static_cast<double>(cfg.n_trajectories));
  out.distance_bound = kDistanceBoundFactor * out.statistical_scale;
  out.diffusion_vs_kraus = frobenius_distance(diff.matrix(), kraus.matrix());
  out.diffusion_vs_mc = frobenius_distance(diff.matrix(), mc.mean);
  for (std::size_t i = 0; i < rho0.dim(); ++i)
    for (std::size_t j = i + 1; j < rho0.dim(); ++j) {
      const Complex se = mc.std_error(i, j);
      if (se.real() <= 1e-15 && se.imag() <= 1e-15) continue;
      const Complex d = mc.mean(i, j) - kraus(i, j);
      ElementZScore z{i, j, se.real() > 1e-15 ? d.real() / se.real() : 0.0, se.imag() > 1e-15 ? d.imag() / se.imag() : 0.0};
      out.max_abs_z = std::max({out.max_abs_z, std::abs(z.z_re), std::abs(z.z_im)});
      out.z_scores.push_back(z);
    }
  out.informational = !established;
  out.passed = out.distance < out.distance_bound && out.max_abs_z <= kZScoreBound;
  return out;
}

struct ConvergencePoint {
  std::size_t n_trajectories = 0;
  double rms_distance = 0.0;  ///< over replicates, against the exact average
  double scaled = 0.0;        ///< rms_distance * sqrt(n)
};

/// RMS Frobenius distance between Monte Carlo and exact averages for each
/// trajectory count, over `replicates` independent seeds derived from cfg.seed.
inline std::vector<ConvergencePoint> convergence_study(const DensityMatrix& rho0, const std::vector<FieldSpec>& fields,
                                                       const std::vector<std::size_t>& counts, int replicates, TrajectoryConfig cfg) {
  if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "need at least one replicate");
  const DensityMatrix exact = phase_diffusion_expectation(rho0, fields, cfg.t_final);
  const std::uint64_t base = cfg.seed;
  std::vector<ConvergencePoint> out;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    double ss = 0.0;
    for (int r = 0; r < replicates; ++r) {
      cfg.n_trajectories = counts[c];
      cfg.seed = mix64(base ^ mix64(1000003ULL * (c + 1) + static_cast<std::uint64_t>(r)));
      const double d = frobenius_distance(simulate_average(rho0, fields, cfg).mean, exact.matrix());
      ss += d * d;
    }
    const double rms = std::sqrt(ss / replicates);
    out.push_back({counts[c], rms, rms * std::sqrt(static_cast<double>(counts[c]))});
  }
  return out;
}

}  // namespace dephase
