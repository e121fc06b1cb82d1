#pragma once

// Sampling of coherence and concurrence trajectories, log-linear e-folding
// fits, the reference timescale table and the disentanglement-vs-decoherence
// audit.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dephase/analytic.hpp"
#include "dephase/channels.hpp"
#include "dephase/entanglement.hpp"
#include "dephase/states.hpp"

namespace dephase {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kZeroFloor = 1e-13;
inline constexpr double kDefaultFlatThreshold = 1e-9;

struct Trajectory {
  std::vector<double> times;
  std::vector<double> values;

  void validate() const {
    if (times.size() != values.size()) throw Error(ErrorCode::DimensionMismatch, "times and values differ in length");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw Error(ErrorCode::InvalidArgument, "times must be strictly increasing");
    for (double v : values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "trajectory values must be finite");
      if (v < 0.0) throw Error(ErrorCode::InvalidArgument, "trajectory values must be nonnegative");
    }
  }
};

struct FitResult {
  double tau = kInfinity;     ///< e-folding time; infinite when nothing decays
  double amplitude = 0.0;
  double residual = 0.0;      ///< rms of the log-linear fit, or the relative variation when constant
  bool is_constant = false;
  bool monotone = true;       ///< false when the data rise anywhere beyond rounding
  std::size_t used_samples = 0;

  bool decaying() const { return !is_constant && std::isfinite(tau); }
};

/// Least-squares fit of ln(value) = ln(amplitude) - t / tau over samples above
/// 1e-13. Data whose relative variation (max - min) / max is below
/// `flat_threshold` are reported as constant.
inline FitResult fit_exponential(const Trajectory& traj, double flat_threshold = kDefaultFlatThreshold) {
  traj.validate();
  if (traj.values.size() < 8) throw Error(ErrorCode::InsufficientData, "fit needs at least 8 samples");

  FitResult out;
  for (std::size_t i = 1; i < traj.values.size(); ++i)
    if (traj.values[i] > traj.values[i - 1] * (1.0 + 1e-9) + 1e-15) out.monotone = false;

  const auto [lo, hi] = std::minmax_element(traj.values.begin(), traj.values.end());
  const double variation = *hi > kZeroFloor ? (*hi - *lo) / *hi : 0.0;
  if (variation < flat_threshold) {
    double mean = 0.0;
    for (double v : traj.values) mean += v;
    out.is_constant = true;
    out.amplitude = mean / static_cast<double>(traj.values.size());
    out.residual = variation;
    out.used_samples = traj.values.size();
    return out;
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < traj.values.size(); ++i)
    if (traj.values[i] > kZeroFloor) {
      xs.push_back(traj.times[i]);
      ys.push_back(std::log(traj.values[i]));
    }
  if (xs.size() < 3) throw Error(ErrorCode::InsufficientData, "fewer than 3 samples above the zero floor");

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ss += r * r;
  }
  out.amplitude = std::exp(intercept);
  out.residual = std::sqrt(ss / n);
  out.used_samples = xs.size();
  out.tau = slope < 0.0 ? -1.0 / slope : kInfinity;
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

struct TimeGrid {
  double t_max = 3.0;
  int samples = 64;

  /// [0, 3 / Gamma_min] with 64 samples.
  static TimeGrid default_for(const NoiseScenario& sc) {
    const double g = sc.min_rate();
    return {g > 0.0 ? 3.0 / g : 3.0, 64};
  }

  std::vector<double> points() const {
    if (samples < 2) throw Error(ErrorCode::InvalidArgument, "time grid needs at least 2 samples");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw Error(ErrorCode::InvalidArgument, "t_max must be positive");
    std::vector<double> ts(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) ts[static_cast<std::size_t>(i)] = t_max * i / (samples - 1);
    return ts;
  }
};

/// Two-qubit subsystems of a register, in AB, AC, BC order.
inline std::vector<QubitSet> qubit_pairs(int n) {
  if (n == 2) return {QubitSet{Qubit::A, Qubit::B}};
  if (n == 3) return {QubitSet{Qubit::A, Qubit::B}, QubitSet{Qubit::A, Qubit::C}, QubitSet{Qubit::B, Qubit::C}};
  throw Error(ErrorCode::InvalidArgument, "register size must be 2 or 3");
}

struct Snapshot {
  double t = 0.0;
  DensityMatrix rho;
  std::map<QubitSet, DensityMatrix> reduced;
  std::map<QubitSet, double> concurrence;
};

inline std::vector<Snapshot> sample_evolution(const StateSpec& spec, const NoiseScenario& sc, const std::vector<double>& times) {
  const DensityMatrix rho0 = projector(spec);
  std::vector<Snapshot> out;
  out.reserve(times.size());
  for (double t : times) {
    DensityMatrix rho = evolve(rho0, sc, t);
    auto reduced = reduced_all(rho);
    std::map<QubitSet, double> conc;
    for (QubitSet pair : qubit_pairs(sc.qubits))
      conc[pair] = concurrence(sc.qubits == 2 ? rho.matrix() : reduced.at(pair).matrix()).value;
    out.push_back({t, std::move(rho), std::move(reduced), std::move(conc)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reference timescale table

enum class Convention { C, C2 };

inline const char* to_string(Convention c) { return c == Convention::C ? "C" : "C2"; }

/// Which fitted quantity a tabulated timescale refers to.
enum class TauMeasure {
  FullSlowest,      ///< slowest decaying element of the register matrix
  FullFastest,      ///< fastest decaying element of the register matrix
  PairSlowest,      ///< slowest decaying element among two-qubit reductions
  SingleSlowest,    ///< slowest decaying element among single-qubit reductions
  Disentanglement,  ///< fastest decaying pairwise concurrence
};

struct PaperTau {
  std::string label;    ///< e.g. "tau_2-dec(fast)"
  std::string formula;  ///< as printed, in terms of the scale rates
  double value = 0.0;
  TauMeasure measure = TauMeasure::FullSlowest;
  std::optional<Convention> convention;  ///< set for disentanglement entries
};

/// Tabulated timescales for a reference (class, scenario) pair, with the rate
/// symbols bound to the scenario's rates. Values are transcribed as printed,
/// including the additive composition used for combined environments.
inline std::vector<PaperTau> paper_tau_table(StateClass cls, const NoiseScenario& sc) {
  const auto kind = classify(sc);
  if (!kind) throw Error(ErrorCode::UnsupportedPair, "scenario " + sc.label() + " is not a reference environment");
  auto unsupported = [&] {
    return Error(ErrorCode::UnsupportedPair, "no tabulated timescales for " + std::string(info(cls).name) + " under " + std::string(to_string(*kind)));
  };
  auto rate = [&](ChannelKind k) {
    for (const auto& ch : sc.channels)
      if (ch.kind == k) return ch.rate;
    return 0.0;
  };
  const double g1 = rate(ChannelKind::Local), g2 = rate(ChannelKind::PairCollective), g3 = rate(ChannelKind::TripleCollective);
  using M = TauMeasure;

  if (*kind == PaperScenario::Collective2) {
    const double g = g2;
    if (cls == StateClass::Fragile)
      return {{"tau_2-dec(slow)", "2/Gamma", 2.0 / g, M::FullSlowest, {}},
              {"tau_2-dec(fast)", "1/(2 Gamma)", 0.5 / g, M::FullFastest, {}},
              {"tau_1-dec", "1/Gamma", 1.0 / g, M::SingleSlowest, {}},
              {"tau_dis", "1/(2 Gamma)", 0.5 / g, M::Disentanglement, Convention::C}};
    if (cls == StateClass::Robust)
      return {{"tau_2-dec", "2/Gamma", 2.0 / g, M::FullSlowest, {}}, {"tau_1-dec", "1/Gamma", 1.0 / g, M::SingleSlowest, {}}};
    throw unsupported();
  }

  if (*kind == PaperScenario::DDD) {
    for (const auto& ch : sc.channels)
      if (ch.rate != g1) throw Error(ErrorCode::UnsupportedPair, "tabulated DDD timescales assume equal local rates");
  }

  if (cls == StateClass::W) {
    switch (*kind) {
      case PaperScenario::D:
        return {{"tau_3-dec", "2/Gamma_1", 2.0 / g1, M::FullSlowest, {}},
                {"tau_2-dec", "2/Gamma_1", 2.0 / g1, M::PairSlowest, {}},
                {"tau_dis", "1/Gamma_1", 1.0 / g1, M::Disentanglement, Convention::C2}};
      case PaperScenario::E:
        return {{"tau_3-dec", "2/Gamma_2", 2.0 / g2, M::FullSlowest, {}},
                {"tau_2-dec", "2/Gamma_2", 2.0 / g2, M::PairSlowest, {}},
                {"tau_dis", "1/Gamma_2", 1.0 / g2, M::Disentanglement, Convention::C2}};
      case PaperScenario::F: return {};
      case PaperScenario::DDD:
        return {{"tau_3-dec", "1/Gamma_1", 1.0 / g1, M::FullSlowest, {}},
                {"tau_2-dec", "1/Gamma_1", 1.0 / g1, M::PairSlowest, {}},
                {"tau_dis", "1/(2 Gamma_1)", 0.5 / g1, M::Disentanglement, Convention::C2}};
      case PaperScenario::DE:
        return {{"tau_3-dec", "2/Gamma_1 + 2/Gamma_2", 2.0 / g1 + 2.0 / g2, M::FullSlowest, {}},
                {"tau_2-dec", "2/Gamma_1 + 2/Gamma_2", 2.0 / g1 + 2.0 / g2, M::PairSlowest, {}},
                {"tau_dis", "1/Gamma_1 + 1/Gamma_2", 1.0 / g1 + 1.0 / g2, M::Disentanglement, Convention::C2}};
      default: throw unsupported();
    }
  }

  if (cls == StateClass::GHZ) {
    switch (*kind) {
      case PaperScenario::D: return {{"tau_3-dec", "2/Gamma_1", 2.0 / g1, M::FullSlowest, {}}};
      case PaperScenario::E: return {{"tau_3-dec", "1/(2 Gamma_2)", 0.5 / g2, M::FullSlowest, {}}};
      case PaperScenario::F: return {{"tau_3-dec", "1/(2 Gamma_3)", 0.5 / g3, M::FullSlowest, {}}};
      case PaperScenario::DDD: return {{"tau_3-dec", "(2/3)/Gamma_1", (2.0 / 3.0) / g1, M::FullSlowest, {}}};
      case PaperScenario::DE: return {{"tau_3-dec", "2/Gamma_1 + 1/(2 Gamma_2)", 2.0 / g1 + 0.5 / g2, M::FullSlowest, {}}};
      default: throw unsupported();
    }
  }
  throw unsupported();
}

// ---------------------------------------------------------------------------
// Timescale report

struct ElementFit {
  std::size_t row = 0;
  std::size_t col = 0;
  FitResult fit;
  std::optional<double> predicted_tau;  ///< from the closed-form decay table, when available
};

struct PairFit {
  QubitSet pair;
  FitResult c;
  FitResult c2;
  /// First sample time at which C is zero after starting positive (sudden death).
  std::optional<double> vanishes_at;
  /// Concurrence left once every decaying coherence has vanished.
  double asymptotic = 0.0;
};

struct TimescaleReport {
  std::string scenario_id;
  StateClass cls = StateClass::Fragile;
  std::optional<PaperScenario> reference;
  std::vector<double> times;
  std::vector<ElementFit> elements;                         ///< register matrix, upper triangle
  std::map<QubitSet, std::vector<ElementFit>> reduced;      ///< per proper subsystem
  std::vector<PairFit> pairs;
  std::vector<PaperTau> paper;                              ///< empty unless tabulated
  /// Every off-diagonal element of the class structure is nonzero initially.
  /// Tabulated timescales describe such generic members only.
  bool generic = false;
};

namespace detail {

/// Fits every initially nonzero upper-triangle element of the matrices produced by `pick`.
template <typename Pick>
std::vector<ElementFit> fit_elements(const std::vector<Snapshot>& snaps, const std::vector<double>& times, Pick pick,
                                     double flat_threshold) {
  std::vector<ElementFit> out;
  const ComplexMatrix& first = pick(snaps.front());
  const std::size_t dim = first.dim();
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i + 1; j < dim; ++j) {
      if (std::abs(first(i, j)) <= kZeroFloor) continue;
      Trajectory traj{times, {}};
      for (const auto& s : snaps) traj.values.push_back(std::abs(pick(s)(i, j)));
      out.push_back({i, j, fit_exponential(traj, flat_threshold), std::nullopt});
    }
  return out;
}

/// Fit of a concurrence series. A series that reaches zero before a third
/// positive sample falls back to the slope through its positive samples, or to
/// ln(C(0) / floor) e-foldings before the first zero when only C(0) is positive.
inline FitResult fit_vanishing(const Trajectory& traj, double flat_threshold) {
  try {
    return fit_exponential(traj, flat_threshold);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::InsufficientData || traj.values.size() < 8 || !(traj.values.front() > kZeroFloor)) throw;
  }
  std::size_t k = 0;
  while (k < traj.values.size() && traj.values[k] > kZeroFloor) ++k;
  FitResult out;
  out.used_samples = k;
  out.amplitude = traj.values.front();
  out.tau = k >= 2 ? (traj.times[1] - traj.times[0]) / std::log(traj.values[0] / traj.values[1])
                   : traj.times[k] / std::log(traj.values[0] / kZeroFloor);
  if (!(out.tau > 0.0) || !std::isfinite(out.tau)) out.tau = traj.times[k];
  return out;
}

inline PairFit fit_pair(QubitSet pair, const std::vector<double>& times, const std::vector<double>& conc, double flat_threshold) {
  Trajectory c{times, conc}, c2{times, {}};
  for (double v : conc) c2.values.push_back(v * v);
  PairFit out{pair, fit_vanishing(c, flat_threshold), fit_vanishing(c2, flat_threshold), std::nullopt, 0.0};
  if (conc.front() > kZeroFloor)
    for (std::size_t i = 1; i < conc.size(); ++i)
      if (conc[i] <= kZeroFloor) {
        out.vanishes_at = times[i];
        break;
      }
  return out;
}

}  // namespace detail

inline TimescaleReport build_timescale_report(const std::vector<Snapshot>& snaps, StateClass cls, const NoiseScenario& sc,
                                              double flat_threshold = kDefaultFlatThreshold) {
  if (snaps.size() < 8) throw Error(ErrorCode::InsufficientData, "timescale report needs at least 8 samples");
  TimescaleReport rep;
  rep.scenario_id = sc.label();
  rep.cls = cls;
  rep.reference = classify(sc);
  for (const auto& s : snaps) rep.times.push_back(s.t);

  rep.elements = detail::fit_elements(snaps, rep.times, [](const Snapshot& s) -> const ComplexMatrix& { return s.rho.matrix(); },
                                      flat_threshold);
  if (rep.reference) {
    try {
      const auto table = decay_table(cls, *rep.reference);
      rep.generic = rep.elements.size() == table.elements.size();
      for (auto& e : rep.elements)
        for (const auto& d : table.elements)
          if (d.row == e.row && d.col == e.col) {
            const double rate = predicted_decay_rate(d, sc);
            e.predicted_tau = rate > 0.0 ? 1.0 / rate : kInfinity;
          }
    } catch (const Error& err) {
      if (err.code() != ErrorCode::UnsupportedPair) throw;
    }
    try {
      rep.paper = paper_tau_table(cls, sc);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::UnsupportedPair) throw;
    }
  }

  for (const auto& [keep, _] : snaps.front().reduced)
    rep.reduced[keep] = detail::fit_elements(
        snaps, rep.times, [k = keep](const Snapshot& s) -> const ComplexMatrix& { return s.reduced.at(k).matrix(); }, flat_threshold);

  // Every nonzero rate drives gamma below the smallest double by this time.
  const DensityMatrix rho_inf = sc.min_rate() > 0.0 ? evolve(snaps.front().rho, sc, 2e3 / sc.min_rate()) : snaps.front().rho;
  for (const auto& [pair, _] : snaps.front().concurrence) {
    std::vector<double> conc;
    for (const auto& s : snaps) conc.push_back(s.concurrence.at(pair));
    rep.pairs.push_back(detail::fit_pair(pair, rep.times, conc, flat_threshold));
    rep.pairs.back().asymptotic =
        concurrence(sc.qubits == 2 ? rho_inf.matrix() : partial_trace(rho_inf.matrix(), pair, rho_inf.labels())).value;
  }
  return rep;
}

/// Refits pair concurrences that vanished too early for the sampling grid on a
/// grid of the same size spanning [0, vanishing time].
inline void refine_vanishing_pairs(TimescaleReport& rep, const StateSpec& spec, const NoiseScenario& sc,
                                   double flat_threshold = kDefaultFlatThreshold) {
  const DensityMatrix rho0 = projector(spec);
  for (auto& p : rep.pairs) {
    if (!p.vanishes_at || (p.c.used_samples >= 3 && p.c2.used_samples >= 3)) continue;
    const TimeGrid fine{*p.vanishes_at, static_cast<int>(rep.times.size())};
    const auto times = fine.points();
    std::vector<double> conc;
    for (double t : times) {
      DensityMatrix rho = evolve(rho0, sc, t);
      conc.push_back(concurrence(sc.qubits == 2 ? rho.matrix() : partial_trace(rho.matrix(), p.pair, rho.labels())).value);
    }
    const auto refit = detail::fit_pair(p.pair, times, conc, flat_threshold);
    p.c = refit.c;
    p.c2 = refit.c2;
  }
}

inline TimescaleReport build_timescale_report(const StateSpec& spec, const NoiseScenario& sc, const TimeGrid& grid,
                                              double flat_threshold = kDefaultFlatThreshold) {
  auto rep = build_timescale_report(sample_evolution(spec, sc, grid.points()), spec.cls, sc, flat_threshold);
  refine_vanishing_pairs(rep, spec, sc, flat_threshold);
  return rep;
}

namespace detail {

inline double extreme_tau(const std::vector<ElementFit>& fits, bool slowest) {
  double best = slowest ? 0.0 : kInfinity;
  bool any = false;
  for (const auto& e : fits)
    if (e.fit.decaying()) {
      best = slowest ? std::max(best, e.fit.tau) : std::min(best, e.fit.tau);
      any = true;
    }
  return any ? best : kInfinity;
}

}  // namespace detail

/// Fitted counterpart of a tabulated timescale; infinite if nothing decays.
inline double fitted_tau(const TimescaleReport& rep, TauMeasure m, Convention conv = Convention::C) {
  switch (m) {
    case TauMeasure::FullSlowest: return detail::extreme_tau(rep.elements, true);
    case TauMeasure::FullFastest: return detail::extreme_tau(rep.elements, false);
    case TauMeasure::PairSlowest:
    case TauMeasure::SingleSlowest: {
      std::vector<ElementFit> all;
      for (const auto& [keep, fits] : rep.reduced)
        if (keep.size() == (m == TauMeasure::PairSlowest ? 2 : 1)) all.insert(all.end(), fits.begin(), fits.end());
      return detail::extreme_tau(all, true);
    }
    case TauMeasure::Disentanglement: {
      double best = kInfinity;
      for (const auto& p : rep.pairs) {
        const auto& f = conv == Convention::C ? p.c : p.c2;
        if (f.decaying()) best = std::min(best, f.tau);
      }
      return best;
    }
  }
  return kInfinity;
}

inline constexpr double kTauRelativeTolerance = 0.01;

struct TauComparison {
  PaperTau tabulated;
  double fitted = kInfinity;
  bool applicable = true;  ///< false for non-generic coefficients
  bool agrees = false;     ///< |fitted - tabulated| <= 1% of tabulated
};

inline const char* status(const TauComparison& c) { return !c.applicable ? "N/A" : c.agrees ? "AGREES" : "DIFFERS"; }

/// Side-by-side tabulated and fitted timescales. Disagreement is reported, not raised.
inline std::vector<TauComparison> compare_tabulated(const TimescaleReport& rep, double rel_tol = kTauRelativeTolerance) {
  std::vector<TauComparison> out;
  for (const auto& p : rep.paper) {
    const double f = fitted_tau(rep, p.measure, p.convention.value_or(Convention::C));
    out.push_back({p, f, rep.generic, std::isfinite(f) && std::abs(f - p.value) <= rel_tol * p.value});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Audit

enum class Verdict { Pass, Vacuous, Fail };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Vacuous: return "VACUOUS";
    case Verdict::Fail: return "FAIL";
  }
  return "?";
}

struct PairAudit {
  QubitSet pair;
  Verdict verdict = Verdict::Vacuous;
  double tau_dis_c = kInfinity;
  double tau_dis_c2 = kInfinity;
  double tau_slowest_coherence = kInfinity;
  double margin_c = kInfinity;   ///< tau_slowest / tau_dis(C)
  double margin_c2 = kInfinity;  ///< tau_slowest / tau_dis(C^2)
  double asymptotic_c = 0.0;     ///< concurrence as t -> infinity
};

struct AuditResult {
  Verdict verdict = Verdict::Vacuous;
  std::vector<PairAudit> pairs;
};

inline constexpr double kAuditRelativeTolerance = 1e-6;
inline constexpr double kPersistentConcurrence = 1e-9;

/// For each pair whose concurrence decays: the fitted disentanglement time (C
/// convention) must not exceed the slowest decaying coherence of the register
/// matrix and of that pair's reduced matrix. Pairs with constant concurrence,
/// or whose concurrence settles above zero, never disentangle and are vacuous;
/// decaying concurrence with no decaying coherence fails.
inline AuditResult audit_inequality(const TimescaleReport& rep, double rel_tol = kAuditRelativeTolerance) {
  AuditResult out;
  bool any_pass = false, any_fail = false;
  for (const auto& p : rep.pairs) {
    PairAudit a;
    a.pair = p.pair;
    std::vector<ElementFit> candidates = rep.elements;
    if (auto it = rep.reduced.find(p.pair); it != rep.reduced.end())
      candidates.insert(candidates.end(), it->second.begin(), it->second.end());
    a.tau_slowest_coherence = detail::extreme_tau(candidates, true);
    a.asymptotic_c = p.asymptotic;

    if (p.c.decaying() && p.asymptotic <= kPersistentConcurrence) {
      a.tau_dis_c = p.c.tau;
      a.tau_dis_c2 = p.c2.decaying() ? p.c2.tau : kInfinity;
      if (!std::isfinite(a.tau_slowest_coherence)) {
        a.verdict = Verdict::Fail;
      } else {
        a.margin_c = a.tau_slowest_coherence / a.tau_dis_c;
        a.margin_c2 = a.tau_slowest_coherence / a.tau_dis_c2;
        a.verdict = a.tau_dis_c <= a.tau_slowest_coherence * (1.0 + rel_tol) ? Verdict::Pass : Verdict::Fail;
      }
    }
    any_pass |= a.verdict == Verdict::Pass;
    any_fail |= a.verdict == Verdict::Fail;
    out.pairs.push_back(a);
  }
  out.verdict = any_fail ? Verdict::Fail : any_pass ? Verdict::Pass : Verdict::Vacuous;
  return out;
}

}  // namespace dephase
