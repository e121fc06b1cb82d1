#pragma once

// Subcommands behind the command-line tool. Each returns a process exit status
// and writes human-readable progress to `out`, diagnostics to `err`.

#include <filesystem>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dephase/analytic.hpp"
#include "dephase/config.hpp"
#include "dephase/report.hpp"
#include "dephase/stochastic.hpp"
#include "dephase/timescales.hpp"

namespace dephase {

namespace exit_status {
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kParse = 2;
inline constexpr int kValidation = 3;
inline constexpr int kIO = 4;
inline constexpr int kEquivalence = 5;
}  // namespace exit_status

struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<OutputFormat> format;
  bool plots = false;
  std::optional<std::uint64_t> seed;
  bool force_informational = false;
  std::optional<ConventionChoice> convention;
};

namespace cmd_detail {

inline int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    switch (e.kind()) {
      case ConfigError::Kind::Parse: err << "parse error: " << e.what() << '\n'; return exit_status::kParse;
      case ConfigError::Kind::Validation: err << "validation error: " << e.what() << '\n'; return exit_status::kValidation;
      case ConfigError::Kind::IO: err << "io error: " << e.what() << '\n'; return exit_status::kIO;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EquivalenceNotEstablished) {
      err << e.what() << '\n';
      return exit_status::kEquivalence;
    }
    err << "validation error: " << e.what() << '\n';
    return exit_status::kValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << '\n';
    return exit_status::kIO;
  }
  return exit_status::kCheckFailed;
}

inline RunConfig load(const CommandOptions& opt) {
  if (!opt.config_path) throw ConfigError(ConfigError::Kind::Parse, "--config", "a configuration file is required");
  RunConfig cfg = load_config(*opt.config_path);
  if (opt.out_dir) cfg.output_dir = *opt.out_dir;
  if (opt.format) cfg.format = *opt.format;
  if (opt.plots) cfg.plots = true;
  if (opt.convention) cfg.convention = opt.convention;
  if (opt.seed) {
    if (cfg.mc) cfg.mc->seed = *opt.seed;
    cfg.sweep.seed = *opt.seed;
  }
  return cfg;
}

inline std::string extension(OutputFormat f) { return f == OutputFormat::Csv ? ".csv" : ".json"; }

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline nlohmann::json scenario_json(const NoiseScenario& sc) {
  nlohmann::json chans = nlohmann::json::array();
  for (const auto& ch : sc.channels)
    chans.push_back({{"kind", to_string(ch.kind)}, {"qubits", ch.support.to_string()}, {"rate", ch.rate}});
  return {{"qubits", sc.qubits}, {"label", sc.label()}, {"channels", std::move(chans)}};
}

inline nlohmann::json state_json(const StateSpec& s) {
  nlohmann::json coeffs = nlohmann::json::object();
  const auto& ci = info(s.cls);
  for (std::size_t k = 0; k < s.coefficients.size(); ++k)
    coeffs[std::string(ci.coeff_names[k])] = {s.coefficients[k].real(), s.coefficients[k].imag()};
  return {{"class", ci.name}, {"coefficients", std::move(coeffs)}};
}

}  // namespace cmd_detail

// ---------------------------------------------------------------------------
// run

inline int run_config(const RunConfig& cfg, std::ostream& out) {
  namespace fs = std::filesystem;
  const auto conv = cfg.effective_convention();
  const auto snaps = sample_evolution(cfg.state, cfg.scenario, cfg.grid.points());
  auto rep = build_timescale_report(snaps, cfg.state.cls, cfg.scenario);
  refine_vanishing_pairs(rep, cfg.state, cfg.scenario);
  const auto audit = audit_inequality(rep);
  const auto table = trajectory_table(snaps, cfg.scenario.qubits, cfg.outputs, conv);

  const fs::path dir(cfg.output_dir);
  ensure_directory(dir);
  const std::string ext = cmd_detail::extension(cfg.format);
  std::vector<std::pair<fs::path, std::string>> files;
  files.emplace_back(dir / ("trajectory" + ext), cfg.format == OutputFormat::Csv ? to_csv(table) : cmd_detail::dump(to_json(table)));
  if (cfg.outputs.count(Output::Timescales))
    files.emplace_back(dir / ("timescales" + ext),
                       cfg.format == OutputFormat::Csv ? timescales_csv(rep, conv) : cmd_detail::dump(timescales_json(rep, conv)));
  if (cfg.outputs.count(Output::Audit))
    files.emplace_back(dir / ("audit" + ext), cfg.format == OutputFormat::Csv ? audit_csv(audit, conv) : cmd_detail::dump(audit_json(audit, conv)));

  if (cfg.plots) {
    std::vector<Series> coh;
    for (const auto& e : rep.elements) {
      Series s{"|" + element_name(e.row, e.col) + "|", {}};
      for (const auto& snap : snaps) s.values.push_back(std::abs(snap.rho(e.row, e.col)));
      coh.push_back(std::move(s));
    }
    files.emplace_back(dir / "coherence.svg", svg_line_chart("coherences " + cfg.scenario.label(), rep.times, coh, cfg.log_y));
    std::vector<Series> conc;
    for (auto p : qubit_pairs(cfg.scenario.qubits)) {
      if (wants_c(conv)) {
        Series s{"C_" + p.to_string(), {}};
        for (const auto& snap : snaps) s.values.push_back(snap.concurrence.at(p));
        conc.push_back(std::move(s));
      }
      if (wants_c2(conv)) {
        Series s{"C2_" + p.to_string(), {}};
        for (const auto& snap : snaps) s.values.push_back(snap.concurrence.at(p) * snap.concurrence.at(p));
        conc.push_back(std::move(s));
      }
    }
    files.emplace_back(dir / "concurrence.svg", svg_line_chart("concurrence " + cfg.scenario.label(), rep.times, conc, cfg.log_y));
  }

  for (const auto& [path, content] : files) {
    write_atomic(path, content);
    out << "wrote " << path.string() << '\n';
  }
  for (const auto& c : compare_tabulated(rep))
    if (c.applicable && !c.agrees)
      out << "note: " << c.tabulated.label << " tabulated " << c.tabulated.formula << " = " << format_number(c.tabulated.value)
          << ", fitted " << format_number(c.fitted) << " (DIFFERS)\n";
  if (cfg.outputs.count(Output::Audit)) {
    out << "audit: " << to_string(audit.verdict) << '\n';
    if (audit.verdict == Verdict::Fail) return exit_status::kCheckFailed;
  }
  return exit_status::kOk;
}

inline int cmd_run(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return cmd_detail::guarded(err, [&] { return run_config(cmd_detail::load(opt), out); });
}

// ---------------------------------------------------------------------------
// verify

/// Comparison report. For scenarios outside the equivalence whitelist, each
/// disagreeing element is listed with its decay expressed as a power of
/// gamma = exp(-Gamma t / 2), Gamma being the slowest channel rate.
inline nlohmann::json verify_json(const RunConfig& cfg, const TrajectoryConfig& mc, const ChannelComparison& cmp) {
  nlohmann::json z = nlohmann::json::array();
  for (const auto& s : cmp.z_scores)
    z.push_back({{"element", element_name(s.row, s.col)}, {"z_re", json_number(s.z_re)}, {"z_im", json_number(s.z_im)}});

  nlohmann::json report = {
      {"state", cmd_detail::state_json(cfg.state)},
      {"scenario", cmd_detail::scenario_json(cfg.scenario)},
      {"monte_carlo",
       {{"trajectories", mc.n_trajectories}, {"dt", mc.dt}, {"t_final", mc.t_final}, {"seed", mc.seed}}},
      {"distance", json_number(cmp.distance)},
      {"distance_bound", json_number(cmp.distance_bound)},
      {"statistical_scale", json_number(cmp.statistical_scale)},
      {"max_abs_z", json_number(cmp.max_abs_z)},
      {"z_bound", kZScoreBound},
      {"z_scores", std::move(z)},
      {"diffusion_vs_kraus", json_number(cmp.diffusion_vs_kraus)},
      {"diffusion_vs_monte_carlo", json_number(cmp.diffusion_vs_mc)},
      {"status", cmp.informational ? "INFORMATIONAL" : cmp.passed ? "PASS" : "FAIL"},
  };
  if (cmp.informational) {
    const double g = std::exp(-cfg.scenario.min_rate() * mc.t_final / 2.0);
    const auto rho0 = projector(cfg.state);
    auto power = [&](double value, double initial) {
      return value > 0.0 && initial > 0.0 && g < 1.0 ? std::log(value / initial) / std::log(g) : std::numeric_limits<double>::quiet_NaN();
    };
    nlohmann::json div = nlohmann::json::array();
    for (std::size_t i = 0; i < rho0.dim(); ++i)
      for (std::size_t j = i + 1; j < rho0.dim(); ++j) {
        const double r0 = std::abs(rho0(i, j));
        if (r0 <= kZeroFloor) continue;
        const double k = std::abs(cmp.kraus(i, j)), d = std::abs(cmp.diffusion(i, j));
        if (std::abs(k - d) <= 1e-12) continue;
        div.push_back({{"element", element_name(i, j)},
                       {"operator_sum", json_number(k)},
                       {"phase_diffusion", json_number(d)},
                       {"operator_sum_gamma_power", json_number(power(k, r0))},
                       {"phase_diffusion_gamma_power", json_number(power(d, r0))}});
      }
    report["divergence"] = std::move(div);
  }
  return report;
}

inline int cmd_verify(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return cmd_detail::guarded(err, [&] {
    const RunConfig cfg = cmd_detail::load(opt);
    TrajectoryConfig mc = cfg.mc.value_or(TrajectoryConfig{});
    if (opt.seed) mc.seed = *opt.seed;
    const auto cmp = compare_to_channel(cfg.state, cfg.scenario, mc, opt.force_informational);
    const std::filesystem::path dir(cfg.output_dir);
    ensure_directory(dir);
    const auto path = dir / "verify.json";
    write_atomic(path, cmd_detail::dump(verify_json(cfg, mc, cmp)));
    out << "wrote " << path.string() << '\n';
    out << "distance " << format_number(cmp.distance) << " (bound " << format_number(cmp.distance_bound) << "), max |z| "
        << format_number(cmp.max_abs_z) << '\n';
    if (cmp.informational) {
      out << "status: INFORMATIONAL (operator sum and phase diffusion differ by " << format_number(cmp.diffusion_vs_kraus) << ")\n";
      return exit_status::kOk;
    }
    out << "status: " << (cmp.passed ? "PASS" : "FAIL") << '\n';
    return cmp.passed ? exit_status::kOk : exit_status::kCheckFailed;
  });
}

// ---------------------------------------------------------------------------
// paper-tables

struct ReproductionReport {
  std::string text;
  nlohmann::json json;
  std::vector<std::string> failures;  ///< "(class, scenario, element): detail"
};

struct ReproductionSettings {
  std::uint64_t seed = 1;
  int oracle_draws = 5;
  int audit_draws = 100;
};

namespace cmd_detail {

inline std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s + ' ';
}

inline std::vector<std::pair<StateClass, PaperScenario>> reference_pairs() {
  std::vector<std::pair<StateClass, PaperScenario>> out;
  for (auto c : {StateClass::Fragile, StateClass::Fragile2, StateClass::Robust, StateClass::Robust2})
    out.emplace_back(c, PaperScenario::Collective2);
  for (auto c : {StateClass::W, StateClass::GHZ})
    for (auto s : kThreeQubitScenarios) out.emplace_back(c, s);
  return out;
}

inline ScaleRates draw_rates(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  const double a = u(rng), b = u(rng), c = u(rng);
  return {a, b, c};
}

}  // namespace cmd_detail

/// Regenerates closed-form checks, timescale tables and the inequality audit.
inline ReproductionReport reproduce_tables(const ReproductionSettings& settings = {}) {
  using cmd_detail::pad;
  ReproductionReport r;
  std::ostringstream txt;
  auto seed_for = [&](std::uint64_t tag, std::uint64_t k) { return trajectory_seed(settings.seed ^ mix64(tag), k); };
  const std::vector<ScaleRates> rate_sets = {{1.0, 1.0, 1.0}, {0.7, 1.3, 2.1}};

  // Closed forms against the operator sum.
  txt << "closed form vs operator sum (max |difference| over 64 times, " << settings.oracle_draws << " draws x " << rate_sets.size()
      << " rate sets, tolerance 1e-12)\n";
  txt << pad("class", 9) << pad("scenario", 12) << pad("source", 8) << pad("max_diff", 24) << "status\n";
  nlohmann::json oracle = nlohmann::json::array();
  std::uint64_t tag = 0;
  for (const auto& [cls, id] : cmd_detail::reference_pairs()) {
    ++tag;
    double worst = 0.0;
    std::string worst_element;
    for (const auto& rates : rate_sets) {
      const auto sc = make_scenario(id, rates);
      const auto times = TimeGrid::default_for(sc).points();
      for (int d = 0; d < settings.oracle_draws; ++d) {
        const auto spec = draw_state(cls, seed_for(tag, static_cast<std::uint64_t>(d)));
        const auto rho0 = projector(spec);
        for (double t : times) {
          const auto a = analytic_evolved(spec, sc, t), k = evolve(rho0, sc, t);
          for (std::size_t i = 0; i < a.dim(); ++i)
            for (std::size_t j = i; j < a.dim(); ++j) {
              const double diff = std::abs(a(i, j) - k(i, j));
              if (diff > worst) {
                worst = diff;
                worst_element = element_name(i, j);
              }
            }
        }
      }
    }
    const bool ok = worst <= 1e-12;
    const char* source = decay_table(cls, id).provenance == Provenance::Printed ? "printed" : "derived";
    txt << pad(std::string(info(cls).name), 9) << pad(std::string(to_string(id)), 12) << pad(source, 8) << pad(format_number(worst), 24)
        << (ok ? "PASS" : "FAIL") << '\n';
    oracle.push_back({{"class", info(cls).name}, {"scenario", to_string(id)}, {"source", source}, {"max_diff", worst}, {"pass", ok}});
    if (!ok)
      r.failures.push_back("(" + std::string(info(cls).name) + ", " + std::string(to_string(id)) + ", " + worst_element +
                           "): closed form differs from operator sum by " + format_number(worst));
  }

  // Element timescales against the decay exponents.
  txt << "\nelement timescales, fitted vs exponent prediction (rates " << "local 0.7, pair 1.3, triple 2.1; tolerance 1%)\n";
  txt << pad("class", 9) << pad("scenario", 12) << pad("element", 8) << pad("fitted", 24) << pad("predicted", 24) << "status\n";
  nlohmann::json elements = nlohmann::json::array();
  for (const auto& [cls, id] : cmd_detail::reference_pairs()) {
    ++tag;
    const auto sc = make_scenario(id, rate_sets[1]);
    const auto rep = build_timescale_report(draw_state(cls, seed_for(tag, 0)), sc, TimeGrid::default_for(sc));
    for (const auto& e : rep.elements) {
      const double pred = e.predicted_tau.value_or(std::numeric_limits<double>::quiet_NaN());
      const bool ok = std::isfinite(pred) ? std::abs(e.fit.tau - pred) <= kTauRelativeTolerance * pred : e.fit.is_constant;
      txt << pad(std::string(info(cls).name), 9) << pad(std::string(to_string(id)), 12) << pad(element_name(e.row, e.col), 8)
          << pad(format_number(e.fit.tau), 24) << pad(format_number(pred), 24) << (ok ? "PASS" : "FAIL") << '\n';
      elements.push_back({{"class", info(cls).name},
                          {"scenario", to_string(id)},
                          {"element", element_name(e.row, e.col)},
                          {"fitted", json_number(e.fit.tau)},
                          {"predicted", json_number(pred)},
                          {"pass", ok}});
      if (!ok)
        r.failures.push_back("(" + std::string(info(cls).name) + ", " + std::string(to_string(id)) + ", " + element_name(e.row, e.col) +
                             "): fitted tau " + format_number(e.fit.tau) + " vs predicted " + format_number(pred));
    }
  }

  // Tabulated timescales.
  txt << "\ntabulated timescales at unit rates (Gamma = Gamma_1 = Gamma_2 = Gamma_3 = 1)\n";
  txt << pad("class", 9) << pad("scenario", 12) << pad("label", 16) << pad("formula", 26) << pad("tabulated", 20) << pad("fitted_C", 20)
      << pad("fitted_C2", 20) << pad("conv", 5) << "status\n";
  nlohmann::json tabulated = nlohmann::json::array();
  for (const auto& [cls, id] : cmd_detail::reference_pairs()) {
    ++tag;
    const auto sc = make_scenario(id);
    std::vector<PaperTau> tab;
    try {
      tab = paper_tau_table(cls, sc);
    } catch (const Error&) {
      continue;
    }
    if (tab.empty()) {
      txt << pad(std::string(info(cls).name), 9) << pad(std::string(to_string(id)), 12) << "no decay: every timescale infinite\n";
      continue;
    }
    const auto rep = build_timescale_report(draw_state(cls, seed_for(tag, 0)), sc, TimeGrid::default_for(sc));
    for (const auto& c : compare_tabulated(rep)) {
      const bool dis = c.tabulated.measure == TauMeasure::Disentanglement;
      const double fc = fitted_tau(rep, c.tabulated.measure, Convention::C);
      const double fc2 = dis ? fitted_tau(rep, c.tabulated.measure, Convention::C2) : fc;
      txt << pad(std::string(info(cls).name), 9) << pad(std::string(to_string(id)), 12) << pad(c.tabulated.label, 16)
          << pad(c.tabulated.formula, 26) << pad(format_number(c.tabulated.value), 20) << pad(format_number(fc), 20)
          << pad(dis ? format_number(fc2) : "-", 20) << pad(c.tabulated.convention ? to_string(*c.tabulated.convention) : "-", 5)
          << status(c) << '\n';
      nlohmann::json j = {{"class", info(cls).name},   {"scenario", to_string(id)},         {"label", c.tabulated.label},
                          {"formula", c.tabulated.formula}, {"tabulated", c.tabulated.value}, {"fitted_C", json_number(fc)},
                          {"status", status(c)}};
      if (dis) {
        j["fitted_C2"] = json_number(fc2);
        j["convention"] = to_string(*c.tabulated.convention);
      }
      tabulated.push_back(std::move(j));
    }
  }

  // Inequality audit.
  txt << "\ninequality audit (" << settings.audit_draws << " draws per class and scenario, rates uniform in [0.2, 3])\n";
  txt << pad("class", 9) << pad("scenario", 12) << pad("PASS", 6) << pad("VACUOUS", 8) << pad("FAIL", 6) << pad("min_margin_C", 24)
      << "min_margin_C2\n";
  nlohmann::json audits = nlohmann::json::array();
  auto audit_pairs = cmd_detail::reference_pairs();
  audit_pairs.emplace_back(StateClass::Generic2, PaperScenario::Collective2);
  std::size_t total_fail = 0;
  for (const auto& [cls, id] : audit_pairs) {
    ++tag;
    int pass = 0, vacuous = 0, fail = 0;
    double min_c = kInfinity, min_c2 = kInfinity;
    for (int d = 0; d < settings.audit_draws; ++d) {
      const auto sc = make_scenario(id, cmd_detail::draw_rates(seed_for(tag, 2 * static_cast<std::uint64_t>(d))));
      const auto rep = build_timescale_report(draw_state(cls, seed_for(tag, 2 * static_cast<std::uint64_t>(d) + 1)), sc, TimeGrid::default_for(sc));
      const auto a = audit_inequality(rep);
      switch (a.verdict) {
        case Verdict::Pass: ++pass; break;
        case Verdict::Vacuous: ++vacuous; break;
        case Verdict::Fail: ++fail; break;
      }
      for (const auto& p : a.pairs) {
        if (p.verdict == Verdict::Vacuous) continue;
        min_c = std::min(min_c, p.margin_c);
        min_c2 = std::min(min_c2, p.margin_c2);
        if (p.verdict == Verdict::Fail)
          r.failures.push_back("(" + std::string(info(cls).name) + ", " + std::string(to_string(id)) + ", C_" + p.pair.to_string() +
                               "): disentanglement time " + format_number(p.tau_dis_c) + " exceeds slowest coherence time " +
                               format_number(p.tau_slowest_coherence) + " (draw " + std::to_string(d) + ")");
      }
    }
    total_fail += static_cast<std::size_t>(fail);
    txt << pad(std::string(info(cls).name), 9) << pad(std::string(to_string(id)), 12) << pad(std::to_string(pass), 6)
        << pad(std::to_string(vacuous), 8) << pad(std::to_string(fail), 6) << pad(format_number(min_c), 24) << format_number(min_c2) << '\n';
    audits.push_back({{"class", info(cls).name},
                      {"scenario", to_string(id)},
                      {"pass", pass},
                      {"vacuous", vacuous},
                      {"fail", fail},
                      {"min_margin_C", json_number(min_c)},
                      {"min_margin_C2", json_number(min_c2)}});
  }
  txt << "\naudit: " << (total_fail ? "FAIL" : "no FAIL verdicts") << '\n';
  for (const auto& f : r.failures) txt << "MISMATCH " << f << '\n';
  txt << (r.failures.empty() ? "all checks passed\n" : "checks failed\n");

  r.text = txt.str();
  r.json = {{"seed", settings.seed},         {"closed_form", std::move(oracle)}, {"element_timescales", std::move(elements)},
            {"tabulated", std::move(tabulated)}, {"audit", std::move(audits)},       {"failures", r.failures}};
  return r;
}

inline int cmd_paper_tables(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return cmd_detail::guarded(err, [&] {
    ReproductionSettings settings;
    if (opt.seed) settings.seed = *opt.seed;
    const auto rep = reproduce_tables(settings);
    out << rep.text;
    if (opt.out_dir) {
      const std::filesystem::path dir(*opt.out_dir);
      ensure_directory(dir);
      const bool json = opt.format == OutputFormat::Json;
      const auto path = dir / (json ? "paper_tables.json" : "paper_tables.txt");
      write_atomic(path, json ? cmd_detail::dump(rep.json) : rep.text);
      out << "wrote " << path.string() << '\n';
    }
    for (const auto& f : rep.failures) err << "failed: " << f << '\n';
    return rep.failures.empty() ? exit_status::kOk : exit_status::kCheckFailed;
  });
}

// ---------------------------------------------------------------------------
// sweep

struct SweepPoint {
  double scale = 1.0;
  int draw = 0;
  StateSpec state;
  AuditResult audit;
};

/// Audits every (rate scale, coefficient draw) combination. Points run in
/// parallel; results are stored by index so output order never depends on scheduling.
inline std::vector<SweepPoint> run_sweep(const RunConfig& cfg) {
  const int draws = std::max(cfg.sweep.draws, 1);
  std::vector<SweepPoint> points;
  for (double scale : cfg.sweep.rate_scales)
    for (int d = 0; d < draws; ++d) {
      SweepPoint p;
      p.scale = scale;
      p.draw = d;
      p.state = cfg.sweep.draws == 0 ? cfg.state : draw_state(cfg.state.cls, trajectory_seed(cfg.sweep.seed, static_cast<std::uint64_t>(d)));
      points.push_back(std::move(p));
    }

  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      NoiseScenario sc = cfg.scenario;
      for (auto& ch : sc.channels) ch.rate *= points[i].scale;
      TimeGrid grid = cfg.grid;
      grid.t_max /= points[i].scale;
      points[i].audit = audit_inequality(build_timescale_report(points[i].state, sc, grid));
    }
  };
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(cfg.sweep.threads, points.size()));
  if (workers <= 1) {
    work(0, points.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (points.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk, hi = std::min(points.size(), lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
  }
  return points;
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points, StateClass cls, ConventionChoice conv) {
  std::ostringstream out;
  out << "scale,draw";
  for (auto name : info(cls).coeff_names) out << ",re_" << name << ",im_" << name;
  out << ",pair,verdict,tau_slowest_coherence,asymptotic_C";
  if (wants_c(conv)) out << ",tau_dis_C,margin_C";
  if (wants_c2(conv)) out << ",tau_dis_C2,margin_C2";
  out << '\n';
  for (const auto& p : points)
    for (const auto& a : p.audit.pairs) {
      out << format_number(p.scale) << ',' << p.draw;
      for (const auto& c : p.state.coefficients) out << ',' << format_number(c.real()) << ',' << format_number(c.imag());
      out << ',' << a.pair.to_string() << ',' << to_string(a.verdict) << ',' << format_number(a.tau_slowest_coherence) << ','
          << format_number(a.asymptotic_c);
      if (wants_c(conv)) out << ',' << format_number(a.tau_dis_c) << ',' << format_number(a.margin_c);
      if (wants_c2(conv)) out << ',' << format_number(a.tau_dis_c2) << ',' << format_number(a.margin_c2);
      out << '\n';
    }
  return out.str();
}

inline nlohmann::json sweep_json(const std::vector<SweepPoint>& points, ConventionChoice conv) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : points)
    arr.push_back({{"scale", p.scale}, {"draw", p.draw}, {"state", cmd_detail::state_json(p.state)}, {"audit", audit_json(p.audit, conv)}});
  return arr;
}

inline int cmd_sweep(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return cmd_detail::guarded(err, [&] {
    const RunConfig cfg = cmd_detail::load(opt);
    const auto conv = cfg.effective_convention();
    const auto points = run_sweep(cfg);
    const std::filesystem::path dir(cfg.output_dir);
    ensure_directory(dir);
    const auto path = dir / ("sweep" + cmd_detail::extension(cfg.format));
    write_atomic(path, cfg.format == OutputFormat::Csv ? sweep_csv(points, cfg.state.cls, conv) : cmd_detail::dump(sweep_json(points, conv)));
    out << "wrote " << path.string() << '\n';
    int pass = 0, vacuous = 0, fail = 0;
    for (const auto& p : points) {
      pass += p.audit.verdict == Verdict::Pass;
      vacuous += p.audit.verdict == Verdict::Vacuous;
      fail += p.audit.verdict == Verdict::Fail;
    }
    out << points.size() << " points: " << pass << " PASS, " << vacuous << " VACUOUS, " << fail << " FAIL\n";
    return fail ? exit_status::kCheckFailed : exit_status::kOk;
  });
}

}  // namespace dephase
