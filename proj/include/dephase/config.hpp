#pragma once

// Flat key = value run configuration.
//
//   # comment
//   state.class = fragile
//   state.a = (0.7071067811865476, 0)
//   scenario.channels[0].kind = pair
//   scenario.channels[0].qubits = AB
//   scenario.channels[0].rate = 1
//
// Syntax problems (malformed lines, unknown or repeated keys, unparseable
// values) are parse errors. Well-formed values that describe an invalid run are
// validation errors and name the offending key.

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dephase/channels.hpp"
#include "dephase/states.hpp"
#include "dephase/stochastic.hpp"
#include "dephase/timescales.hpp"

namespace dephase {

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { Parse, Validation, IO };

  ConfigError(Kind kind, std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), kind_(kind), field_(std::move(field)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

enum class Output { Elements, Concurrence, Eof, Reduced, Timescales, Audit };

inline const char* to_string(Output o) {
  switch (o) {
    case Output::Elements: return "elements";
    case Output::Concurrence: return "concurrence";
    case Output::Eof: return "eof";
    case Output::Reduced: return "reduced";
    case Output::Timescales: return "timescales";
    case Output::Audit: return "audit";
  }
  return "?";
}

enum class OutputFormat { Csv, Json };
enum class ConventionChoice { C, C2, Both };

inline std::optional<ConventionChoice> parse_convention(std::string_view s) {
  if (s == "c" || s == "C") return ConventionChoice::C;
  if (s == "c2" || s == "C2") return ConventionChoice::C2;
  if (s == "both") return ConventionChoice::Both;
  return std::nullopt;
}

inline const char* to_string(ConventionChoice c) {
  switch (c) {
    case ConventionChoice::C: return "c";
    case ConventionChoice::C2: return "c2";
    case ConventionChoice::Both: return "both";
  }
  return "?";
}

struct SweepConfig {
  int draws = 10;                         ///< random coefficient draws per rate scale; 0 uses the configured state only
  std::uint64_t seed = 1;
  std::vector<double> rate_scales{1.0};   ///< every channel rate is multiplied by each entry in turn
  unsigned threads = 1;
};

struct RunConfig {
  StateSpec state;
  NoiseScenario scenario;
  TimeGrid grid;
  std::set<Output> outputs{Output::Elements, Output::Concurrence, Output::Eof, Output::Timescales, Output::Audit};
  std::optional<TrajectoryConfig> mc;
  SweepConfig sweep;
  std::string output_dir = "out";
  OutputFormat format = OutputFormat::Csv;
  bool plots = false;
  bool log_y = false;
  std::optional<ConventionChoice> convention;  ///< unset: both for two qubits, C2 for three

  ConventionChoice effective_convention() const {
    if (convention) return *convention;
    return scenario.qubits == 2 ? ConventionChoice::Both : ConventionChoice::C2;
  }
};

namespace config_detail {

struct Entry {
  std::string value;
  int line = 0;
};

using Table = std::map<std::string, Entry>;

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline Table tokenize(std::istream& in) {
  static const std::regex key_re(R"([a-z_][a-z0-9_]*(\[[0-9]+\])?(\.[a-z_][a-z0-9_]*(\[[0-9]+\])?)*)");
  Table table;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(ConfigError::Kind::Parse, "", "line " + std::to_string(line) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (!std::regex_match(key, key_re))
      throw ConfigError(ConfigError::Kind::Parse, "", "line " + std::to_string(line) + ": malformed key '" + key + "'");
    if (value.empty()) throw ConfigError(ConfigError::Kind::Parse, key, "line " + std::to_string(line) + ": empty value");
    if (!table.emplace(key, Entry{value, line}).second)
      throw ConfigError(ConfigError::Kind::Parse, key, "line " + std::to_string(line) + ": repeated key");
  }
  return table;
}

[[noreturn]] inline void bad_value(const std::string& key, const Entry& e, const std::string& expected) {
  throw ConfigError(ConfigError::Kind::Parse, key, "line " + std::to_string(e.line) + ": expected " + expected + ", got '" + e.value + "'");
}

inline std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

inline double as_double(const std::string& key, const Entry& e) {
  if (auto v = to_double(e.value)) return *v;
  bad_value(key, e, "a number");
}

inline long long as_integer(const std::string& key, const Entry& e) {
  long long v = 0;
  const auto* end = e.value.data() + e.value.size();
  const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(key, e, "an integer");
  return v;
}

inline bool as_bool(const std::string& key, const Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  bad_value(key, e, "true or false");
}

/// "(re, im)" or a bare real number.
inline Complex as_complex(const std::string& key, const Entry& e) {
  const std::string& s = e.value;
  if (s.front() != '(') {
    if (auto v = to_double(s)) return {*v, 0.0};
    bad_value(key, e, "a number or (re, im)");
  }
  if (s.back() != ')') bad_value(key, e, "(re, im)");
  const std::string inner = s.substr(1, s.size() - 2);
  const auto comma = inner.find(',');
  if (comma == std::string::npos) bad_value(key, e, "(re, im)");
  const auto re = to_double(trim(std::string_view(inner).substr(0, comma)));
  const auto im = to_double(trim(std::string_view(inner).substr(comma + 1)));
  if (!re || !im) bad_value(key, e, "(re, im)");
  return {*re, *im};
}

inline std::vector<std::string> as_list(const Entry& e) {
  std::vector<std::string> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Runs `f`, turning library validation errors into validation errors on `field`.
template <typename F>
void validating(const std::string& field, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    throw ConfigError(ConfigError::Kind::Validation, field, e.what());
  }
}

}  // namespace config_detail

inline bool is_schema_key(const std::string& key) {
  static const std::set<std::string> fixed = {
      "state.class",   "scenario.qubits", "scenario.allow_shared_qubits", "grid.t_max",     "grid.samples",      "outputs",
      "output.dir",    "output.format",   "output.plots",                 "output.log_y",   "output.convention", "mc.trajectories",
      "mc.dt",         "mc.seed",         "mc.t_final",                   "mc.threads",     "sweep.draws",       "sweep.seed",
      "sweep.rate_scales", "sweep.threads"};
  static const std::regex channel_re(R"(scenario\.channels\[[0-9]+\]\.(kind|qubits|rate))");
  if (fixed.count(key) || std::regex_match(key, channel_re)) return true;
  for (const auto& ci : state_classes())
    for (auto name : ci.coeff_names)
      if (key == "state." + std::string(name)) return true;
  return false;
}

/// Parses and validates a configuration. All syntax checks run before any
/// semantic check, so a file with both kinds of problem reports a parse error.
inline RunConfig parse_config(std::istream& in) {
  using namespace config_detail;
  using K = ConfigError::Kind;
  const Table table = tokenize(in);
  for (const auto& [key, e] : table)
    if (!is_schema_key(key)) throw ConfigError(K::Parse, key, "line " + std::to_string(e.line) + ": unknown key");

  auto get = [&](const std::string& key) -> const Entry* {
    auto it = table.find(key);
    return it == table.end() ? nullptr : &it->second;
  };
  auto number = [&](const std::string& key) -> std::optional<double> {
    if (const Entry* e = get(key)) return as_double(key, *e);
    return std::nullopt;
  };
  auto integer = [&](const std::string& key) -> std::optional<long long> {
    if (const Entry* e = get(key)) return as_integer(key, *e);
    return std::nullopt;
  };
  auto boolean = [&](const std::string& key) -> std::optional<bool> {
    if (const Entry* e = get(key)) return as_bool(key, *e);
    return std::nullopt;
  };

  // Phase 1: typed values.
  std::map<std::string, Complex> coefficients;
  for (const auto& [key, e] : table)
    if (key.rfind("state.", 0) == 0 && key != "state.class") coefficients[key] = as_complex(key, e);

  static const std::regex channel_re(R"(scenario\.channels\[([0-9]+)\]\.([a-z_]+))");
  std::size_t n_channels = 0;
  for (const auto& [key, _] : table) {
    std::smatch m;
    if (std::regex_match(key, m, channel_re)) n_channels = std::max<std::size_t>(n_channels, std::stoul(m[1]) + 1);
  }
  std::vector<std::optional<double>> channel_rates;
  for (std::size_t i = 0; i < n_channels; ++i) channel_rates.push_back(number("scenario.channels[" + std::to_string(i) + "].rate"));

  const auto qubits = integer("scenario.qubits");
  const auto shared = boolean("scenario.allow_shared_qubits");
  const auto t_max = number("grid.t_max");
  const auto samples = integer("grid.samples");
  const auto plots = boolean("output.plots");
  const auto log_y = boolean("output.log_y");
  const auto trajectories = integer("mc.trajectories");
  const auto dt = number("mc.dt");
  const auto mc_seed = integer("mc.seed");
  const auto t_final = number("mc.t_final");
  const auto mc_threads = integer("mc.threads");
  const auto draws = integer("sweep.draws");
  const auto sweep_seed = integer("sweep.seed");
  const auto sweep_threads = integer("sweep.threads");
  std::vector<double> scales;
  if (const Entry* e = get("sweep.rate_scales")) {
    for (const auto& item : as_list(*e)) {
      const auto v = to_double(item);
      if (!v) bad_value("sweep.rate_scales", *e, "a comma-separated list of numbers");
      scales.push_back(*v);
    }
  }

  // Phase 2: semantics.
  RunConfig cfg;
  auto require = [&](const std::string& key) -> const Entry& {
    if (const Entry* e = get(key)) return *e;
    throw ConfigError(K::Validation, key, "required key is missing");
  };

  const Entry& cls_entry = require("state.class");
  try {
    cfg.state.cls = parse_state_class(cls_entry.value);
  } catch (const Error&) {
    throw ConfigError(K::Validation, "state.class", "unknown state class '" + cls_entry.value + "'");
  }
  const auto& ci = info(cfg.state.cls);
  for (auto name : ci.coeff_names) {
    const std::string key = "state." + std::string(name);
    auto it = coefficients.find(key);
    cfg.state.coefficients.push_back(it == coefficients.end() ? Complex{0.0, 0.0} : it->second);
    if (it != coefficients.end()) coefficients.erase(it);
  }
  if (!coefficients.empty())
    throw ConfigError(K::Validation, coefficients.begin()->first, "not a coefficient of the " + std::string(ci.name) + " class");
  validating("state", [&] { cfg.state.validate(); });

  cfg.scenario.qubits = qubits ? static_cast<int>(*qubits) : ci.qubits;
  if (cfg.scenario.qubits != ci.qubits)
    throw ConfigError(K::Validation, "scenario.qubits",
                      std::to_string(cfg.scenario.qubits) + "-qubit register does not match the " + std::string(ci.name) + " state");
  cfg.scenario.allow_shared_qubits = shared.value_or(false);
  for (std::size_t i = 0; i < n_channels; ++i) {
    const std::string prefix = "scenario.channels[" + std::to_string(i) + "].";
    const Entry& kind = require(prefix + "kind");
    Channel ch;
    if (kind.value == "local") {
      ch.kind = ChannelKind::Local;
    } else if (kind.value == "pair") {
      ch.kind = ChannelKind::PairCollective;
    } else if (kind.value == "triple") {
      ch.kind = ChannelKind::TripleCollective;
    } else {
      throw ConfigError(K::Validation, prefix + "kind", "expected local, pair or triple, got '" + kind.value + "'");
    }
    if (const Entry* q = get(prefix + "qubits")) {
      try {
        ch.support = QubitSet::parse(q->value);
      } catch (const Error& e) {
        throw ConfigError(K::Validation, prefix + "qubits", e.what());
      }
    } else if (ch.kind == ChannelKind::TripleCollective) {
      ch.support = QubitSet{Qubit::A, Qubit::B, Qubit::C};
    } else {
      throw ConfigError(K::Validation, prefix + "qubits", "required key is missing");
    }
    if (!channel_rates[i]) throw ConfigError(K::Validation, prefix + "rate", "required key is missing");
    ch.rate = *channel_rates[i];
    if (!(ch.rate > 0.0) || !std::isfinite(ch.rate)) throw ConfigError(K::Validation, prefix + "rate", "rate must be finite and > 0");
    validating(prefix.substr(0, prefix.size() - 1), [&] { ch.validate(); });
    if (!ch.support.is_subset_of(QubitSet::first(cfg.scenario.qubits)))
      throw ConfigError(K::Validation, prefix + "qubits", "qubits outside the " + std::to_string(cfg.scenario.qubits) + "-qubit register");
    cfg.scenario.channels.push_back(ch);
  }
  validating("scenario.channels", [&] { cfg.scenario.validate(); });

  cfg.grid = TimeGrid::default_for(cfg.scenario);
  if (t_max) cfg.grid.t_max = *t_max;
  if (samples) cfg.grid.samples = static_cast<int>(*samples);
  if (!(cfg.grid.t_max > 0.0) || !std::isfinite(cfg.grid.t_max)) throw ConfigError(K::Validation, "grid.t_max", "must be finite and > 0");
  if (cfg.grid.samples < 8) throw ConfigError(K::Validation, "grid.samples", "timescale fits need at least 8 samples");

  if (const Entry* e = get("outputs")) {
    cfg.outputs.clear();
    for (const auto& item : as_list(*e)) {
      bool found = false;
      for (auto o : {Output::Elements, Output::Concurrence, Output::Eof, Output::Reduced, Output::Timescales, Output::Audit})
        if (item == to_string(o)) {
          cfg.outputs.insert(o);
          found = true;
        }
      if (!found) throw ConfigError(K::Validation, "outputs", "unknown output '" + item + "'");
    }
  }
  if (const Entry* e = get("output.dir")) cfg.output_dir = e->value;
  if (const Entry* e = get("output.format")) {
    if (e->value == "csv") {
      cfg.format = OutputFormat::Csv;
    } else if (e->value == "json") {
      cfg.format = OutputFormat::Json;
    } else {
      throw ConfigError(K::Validation, "output.format", "expected csv or json");
    }
  }
  cfg.plots = plots.value_or(false);
  cfg.log_y = log_y.value_or(false);
  if (const Entry* e = get("output.convention")) {
    cfg.convention = parse_convention(e->value);
    if (!cfg.convention) throw ConfigError(K::Validation, "output.convention", "expected c, c2 or both");
  }

  bool any_mc = false;
  for (const auto& [key, _] : table) any_mc |= key.rfind("mc.", 0) == 0;
  if (any_mc) {
    TrajectoryConfig mc;
    if (trajectories) {
      if (*trajectories < 1) throw ConfigError(K::Validation, "mc.trajectories", "need at least one trajectory");
      mc.n_trajectories = static_cast<std::size_t>(*trajectories);
    }
    if (mc_threads) {
      if (*mc_threads < 1) throw ConfigError(K::Validation, "mc.threads", "threads must be >= 1");
      mc.threads = static_cast<unsigned>(*mc_threads);
    }
    if (mc_seed) mc.seed = static_cast<std::uint64_t>(*mc_seed);
    if (t_final) mc.t_final = *t_final;
    if (dt) mc.dt = *dt;
    if (!(mc.t_final > 0.0) || !std::isfinite(mc.t_final)) throw ConfigError(K::Validation, "mc.t_final", "must be finite and > 0");
    if (!(mc.dt > 0.0) || mc.dt > mc.t_final) throw ConfigError(K::Validation, "mc.dt", "must lie in (0, mc.t_final]");
    cfg.mc = mc;
  }

  if (draws) {
    if (*draws < 0) throw ConfigError(K::Validation, "sweep.draws", "must be >= 0");
    cfg.sweep.draws = static_cast<int>(*draws);
  }
  if (sweep_seed) cfg.sweep.seed = static_cast<std::uint64_t>(*sweep_seed);
  if (get("sweep.rate_scales")) {
    if (scales.empty()) throw ConfigError(K::Validation, "sweep.rate_scales", "list is empty");
    for (double v : scales)
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(K::Validation, "sweep.rate_scales", "scales must be finite and > 0");
    cfg.sweep.rate_scales = scales;
  }
  if (sweep_threads) {
    if (*sweep_threads < 1) throw ConfigError(K::Validation, "sweep.threads", "threads must be >= 1");
    cfg.sweep.threads = static_cast<unsigned>(*sweep_threads);
  }
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigError::Kind::IO, "", "cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace dephase
