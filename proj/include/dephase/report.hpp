#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dephase/config.hpp"
#include "dephase/entanglement.hpp"
#include "dephase/timescales.hpp"

namespace dephase {

/// Shortest decimal string that round-trips to the same double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

/// JSON number, or null when not finite.
inline nlohmann::json json_number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

/// Writes `content` to a sibling temporary file and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(ConfigError::Kind::IO, "", "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw ConfigError(ConfigError::Kind::IO, "", "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ConfigError(ConfigError::Kind::IO, "", "cannot rename into '" + path.string() + "'");
  }
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ConfigError(ConfigError::Kind::IO, "", "cannot create output directory '" + dir.string() + "'");
}

// ---------------------------------------------------------------------------
// Trajectory table

struct NumericTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline std::string to_csv(const NumericTable& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_number(row[c]);
    out += '\n';
  }
  return out;
}

inline nlohmann::json to_json(const NumericTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (double v : row) r.push_back(json_number(v));
    rows.push_back(std::move(r));
  }
  return {{"columns", t.columns}, {"rows", std::move(rows)}};
}

inline bool wants_c(ConventionChoice c) { return c != ConventionChoice::C2; }
inline bool wants_c2(ConventionChoice c) { return c != ConventionChoice::C; }

/// Column set depends only on the register size, the requested outputs and the convention.
inline std::vector<std::string> trajectory_columns(int qubits, const std::set<Output>& outputs, ConventionChoice conv) {
  std::vector<std::string> cols{"t"};
  const std::size_t dim = std::size_t{1} << qubits;
  if (outputs.count(Output::Elements))
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = i + 1; j < dim; ++j) cols.push_back("abs_rho_" + std::to_string(i + 1) + std::to_string(j + 1));
  const auto pairs = qubit_pairs(qubits);
  if (outputs.count(Output::Concurrence)) {
    if (wants_c(conv))
      for (auto p : pairs) cols.push_back("C_" + p.to_string());
    if (wants_c2(conv))
      for (auto p : pairs) cols.push_back("C2_" + p.to_string());
  }
  if (outputs.count(Output::Eof))
    for (auto p : pairs) cols.push_back("Ef_" + p.to_string());
  if (outputs.count(Output::Reduced)) {
    std::vector<QubitSet> subsystems;
    for (unsigned mask = 1; mask < (1u << qubits) - 1; ++mask) {
      QubitSet s;
      for (int q = 0; q < qubits; ++q)
        if ((mask >> q) & 1u) s.insert(static_cast<Qubit>(q));
      subsystems.push_back(s);
    }
    std::sort(subsystems.begin(), subsystems.end());
    for (auto s : subsystems) {
      const std::size_t d = std::size_t{1} << s.size();
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
          cols.push_back("abs_rho_" + s.to_string() + "_" + std::to_string(i + 1) + std::to_string(j + 1));
    }
  }
  return cols;
}

inline NumericTable trajectory_table(const std::vector<Snapshot>& snaps, int qubits, const std::set<Output>& outputs, ConventionChoice conv) {
  NumericTable t;
  t.columns = trajectory_columns(qubits, outputs, conv);
  const auto pairs = qubit_pairs(qubits);
  for (const auto& s : snaps) {
    std::vector<double> row{s.t};
    if (outputs.count(Output::Elements))
      for (std::size_t i = 0; i < s.rho.dim(); ++i)
        for (std::size_t j = i + 1; j < s.rho.dim(); ++j) row.push_back(std::abs(s.rho(i, j)));
    if (outputs.count(Output::Concurrence)) {
      if (wants_c(conv))
        for (auto p : pairs) row.push_back(s.concurrence.at(p));
      if (wants_c2(conv))
        for (auto p : pairs) row.push_back(s.concurrence.at(p) * s.concurrence.at(p));
    }
    if (outputs.count(Output::Eof))
      for (auto p : pairs) row.push_back(entanglement_of_formation(s.concurrence.at(p)));
    if (outputs.count(Output::Reduced))
      for (const auto& [keep, rho] : s.reduced)
        for (std::size_t i = 0; i < rho.dim(); ++i)
          for (std::size_t j = i + 1; j < rho.dim(); ++j) row.push_back(std::abs(rho(i, j)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Timescale and audit reports

inline std::string element_name(std::size_t row, std::size_t col) {
  return "rho_" + std::to_string(row + 1) + std::to_string(col + 1);
}

inline const char* fit_status(const ElementFit& e) {
  if (e.fit.is_constant) return "constant";
  if (!e.predicted_tau) return "decaying";
  return std::abs(e.fit.tau - *e.predicted_tau) <= kTauRelativeTolerance * *e.predicted_tau ? "matches" : "DIFFERS";
}

/// Rows: quantity, scope, element, convention, fitted_tau, reference_tau, status.
inline std::string timescales_csv(const TimescaleReport& rep, ConventionChoice conv) {
  std::ostringstream out;
  out << "quantity,scope,element,convention,fitted_tau,reference_tau,status\n";
  auto emit_elements = [&](const std::string& scope, const std::vector<ElementFit>& fits) {
    for (const auto& e : fits)
      out << "coherence," << scope << ',' << element_name(e.row, e.col) << ",," << format_number(e.fit.tau) << ','
          << (e.predicted_tau ? format_number(*e.predicted_tau) : "") << ',' << fit_status(e) << '\n';
  };
  emit_elements("full", rep.elements);
  for (const auto& [keep, fits] : rep.reduced) emit_elements(keep.to_string(), fits);
  for (const auto& p : rep.pairs) {
    if (wants_c(conv)) out << "concurrence," << p.pair.to_string() << ",,C," << format_number(p.c.tau) << ",," << (p.c.is_constant ? "constant" : "decaying") << '\n';
    if (wants_c2(conv)) out << "concurrence," << p.pair.to_string() << ",,C2," << format_number(p.c2.tau) << ",," << (p.c2.is_constant ? "constant" : "decaying") << '\n';
  }
  for (const auto& c : compare_tabulated(rep))
    out << "tabulated," << c.tabulated.label << ',' << c.tabulated.formula << ','
        << (c.tabulated.convention ? to_string(*c.tabulated.convention) : "") << ',' << format_number(c.fitted) << ','
        << format_number(c.tabulated.value) << ',' << status(c) << '\n';
  return out.str();
}

inline nlohmann::json fit_json(const FitResult& f) {
  return {{"tau", json_number(f.tau)},
          {"amplitude", json_number(f.amplitude)},
          {"residual", json_number(f.residual)},
          {"constant", f.is_constant},
          {"monotone", f.monotone},
          {"used_samples", f.used_samples}};
}

inline nlohmann::json timescales_json(const TimescaleReport& rep, ConventionChoice conv) {
  auto elements = [](const std::vector<ElementFit>& fits) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : fits) {
      nlohmann::json j = {{"element", element_name(e.row, e.col)}, {"fit", fit_json(e.fit)}, {"status", fit_status(e)}};
      if (e.predicted_tau) j["predicted_tau"] = json_number(*e.predicted_tau);
      arr.push_back(std::move(j));
    }
    return arr;
  };
  nlohmann::json reduced = nlohmann::json::object();
  for (const auto& [keep, fits] : rep.reduced) reduced[keep.to_string()] = elements(fits);
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : rep.pairs) {
    nlohmann::json j = {{"pair", p.pair.to_string()}};
    if (wants_c(conv)) j["C"] = fit_json(p.c);
    if (wants_c2(conv)) j["C2"] = fit_json(p.c2);
    pairs.push_back(std::move(j));
  }
  nlohmann::json tab = nlohmann::json::array();
  for (const auto& c : compare_tabulated(rep)) {
    nlohmann::json j = {{"label", c.tabulated.label},
                        {"formula", c.tabulated.formula},
                        {"tabulated", json_number(c.tabulated.value)},
                        {"fitted", json_number(c.fitted)},
                        {"status", status(c)}};
    if (c.tabulated.convention) j["convention"] = to_string(*c.tabulated.convention);
    tab.push_back(std::move(j));
  }
  return {{"scenario", rep.scenario_id},
          {"class", info(rep.cls).name},
          {"reference_scenario", rep.reference ? nlohmann::json(std::string(to_string(*rep.reference))) : nlohmann::json(nullptr)},
          {"elements", elements(rep.elements)},
          {"reduced", std::move(reduced)},
          {"concurrence", std::move(pairs)},
          {"tabulated", std::move(tab)}};
}

inline std::string audit_csv(const AuditResult& a, ConventionChoice conv) {
  std::ostringstream out;
  out << "pair,verdict,tau_slowest_coherence,asymptotic_C";
  if (wants_c(conv)) out << ",tau_dis_C,margin_C";
  if (wants_c2(conv)) out << ",tau_dis_C2,margin_C2";
  out << '\n';
  for (const auto& p : a.pairs) {
    out << p.pair.to_string() << ',' << to_string(p.verdict) << ',' << format_number(p.tau_slowest_coherence) << ',' << format_number(p.asymptotic_c);
    if (wants_c(conv)) out << ',' << format_number(p.tau_dis_c) << ',' << format_number(p.margin_c);
    if (wants_c2(conv)) out << ',' << format_number(p.tau_dis_c2) << ',' << format_number(p.margin_c2);
    out << '\n';
  }
  out << "overall," << to_string(a.verdict) << ",,";
  if (wants_c(conv)) out << ",,";
  if (wants_c2(conv)) out << ",,";
  out << '\n';
  return out.str();
}

inline nlohmann::json audit_json(const AuditResult& a, ConventionChoice conv) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : a.pairs) {
    nlohmann::json j = {{"pair", p.pair.to_string()}, {"verdict", to_string(p.verdict)}, {"tau_slowest_coherence", json_number(p.tau_slowest_coherence)},
                        {"asymptotic_C", json_number(p.asymptotic_c)}};
    if (wants_c(conv)) {
      j["tau_dis_C"] = json_number(p.tau_dis_c);
      j["margin_C"] = json_number(p.margin_c);
    }
    if (wants_c2(conv)) {
      j["tau_dis_C2"] = json_number(p.tau_dis_c2);
      j["margin_C2"] = json_number(p.margin_c2);
    }
    pairs.push_back(std::move(j));
  }
  return {{"verdict", to_string(a.verdict)}, {"pairs", std::move(pairs)}};
}

// ---------------------------------------------------------------------------
// SVG line charts

struct Series {
  std::string name;
  std::vector<double> values;
};

inline std::string svg_line_chart(const std::string& title, const std::vector<double>& x, const std::vector<Series>& series, bool log_y) {
  constexpr double W = 640, H = 400, L = 60, R = 150, T = 30, B = 40;
  constexpr double kLogFloor = 1e-16;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  const double x0 = x.empty() ? 0.0 : x.front(), x1 = x.empty() ? 1.0 : x.back();
  double y0 = log_y ? std::log10(kLogFloor) : 0.0, y1 = log_y ? 0.0 : 1.0;
  if (log_y) {
    double lo = 0.0, hi = -300.0;
    for (const auto& s : series)
      for (double v : s.values) {
        const double l = std::log10(std::max(v, kLogFloor));
        lo = std::min(lo, l);
        hi = std::max(hi, l);
      }
    y0 = std::floor(lo);
    y1 = std::ceil(std::max(hi, y0 + 1));
  } else {
    for (const auto& s : series)
      for (double v : s.values) y1 = std::max(y1, v);
  }
  auto px = [&](double v) { return L + (W - L - R) * (x1 > x0 ? (v - x0) / (x1 - x0) : 0.0); };
  auto py = [&](double v) {
    const double y = log_y ? std::log10(std::max(v, kLogFloor)) : v;
    return H - B - (H - T - B) * (y - y0) / (y1 - y0);
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << L << "\" y=\"18\" font-size=\"13\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 15 << "\" text-anchor=\"middle\">" << format_number(std::round(xv * 1000) / 1000) << "</text>\n";
    const double yv = y0 + (y1 - y0) * k / 4.0;
    const std::string label = log_y ? "1e" + format_number(std::round(yv * 10) / 10) : format_number(std::round(yv * 1000) / 1000);
    o << "<text x=\"" << L - 5 << "\" y=\"" << (H - B - (H - T - B) * k / 4.0) + 4 << "\" text-anchor=\"end\">" << label << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 5 << "\" text-anchor=\"middle\">t</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % std::size(palette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size() && i < series[s].values.size(); ++i)
      o << (i ? " " : "") << format_number(std::round(px(x[i]) * 100) / 100) << ',' << format_number(std::round(py(series[s].values[i]) * 100) / 100);
    o << "\"/>\n";
    o << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 14 * (s + 1) << "\" fill=\"" << color << "\">" << series[s].name << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace dephase
