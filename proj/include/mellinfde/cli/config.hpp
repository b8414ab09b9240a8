#pragma once

// Run configuration: a JSON document with sections
//
//   terms    [{"lambda": 1, "alpha": 0.5}, {"lambda": 1, "alpha": 0}]      required
//   forcing  {"kind": "sine-pulse", "t_max": 6.28, "params": {...}}         required
//   grid     {"rho": 0.5, "delta_eta": 0.5, "eta_bar": 200}
//   output   {"t_lo": 0.1, "t_hi": 15, "samples": 200, "format": "csv",
//             "spectrum": false}
//   oracles  ["mittag-leffler", {"name": "grunwald-letnikov", "step": 1e-3}]
//
// Unknown keys anywhere are errors.  Forcing kinds and their params:
//   sine-pulse      t_max (default 2 pi); amplitude
//   step-pulse      t_max;                amplitude
//   monomial-pulse  t_max;                mu, amplitude
//   sampled         times, values (t_max, if given, must equal the last time)

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mellinfde/errors.hpp"
#include "mellinfde/mellin.hpp"
#include "mellinfde/problem.hpp"

namespace mellinfde::cli {

using json = nlohmann::json;

enum class TableFormat { csv, tsv };

struct GridConfig {
  double rho = 0.5;
  double delta_eta = 0.5;
  double eta_bar = 200.0;

  MellinGrid grid() const { return MellinGrid::from_cutoff(rho, delta_eta, eta_bar); }
};

struct OutputConfig {
  double t_lo = 0.1;
  double t_hi = 15.0;
  int samples = 200;
  TableFormat format = TableFormat::csv;
  bool spectrum = false;
};

struct OracleConfig {
  bool mittag_leffler = false;
  bool grunwald_letnikov = false;
  double gl_step = 1e-3;
};

struct RunConfig {
  FdeProblem problem;
  GridConfig grid;
  OutputConfig output;
  OracleConfig oracles;
};

/// Command-line values that take precedence over the document.
struct Overrides {
  std::optional<double> rho;
  std::optional<double> delta_eta;
  std::optional<double> eta_bar;
  bool no_oracle = false;
  bool spectrum = false;
};

namespace detail {

// Accumulates every problem found so that one run reports all of them.
class Issues {
 public:
  void add(std::string path, std::string what) { list_.push_back(std::move(path) + ": " + std::move(what)); }
  bool empty() const { return list_.empty(); }

  [[noreturn]] void raise() const {
    std::ostringstream os;
    os << "invalid configuration (" << list_.size() << (list_.size() == 1 ? " problem" : " problems") << ")";
    for (const auto& s : list_) os << "\n  " << s;
    throw ConfigError(os.str());
  }

 private:
  std::vector<std::string> list_;
};

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed,
                           Issues& issues) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || item.key() == a;
    if (!known) issues.add(path + "." + item.key(), "unknown key");
  }
}

inline bool expect_object(const json& v, const std::string& path, Issues& issues) {
  if (v.is_object()) return true;
  issues.add(path, std::string("expected an object, got ") + v.type_name());
  return false;
}

inline std::optional<double> number(const json& obj, const std::string& path, const char* key, Issues& issues) {
  const auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (!it->is_number()) {
    issues.add(path + "." + key, std::string("expected a number, got ") + it->type_name());
    return std::nullopt;
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) {
    issues.add(path + "." + key, "must be finite");
    return std::nullopt;
  }
  return v;
}

inline std::vector<double> number_array(const json& obj, const std::string& path, const char* key, Issues& issues) {
  std::vector<double> out;
  const auto it = obj.find(key);
  if (it == obj.end()) {
    issues.add(path + "." + key, "required");
    return out;
  }
  if (!it->is_array()) {
    issues.add(path + "." + key, "expected an array of numbers");
    return out;
  }
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& v = (*it)[i];
    if (!v.is_number()) {
      issues.add(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
      continue;
    }
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

inline std::vector<FdeTerm> parse_terms(const json& doc, Issues& issues) {
  std::vector<FdeTerm> terms;
  const auto it = doc.find("terms");
  if (it == doc.end()) {
    issues.add("terms", "required (list of {lambda, alpha})");
    return terms;
  }
  if (!it->is_array() || it->empty()) {
    issues.add("terms", "expected a nonempty array");
    return terms;
  }
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string path = "terms[" + std::to_string(i) + "]";
    const json& t = (*it)[i];
    if (!expect_object(t, path, issues)) continue;
    reject_unknown(t, path, {"lambda", "alpha"}, issues);
    const auto lambda = number(t, path, "lambda", issues);
    const auto alpha = number(t, path, "alpha", issues);
    if (!t.contains("lambda")) issues.add(path + ".lambda", "required");
    if (!t.contains("alpha")) issues.add(path + ".alpha", "required");
    if (alpha && *alpha < 0.0) issues.add(path + ".alpha", "must be >= 0");
    if (lambda && alpha) terms.push_back({*lambda, *alpha});
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (terms[i].order == terms[j].order) issues.add("terms", "order " + std::to_string(terms[i].order) + " repeats");
    }
  }
  bool derivative = false;
  for (const auto& t : terms) derivative = derivative || t.order > 0.0;
  if (!terms.empty() && !derivative) issues.add("terms", "at least one term needs alpha > 0");
  return terms;
}

inline std::optional<Forcing> parse_forcing(const json& doc, Issues& issues) {
  const auto it = doc.find("forcing");
  if (it == doc.end()) {
    issues.add("forcing", "required ({kind, t_max, params})");
    return std::nullopt;
  }
  if (!expect_object(*it, "forcing", issues)) return std::nullopt;
  const json& f = *it;
  reject_unknown(f, "forcing", {"kind", "t_max", "params"}, issues);

  const auto kind_it = f.find("kind");
  if (kind_it == f.end() || !kind_it->is_string()) {
    issues.add("forcing.kind", "required string: sine-pulse, step-pulse, monomial-pulse or sampled");
    return std::nullopt;
  }
  const std::string kind = kind_it->get<std::string>();
  const auto t_max = number(f, "forcing", "t_max", issues);
  if (t_max && !(*t_max > 0.0)) issues.add("forcing.t_max", "must be > 0");

  json params = json::object();
  if (const auto p = f.find("params"); p != f.end()) {
    if (!expect_object(*p, "forcing.params", issues)) return std::nullopt;
    params = *p;
  }

  try {
    if (kind == "sine-pulse") {
      reject_unknown(params, "forcing.params", {"amplitude"}, issues);
      const double amp = number(params, "forcing.params", "amplitude", issues).value_or(1.0);
      return Forcing::sine_pulse(t_max.value_or(2.0 * std::numbers::pi), amp);
    }
    if (kind == "step-pulse") {
      reject_unknown(params, "forcing.params", {"amplitude"}, issues);
      const double amp = number(params, "forcing.params", "amplitude", issues).value_or(1.0);
      if (!t_max) {
        if (!f.contains("t_max")) issues.add("forcing.t_max", "required for step-pulse");
        return std::nullopt;
      }
      return Forcing::step_pulse(*t_max, amp);
    }
    if (kind == "monomial-pulse") {
      reject_unknown(params, "forcing.params", {"mu", "amplitude"}, issues);
      const double amp = number(params, "forcing.params", "amplitude", issues).value_or(1.0);
      const auto mu = number(params, "forcing.params", "mu", issues);
      if (!params.contains("mu")) issues.add("forcing.params.mu", "required for monomial-pulse");
      if (!f.contains("t_max")) issues.add("forcing.t_max", "required for monomial-pulse");
      if (mu && !(*mu > -1.0)) issues.add("forcing.params.mu", "must be > -1");
      if (!t_max || !mu || !(*mu > -1.0)) return std::nullopt;
      return Forcing::monomial_pulse(*t_max, *mu, amp);
    }
    if (kind == "sampled") {
      reject_unknown(params, "forcing.params", {"times", "values"}, issues);
      auto times = number_array(params, "forcing.params", "times", issues);
      auto values = number_array(params, "forcing.params", "values", issues);
      if (times.size() != values.size()) {
        issues.add("forcing.params", "times and values must have equal length");
        return std::nullopt;
      }
      if (t_max && !times.empty() && *t_max != times.back()) {
        issues.add("forcing.t_max", "must equal the last sample time for sampled forcing");
      }
      return Forcing::sampled(std::move(times), std::move(values));
    }
    issues.add("forcing.kind", "unknown kind '" + kind + "'");
  } catch (const std::invalid_argument& e) {
    issues.add("forcing", e.what());
  }
  return std::nullopt;
}

inline GridConfig parse_grid(const json& doc, Issues& issues) {
  GridConfig g;
  const auto it = doc.find("grid");
  if (it == doc.end() || !expect_object(*it, "grid", issues)) return g;
  reject_unknown(*it, "grid", {"rho", "delta_eta", "eta_bar"}, issues);
  g.rho = number(*it, "grid", "rho", issues).value_or(g.rho);
  g.delta_eta = number(*it, "grid", "delta_eta", issues).value_or(g.delta_eta);
  g.eta_bar = number(*it, "grid", "eta_bar", issues).value_or(g.eta_bar);
  return g;
}

inline OutputConfig parse_output(const json& doc, Issues& issues) {
  OutputConfig o;
  const auto it = doc.find("output");
  if (it == doc.end() || !expect_object(*it, "output", issues)) return o;
  const json& out = *it;
  reject_unknown(out, "output", {"t_lo", "t_hi", "samples", "format", "spectrum"}, issues);
  o.t_lo = number(out, "output", "t_lo", issues).value_or(o.t_lo);
  o.t_hi = number(out, "output", "t_hi", issues).value_or(o.t_hi);
  if (const auto s = out.find("samples"); s != out.end()) {
    if (!s->is_number_integer()) {
      issues.add("output.samples", "expected an integer");
    } else {
      o.samples = s->get<int>();
    }
  }
  if (const auto f = out.find("format"); f != out.end()) {
    if (f->is_string() && f->get<std::string>() == "csv") {
      o.format = TableFormat::csv;
    } else if (f->is_string() && f->get<std::string>() == "tsv") {
      o.format = TableFormat::tsv;
    } else {
      issues.add("output.format", "expected \"csv\" or \"tsv\"");
    }
  }
  if (const auto s = out.find("spectrum"); s != out.end()) {
    if (!s->is_boolean()) {
      issues.add("output.spectrum", "expected a boolean");
    } else {
      o.spectrum = s->get<bool>();
    }
  }
  return o;
}

inline OracleConfig parse_oracles(const json& doc, Issues& issues) {
  OracleConfig o;
  const auto it = doc.find("oracles");
  if (it == doc.end()) return o;
  if (!it->is_array()) {
    issues.add("oracles", "expected an array");
    return o;
  }
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string path = "oracles[" + std::to_string(i) + "]";
    const json& entry = (*it)[i];
    std::string name;
    std::optional<double> step;
    if (entry.is_string()) {
      name = entry.get<std::string>();
    } else if (entry.is_object()) {
      reject_unknown(entry, path, {"name", "step"}, issues);
      if (const auto n = entry.find("name"); n != entry.end() && n->is_string()) {
        name = n->get<std::string>();
      } else {
        issues.add(path + ".name", "required string");
        continue;
      }
      step = number(entry, path, "step", issues);
    } else {
      issues.add(path, "expected a name or an object");
      continue;
    }
    if (name == "mittag-leffler") {
      if (entry.is_object() && entry.contains("step")) issues.add(path + ".step", "only meaningful for grunwald-letnikov");
      o.mittag_leffler = true;
    } else if (name == "grunwald-letnikov") {
      o.grunwald_letnikov = true;
      if (step) {
        if (!(*step > 0.0)) issues.add(path + ".step", "must be > 0");
        o.gl_step = *step;
      }
    } else {
      issues.add(path, "unknown oracle '" + name + "' (expected mittag-leffler or grunwald-letnikov)");
    }
  }
  return o;
}

inline void check_invariants(const RunConfig& c, Issues& issues) {
  const auto& g = c.grid;
  if (!(g.delta_eta > 0.0)) issues.add("grid.delta_eta", "must be > 0");
  if (!(g.eta_bar > 0.0)) issues.add("grid.eta_bar", "must be > 0");
  if (g.delta_eta > 0.0 && g.eta_bar > 0.0) {
    try {
      (void)g.grid();
    } catch (const std::invalid_argument&) {
      std::ostringstream os;
      os << "eta_bar (" << g.eta_bar << ") must be an integer multiple of delta_eta (" << g.delta_eta << ")";
      issues.add("grid.eta_bar", os.str());
    }
  }
  const auto& o = c.output;
  if (!(o.t_lo > 0.0)) issues.add("output.t_lo", "must be > 0");
  if (!(o.t_hi > o.t_lo)) issues.add("output.t_hi", "must exceed t_lo");
  if (o.samples < 2) issues.add("output.samples", "must be >= 2");
}

}  // namespace detail

/// Parse and validate a configuration document; every problem found is listed
/// in the thrown ConfigError.
inline RunConfig parse_config(std::string_view text, const Overrides& overrides = {}) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw ConfigError("config parse error at " + detail::line_context(text, at) + ": " + e.what());
  }
  detail::Issues issues;
  if (!doc.is_object()) {
    issues.add("$", "top level must be an object with sections terms, forcing, grid, output, oracles");
    issues.raise();
  }
  detail::reject_unknown(doc, "$", {"terms", "forcing", "grid", "output", "oracles"}, issues);

  RunConfig c;
  c.problem.terms = detail::parse_terms(doc, issues);
  if (auto f = detail::parse_forcing(doc, issues)) c.problem.forcing = std::move(*f);
  c.grid = detail::parse_grid(doc, issues);
  c.output = detail::parse_output(doc, issues);
  c.oracles = detail::parse_oracles(doc, issues);

  if (overrides.rho) c.grid.rho = *overrides.rho;
  if (overrides.delta_eta) c.grid.delta_eta = *overrides.delta_eta;
  if (overrides.eta_bar) c.grid.eta_bar = *overrides.eta_bar;
  if (overrides.no_oracle) c.oracles.mittag_leffler = c.oracles.grunwald_letnikov = false;
  if (overrides.spectrum) c.output.spectrum = true;

  detail::check_invariants(c, issues);
  if (!issues.empty()) issues.raise();
  return c;
}

}  // namespace mellinfde::cli
