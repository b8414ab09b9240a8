#pragma once

// One solver run: solve, sample, compare with the requested oracles, write
//   solution.<csv|tsv>   t, x_mellin, [x_ml_oracle], [x_gl_oracle],
//                        [abs_err_ml], [abs_err_gl], extrapolated
//   metadata.json        grid, solver certificates, diagnostics, timing
//   spectrum.<csv|tsv>   optional, k, re_gamma, im_gamma, re_X, im_X
//
// Exit codes: 0 success, 2 configuration, 3 validation, 4 numerical failure,
// 1 I/O or anything unexpected.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mellinfde/cli/config.hpp"
#include "mellinfde/errors.hpp"
#include "mellinfde/oracle.hpp"
#include "mellinfde/solver.hpp"

namespace mellinfde::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_io = 1;
inline constexpr int exit_config = 2;
inline constexpr int exit_validation = 3;
inline constexpr int exit_numeric = 4;

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline char delimiter(TableFormat f) { return f == TableFormat::tsv ? '\t' : ','; }
inline const char* extension(TableFormat f) { return f == TableFormat::tsv ? ".tsv" : ".csv"; }

inline std::ofstream open_for_write(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return out;
}

// Bring sum c_i D^{a_i} x = f to a form with a closed-form Mittag-Leffler
// solution: D^a x + lambda D^b x = g with a > b >= 0.  Returns nothing for
// other shapes.
struct MittagLefflerShape {
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  double scale = 1.0;  // g = f * scale
};

inline std::optional<MittagLefflerShape> mittag_leffler_shape(const std::vector<FdeTerm>& terms) {
  std::vector<FdeTerm> active;
  for (const auto& t : terms) {
    if (t.coefficient != 0.0) active.push_back(t);
  }
  std::sort(active.begin(), active.end(), [](const FdeTerm& a, const FdeTerm& b) { return a.order > b.order; });
  if (active.empty() || active.size() > 2 || !(active[0].order > 0.0)) return std::nullopt;
  MittagLefflerShape s;
  s.alpha = active[0].order;
  s.scale = 1.0 / active[0].coefficient;
  if (active.size() == 2) {
    s.beta = active[1].order;
    s.lambda = active[1].coefficient / active[0].coefficient;
  }
  return s;
}

inline std::vector<double> sample_times(const OutputConfig& o) {
  std::vector<double> t(static_cast<std::size_t>(o.samples));
  for (int i = 0; i < o.samples; ++i) {
    t[static_cast<std::size_t>(i)] = i + 1 == o.samples ? o.t_hi : o.t_lo + (o.t_hi - o.t_lo) * i / (o.samples - 1);
  }
  return t;
}

inline nlohmann::ordered_json diagnostics_json(const std::vector<Diagnostic>& ds) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& d : ds) {
    arr.push_back({{"severity", d.severity == Severity::error ? "error" : "warning"},
                   {"code", d.code},
                   {"message", d.message}});
  }
  return arr;
}

}  // namespace detail

/// k, Re gamma_k, Im gamma_k, Re X_k, Im X_k for k = -m..m.
inline void emit_spectrum(const MellinSpectrum& spectrum, std::ostream& out, TableFormat format = TableFormat::csv) {
  const char d = detail::delimiter(format);
  out << "k" << d << "re_gamma" << d << "im_gamma" << d << "re_X" << d << "im_X" << '\n';
  const MellinGrid& g = spectrum.grid();
  char buf[160];
  for (int k = -g.m(); k <= g.m(); ++k) {
    const complex gamma = g.gamma(k);
    const complex x = spectrum[k];
    std::snprintf(buf, sizeof buf, "%d%c%.17g%c%.17g%c%.17g%c%.17g\n", k, d, gamma.real(), d, gamma.imag(), d,
                  x.real(), d, x.imag());
    out << buf;
  }
}

inline void emit_spectrum(const SolverReport& report, std::ostream& out, TableFormat format = TableFormat::csv) {
  emit_spectrum(report.spectrum, out, format);
}

struct RunOutcome {
  int exit_code = exit_ok;
  std::vector<Diagnostic> diagnostics;
  std::optional<double> max_abs_err_ml;
  std::optional<double> max_abs_err_gl;
};

/// Execute a validated configuration, writing into `out_dir` (created if
/// needed).  Human-readable progress and diagnostics go to `log`.
inline RunOutcome run(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  auto& diags = outcome.diagnostics;

  const MellinGrid grid = config.grid.grid();
  nlohmann::ordered_json meta;
  const auto [win_lo, win_hi] = grid.trusted_window();
  meta["grid"] = {{"rho", grid.rho()},        {"delta_eta", grid.delta_eta()}, {"eta_bar", grid.eta_bar()},
                  {"m", grid.m()},            {"b", grid.b()},                 {"trusted_window", {win_lo, win_hi}}};
  {
    auto terms = nlohmann::ordered_json::array();
    for (const auto& t : config.problem.terms) terms.push_back({{"lambda", t.coefficient}, {"alpha", t.order}});
    meta["problem"] = {{"terms", terms},
                       {"forcing", {{"kind", std::string(to_string(config.problem.forcing.kind()))},
                                    {"t_max", config.problem.forcing.t_max()}}}};
  }

  auto finish = [&](int code) {
    outcome.exit_code = code;
    meta["diagnostics"] = detail::diagnostics_json(diags);
    meta["exit_code"] = code;
    meta["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
      auto out = detail::open_for_write(out_dir / "metadata.json");
      out << meta.dump(2) << '\n';
    } catch (const std::exception& e) {
      log << "error: " << e.what() << '\n';
      outcome.exit_code = code == exit_ok ? exit_io : code;
    }
    for (const auto& d : diags) {
      log << (d.severity == Severity::error ? "error" : "warning") << " [" << d.code << "] " << d.message << '\n';
    }
    return outcome;
  };

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    log << "error: cannot create " << out_dir.string() << ": " << ec.message() << '\n';
    outcome.exit_code = exit_io;
    return outcome;
  }

  diags = validate_problem(config.problem, grid);
  std::optional<detail::MittagLefflerShape> ml_shape;
  if (config.oracles.mittag_leffler) {
    ml_shape = detail::mittag_leffler_shape(config.problem.terms);
    if (!ml_shape) {
      diags.push_back({Severity::error, "oracle-unsupported",
                       "the mittag-leffler oracle needs one or two terms, the highest-order one with alpha > 0"});
    }
  }
  if (has_errors(diags)) return finish(exit_validation);

  // Solve.
  std::optional<SolverReport> report;
  try {
    report = solve_fde(config.problem, grid);
  } catch (const ValidationError& e) {
    diags.push_back({Severity::error, "validation", e.what()});
    return finish(exit_validation);
  } catch (const Error& e) {
    diags.push_back({Severity::error, "numeric", e.what()});
    return finish(exit_numeric);
  }
  for (const auto& d : report->diagnostics) {
    const bool seen = std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& x) { return x.code == d.code && x.message == d.message; });
    if (!seen) diags.push_back(d);
  }
  meta["solver"] = {{"condition_estimate", report->condition_estimate},
                    {"residual_norm", report->residual_norm},
                    {"symmetry_defect", report->symmetry_defect}};

  const std::vector<double> ts = detail::sample_times(config.output);
  std::vector<double> x_mellin;
  std::optional<std::vector<double>> x_ml;
  std::optional<std::vector<double>> x_gl;
  try {
    x_mellin = inverse_reconstruct(report->spectrum, ts);
    if (ml_shape) {
      const Forcing g = config.problem.forcing.scaled(ml_shape->scale);
      const TimeSeries s = ml_shape->beta == 0.0 ? ml_convolution_solution(ml_shape->alpha, ml_shape->lambda, g, ts)
                                                 : ml_two_term_solution(ml_shape->alpha, ml_shape->beta, ml_shape->lambda, g, ts);
      x_ml = s.values;
    }
    if (config.oracles.grunwald_letnikov) {
      const double h = config.oracles.gl_step;
      TimeSeries s = gl_stepper(config.problem, h, config.output.t_hi + h);
      // Quiescent start: prepend x(0) = 0 so that t in (0, h) interpolates.
      std::vector<double> times{0.0};
      std::vector<double> values{0.0};
      times.insert(times.end(), s.times.begin(), s.times.end());
      values.insert(values.end(), s.values.begin(), s.values.end());
      std::vector<double> out;
      for (double t : ts) {
        const auto it = std::lower_bound(times.begin(), times.end(), t);
        const auto i = static_cast<std::size_t>(it - times.begin());
        if (times[i] == t) {
          out.push_back(values[i]);
        } else {
          const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
          out.push_back((1.0 - w) * values[i - 1] + w * values[i]);
        }
      }
      x_gl = std::move(out);
    }
  } catch (const Error& e) {
    diags.push_back({Severity::error, "numeric", e.what()});
    return finish(exit_numeric);
  } catch (const std::invalid_argument& e) {
    diags.push_back({Severity::error, "numeric", e.what()});
    return finish(exit_numeric);
  }

  // Tables.
  const char d = detail::delimiter(config.output.format);
  const char* ext = detail::extension(config.output.format);
  try {
    auto out = detail::open_for_write(out_dir / (std::string("solution") + ext));
    out << "t" << d << "x_mellin";
    if (x_ml) out << d << "x_ml_oracle";
    if (x_gl) out << d << "x_gl_oracle";
    if (x_ml) out << d << "abs_err_ml";
    if (x_gl) out << d << "abs_err_gl";
    out << d << "extrapolated\n";
    double err_ml = 0.0;
    double err_gl = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      out << detail::fmt(ts[i]) << d << detail::fmt(x_mellin[i]);
      if (x_ml) out << d << detail::fmt((*x_ml)[i]);
      if (x_gl) out << d << detail::fmt((*x_gl)[i]);
      if (x_ml) {
        const double e = std::abs(x_mellin[i] - (*x_ml)[i]);
        err_ml = std::max(err_ml, e);
        out << d << detail::fmt(e);
      }
      if (x_gl) {
        const double e = std::abs(x_mellin[i] - (*x_gl)[i]);
        err_gl = std::max(err_gl, e);
        out << d << detail::fmt(e);
      }
      out << d << (grid.in_trusted_window(ts[i]) ? "false" : "true") << '\n';
    }
    if (x_ml) outcome.max_abs_err_ml = err_ml;
    if (x_gl) outcome.max_abs_err_gl = err_gl;

    if (config.output.spectrum) {
      auto spec = detail::open_for_write(out_dir / (std::string("spectrum") + ext));
      emit_spectrum(*report, spec, config.output.format);
    }
  } catch (const std::exception& e) {
    diags.push_back({Severity::error, "io", e.what()});
    return finish(exit_io);
  }

  meta["output"] = {{"t_lo", config.output.t_lo}, {"t_hi", config.output.t_hi}, {"samples", config.output.samples}};
  auto oracles = nlohmann::ordered_json::object();
  if (outcome.max_abs_err_ml) oracles["mittag-leffler"] = {{"max_abs_err", *outcome.max_abs_err_ml}};
  if (outcome.max_abs_err_gl) {
    oracles["grunwald-letnikov"] = {{"step", config.oracles.gl_step}, {"max_abs_err", *outcome.max_abs_err_gl}};
  }
  meta["oracles"] = oracles;
  log << "solved on " << grid.size() << " grid points; residual " << report->residual_norm << ", condition "
      << report->condition_estimate << '\n';
  return finish(exit_ok);
}

}  // namespace mellinfde::cli
