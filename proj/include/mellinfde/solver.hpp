#pragma once

// Mellin-domain solver for sum_i lambda_i D^{alpha_i} x = f with zero initial
// data.
//
// With zero initial data the Caputo derivative transforms as
//     M{D^alpha x}(gamma) = C(gamma, alpha) X(gamma - alpha),
//     C(gamma, alpha) = Gamma(1 - gamma + alpha) / Gamma(1 - gamma),
// and X(gamma - alpha) is a linear image of X on the inversion line (see
// mellin.hpp).  Collecting terms on the grid gives a dense complex system
//     N X = F,   N_sj = sum_i lambda_i C(gamma_s, alpha_i) a_sj(alpha_i) / 2b.
// An order-0 term needs no special case: a_sj(0) = 2b delta_sj and C = 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mellinfde/errors.hpp"
#include "mellinfde/mellin.hpp"
#include "mellinfde/problem.hpp"
#include "mellinfde/specfun.hpp"

namespace mellinfde {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class Severity { warning, error };

struct Diagnostic {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
};

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Severity::error; });
}

inline std::string format_diagnostics(const std::vector<Diagnostic>& ds) {
  std::ostringstream os;
  for (const auto& d : ds) {
    os << (d.severity == Severity::error ? "error" : "warning") << " [" << d.code << "] " << d.message << '\n';
  }
  return os.str();
}

/// Screens a problem against a grid.  Never throws; problems are reported as
/// diagnostics:
///  - (a) error when rho - max alpha <= -n, n = ceil(max alpha): the shifted
///    line falls below the solution's fundamental strip;
///  - (b) warning when rho >= frac(alpha_i) for a fractional order, the
///    condition under which the dropped boundary terms are guaranteed to vanish;
///  - (c) error when rho is not inside the forcing's fundamental strip;
/// plus structural checks and Gamma poles of C(gamma, alpha) on the grid.
inline std::vector<Diagnostic> validate_problem(const FdeProblem& problem, const MellinGrid& grid) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string code, std::string msg) { out.push_back({Severity::error, std::move(code), std::move(msg)}); };
  auto warn = [&](std::string code, std::string msg) { out.push_back({Severity::warning, std::move(code), std::move(msg)}); };

  if (problem.terms.empty()) {
    error("no-terms", "problem has no terms");
    return out;
  }
  bool structural = true;
  bool any_derivative = false;
  for (std::size_t i = 0; i < problem.terms.size(); ++i) {
    const auto& term = problem.terms[i];
    std::ostringstream where;
    where << "term " << i << " (lambda=" << term.coefficient << ", alpha=" << term.order << ")";
    if (!std::isfinite(term.coefficient) || !std::isfinite(term.order)) {
      error("non-finite", where.str() + ": coefficient and order must be finite");
      structural = false;
      continue;
    }
    if (term.order < 0.0) {
      error("negative-order", where.str() + ": order must be >= 0");
      structural = false;
    }
    if (term.order > 0.0) any_derivative = true;
    if (term.coefficient == 0.0) warn("zero-coefficient", where.str() + ": coefficient is zero");
    for (std::size_t j = 0; j < i; ++j) {
      if (problem.terms[j].order == term.order) {
        error("duplicate-order", where.str() + ": order repeats term " + std::to_string(j));
        structural = false;
      }
    }
  }
  if (!any_derivative) error("no-derivative", "at least one term must have order > 0");
  if (!structural) return out;

  const double rho = grid.rho();
  const double alpha_max = problem.max_order();
  const int n = problem.initial_conditions();

  // (a)
  if (any_derivative && rho - alpha_max <= -n) {
    std::ostringstream os;
    os << "rho - max(alpha) = " << rho - alpha_max << " is not above the solution strip's lower bound -" << n;
    error("solution-strip", os.str());
  }

  // (b)
  for (const auto& term : problem.terms) {
    const double frac = term.order - std::floor(term.order);
    if (term.order > 0.0 && frac > 0.0 && rho >= frac) {
      std::ostringstream os;
      os << "rho = " << rho << " >= frac(alpha) = " << frac << " for alpha = " << term.order
         << "; boundary terms of the transformed derivative are not guaranteed to vanish";
      warn("boundary-term", os.str());
    }
  }

  // (c)
  if (!problem.forcing.identically_zero()) {
    try {
      const StripBounds strip = estimate_strip(problem.forcing, problem.forcing.t_max());
      if (!strip.contains(rho)) {
        std::ostringstream os;
        os << "rho = " << rho << " lies outside the forcing's fundamental strip (" << strip.lower << ", "
           << strip.upper << ")";
        error("forcing-strip", os.str());
      }
    } catch (const FitFailureError& e) {
      warn("strip-fit", std::string("forcing strip not estimated: ") + e.what());
    } catch (const StripViolationError& e) {
      error("forcing-strip", e.what());
    }
  }

  // Gamma poles: 1 - gamma and 1 - gamma + alpha for real gamma = rho (k = 0).
  auto is_pole = [](double x) { return x <= 0.0 && std::abs(x - std::round(x)) < 1e-12; };
  if (is_pole(1.0 - rho)) {
    error("gamma-pole", "1 - rho is a non-positive integer; C(gamma, alpha) is undefined at k = 0");
  }
  for (const auto& term : problem.terms) {
    if (term.order > 0.0 && is_pole(1.0 - rho + term.order)) {
      std::ostringstream os;
      os << "1 - rho + alpha is a non-positive integer for alpha = " << term.order;
      error("gamma-pole", os.str());
    }
  }

  if (grid.size() > 4001) warn("grid-size", "more than 4001 grid points; dense assembly will be slow");
  return out;
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

/// C(gamma, alpha) = Gamma(1 - gamma + alpha) / Gamma(1 - gamma); exactly 1
/// for alpha = 0.
inline complex coefficient_C(complex gamma, double alpha) {
  if (alpha == 0.0) return {1.0, 0.0};
  return log_gamma_ratio(1.0 - gamma + alpha, 1.0 - gamma);
}

/// The (2m+1) x (2m+1) system matrix; row s and column j map to indices
/// s + m and j + m.
inline ComplexMatrix assemble_matrix(const std::vector<FdeTerm>& terms, const MellinGrid& grid) {
  const int m = grid.m();
  const auto size = static_cast<Eigen::Index>(grid.size());
  const double b = grid.b();
  ComplexMatrix mat = ComplexMatrix::Zero(size, size);

  std::vector<complex> band(static_cast<std::size_t>(4 * m + 1));
  for (const auto& term : terms) {
    if (term.coefficient == 0.0) continue;
    for (int d = -2 * m; d <= 2 * m; ++d) {
      band[static_cast<std::size_t>(d + 2 * m)] = detail::shift_coefficient(d, term.order, b);
    }
    for (int s = -m; s <= m; ++s) {
      const complex c = term.coefficient * coefficient_C(grid.gamma(s), term.order);
      const auto row = static_cast<Eigen::Index>(s + m);
      for (int j = -m; j <= m; ++j) {
        mat(row, static_cast<Eigen::Index>(j + m)) += c * band[static_cast<std::size_t>(s - j + 2 * m)];
      }
    }
  }
  return mat;
}

struct LinearSystem {
  ComplexMatrix matrix;
  ComplexVector rhs;
};

/// Matrix plus the forcing spectrum on the grid.
inline LinearSystem assemble_system(const FdeProblem& problem, const MellinGrid& grid,
                                    const TransformOptions& opt = {}) {
  LinearSystem sys;
  sys.matrix = assemble_matrix(problem.terms, grid);
  sys.rhs = ComplexVector::Zero(static_cast<Eigen::Index>(grid.size()));
  if (!problem.forcing.identically_zero()) {
    const MellinSpectrum f = forward_transform(problem.forcing, problem.forcing.t_max(), grid, opt);
    for (int k = -grid.m(); k <= grid.m(); ++k) sys.rhs(k + grid.m()) = f[k];
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Dense solve
// ---------------------------------------------------------------------------

struct LinearSolution {
  ComplexVector x;
  double condition_estimate = 1.0;  // 1-norm estimate of cond(A)
  double residual_norm = 0.0;       // ||A x - b||_inf / ||b||_inf (0 when b = 0)
  bool ill_conditioned = false;     // condition estimate above 1e12
};

inline constexpr double ill_conditioning_threshold = 1e12;

/// LU with partial pivoting.  Throws SingularMatrixError for a singular
/// matrix; flags (but accepts) condition estimates above 1e12.
inline LinearSolution solve_linear(const ComplexMatrix& a, const ComplexVector& rhs) {
  if (a.rows() != a.cols() || a.rows() != rhs.size() || a.rows() == 0) {
    throw std::invalid_argument("solve_linear: need a nonempty square matrix and a matching right-hand side");
  }
  if (!a.allFinite() || !rhs.allFinite()) throw std::invalid_argument("solve_linear: non-finite input");

  const Eigen::PartialPivLU<ComplexMatrix> lu(a);
  const auto& lu_mat = lu.matrixLU();
  for (Eigen::Index i = 0; i < lu_mat.rows(); ++i) {
    if (lu_mat(i, i) == complex(0.0, 0.0)) throw SingularMatrixError("solve_linear: matrix is singular (zero pivot)");
  }
  const double rcond = lu.rcond();
  if (!(rcond > 0.0)) throw SingularMatrixError("solve_linear: matrix is numerically singular");

  LinearSolution out;
  out.x = lu.solve(rhs);
  out.condition_estimate = 1.0 / rcond;
  out.ill_conditioned = out.condition_estimate > ill_conditioning_threshold;
  const double scale = rhs.lpNorm<Eigen::Infinity>();
  out.residual_norm = scale > 0.0 ? (a * out.x - rhs).lpNorm<Eigen::Infinity>() / scale : (a * out.x).lpNorm<Eigen::Infinity>();
  return out;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

struct SolverReport {
  MellinSpectrum spectrum;
  MellinGrid grid;
  double condition_estimate = 1.0;
  double residual_norm = 0.0;
  double symmetry_defect = 0.0;  // before projection, relative to max |X|
  std::vector<Diagnostic> diagnostics;

  double operator()(double t) const { return inverse_reconstruct(spectrum, t); }
};

inline constexpr double residual_limit = 1e-8;
inline constexpr double symmetry_limit = 1e-8;

/// Solve the problem on `grid`.  Validation errors raise ValidationError;
/// warnings travel in the report.
inline SolverReport solve_fde(const FdeProblem& problem, const MellinGrid& grid) {
  std::vector<Diagnostic> diagnostics = validate_problem(problem, grid);
  if (has_errors(diagnostics)) throw ValidationError("solve_fde: invalid problem\n" + format_diagnostics(diagnostics));

  const LinearSystem sys = assemble_system(problem, grid);
  const LinearSolution sol = solve_linear(sys.matrix, sys.rhs);
  if (sol.ill_conditioned) {
    std::ostringstream os;
    os << "condition estimate " << sol.condition_estimate << " exceeds " << ill_conditioning_threshold;
    diagnostics.push_back({Severity::warning, "ill-conditioned", os.str()});
  }
  if (!(sol.residual_norm <= residual_limit)) {
    std::ostringstream os;
    os << "solve_fde: relative residual " << sol.residual_norm << " exceeds " << residual_limit;
    throw NonConvergenceError(os.str());
  }

  MellinSpectrum spectrum(grid, std::vector<complex>(sol.x.data(), sol.x.data() + sol.x.size()));
  const double scale = spectrum.max_abs();
  const double defect = scale > 0.0 ? spectrum.symmetry_defect() / scale : 0.0;
  if (!(defect <= symmetry_limit)) {
    std::ostringstream os;
    os << "solve_fde: solution spectrum is not conjugate symmetric (relative defect " << defect << ")";
    throw SymmetryViolationError(os.str());
  }
  spectrum.symmetrize();

  return SolverReport{std::move(spectrum), grid, sol.condition_estimate, sol.residual_norm, defect,
                      std::move(diagnostics)};
}

}  // namespace mellinfde
