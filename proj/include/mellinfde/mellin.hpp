#pragma once

// Mellin-domain machinery.
//
// A function x(t) on t > 0 is represented by samples of its Mellin transform
// X(gamma) = int_0^inf t^{gamma-1} x(t) dt on the vertical line
// gamma_k = rho + i k d_eta, k = -m..m.  The truncated inverse
//
//     x(t) ~ (d_eta / 2 pi) sum_k X(gamma_k) t^{-gamma_k}
//
// is a Fourier series in log t with half-period b = pi / d_eta, so it is only
// faithful on a window around t = 1; outside it repeats with amplitude factor
// exp(-2 b rho) per period exp(2 b).
//
// X on the line rho - alpha follows from X on rho by a least-squares fit of
// the two reconstructions over log t in [-b, b]:
//
//     X(gamma_s - alpha) = (1 / 2b) sum_k a_sk(alpha) X(gamma_k),
//     a_sk(alpha) = int_{-b}^{b} exp(-(alpha - i pi (s - k) / b) xi) dxi.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mellinfde/errors.hpp"
#include "mellinfde/quadrature.hpp"
#include "mellinfde/specfun.hpp"

namespace mellinfde {

class MellinGrid {
 public:
  MellinGrid(double rho, double delta_eta, int m) : rho_(rho), delta_eta_(delta_eta), m_(m) {
    if (!std::isfinite(rho)) throw std::invalid_argument("MellinGrid: rho must be finite");
    if (!(delta_eta > 0.0) || !std::isfinite(delta_eta)) {
      throw std::invalid_argument("MellinGrid: delta_eta must be finite and > 0");
    }
    if (m < 1) throw std::invalid_argument("MellinGrid: cutoff index m must be >= 1");
  }

  /// Grid from the cutoff eta_bar = m * delta_eta; eta_bar must be an integer
  /// multiple of delta_eta.
  static MellinGrid from_cutoff(double rho, double delta_eta, double eta_bar) {
    if (!(delta_eta > 0.0)) throw std::invalid_argument("MellinGrid: delta_eta must be > 0");
    const double ratio = eta_bar / delta_eta;
    const double m = std::round(ratio);
    if (!(m >= 1.0) || std::abs(ratio - m) > 1e-9 * std::max(1.0, m)) {
      std::ostringstream os;
      os << "MellinGrid: eta_bar (" << eta_bar << ") is not a positive integer multiple of delta_eta (" << delta_eta
         << ")";
      throw std::invalid_argument(os.str());
    }
    return {rho, delta_eta, static_cast<int>(m)};
  }

  /// Defaults: rho = 0.5, delta_eta = 0.5, eta_bar = 200 (m = 400).
  static MellinGrid defaults() { return {0.5, 0.5, 400}; }

  double rho() const { return rho_; }
  double delta_eta() const { return delta_eta_; }
  int m() const { return m_; }
  double eta_bar() const { return m_ * delta_eta_; }
  double b() const { return std::numbers::pi / delta_eta_; }
  std::size_t size() const { return static_cast<std::size_t>(2 * m_ + 1); }

  complex gamma(int k) const {
    check_index(k);
    return {rho_, k * delta_eta_};
  }

  std::size_t index(int k) const {
    check_index(k);
    return static_cast<std::size_t>(k + m_);
  }

  /// Same sampling on the line rho - alpha.
  MellinGrid shifted(double alpha) const { return {rho_ - alpha, delta_eta_, m_}; }

  /// [exp(-b + 1), exp(b - 1)]: where reconstructions are trusted.
  std::pair<double, double> trusted_window() const { return {std::exp(-b() + 1.0), std::exp(b() - 1.0)}; }

  bool in_trusted_window(double t) const {
    const auto [lo, hi] = trusted_window();
    return t >= lo && t <= hi;
  }

  friend bool operator==(const MellinGrid&, const MellinGrid&) = default;

 private:
  void check_index(int k) const {
    if (k < -m_ || k > m_) throw std::out_of_range("MellinGrid: index outside [-m, m]");
  }

  double rho_;
  double delta_eta_;
  int m_;
};

/// Samples X(gamma_k), k = -m..m, on a MellinGrid.
class MellinSpectrum {
 public:
  explicit MellinSpectrum(MellinGrid grid) : grid_(grid), values_(grid.size()) {}

  MellinSpectrum(MellinGrid grid, std::vector<complex> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw std::invalid_argument("MellinSpectrum: need exactly 2m+1 values");
    }
  }

  const MellinGrid& grid() const { return grid_; }
  std::span<const complex> values() const { return values_; }
  std::span<complex> values() { return values_; }

  const complex& operator[](int k) const { return values_[grid_.index(k)]; }
  complex& operator[](int k) { return values_[grid_.index(k)]; }

  /// max_k |X_k - conj(X_{-k})|; zero for the spectrum of a real signal.
  double symmetry_defect() const {
    double d = 0.0;
    for (int k = 1; k <= grid_.m(); ++k) d = std::max(d, std::abs((*this)[k] - std::conj((*this)[-k])));
    return std::max(d, std::abs((*this)[0].imag()));
  }

  double max_abs() const {
    double v = 0.0;
    for (const auto& x : values_) v = std::max(v, std::abs(x));
    return v;
  }

  /// Whether the spectrum describes a real signal, within 1e-9 (1 + max|X|).
  bool is_conjugate_symmetric(double tol = 1e-9) const { return symmetry_defect() <= tol * (1.0 + max_abs()); }

  /// Project onto the conjugate-symmetric subspace.
  void symmetrize() {
    for (int k = 1; k <= grid_.m(); ++k) {
      const complex avg = 0.5 * ((*this)[k] + std::conj((*this)[-k]));
      (*this)[k] = avg;
      (*this)[-k] = std::conj(avg);
    }
    (*this)[0] = {(*this)[0].real(), 0.0};
  }

 private:
  MellinGrid grid_;
  std::vector<complex> values_;
};

/// Fundamental strip lower < Re gamma < upper (infinities allowed).
struct StripBounds {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool contains(double rho) const { return rho > lower && rho < upper; }
};

// ---------------------------------------------------------------------------
// Forward transform
// ---------------------------------------------------------------------------

struct TransformOptions {
  /// Quadrature target relative to int e^{rho u} |f(e^u)| du, which makes the
  /// transform exactly homogeneous in f.
  double rel_tol = 1e-12;
  /// Never looser than this absolute target.
  double abs_tol = 1e-9;
};

namespace detail {

// Lower cut-off u_lo (u = ln t) below which the Mellin integrand on Re gamma =
// rho carries less than a tiny fraction of the tolerance; also returns the
// total mass int e^{rho u}|f(e^u)| du over [u_lo, u_hi].
template <class F>
std::pair<double, double> mellin_lower_cutoff(const F& f, double rho, double u_hi, const TransformOptions& opt) {
  auto density = [&](double u) { return std::exp(rho * u) * std::abs(static_cast<double>(f(std::exp(u)))); };
  const quad::Tolerance tol{0.0, 1e-6, 2000};

  double mass = 0.0;
  double previous = -1.0;
  int non_decreasing = 0;
  double u = u_hi;
  for (int block = 0;; ++block) {
    const double block_mass = quad::integrate(density, u - 1.0, u, tol).value;
    mass += block_mass;
    u -= 1.0;

    const double target = 1e-3 * std::min(opt.abs_tol, opt.rel_tol * mass);
    if (block_mass == 0.0 && previous == 0.0) return {u, mass};  // vanishes near 0
    if (previous > 0.0) {
      const double q = block_mass / previous;
      if (q < 1.0) {
        non_decreasing = 0;
        if (block_mass * q / (1.0 - q) <= target) return {u, mass};
      } else if (block >= 10 && ++non_decreasing >= 5) {
        std::ostringstream os;
        os << "forward_transform: t^(rho-1) f(t) is not integrable at t -> 0 for rho = " << rho;
        throw StripViolationError(os.str());
      }
    }
    previous = block_mass;
    if (u < -700.0) {
      std::ostringstream os;
      os << "forward_transform: integrand decays too slowly at t -> 0 for rho = " << rho
         << " (is rho inside the fundamental strip?)";
      throw StripViolationError(os.str());
    }
  }
}

template <class F>
complex mellin_integral(const F& f, complex gamma, double u_lo, double u_hi, double abs_target) {
  // One panel per oscillation of t^{i eta}.
  const double eta = std::abs(gamma.imag());
  const double width = eta > 2.0 * std::numbers::pi ? 2.0 * std::numbers::pi / eta : 1.0;
  const auto panels = static_cast<std::size_t>(std::ceil((u_hi - u_lo) / width));
  std::vector<double> breaks(panels + 1);
  for (std::size_t i = 0; i <= panels; ++i) breaks[i] = u_hi - (u_hi - u_lo) * static_cast<double>(panels - i) / panels;

  auto integrand = [&](double u) -> complex {
    const double fu = f(std::exp(u));
    if (fu == 0.0) return {0.0, 0.0};
    return std::exp(gamma * u) * fu;
  };
  const quad::Tolerance tol{abs_target, 0.0, 8 * panels + 4000};
  return quad::integrate(integrand, std::span<const double>(breaks), tol).value;
}

}  // namespace detail

/// X(gamma) = int_0^{t_max} t^{gamma-1} f(t) dt for one complex gamma, with f
/// identically zero beyond t_max.  Integrates in u = ln t, which removes the
/// algebraic singularity of t^{gamma-1} at the origin.
template <class F>
complex mellin_transform(const F& f, double t_max, complex gamma, const TransformOptions& opt = {}) {
  if (!(t_max > 0.0)) throw std::invalid_argument("mellin_transform: t_max must be > 0");
  const double u_hi = std::log(t_max);
  const auto [u_lo, mass] = detail::mellin_lower_cutoff(f, gamma.real(), u_hi, opt);
  if (mass == 0.0) return {0.0, 0.0};
  return detail::mellin_integral(f, gamma, u_lo, u_hi, std::min(opt.abs_tol, opt.rel_tol * mass));
}

/// Spectrum of a real causal f on every node of `grid`.  Only k >= 0 is
/// integrated; negative k are filled by conjugation, so the result is exactly
/// conjugate symmetric.
template <class F>
MellinSpectrum forward_transform(const F& f, double t_max, const MellinGrid& grid, const TransformOptions& opt = {}) {
  if (!(t_max > 0.0)) throw std::invalid_argument("forward_transform: t_max must be > 0");
  MellinSpectrum out(grid);
  const double u_hi = std::log(t_max);
  const auto [u_lo, mass] = detail::mellin_lower_cutoff(f, grid.rho(), u_hi, opt);
  if (mass == 0.0) return out;
  const double target = std::min(opt.abs_tol, opt.rel_tol * mass);
  for (int k = 0; k <= grid.m(); ++k) {
    const complex x = detail::mellin_integral(f, grid.gamma(k), u_lo, u_hi, target);
    out[k] = k == 0 ? complex(x.real(), 0.0) : x;
    if (k > 0) out[-k] = std::conj(x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inverse
// ---------------------------------------------------------------------------

namespace detail {

struct ReconstructionSum {
  double real = 0.0;
  double imag = 0.0;
};

// (d_eta / 2 pi) sum_k X_k t^{-gamma_k}, phases in extended precision so the
// t -> t exp(2b) periodicity survives rounding.
inline ReconstructionSum reconstruct_sum(const MellinSpectrum& spectrum, double t) {
  using ldouble = long double;
  const MellinGrid& g = spectrum.grid();
  const ldouble log_t = std::log(static_cast<ldouble>(t));
  const ldouble two_pi = 2.0L * pi_l;
  const ldouble theta = static_cast<ldouble>(g.delta_eta()) * log_t;
  ldouble re = 0.0L;
  ldouble im = 0.0L;
  for (int k = -g.m(); k <= g.m(); ++k) {
    if (spectrum[k] == complex(0.0, 0.0)) continue;
    ldouble phase = -static_cast<ldouble>(k) * theta;
    phase -= two_pi * std::round(phase / two_pi);
    const ldouble c = std::cos(phase);
    const ldouble s = std::sin(phase);
    const ldouble xr = spectrum[k].real();
    const ldouble xi = spectrum[k].imag();
    re += xr * c - xi * s;
    im += xr * s + xi * c;
  }
  const ldouble scale = static_cast<ldouble>(g.delta_eta()) / two_pi * std::exp(-static_cast<ldouble>(g.rho()) * log_t);
  return {static_cast<double>(re * scale), static_cast<double>(im * scale)};
}

}  // namespace detail

/// x(t) from its sampled spectrum.  The spectrum must describe a real signal:
/// an imaginary residual above 1e-9 (1 + |x|) raises SymmetryViolationError.
inline double inverse_reconstruct(const MellinSpectrum& spectrum, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("inverse_reconstruct: t must be finite and > 0");
  const auto sum = detail::reconstruct_sum(spectrum, t);
  if (std::abs(sum.imag) > 1e-9 * (1.0 + std::abs(sum.real))) {
    std::ostringstream os;
    os << "inverse_reconstruct: imaginary residual " << sum.imag << " at t = " << t
       << " (spectrum is not conjugate symmetric)";
    throw SymmetryViolationError(os.str());
  }
  return sum.real;
}

inline std::vector<double> inverse_reconstruct(const MellinSpectrum& spectrum, std::span<const double> times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(inverse_reconstruct(spectrum, t));
  return out;
}

// ---------------------------------------------------------------------------
// Shift between lines
// ---------------------------------------------------------------------------

namespace detail {

// a_sk(alpha) / (2b), evaluated as (-1)^d sinh(b alpha) / (b alpha - i pi d)
// with d = s - k, written out in real arithmetic so that swapping s and k
// conjugates the result exactly.
inline complex shift_coefficient(int d, double alpha, double b) {
  const double ba = b * alpha;
  if (d == 0) {
    if (ba == 0.0) return {1.0, 0.0};
    return {std::abs(ba) < 1e-8 ? 1.0 + ba * ba / 6.0 : std::sinh(ba) / ba, 0.0};
  }
  if (alpha == 0.0) return {0.0, 0.0};
  const double sign = (d % 2 == 0) ? 1.0 : -1.0;
  const double pd = std::numbers::pi * d;
  const double num = sign * std::sinh(ba) / (ba * ba + pd * pd);
  return {num * ba, num * pd};
}

}  // namespace detail

/// a_sk(alpha) = 2b sin((s-k) pi + i b alpha) / ((s-k) pi + i b alpha).
inline complex shift_matrix_entry(int s, int k, double alpha, const MellinGrid& grid) {
  (void)grid.index(s);
  (void)grid.index(k);
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("shift_matrix_entry: alpha must be >= 0");
  return 2.0 * grid.b() * detail::shift_coefficient(s - k, alpha, grid.b());
}

/// Spectrum on the line rho - alpha from the spectrum on rho.
inline MellinSpectrum shift_spectrum(const MellinSpectrum& spectrum, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("shift_spectrum: alpha must be >= 0");
  const MellinGrid& g = spectrum.grid();
  if (alpha == 0.0) return spectrum;

  const int m = g.m();
  const double b = g.b();
  // Coefficients depend on s - k only.
  std::vector<complex> coeff(static_cast<std::size_t>(4 * m + 1));
  for (int d = -2 * m; d <= 2 * m; ++d) coeff[static_cast<std::size_t>(d + 2 * m)] = detail::shift_coefficient(d, alpha, b);

  MellinSpectrum out(g.shifted(alpha));
  for (int s = -m; s <= m; ++s) {
    complex acc(0.0, 0.0);
    for (int k = -m; k <= m; ++k) acc += coeff[static_cast<std::size_t>(s - k + 2 * m)] * spectrum[k];
    out[s] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Strip estimation
// ---------------------------------------------------------------------------

/// Fundamental strip of a causal function that vanishes beyond t_max.  The
/// lower bound -p comes from a least-squares fit of log|f| against log t on a
/// geometric ladder in [1e-6, 1e-3] (scaled by t_max when t_max < 1).
template <class F>
StripBounds estimate_strip(const F& f, double t_max) {
  if (!(t_max > 0.0)) throw std::invalid_argument("estimate_strip: t_max must be > 0");
  StripBounds out;

  for (double factor : {1.25, 1.5, 2.0, 4.0}) {
    if (f(t_max * factor) != 0.0) {
      throw StripViolationError("estimate_strip: function does not vanish beyond t_max; finite upper strip bounds are not supported");
    }
  }

  constexpr int n = 16;
  const double scale = std::min(1.0, t_max);
  std::vector<double> xs;
  std::vector<double> ys;
  int positive = 0;
  int negative = 0;
  int zeros = 0;
  for (int i = 0; i < n; ++i) {
    const double t = scale * 1e-6 * std::pow(1e3, static_cast<double>(i) / (n - 1));
    const double v = f(t);
    if (!std::isfinite(v)) throw FitFailureError("estimate_strip: non-finite value near t = 0");
    if (v == 0.0) {
      ++zeros;
      continue;
    }
    (v > 0.0 ? positive : negative)++;
    xs.push_back(std::log(t));
    ys.push_back(std::log(std::abs(v)));
  }
  if (zeros == n) return out;  // identically zero near the origin: no lower constraint
  if (zeros > 0 || (positive > 0 && negative > 0)) {
    throw FitFailureError("estimate_strip: function changes sign or vanishes intermittently near t = 0");
  }

  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double p = sxy / sxx;
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max(worst, std::abs(ys[i] - (my + p * (xs[i] - mx))));
  if (worst > 0.1) throw FitFailureError("estimate_strip: function is not power-like near t = 0");
  out.lower = -p;
  return out;
}

}  // namespace mellinfde
