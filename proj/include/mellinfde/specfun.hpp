#pragma once

// Special functions: Gamma of complex argument and the two-parameter
// Mittag-Leffler function E_{a,b}(z) = sum_k z^k / Gamma(a k + b).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "mellinfde/errors.hpp"

namespace mellinfde {

using complex = std::complex<double>;

namespace detail {

using ldouble = long double;
using lcomplex = std::complex<long double>;

inline constexpr ldouble pi_l = 3.141592653589793238462643383279502884L;
inline constexpr ldouble half_log_two_pi_l = 0.918938533204672741780329736405617639L;

inline bool is_nonpositive_integer(complex z) {
  constexpr double tol = 8.0 * std::numeric_limits<double>::epsilon();
  const double nearest = std::round(z.real());
  if (nearest > 0.0) return false;
  return std::abs(z.imag()) <= tol * std::max(1.0, std::abs(z)) &&
         std::abs(z.real() - nearest) <= tol * std::max(1.0, std::abs(nearest));
}

inline void require_not_pole(complex z, const char* where) {
  if (is_nonpositive_integer(z)) {
    std::ostringstream os;
    os << where << ": Gamma has a pole at z = " << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
    throw PoleError(os.str());
  }
}

// Stirling series, valid for |z| >= 15 with Re z > 0.  Coefficients are
// B_{2k} / (2k (2k-1)).
inline lcomplex log_gamma_stirling(lcomplex z) {
  static constexpr ldouble c[] = {
      1.0L / 12.0L,        -1.0L / 360.0L,       1.0L / 1260.0L,        -1.0L / 1680.0L,
      1.0L / 1188.0L,      -691.0L / 360360.0L,  1.0L / 156.0L,         -3617.0L / 122400.0L,
      43867.0L / 244188.0L, -174611.0L / 125400.0L};
  const lcomplex inv = 1.0L / z;
  const lcomplex inv2 = inv * inv;
  lcomplex series = c[9];
  for (int k = 8; k >= 0; --k) series = series * inv2 + c[k];
  series *= inv;
  return (z - 0.5L) * std::log(z) - z + half_log_two_pi_l + series;
}

// log(sin(pi z)) for Im z >= 0, free of overflow at large Im z.  Only the
// exponential of the result is meaningful (branch is not normalised).
inline lcomplex log_sin_pi(lcomplex z) {
  // sin(pi z) has period 2 in Re z; reduce to keep the phase exact.
  const ldouble shift = 2.0L * std::round(z.real() / 2.0L);
  z = lcomplex(z.real() - shift, z.imag());
  const lcomplex i(0.0L, 1.0L);
  if (z.imag() < 8.0L) return std::log(std::sin(pi_l * z));
  // sin(pi z) = e^{-i pi z} (e^{2 i pi z} - 1) / (2i), |e^{2 i pi z}| < 1.
  const lcomplex w = std::exp(2.0L * i * pi_l * z);
  return -i * pi_l * z + std::log((w - 1.0L) / (2.0L * i));
}

inline lcomplex log_gamma_upper(lcomplex z) {
  // Im z >= 0 assumed by callers.
  if (z.real() < 0.5L) {
    // Reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z).
    return std::log(pi_l) - log_sin_pi(z) - log_gamma_upper(1.0L - z);
  }
  if (std::abs(z) >= 15.0L) return log_gamma_stirling(z);
  lcomplex product(1.0L, 0.0L);
  while (std::abs(z) < 15.0L) {
    product *= z;
    z += 1.0L;
  }
  return log_gamma_stirling(z) - std::log(product);
}

// Extended-precision log Gamma; conjugation symmetric by construction.
inline lcomplex log_gamma_l(complex z) {
  const lcomplex zl(z.real(), z.imag());
  if (z.imag() < 0.0) return std::conj(log_gamma_upper(std::conj(zl)));
  return log_gamma_upper(zl);
}

inline complex exp_to_double(lcomplex w) {
  // Reduce the phase in extended precision before rounding to double.
  constexpr ldouble two_pi = 2.0L * pi_l;
  const ldouble phase = w.imag() - two_pi * std::round(w.imag() / two_pi);
  const lcomplex e = std::exp(lcomplex(w.real(), phase));
  return {static_cast<double>(e.real()), static_cast<double>(e.imag())};
}

}  // namespace detail

/// log Gamma(z) for complex z.  exp(log_gamma(z)) == Gamma(z); the imaginary
/// part is not normalised to the principal branch.
inline complex log_gamma(complex z) {
  detail::require_not_pole(z, "log_gamma");
  const auto w = detail::log_gamma_l(z);
  return {static_cast<double>(w.real()), static_cast<double>(w.imag())};
}

/// Gamma(z) for complex z.  Underflows to zero / overflows to infinity where
/// the value is not representable in double.
inline complex gamma_complex(complex z) {
  detail::require_not_pole(z, "gamma_complex");
  return detail::exp_to_double(detail::log_gamma_l(z));
}

/// Gamma(num) / Gamma(den) through the difference of log-Gamma values, so
/// that the ratio stays finite when the two factors do not.
inline complex log_gamma_ratio(complex num, complex den) {
  detail::require_not_pole(num, "log_gamma_ratio (numerator)");
  detail::require_not_pole(den, "log_gamma_ratio (denominator)");
  if (num == den) return {1.0, 0.0};
  return detail::exp_to_double(detail::log_gamma_l(num) - detail::log_gamma_l(den));
}

/// 1 / Gamma(x) for real x, zero at the poles.
inline double rgamma(double x) {
  if (x <= 0.0 && x == std::round(x)) return 0.0;
  if (x > 171.0) return std::exp(-std::lgamma(x));
  return 1.0 / std::tgamma(x);
}

// ---------------------------------------------------------------------------
// Mittag-Leffler
// ---------------------------------------------------------------------------

/// Below this modulus E_{a,b}(z) is summed as a power series; above it the
/// function is obtained by numerical Laplace inversion on an optimal
/// parabolic contour (Garrappa's algorithm), plus pole residues.
inline constexpr double mittag_leffler_series_radius = 0.5;

namespace detail {

inline complex mittag_leffler_series(double alpha, double beta, complex z) {
  complex sum = rgamma(beta);
  complex power(1.0, 0.0);
  for (int k = 1; k < 2000; ++k) {
    power *= z;
    const complex term = power * rgamma(alpha * k + beta);
    sum += term;
    // Terms decay at least geometrically (|z| <= 1/2) once a k + b > 2.
    if (alpha * k + beta > 2.0 && std::abs(term) <= 1e-18 * std::max(std::abs(sum), 1e-300)) return sum;
    if (std::abs(power) < 1e-300) return sum;
  }
  throw NonConvergenceError("mittag_leffler: power series did not converge");
}

struct ContourParams {
  double mu = 0.0;
  double h = 0.0;
  double n = std::numeric_limits<double>::infinity();
};

// Optimal parabolic contour for a region bounded by two singularities.
inline ContourParams contour_bounded(double t, double phi_j, double phi_j1, double pj, double qj,
                                     double log_epsilon) {
  const double log_eps = std::log(std::numeric_limits<double>::epsilon());
  const double fac = 1.01;
  const double f_max = std::exp(log_epsilon - log_eps);

  const double sq_phi_j = std::sqrt(phi_j);
  const double threshold = 2.0 * std::sqrt((log_epsilon - log_eps) / t);
  const double sq_phi_j1 = std::min(std::sqrt(phi_j1), threshold - sq_phi_j);

  double sq_bar_j = 0.0;
  double sq_bar_j1 = 0.0;
  double f_bar = 1.0;
  bool admissible = false;

  if (pj < 1e-14 && qj < 1e-14) {
    sq_bar_j = sq_phi_j;
    sq_bar_j1 = sq_phi_j1;
    admissible = true;
  } else if (pj < 1e-14) {
    sq_bar_j = sq_phi_j;
    const double f_min = sq_phi_j > 0.0 ? fac * std::pow(sq_phi_j / (sq_phi_j1 - sq_phi_j), qj) : fac;
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fq = std::pow(f_bar, -1.0 / qj);
      sq_bar_j1 = (2.0 * sq_phi_j1 - fq * sq_phi_j) / (2.0 + fq);
      admissible = true;
    }
  } else if (qj < 1e-14) {
    sq_bar_j1 = sq_phi_j1;
    const double f_min = fac * std::pow(sq_phi_j1 / (sq_phi_j1 - sq_phi_j), pj);
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / pj);
      sq_bar_j = (2.0 * sq_phi_j + fp * sq_phi_j1) / (2.0 - fp);
      admissible = true;
    }
  } else {
    double f_min = fac * (sq_phi_j + sq_phi_j1) / std::pow(sq_phi_j1 - sq_phi_j, std::max(pj, qj));
    if (f_min < f_max) {
      f_min = std::max(f_min, 1.5);
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / pj);
      const double fq = std::pow(f_bar, -1.0 / qj);
      const double w = -phi_j1 * t / log_epsilon;
      const double den = 2.0 + w - (1.0 + w) * fp + fq;
      sq_bar_j = ((2.0 + w + fq) * sq_phi_j + fp * sq_phi_j1) / den;
      sq_bar_j1 = (-(1.0 + w) * fq * sq_phi_j + (2.0 + w - (1.0 + w) * fp) * sq_phi_j1) / den;
      admissible = true;
    }
  }
  if (!admissible) return {};

  const double log_eps_adj = log_epsilon - std::log(f_bar);
  const double w = -sq_bar_j1 * sq_bar_j1 * t / log_eps_adj;
  ContourParams out;
  out.mu = std::pow(((1.0 + w) * sq_bar_j + sq_bar_j1) / (2.0 + w), 2);
  out.h = -2.0 * std::numbers::pi / log_eps_adj * (sq_bar_j1 - sq_bar_j) / ((1.0 + w) * sq_bar_j + sq_bar_j1);
  out.n = std::ceil(std::sqrt(1.0 - log_eps_adj / t / out.mu) / out.h);
  return out;
}

// Optimal parabolic contour for the unbounded right-most region.
inline ContourParams contour_unbounded(double t, double phi_j, double pj, double log_epsilon) {
  const double sq_phi_j = std::sqrt(phi_j);
  double phibar = phi_j > 0.0 ? phi_j * 1.01 : 0.01;
  double sq_phibar = std::sqrt(phibar);

  const double f_min = 1.0;
  const double f_max = 10.0;
  const double f_tar = 5.0;

  double n = 0.0;
  double a = 0.0;
  double sq_mu = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double phi_t = phibar * t;
    const double log_eps_phi_t = log_epsilon / phi_t;
    n = std::ceil(phi_t / std::numbers::pi * (1.0 - 1.5 * log_eps_phi_t + std::sqrt(1.0 - 2.0 * log_eps_phi_t)));
    a = std::numbers::pi * n / phi_t;
    sq_mu = sq_phibar * std::abs(4.0 - a) / std::abs(7.0 - std::sqrt(1.0 + 12.0 * a));
    const double fbar = std::pow((sq_phibar - sq_phi_j) / sq_mu, -pj);
    if (pj < 1e-14 || (f_min < fbar && fbar < f_max)) break;
    sq_phibar = std::pow(f_tar, -1.0 / pj) * sq_mu + sq_phi_j;
    phibar = sq_phibar * sq_phibar;
  }

  ContourParams out;
  out.mu = sq_mu * sq_mu;
  out.h = (-3.0 * a - 2.0 + 2.0 * std::sqrt(1.0 + 12.0 * a)) / (4.0 - a) / n;
  out.n = n;

  // Keep round-off under control for large mu.
  const double log_eps = std::log(std::numeric_limits<double>::epsilon());
  const double threshold = (log_epsilon - log_eps) / t;
  if (out.mu > threshold) {
    const double q = std::abs(pj) < 1e-14 ? 0.0 : std::pow(f_tar, -1.0 / pj) * std::sqrt(out.mu);
    phibar = std::pow(q + sq_phi_j, 2);
    if (phibar < threshold) {
      const double w = std::sqrt(log_eps / (log_eps - log_epsilon));
      const double u = std::sqrt(-phibar * t / log_eps);
      out.mu = threshold;
      out.n = std::ceil(w * log_epsilon / 2.0 / std::numbers::pi / (u * w - 1.0));
      out.h = std::sqrt(log_eps / (log_eps - log_epsilon)) / out.n;
    } else {
      out.n = std::numeric_limits<double>::infinity();
      out.h = 0.0;
    }
  }
  return out;
}

// z^a with exact repeated multiplication for small integer a, so that
// rational transforms (integer alpha and beta) cancel exactly below.
inline complex real_power(complex z, double a) {
  if (a == std::round(a) && std::abs(a) <= 64.0) {
    auto n = static_cast<int>(std::abs(a));
    complex result(1.0, 0.0);
    complex base = z;
    while (n > 0) {
      if (n & 1) result *= base;
      base *= base;
      n >>= 1;
    }
    return a < 0.0 ? 1.0 / result : result;
  }
  return std::pow(z, a);
}

inline complex mittag_leffler_laplace(double alpha, double beta, complex z) {
  constexpr double pi = std::numbers::pi;
  constexpr double t = 1.0;
  const double log_eps_machine = std::log(std::numeric_limits<double>::epsilon());
  const double log_epsilon_target = std::log(1e-15);
  const double log_epsilon_limit = std::log(1e-9);

  // Poles of s^{a-b} / (s^a - z) on the principal sheet.
  const double theta = std::arg(z);
  const int kmin = static_cast<int>(std::ceil(-alpha / 2.0 - theta / (2.0 * pi)));
  const int kmax = static_cast<int>(std::floor(alpha / 2.0 - theta / (2.0 * pi)));
  struct Singularity {
    complex s;
    double phi;
  };
  std::vector<Singularity> poles;
  // Poles on or next to the negative real axis do not constrain the contour.
  // Their contribution is exponentially small, so the contour sum would only
  // see it below round-off; their principal parts are subtracted from the
  // integrand and added back analytically instead.  That is only legitimate
  // off the branch cut, or when the transform has no cut at all.
  std::vector<complex> subtracted;
  const bool cut_free = alpha == std::round(alpha) && alpha - beta == std::round(alpha - beta);
  const double radius = std::pow(std::abs(z), 1.0 / alpha);
  for (int k = kmin; k <= kmax; ++k) {
    const double angle = (theta + 2.0 * pi * k) / alpha;
    complex s = std::polar(radius, angle);
    if (std::abs(s.imag()) <= 1e-14 * radius) s = {s.real(), 0.0};
    if (alpha == 1.0) s = z;
    const double phi = 0.5 * (s.real() + std::abs(s));
    if (phi > 1e-15) {
      poles.push_back({s, phi});
    } else if (cut_free || std::abs(angle) < pi * (1.0 - 1e-12)) {
      const bool duplicate = std::any_of(subtracted.begin(), subtracted.end(),
                                         [&](complex o) { return std::abs(o - s) <= 1e-12 * radius; });
      if (!duplicate) subtracted.push_back(s);
    }
  }
  std::stable_sort(poles.begin(), poles.end(), [](const auto& x, const auto& y) { return x.phi < y.phi; });

  // Singularities ordered by phi, the branch point at the origin first.
  std::vector<Singularity> sing;
  sing.push_back({complex(0.0, 0.0), 0.0});
  sing.insert(sing.end(), poles.begin(), poles.end());
  const std::size_t j1_count = sing.size();
  const std::size_t j_count = j1_count - 1;

  std::vector<double> p(j1_count, 1.0);
  std::vector<double> q(j1_count, 1.0);
  p[0] = std::max(0.0, -2.0 * (alpha - beta + 1.0));
  q[j_count] = std::numeric_limits<double>::infinity();
  std::vector<double> phi(j1_count + 1);
  for (std::size_t j = 0; j < j1_count; ++j) phi[j] = sing[j].phi;
  phi[j1_count] = std::numeric_limits<double>::infinity();

  double log_epsilon = log_epsilon_target;
  for (;;) {
    std::vector<std::size_t> admissible;
    for (std::size_t j = 0; j < j1_count; ++j) {
      if (phi[j] < (log_epsilon - log_eps_machine) / t && phi[j] < phi[j + 1]) admissible.push_back(j);
    }
    ContourParams best;
    std::size_t best_region = 0;
    for (std::size_t j : admissible) {
      const ContourParams cp = j + 1 < j1_count
                                   ? contour_bounded(t, phi[j], phi[j + 1], p[j], q[j], log_epsilon)
                                   : contour_unbounded(t, phi[j], p[j], log_epsilon);
      if (cp.n < best.n) {
        best = cp;
        best_region = j;
      }
    }
    if (!(best.n > 200.0)) {
      const auto n = static_cast<long>(best.n);
      // Every pole's principal part is integrated analytically: those left of
      // the contour contribute their residue through the closed contour, those
      // to the right through the deformation.
      std::vector<complex> removed = subtracted;
      for (std::size_t j = 1; j < j1_count; ++j) removed.push_back(sing[j].s);
      std::vector<complex> weight;
      for (const complex& s : removed) weight.push_back(real_power(s, 1.0 - beta) / alpha);

      complex integral(0.0, 0.0);
      for (long k = -n; k <= n; ++k) {
        const double u = best.h * static_cast<double>(k);
        const complex zk = best.mu * std::pow(complex(1.0, u), 2);  // mu (1 + i u)^2
        const complex zd(-2.0 * best.mu * u, 2.0 * best.mu);
        complex g = real_power(zk, alpha - beta) / (real_power(zk, alpha) - z);
        for (std::size_t j = 0; j < removed.size(); ++j) g -= weight[j] / (zk - removed[j]);
        const complex f = g * zd;
        integral += std::exp(zk * t) * f;
      }
      integral *= best.h / (2.0 * pi * complex(0.0, 1.0));

      complex residues(0.0, 0.0);
      for (std::size_t j = 0; j < removed.size(); ++j) residues += weight[j] * std::exp(t * removed[j]);
      complex e = integral + residues;
      if (z.imag() == 0.0) e = complex(e.real(), 0.0);
      return e;
    }
    log_epsilon += std::log(10.0);
    if (log_epsilon > log_epsilon_limit) {
      std::ostringstream os;
      os << "mittag_leffler: contour inversion cannot certify 1e-9 for alpha=" << alpha << " beta=" << beta
         << " z=" << z;
      throw NonConvergenceError(os.str());
    }
  }
}

}  // namespace detail

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) (standard
/// convention, Gamma(alpha k + beta) in the denominator).
///
/// |z| <= mittag_leffler_series_radius: truncated power series.
/// Otherwise: inverse Laplace transform of s^{alpha-beta} / (s^alpha - z) at
/// t = 1 along an optimal parabolic contour, plus residues of the poles lying
/// to its right.
inline complex mittag_leffler(double alpha, double beta, complex z) {
  if (!(alpha > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw std::invalid_argument("mittag_leffler: require finite alpha > 0 and finite beta");
  }
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw std::invalid_argument("mittag_leffler: argument must be finite");
  }
  if (std::abs(z) <= mittag_leffler_series_radius) return detail::mittag_leffler_series(alpha, beta, z);
  return detail::mittag_leffler_laplace(alpha, beta, z);
}

inline double mittag_leffler(double alpha, double beta, double x) {
  return mittag_leffler(alpha, beta, complex(x, 0.0)).real();
}

}  // namespace mellinfde
