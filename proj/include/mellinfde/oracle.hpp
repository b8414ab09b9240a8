#pragma once

// Reference solutions that share nothing with the Mellin solver: closed-form
// Mittag-Leffler convolutions evaluated by quadrature, a Grunwald-Letnikov
// time stepper (no special functions at all), and Riemann-Liouville / Caputo
// operators by quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mellinfde/errors.hpp"
#include "mellinfde/problem.hpp"
#include "mellinfde/quadrature.hpp"
#include "mellinfde/specfun.hpp"

namespace mellinfde {

/// Samples (t_i, x_i) with strictly increasing t_i > 0.
struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;

  TimeSeries() = default;
  TimeSeries(std::vector<double> t, std::vector<double> v) : times(std::move(t)), values(std::move(v)) { validate(); }

  void validate() const {
    if (times.size() != values.size()) throw std::invalid_argument("TimeSeries: times and values differ in length");
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!(times[i] > 0.0)) throw std::invalid_argument("TimeSeries: times must be > 0");
      if (i > 0 && !(times[i] > times[i - 1])) throw std::invalid_argument("TimeSeries: times must be strictly increasing");
    }
  }

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }

  /// Linear interpolation; throws outside [times.front(), times.back()].
  double interpolate(double t) const {
    if (times.empty() || t < times.front() || t > times.back()) {
      throw std::out_of_range("TimeSeries::interpolate: t outside the sampled range");
    }
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    const auto i = static_cast<std::size_t>(it - times.begin());
    if (times[i] == t) return values[i];
    const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
    return (1.0 - w) * values[i - 1] + w * values[i];
  }
};

namespace detail {

inline void require_times(std::span<const double> times, const char* where) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1]))) {
      throw std::invalid_argument(std::string(where) + ": times must be positive and strictly increasing");
    }
  }
}

inline constexpr quad::Tolerance oracle_tolerance{1e-10, 1e-10, 20000};

// int_0^t s^{a-1} K(s) f(t - s) ds for a kernel K smooth at 0.  For a < 1 the
// weak singularity is removed by v = s^a; either way the integration range
// stops where the causal forcing switches off (s = t - t_max) and a
// breakpoint is placed there.
template <class Kernel>
double power_kernel_convolution(double a, const Kernel& kernel, const Forcing& f, double t) {
  const double s_hi = t;
  const double s_lo = std::max(0.0, t - f.t_max());
  if (a < 1.0) {
    const double inv_a = 1.0 / a;
    auto integrand = [&](double v) {
      const double s = std::pow(v, inv_a);
      return kernel(s) * f(t - s);
    };
    return quad::integrate(integrand, std::pow(s_lo, a), std::pow(s_hi, a), oracle_tolerance).value / a;
  }
  auto integrand = [&](double s) { return std::pow(s, a - 1.0) * kernel(s) * f(t - s); };
  return quad::integrate(integrand, s_lo, s_hi, oracle_tolerance).value;
}

}  // namespace detail

/// Solution of D^alpha x + lambda x = f with zero initial data:
/// x(t) = int_0^t s^{alpha-1} E_{alpha,alpha}(-lambda s^alpha) f(t - s) ds.
inline TimeSeries ml_convolution_solution(double alpha, double lambda, const Forcing& forcing,
                                          std::span<const double> times) {
  if (!(alpha > 0.0)) throw std::invalid_argument("ml_convolution_solution: alpha must be > 0");
  detail::require_times(times, "ml_convolution_solution");
  auto kernel = [&](double s) { return mittag_leffler(alpha, alpha, -lambda * std::pow(s, alpha)); };
  std::vector<double> values;
  values.reserve(times.size());
  for (double t : times) values.push_back(detail::power_kernel_convolution(alpha, kernel, forcing, t));
  return {std::vector<double>(times.begin(), times.end()), std::move(values)};
}

/// Solution of D^alpha x + lambda D^beta x = f, alpha > beta >= 0:
/// x(t) = int_0^t s^{alpha-1} E_{alpha-beta,alpha}(-lambda s^{alpha-beta}) f(t - s) ds.
inline TimeSeries ml_two_term_solution(double alpha, double beta, double lambda, const Forcing& forcing,
                                       std::span<const double> times) {
  if (!(beta >= 0.0) || !(alpha > beta)) {
    throw std::invalid_argument("ml_two_term_solution: require alpha > beta >= 0");
  }
  detail::require_times(times, "ml_two_term_solution");
  const double d = alpha - beta;
  auto kernel = [&](double s) { return mittag_leffler(d, alpha, -lambda * std::pow(s, d)); };
  std::vector<double> values;
  values.reserve(times.size());
  for (double t : times) values.push_back(detail::power_kernel_convolution(alpha, kernel, forcing, t));
  return {std::vector<double>(times.begin(), times.end()), std::move(values)};
}

/// Grunwald-Letnikov weights w_j of order alpha: w_0 = 1,
/// w_j = w_{j-1} (j - 1 - alpha) / j.
inline std::vector<double> gl_weights(double alpha, std::size_t count) {
  std::vector<double> w(count);
  if (count == 0) return w;
  w[0] = 1.0;
  for (std::size_t j = 1; j < count; ++j) w[j] = w[j - 1] * (static_cast<double>(j) - 1.0 - alpha) / static_cast<double>(j);
  return w;
}

/// First-order Grunwald-Letnikov scheme for sum_i lambda_i D^{alpha_i} x = f,
/// x quiescent before t = 0.  Samples at t_n = n h, n = 1..round(t_end / h).
/// O(N^2) in the number of steps.
inline TimeSeries gl_stepper(const FdeProblem& problem, double h, double t_end) {
  if (!(h > 0.0) || !std::isfinite(h) || !(t_end > 0.0) || !std::isfinite(t_end)) {
    throw StepSizeError("gl_stepper: step and end time must be finite and > 0");
  }
  if (problem.terms.empty()) throw std::invalid_argument("gl_stepper: problem has no terms");
  const double steps_real = std::round(t_end / h);
  if (steps_real < 1.0 || steps_real > 5e7) {
    std::ostringstream os;
    os << "gl_stepper: " << steps_real << " steps for h = " << h << ", t_end = " << t_end;
    throw StepSizeError(os.str());
  }
  const auto n_steps = static_cast<std::size_t>(steps_real);

  // Combined weights W_j = sum_i lambda_i h^{-alpha_i} w_j^{(i)}.
  std::vector<double> weight(n_steps + 1, 0.0);
  for (const auto& term : problem.terms) {
    if (!(term.order >= 0.0)) throw std::invalid_argument("gl_stepper: orders must be >= 0");
    const double scale = term.coefficient * std::pow(h, -term.order);
    const std::vector<double> w = gl_weights(term.order, n_steps + 1);
    for (std::size_t j = 0; j <= n_steps; ++j) weight[j] += scale * w[j];
  }
  const double lead = weight[0];
  if (!std::isfinite(lead) || std::abs(lead) < 1e-290) {
    std::ostringstream os;
    os << "gl_stepper: leading coefficient sum_i lambda_i h^-alpha_i = " << lead << " is unusable at h = " << h;
    throw StepSizeError(os.str());
  }

  // x[0] = 0 (quiescent); history stored in time order.
  std::vector<double> x(n_steps + 1, 0.0);
  std::vector<double> times(n_steps);
  for (std::size_t n = 1; n <= n_steps; ++n) {
    const double t = static_cast<double>(n) * h;
    // sum_{j=1}^{n} W_j x_{n-j}; four partial sums for throughput.
    std::array<double, 4> acc{};
    std::size_t j = 1;
    for (; j + 3 <= n; j += 4) {
      acc[0] += weight[j] * x[n - j];
      acc[1] += weight[j + 1] * x[n - j - 1];
      acc[2] += weight[j + 2] * x[n - j - 2];
      acc[3] += weight[j + 3] * x[n - j - 3];
    }
    for (; j <= n; ++j) acc[0] += weight[j] * x[n - j];
    const double history = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    x[n] = (problem.forcing(t) - history) / lead;
    times[n - 1] = t;
  }
  return {std::move(times), std::vector<double>(x.begin() + 1, x.end())};
}

/// Riemann-Liouville integral (1 / Gamma(alpha)) int_0^t (t - xi)^{alpha-1} f(xi) dxi.
/// For alpha < 1 the kernel singularity is removed with u = (t - xi)^alpha.
template <class F>
double rl_integral(const F& f, double alpha, double t) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("rl_integral: alpha must be > 0");
  if (!(t > 0.0)) throw std::invalid_argument("rl_integral: t must be > 0");
  constexpr quad::Tolerance tol{1e-12, 1e-12, 20000};
  if (alpha < 1.0) {
    const double inv_a = 1.0 / alpha;
    auto integrand = [&](double u) { return static_cast<double>(f(std::max(0.0, t - std::pow(u, inv_a)))); };
    return quad::integrate(integrand, 0.0, std::pow(t, alpha), tol).value * rgamma(alpha + 1.0);
  }
  auto integrand = [&](double xi) { return std::pow(t - xi, alpha - 1.0) * static_cast<double>(f(xi)); };
  return quad::integrate(integrand, 0.0, t, tol).value * rgamma(alpha);
}

/// Caputo derivative I^{n - alpha} f^{(n)}, n = floor(alpha) + 1; integer
/// orders return f^{(alpha)}(t).  `f(k, t)` must return the k-th derivative.
template <class F>
double caputo_derivative(const F& f, double alpha, double t) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("caputo_derivative: alpha must be >= 0");
  if (alpha == std::floor(alpha)) return f(static_cast<int>(alpha), t);
  const int n = static_cast<int>(std::floor(alpha)) + 1;
  return rl_integral([&](double x) { return f(n, x); }, n - alpha, t);
}

}  // namespace mellinfde
