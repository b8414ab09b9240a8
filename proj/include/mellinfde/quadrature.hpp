#pragma once

// Globally adaptive Gauss-Kronrod (G10/K21) quadrature.
//
// Works for real and complex integrands alike: the value type is whatever the
// integrand returns.  Alongside the integral every segment also carries the
// Kronrod estimate of the integral of |f|, which callers use to build
// scale-invariant tolerances.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <sstream>
#include <type_traits>
#include <utility>
#include <vector>

#include "mellinfde/errors.hpp"

namespace mellinfde::quad {

namespace detail {

// QUADPACK qk21 abscissae and weights.
inline constexpr std::array<double, 11> kronrod_nodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};

inline constexpr std::array<double, 11> kronrod_weights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208067311595, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights belong to the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> gauss_weights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651146};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

}  // namespace detail

template <class Value>
struct Segment {
  double a = 0.0;
  double b = 0.0;
  Value value{};
  double error = 0.0;
  double abs_value = 0.0;  // Kronrod estimate of the integral of |f|
};

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
template <class F>
auto gauss_kronrod21(const F& f, double a, double b) {
  using Value = std::decay_t<decltype(f(a))>;
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<Value, 21> fx{};
  const Value fc = f(center);
  Value kronrod = fc * detail::kronrod_weights[10];
  Value gauss{};
  double abs_sum = detail::magnitude(fc) * detail::kronrod_weights[10];
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * detail::kronrod_nodes[j];
    const Value f1 = f(center - dx);
    const Value f2 = f(center + dx);
    fx[2 * j] = f1;
    fx[2 * j + 1] = f2;
    kronrod += (f1 + f2) * detail::kronrod_weights[j];
    abs_sum += (detail::magnitude(f1) + detail::magnitude(f2)) * detail::kronrod_weights[j];
    if (j % 2 == 1) gauss += (f1 + f2) * detail::gauss_weights[j / 2];
  }

  // Spread of f about its mean, used to temper the raw |K - G| estimate.
  const Value mean = kronrod * 0.5;
  double asc = detail::kronrod_weights[10] * detail::magnitude(fc - mean);
  for (std::size_t j = 0; j < 10; ++j) {
    asc += detail::kronrod_weights[j] *
           (detail::magnitude(fx[2 * j] - mean) + detail::magnitude(fx[2 * j + 1] - mean));
  }

  Segment<Value> seg;
  seg.a = a;
  seg.b = b;
  seg.value = kronrod * half;
  seg.abs_value = abs_sum * std::abs(half);
  asc *= std::abs(half);
  double err = detail::magnitude((kronrod - gauss) * half);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  constexpr double eps = 2.220446049250313e-16;
  if (seg.abs_value > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * seg.abs_value, err);
  }
  seg.error = err;
  return seg;
}

struct Tolerance {
  double abs = 1e-10;
  double rel = 1e-10;
  std::size_t max_segments = 4000;
};

template <class Value>
struct Result {
  Value value{};
  double error = 0.0;
  double abs_value = 0.0;
  std::size_t segments = 0;
};

/// Integrate f over the partition given by `breakpoints` (sorted, at least two
/// entries), refining the segment with the largest error estimate until the
/// total estimate drops below max(tol.abs, tol.rel * |I|).
template <class F>
auto integrate(const F& f, std::span<const double> breakpoints, const Tolerance& tol = {}) {
  using Seg = decltype(gauss_kronrod21(f, 0.0, 1.0));
  using Value = decltype(Seg{}.value);
  if (breakpoints.size() < 2) throw std::invalid_argument("integrate: need at least two breakpoints");

  auto worse = [](const Seg& x, const Seg& y) { return x.error < y.error; };
  std::priority_queue<Seg, std::vector<Seg>, decltype(worse)> heap(worse);

  Value total{};
  double total_err = 0.0;
  double total_abs = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (breakpoints[i] == breakpoints[i + 1]) continue;
    Seg s = gauss_kronrod21(f, breakpoints[i], breakpoints[i + 1]);
    total += s.value;
    total_err += s.error;
    total_abs += s.abs_value;
    heap.push(std::move(s));
  }

  auto target = [&] { return std::max(tol.abs, tol.rel * detail::magnitude(total)); };
  while (!heap.empty() && total_err > target()) {
    if (heap.size() >= tol.max_segments) {
      std::ostringstream os;
      os << "adaptive quadrature did not converge: error estimate " << total_err
         << " exceeds target " << target() << " after " << heap.size() << " segments";
      throw NonConvergenceError(os.str());
    }
    Seg worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw NonConvergenceError("adaptive quadrature: segment cannot be bisected further");
    }
    Seg left = gauss_kronrod21(f, worst.a, mid);
    Seg right = gauss_kronrod21(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    total_abs += left.abs_value + right.abs_value - worst.abs_value;
    heap.push(std::move(left));
    heap.push(std::move(right));
  }

  // Re-sum from the final partition to shed accumulated update rounding.
  Result<Value> out;
  out.segments = heap.size();
  while (!heap.empty()) {
    const Seg& s = heap.top();
    out.value += s.value;
    out.error += s.error;
    out.abs_value += s.abs_value;
    heap.pop();
  }
  return out;
}

template <class F>
auto integrate(const F& f, double a, double b, const Tolerance& tol = {}) {
  const std::array<double, 2> ends{a, b};
  return integrate(f, std::span<const double>(ends), tol);
}

}  // namespace mellinfde::quad
