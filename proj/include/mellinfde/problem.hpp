#pragma once

// Problem description: sum_i lambda_i D^{alpha_i} x = f(t), quiescent at t = 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mellinfde {

enum class ForcingKind { sine_pulse, step_pulse, monomial_pulse, sampled };

inline std::string_view to_string(ForcingKind k) {
  switch (k) {
    case ForcingKind::sine_pulse: return "sine-pulse";
    case ForcingKind::step_pulse: return "step-pulse";
    case ForcingKind::monomial_pulse: return "monomial-pulse";
    case ForcingKind::sampled: return "sampled";
  }
  return "?";
}

/// Causal forcing supported on [0, t_max]; exactly zero for t > t_max (and
/// for t < 0).
class Forcing {
 public:
  /// amplitude * sin t on [0, t_max]; t_max = 2 pi gives one full period.
  static Forcing sine_pulse(double t_max = 2.0 * std::numbers::pi, double amplitude = 1.0) {
    return Forcing(ForcingKind::sine_pulse, t_max, amplitude, 0.0, {}, {});
  }

  static Forcing step_pulse(double t_max, double amplitude = 1.0) {
    return Forcing(ForcingKind::step_pulse, t_max, amplitude, 0.0, {}, {});
  }

  /// amplitude * t^mu on [0, t_max], mu > -1.
  static Forcing monomial_pulse(double t_max, double mu, double amplitude = 1.0) {
    if (!(mu > -1.0) || !std::isfinite(mu)) throw std::invalid_argument("monomial pulse: mu must be > -1");
    return Forcing(ForcingKind::monomial_pulse, t_max, amplitude, mu, {}, {});
  }

  /// Piecewise-linear interpolant of (times, values); times strictly
  /// increasing from 0.  t_max is the last abscissa.
  static Forcing sampled(std::vector<double> times, std::vector<double> values) {
    if (times.size() < 2 || times.size() != values.size()) {
      throw std::invalid_argument("sampled forcing: need >= 2 samples and equally many times and values");
    }
    if (times.front() != 0.0) throw std::invalid_argument("sampled forcing: first sample must be at t = 0");
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1])) throw std::invalid_argument("sampled forcing: times must be strictly increasing");
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw std::invalid_argument("sampled forcing: values must be finite");
    }
    const double t_max = times.back();
    return Forcing(ForcingKind::sampled, t_max, 1.0, 0.0, std::move(times), std::move(values));
  }

  ForcingKind kind() const { return kind_; }
  double t_max() const { return t_max_; }
  double amplitude() const { return amplitude_; }
  double mu() const { return mu_; }
  std::span<const double> sample_times() const { return times_ ? std::span<const double>(*times_) : std::span<const double>(); }
  std::span<const double> sample_values() const { return values_ ? std::span<const double>(*values_) : std::span<const double>(); }

  double operator()(double t) const {
    if (!(t >= 0.0) || t > t_max_) return 0.0;
    switch (kind_) {
      case ForcingKind::sine_pulse: return amplitude_ * std::sin(t);
      case ForcingKind::step_pulse: return amplitude_;
      case ForcingKind::monomial_pulse:
        if (t == 0.0) return mu_ == 0.0 ? amplitude_ : (mu_ > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        return amplitude_ * std::pow(t, mu_);
      case ForcingKind::sampled: return interpolate(t);
    }
    return 0.0;
  }

  /// Same forcing multiplied by c.
  Forcing scaled(double c) const {
    Forcing out = *this;
    if (kind_ == ForcingKind::sampled) {
      auto v = std::make_shared<std::vector<double>>(*values_);
      for (double& x : *v) x *= c;
      out.values_ = std::move(v);
    } else {
      out.amplitude_ *= c;
    }
    return out;
  }

  bool identically_zero() const {
    if (kind_ == ForcingKind::sampled) {
      return std::all_of(values_->begin(), values_->end(), [](double v) { return v == 0.0; });
    }
    return amplitude_ == 0.0;
  }

 private:
  Forcing(ForcingKind kind, double t_max, double amplitude, double mu, std::vector<double> times,
          std::vector<double> values)
      : kind_(kind), t_max_(t_max), amplitude_(amplitude), mu_(mu) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("forcing: t_max must be finite and > 0");
    if (!std::isfinite(amplitude)) throw std::invalid_argument("forcing: amplitude must be finite");
    if (kind == ForcingKind::sampled) {
      times_ = std::make_shared<const std::vector<double>>(std::move(times));
      values_ = std::make_shared<const std::vector<double>>(std::move(values));
    }
  }

  double interpolate(double t) const {
    const auto& ts = *times_;
    const auto& vs = *values_;
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    if (it == ts.end()) return vs.back();
    const auto i = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return (1.0 - w) * vs[i - 1] + w * vs[i];
  }

  ForcingKind kind_;
  double t_max_;
  double amplitude_;
  double mu_;
  // Shared so that copies of large sampled forcings stay cheap.
  std::shared_ptr<const std::vector<double>> times_;
  std::shared_ptr<const std::vector<double>> values_;
};

struct FdeTerm {
  double coefficient = 1.0;  // lambda
  double order = 0.0;        // alpha >= 0; 0 is the undifferentiated term
};

struct FdeProblem {
  std::vector<FdeTerm> terms;
  Forcing forcing = Forcing::sine_pulse();

  double max_order() const {
    double a = 0.0;
    for (const auto& t : terms) a = std::max(a, t.order);
    return a;
  }

  /// Number of vanishing initial derivatives, ceil(max order).
  int initial_conditions() const { return static_cast<int>(std::ceil(max_order())); }
};

}  // namespace mellinfde
