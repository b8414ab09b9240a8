#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mellinfde/mellin.hpp"
#include "mellinfde/quadrature.hpp"
#include "mellinfde/specfun.hpp"

using namespace mellinfde;

namespace {

constexpr double pi = std::numbers::pi;

// Round-trip tolerance on the default grid.  The discretised inverse is
// log-periodic, so it returns x(t) plus the aliases
// sum_{n>=1} exp(-2 b rho n) x(t exp(-2bn)); for e^{-t} on rho = 0.5,
// b = 2 pi that is 1.87e-3 everywhere in the window.
constexpr double round_trip_tolerance = 2e-3;

double sine_pulse(double t) { return t >= 0.0 && t <= 2.0 * pi ? std::sin(t) : 0.0; }
double decaying(double t) { return std::exp(-t); }

MellinSpectrum gamma_spectrum(const MellinGrid& g) {
  MellinSpectrum s(g);
  for (int k = -g.m(); k <= g.m(); ++k) s[k] = gamma_complex(g.gamma(k));
  return s;
}

MellinSpectrum random_spectrum(const MellinGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  MellinSpectrum s(g);
  s[0] = {n(rng), 0.0};
  for (int k = 1; k <= g.m(); ++k) {
    s[k] = complex(n(rng), n(rng)) / (1.0 + 0.05 * k);
    s[-k] = std::conj(s[k]);
  }
  return s;
}

}  // namespace

// ------------------------------------------------------------------ grid

TEST(MellinGrid, DerivedQuantities) {
  const MellinGrid g = MellinGrid::defaults();
  EXPECT_EQ(g.rho(), 0.5);
  EXPECT_EQ(g.delta_eta(), 0.5);
  EXPECT_EQ(g.m(), 400);
  EXPECT_EQ(g.eta_bar(), 200.0);
  EXPECT_EQ(g.size(), 801u);
  EXPECT_DOUBLE_EQ(g.b() * g.delta_eta(), pi);
  EXPECT_EQ(g.gamma(-3), complex(0.5, -1.5));
  EXPECT_THROW(g.gamma(401), std::out_of_range);
  EXPECT_EQ(g.shifted(0.3).rho(), 0.5 - 0.3);
  EXPECT_EQ(g.shifted(0.3).m(), 400);
}

TEST(MellinGrid, Validation) {
  EXPECT_THROW(MellinGrid(0.5, 0.0, 10), std::invalid_argument);
  EXPECT_THROW(MellinGrid(0.5, 0.5, 0), std::invalid_argument);
  EXPECT_THROW(MellinGrid::from_cutoff(0.5, 0.3, 200.0), std::invalid_argument);
  EXPECT_EQ(MellinGrid::from_cutoff(0.5, 0.25, 200.0).m(), 800);
}

TEST(MellinGrid, TrustedWindow) {
  const MellinGrid g = MellinGrid::defaults();
  const auto [lo, hi] = g.trusted_window();
  EXPECT_DOUBLE_EQ(lo, std::exp(-2.0 * pi + 1.0));
  EXPECT_DOUBLE_EQ(hi, std::exp(2.0 * pi - 1.0));
  EXPECT_TRUE(g.in_trusted_window(1.0));
  EXPECT_FALSE(g.in_trusted_window(300.0));
}

// ------------------------------------------------------- forward transform

TEST(ForwardTransform, UnitBoxAtGammaOne) {
  auto box = [](double t) { return t <= 1.0 ? 1.0 : 0.0; };
  EXPECT_NEAR(std::abs(mellin_transform(box, 1.0, complex(1.0, 0.0)) - 1.0), 0.0, 1e-12);
}

TEST(ForwardTransform, ExponentialGivesGamma) {
  const complex x = mellin_transform(decaying, 60.0, complex(0.5, 0.0));
  EXPECT_NEAR(x.real(), std::sqrt(pi), 1e-6);
  EXPECT_NEAR(x.imag(), 0.0, 1e-15);
  for (double eta : {1.0, 7.5, 40.0}) {
    const complex g(0.5, eta);
    EXPECT_LT(std::abs(mellin_transform(decaying, 60.0, g) - gamma_complex(g)), 1e-9) << eta;
  }
}

TEST(ForwardTransform, SinePulseFrozen) {
  // Term-wise integration of the Taylor series in 60-digit arithmetic.
  EXPECT_NEAR(mellin_transform(sine_pulse, 2.0 * pi, complex(0.5, 0.0)).real(), 0.86081544933803153468, 1e-9);
  const complex x = mellin_transform(sine_pulse, 2.0 * pi, complex(0.5, 10.0));
  EXPECT_LT(std::abs(x - complex(0.20502446640166989334, -0.0057287511426346157013)), 1e-9);
}

TEST(ForwardTransform, SpectrumIsConjugateSymmetric) {
  const MellinGrid g(0.5, 0.5, 60);
  const MellinSpectrum s = forward_transform(sine_pulse, 2.0 * pi, g);
  EXPECT_EQ(s.symmetry_defect(), 0.0);
  for (int k : {-60, -7, 0, 13, 60}) {
    EXPECT_LT(std::abs(s[k] - mellin_transform(sine_pulse, 2.0 * pi, g.gamma(k))), 1e-9) << k;
  }
}

TEST(ForwardTransform, Linearity) {
  const MellinGrid g(0.5, 0.5, 40);
  auto f = [](double t) { return sine_pulse(t) + 0.25 * (t <= 3.0 ? t * t : 0.0); };
  auto f_scaled = [&](double t) { return -3.5 * f(t); };
  const MellinSpectrum a = forward_transform(f, 2.0 * pi, g);
  const MellinSpectrum b = forward_transform(f_scaled, 2.0 * pi, g);
  for (int k = -40; k <= 40; ++k) EXPECT_LT(std::abs(b[k] + 3.5 * a[k]), 1e-13 * (1.0 + std::abs(b[k]))) << k;
}

TEST(ForwardTransform, StripViolation) {
  // t^{rho - 1} t^{-0.7} = t^{-1.2} is not integrable at 0.
  auto singular = [](double t) { return t > 0.0 && t <= 1.0 ? std::pow(t, -0.7) : 0.0; };
  EXPECT_THROW(mellin_transform(singular, 1.0, complex(0.5, 0.0)), StripViolationError);
  EXPECT_NO_THROW(mellin_transform(singular, 1.0, complex(0.9, 0.0)));
}

// ------------------------------------------------------------------ inverse

TEST(InverseReconstruct, ZeroSpectrum) {
  const MellinSpectrum s(MellinGrid(0.5, 0.5, 20));
  for (double t : {1e-3, 0.7, 42.0}) EXPECT_EQ(inverse_reconstruct(s, t), 0.0);
}

TEST(InverseReconstruct, SingleTerm) {
  const MellinGrid g(0.5, 0.5, 20);
  MellinSpectrum s(g);
  s[0] = 2.0 * pi / g.delta_eta();
  for (double t : {1e-3, 0.7, 1.0, 42.0}) EXPECT_NEAR(inverse_reconstruct(s, t), 1.0 / std::sqrt(t), 1e-14 / std::sqrt(t));
}

TEST(InverseReconstruct, RoundTripOfExponential) {
  const MellinGrid g = MellinGrid::defaults();
  const MellinSpectrum s = forward_transform(decaying, 60.0, g);
  const double q = std::exp(-2.0 * g.b() * g.rho());
  EXPECT_NEAR(inverse_reconstruct(s, 1.0), std::exp(-1.0), round_trip_tolerance);
  // The error is the alias sum, not noise.
  for (double t : {0.01, 1.0, 50.0}) {
    EXPECT_NEAR(inverse_reconstruct(s, t) - std::exp(-t), q / (1.0 - q), 1e-5) << t;
  }
}

TEST(InverseReconstruct, AsymmetricSpectrumIsRejected) {
  MellinSpectrum s(MellinGrid(0.5, 0.5, 5));
  s[2] = complex(1.0, 0.5);
  EXPECT_FALSE(s.is_conjugate_symmetric());
  EXPECT_THROW(inverse_reconstruct(s, 1.3), SymmetryViolationError);
  s[-2] = std::conj(s[2]);
  EXPECT_NO_THROW(inverse_reconstruct(s, 1.3));
}

TEST(InverseReconstruct, DiscreteSelfSimilarity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> log_t(-6.0, 6.0);
  std::uniform_real_distribution<double> rho(-0.8, 1.5);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const MellinGrid g(rho(rng), 0.5, 400);
    const MellinSpectrum s = random_spectrum(g, rng);
    const double period = std::exp(2.0 * g.b());
    const double damping = std::exp(-2.0 * g.b() * g.rho());
    for (int j = 0; j < 100; ++j) {
      const double t = std::exp(log_t(rng));
      const double base = inverse_reconstruct(s, t);
      const double far = inverse_reconstruct(s, t * period);
      double scale = 0.0;  // size of the sum without cancellation
      for (int k = -g.m(); k <= g.m(); ++k) scale += std::abs(s[k]);
      scale *= damping * std::pow(t, -g.rho()) * g.delta_eta() / (2.0 * pi);
      worst = std::max(worst, std::abs(far - damping * base) / scale);
    }
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(InverseReconstruct, RhoIndependence) {
  const MellinGrid g1(0.5, 0.5, 400);
  const MellinGrid g2(1.0, 0.5, 400);
  const MellinSpectrum a = forward_transform(decaying, 60.0, g1);
  const MellinSpectrum b = forward_transform(decaying, 60.0, g2);
  const auto [lo, hi] = g1.trusted_window();
  for (int i = 0; i <= 60; ++i) {
    const double t = lo * std::pow(hi / lo, i / 60.0);
    EXPECT_NEAR(inverse_reconstruct(a, t), inverse_reconstruct(b, t), round_trip_tolerance) << t;
  }
}

// -------------------------------------------------------------- shift matrix

TEST(ShiftMatrix, ZeroOrderIsScaledIdentity) {
  const MellinGrid g(0.5, 0.5, 6);
  for (int s = -6; s <= 6; ++s) {
    for (int k = -6; k <= 6; ++k) {
      EXPECT_EQ(shift_matrix_entry(s, k, 0.0, g), complex(s == k ? 2.0 * g.b() : 0.0, 0.0));
    }
  }
}

TEST(ShiftMatrix, Diagonal) {
  const MellinGrid g(0.5, 0.5, 6);
  const double b = g.b();
  for (double alpha : {1e-12, 0.3, 1.0, 1.8}) {
    const complex a = shift_matrix_entry(2, 2, alpha, g);
    EXPECT_NEAR(a.real(), 2.0 * b * std::sinh(b * alpha) / (b * alpha), 1e-13 * std::abs(a)) << alpha;
    EXPECT_EQ(a.imag(), 0.0);
  }
}

TEST(ShiftMatrix, FrozenQuadratureValue) {
  const MellinGrid g(0.5, 0.5, 10);  // b = 2 pi
  const complex a = shift_matrix_entry(3, 0, 0.5, g);
  EXPECT_LT(std::abs(a - complex(-4.6194957429030993512, -13.858487228709298054)), 1e-12);
}

TEST(ShiftMatrix, ClosedFormMatchesDefiningIntegral) {
  const MellinGrid g(0.5, 0.5, 40);
  const double b = g.b();
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> idx(-40, 40);
  std::uniform_real_distribution<double> order(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const int s = idx(rng);
    const int k = idx(rng);
    const double alpha = order(rng);
    const complex rate(alpha, -pi * (s - k) / b);
    auto integrand = [&](double xi) { return std::exp(-rate * xi); };
    const auto q = quad::integrate(integrand, -b, b, {1e-12, 1e-12, 4000});
    const complex a = shift_matrix_entry(s, k, alpha, g);
    EXPECT_LT(std::abs(a - q.value), 1e-10 * std::max(1.0, std::abs(q.value))) << s << " " << k << " " << alpha;
  }
}

TEST(ShiftMatrix, Conjugation) {
  const MellinGrid g(0.5, 0.5, 30);
  for (double alpha : {0.2, 0.5, 1.3}) {
    for (int s = -30; s <= 30; s += 7) {
      for (int k = -30; k <= 30; k += 5) {
        EXPECT_EQ(shift_matrix_entry(s, k, alpha, g), std::conj(shift_matrix_entry(k, s, alpha, g)));
      }
    }
  }
}

// ------------------------------------------------------------ shift spectrum

TEST(ShiftSpectrum, ZeroShiftIsIdentity) {
  std::mt19937_64 rng(7);
  const MellinSpectrum s = random_spectrum(MellinGrid(0.5, 0.5, 50), rng);
  const MellinSpectrum out = shift_spectrum(s, 0.0);
  EXPECT_EQ(out.grid(), s.grid());
  for (int k = -50; k <= 50; ++k) EXPECT_EQ(out[k], s[k]);
}

TEST(ShiftSpectrum, GammaSpectrumAtKZero) {
  // X = Gamma(gamma) on rho = 1 shifted by 1/2.  The shift only sees the
  // function on [e^{-b}, e^{b}], so at k = 0 it misses
  // int_0^{e^{-b}} t^{-1/2} e^{-t} dt ~ 2 e^{-b/2} = 0.086 on the default grid.
  const MellinGrid g(1.0, 0.5, 400);
  const MellinSpectrum out = shift_spectrum(gamma_spectrum(g), 0.5);
  EXPECT_DOUBLE_EQ(out.grid().rho(), 0.5);
  const double missing = 2.0 * std::exp(-g.b() / 2.0);
  EXPECT_NEAR(std::sqrt(pi) - out[0].real(), missing, 1e-3);

  // Halving the step doubles b and shrinks the window defect accordingly.
  const MellinGrid fine(1.0, 0.25, 800);
  EXPECT_NEAR(shift_spectrum(gamma_spectrum(fine), 0.5)[0].real(), std::sqrt(pi), 1e-2);
}

TEST(ShiftSpectrum, MatchesForwardTransformOnShiftedLine) {
  auto f = [](double t) { return t * std::exp(-t); };
  const MellinGrid g(1.5, 0.5, 400);
  const MellinSpectrum shifted = shift_spectrum(forward_transform(f, 60.0, g), 1.0);
  const MellinSpectrum direct = forward_transform(f, 60.0, g.shifted(1.0));
  // Window defect e^{-1.5 b} / 1.5 = 5.4e-5 at k = 0, smaller elsewhere.
  for (int k = -400; k <= 400; ++k) EXPECT_LT(std::abs(shifted[k] - direct[k]), 6e-5) << k;
}

TEST(ShiftSpectrum, ReconstructionConsistency) {
  const MellinGrid g(1.0, 0.5, 400);
  const MellinSpectrum s = gamma_spectrum(g);
  const MellinSpectrum out = shift_spectrum(s, 0.5);
  const auto [lo, hi] = g.trusted_window();
  for (int i = 0; i <= 200; ++i) {
    const double t = lo * std::pow(hi / lo, i / 200.0);
    EXPECT_NEAR(inverse_reconstruct(out, t), inverse_reconstruct(s, t), round_trip_tolerance) << t;
  }
}

// --------------------------------------------------------------- strip fit

TEST(EstimateStrip, PowerLaws) {
  auto square = [](double t) { return t >= 0.0 && t <= 1.0 ? t * t : 0.0; };
  const StripBounds a = estimate_strip(square, 1.0);
  EXPECT_NEAR(a.lower, -2.0, 1e-9);
  EXPECT_TRUE(std::isinf(a.upper));

  EXPECT_NEAR(estimate_strip(sine_pulse, 2.0 * pi).lower, -1.0, 1e-6);

  auto frac = [](double t) { return t >= 0.0 && t <= 50.0 ? std::pow(t, 0.3) * std::exp(-t) : 0.0; };
  EXPECT_NEAR(estimate_strip(frac, 50.0).lower, -0.3, 0.02);
}

TEST(EstimateStrip, Failures) {
  auto wild = [](double t) { return t > 0.0 && t <= 1.0 ? t * std::sin(1.0 / t) : 0.0; };
  EXPECT_THROW(estimate_strip(wild, 1.0), FitFailureError);
  auto unbounded_support = [](double t) { return std::exp(-t); };
  EXPECT_THROW(estimate_strip(unbounded_support, 10.0), StripViolationError);
}

TEST(EstimateStrip, ContainsRho) {
  auto square = [](double t) { return t >= 0.0 && t <= 1.0 ? t * t : 0.0; };
  const StripBounds s = estimate_strip(square, 1.0);
  EXPECT_TRUE(s.contains(0.5));
  EXPECT_TRUE(s.contains(-1.5));
  EXPECT_FALSE(s.contains(-2.5));
}
