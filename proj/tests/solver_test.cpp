#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mellinfde/oracle.hpp"
#include "mellinfde/solver.hpp"

using namespace mellinfde;

namespace {

bool has_code(const std::vector<Diagnostic>& ds, const std::string& code, Severity sev) {
  return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.code == code && d.severity == sev; });
}

FdeProblem single_term(double alpha, double lambda = 1.0, Forcing f = Forcing::sine_pulse()) {
  return {{{1.0, alpha}, {lambda, 0.0}}, std::move(f)};
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

// ---------------------------------------------------------------- C(gamma, alpha)

TEST(CoefficientC, Values) {
  EXPECT_EQ(coefficient_C({0.5, 3.0}, 0.0), complex(1.0, 0.0));
  const complex g(0.5, 10.0);
  EXPECT_LT(std::abs(coefficient_C(g, 1.0) - (1.0 - g)), 1e-13 * std::abs(1.0 - g));
  EXPECT_LT(std::abs(coefficient_C(g, 2.0) - (1.0 - g) * (2.0 - g)), 1e-13 * std::abs((1.0 - g) * (2.0 - g)));
  // Frozen 40-digit value.
  EXPECT_LT(std::abs(coefficient_C(g, 0.5) - complex(2.2638549432392345402, -2.2079313385998401916)), 1e-13);
}

// ----------------------------------------------------------------- validation

TEST(Validation, WellPosedProblems) {
  const MellinGrid g = MellinGrid::defaults();
  for (double alpha : {0.2, 0.5, 0.8, 1.2, 1.5, 1.8}) {
    EXPECT_FALSE(has_errors(validate_problem(single_term(alpha), g))) << alpha;
  }
  FdeProblem two{{{1.0, 0.5}, {1.0, 0.3}}, Forcing::sine_pulse()};
  EXPECT_FALSE(has_errors(validate_problem(two, g)));
}

TEST(Validation, StructuralErrors) {
  const MellinGrid g = MellinGrid::defaults();
  EXPECT_TRUE(has_code(validate_problem({{}, Forcing::sine_pulse()}, g), "no-terms", Severity::error));
  EXPECT_TRUE(has_code(validate_problem({{{1.0, -0.5}, {1.0, 0.0}}}, g), "negative-order", Severity::error));
  EXPECT_TRUE(has_code(validate_problem({{{1.0, 0.5}, {2.0, 0.5}}}, g), "duplicate-order", Severity::error));
  EXPECT_TRUE(has_code(validate_problem({{{1.0, 0.0}}}, g), "no-derivative", Severity::error));
  EXPECT_TRUE(has_code(validate_problem({{{std::nan(""), 0.5}}}, g), "non-finite", Severity::error));
  EXPECT_TRUE(has_code(validate_problem({{{1.0, 0.5}, {0.0, 0.0}}}, g), "zero-coefficient", Severity::warning));
}

TEST(Validation, SolutionStrip) {
  // rho - alpha <= -ceil(alpha)
  EXPECT_TRUE(has_code(validate_problem(single_term(0.5), MellinGrid(-0.6, 0.5, 20)), "solution-strip", Severity::error));
  EXPECT_FALSE(has_code(validate_problem(single_term(0.5), MellinGrid(-0.4, 0.5, 20)), "solution-strip", Severity::error));
  EXPECT_TRUE(has_code(validate_problem(single_term(1.8), MellinGrid(-0.3, 0.5, 20)), "solution-strip", Severity::error));
  EXPECT_FALSE(has_code(validate_problem(single_term(1.8), MellinGrid(0.5, 0.5, 20)), "solution-strip", Severity::error));
}

TEST(Validation, BoundaryTermWarning) {
  EXPECT_TRUE(has_code(validate_problem(single_term(0.5), MellinGrid(0.5, 0.5, 20)), "boundary-term", Severity::warning));
  EXPECT_FALSE(has_code(validate_problem(single_term(0.8), MellinGrid(0.5, 0.5, 20)), "boundary-term", Severity::warning));
  // Integer orders have no fractional boundary terms.
  EXPECT_FALSE(has_code(validate_problem(single_term(1.0), MellinGrid(0.5, 0.5, 20)), "boundary-term", Severity::warning));
}

TEST(Validation, ForcingStrip) {
  // t^{-1/2} pulse: strip (1/2, inf).
  const FdeProblem p = single_term(0.5, 1.0, Forcing::monomial_pulse(1.0, -0.5));
  EXPECT_TRUE(has_code(validate_problem(p, MellinGrid(0.3, 0.5, 20)), "forcing-strip", Severity::error));
  EXPECT_FALSE(has_code(validate_problem(p, MellinGrid(0.7, 0.5, 20)), "forcing-strip", Severity::error));
  // Zero forcing imposes nothing.
  const FdeProblem z = single_term(0.5, 1.0, Forcing::sine_pulse(2.0, 0.0));
  EXPECT_FALSE(has_errors(validate_problem(z, MellinGrid(0.3, 0.5, 20))));
}

TEST(Validation, GammaPoleAndGridSize) {
  EXPECT_TRUE(has_code(validate_problem(single_term(1.0), MellinGrid(1.0, 0.5, 20)), "gamma-pole", Severity::error));
  EXPECT_TRUE(has_code(validate_problem(single_term(0.5), MellinGrid(0.5, 0.1, 2001)), "grid-size", Severity::warning));
}

// ------------------------------------------------------------------- assembly

TEST(Assembly, OrderZeroIsScaledIdentity) {
  const MellinGrid g(0.5, 0.5, 15);
  const ComplexMatrix n = assemble_matrix({{3.0, 0.0}}, g);
  EXPECT_EQ(n, (3.0 * ComplexMatrix::Identity(31, 31)).eval());
}

TEST(Assembly, FrozenEntries) {
  // D^0.5 x + x on rho = 0.5, delta_eta = 0.5, m = 2; 40-digit values from
  // the defining integral of a_sj.
  const MellinGrid g(0.5, 0.5, 2);
  const ComplexMatrix n = assemble_matrix({{1.0, 0.5}, {1.0, 0.0}}, g);
  struct Entry {
    int s, j;
    complex want;
  };
  const Entry entries[] = {
      {0, 0, {3.0740048653435648406, 0.0}},
      {1, -1, {1.0015036020899553011, 0.68586821478157902399}},
      {-2, 2, {0.69878462639238003872, -0.55640736081179516368}},
      {2, 1, {-2.5815726071986428423, -0.34284146244091785112}},
      {-1, 0, {-1.8451895105257224637, 0.52805052112739088542}},
  };
  for (const auto& e : entries) {
    EXPECT_LT(std::abs(n(e.s + 2, e.j + 2) - e.want), 1e-12 * std::abs(e.want)) << e.s << "," << e.j;
  }
}

TEST(Assembly, SuperpositionOfTerms) {
  const MellinGrid g(0.5, 0.5, 30);
  const FdeTerm t1{1.0, 0.7};
  const FdeTerm t2{-2.5, 1.3};
  const FdeTerm t3{0.4, 0.0};
  const ComplexMatrix sum = assemble_matrix({t1}, g) + assemble_matrix({t2}, g) + assemble_matrix({t3}, g);
  EXPECT_LT(max_abs_diff(assemble_matrix({t1, t2, t3}, g), sum), 1e-13 * sum.cwiseAbs().maxCoeff());
}

TEST(Assembly, ConjugateSymmetricRows) {
  const MellinGrid g(0.5, 0.5, 40);
  const ComplexMatrix n = assemble_matrix({{1.0, 0.5}, {0.7, 0.3}, {1.0, 0.0}}, g);
  const int m = g.m();
  for (int s = -m; s <= m; ++s) {
    for (int j = -m; j <= m; ++j) ASSERT_EQ(n(s + m, j + m), std::conj(n(m - s, m - j))) << s << "," << j;
  }
}

TEST(Assembly, RightHandSideIsForcingSpectrum) {
  const MellinGrid g(0.5, 0.5, 10);
  const LinearSystem sys = assemble_system(single_term(0.5), g);
  const MellinSpectrum f = forward_transform(Forcing::sine_pulse(), 2.0 * std::numbers::pi, g);
  for (int k = -10; k <= 10; ++k) EXPECT_EQ(sys.rhs(k + 10), f[k]);
}

// ----------------------------------------------------------------- dense solve

TEST(SolveLinear, Identity) {
  const ComplexVector rhs = ComplexVector::LinSpaced(7, 1.0, 7.0);
  const LinearSolution sol = solve_linear(ComplexMatrix::Identity(7, 7), rhs);
  EXPECT_EQ(sol.x, rhs);
  EXPECT_DOUBLE_EQ(sol.condition_estimate, 1.0);
  EXPECT_FALSE(sol.ill_conditioned);
}

TEST(SolveLinear, SmallComplexSystem) {
  ComplexMatrix a(2, 2);
  a << 1.0, 1.0, 1.0, -1.0;
  ComplexVector rhs(2);
  rhs << complex(2.0, 1.0), complex(2.0, -1.0);
  const LinearSolution sol = solve_linear(a, rhs);
  EXPECT_LT(std::abs(sol.x(0) - 2.0), 1e-15);
  EXPECT_LT(std::abs(sol.x(1) - complex(0.0, 1.0)), 1e-15);
}

TEST(SolveLinear, RandomSystemResidual) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix a(101, 101);
  ComplexVector rhs(101);
  for (Eigen::Index i = 0; i < 101; ++i) {
    rhs(i) = {n(rng), n(rng)};
    for (Eigen::Index j = 0; j < 101; ++j) a(i, j) = {n(rng), n(rng)};
  }
  const LinearSolution sol = solve_linear(a, rhs);
  EXPECT_LE(sol.residual_norm, 1e-10);
  EXPECT_LE((a * sol.x - rhs).norm() / rhs.norm(), 1e-10);
}

TEST(SolveLinear, SingularAndIllConditioned) {
  ComplexMatrix singular = ComplexMatrix::Ones(3, 3);
  EXPECT_THROW(solve_linear(singular, ComplexVector::Ones(3)), SingularMatrixError);
  EXPECT_THROW(solve_linear(ComplexMatrix::Zero(2, 2), ComplexVector::Ones(2)), SingularMatrixError);

  ComplexMatrix near = ComplexMatrix::Identity(2, 2);
  near(1, 1) = 1e-14;
  const LinearSolution sol = solve_linear(near, ComplexVector::Ones(2));
  EXPECT_TRUE(sol.ill_conditioned);
  EXPECT_GT(sol.condition_estimate, ill_conditioning_threshold);

  EXPECT_THROW(solve_linear(ComplexMatrix::Identity(2, 2), ComplexVector::Ones(3)), std::invalid_argument);
}

// -------------------------------------------------------------------- driver

TEST(SolveFde, ZeroForcingGivesZero) {
  const SolverReport r = solve_fde(single_term(0.5, 1.0, Forcing::sine_pulse(2.0 * std::numbers::pi, 0.0)),
                                   MellinGrid(0.5, 0.5, 50));
  EXPECT_EQ(r.spectrum.max_abs(), 0.0);
  for (double t : {0.1, 1.0, 30.0}) EXPECT_EQ(r(t), 0.0);
}

TEST(SolveFde, LinearInForcing) {
  const MellinGrid g(0.5, 0.5, 100);
  const SolverReport a = solve_fde(single_term(0.8), g);
  const SolverReport b = solve_fde(single_term(0.8, 1.0, Forcing::sine_pulse(2.0 * std::numbers::pi, -3.0)), g);
  for (int k = -100; k <= 100; ++k) {
    EXPECT_LT(std::abs(b.spectrum[k] + 3.0 * a.spectrum[k]), 1e-12 * a.spectrum.max_abs()) << k;
  }
}

TEST(SolveFde, MatchesMittagLefflerOracle) {
  const MellinGrid g = MellinGrid::defaults();
  const FdeProblem p = single_term(0.5);
  const SolverReport r = solve_fde(p, g);
  EXPECT_LE(r.residual_norm, residual_limit);
  EXPECT_LE(r.symmetry_defect, symmetry_limit);
  EXPECT_TRUE(has_code(r.diagnostics, "boundary-term", Severity::warning));

  std::vector<double> ts;
  for (int i = 0; i <= 95; ++i) ts.push_back(0.5 + 0.1 * i);
  const TimeSeries want = ml_convolution_solution(0.5, 1.0, p.forcing, ts);
  double worst = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) worst = std::max(worst, std::abs(r(ts[i]) - want.values[i]));
  EXPECT_LE(worst, 2e-2);
  RecordProperty("max_abs_error", std::to_string(worst));
}

TEST(SolveFde, TailAtEdgeOfTrustedWindow) {
  // Near t = e^{b-1} the log-periodic alias starts to show, but the
  // reconstruction still follows the algebraic decay of the true solution.
  const MellinGrid g = MellinGrid::defaults();
  const FdeProblem p = single_term(0.5);
  const SolverReport r = solve_fde(p, g);
  const double t = g.trusted_window().second;
  const double want = ml_convolution_solution(0.5, 1.0, p.forcing, std::vector<double>{t}).values[0];
  const double got = r(t);
  EXPECT_GT(got * want, 0.0);
  EXPECT_LT(std::abs(got), 10.0 * std::abs(want));
  EXPECT_GT(std::abs(got), 0.1 * std::abs(want));
}

TEST(SolveFde, InvalidProblemThrows) {
  EXPECT_THROW(solve_fde(single_term(1.0), MellinGrid(1.0, 0.5, 20)), ValidationError);
  EXPECT_THROW(solve_fde({{{1.0, 0.0}}}, MellinGrid(0.5, 0.5, 20)), ValidationError);
}
