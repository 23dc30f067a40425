#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mpmi/errors.hpp"
#include "mpmi/experiments.hpp"
#include "mpmi/mpmi_solver.hpp"
#include "test_support.hpp"

namespace {

using namespace mpmi;
using mpmi::testing::bisect;
using mpmi::testing::dense_pinv;
using mpmi::testing::random_gaussian;
using mpmi::testing::random_rank;

constexpr double kRootRho2H1 = 1.0534596701881086;
constexpr double kInteriorRoot = 0.61540086901647177;

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double x : values) v[i++] = x;
  return v;
}

// x_k(h) = 1 + h / rho_k^2 up to h = rho_k^2, zero beyond.
class LinearFamily final : public FilterFamily {
public:
  explicit LinearFamily(Vector sigma) : sigma_(std::move(sigma)) {}
  std::size_t size() const noexcept override { return static_cast<std::size_t>(sigma_.size()); }
  double breakpoint(std::size_t k) const override { return rho2(k); }
  double bound(std::size_t) const override { return 2.0; }
  double slope(std::size_t k) const override { return 1.0 / rho2(k); }
  double excess(std::size_t k, double h) const override { return std::min(h, rho2(k)) / rho2(k); }

private:
  double rho2(std::size_t k) const {
    const double r = sigma_[static_cast<Eigen::Index>(k)];
    return r * r;
  }
  Vector sigma_;
};

TEST(MpmiX, Examples) {
  EXPECT_EQ(mpmi_x(1.0, 0.0), 1.0);
  EXPECT_EQ(mpmi_x(1.0, 27.0 / 16.0), 1.5);
  EXPECT_EQ(mpmi_x(1.0, 1.7), 0.0);
  const double oracle = bisect(1.0, 1.5, [](double x) { return x * x * x * x - x * x * x - 1.0 / 16; });
  EXPECT_NEAR(oracle, kRootRho2H1, 1e-15);
  EXPECT_NEAR(mpmi_x(2.0, 1.0), kRootRho2H1, 1e-15);
}

TEST(MpmiX, LinearGrowthNearZero) {
  for (const double rho : {0.5, 1.0, 3.0}) {
    const double s = 1e-5;
    const double excess = mpmi_x(rho, s * std::pow(rho, 4)) - 1.0;
    EXPECT_NEAR(excess, s - 3 * s * s, 1e-8 * s);
  }
}

TEST(MuDelta, Examples) {
  const double d[] = {1.0, 0.0};
  const SvdFactors f = svd(DenseMatrix::diagonal(d));
  EXPECT_NEAR(mu_delta(f, vec({3.0, 4.0})), 4.0, 1e-15);
  std::mt19937_64 rng(31);
  const Eigen::MatrixXd a = random_gaussian(4, 4, rng) + 4 * Eigen::MatrixXd::Identity(4, 4);
  EXPECT_NEAR(mu_delta(svd(DenseMatrix(a)), a * random_gaussian(4, 1, rng)), 0.0, 1e-12);
}

TEST(MuDelta, MatchesDenseProjection) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::MatrixXd a = random_rank(9, 7, 1 + trial % 6, rng);
    const Vector u = random_gaussian(9, 1, rng);
    const SvdFactors f = svd(DenseMatrix(a));
    const double dense = (a * dense_pinv(a, 1e-8) * u - u).norm();
    EXPECT_NEAR(mu_delta(f, u), dense, 1e-10 * u.norm());
  }
}

TEST(BetaDelta, Examples) {
  const SvdFactors f = svd(DenseMatrix::identity(1));
  const MpmiFamily fam = mpmi_family(f);
  const Vector v = f.project(vec({2.0}));
  EXPECT_EQ(beta_delta_sq(0.0, f, v, fam), 0.0);
  EXPECT_NEAR(beta_delta_sq(27.0 / 16.0, f, v, fam), 4.0 / 9.0, 1e-15);
  EXPECT_EQ(beta_delta_sq(27.0 / 16.0, f, v, fam, Side::right), 4.0);
  EXPECT_EQ(beta_delta_sq(2.0, f, v, fam), 4.0);
}

TEST(BetaDelta, StartsAtMuAndPlateausAtNorm) {
  std::mt19937_64 rng(33);
  const Eigen::MatrixXd a = random_rank(8, 6, 4, rng);
  const Vector u = random_gaussian(8, 1, rng);
  const SvdFactors f = svd(DenseMatrix(a));
  const MpmiFamily fam = mpmi_family(f);
  const Vector v = f.project(u);
  const double mu = mu_delta(f, u);
  EXPECT_NEAR(beta_delta_sq(0.0, f, v, fam), mu * mu, 1e-12 * u.squaredNorm());
  EXPECT_NEAR(beta_delta_sq(fam.breakpoint(0) * 1.0001, f, v, fam), u.squaredNorm(),
              1e-12 * u.squaredNorm());
}

TEST(SolveHDelta, InteriorRoot) {
  const SvdFactors f = svd(DenseMatrix::identity(1));
  const HDeltaSolution s = solve_h_delta(f, vec({2.0}), std::sqrt(0.2), mpmi_family(f));
  EXPECT_FALSE(s.jump);
  EXPECT_NEAR(s.h, kInteriorRoot, 1e-12);
  // Fine-grid scan oracle of beta^2 = 0.2.
  const double step = 1e-5;
  double scan = 0.0;
  while (4.0 * std::pow(1.0 - 1.0 / mpmi_x(1.0, scan), 2) < 0.2) scan += step;
  EXPECT_NEAR(scan, s.h, step);
}

TEST(SolveHDelta, ForcedJump) {
  const SvdFactors f = svd(DenseMatrix::identity(1));
  const HDeltaSolution s = solve_h_delta(f, vec({2.0}), 1.0, mpmi_family(f));
  EXPECT_TRUE(s.jump);
  EXPECT_EQ(s.h, 27.0 / 16.0);
}

TEST(SolveHDelta, NoiseDominates) {
  const SvdFactors f = svd(DenseMatrix::identity(1));
  EXPECT_THROW(solve_h_delta(f, vec({2.0}), 2.0, mpmi_family(f)), NoiseDominatesError);
  EXPECT_THROW(solve_h_delta(f, vec({2.0}), 0.0, mpmi_family(f)), InputError);
}

TEST(SolveHDelta, SandwichOnRandomProblems) {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> unif(0.01, 0.99);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd a = random_rank(7, 6, 1 + trial % 6, rng);
    const Vector u = random_gaussian(7, 1, rng);
    const SvdFactors f = svd(DenseMatrix(a));
    const MpmiFamily fam = mpmi_family(f);
    const double mu2 = std::pow(mu_delta(f, u), 2);
    const double delta = std::sqrt(unif(rng) * (u.squaredNorm() - mu2));
    const HDeltaSolution s = solve_h_delta(f, u, delta, fam);
    const Vector v = f.project(u);
    const double target = delta * delta + mu2;
    EXPECT_NEAR(s.target, target, 1e-14 * u.squaredNorm());
    EXPECT_GT(s.h, 0.0);
    EXPECT_LE(beta_delta_sq(s.h, f, v, fam, Side::left), target + 1e-12 * u.squaredNorm());
    EXPECT_GE(beta_delta_sq(s.h, f, v, fam, Side::right), target - 1e-12 * u.squaredNorm());
    if (!s.jump) {
      EXPECT_NEAR(beta_delta_sq(s.h, f, v, fam), target, 1e-12 * u.squaredNorm());
    }
  }
}

TEST(SolveHDelta, WorksForOtherFilterFamilies) {
  std::mt19937_64 rng(35);
  const Eigen::MatrixXd a = random_rank(6, 5, 5, rng);
  const Vector u = random_gaussian(6, 1, rng);
  const SvdFactors f = svd(DenseMatrix(a));
  const LinearFamily fam(f.sigma);
  const double mu2 = std::pow(mu_delta(f, u), 2);
  const double delta = 0.5 * std::sqrt(u.squaredNorm() - mu2);
  const HDeltaSolution s = solve_h_delta(f, u, delta, fam, 50);
  const Vector v = f.project(u);
  EXPECT_LE(beta_delta_sq(s.h, f, v, fam), s.target * (1 + 1e-12));
  EXPECT_GE(beta_delta_sq(s.h, f, v, fam, Side::right), s.target * (1 - 1e-12));
  EXPECT_EQ(s.curve.samples.size(), 50u);
  EXPECT_EQ(s.curve.jumps.size(), 5u);
}

TEST(DiscrepancyCurve, NondecreasingWithJumpsAtBreakpoints) {
  std::mt19937_64 rng(36);
  const Eigen::MatrixXd a = random_rank(9, 7, 6, rng);
  const Vector u = random_gaussian(9, 1, rng);
  const SvdFactors f = svd(DenseMatrix(a));
  const MpmiFamily fam = mpmi_family(f);
  const DiscrepancyCurve c = discrepancy_curve(f, f.project(u), fam, 5000);
  ASSERT_EQ(c.samples.size(), 5000u);
  EXPECT_EQ(c.samples.front().h, 0.0);
  EXPECT_NEAR(c.samples.front().beta_sq, c.mu_delta_sq, 1e-15);
  for (std::size_t i = 1; i < c.samples.size(); ++i) {
    EXPECT_GE(c.samples[i].beta_sq, c.samples[i - 1].beta_sq);
  }
  EXPECT_NEAR(c.samples.back().beta_sq, c.u_norm_sq, 1e-12 * c.u_norm_sq);
  for (const auto& j : c.jumps) EXPECT_GE(j.right, j.left);
}

TEST(MpmiSolve, SmallNoiseRecoversInverse) {
  std::mt19937_64 rng(37);
  const Eigen::MatrixXd a = random_gaussian(5, 5, rng) + 5 * Eigen::MatrixXd::Identity(5, 5);
  const Vector u = random_gaussian(5, 1, rng);
  const SolveReport r = mpmi_solve(DenseMatrix(a), u, 1e-8 * u.norm());
  const Vector exact = a.partialPivLu().solve(u);
  EXPECT_LT((r.solution - exact).norm(), 1e-6 * exact.norm());
  EXPECT_EQ(r.effective_rank, 5u);
}

TEST(MpmiSolve, ReportFieldsAreConsistent) {
  std::mt19937_64 rng(38);
  const Eigen::MatrixXd a = random_rank(12, 9, 7, rng);
  const Vector u = a * random_gaussian(9, 1, rng) + 0.05 * random_gaussian(12, 1, rng);
  const SvdFactors f = svd(DenseMatrix(a));
  const SolveReport r = mpmi_solve(f, u, 0.3);
  const MpmiFamily fam = mpmi_family(f);
  const Vector filtered = filtered_spectrum(f, fam, r.chosen_parameter);
  EXPECT_EQ(r.effective_rank, static_cast<std::size_t>((filtered.array() > 0).count()));
  EXPECT_EQ(r.numerical_rank, 7u);
  EXPECT_NEAR(r.residual, (a * r.solution - u).norm(), 1e-12 * u.norm());
  EXPECT_NEAR(r.mu_delta, mu_delta(f, u), 1e-15 * u.norm());
  EXPECT_GE(r.residual * r.residual, r.mu_delta * r.mu_delta * (1 - 1e-12));
  const Eigen::Index last = static_cast<Eigen::Index>(r.effective_rank) - 1;
  EXPECT_NEAR(r.condition_number, filtered[0] / filtered[last], 1e-12 * r.condition_number);
}

TEST(MpmiSolve, PseudoinverseNeverGrows) {
  std::mt19937_64 rng(39);
  const Eigen::MatrixXd a = random_rank(8, 8, 6, rng);
  const SvdFactors f = svd(DenseMatrix(a));
  const MpmiFamily fam = mpmi_family(f);
  double exact = 0.0;
  for (std::size_t k = 0; k < fam.size(); ++k) exact += std::pow(f.sigma[k], -2);
  for (double h = 0.0; h < fam.cap(); h += fam.cap() / 997) {
    const Vector s = filtered_spectrum(f, fam, h);
    double norm2 = 0.0;
    for (Eigen::Index k = 0; k < s.size(); ++k) norm2 += std::pow(theta(s[k]), 2);
    EXPECT_LE(norm2, exact * (1 + 1e-14));
  }
}

TEST(ConditionNumber, ImprovesOnExactMatrix) {
  std::mt19937_64 rng(40);
  const Eigen::MatrixXd a = random_rank(10, 8, 8, rng);
  const SvdFactors f = svd(DenseMatrix(a));
  const MpmiFamily fam = mpmi_family(f);
  const double nu = spectral_cond(f);
  EXPECT_DOUBLE_EQ(condition_number_filtered(f, fam, 0.0), nu);
  for (double h = fam.cap() / 1e6; h < fam.breakpoint(0); h *= 1.5) {
    const double c = condition_number_filtered(f, fam, h);
    EXPECT_LT(c, nu);
    const Vector s = filtered_spectrum(f, fam, h);
    const Eigen::Index r = (s.array() > 0).count();
    if (r > 1) EXPECT_LT(c, f.sigma[0] / f.sigma[r - 1]);
  }
  EXPECT_THROW(condition_number_filtered(f, fam, fam.cap()), UndefinedConditionError);
}

TEST(ConditionNumber, AtBreakpointTheLastValueIsInflated) {
  const double d[] = {4.0, 2.0, 1.0};
  const SvdFactors f = svd(DenseMatrix::diagonal(d));
  const MpmiFamily fam = mpmi_family(f);
  const double h = fam.breakpoint(1);
  const Vector filtered = filtered_spectrum(f, fam, h);
  EXPECT_EQ(filtered[2], 0.0);
  EXPECT_EQ(filtered[1], 3.0);
  EXPECT_NEAR(condition_number_filtered(f, fam, h), 4.0 * mpmi_x(4.0, h) / 3.0, 1e-14);
}

TEST(MpmiSolve, FilterLevelShrinksWithNoiseOnModelProblem) {
  const PoissonProblem p = build_poisson(kDeskRows, kDeskCols, 0.1);
  const SvdFactors f = svd(p.matrix);
  double prev = std::numeric_limits<double>::infinity();
  for (const double delta : {0.3, 0.1, 0.03, 0.01, 0.003, 0.001}) {
    const Vector u = perturb_rhs(p.u_bar, delta, 5);
    const SolveReport r = mpmi_solve(f, u, delta * p.u_bar.norm());
    EXPECT_LT(r.chosen_parameter, prev) << "delta=" << delta;
    prev = r.chosen_parameter;
  }
}

TEST(MpmiSolve, ModelProblemAtFivePercent) {
  const PoissonProblem p = build_poisson(kDeskRows, kDeskCols, 0.1);
  const SvdFactors f = svd(p.matrix);
  const Vector u = perturb_rhs(p.u_bar, 0.05, 1);
  const SolveReport r = mpmi_solve(f, u, 0.05 * p.u_bar.norm());
  EXPECT_LE(relative_error(r.solution, p.z_bar), 0.05);
  EXPECT_LT(r.condition_number, 1e-6 * spectral_cond(f));
}

}  // namespace
