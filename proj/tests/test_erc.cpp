#include <cmath>

#include <gtest/gtest.h>

#include "aggdiff/erc.hpp"

using namespace aggdiff;

namespace {

double inv_r(double r) { return 1.0 / r; }

}  // namespace

TEST(FPair, PowerLawReducesToFz) {
  // with g = 1/r the integrand collapses to 2 (2rs)^-beta (z - cos)^-beta (1 - z cos)
  for (double alpha : {1.5, 2.0, 2.5}) {
    const auto p = InteractionPotential::power_law_force(alpha);
    const double beta = 0.5 * (alpha + 1.0);
    for (auto [r, s] : {std::pair{2.0, 1.0}, std::pair{1.3, 0.7}, std::pair{10.0, 0.5}}) {
      const double z = (r * r + s * s) / (2 * r * s);
      const double want = std::pow(2.0, 1.0 - beta) * std::pow(r * s, -beta) * f_z(beta, z).value;
      const double got = F_pair(inv_r, p, r, s).value;
      EXPECT_NEAR(got, want, 1e-9 * std::max(1.0, std::abs(want))) << alpha << " " << r << " " << s;
    }
  }
}

TEST(FPair, ZeroProfileGivesZero) {
  EXPECT_EQ(F_pair_values(0.0, 0.0, InteractionPotential::log_newtonian(), 2.0, 1.0).value, 0.0);
}

TEST(FPair, LogPotentialNonnegative) {
  const auto p = InteractionPotential::log_newtonian();
  for (double r : {0.5, 1.0, 3.0})
    for (double s : {0.2, 0.5, 2.9}) EXPECT_GE(F_pair(inv_r, p, r, s).value, -1e-12);
}

TEST(FPhiEps, ScaleCovariance) {
  // W' homogeneous of degree -alpha, g of degree -1: F scales as lambda^(-alpha-1)
  const double alpha = 2.0, lam = 3.0;
  const auto p = InteractionPotential::power_law_force(alpha);
  for (auto [eps, r, s] : {std::tuple{0.5, 2.0, 1.0}, std::tuple{1.0, 3.0, 0.4}, std::tuple{0.2, 0.9, 0.6}}) {
    const double a = F_phi_eps(p, lam * eps, lam * r, lam * s).value;
    const double b = std::pow(lam, -alpha - 1.0) * F_phi_eps(p, eps, r, s).value;
    EXPECT_NEAR(a, b, 1e-9 * std::max(1e-12, std::abs(b)));
  }
}

TEST(FPhiEps, SmallEpsMatchesUnsmoothedProfile) {
  const auto p = InteractionPotential::weakly_confining(0.5);
  for (double eps : {1e-1, 1e-3}) {
    const double a = F_phi_eps(p, eps, 2.0, 1.0).value;
    const double b = F_pair(inv_r, p, 2.0, 1.0).value;
    EXPECT_NEAR(a, b, 1e-9 * std::abs(b));
  }
}

TEST(FPhiEps, ProfileVanishesInsideRing) {
  PhiEpsGradient g(1.0);
  EXPECT_NEAR(g(0.5), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(g(1.0), 0.5);
  EXPECT_NEAR(g(4.0), 0.25, 1e-12);
  EXPECT_THROW(PhiEpsGradient(0.0), ArgumentError);
}

TEST(Threshold, NonnegativeUpToThree) {
  const auto z = threshold_z_grid(200);
  for (double alpha : {1.5, 2.0, 2.5, 3.0}) {
    const auto rep = check_power_law_threshold(alpha, z);
    EXPECT_TRUE(rep.nonnegative) << alpha << " min " << rep.min_f;
    EXPECT_FALSE(rep.witness_z.has_value());
  }
}

TEST(Threshold, NegativeAboveThreeWithWitness) {
  const auto rep = check_power_law_threshold(3.5, threshold_z_grid(200));
  EXPECT_FALSE(rep.nonnegative);
  ASSERT_TRUE(rep.witness_z.has_value());
  EXPECT_GT(*rep.witness_z, 1.0);
  EXPECT_LT(*rep.witness_f, -1e-10);
  EXPECT_LT(detail::f_z_unchecked(2.25, *rep.witness_z, {}).value, 0.0);
}

TEST(Threshold, RejectsBadInput) {
  EXPECT_THROW(check_power_law_threshold(1.0, {2.0}), ArgumentError);
  EXPECT_THROW(check_power_law_threshold(2.0, {}), ArgumentError);
  EXPECT_THROW(check_power_law_threshold(2.0, {1.0}), DomainError);
}

TEST(CertifiedR, LogPotentialCertifiedAtFirstCandidate) {
  ErcScanConfig c;
  c.R1 = 1.0;
  c.eps_grid = {0.1, 1.0};
  c.r_grid = log_grid(0.5, 50.0, 12);
  c.s_grid = log_grid(0.5, 50.0, 12);
  const auto rep = find_certified_R(InteractionPotential::log_newtonian(), c);
  EXPECT_TRUE(rep.violations.empty());
  ASSERT_TRUE(rep.certified_R.has_value());
  EXPECT_GT(*rep.certified_R, 1.0);
  for (double s : c.s_grid)
    if (s > 1.0) {
      EXPECT_EQ(*rep.certified_R, s);
      break;
    }
}

TEST(CertifiedR, SteepPowerLawReportsViolations) {
  ErcScanConfig c;
  c.R1 = 1.0;
  c.eps_grid = {0.5};
  c.r_grid = log_grid(0.2, 20.0, 20);
  c.s_grid = log_grid(0.2, 20.0, 20);
  const auto rep = find_certified_R(InteractionPotential::power_law_force(3.5), c);
  EXPECT_FALSE(rep.violations.empty());
  EXPECT_FALSE(rep.a1_holds);
  EXPECT_LT(rep.min_F, 0.0);
}

TEST(CertifiedR, ConfigValidation) {
  ErcScanConfig c;
  c.eps_grid = {0.5};
  c.r_grid = {1.0, 2.0};
  c.s_grid = {2.0, 1.0};
  EXPECT_THROW(c.validate(), ArgumentError);
  c.s_grid = {1.0, 2.0};
  c.eps_grid = {2.0};
  EXPECT_THROW(c.validate(), ArgumentError);
}
