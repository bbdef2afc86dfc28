#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spforge/spforge.hpp"

using namespace spforge;

TEST(LogLikelihood, SymmetricPoint) {
  for (double xb : {0.1, 0.5, 0.93})
    for (double t : {1.0, 10.0, 777.0}) EXPECT_NEAR(log_likelihood(0.5, xb, t), t * std::log(0.5), 1e-12 * t);
}

TEST(LogLikelihood, MatchesProductOverBits) {
  const int bits[10] = {1, 0, 0, 1, 0, 0, 0, 1, 0, 0};
  double prod = 1;
  for (int b : bits) prod *= b ? 0.3 : 0.7;
  EXPECT_NEAR(log_likelihood(0.3, 0.3, 10), std::log(prod), 1e-12);
  EXPECT_NEAR(likelihood(0.3, 0.3, 10), prod, 1e-15);
}

TEST(LogLikelihood, GridMaximumAtXBar) {
  for (double xb : {0.123, 0.5, 0.871}) {
    double best = 0, best_v = -INFINITY;
    for (int g = 1; g < 1000; ++g) {
      const double th = g * 1e-3;
      const double v = log_likelihood(th, xb, 50);
      if (v > best_v) {
        best_v = v;
        best = th;
      }
    }
    EXPECT_NEAR(best, xb, 1e-3);
    EXPECT_EQ(theta_mle(xb), xb);
  }
}

TEST(LogLikelihood, RejectsThetaOutsideOpenInterval) {
  EXPECT_THROW(log_likelihood(0.0, 0.5, 1), ParamError);
  EXPECT_THROW(log_likelihood(1.0, 0.5, 1), ParamError);
  EXPECT_THROW(gradient(-0.1, 0.5, 1), ParamError);
}

TEST(Gradient, ZeroAtXBarAndSign) {
  EXPECT_NEAR(gradient(0.4, 0.4, 100), 0.0, 1e-12);
  EXPECT_GT(gradient(0.2, 0.4, 100), 0.0);
  EXPECT_LT(gradient(0.6, 0.4, 100), 0.0);
}

TEST(Gradient, FiniteDifference) {
  const double h = 1e-6;
  const double fd = (log_likelihood(0.2 + h, 0.4, 100) - log_likelihood(0.2 - h, 0.4, 100)) / (2 * h);
  EXPECT_NEAR(fd / gradient(0.2, 0.4, 100), 1.0, 1e-4);
}

TEST(Gradient, SynapsePartialSumsToGradient) {
  // t bits with `ones` set: the sum of per-bit partials is the full gradient.
  const int t = 40, ones = 13;
  double sum = 0;
  for (int j = 0; j < t; ++j) sum += synapse_partial(0.27, j < ones);
  EXPECT_NEAR(sum, gradient(0.27, static_cast<double>(ones) / t, t), 1e-10);
}

TEST(Increments, Examples) {
  auto a = derived_increments(0.015, 0.5);
  EXPECT_DOUBLE_EQ(a.phi_plus, 0.03);
  EXPECT_DOUBLE_EQ(a.phi_minus, 0.03);
  auto b = derived_increments(0.015, 0.25);
  EXPECT_DOUBLE_EQ(b.phi_plus, 0.06);
  EXPECT_DOUBLE_EQ(b.phi_minus, 0.02);
  EXPECT_THROW(derived_increments(0.6, 0.5), ParamError);
  EXPECT_THROW(derived_increments(0.01, 0.0), ParamError);
  EXPECT_THROW(derived_increments(0.01, 1.0), ParamError);
  EXPECT_FALSE(increments_feasible(0.6, 0.5));
  EXPECT_TRUE(increments_feasible(0.5, 0.5));
}

TEST(Increments, IdentityIsExact) {
  std::mt19937_64 rng(1);
  for (int n = 0; n < 500; ++n) {
    const double xb = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
    const double kappa = std::uniform_real_distribution<double>(1e-5, std::min(xb, 1 - xb))(rng);
    auto d = derived_increments(kappa, xb);
    EXPECT_EQ(d.exact_plus * Rational(xb), Rational(kappa));
    EXPECT_EQ(d.exact_minus * (1 - Rational(xb)), Rational(kappa));
    // The rounded doubles are within half an ulp of the exact values.
    EXPECT_NEAR(d.phi_plus * xb, kappa, 4e-16);
  }
}

TEST(Increments, FromCountedXBar) {
  auto d = derived_increments(0.01, XBar{1, 3});
  EXPECT_EQ(d.exact_plus * Rational(1, 3), Rational(0.01));
  EXPECT_THROW(derived_increments(0.01, XBar{0, 0}), ParamError);
}

TEST(PerSynapse, Examples) {
  EXPECT_EQ(per_synapse_update(1, 0.03, 0.05), 0.03);
  EXPECT_EQ(per_synapse_update(0, 0.03, 0.05), -0.05);
}

TEST(PerSynapse, EqualsPermanenceDeltaRow) {
  std::mt19937_64 rng(2);
  for (int n = 0; n < 100; ++n) {
    std::vector<std::uint8_t> x(30);
    for (auto& b : x) b = std::bernoulli_distribution(0.4)(rng);
    auto d = derived_increments(0.012, 0.4);
    auto row = permanence_delta(x, d.phi_plus, d.phi_minus);
    for (std::size_t k = 0; k < x.size(); ++k) ASSERT_EQ(per_synapse_update(x[k], d.phi_plus, d.phi_minus), row[k]);
  }
}

TEST(EstimateXBar, CountsGatheredBits) {
  SpParams prm;
  prm.p = 10;
  prm.m = 3;
  prm.q = 4;
  prm.rho_c = 1;
  auto s = initialize(validate(prm));
  SdrBatch b;
  b.push_back(SdrVector(10, 1));
  b.push_back(SdrVector(10, 0));
  auto xb = estimate_x_bar(s, b);
  EXPECT_EQ(xb.ones, 12u);
  EXPECT_EQ(xb.t, 24u);
  EXPECT_EQ(xb.value(), 0.5);
}
