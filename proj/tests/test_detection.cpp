#include <bloodsim/detection.hpp>
#include <bloodsim/rng.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"

using namespace bloodsim;

TEST(EstimateThreshold, MeanPlusQuantileTimesSd) {
  // mean 2e-13, sample sd 1e-13
  const std::vector<double> v = {1e-13, 2e-13, 3e-13};
  const auto t = estimate_threshold(v);
  EXPECT_NEAR(t.blank_mean, 2e-13, 1e-28);
  EXPECT_NEAR(t.blank_std, 1e-13, 1e-28);
  EXPECT_NEAR(t.theta, 3.645e-13, 1e-27);
  EXPECT_EQ(t.n_samples, 3);
}

TEST(EstimateThreshold, ConstantInput) {
  const std::vector<double> v(10, 4.2e-12);
  const auto t = estimate_threshold(v);
  EXPECT_EQ(t.blank_std, 0.0);
  EXPECT_EQ(t.theta, 4.2e-12);
}

TEST(EstimateThreshold, Errors) {
  const std::vector<double> one = {1.0};
  EXPECT_THROW(estimate_threshold(one), TooFewBlanks);
  EXPECT_THROW(estimate_threshold(std::vector<double>{}), TooFewBlanks);
  const std::vector<double> negative = {1.0, -1.0};
  EXPECT_THROW(estimate_threshold(negative), std::invalid_argument);
}

TEST(EstimateThreshold, FoldedNormalExceedance) {
  // theta over |N(0, 1)| lands at sqrt(2/pi) + 1.645 sqrt(1 - 2/pi); the
  // exceedance is 2 (1 - Phi(theta)), about 7.35 %, not the Gaussian 5 %.
  const double pi = std::acos(-1.0);
  const double theta_exact = std::sqrt(2.0 / pi) + 1.645 * std::sqrt(1.0 - 2.0 / pi);
  const double rate_exact = 2.0 * (1.0 - oracle::normal_cdf(theta_exact));
  EXPECT_NEAR(rate_exact, 0.0735, 0.0005);

  auto rng = derive_stream(17, {0, Phase::auxiliary, 0, 0, Purpose::test});
  std::normal_distribution<double> normal(0.0, 3e-12);
  const int n = 100000;
  std::vector<double> magnitudes(n);
  for (auto& m : magnitudes) m = std::fabs(normal(rng));
  const auto t = estimate_threshold(magnitudes);
  const auto above = std::count_if(magnitudes.begin(), magnitudes.end(),
                                   [&](double m) { return decide_sensor(m, t.theta); });
  const double rate = static_cast<double>(above) / n;
  EXPECT_NEAR(t.theta / 3e-12, theta_exact, 0.01);
  EXPECT_NEAR(rate, rate_exact, 4.0 * std::sqrt(rate_exact * (1.0 - rate_exact) / n));
}

TEST(EstimateThreshold, GaussianBlanksExceedFivePercent) {
  // Blanks offset well away from zero behave as a plain Gaussian.
  auto rng = derive_stream(18, {0, Phase::auxiliary, 0, 0, Purpose::test});
  std::normal_distribution<double> normal(1.7e-11, 2e-12);
  const int n = 100000;
  std::vector<double> magnitudes(n);
  for (auto& m : magnitudes) m = std::fabs(normal(rng));
  const auto t = estimate_threshold(magnitudes);
  const auto above = std::count_if(magnitudes.begin(), magnitudes.end(),
                                   [&](double m) { return decide_sensor(m, t.theta); });
  const double expected = 1.0 - oracle::normal_cdf(1.645);
  EXPECT_NEAR(static_cast<double>(above) / n, expected, 4.0 * std::sqrt(expected * (1 - expected) / n));
}

TEST(DecideSensor, Examples) {
  EXPECT_FALSE(decide_sensor(3e-12, 3e-12));
  EXPECT_TRUE(decide_sensor(-6e-12, 3e-12));
  EXPECT_FALSE(decide_sensor(0.0, 0.0));
  EXPECT_TRUE(decide_sensor(1e-30, 0.0));
  EXPECT_THROW(decide_sensor(1.0, -1.0), std::invalid_argument);
}

TEST(MakeReading, MeasuredIsSum) {
  const auto r = make_reading(1.5e-11, -2.5e-12);
  EXPECT_EQ(r.measured, 1.5e-11 + -2.5e-12);
  EXPECT_FALSE(r.decision);
}

TEST(FuseOr, Examples) {
  EXPECT_FALSE(fuse_or({false, false}));
  EXPECT_TRUE(fuse_or({true, false}));
  EXPECT_TRUE(fuse_or({true, true}));
  EXPECT_TRUE(fuse_or(std::vector<bool>{false, false, true}));
  EXPECT_THROW(fuse_or(std::vector<bool>{}), std::invalid_argument);
}

TEST(ComputeMetrics, Examples) {
  const std::vector<bool> present = {true, true, true, false};
  const std::vector<bool> blank(10, false);
  const auto m = compute_metrics(present, blank);
  EXPECT_EQ(m.sensitivity, 75.0);
  EXPECT_EQ(m.specificity, 100.0);
  EXPECT_THROW(compute_metrics(std::vector<bool>{}, blank), std::invalid_argument);
}

TEST(ComputeMetrics, TwoSensorOrFusionSpecificity) {
  auto rng = derive_stream(19, {0, Phase::auxiliary, 0, 0, Purpose::test});
  std::bernoulli_distribution fire(0.0975);
  std::vector<bool> blank(1000);
  for (std::size_t i = 0; i < blank.size(); ++i) blank[i] = fire(rng);
  const auto m = compute_metrics(std::vector<bool>{true}, blank);
  EXPECT_NEAR(m.specificity, 100.0 * (1.0 - 0.05) * (1.0 - 0.05), 3.0);
}

TEST(ComputeMetrics, PermutationInvariant) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.3);
  std::vector<bool> present(500), blank(700);
  for (std::size_t i = 0; i < present.size(); ++i) present[i] = coin(rng);
  for (std::size_t i = 0; i < blank.size(); ++i) blank[i] = coin(rng);
  const auto reference = compute_metrics(present, blank);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(present.begin(), present.end(), rng);
    std::shuffle(blank.begin(), blank.end(), rng);
    const auto m = compute_metrics(present, blank);
    EXPECT_EQ(m.sensitivity, reference.sensitivity);
    EXPECT_EQ(m.specificity, reference.specificity);
  }
}

TEST(EstimateThreshold, ReproducibleBitForBit) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1e-11);
  std::vector<double> v(2000);
  for (auto& x : v) x = u(rng);
  EXPECT_EQ(estimate_threshold(v).theta, estimate_threshold(v).theta);
}
