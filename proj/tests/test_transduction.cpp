#include <bloodsim/transduction.hpp>
#include <bloodsim/rng.hpp>

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace bloodsim;

namespace {

BoundPopulation random_population(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> target_len(50, 250), background_len(180, 360);
  BoundPopulation p;
  p.n_sites = 6700;
  for (int i = 0; i < n; ++i) {
    if (rng() % 3 == 0) {
      p.fragments.push_back({FragmentClass::target, target_len(rng), 1.0});
      ++p.k_target;
    } else {
      p.fragments.push_back({FragmentClass::background, background_len(rng), 0.5});
      ++p.k_background;
    }
  }
  return p;
}

BoundPopulation single_target(std::int32_t n_bp) {
  BoundPopulation p;
  p.n_sites = 6700;
  p.fragments.push_back({FragmentClass::target, n_bp, 1.0});
  p.k_target = 1;
  return p;
}

}  // namespace

TEST(ScreeningFactor, Examples) {
  EXPECT_EQ(screening_factor(0.7e-9, 0.0), 1.0);
  EXPECT_NEAR(screening_factor(0.7e-9, 8.5e-9), 5.326e-6, 5e-10);
  EXPECT_NEAR(screening_factor(0.7e-9, 8.5e-9), std::exp(-8.5 / 0.7), 1e-18);
  EXPECT_NEAR(screening_factor(1.0e-9, 8.5e-9), 2.035e-4, 5e-8);
  EXPECT_THROW(screening_factor(0.0, 1e-9), std::domain_error);
  EXPECT_THROW(screening_factor(1e-9, -1e-9), std::domain_error);
}

TEST(PotentialShift, Examples) {
  const double expected = 1.0 * oracle::q * 150 / (6.7e-13 * 9.769e-3);
  EXPECT_NEAR(potential_shift(1.0, 150, 6.7e-13, 9.769e-3), expected, 1e-15);
  EXPECT_NEAR(potential_shift(1.0, 150, 6.7e-13, 9.769e-3), 3.672e-3, 5e-7);
  EXPECT_EQ(potential_shift(1.0, 0, 6.7e-13, 9.769e-3), 0.0);
  EXPECT_DOUBLE_EQ(potential_shift({FragmentClass::background, 200, 0.5}, 6.7e-13, 9.769e-3),
                   0.5 * potential_shift({FragmentClass::target, 200, 1.0}, 6.7e-13, 9.769e-3));
}

TEST(ComputeShift, EmptyPopulation) {
  const auto s = compute_shift(BoundPopulation{}, RegimeConfig{});
  EXPECT_EQ(s.delta_i_target, 0.0);
  EXPECT_EQ(s.delta_i_background, 0.0);
  EXPECT_EQ(s.delta_i_total, 0.0);
  EXPECT_EQ(s.amplitude(), 0.0);
}

TEST(ComputeShift, SingleTargetHandValue) {
  RegimeConfig c;
  const auto s = compute_shift(single_target(150), c);
  const double c_eff = 1.0 / (1.0 / (oracle::eps0 * 3.9 / 3.5e-9) + 1.0 / (oracle::eps0 * 78.5 / 0.7e-9));
  const double expected = 1.42e-7 * (oracle::q * 150 / (6.7e-13 * c_eff)) * std::exp(-8.5 / 0.7);
  EXPECT_NEAR(s.delta_i_target, expected, 1e-12 * expected);
  EXPECT_NEAR(s.delta_i_target, 2.78e-15, 0.005e-15);
  EXPECT_EQ(s.delta_i_background, 0.0);
  EXPECT_EQ(s.d_eff, 8.5e-9);
  EXPECT_NEAR(s.alpha, 5.326e-6, 5e-10);
}

TEST(ComputeShift, ScreeningRatioBetweenLayers) {
  const auto population = random_population(1, 6700);
  RegimeConfig thin, thick;
  thin.d_b = 5e-9;
  thick.d_b = 7e-9;
  const double ratio = compute_shift(population, thin).delta_i_total / compute_shift(population, thick).delta_i_total;
  EXPECT_NEAR(ratio, std::exp(2.0 / 0.7), 1e-12 * ratio);
  EXPECT_NEAR(ratio, 17.412, 0.001);
}

TEST(ComputeShift, ExponentialScalingProperty) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lambda(0.5e-9, 2.0e-9), layer(0.5e-9, 10e-9);
  for (int i = 0; i < 500; ++i) {
    const auto population = random_population(static_cast<std::uint64_t>(i), 1 + i * 13);
    RegimeConfig a, b;
    a.lambda_d = b.lambda_d = lambda(rng);
    a.d_b = layer(rng);
    b.d_b = layer(rng);
    const double ratio = compute_shift(population, a).delta_i_total / compute_shift(population, b).delta_i_total;
    const double expected = std::exp((effective_distance(b) - effective_distance(a)) / a.lambda_d);
    ASSERT_NEAR(ratio, expected, 1e-12 * expected);
  }
}

TEST(ComputeShift, LinearInPopulationUnion) {
  const RegimeConfig c;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = random_population(seed, 300);
    const auto b = random_population(seed + 1000, 500);
    BoundPopulation both = a;
    both.fragments.insert(both.fragments.end(), b.fragments.begin(), b.fragments.end());
    both.k_target += b.k_target;
    both.k_background += b.k_background;
    const double sum = compute_shift(a, c).delta_i_total + compute_shift(b, c).delta_i_total;
    ASSERT_NEAR(compute_shift(both, c).delta_i_total, sum, 1e-12 * sum);
  }
}

TEST(ComputeShift, TotalIsSumOfClasses) {
  const auto s = compute_shift(random_population(9, 6700), RegimeConfig{});
  EXPECT_EQ(s.delta_i_total, s.delta_i_target + s.delta_i_background);
  EXPECT_GT(s.alpha, 0.0);
  EXPECT_LE(s.alpha, 1.0);
}

TEST(ComputeShift, StrictlyIncreasingInDebyeLength) {
  const auto population = random_population(3, 6700);
  double previous = 0.0;
  for (double lambda = 0.5e-9; lambda <= 2.0e-9; lambda += 0.05e-9) {
    RegimeConfig c;
    c.lambda_d = lambda;
    const double amplitude = compute_shift(population, c).amplitude();
    ASSERT_GT(amplitude, previous) << "lambda=" << lambda;
    previous = amplitude;
  }
}

TEST(ComputeShift, FixedSign) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    RegimeConfig c;
    c.lambda_d = 0.5e-9 + 1.5e-9 * u(rng);
    c.t_ox = 1e-9 + 5e-9 * u(rng);
    c.d_b = 1e-9 + 8e-9 * u(rng);
    ASSERT_GE(compute_shift(random_population(static_cast<std::uint64_t>(i), 50), c).delta_i_total, 0.0);
  }
}
