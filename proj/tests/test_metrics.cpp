#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "qmimo/error.hpp"
#include "qmimo/metrics.hpp"

using namespace qmimo::metrics;

TEST(AsymmetryIndex, OneUsefulBranch) {
  EXPECT_NEAR(*asymmetry_index({1.0, 0.5, 0.5}), 1.0 / 3.0, 1e-15);
}

TEST(AsymmetryIndex, EqualBranchesGiveOne) {
  EXPECT_NEAR(*asymmetry_index({0.8, 0.8, 0.8}), 1.0, 1e-15);
}

TEST(AsymmetryIndex, MixedBranches) {
  // Useful fidelities 0.72, 0.28, 0.
  const double expected = 1.0 / (3.0 * (0.72 * 0.72 + 0.28 * 0.28));
  EXPECT_NEAR(*asymmetry_index({0.9, 0.7, 0.5}), expected, 1e-12);
  EXPECT_NEAR(expected, 0.55853, 1e-5);
}

TEST(AsymmetryIndex, NoUsefulBranch) {
  EXPECT_FALSE(asymmetry_index({0.5, 0.4}).has_value());
}

TEST(Density, IntegratesToOne) {
  const std::vector<double> v = {0.4, 0.5, 0.55, 0.7, 0.9, 0.95};
  const auto d = empirical_density(v, 1.0 / 3.0, 1.0, 512);
  ASSERT_EQ(d.x.size(), 512u);
  double integral = 0.0;
  for (std::size_t i = 1; i < d.x.size(); ++i) {
    integral += 0.5 * (d.density[i] + d.density[i - 1]) * (d.x[i] - d.x[i - 1]);
  }
  EXPECT_NEAR(integral, 1.0, 1e-3);
  EXPECT_NEAR(d.x.front(), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(d.x.back(), 1.0, 1e-15);
}

TEST(Density, EqualValuesPeakAtValue) {
  const auto d = empirical_density({0.6, 0.6, 0.6, 0.6}, 0.0, 1.0, 1001);
  EXPECT_EQ(d.bandwidth, 1e-3);
  const auto peak = std::max_element(d.density.begin(), d.density.end()) - d.density.begin();
  EXPECT_NEAR(d.x[static_cast<std::size_t>(peak)], 0.6, 1e-3);
}

TEST(Density, UniformSampleIsFlat) {
  std::vector<double> v;
  for (int i = 0; i < 2000; ++i) v.push_back((i + 0.5) / 2000.0);
  const auto d = empirical_density(v, 0.0, 1.0, 256);
  const auto [lo, hi] = std::minmax_element(d.density.begin(), d.density.end());
  EXPECT_LT(*hi / *lo, 1.5);
}

TEST(Density, RejectsBadInput) {
  EXPECT_THROW(empirical_density({}, 0.0, 1.0), qmimo::DomainError);
  EXPECT_THROW(empirical_density({0.5}, 1.0, 0.0), qmimo::DomainError);
}

TEST(MeanSe, Values) {
  const auto a = mean_se({1.0, 2.0, 3.0, 4.0});
  EXPECT_NEAR(a.mean, 2.5, 1e-15);
  EXPECT_NEAR(a.se, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(a.count, 4u);
  const auto one = mean_se({7.0});
  EXPECT_EQ(one.mean, 7.0);
  EXPECT_EQ(one.se, 0.0);
  EXPECT_EQ(mean_se({}).count, 0u);
}
