#include <gtest/gtest.h>

#include "qmimo/error.hpp"
#include "qmimo/strategy.hpp"

using namespace qmimo;
using tensor::Complex;
using tensor::ComplexMatrix;
using tensor::RealMatrix;
using namespace qmimo::strategy;

namespace {

channel::ChannelChoi make_channel(int n, double eta, std::vector<double> lambda) {
  channel::ChannelParams p;
  p.modes = n;
  p.eta = eta;
  p.delta = 1.0;
  p.lambda = std::move(lambda);
  return channel::channel_choi(p);
}

StrategyConfig config(int m, int k, double p) {
  StrategyConfig c;
  c.m = m;
  c.k = k;
  c.p = p;
  return c;
}

}  // namespace

TEST(StrategyNames, RoundTrip) {
  for (auto s : all_strategies()) EXPECT_EQ(parse_strategy(to_string(s)), s);
  EXPECT_EQ(all_strategies().size(), 5u);
  EXPECT_THROW(parse_strategy("best"), ConfigError);
}

TEST(SelectModes, LeastDepolarizedFirst) {
  const std::vector<double> lambda = {0.6, 0.1, 0.3};
  const auto h = make_channel(3, 0.0, lambda);
  const auto sel = select_modes(lambda, 2, 3, h);
  EXPECT_EQ(sel.t, (std::vector<int>{1, 2}));
  // Without crosstalk each clone is best read on its own mode.
  EXPECT_EQ(sel.r, (std::vector<int>{1, 2, 0}));
}

TEST(SelectModes, TiesBreakByIndex) {
  const std::vector<double> lambda = {0.3, 0.3};
  const auto h = make_channel(2, 0.0, lambda);
  const auto sel = select_modes(lambda, 1, 1, h);
  EXPECT_EQ(sel.t, (std::vector<int>{0}));
  EXPECT_EQ(sel.r, (std::vector<int>{0}));
}

TEST(SelectModes, UniformNoiseUsesAllModesInOrder) {
  const std::vector<double> lambda(3, 0.4);
  const auto h = make_channel(3, 0.5, lambda);
  const auto sel = select_modes(lambda, 3, 3, h);
  EXPECT_EQ(sel.t, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(sel.r, (std::vector<int>{0, 1, 2}));
}

TEST(SelectModes, RejectsBadCounts) {
  const std::vector<double> lambda = {0.1, 0.2};
  const auto h = make_channel(2, 0.0, lambda);
  EXPECT_THROW(select_modes(lambda, 3, 2, h), DomainError);
  EXPECT_THROW(select_modes(lambda, 1, 0, h), DomainError);
}

TEST(SingleBranch, DepolarizingValue) {
  const auto h = make_channel(2, 0.0, {0.2, 0.6});
  EXPECT_NEAR(single_branch_fidelity(h, 0, 0), 0.9, 1e-12);
  EXPECT_NEAR(single_branch_fidelity(h, 1, 1), 0.7, 1e-12);
  EXPECT_NEAR(single_branch_fidelity(h, 0, 1), 0.5, 1e-12);
}

TEST(RunStrategy, DirectOnNoiselessChannel) {
  const auto h = make_channel(2, 0.0, {0.0, 0.0});
  const auto rec = run_strategy(StrategyId::dir, h, config(1, 1, 1.0));
  EXPECT_NEAR(rec.f_avg, 1.0, 1e-12);
  EXPECT_EQ(rec.p_real, 1.0);
}

TEST(RunStrategy, DirectPicksBestMode) {
  const auto h = make_channel(2, 0.0, {0.2, 0.6});
  const auto rec = run_strategy(StrategyId::dir, h, config(1, 1, 1.0));
  EXPECT_NEAR(rec.f_avg, 0.9, 1e-12);
  EXPECT_EQ(rec.t, (std::vector<int>{0}));
  EXPECT_EQ(rec.r, (std::vector<int>{0}));
  ASSERT_TRUE(rec.j_index.has_value());
  EXPECT_NEAR(*rec.j_index, 0.5, 1e-12);
}

TEST(RunStrategy, PurificationMatchesReference) {
  const auto h = make_channel(2, 0.5, {0.1, 0.3});
  EXPECT_NEAR(run_strategy(StrategyId::pur, h, config(1, 2, 0.8)).f_avg, 0.8388942915, 1e-7);
  EXPECT_NEAR(run_strategy(StrategyId::pur, h, config(1, 2, 1.0)).f_avg, 0.9231793425, 1e-7);
}

TEST(RunStrategy, SymmetricMatchesReference) {
  const auto h = make_channel(2, 0.5, {0.1, 0.3});
  const auto rec = run_strategy(StrategyId::sym, h, config(2, 2, 0.8));
  EXPECT_NEAR(rec.f_avg, 0.7418709816, 1e-7);
  EXPECT_EQ(rec.gamma, (std::vector<double>{0.5, 0.5}));
}

TEST(RunStrategy, OrderingOnCrosstalkChannel) {
  const auto h = make_channel(3, 0.5, {0.1, 0.4, 0.7});
  const auto c = config(3, 3, 0.8);
  const double div = run_strategy(StrategyId::div, h, c).f_avg;
  const double sym = run_strategy(StrategyId::sym, h, c).f_avg;
  const double blind = run_strategy(StrategyId::blind, h, c).f_avg;
  EXPECT_GE(div, sym - 1e-6);
  EXPECT_LE(blind, sym + 1e-6);
}

TEST(RunStrategy, RejectsInvalidConfigurations) {
  const auto h = make_channel(2, 0.0, {0.1, 0.2});
  EXPECT_THROW(run_strategy(StrategyId::dir, h, config(1, 1, 0.8)), ConfigError);
  EXPECT_THROW(run_strategy(StrategyId::dir, h, config(2, 2, 1.0)), ConfigError);
  EXPECT_THROW(run_strategy(StrategyId::pur, h, config(2, 2, 1.0)), ConfigError);
  EXPECT_THROW(run_strategy(StrategyId::blind, h, config(2, 1, 1.0)), ConfigError);
  EXPECT_THROW(run_strategy(StrategyId::div, h, config(3, 2, 1.0)), ConfigError);
}

TEST(BlindDecoder, IsCached) {
  const auto a = blind_decoder(2, 0.8);
  const auto b = blind_decoder(2, 0.8);
  EXPECT_EQ(tensor::max_abs(a - b), 0.0);
}

TEST(PurificationGain, ZeroAtUnitProbability) {
  const auto h = make_channel(2, 0.5, {0.1, 0.3});
  const auto r = run_strategy(StrategyId::div, h, config(2, 2, 1.0));
  EXPECT_EQ(purification_gain({r}, {r}), 0.0);
}

TEST(PurificationGain, IdentityChannelLosesToFailures) {
  const auto h = make_channel(1, 0.0, {0.0});
  const auto at_p = run_strategy(StrategyId::pur, h, config(1, 1, 0.8));
  const auto at_1 = run_strategy(StrategyId::pur, h, config(1, 1, 1.0));
  EXPECT_NEAR(purification_gain({at_p}, {at_1}), -0.1, 1e-6);
}

TEST(PurificationGain, RejectsMismatch) {
  const auto h = make_channel(1, 0.0, {0.0});
  const auto r = run_strategy(StrategyId::pur, h, config(1, 1, 1.0));
  EXPECT_THROW(purification_gain({r}, {r, r}), DomainError);
  EXPECT_THROW(purification_gain({}, {}), DomainError);
}
