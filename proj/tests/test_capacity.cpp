#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "relaycap/capacity.hpp"
#include "relaycap/channel.hpp"
#include "relaycap/info.hpp"
#include "test_util.hpp"

using namespace relaycap;
using relaycap_test::binary_grid_capacity;
using relaycap_test::random_deterministic_channel;
using relaycap_test::random_test_channel;

namespace {

constexpr double kH011 = 0.4999159581645280;
constexpr double kH01 = 0.4689955935892812;
constexpr double kH02 = 0.7219280948873623;
constexpr double kH025 = 0.8112781244591329;

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

}  // namespace

TEST(TestChannelType, Validation) {
  EXPECT_NO_THROW(TestChannel(2, 3, {0.5, 0.25, 0.25, 0.0, 1.0, 0.0}));
  EXPECT_THROW(TestChannel(2, 2, {0.5, 0.4, 1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(TestChannel(2, 2, {1.5, -0.5, 1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(TestChannel::identity(3, 2), std::invalid_argument);
  const auto id = TestChannel::identity(2, 3);
  EXPECT_DOUBLE_EQ(id.prob(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(id.prob(1, 2), 0.0);
}

TEST(CutsetRate, BscStateExamples) {
  const auto ch = bsc_state_channel(0.25);
  const Pmf u = Pmf::uniform(2);
  // r0 = 0.5 keeps the direct-plus-link branch active
  EXPECT_NEAR(cutset_rate(u, ch, 0.5), 1.0 - kH025 + 0.5, 1e-12);
  // r0 = 0 collapses to I(X;Y)
  EXPECT_NEAR(cutset_rate(u, ch, 0.0), 1.0 - kH025, 1e-12);
  // r0 >= H(Y1|Y) saturates at I(X;Y,Y1)
  const auto j = induced_joint(u, ch);
  EXPECT_NEAR(cutset_rate(u, ch, kH025 + 0.1), mutual_information(j, {0}, {1, 2}), 1e-12);
  EXPECT_THROW(cutset_rate(u, ch, -0.2), std::invalid_argument);
}

TEST(CutsetCapacity, BscStateLine) {
  // capacity 1 - H(p) + r0 below the knee, uniform input optimal
  const auto pt = cutset_capacity(bsc_state_channel(0.11), 0.2);
  EXPECT_NEAR(pt.rate, 1.0 - kH011 + 0.2, 1e-6);
  EXPECT_TRUE(pt.converged);
  EXPECT_EQ(pt.active_branch, MinBranch::direct_plus_link);
  EXPECT_NEAR(pt.argmax_input[0], 0.5, 1e-3);
}

TEST(CutsetCapacity, BscStateSaturation) {
  const auto pt = cutset_capacity(bsc_state_channel(0.11), 0.6);
  EXPECT_NEAR(pt.rate, 1.0, 1e-6);
  EXPECT_EQ(pt.active_branch, MinBranch::relay_joint);
}

TEST(CutsetCapacity, RejectsNondeterministicChannels) {
  const DiscreteRelayChannel noisy(1, 2, 2, {0.25, 0.25, 0.25, 0.25});
  EXPECT_THROW(cutset_capacity(noisy, 0.1), NotDeterministicError);
}

TEST(CutsetCapacity, MatchesGridOracle) {
  detail::Rng rng(41);
  for (int inst = 0; inst < 10; ++inst) {
    const auto ch = random_deterministic_channel(rng, 2, 2, 2);
    const auto pt = cutset_capacity(ch, 0.3);
    EXPECT_NEAR(pt.rate, binary_grid_capacity(ch, 0.3), 2e-3) << "instance " << inst;
  }
}

TEST(CutsetCapacity, ZeroLinkIsPointToPointCapacity) {
  detail::Rng rng(42);
  for (int inst = 0; inst < 5; ++inst) {
    const auto ch = random_deterministic_channel(rng, 2, 3, 2);
    const auto pt = cutset_capacity(ch, 0.0);
    EXPECT_NEAR(pt.rate, binary_grid_capacity(ch, 0.0), 2e-3);
  }
}

TEST(CutsetCapacity, MonotoneWithOneBitBound) {
  detail::Rng rng(43);
  const OptimizerConfig cfg;
  for (int inst = 0; inst < 5; ++inst) {
    const auto ch = random_deterministic_channel(rng, 3, 2, 2);
    const double r0a = 0.15, r0b = 0.4;
    const double ca = cutset_capacity(ch, r0a, cfg).rate;
    const double cb = cutset_capacity(ch, r0b, cfg).rate;
    EXPECT_LE(ca, cb + 2.0 * cfg.tolerance);
    EXPECT_LE(cb, ca + (r0b - r0a) + 2.0 * cfg.tolerance);
  }
}

TEST(CapacityCurve, BscStateKnee) {
  const auto ch = bsc_state_channel(0.11);
  std::vector<double> grid;
  for (int i = 0; i <= 7; ++i) grid.push_back(0.1 * i);
  const auto curve = capacity_curve(ch, grid);
  ASSERT_EQ(curve.points.size(), grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double expected = std::min(1.0 - kH011 + grid[i], 1.0);
    EXPECT_NEAR(curve.points[i].rate, expected, 2e-3) << "r0 = " << grid[i];
  }
  // slope-1 segment then plateau; knee at H(0.11) ~ 0.49992
  EXPECT_EQ(curve.points[3].active_branch, MinBranch::direct_plus_link);
  EXPECT_EQ(curve.points[6].active_branch, MinBranch::relay_joint);
}

TEST(CapacityCurve, SinglePointGrid) {
  const auto curve = capacity_curve(bsc_state_channel(0.2), std::vector<double>{0.0});
  ASSERT_EQ(curve.points.size(), 1u);
  EXPECT_NEAR(curve.points[0].rate, 1.0 - kH02, 1e-6);
}

TEST(CapacityCurve, NondecreasingAndConcave) {
  detail::Rng rng(44);
  const auto ch = random_deterministic_channel(rng, 3, 3, 3);
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.08 * i);
  const auto curve = capacity_curve(ch, grid, OptimizerConfig{}, 2);
  for (std::size_t i = 1; i < grid.size(); ++i)
    EXPECT_GE(curve.points[i].rate, curve.points[i - 1].rate - 1e-9);
  for (std::size_t i = 2; i < grid.size(); ++i) {
    const double d1 = curve.points[i - 1].rate - curve.points[i - 2].rate;
    const double d2 = curve.points[i].rate - curve.points[i - 1].rate;
    EXPECT_LE(d2, d1 + 1e-6);
  }
  EXPECT_THROW(capacity_curve(ch, std::vector<double>{0.3, 0.1}), std::invalid_argument);
}

TEST(CfRate, IdentityDescriptionKeepsEverything) {
  detail::Rng rng(45);
  const auto ch = random_deterministic_channel(rng, 2, 3, 2);
  const Pmf px(rng.simplex_point(2));
  const auto e = cf_rate(px, ch, TestChannel::identity(2, 2));
  const auto j = induced_joint(px, ch);
  EXPECT_NEAR(e.rate, mutual_information(j, {0}, {1, 2}), 1e-12);
  EXPECT_NEAR(e.link_cost, conditional_entropy(j, {2}, {1}), 1e-12);
}

TEST(CfRate, UselessDescriptionCostsNothing) {
  detail::Rng rng(46);
  const auto ch = random_deterministic_channel(rng, 2, 2, 3);
  const Pmf px(rng.simplex_point(2));
  const auto e = cf_rate(px, ch, TestChannel::uniform_rows(3, 4));
  const auto j = induced_joint(px, ch);
  EXPECT_NEAR(e.rate, mutual_information(j, {0}, {1}), 1e-12);
  EXPECT_NEAR(e.link_cost, 0.0, 1e-12);
}

TEST(CfRate, BackwardChannelOperatingPoint) {
  // binary backward description of the state at q = 0.1 on the p = 0.25
  // channel: rate 1 - H(q), link cost H(p) - H(q)
  const auto ch = bsc_state_channel(0.25);
  const auto tc = binary_backward_test_channel(0.25, 0.1);
  const auto e = cf_rate(Pmf::uniform(2), ch, tc);
  EXPECT_NEAR(e.rate, 1.0 - kH01, 1e-12);
  EXPECT_NEAR(e.link_cost, kH025 - kH01, 1e-12);
  // the link cost equals I(S;Shat) here since S is independent of Y
  const auto j = detail::description_joint(Pmf::uniform(2), ch, tc);
  EXPECT_NEAR(mutual_information(j, {2}, {3}), e.link_cost, 1e-12);
}

TEST(CfRate, DimensionMismatchRejected) {
  const auto ch = bsc_state_channel(0.2);
  EXPECT_THROW(cf_rate(Pmf::uniform(2), ch, TestChannel::identity(3, 3)),
               std::invalid_argument);
  EXPECT_THROW(cf_rate(Pmf::uniform(3), ch, TestChannel::identity(2, 2)),
               std::invalid_argument);
}

TEST(CfDataProcessing, DescriptionNeverBeatsRelaySequence) {
  detail::Rng rng(47);
  for (int inst = 0; inst < 50; ++inst) {
    const auto ch = random_deterministic_channel(rng, 2, 3, 3);
    const Pmf px(rng.simplex_point(2));
    const auto tc = random_test_channel(rng, 3, 4);
    const auto j = detail::description_joint(px, ch, tc);
    const double ixyh = mutual_information(j, {0}, {1, 3});
    const double ixyy1 = mutual_information(j, {0}, {1, 2});
    EXPECT_LE(ixyh, ixyy1 + 1e-12);
    // I(X;Yhat1|Y) >= I(Y1;Yhat1|Y): the description tells the receiver at
    // least as much about X as about Y1
    const double lhs = conditional_mutual_information(j, {0}, {3}, {1});
    const double rhs = conditional_mutual_information(j, {2}, {3}, {1});
    EXPECT_GE(lhs, rhs - 1e-12);
  }
}

TEST(CfOptimal, ReachesCutsetCapacityOnBscState) {
  const auto ch = bsc_state_channel(0.2);
  const auto pt = cf_optimal(ch, 0.3);
  EXPECT_NEAR(pt.rate, 1.0 - kH02 + 0.3, 1e-2);
  ASSERT_TRUE(pt.witness.has_value());
  ASSERT_TRUE(pt.link_cost.has_value());
  EXPECT_LE(*pt.link_cost, 0.3 + 1e-9);
  EXPECT_TRUE(pt.converged);
  ASSERT_TRUE(pt.optimality_gap.has_value());
  EXPECT_LE(*pt.optimality_gap, 1e-2);
}

TEST(CfOptimal, ZeroBudgetFallsBackToDirectCapacity) {
  const auto ch = bsc_state_channel(0.2);
  const auto pt = cf_optimal(ch, 0.0);
  EXPECT_NEAR(pt.rate, 1.0 - kH02, 1e-2);
  EXPECT_LE(*pt.link_cost, 1e-9);
}

TEST(CfOptimal, LargeBudgetMatchesRelayJointCapacity) {
  const auto ch = bsc_state_channel(0.2);
  const auto reference = cutset_capacity(ch, 0.8).rate;
  const auto pt = cf_optimal(ch, 0.8);
  EXPECT_NEAR(pt.rate, reference, 1e-2);
}

TEST(ChfRate, IdentityDescriptionInsideBudgetActsAsPureHashing) {
  const auto ch = bsc_state_channel(0.3);
  const Pmf u = Pmf::uniform(2);
  const double r0 = 0.25;  // below H(Y1|Y) = H(0.3)
  const auto j = induced_joint(u, ch);
  const double expected = mutual_information(j, {0}, {1}) + r0;
  EXPECT_NEAR(chf_rate(u, ch, TestChannel::identity(2, 2), r0), expected, 1e-12);
}

TEST(ChfRate, UselessDescriptionStillAchievesCutset) {
  const auto ch = bsc_state_channel(0.3);
  const Pmf u = Pmf::uniform(2);
  for (double r0 : {0.1, 0.5, 1.0}) {
    const double expected = cutset_rate(u, ch, r0);
    EXPECT_NEAR(chf_rate(u, ch, TestChannel::uniform_rows(2, 3), r0), expected, 1e-12);
  }
}

TEST(ChfRate, CoveringInvariance) {
  // any covering distribution gives exactly the cut-set value
  detail::Rng rng(48);
  const auto ch = bsc_state_channel(0.3);
  const Pmf u = Pmf::uniform(2);
  for (int inst = 0; inst < 50; ++inst) {
    const auto tc = random_test_channel(rng, 2, 1 + static_cast<std::size_t>(rng.u64() % 4));
    EXPECT_NEAR(chf_rate(u, ch, tc, 0.25), cutset_rate(u, ch, 0.25), 1e-10);
  }
}

TEST(AhRate, UselessDescriptionGivesDirectRate) {
  // state channel form of the bsc-with-state example
  const StateChannel sc(Pmf({0.75, 0.25}), 2, 2,
                        {1.0, 0.0, 0.0, 1.0,    // x=0: y = s
                         0.0, 1.0, 1.0, 0.0});  // x=1: y = 1 xor s
  const auto e = ah_rate(Pmf::uniform(2), sc, TestChannel::uniform_rows(2, 3));
  EXPECT_NEAR(e.rate, 1.0 - kH025, 1e-12);
  EXPECT_NEAR(e.link_cost, 0.0, 1e-12);
}

TEST(AhRate, BackwardChannelMatchesJointForm) {
  const StateChannel sc(Pmf({0.75, 0.25}), 2, 2,
                        {1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0});
  const auto tc = binary_backward_test_channel(0.25, 0.1);
  const auto e = ah_rate(Pmf::uniform(2), sc, tc);
  // I(X;Y|Shat) = I(X;Y,Shat) = 1 - H(q) since X is independent of Shat
  EXPECT_NEAR(e.rate, 1.0 - kH01, 1e-12);
  EXPECT_NEAR(e.link_cost, kH025 - kH01, 1e-12);
}

TEST(AhOptimal, ConfirmsCutsetCapacityOnBscState) {
  const StateChannel sc(Pmf({0.8, 0.2}), 2, 2,
                        {1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0});
  const auto relay = sc.to_relay_channel();
  for (double r0 : {0.1, 0.3}) {
    const double reference = cutset_capacity(relay, r0).rate;
    const auto pt = ah_optimal(sc, r0);
    EXPECT_NEAR(pt.rate, reference, 1e-2) << "r0 = " << r0;
    EXPECT_LE(*pt.link_cost, r0 + 1e-9);
  }
}

TEST(AhOptimal, WorksWithoutRecoverableState) {
  // noisy observation: S not a function of (X,Y); no cut-set reference exists
  const StateChannel sc(Pmf({0.5, 0.5}), 2, 2,
                        {0.9, 0.1, 0.1, 0.9, 0.1, 0.9, 0.9, 0.1});
  EXPECT_THROW(validate(sc.to_relay_channel()), NotDeterministicError);
  const auto pt = ah_optimal(sc, 0.2);
  EXPECT_FALSE(pt.optimality_gap.has_value());
  EXPECT_GE(pt.rate, 0.0);
  EXPECT_LE(*pt.link_cost, 0.2 + 1e-9);
}

TEST(BinaryBackwardTestChannel, Validation) {
  EXPECT_NO_THROW(binary_backward_test_channel(0.25, 0.1));
  EXPECT_THROW(binary_backward_test_channel(0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(binary_backward_test_channel(0.25, 0.5), std::invalid_argument);
  EXPECT_THROW(binary_backward_test_channel(0.05, 0.2), std::invalid_argument);
}
