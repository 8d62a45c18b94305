#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "relaycap/channel.hpp"
#include "relaycap/info.hpp"
#include "relaycap/pmf.hpp"
#include "relaycap/random.hpp"

using namespace relaycap;

namespace {

// High-precision binary entropies, frozen from a 40-digit evaluation of
// -sum p log2 p.
constexpr double kH011 = 0.4999159581645280;
constexpr double kH025 = 0.8112781244591329;

JointPmf random_joint(detail::Rng& rng, std::vector<std::size_t> dims) {
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  return JointPmf(std::move(dims), rng.simplex_point(total));
}

}  // namespace

TEST(Pmf, InvariantsEnforced) {
  EXPECT_THROW(Pmf({}), std::invalid_argument);
  EXPECT_THROW(Pmf({0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(Pmf({1.2, -0.2}), std::invalid_argument);
  EXPECT_NO_THROW(Pmf({0.25, 0.75}));
  EXPECT_NO_THROW(Pmf::uniform(7));
}

TEST(JointPmf, MarginalsAreConsistent) {
  detail::Rng rng(11);
  const JointPmf j = random_joint(rng, {3, 4, 2});
  const JointPmf myz = j.marginal({1, 2});
  ASSERT_EQ(myz.dims(), (std::vector<std::size_t>{4, 2}));
  // brute-force marginal
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t z = 0; z < 2; ++z) {
      double acc = 0.0;
      for (std::size_t x = 0; x < 3; ++x)
        acc += j.at(std::array<std::size_t, 3>{x, y, z});
      EXPECT_NEAR(acc, myz.at(std::array<std::size_t, 2>{y, z}), 1e-15);
    }
}

TEST(Entropy, KnownValues) {
  EXPECT_DOUBLE_EQ(entropy(Pmf({1.0})), 0.0);
  EXPECT_DOUBLE_EQ(entropy(Pmf({0.5, 0.5})), 1.0);
  EXPECT_NEAR(entropy(Pmf({0.11, 0.89})), kH011, 1e-12);
}

TEST(Entropy, ZeroProbabilityEntriesAreIgnored) {
  EXPECT_DOUBLE_EQ(entropy(Pmf({1.0, 0.0, 0.0})), 0.0);
}

TEST(MutualInformation, IndependentProductIsZero) {
  detail::Rng rng(12);
  const auto pa = rng.simplex_point(3);
  const auto pb = rng.simplex_point(4);
  std::vector<double> j;
  for (double a : pa)
    for (double b : pb) j.push_back(a * b);
  EXPECT_NEAR(mutual_information(JointPmf({3, 4}, j), {0}, {1}), 0.0, 1e-12);
}

TEST(MutualInformation, NoiselessChannelGivesLogAlphabet) {
  // uniform X through the identity channel: I(X;Y) = log2 |X|
  const std::size_t k = 4;
  std::vector<double> j(k * k, 0.0);
  for (std::size_t x = 0; x < k; ++x) j[x * k + x] = 1.0 / k;
  EXPECT_NEAR(mutual_information(JointPmf({k, k}, j), {0}, {1}), 2.0, 1e-12);
}

TEST(MutualInformation, BscMatchesOneMinusEntropy) {
  const auto j = induced_joint(Pmf::uniform(2), bsc_state_channel(0.25)).marginal({0, 1});
  EXPECT_NEAR(mutual_information(j, {0}, {1}), 1.0 - kH025, 1e-12);
}

TEST(MutualInformation, OverlappingAxesRejected) {
  detail::Rng rng(13);
  const JointPmf j = random_joint(rng, {2, 2, 2});
  EXPECT_THROW(mutual_information(j, {0, 1}, {1}), std::invalid_argument);
  EXPECT_THROW(conditional_mutual_information(j, {0}, {1}, {1}), std::invalid_argument);
  EXPECT_THROW(mutual_information(j, {0}, {3}), std::invalid_argument);
}

TEST(ConditionalMutualInformation, ZeroUnderConditionalIndependence) {
  // p(c) p(a|c) p(b|c): I(A;B|C) = 0
  detail::Rng rng(14);
  const auto pc = rng.simplex_point(3);
  std::vector<std::vector<double>> pac, pbc;
  for (int c = 0; c < 3; ++c) {
    pac.push_back(rng.simplex_point(2));
    pbc.push_back(rng.simplex_point(4));
  }
  std::vector<double> j;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t c = 0; c < 3; ++c) j.push_back(pc[c] * pac[c][a] * pbc[c][b]);
  EXPECT_NEAR(conditional_mutual_information(JointPmf({2, 4, 3}, j), {0}, {1}, {2}), 0.0, 1e-12);
}

TEST(ConditionalMutualInformation, DeterministicRelayEqualsConditionalEntropy) {
  // Y1 = f(X,Y) makes I(X;Y1|Y) = H(Y1|Y)
  const auto j = induced_joint(Pmf::uniform(2), bsc_state_channel(0.11));
  EXPECT_NEAR(conditional_mutual_information(j, {0}, {2}, {1}),
              conditional_entropy(j, {2}, {1}), 1e-12);
  EXPECT_NEAR(conditional_entropy(j, {2}, {1}), kH011, 1e-12);
}

TEST(ConditionalMutualInformation, MatchesDirectSummationOracle) {
  // independent oracle: I(A;B|C) = sum p(a,b,c) log2[ p(c) p(a,b,c) / (p(a,c) p(b,c)) ]
  detail::Rng rng(15);
  for (int inst = 0; inst < 20; ++inst) {
    const JointPmf j = random_joint(rng, {2, 2, 2});
    const auto pac = j.marginal({0, 2});
    const auto pbc = j.marginal({1, 2});
    const auto pc = j.marginal({2});
    double oracle = 0.0;
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t c = 0; c < 2; ++c) {
          const double pabc = j.at(std::array<std::size_t, 3>{a, b, c});
          if (pabc <= 0.0) continue;
          oracle += pabc * std::log2(pc.at(std::array<std::size_t, 1>{c}) * pabc /
                                     (pac.at(std::array<std::size_t, 2>{a, c}) *
                                      pbc.at(std::array<std::size_t, 2>{b, c})));
        }
    EXPECT_NEAR(conditional_mutual_information(j, {0}, {1}, {2}), oracle, 1e-10);
  }
}

TEST(InfoIdentities, ChainRule) {
  detail::Rng rng(16);
  for (int inst = 0; inst < 200; ++inst) {
    const JointPmf j = random_joint(rng, {3, 2, 3});
    const double lhs = mutual_information(j, {0}, {1, 2});
    const double rhs = mutual_information(j, {0}, {1}) +
                       conditional_mutual_information(j, {0}, {2}, {1});
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(InfoIdentities, NonnegativityBeforeClamping) {
  detail::Rng rng(17);
  for (int inst = 0; inst < 200; ++inst) {
    const JointPmf j = random_joint(rng, {2, 3, 2});
    EXPECT_GE(detail::mutual_information_raw(j, {0}, {1}), -1e-12);
    EXPECT_GE(detail::conditional_mutual_information_raw(j, {0}, {1}, {2}), -1e-12);
    EXPECT_GE(entropy(j), 0.0);
  }
}

TEST(Typicality, ModalRepetitionIsTypical) {
  // deterministic joint: mass on (0,1) only; its repetition has the exact type
  const JointPmf j({2, 2}, {0.0, 1.0, 0.0, 0.0});
  const std::vector<int> xs(10, 0), ys(10, 1);
  EXPECT_TRUE(is_jointly_typical(xs, ys, j, 0.1));
}

TEST(Typicality, ZeroProbabilityPairRejected) {
  const auto j = induced_joint(Pmf::uniform(2), bsc_state_channel(0.0)).marginal({0, 1});
  // p(x=0, y=1) = 0 under the noiseless channel
  std::vector<int> xs(8, 0), ys(8, 0);
  ys[3] = 1;
  EXPECT_FALSE(is_jointly_typical(xs, ys, j, 0.5));
}

TEST(Typicality, LengthMismatchRejected) {
  const JointPmf j({2, 2}, {0.25, 0.25, 0.25, 0.25});
  const std::vector<int> xs(4, 0), ys(5, 0);
  EXPECT_THROW(is_jointly_typical(xs, ys, j, 0.1), std::invalid_argument);
}

TEST(Typicality, MonotoneInEps) {
  detail::Rng rng(18);
  const JointPmf j({2, 2}, {0.4, 0.1, 0.1, 0.4});
  int typical_seen = 0;
  for (int inst = 0; inst < 300; ++inst) {
    std::vector<int> xs(24), ys(24);
    for (int i = 0; i < 24; ++i) {
      const std::size_t cell = rng.categorical(j.probs());
      xs[i] = static_cast<int>(cell / 2);
      ys[i] = static_cast<int>(cell % 2);
    }
    const double eps = 0.1 + 0.5 * rng.unit();
    if (is_jointly_typical(xs, ys, j, eps)) {
      ++typical_seen;
      EXPECT_TRUE(is_jointly_typical(xs, ys, j, eps * 1.5));
      EXPECT_TRUE(is_jointly_typical(xs, ys, j, eps * 4.0));
    }
  }
  EXPECT_GT(typical_seen, 0);
}

TEST(Typicality, IidSamplesAreUsuallyTypical) {
  // length-64 i.i.d. samples at eps = 0.5 land in the typical set with
  // frequency >= 0.9 over 1000 seeded draws
  const JointPmf j({2, 2}, {0.25, 0.25, 0.25, 0.25});
  int hits = 0;
  for (int s = 0; s < 1000; ++s) {
    detail::Rng rng(detail::mix_seed(20260810, 1, static_cast<std::uint64_t>(s)));
    std::vector<int> xs(64), ys(64);
    for (int i = 0; i < 64; ++i) {
      const std::size_t cell = rng.categorical(j.probs());
      xs[i] = static_cast<int>(cell / 2);
      ys[i] = static_cast<int>(cell % 2);
    }
    if (is_jointly_typical(xs, ys, j, 0.5)) ++hits;
  }
  EXPECT_GE(hits, 900);
}
