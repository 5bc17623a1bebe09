#include "fpf/angles.hpp"
#include "fpf/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(Rng, SameKeysReproduceTheSequence) {
  fpf::RngStream a(7, fpf::Stream::kParticle, 3, 2);
  fpf::RngStream b(7, fpf::Stream::kParticle, 3, 2);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, AnyKeyComponentChangesTheStream) {
  fpf::RngStream base(7, fpf::Stream::kParticle, 3, 2);
  fpf::RngStream seed(8, fpf::Stream::kParticle, 3, 2);
  fpf::RngStream stream(7, fpf::Stream::kTruth, 3, 2);
  fpf::RngStream step(7, fpf::Stream::kParticle, 4, 2);
  fpf::RngStream member(7, fpf::Stream::kParticle, 3, 3);
  const std::uint64_t first = base.next_u64();
  EXPECT_NE(first, seed.next_u64());
  EXPECT_NE(first, stream.next_u64());
  EXPECT_NE(first, step.next_u64());
  EXPECT_NE(first, member.next_u64());
}

TEST(Rng, KeyedNoiseIgnoresEvaluationOrder) {
  auto fresh = fpf::keyed_noise(11, fpf::Stream::kParticle, 5, 3);
  const fpf::Vec direct = fresh(4);

  auto warmed = fpf::keyed_noise(11, fpf::Stream::kParticle, 5, 3);
  for (int i = 0; i < 4; ++i) warmed(i);
  const fpf::Vec after = warmed(4);

  ASSERT_EQ(direct.size(), 3);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(direct(j), after(j));
}

TEST(Rng, NormalDrawsHaveStandardMoments) {
  fpf::RngStream rs(123, fpf::Stream::kInit);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rs.normal();
    s1 += x;
    s2 += x * x;
    s3 += x * x * x;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
  EXPECT_NEAR(s3 / n, 0.0, 0.06);
}

TEST(Rng, UniformDrawsCoverTheUnitInterval) {
  fpf::RngStream rs(321, fpf::Stream::kFrame);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rs.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s1 += u;
    s2 += u * u;
  }
  const double mean = s1 / n;
  EXPECT_NEAR(mean, 0.5, 0.005);
  EXPECT_NEAR(s2 / n - mean * mean, 1.0 / 12.0, 0.002);
}

TEST(Rng, UniformIntIsBalanced) {
  fpf::RngStream rs(55, fpf::Stream::kResample);
  const int bins = 6, n = 60000;
  std::vector<int> count(bins, 0);
  for (int i = 0; i < n; ++i) {
    const int k = rs.uniform_int(bins);
    ASSERT_GE(k, 0);
    ASSERT_LT(k, bins);
    ++count[k];
  }
  for (int k = 0; k < bins; ++k) EXPECT_NEAR(count[k], n / bins, 400);
}

TEST(Angles, WrapAngleLandsInHalfOpenRange) {
  EXPECT_DOUBLE_EQ(fpf::wrap_angle(0.3), 0.3);
  EXPECT_DOUBLE_EQ(fpf::wrap_angle(M_PI), M_PI);
  // -pi maps to the +pi representative: the range is (-pi, pi].
  EXPECT_DOUBLE_EQ(fpf::wrap_angle(-M_PI), M_PI);
  EXPECT_NEAR(fpf::wrap_angle(3.0 * M_PI / 2.0), -M_PI / 2.0, 1e-12);
  EXPECT_NEAR(fpf::wrap_angle(-3.0 * M_PI / 2.0), M_PI / 2.0, 1e-12);
  EXPECT_NEAR(fpf::wrap_angle(2.0 * M_PI + 0.1), 0.1, 1e-12);

  for (double a : {-7.0 * M_PI, 9.5, -123.456, 1e4}) {
    const double w = fpf::wrap_angle(a);
    EXPECT_GT(w, -M_PI - 1e-15);
    EXPECT_LE(w, M_PI + 1e-15);
    EXPECT_NEAR(std::remainder(w - a, 2.0 * M_PI), 0.0, 1e-9);
  }
}

TEST(Angles, WrapPeriodGeneralizesWrapAngle) {
  EXPECT_DOUBLE_EQ(fpf::wrap_period(0.25, 1.0), 0.25);
  EXPECT_DOUBLE_EQ(fpf::wrap_period(0.6, 1.0), -0.4);
  EXPECT_DOUBLE_EQ(fpf::wrap_period(-0.5, 1.0), 0.5);
  EXPECT_NEAR(fpf::wrap_period(12.3, 1.0), 0.3, 1e-9);
  // Consistent with wrap_angle at period 2*pi.
  for (double a : {2.9, -3.5, 7.0}) {
    EXPECT_DOUBLE_EQ(fpf::wrap_period(a, 2.0 * M_PI), fpf::wrap_angle(a));
  }
}

TEST(Angles, CircularMeanCrossesTheBranchCut) {
  const double m = fpf::circular_mean({M_PI - 0.1, -M_PI + 0.1});
  EXPECT_NEAR(std::abs(m), M_PI, 1e-9);
  EXPECT_NEAR(fpf::circular_mean({0.1, 0.3}), 0.2, 1e-12);
  EXPECT_DOUBLE_EQ(fpf::circular_mean({}), 0.0);
}

TEST(Angles, WeightedCircularMeanFollowsTheWeights) {
  EXPECT_NEAR(fpf::circular_mean_weighted({0.0, 1.0}, {1.0, 0.0}), 0.0, 1e-12);
  EXPECT_NEAR(fpf::circular_mean_weighted({0.0, M_PI / 2.0}, {1.0, 1.0}),
              M_PI / 4.0, 1e-12);
}

TEST(Common, LogSumExpHandsBackExactSmallCases) {
  EXPECT_EQ(fpf::logsumexp({}), -kInf);
  EXPECT_EQ(fpf::logsumexp({-kInf, -kInf}), -kInf);
  EXPECT_NEAR(fpf::logsumexp({std::log(2.0), std::log(3.0)}), std::log(5.0),
              1e-12);
  // Stable far outside the naive exp range.
  EXPECT_NEAR(fpf::logsumexp({1000.0, 1000.0}), 1000.0 + std::log(2.0), 1e-9);
  EXPECT_NEAR(fpf::logsumexp({-1000.0, -1000.0 + std::log(3.0)}),
              -1000.0 + std::log(4.0), 1e-9);
}

}  // namespace
