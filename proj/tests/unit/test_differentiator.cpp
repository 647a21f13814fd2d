#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hound/differentiator.hpp"
#include "hound/signals.hpp"
#include "oracles.hpp"

namespace hound {
namespace {

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

TEST(Init, DefaultEstimates) {
  Differentiator d2({2}, {0.0, 5.0});
  EXPECT_EQ(vec(d2.estimates()), (std::vector<double>{5.0, 0.0}));
  EXPECT_EQ(d2.time(), 0.0);
  EXPECT_EQ(d2.samples_seen(), 1u);

  Differentiator d5({5}, {0.0, 3.5});
  EXPECT_EQ(vec(d5.estimates()), (std::vector<double>{3.5, 0.0, 0.0, 0.0, 0.0}));
}

TEST(Init, ExplicitEstimatesOverride) {
  Differentiator d({1, std::vector<double>{7.0}}, {1.0, 5.0});
  EXPECT_EQ(d.estimate(0), 7.0);
  EXPECT_EQ(d.time(), 1.0);
}

TEST(Init, Rejections) {
  EXPECT_THROW(Differentiator({0}, {0.0, 1.0}), OrderOutOfRange);
  EXPECT_THROW(Differentiator({2, std::vector<double>{1.0}}, {0.0, 1.0}), LengthMismatch);
  EXPECT_THROW(Differentiator({2}, {0.0, std::nan("")}), NonFiniteSample);
  EXPECT_THROW(Differentiator({2}, {INFINITY, 1.0}), NonFiniteSample);
  EXPECT_THROW(Differentiator({2}, {-1.0, 1.0}), Error);
}

TEST(Update, Rejections) {
  Differentiator d({2}, {0.0, 1.0});
  EXPECT_THROW(d.update({0.0, 1.0}), NonMonotoneTime);
  d.update({1.0, 2.0});
  EXPECT_THROW(d.update({1.0, 2.0}), NonMonotoneTime);
  EXPECT_THROW(d.update({0.5, 2.0}), NonMonotoneTime);
  EXPECT_THROW(d.update({2.0, NAN}), NonFiniteSample);
  EXPECT_EQ(d.samples_seen(), 2u);
}

TEST(Update, ZeroTimeIsRejected) {
  StateRecord r{-1.0, 1, 1, {0.0}, 0.0, false};
  Differentiator d(r);
  EXPECT_THROW(d.update({0.0, 1.0}), ZeroTime);
}

TEST(Update, FirstOrderMatchesCumulativeAverageForm) {
  Differentiator d({1}, {0.0, 10.0});
  double z = 10.0;
  const double fs[] = {3.0, -1.0, 4.0, 1.5, 9.0};
  for (int i = 0; i < 5; ++i) {
    const double t = i + 1.0;
    d.update({t, fs[i]});
    z = (1.0 / t) * fs[i] + (1.0 - 1.0 / t) * z;
    EXPECT_NEAR(d.estimate(0), z, 1e-14 * std::max(1.0, std::abs(z)));
  }
}

TEST(Update, ConstantSignalIsFixedPoint) {
  for (int n = 1; n <= 6; ++n) {
    Differentiator d({n}, {0.0, 2.75});
    for (int t = 1; t <= 1000; ++t) {
      d.update({static_cast<double>(t), 2.75});
      ASSERT_EQ(d.estimate(0), 2.75) << "n=" << n << " t=" << t;
      for (int m = 1; m < n; ++m) ASSERT_EQ(d.estimate(m), 0.0);
    }
  }
}

TEST(Update, FirstOrderIsRunningMean) {
  std::mt19937_64 gen(12345);
  std::uniform_real_distribution<double> dist(-100.0, 100.0);
  std::vector<double> xs(100000);
  for (double& x : xs) x = dist(gen);
  const auto means = test::running_means(xs);
  std::vector<double> magnitudes(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) magnitudes[i] = std::abs(xs[i]);
  // Relative to the mean magnitude, the condition number of the running sum.
  const auto scales = test::running_means(magnitudes);

  // The start value is forgotten at t = 1, up to one rounding of its own size.
  Differentiator d({1}, {0.0, 42.0});
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d.update({static_cast<double>(i + 1), xs[i]});
    worst = std::max(worst, std::abs(d.estimate(0) - means[i]) / scales[i]);
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Update, SecondOrderIsHoltLinear) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> noise(0.0, 0.5);
  Differentiator d({2}, {0.0, 1.0});
  test::HoltCumulative holt{1.0, 0.0};
  for (int t = 1; t <= 5000; ++t) {
    const double f = 1.0 + 0.3 * t + noise(gen);
    d.update({static_cast<double>(t), f});
    holt.step(t, f);
    ASSERT_LE(test::rel_diff(d.estimate(0), holt.level), 1e-12) << "t=" << t;
    ASSERT_LE(std::abs(d.estimate(1) - holt.trend), 1e-12 * std::max(1.0, std::abs(holt.trend))) << "t=" << t;
  }
}

TEST(Update, CleanQuarticReachesTarget) {
  const SignalSpec spec{{5.0, -0.004, 0.0003, -0.00002, 0.000001}, {}, 0.0, 0};
  Differentiator d({5}, {0.0, clean_value(spec, 0.0)});
  for (int t = 1; t <= 20000; ++t) d.update({static_cast<double>(t), clean_value(spec, t)});
  EXPECT_NEAR(d.estimate(0), 159840119925.0, 1.0);
  EXPECT_NEAR(d.estimate(2) / 4797.6, 1.0, 0.01);
}

TEST(StateError, Examples) {
  const std::vector<double> z1{5, 0}, t1{5, 0}, z2{6, 1};
  EXPECT_EQ(state_error(z1, t1), (std::vector<double>{0, 0}));
  EXPECT_EQ(state_error(z2, t1), (std::vector<double>{1, 1}));
  const std::vector<double> short_truth{5};
  EXPECT_THROW(state_error(z1, short_truth), LengthMismatch);
}

TEST(Update, ExactStateIsShiftedExactly) {
  // For a degree n-1 polynomial with an exact state the residual is zero and
  // the update is a pure Taylor shift, so step pattern does not matter.
  const SignalSpec spec{{2.0, -1.0, 0.5}, {}, 0.0, 0};
  const int n = 3;
  auto make = [&] {
    return Differentiator({n, derivative_vector(spec, 1.0, n)}, {1.0, clean_value(spec, 1.0)});
  };
  Differentiator a = make(), b = make();
  a.update({2.0, clean_value(spec, 2.0)});
  a.update({3.0, clean_value(spec, 3.0)});
  b.update({3.0, clean_value(spec, 3.0)});
  const auto truth = derivative_vector(spec, 3.0, n);
  for (int m = 0; m < n; ++m) {
    EXPECT_NEAR(a.estimate(m), truth[m], 1e-12);
    EXPECT_NEAR(b.estimate(m), truth[m], 1e-12);
  }

  Differentiator c = make();
  const double times[] = {1.3, 1.31, 2.9, 7.0, 7.5, 40.25};
  for (double t : times) {
    const auto r = c.update({t, clean_value(spec, t)});
    EXPECT_NEAR(r.residual, 0.0, 1e-9);
  }
  const auto tr = derivative_vector(spec, 40.25, n);
  for (int m = 0; m < n; ++m) EXPECT_NEAR(c.estimate(m), tr[m], 1e-9 * std::max(1.0, std::abs(tr[m])));
}

TEST(Update, LinearErrorDecaysLikeInverseTime) {
  // Degree n-1 clean signal from the default start: e0 * t stays bounded.
  // Checkpoints stop at 1e4; beyond that e0 sits at the rounding floor of f.
  const SignalSpec spec{{1.0, 2.0, 3.0}, {}, 0.0, 0};
  Differentiator d({3}, {0.0, 1.0});
  std::vector<double> scaled;
  for (int t = 1; t <= 10000; ++t) {
    d.update({static_cast<double>(t), clean_value(spec, t)});
    if (t == 100 || t == 1000 || t == 10000) {
      scaled.push_back(std::abs(d.estimate(0) - clean_value(spec, t)) * t);
    }
  }
  ASSERT_EQ(scaled.size(), 3u);
  EXPECT_LE(scaled[2], scaled[0] * 1.05 + 1e-6);
  EXPECT_LE(scaled[2], scaled[1] * 1.05 + 1e-6);
}

TEST(Update, HigherEstimatesRegularise) {
  const SignalSpec spec{{1.0, 2.0, 3.0}, {}, 0.0, 0};
  Differentiator d({5}, {0.0, 1.0});
  for (int t = 1; t <= 10000; ++t) d.update({static_cast<double>(t), clean_value(spec, t)});
  EXPECT_LT(std::abs(d.estimate(3)), 1e-4);
  EXPECT_LT(std::abs(d.estimate(4)), 1e-4);
}

TEST(Update, HarmonicSignalEstimateDecays) {
  const double omega = 2.0 * std::numbers::pi;
  const SignalSpec spec{{}, {{1.0, omega, 0.0}}, 0.0, 0};
  for (int n = 1; n <= 3; ++n) {
    Differentiator d({n}, {0.0, 0.0});
    const double dt = 0.01;
    for (int i = 1; i <= 100000; ++i) {
      const double t = i * dt;
      d.update({t, clean_value(spec, t)});
    }
    EXPECT_LT(std::abs(d.estimate(0)), 0.05) << "n=" << n;
  }
}

TEST(Update, RandomIrregularStepsStayFinite) {
  std::mt19937_64 gen(99);
  std::exponential_distribution<double> gap(3.0);
  std::normal_distribution<double> val(0.0, 10.0);
  for (int n = 1; n <= 8; ++n) {
    Differentiator d({n}, {0.0, val(gen)});
    double t = 0.0;
    for (int i = 0; i < 20000; ++i) {
      t += 1e-6 + gap(gen);
      d.update({t, val(gen)});
      for (double z : d.estimates()) ASSERT_TRUE(std::isfinite(z)) << "n=" << n << " i=" << i;
    }
  }
}

TEST(Snapshot, RestoreContinuesBitIdentically) {
  const SignalSpec spec{{1.0, 0.5, -0.01}, {}, 0.3, 4};
  Differentiator full({4}, {0.0, sample(spec, 0.0, 0)});
  Differentiator first({4}, {0.0, sample(spec, 0.0, 0)});
  for (int i = 1; i <= 500; ++i) {
    full.update({double(i), sample(spec, i, i)});
    first.update({double(i), sample(spec, i, i)});
  }
  Differentiator resumed(first.snapshot());
  EXPECT_EQ(resumed.snapshot(), first.snapshot());
  for (int i = 501; i <= 1000; ++i) {
    full.update({double(i), sample(spec, i, i)});
    resumed.update({double(i), sample(spec, i, i)});
  }
  EXPECT_EQ(full.snapshot(), resumed.snapshot());
}

TEST(Snapshot, RejectsMalformedRecords) {
  EXPECT_THROW(Differentiator(StateRecord{1.0, 3, 1, {1.0, 2.0}, 0.0, false}), LengthMismatch);
  EXPECT_THROW(Differentiator(StateRecord{1.0, 1, 1, {NAN}, 0.0, false}), NonFiniteSample);
}

TEST(SkipRepeats, RepeatedValuesAreIgnoredOnlyWhenEnabled) {
  Differentiator keep({1}, {0.0, 1.0});
  Differentiator skip({1, std::nullopt, true}, {0.0, 1.0});
  const double fs[] = {3.0, 3.0, 3.0, 5.0};
  for (int i = 0; i < 4; ++i) {
    keep.update({i + 1.0, fs[i]});
    const auto r = skip.update({i + 1.0, fs[i]});
    EXPECT_EQ(r.applied, i == 0 || i == 3);
  }
  EXPECT_EQ(keep.samples_seen(), 5u);
  EXPECT_EQ(skip.samples_seen(), 3u);
  // Skipped samples do not advance t: dt = 3 at t = 4, so 3 + (3/4)(5 - 3)
  EXPECT_DOUBLE_EQ(skip.estimate(0), 4.5);
  EXPECT_DOUBLE_EQ(keep.estimate(0), 3.5);
}

TEST(TaylorWeights, RunningProducts) {
  std::vector<double> w(5);
  taylor_weights(2.0, w);
  EXPECT_EQ(w, (std::vector<double>{1.0, 2.0, 2.0, 4.0 / 3.0, 2.0 / 3.0}));
}

}  // namespace
}  // namespace hound
