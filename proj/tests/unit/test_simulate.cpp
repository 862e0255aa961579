#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "fixtures.hpp"
#include "martlab/errors.hpp"
#include "martlab/simulate.hpp"

using namespace martlab;

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(SamplePath, IidIsTheRunningSumOfDraws) {
  const Stream st{11, 2};
  const auto p = sample_path(fixtures::iid(), 50, st);
  Engine e(st.seed());
  const auto space = InnovationSpace::rademacher();
  double s = 0.0;
  for (std::size_t k = 1; k <= 50; ++k) {
    s += space.draw_value(e);
    EXPECT_EQ(p.sums[k - 1], s) << k;
  }
  EXPECT_EQ(p.seed, 11u);
  EXPECT_EQ(p.replicate, 2u);
}

TEST(SamplePath, CoboundaryTelescopesToEndpoints) {
  const Stream st{5, 0};
  const Past past{0.75};
  const auto space = InnovationSpace::normal();
  PathOptions opt;
  opt.past = past;
  const auto cob = sample_path(fixtures::coboundary(space), 5, st, opt);
  const auto iid = sample_path(fixtures::iid(space), 5, st);
  // S_5 = omega_5 - omega_0.
  EXPECT_NEAR(cob.sums[4], iid.increment(5) - 0.75, 1e-15);
  for (std::size_t k = 1; k <= 5; ++k) EXPECT_NEAR(cob.sums[k - 1], iid.increment(k) - 0.75, 1e-15);
}

TEST(SamplePath, PinnedPastIsDeterministic) {
  const auto m = fixtures::geometric(0.8);
  Engine e(3);
  const auto past = draw_past(m, m.lag(), e);
  PathOptions opt;
  opt.past = std::span<const double>(past);
  const auto a = sample_path(m, 300, {9, 1}, opt);
  const auto b = sample_path(m, 300, {9, 1}, opt);
  EXPECT_EQ(a.sums, b.sums);
  EXPECT_NE(sample_path(m, 300, {9, 2}, opt).sums, a.sums);
}

TEST(SamplePath, SemilinearMatchesDirectEvaluation) {
  const auto semi = fixtures::two_sign_semilinear(0.6, 9);
  const HolderModel h(semi, HolderFunction::abs_power(0.5));
  Engine pe(17);
  const auto past = draw_past(semi, semi.lag(), pe);
  PathOptions opt;
  opt.past = std::span<const double>(past);
  const Stream st{21, 4};
  const std::size_t n = 40;
  const auto ps = sample_path(semi, n, st, opt);
  const auto ph = sample_path(h, n, st, opt);

  Engine e(st.seed());
  std::vector<double> fut(n + 1);
  for (std::size_t k = 1; k <= n; ++k) fut[k] = semi.space().points()[semi.space().draw_index(e)];
  auto coord = [&](long t) { return t >= 1 ? fut[static_cast<std::size_t>(t)] : past[static_cast<std::size_t>(-t)]; };
  double s = 0.0, sh = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    double y = 0.0;
    for (std::size_t j = 0; j <= semi.lag(); ++j) y += semi.alpha(j, coord(static_cast<long>(k) - static_cast<long>(j)));
    s += y;
    sh += std::sqrt(std::abs(y)) - h.centering().value;
    EXPECT_NEAR(ps.sums[k - 1], s, 1e-12) << k;
    EXPECT_NEAR(ph.sums[k - 1], sh, 1e-12) << k;
  }
}

TEST(SamplePath, FftMatchesNaiveConvolution) {
  const auto m = fixtures::geometric(0.995, InnovationSpace::normal(), 600);
  const std::size_t n = std::size_t{1} << 14;
  PathOptions naive;
  naive.naive = true;
  const auto a = sample_path(m, n, {1, 0}, naive);
  const auto b = sample_path(m, n, {1, 0});
  double worst = 0.0;
  for (std::size_t k = 1; k <= n; ++k) worst = std::max(worst, std::abs(a.increment(k) - b.increment(k)));
  EXPECT_LT(worst, 1e-10);
}

TEST(SamplePath, PinnedPastsShiftByTheDriftOnly) {
  // Futures are shared, so two pasts differ by E(S_k | F_0) exactly.
  const auto m = fixtures::geometric(0.7, InnovationSpace::uniform(1.0), 40);
  Engine e(8);
  const auto p = draw_past(m, 40, e);
  const auto q = draw_past(m, 40, e);
  PathOptions op, oq;
  op.past = std::span<const double>(p);
  oq.past = std::span<const double>(q);
  const std::size_t n = 100;
  const auto a = sample_path(m, n, {4, 4}, op);
  const auto b = sample_path(m, n, {4, 4}, oq);
  const auto dp = conditional_drift_path(m, n, p);
  const auto dq = conditional_drift_path(m, n, q);
  for (std::size_t k = 1; k <= n; ++k) EXPECT_NEAR(a.sums[k - 1] - b.sums[k - 1], dp[k - 1] - dq[k - 1], 1e-12) << k;
}

TEST(SamplePath, CenteredPinnedEqualsFutureOnly) {
  const auto lin = fixtures::geometric(0.6, InnovationSpace::normal(), 25);
  const auto semi = fixtures::two_sign_semilinear(0.6, 12);
  for (const ProcessModel& m : {ProcessModel(lin), ProcessModel(semi)}) {
    Engine e(99);
    const auto past = draw_past(m, model_lag(m), e);
    PathOptions pinned, free;
    pinned.past = std::span<const double>(past);
    pinned.centered = true;
    free.centered = true;
    const auto a = sample_path(m, 80, {6, 6}, pinned);
    const auto b = sample_path(m, 80, {6, 6}, free);
    for (std::size_t k = 0; k < 80; ++k) EXPECT_NEAR(a.sums[k], b.sums[k], 1e-12) << k;
  }
}

TEST(SamplePath, MartingaleDeviationForIidIsZero) {
  MartingaleIncrement d{[](double x) { return x; }, {}};
  PathOptions opt;
  opt.martingale = &d;
  const auto p = sample_path(fixtures::iid(), 64, {2, 0}, opt);
  for (double v : p.deviation) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(p.running_max_abs_dev.back(), 0.0);
}

TEST(SamplePath, Errors) {
  const auto m = fixtures::geometric(0.5);
  const Past shortp(2, 0.0);
  PathOptions opt;
  opt.past = std::span<const double>(shortp);
  EXPECT_THROW((void)sample_path(m, 10, {}, opt), InsufficientPast);
  EXPECT_THROW((void)sample_path(m, 0, {}), InvalidArgument);
  PathOptions centered;
  centered.centered = true;
  EXPECT_THROW((void)sample_path(HolderModel(fixtures::geometric_base(), HolderFunction::abs_power(1.0)), 10, {}, centered),
               UnsupportedModel);
  BatchOptions tiny;
  tiny.memory_budget_bytes = 1024;
  EXPECT_THROW((void)replicate_batch(m, 1000, 1000, 1, tiny), ResourceLimit);
  EXPECT_THROW((void)replicate_batch(m, 10, 0, 1), InvalidArgument);
}

TEST(ReplicateBatch, SingleReplicateEqualsSamplePath) {
  const auto m = fixtures::two_sign_semilinear();
  const auto b = replicate_batch(m, 200, 1, 77);
  const auto p = sample_path(m, 200, {77, 0});
  ASSERT_EQ(b.count(), 1u);
  EXPECT_EQ(b.records[0].s_n, p.sums.back());
  EXPECT_EQ(b.records[0].max_s, p.running_max.back());
  EXPECT_EQ(b.records[0].seed, (Stream{77, 0}.seed()));
  EXPECT_TRUE(std::isnan(b.records[0].dev_n));
}

TEST(ReplicateBatch, WorkerCountDoesNotChangeOutput) {
  const auto m = fixtures::geometric(0.9, InnovationSpace::normal(), 200);
  MartingaleIncrement d{[](double x) { return 10.0 * x; }, {}};
  BatchOptions one, eight;
  one.path.martingale = &d;
  eight.path.martingale = &d;
  eight.workers = 8;
  const auto a = replicate_batch(m, 500, 333, 5, one);
  const auto b = replicate_batch(m, 500, 333, 5, eight);
  ASSERT_EQ(a.count(), b.count());
  EXPECT_EQ(0, std::memcmp(a.records.data(), b.records.data(), a.count() * sizeof(ReplicateRecord)));
}

TEST(ReplicateBatch, TerminalSumsAreCenteredWithExactVariance) {
  const auto m = fixtures::geometric(0.5, InnovationSpace::rademacher(), 40);
  const std::size_t R = 4000, n = 64;
  const auto s = replicate_batch(m, n, R, 31).terminal_sums();
  const double var = exact_variance(m, n).value;
  EXPECT_NEAR(mean(s), 0.0, 4.0 * std::sqrt(var / R));
  // Sample variance of R draws: sd about var sqrt(2 / R) plus kurtosis slack.
  EXPECT_NEAR(variance(s), var, 5.0 * var * std::sqrt(3.0 / R));
}

TEST(ReplicateBatch, NormalIidVarianceBand) {
  const std::size_t R = 5000, n = 100;
  const auto s = replicate_batch(fixtures::iid(InnovationSpace::normal()), n, R, 8).terminal_sums();
  EXPECT_NEAR(variance(s), 100.0, 5.0 * 100.0 * std::sqrt(2.0 / (R - 1)));
}

TEST(ReplicateBatch, CenteredHolderIsMeanZero) {
  const HolderModel h(fixtures::two_sign_semilinear(0.5, 8), HolderFunction::abs_power(0.7));
  const std::size_t R = 4000;
  const auto s = replicate_batch(h, 32, R, 12).terminal_sums();
  EXPECT_NEAR(mean(s), 0.0, 4.0 * std::sqrt(variance(s) / R) + 32.0 * h.centering().se * 4.0);
}

TEST(DefaultWorkers, ReadsEnvironment) {
  ::setenv("MARTLAB_WORKERS", "3", 1);
  EXPECT_EQ(default_workers(), 3u);
  ::setenv("MARTLAB_WORKERS", "x", 1);
  EXPECT_EQ(default_workers(), 1u);
  ::unsetenv("MARTLAB_WORKERS");
  EXPECT_EQ(default_workers(), 1u);
}
