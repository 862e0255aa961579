#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "martlab/errors.hpp"
#include "martlab/stats.hpp"

using namespace martlab;

namespace {

std::vector<double> normal_draws(std::size_t R, double mu, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(mu, sd);
  std::vector<double> v(R);
  for (auto& x : v) x = g(rng);
  return v;
}

RefusedComputation::Reason refusal(const std::function<void()>& f) {
  try {
    f();
  } catch (const RefusedComputation& e) {
    return e.reason();
  }
  ADD_FAILURE() << "expected a refusal";
  return RefusedComputation::Reason::DegenerateVariance;
}

}  // namespace

TEST(References, Examples) {
  EXPECT_EQ(bm_sup_reference(1.0).cdf(0.0), 0.0);
  EXPECT_EQ(bm_sup_reference(1.0).cdf(-2.0), 0.0);
  EXPECT_NEAR(bm_sup_reference(1.0).cdf(1.96), 0.95, 1e-5);
  EXPECT_EQ(normal_reference(4.0).cdf(0.0), 0.5);
  EXPECT_NEAR(normal_reference(4.0).cdf(2.0), 0.8413447460685429, 1e-15);
  EXPECT_THROW((void)normal_reference(0.0), InvalidArgument);
  EXPECT_THROW((void)bm_sup_reference(-1.0), InvalidArgument);
}

TEST(KolmogorovSurvival, TabulatedQuantiles) {
  // Upper quantiles of the Kolmogorov law.
  EXPECT_NEAR(kolmogorov_survival(1.2238), 0.10, 1e-4);
  EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 1e-4);
  EXPECT_NEAR(kolmogorov_survival(1.6276), 0.01, 1e-4);
  EXPECT_NEAR(kolmogorov_survival(1.9495), 0.001, 1e-5);
  EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
  EXPECT_NEAR(kolmogorov_survival(0.2), 1.0, 1e-12);
}

TEST(KolmogorovSurvival, SeriesAgreeAcrossTheSwitch) {
  for (double x = 0.6; x <= 2.0; x += 0.01) {
    double alt = 0.0;
    for (int k = 1; k <= 200; ++k) alt += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
    EXPECT_NEAR(kolmogorov_survival(x), alt, 1e-12) << x;
  }
  double prev = 1.0;
  for (double x = 0.05; x <= 3.0; x += 0.05) {
    const double s = kolmogorov_survival(x);
    EXPECT_LE(s, prev + 1e-15);
    prev = s;
  }
}

TEST(KsTest, PerfectFit) {
  const std::size_t R = 2000;
  std::vector<double> q(R);
  const boost::math::normal_distribution<double> nd(0.0, 1.0);
  for (std::size_t i = 0; i < R; ++i) q[i] = boost::math::quantile(nd, (static_cast<double>(i) + 0.5) / R);
  const auto r = ks_test(q, normal_reference(1.0));
  EXPECT_NEAR(r.statistic, 1.0 / (2.0 * R), 1e-12);
  EXPECT_GT(r.pvalue, 0.999999);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(r.ties_flagged);
}

TEST(KsTest, LocationShiftIsRejected) {
  const auto r = ks_test(normal_draws(10000, 0.0, 1.0, 5), normal_reference(1.0), {});
  EXPECT_TRUE(r.pass);
  auto shifted = [](double x) { return 0.5 * std::erfc(-(x - 1.0) / std::sqrt(2.0)); };
  const auto bad = ks_test(normal_draws(10000, 0.0, 1.0, 5), {"normal(1,1)", shifted});
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(bad.statistic, 2.0 * (0.5 * std::erfc(-0.5 / std::sqrt(2.0))) - 1.0, 0.02);
  EXPECT_LT(bad.pvalue, 1e-100);
}

TEST(KsTest, Errors) {
  EXPECT_THROW((void)ks_test(std::vector<double>(999, 0.0), normal_reference(1.0)), InvalidArgument);
  std::vector<double> v = normal_draws(1000, 0, 1, 1);
  v[3] = std::nan("");
  EXPECT_THROW((void)ks_test(v, normal_reference(1.0)), InvalidArgument);
  KsOptions bad;
  bad.alpha = 1.5;
  EXPECT_THROW((void)ks_test(normal_draws(1000, 0, 1, 1), normal_reference(1.0), bad), InvalidArgument);
}

TEST(KsTest, TiesAreFlagged) {
  std::vector<double> signs(2000);
  for (std::size_t i = 0; i < signs.size(); ++i) signs[i] = i % 2 ? 1.0 : -1.0;
  const auto r = ks_test(signs, normal_reference(1.0));
  EXPECT_TRUE(r.ties_flagged);
  EXPECT_NEAR(r.tie_fraction, 0.5, 1e-12);
  EXPECT_FALSE(r.pass);
}

TEST(KsTest, PValueIsUniformUnderTheNull) {
  // False rejection rate at alpha = 0.01 over 200 seeds lies in [0, 0.04].
  int reject = 0;
  for (std::uint64_t s = 0; s < 200; ++s) reject += !ks_test(normal_draws(1000, 0, 1, 100 + s), normal_reference(1.0)).pass;
  EXPECT_LE(reject, 8);
}

TEST(LimitVariance, ExamplesAndRefusals) {
  EXPECT_NEAR(limit_variance(fixtures::iid(InnovationSpace::normal(2.5))).sigma2, 2.5, 1e-15);
  EXPECT_NEAR(limit_variance(fixtures::geometric(0.5, InnovationSpace::normal(), 60)).sigma2, 4.0, 1e-12);
  EXPECT_EQ(refusal([] { (void)limit_variance(fixtures::coboundary()); }),
            RefusedComputation::Reason::DegenerateVariance);
  EXPECT_EQ(refusal([] { (void)limit_variance(fixtures::divergent()); }),
            RefusedComputation::Reason::DivergentReference);
}

TEST(CltTest, IidSingleStepIsExact) {
  const auto r = clt_test(fixtures::iid(InnovationSpace::normal()), 1, 5000, 3);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_TRUE(r[0].pass);
  EXPECT_EQ(r[0].reference, "normal(1)");
  EXPECT_FALSE(r[0].past_id.has_value());
}

TEST(CltTest, CalibrationOnIidNormal) {
  int reject = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    reject += !clt_test(fixtures::iid(InnovationSpace::normal()), 4, 1000, 1000 + s)[0].pass;
  }
  EXPECT_LE(reject, 8);
}

TEST(CltTest, GeometricModelPasses) {
  const auto m = fixtures::geometric(0.5, InnovationSpace::normal());
  CltOptions opt;
  opt.workers = 4;
  EXPECT_TRUE(clt_test(m, 1024, 5000, 17, {}, opt)[0].pass);
}

TEST(CltTest, QuenchedRunsOnePerPast) {
  const auto m = fixtures::two_sign_semilinear(0.5, 20);
  Engine rng(5);
  std::vector<Past> pasts;
  for (int i = 0; i < 3; ++i) pasts.push_back(draw_past(m, m.lag(), rng));
  CltOptions opt;
  opt.workers = 4;
  const auto r = clt_test(m, 256, 2000, 9, pasts, opt);
  ASSERT_EQ(r.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r[i].past_id, i);
}

TEST(CltTest, Refusals) {
  EXPECT_EQ(refusal([] { (void)clt_test(fixtures::divergent(), 100, 1000, 1); }),
            RefusedComputation::Reason::DivergentReference);
  EXPECT_EQ(refusal([] { (void)wip_sup_test(fixtures::coboundary(), 100, 1000, 1); }),
            RefusedComputation::Reason::DegenerateVariance);
  EXPECT_EQ(refusal([] { (void)wip_sup_test(CausalLinearModel(CoefficientSequence::power_law(0.9),
                                                             InnovationSpace::normal(), 5000),
                                            100, 1000, 1); }),
            RefusedComputation::Reason::DivergentReference);
}

TEST(WipSupTest, IidNormalPasses) {
  CltOptions opt;
  opt.workers = 4;
  const auto r = wip_sup_test(fixtures::iid(InnovationSpace::normal()), 4096, 20000, 77, opt);
  EXPECT_TRUE(r.pass) << r.statistic << " p=" << r.pvalue;
  EXPECT_EQ(r.reference, "bm_sup(1)");
}

TEST(Boundedness, Flags) {
  const std::vector<std::size_t> grid{10, 100, 1000};
  const auto iid = boundedness_diagnostic(fixtures::iid(), grid);
  EXPECT_EQ(iid.flag, BoundednessFlag::Stable);
  for (const auto& row : iid.rows) EXPECT_EQ(row.variance_ratio.value, 1.0);
  EXPECT_TRUE(std::isnan(iid.rows[0].quantile90));
  EXPECT_DOUBLE_EQ(iid.ratio_to_limit, 1.0);

  const auto geo = boundedness_diagnostic(fixtures::geometric(0.5, InnovationSpace::rademacher(), 60), grid);
  EXPECT_EQ(geo.flag, BoundednessFlag::Converging);
  EXPECT_LT(geo.ratio_to_limit, 1.0);
  EXPECT_GT(geo.ratio_to_limit, 0.99);

  const std::vector<std::size_t> wide{1000, 10000, 100000, 1000000};
  const auto div = boundedness_diagnostic(fixtures::divergent(), wide);
  EXPECT_EQ(div.flag, BoundednessFlag::Growth);
  EXPECT_GE(div.growth_ratio, 1.2);
  EXPECT_TRUE(std::isnan(div.ratio_to_limit));
}

TEST(Boundedness, EmpiricalQuantileOfIidNormal) {
  const std::vector<std::size_t> grid{64};
  BoundednessOptions opt;
  opt.replicates = 20000;
  opt.seed = 4;
  const auto r = boundedness_diagnostic(fixtures::iid(InnovationSpace::normal()), grid, opt);
  // 0.9-quantile of |Z| is the 0.95 normal quantile.
  EXPECT_NEAR(r.rows[0].quantile90, 1.6448536269514722, 0.04);
}

TEST(DriftDecay, GeometricDecreases) {
  std::vector<std::size_t> grid;
  for (unsigned e = 6; e <= 14; ++e) grid.push_back(std::size_t{1} << e);
  const auto rows = drift_decay(fixtures::geometric(0.5), grid, 2000, 3);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].value.value, rows[i - 1].value.value);
  EXPECT_LT(rows.back().value.value, rows.front().value.value / 4.0);
  // Beyond the lag the drift is frozen, so the value scales exactly as 1/n.
  EXPECT_NEAR(rows[1].value.value * 2.0, rows[0].value.value, 1e-12);
  EXPECT_THROW((void)drift_decay(fixtures::geometric(0.5), grid, 1, 3), InvalidArgument);
}
