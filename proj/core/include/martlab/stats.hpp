#pragma once

// Kolmogorov-Smirnov goodness of fit against the limiting laws, and the
// boundedness and drift diagnostics built on the exact oracles.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "martlab/martingale.hpp"
#include "martlab/models.hpp"

namespace martlab {

struct ReferenceLaw {
  std::string tag;
  std::function<double(double)> cdf;
};

/// Phi(x / sigma).
ReferenceLaw normal_reference(double sigma2);
/// Law of sigma * sup_{t<=1} W_t: 2 Phi(x / sigma) - 1 for x >= 0, 0 below.
ReferenceLaw bm_sup_reference(double sigma2);

/// P(K > x) for the Kolmogorov limit law K of sqrt(R) D_R.
double kolmogorov_survival(double x);

struct GoodnessOfFitResult {
  std::string test = "KS";
  std::string reference;
  std::size_t sample_size = 0;
  double statistic = 0.0;
  double pvalue = 1.0;
  double alpha = 0.01;
  bool pass = false;
  /// Largest group of equal samples, as a fraction of the sample size.
  double tie_fraction = 0.0;
  bool ties_flagged = false;
  std::optional<std::size_t> past_id;
};

struct KsOptions {
  double alpha = 0.01;
  /// Samples in one tied group beyond this fraction flag the result. The
  /// decision itself uses only the p-value.
  double tie_tolerance = 0.01;
  std::size_t min_samples = 1000;
};

/// Two-sided KS statistic sup_x |F_R(x) - F(x)| with the asymptotic
/// Kolmogorov p-value. Throws InvalidArgument below `min_samples`.
GoodnessOfFitResult ks_test(std::vector<double> samples, const ReferenceLaw& reference,
                            const KsOptions& options = {});

struct LimitVariance {
  double sigma2 = 0.0;
  /// Monte Carlo standard error of sigma2; 0 for the exact oracle.
  double se = 0.0;
  MartingaleApproximant increment;
};

/// E D^2 for the full Gordin increment. Throws RefusedComputation when the
/// Gordin series diverges or the variance is zero.
LimitVariance limit_variance(const ProcessModel& model, const McOptions& mc = {});

struct CltOptions {
  KsOptions ks;
  std::size_t workers = 1;
  McOptions mc;
};

/// KS of S_n / sqrt(n) against N(0, E D^2). With pasts, one test per pinned
/// past (futures averaged, past fixed), tagged with the past's index.
std::vector<GoodnessOfFitResult> clt_test(const ProcessModel& model, std::size_t n, std::size_t replicates,
                                          std::uint64_t seed, std::span<const Past> pasts = {},
                                          const CltOptions& options = {});

/// KS of n^{-1/2} max(0, max_k S_k) against the Brownian supremum law.
/// Refuses when the projection norms are not summable.
GoodnessOfFitResult wip_sup_test(const ProcessModel& model, std::size_t n, std::size_t replicates,
                                 std::uint64_t seed, const CltOptions& options = {});

enum class BoundednessFlag { Stable, Converging, Growth };
[[nodiscard]] std::string_view to_string(BoundednessFlag f) noexcept;

struct BoundednessRow {
  std::size_t n = 0;
  OracleValue variance_ratio;  // Var(S_n) / n
  double quantile90 = 0.0;     // empirical 0.9-quantile of |S_n| / sqrt(n); NaN when not sampled
};

struct BoundednessReport {
  std::vector<BoundednessRow> rows;
  BoundednessFlag flag = BoundednessFlag::Stable;
  double growth_ratio = 1.0;  // last / first variance ratio
  /// Last variance ratio over E D^2; NaN when the limit is zero or infinite.
  double ratio_to_limit = 0.0;
};

struct BoundednessOptions {
  /// Replicates for the empirical quantiles; 0 skips sampling.
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

BoundednessReport boundedness_diagnostic(const ProcessModel& model, std::span<const std::size_t> n_grid,
                                         const BoundednessOptions& options = {});

/// n^{-1} E[max_{k<=n} E(S_k | F_0)^2], averaged over pasts drawn from the
/// product measure with the exact drift at each past.
struct DriftDecayRow {
  std::size_t n = 0;
  Estimate value;
};

std::vector<DriftDecayRow> drift_decay(const ProcessModel& model, std::span<const std::size_t> n_grid,
                                       std::size_t pasts, std::uint64_t seed);

}  // namespace martlab
