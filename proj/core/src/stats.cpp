#include "martlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "martlab/errors.hpp"
#include "martlab/simulate.hpp"

namespace martlab {

namespace {

double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void require_positive(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidArgument("reference variance must be positive");
}

std::string format_sigma2(double s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", s);
  return buf;
}

// Lower-tail quantile by partial sort; q in (0, 1).
double empirical_quantile(std::vector<double> v, double q) {
  const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

void refuse_if_divergent(const ProcessModel& model) {
  if (const auto* lin = std::get_if<CausalLinearModel>(&model)) {
    const auto& seq = lin->coefficients();
    if (seq.support_end()) return;
    const auto h = check_h(seq);
    if (h.classification == Classification::Diverges) {
      throw RefusedComputation(RefusedComputation::Reason::DivergentReference,
                               "projection norms are not summable; no Brownian reference law. "
                               "Use the boundedness diagnostic instead.");
    }
  }
}

}  // namespace

ReferenceLaw normal_reference(double sigma2) {
  require_positive(sigma2);
  const double sd = std::sqrt(sigma2);
  return {"normal(" + format_sigma2(sigma2) + ")", [sd](double x) { return phi_cdf(x / sd); }};
}

ReferenceLaw bm_sup_reference(double sigma2) {
  require_positive(sigma2);
  const double sd = std::sqrt(sigma2);
  return {"bm_sup(" + format_sigma2(sigma2) + ")",
          [sd](double x) { return x <= 0.0 ? 0.0 : 2.0 * phi_cdf(x / sd) - 1.0; }};
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // P(K <= x) = sqrt(2 pi) / x sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 x^2)).
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double t = std::exp(c * (2.0 * k - 1.0) * (2.0 * k - 1.0));
      s += t;
      if (t < 1e-300) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s, 0.0, 1.0);
  }
  // P(K > x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double t = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1) ? t : -t;
    if (t < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

GoodnessOfFitResult ks_test(std::vector<double> samples, const ReferenceLaw& reference, const KsOptions& options) {
  const std::size_t R = samples.size();
  if (R < options.min_samples) {
    throw InvalidArgument("KS test needs at least " + std::to_string(options.min_samples) + " samples, got " +
                          std::to_string(R));
  }
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  for (double x : samples) {
    if (!std::isfinite(x)) throw InvalidArgument("KS samples must be finite");
  }
  std::sort(samples.begin(), samples.end());
  const double r = static_cast<double>(R);
  double d = 0.0;
  std::size_t run = 1, longest = 1;
  for (std::size_t i = 0; i < R; ++i) {
    const double f = reference.cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / r - f, f - static_cast<double>(i) / r});
    if (i > 0) {
      run = samples[i] == samples[i - 1] ? run + 1 : 1;
      longest = std::max(longest, run);
    }
  }
  GoodnessOfFitResult out;
  out.reference = reference.tag;
  out.sample_size = R;
  out.statistic = d;
  out.pvalue = kolmogorov_survival(std::sqrt(r) * d);
  out.alpha = options.alpha;
  out.tie_fraction = longest > 1 ? static_cast<double>(longest) / r : 0.0;
  out.ties_flagged = out.tie_fraction > options.tie_tolerance;
  out.pass = out.pvalue >= options.alpha;
  return out;
}

LimitVariance limit_variance(const ProcessModel& model, const McOptions& mc) {
  LimitVariance out;
  out.increment = gordin_increment(model, full_truncation(model), mc);
  if (out.increment.divergent) {
    throw RefusedComputation(RefusedComputation::Reason::DivergentReference,
                             "the Gordin series diverges; there is no limiting normal law");
  }
  const auto& norm = out.increment.norm;
  out.sigma2 = norm.value * norm.value;
  out.se = 2.0 * norm.value * norm.se;
  if (!(out.sigma2 > 1e-12)) {
    throw RefusedComputation(RefusedComputation::Reason::DegenerateVariance,
                             "limit variance E D^2 is zero (coboundary); the normalized sums degenerate");
  }
  return out;
}

std::vector<GoodnessOfFitResult> clt_test(const ProcessModel& model, std::size_t n, std::size_t replicates,
                                          std::uint64_t seed, std::span<const Past> pasts,
                                          const CltOptions& options) {
  const auto lv = limit_variance(model, options.mc);
  const auto ref = normal_reference(lv.sigma2);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  BatchOptions batch;
  batch.workers = options.workers;
  auto run = [&](std::uint64_t s, std::optional<std::size_t> id) {
    auto sums = replicate_batch(model, n, replicates, s, batch).terminal_sums();
    for (auto& x : sums) x *= scale;
    auto res = ks_test(std::move(sums), ref, options.ks);
    res.past_id = id;
    return res;
  };
  std::vector<GoodnessOfFitResult> out;
  if (pasts.empty()) {
    out.push_back(run(seed, std::nullopt));
    return out;
  }
  for (std::size_t p = 0; p < pasts.size(); ++p) {
    batch.path.past = std::span<const double>(pasts[p]);
    out.push_back(run(substream_seed(seed, 0x7061737400ULL + p), p));
  }
  return out;
}

GoodnessOfFitResult wip_sup_test(const ProcessModel& model, std::size_t n, std::size_t replicates,
                                 std::uint64_t seed, const CltOptions& options) {
  refuse_if_divergent(model);
  const auto lv = limit_variance(model, options.mc);
  BatchOptions batch;
  batch.workers = options.workers;
  const auto b = replicate_batch(model, n, replicates, seed, batch);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> sups;
  sups.reserve(b.count());
  for (const auto& rec : b.records) sups.push_back(std::max(0.0, rec.max_s) * scale);
  return ks_test(std::move(sups), bm_sup_reference(lv.sigma2), options.ks);
}

std::string_view to_string(BoundednessFlag f) noexcept {
  switch (f) {
    case BoundednessFlag::Stable: return "Stable";
    case BoundednessFlag::Converging: return "Converging";
    case BoundednessFlag::Growth: return "Growth";
  }
  return "?";
}

BoundednessReport boundedness_diagnostic(const ProcessModel& model, std::span<const std::size_t> n_grid,
                                         const BoundednessOptions& options) {
  if (n_grid.empty()) throw InvalidArgument("boundedness grid is empty");
  BoundednessReport rep;
  for (std::size_t n : n_grid) {
    if (n == 0) throw InvalidArgument("horizon must be >= 1");
    BoundednessRow row;
    row.n = n;
    const auto v = exact_variance(model, n);
    const double nn = static_cast<double>(n);
    row.variance_ratio = {v.value / nn, v.err_bound / nn};
    row.quantile90 = std::numeric_limits<double>::quiet_NaN();
    if (options.replicates > 0) {
      BatchOptions batch;
      batch.workers = options.workers;
      auto sums = replicate_batch(model, n, options.replicates, substream_seed(options.seed, n), batch).terminal_sums();
      for (auto& x : sums) x = std::abs(x) / std::sqrt(nn);
      row.quantile90 = empirical_quantile(std::move(sums), 0.9);
    }
    rep.rows.push_back(row);
  }
  const double first = rep.rows.front().variance_ratio.value;
  const double last = rep.rows.back().variance_ratio.value;
  rep.growth_ratio = first > 0.0 ? last / first : std::numeric_limits<double>::quiet_NaN();
  bool increasing = rep.rows.size() > 1;
  bool constant = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const auto& a = rep.rows[i - 1].variance_ratio;
    const auto& b = rep.rows[i].variance_ratio;
    // Strict increase must survive the truncation intervals.
    if (!(b.lower() > a.upper())) increasing = false;
    if (std::abs(b.value - a.value) > 1e-12 * std::max(1.0, std::abs(a.value)) + a.err_bound + b.err_bound) {
      constant = false;
    }
  }
  if (increasing && rep.growth_ratio >= 1.2) {
    rep.flag = BoundednessFlag::Growth;
  } else if (constant) {
    rep.flag = BoundednessFlag::Stable;
  } else {
    rep.flag = BoundednessFlag::Converging;
  }
  rep.ratio_to_limit = std::numeric_limits<double>::quiet_NaN();
  try {
    const auto d = gordin_increment(model, full_truncation(model));
    const double limit = d.norm.value * d.norm.value;
    if (!d.divergent && limit > 0.0) rep.ratio_to_limit = last / limit;
  } catch (const UnsupportedModel&) {
  }
  return rep;
}

std::vector<DriftDecayRow> drift_decay(const ProcessModel& model, std::span<const std::size_t> n_grid,
                                       std::size_t pasts, std::uint64_t seed) {
  if (n_grid.empty()) throw InvalidArgument("drift grid is empty");
  if (pasts < 2) throw InvalidArgument("drift decay needs at least two pasts");
  if (std::find(n_grid.begin(), n_grid.end(), std::size_t{0}) != n_grid.end()) {
    throw InvalidArgument("horizon must be >= 1");
  }
  const std::size_t n_max = *std::max_element(n_grid.begin(), n_grid.end());
  const std::size_t L = required_past_depth(model);
  std::vector<CompensatedSum> sum(n_grid.size()), sum_sq(n_grid.size());
  Engine rng(seed);
  std::vector<double> running(n_max);
  for (std::size_t p = 0; p < pasts; ++p) {
    const auto past = draw_past(model, L, rng);
    const auto path = conditional_drift_path(model, n_max, past);
    double best = 0.0;
    for (std::size_t k = 0; k < n_max; ++k) {
      best = std::max(best, path[k] * path[k]);
      running[k] = best;
    }
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
      const double v = running[n_grid[g] - 1] / static_cast<double>(n_grid[g]);
      sum[g].add(v);
      sum_sq[g].add(v * v);
    }
  }
  const double c = static_cast<double>(pasts);
  std::vector<DriftDecayRow> out;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const double mean = sum[g].value() / c;
    const double var = std::max(0.0, (sum_sq[g].value() - c * mean * mean) / (c - 1.0));
    out.push_back({n_grid[g], {mean, std::sqrt(var / c)}});
  }
  return out;
}

}  // namespace martlab
