#include "martlab/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "kernel.hpp"
#include "martlab/errors.hpp"

namespace martlab {

MartingaleIncrement MartingaleApproximant::increment() const {
  if (!single_coordinate()) {
    throw UnsupportedModel("estimated Gordin increments are not functions of a single coordinate");
  }
  return {function, point_values};
}

namespace {

std::vector<MartingaleApproximant::CauchyPoint> cauchy_grid(std::size_t truncation,
                                                            const std::function<double(std::size_t, std::size_t)>& gap) {
  std::vector<MartingaleApproximant::CauchyPoint> out;
  for (std::size_t k = 1; 2 * k <= std::max<std::size_t>(truncation, 2); k *= 2) out.push_back({k, gap(k, 2 * k)});
  return out;
}

bool gordin_series_diverges(const CoefficientSequence& coeffs) {
  if (coeffs.support_end()) return false;
  try {
    return !std::isfinite(tail_signed(coeffs, 0).value);
  } catch (const UncertifiedQuantity&) {
    return false;
  }
}

MartingaleApproximant linear_increment(const CausalLinearModel& model, std::size_t truncation) {
  MartingaleApproximant d;
  d.representation = MartingaleApproximant::Representation::LinearScalar;
  d.truncation = truncation;
  const auto a = model.truncated();
  CompensatedSum c;
  for (std::size_t k = 0; k <= std::min(truncation, model.lag()); ++k) c.add(a[k]);
  d.coefficient = c.value();
  const double coef = d.coefficient;
  d.function = [coef](double x) { return coef * x; };
  for (double x : model.innovation().points()) d.point_values.push_back(coef * x);
  const double sd = std::sqrt(model.innovation().variance());
  d.norm = {std::abs(coef) * sd, 0.0};
  const auto& seq = model.coefficients();
  d.cauchy = cauchy_grid(truncation, [&](std::size_t lo, std::size_t hi) {
    CompensatedSum s;
    for (std::size_t k = lo + 1; k <= hi; ++k) s.add(seq.term(k));
    return std::abs(s.value()) * sd;
  });
  d.divergent = gordin_series_diverges(seq);
  return d;
}

MartingaleApproximant semilinear_increment(const SemiLinearModel& model, std::size_t truncation,
                                           const McOptions& mc) {
  MartingaleApproximant d;
  d.truncation = truncation;
  const std::size_t top = std::min(truncation, model.lag());
  if (!model.linear_coefficients().empty()) {
    d.representation = MartingaleApproximant::Representation::LinearScalar;
    const auto& a = model.linear_coefficients();
    d.coefficient = compensated_total(std::span(a).first(top + 1));
    const double coef = d.coefficient;
    d.function = [coef](double x) { return coef * x; };
    const double sd = std::sqrt(model.space().variance());
    d.norm = {std::abs(coef) * sd, 0.0};
    d.cauchy = cauchy_grid(truncation, [&](std::size_t lo, std::size_t hi) {
      CompensatedSum s;
      for (std::size_t k = lo + 1; k <= std::min(hi, model.lag()); ++k) s.add(a[k]);
      return std::abs(s.value()) * sd;
    });
    return d;
  }
  d.representation = MartingaleApproximant::Representation::SemiLinearFunction;
  if (model.tabulated()) {
    const std::size_t M = model.space().size();
    std::vector<CompensatedSum> acc(M);
    for (std::size_t k = 0; k <= top; ++k) {
      for (std::size_t m = 0; m < M; ++m) acc[m].add(model.alpha_at_index(k, static_cast<std::uint32_t>(m)));
    }
    for (const auto& s : acc) d.point_values.push_back(s.value());
    d.norm = {std::sqrt(model.space().second_moment(d.point_values)), 0.0};
    auto space = model.space();
    d.function = [space, values = d.point_values](double x) { return values[space.index_of(x)]; };
    d.cauchy = cauchy_grid(truncation, [&](std::size_t lo, std::size_t hi) {
      std::vector<double> diff(M, 0.0);
      for (std::size_t k = lo + 1; k <= std::min(hi, model.lag()); ++k) {
        for (std::size_t m = 0; m < M; ++m) diff[m] += model.alpha_at_index(k, static_cast<std::uint32_t>(m));
      }
      return std::sqrt(model.space().second_moment(diff));
    });
    return d;
  }
  auto owned = std::make_shared<const SemiLinearModel>(model);
  d.function = [owned, top](double x) {
    CompensatedSum s;
    for (std::size_t k = 0; k <= top; ++k) s.add(owned->alpha(k, x));
    return s.value();
  };
  // ||d||_2 by plain Monte Carlo over one coordinate.
  Engine rng(mc.seed);
  CompensatedSum sum, sum_sq;
  const std::size_t draws = std::max<std::size_t>(mc.outer * mc.inner, 2);
  for (std::size_t r = 0; r < draws; ++r) {
    const double v = d.function(model.space().draw_value(rng));
    sum.add(v * v);
    sum_sq.add(v * v * v * v);
  }
  const double mean = sum.value() / static_cast<double>(draws);
  const double var = std::max(0.0, sum_sq.value() / static_cast<double>(draws) - mean * mean);
  const double se_sq = std::sqrt(var / static_cast<double>(draws));
  const double norm = std::sqrt(mean);
  d.norm = {norm, norm > 0.0 ? se_sq / (2.0 * norm) : std::sqrt(se_sq)};
  return d;
}

// ||D_N||_2 for a Hoelder model: for each drawn past, two independent inner
// means of sum_{k<=N} [f(Y_k) - f(Y_k')] (Y' with omega_0 resampled, same
// futures) multiply to an unbiased estimate of D_N(past)^2.
MartingaleApproximant holder_increment(const HolderModel& model, std::size_t truncation,
                                       const McOptions& mc) {
  if (mc.outer < 2 || mc.inner < 1) throw InvalidArgument("Monte Carlo budget too small");
  const auto& base = model.base();
  const auto& f = model.function();
  const std::size_t L = base.lag();
  const std::size_t top = std::min(truncation, L);
  MartingaleApproximant d;
  d.representation = MartingaleApproximant::Representation::Estimated;
  d.truncation = truncation;

  const auto& space = base.space();
  std::vector<double> deep(top + 1);
  std::vector<double> own(top + 1);
  std::vector<std::uint32_t> fut_idx(top + 1);
  std::vector<double> fut_val(top + 1);
  std::vector<std::uint32_t> past_idx(L + 1);
  std::vector<double> past_val(L + 1);
  auto alpha_future = [&](std::size_t j, std::size_t pos) {
    return base.tabulated() ? base.alpha_at_index(j, fut_idx[pos]) : base.alpha(j, fut_val[pos]);
  };
  auto alpha_past = [&](std::size_t j, std::size_t t) {
    return base.tabulated() ? base.alpha_at_index(j, past_idx[t]) : base.alpha(j, past_val[t]);
  };

  Engine rng(substream_seed(mc.seed, 0x6d61727469ULL));
  auto inner_mean = [&]() {
    CompensatedSum s;
    for (std::size_t r = 0; r < mc.inner; ++r) {
      for (std::size_t i = 1; i <= top; ++i) {
        if (base.tabulated()) {
          fut_idx[i] = space.draw_index(rng);
        } else {
          fut_val[i] = space.draw_value(rng);
        }
      }
      std::uint32_t other_idx = 0;
      double other_val = 0.0;
      if (base.tabulated()) {
        other_idx = space.draw_index(rng);
      } else {
        other_val = space.draw_value(rng);
      }
      double total = 0.0;
      for (std::size_t k = 0; k <= top; ++k) {
        double fk = 0.0;
        for (std::size_t j = 0; j < k; ++j) fk += alpha_future(j, k - j);
        const double other = base.tabulated() ? base.alpha_at_index(k, other_idx) : base.alpha(k, other_val);
        total += f(fk + own[k] + deep[k]) - f(fk + other + deep[k]);
      }
      s.add(total);
    }
    return s.value() / static_cast<double>(mc.inner);
  };

  CompensatedSum sum, sum_sq;
  for (std::size_t r = 0; r < mc.outer; ++r) {
    for (std::size_t t = 0; t <= L; ++t) {
      if (base.tabulated()) {
        past_idx[t] = space.draw_index(rng);
      } else {
        past_val[t] = space.draw_value(rng);
      }
    }
    // Y_k = sum_{j<k} alpha_j(omega_{k-j}) + alpha_k(omega_0) + sum_{j>k} alpha_j(omega_{k-j}).
    for (std::size_t k = 0; k <= top; ++k) {
      own[k] = alpha_past(k, 0);
      double b = 0.0;
      for (std::size_t j = k + 1; j <= L; ++j) b += alpha_past(j, j - k);
      deep[k] = b;
    }
    const double prod = inner_mean() * inner_mean();
    sum.add(prod);
    sum_sq.add(prod * prod);
  }
  const double c = static_cast<double>(mc.outer);
  const double mean = sum.value() / c;
  const double var = std::max(0.0, (sum_sq.value() - c * mean * mean) / (c - 1.0));
  const double se_sq = std::sqrt(var / c);
  const double norm = std::sqrt(std::max(mean, 0.0));
  d.norm = {norm, norm > 0.0 ? se_sq / (2.0 * norm) : std::sqrt(se_sq)};
  return d;
}

std::vector<double> kernel_increment(const detail::LagKernel& kernel, const MartingaleApproximant& d) {
  if (kernel.width() == 1) {
    if (d.representation != MartingaleApproximant::Representation::LinearScalar) {
      throw InvalidArgument("martingale approximant does not match a linear model");
    }
    return {d.coefficient};
  }
  if (d.point_values.size() != kernel.width()) {
    throw InvalidArgument("martingale approximant does not match the model's support");
  }
  return d.point_values;
}

OracleValue ma_exact(const ProcessModel& model, const MartingaleApproximant& d, std::size_t n, bool past) {
  if (n == 0) throw InvalidArgument("horizon must be >= 1");
  const auto kernel = detail::LagKernel::from(model);
  const auto dv = kernel_increment(kernel, d);
  const double value = kernel.coordinate_sum(n, dv, past);
  const auto wide = detail::LagKernel::widen(value, static_cast<double>(n) * std::sqrt(kernel.tail_bound()));
  const double nn = static_cast<double>(n);
  return {wide.value / nn, wide.err_bound / nn};
}

}  // namespace

MartingaleApproximant gordin_increment(const ProcessModel& model, std::size_t truncation, const McOptions& mc) {
  if (const auto* lin = std::get_if<CausalLinearModel>(&model)) return linear_increment(*lin, truncation);
  if (const auto* semi = std::get_if<SemiLinearModel>(&model)) return semilinear_increment(*semi, truncation, mc);
  return holder_increment(std::get<HolderModel>(model), truncation, mc);
}

std::size_t full_truncation(const ProcessModel& model) noexcept { return model_lag(model); }

OracleValue ma_error_exact(const ProcessModel& model, const MartingaleApproximant& d, std::size_t n) {
  return ma_exact(model, d, n, true);
}

OracleValue ma_error_exact_centered(const ProcessModel& model, const MartingaleApproximant& d, std::size_t n) {
  return ma_exact(model, d, n, false);
}

std::string_view to_string(Functional f) noexcept {
  switch (f) {
    case Functional::MA: return "MA";
    case Functional::MMA: return "MMA";
    case Functional::MA0: return "MA0";
    case Functional::MMA0: return "MMA0";
  }
  return "?";
}

std::string_view to_string(Method m) noexcept {
  return m == Method::ExactOracle ? "exact_oracle" : "monte_carlo";
}

ApproximationEntry ma_error_mc(const ProcessModel& model, const MartingaleApproximant& d, std::size_t n,
                               std::size_t replicates, std::uint64_t seed, bool maximal,
                               std::optional<std::span<const double>> past, const MaMcOptions& options) {
  const MartingaleIncrement inc = d.increment();
  BatchOptions batch_opt;
  batch_opt.workers = options.workers;
  batch_opt.model_id = options.model_id;
  batch_opt.path.martingale = &inc;
  batch_opt.path.past = past;
  batch_opt.path.centered = options.centered;
  const auto batch = replicate_batch(model, n, replicates, seed, batch_opt);

  const double nn = static_cast<double>(n);
  CompensatedSum sum, sum_sq;
  for (const auto& rec : batch.records) {
    const double dev = maximal ? rec.max_abs_dev : rec.dev_n;
    const double z = dev * dev / nn;
    sum.add(z);
    sum_sq.add(z * z);
  }
  const double c = static_cast<double>(replicates);
  const double mean = sum.value() / c;
  const double var = replicates > 1 ? std::max(0.0, (sum_sq.value() - c * mean * mean) / (c - 1.0)) : 0.0;

  ApproximationEntry e;
  e.functional = past ? (maximal ? Functional::MMA0 : Functional::MA0) : (maximal ? Functional::MMA : Functional::MA);
  e.n = n;
  e.value = mean;
  e.se = std::sqrt(var / c);
  e.method = Method::MonteCarlo;
  e.past_id = options.past_id;
  e.truncation = d.truncation;
  return e;
}

double criterion3_statistic(const ProcessModel& model, std::size_t N, std::size_t n) {
  if (n == 0) throw InvalidArgument("horizon must be >= 1");
  const auto kernel = detail::LagKernel::from(model);
  const std::size_t L = kernel.lag();
  CompensatedSum total;
  // gamma_N(i) = sum_{j >= i+N} <alpha_{j-i}, alpha_j>, zero once i + N > L.
  for (std::size_t i = 1; i < n && i + N <= L; ++i) {
    CompensatedSum gamma;
    for (std::size_t j = i + N; j <= L; ++j) gamma.add(kernel.inner(j - i, j));
    total.add(static_cast<double>(n - i) * gamma.value());
  }
  return total.value() / static_cast<double>(n);
}

double cpcond_statistic(const ProcessModel& model, std::size_t N) {
  if (const auto* lin = std::get_if<CausalLinearModel>(&model)) {
    const auto& seq = lin->coefficients();
    const double var = lin->innovation().variance();
    if (gordin_series_diverges(seq)) return kInf;
    if (seq.nonnegative() && seq.analytic()) {
      // Nonnegative terms: the tails decrease, so the supremum sits at k = N.
      const double t = tail_signed(seq, N).value;
      return var * t * t;
    }
  }
  const auto kernel = detail::LagKernel::from(model);
  const std::size_t L = kernel.lag();
  const std::size_t W = kernel.width();
  if (N > L) return 0.0;
  std::vector<CompensatedSum> suffix(W);
  std::vector<double> best(W, 0.0);
  for (std::size_t k = L + 1; k-- > N;) {
    const auto row = kernel.row(k);
    for (std::size_t m = 0; m < W; ++m) {
      suffix[m].add(row[m]);
      const double v = suffix[m].value();
      best[m] = std::max(best[m], v * v);
    }
  }
  CompensatedSum total;
  for (std::size_t m = 0; m < W; ++m) total.add(kernel.weights()[m] * best[m]);
  return total.value();
}

}  // namespace martlab
