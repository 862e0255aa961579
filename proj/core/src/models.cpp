#include "martlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "kernel.hpp"
#include "martlab/errors.hpp"

namespace martlab {

namespace {

void require_centered_innovation(const InnovationSpace& space) {
  if (!(space.variance() > 0.0)) throw InvalidArgument("innovation variance must be > 0");
  if (std::abs(space.mean()) > 1e-12 * std::sqrt(space.variance())) {
    throw InvalidArgument("innovation must be centered");
  }
}

std::size_t default_lag(const CoefficientSequence& coeffs) {
  if (auto end = coeffs.support_end()) return *end == 0 ? 0 : *end - 1;
  const double total = tail_l2(coeffs, 0).upper;
  if (!std::isfinite(total)) throw InvalidArgument("coefficients are not square-summable");
  if (total == 0.0) return 0;
  const double target = CausalLinearModel::kDefaultRelativeTail * total;
  const std::size_t cap = CausalLinearModel::kMaxDefaultLag + 1;
  auto small = [&](std::size_t k) { return tail_l2(coeffs, k).upper <= target; };
  std::size_t hi = 1;
  while (hi < cap && !small(hi)) hi = std::min(hi * 2, cap);
  if (!small(hi)) return cap - 1;
  std::size_t lo = hi / 2;  // small(lo) is false or lo == 0
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (small(mid) ? hi : lo) = mid;
  }
  return hi - 1;
}

// alpha_j evaluated at coordinates held as point values, resolving support
// indices once for tabulated models.
class CoordinateView {
 public:
  CoordinateView(const SemiLinearModel& model, std::span<const double> values) : model_(model) {
    if (model.tabulated()) {
      idx_.reserve(values.size());
      for (double x : values) idx_.push_back(model.space().index_of(x));
    } else {
      values_.assign(values.begin(), values.end());
    }
  }

  [[nodiscard]] double alpha(std::size_t j, std::size_t pos) const {
    if (j > model_.lag()) return 0.0;
    return model_.tabulated() ? model_.alpha_at_index(j, idx_[pos]) : model_.alpha(j, values_[pos]);
  }

 private:
  const SemiLinearModel& model_;
  std::vector<std::uint32_t> idx_;
  std::vector<double> values_;
};

/// alpha_j at a fresh coordinate.
double draw_alpha(const SemiLinearModel& base, std::size_t j, Engine& rng) {
  if (base.tabulated()) return base.alpha_at_index(j, base.space().draw_index(rng));
  return base.alpha(j, base.space().draw_value(rng));
}

Estimate mean_and_se(const CompensatedSum& sum, const CompensatedSum& sum_sq, std::size_t count) {
  const double c = static_cast<double>(count);
  const double mean = sum.value() / c;
  if (count < 2) return {mean, 0.0};
  const double var = std::max(0.0, (sum_sq.value() - c * mean * mean) / (c - 1.0));
  return {mean, std::sqrt(var / c)};
}

void require_depth(std::span<const double> past, std::size_t depth) {
  if (past.size() < depth) throw InsufficientPast(depth, past.size());
}

// Semi-linear form of the exact families (linear models become W = 1 views).
SemiLinearModel exact_semilinear(const ProcessModel& model) {
  if (const auto* lin = std::get_if<CausalLinearModel>(&model)) return semilinear_view(*lin);
  return std::get<SemiLinearModel>(model);
}

}  // namespace

// ---------------------------------------------------------------------------

CausalLinearModel::CausalLinearModel(CoefficientSequence coeffs, InnovationSpace innovation,
                                     std::optional<std::size_t> lag)
    : coeffs_(std::move(coeffs)), innovation_(std::move(innovation)) {
  require_centered_innovation(innovation_);
  const std::size_t L = lag ? *lag : default_lag(coeffs_);
  if (L > (std::size_t{1} << 26)) throw ResourceLimit("truncation lag exceeds 2^26");
  truncated_ = coeffs_.terms(L + 1);
  for (double a : truncated_) {
    if (!std::isfinite(a)) throw InvalidArgument("coefficient is not finite");
  }
  try {
    tail_bound_ = tail_l2(coeffs_, L + 1).upper;
  } catch (const UncertifiedQuantity&) {
    if (!lag) throw;
    tail_bound_ = kInf;
  }
  if (!lag && !std::isfinite(tail_bound_)) throw InvalidArgument("coefficients are not square-summable");
}

// ---------------------------------------------------------------------------

SemiLinearModel::SemiLinearModel(InnovationSpace space, std::vector<std::vector<double>> table,
                                 double tail_bound)
    : space_(std::move(space)), table_(std::move(table)), tail_bound_(tail_bound) {
  if (!space_.is_discrete()) throw InvalidArgument("tabulated semi-linear model needs a discrete space");
  if (table_.empty()) throw InvalidArgument("semi-linear table needs at least one lag");
  if (!(tail_bound_ >= 0.0)) throw InvalidArgument("tail bound must be >= 0");
  norms_.reserve(table_.size());
  for (std::size_t j = 0; j < table_.size(); ++j) {
    const auto& row = table_[j];
    if (row.size() != space_.size()) {
      throw InvalidArgument("alphas[" + std::to_string(j) + "] has " + std::to_string(row.size()) +
                            " entries, space has " + std::to_string(space_.size()));
    }
    double scale = 1.0;
    for (double v : row) {
      if (!std::isfinite(v)) throw InvalidArgument("alphas[" + std::to_string(j) + "] is not finite");
      scale = std::max(scale, std::abs(v));
    }
    if (std::abs(space_.expectation(row)) > 1e-12 * scale) {
      throw InvalidArgument("alphas[" + std::to_string(j) + "] is not centered under mu");
    }
    norms_.push_back(std::sqrt(space_.second_moment(row)));
  }
}

SemiLinearModel SemiLinearModel::functional(InnovationSpace space, std::vector<AlphaFunction> alphas,
                                            std::vector<double> l2_norms, double tail_bound,
                                            std::vector<double> linear_coefficients) {
  if (alphas.empty() || alphas.size() != l2_norms.size()) {
    throw InvalidArgument("functional semi-linear model needs one norm per alpha");
  }
  if (!linear_coefficients.empty()) {
    if (linear_coefficients.size() != alphas.size()) {
      throw InvalidArgument("linear coefficients must match the alphas");
    }
    require_centered_innovation(space);
  }
  if (!(tail_bound >= 0.0)) throw InvalidArgument("tail bound must be >= 0");
  for (double v : l2_norms) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("alpha norms must be finite and >= 0");
  }
  SemiLinearModel m;
  m.space_ = std::move(space);
  m.functions_ = std::move(alphas);
  m.norms_ = std::move(l2_norms);
  m.linear_ = std::move(linear_coefficients);
  m.tail_bound_ = tail_bound;
  return m;
}

double SemiLinearModel::alpha(std::size_t j, double x) const {
  if (j > lag()) return 0.0;
  if (tabulated()) return table_[j][space_.index_of(x)];
  return functions_[j](x);
}

std::vector<double> SemiLinearModel::holder_norms(double gamma) const {
  std::vector<double> out(norms_.size());
  if (tabulated()) {
    std::vector<double> powered(space_.size());
    for (std::size_t j = 0; j < table_.size(); ++j) {
      for (std::size_t m = 0; m < powered.size(); ++m) powered[m] = std::pow(std::abs(table_[j][m]), gamma);
      out[j] = std::sqrt(space_.second_moment(powered));
    }
    return out;
  }
  if (!linear_.empty()) {
    const double moment = std::sqrt(space_.abs_moment(2.0 * gamma));
    for (std::size_t j = 0; j < linear_.size(); ++j) out[j] = std::pow(std::abs(linear_[j]), gamma) * moment;
    return out;
  }
  throw UnsupportedModel("Hoelder norms of general functional alphas are not available");
}

// ---------------------------------------------------------------------------

HolderFunction::HolderFunction(Kind kind, double gamma, double scale, double constant,
                               std::function<double(double)> custom)
    : kind_(kind), gamma_(gamma), scale_(scale), constant_(constant), custom_(std::move(custom)) {
  if (!(gamma_ > 0.0 && gamma_ <= 1.0)) throw InvalidArgument("Hoelder exponent must lie in (0, 1]");
}

HolderFunction HolderFunction::abs_power(double gamma) {
  return {Kind::AbsPower, gamma, 1.0, 1.0, {}};
}

HolderFunction HolderFunction::soft_clip(double gamma, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("soft clip scale must be > 0");
  return {Kind::SoftClip, gamma, scale, std::exp2(1.0 - gamma), {}};
}

HolderFunction HolderFunction::custom(std::function<double(double)> f, double gamma, double constant) {
  if (!f) throw InvalidArgument("custom Hoelder function is empty");
  if (!(constant > 0.0) || !std::isfinite(constant)) throw InvalidArgument("Hoelder constant must be > 0");
  HolderFunction h(Kind::Custom, gamma, 1.0, constant, std::move(f));
  constexpr int kGrid = 401;
  std::vector<double> xs(kGrid), fx(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    xs[i] = -10.0 + 20.0 * i / (kGrid - 1);
    fx[i] = h(xs[i]);
  }
  for (int i = 0; i < kGrid; ++i) {
    for (int j = i + 1; j < kGrid; ++j) {
      const double bound = constant * std::pow(xs[j] - xs[i], gamma);
      if (std::abs(fx[j] - fx[i]) > bound * (1.0 + 1e-12) + 1e-15) {
        throw InvalidArgument("custom function violates the claimed Hoelder bound at x=" +
                              std::to_string(xs[i]) + ", y=" + std::to_string(xs[j]));
      }
    }
  }
  return h;
}

double HolderFunction::operator()(double y) const {
  switch (kind_) {
    case Kind::AbsPower:
      return gamma_ == 1.0 ? std::abs(y) : std::pow(std::abs(y), gamma_);
    case Kind::SoftClip: {
      const double g = scale_ * std::tanh(std::abs(y) / scale_);
      const double v = gamma_ == 1.0 ? g : std::pow(g, gamma_);
      return y < 0.0 ? -v : v;
    }
    case Kind::Custom:
      return custom_(y);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

namespace {

// E f(Y_0) for a tabulated base: exact over the first `head` lags, plus a
// coupled Monte Carlo correction E[f(H + T) - f(H)] for the remaining lags.
Estimate tabulated_centering(const SemiLinearModel& base, const HolderFunction& f,
                             const CenteringOptions& opt) {
  const std::size_t M = base.space().size();
  const std::size_t rows = base.lag() + 1;
  std::size_t head = 0;
  for (std::size_t configs = 1; head < rows && configs <= opt.enumeration_limit / M; ++head) configs *= M;
  if (head == 0) head = std::min<std::size_t>(1, rows);

  const auto probs = base.space().probs();
  CompensatedSum exact;
  // Depth-first enumeration of the head lags with running partial sums.
  std::vector<std::uint32_t> choice(head, 0);
  std::vector<double> partial(head + 1, 0.0), weight(head + 1, 1.0);
  std::size_t depth = 0;
  while (true) {
    if (depth == head) {
      exact.add(weight[head] * f(partial[head]));
      while (depth > 0 && ++choice[depth - 1] == M) choice[--depth] = 0;
      if (depth == 0) break;
      --depth;
    }
    const std::uint32_t m = choice[depth];
    partial[depth + 1] = partial[depth] + base.alpha_at_index(depth, m);
    weight[depth + 1] = weight[depth] * probs[m];
    ++depth;
  }
  if (head == rows) return {exact.value(), 0.0};

  Engine rng(opt.seed);
  CompensatedSum sum, sum_sq;
  for (std::size_t r = 0; r < opt.draws; ++r) {
    double h = 0.0, t = 0.0;
    for (std::size_t j = 0; j < head; ++j) h += draw_alpha(base, j, rng);
    for (std::size_t j = head; j < rows; ++j) t += draw_alpha(base, j, rng);
    const double diff = f(h + t) - f(h);
    sum.add(diff);
    sum_sq.add(diff * diff);
  }
  const Estimate corr = mean_and_se(sum, sum_sq, opt.draws);
  return {exact.value() + corr.value, corr.se};
}

Estimate sampled_centering(const SemiLinearModel& base, const HolderFunction& f,
                           const CenteringOptions& opt) {
  Engine rng(opt.seed);
  CompensatedSum sum, sum_sq;
  for (std::size_t r = 0; r < opt.draws; ++r) {
    double y = 0.0;
    for (std::size_t j = 0; j <= base.lag(); ++j) y += draw_alpha(base, j, rng);
    const double v = f(y);
    sum.add(v);
    sum_sq.add(v * v);
  }
  return mean_and_se(sum, sum_sq, opt.draws);
}

}  // namespace

HolderModel::HolderModel(SemiLinearModel base, HolderFunction f, CenteringOptions centering)
    : base_(std::move(base)), f_(std::move(f)) {
  if (centering.draws < 2) throw InvalidArgument("centering needs at least 2 draws");
  centering_ = base_.tabulated() ? tabulated_centering(base_, f_, centering)
                                 : sampled_centering(base_, f_, centering);
}

// ---------------------------------------------------------------------------

std::size_t model_lag(const ProcessModel& model) noexcept {
  return std::visit([](const auto& m) { return m.lag(); }, model);
}

const InnovationSpace& model_space(const ProcessModel& model) noexcept {
  if (const auto* lin = std::get_if<CausalLinearModel>(&model)) return lin->innovation();
  if (const auto* semi = std::get_if<SemiLinearModel>(&model)) return semi->space();
  return std::get<HolderModel>(model).base().space();
}

std::size_t required_past_depth(const ProcessModel& model) noexcept { return model_lag(model); }

bool has_exact_oracles(const ProcessModel& model) noexcept {
  if (std::holds_alternative<CausalLinearModel>(model)) return true;
  if (const auto* semi = std::get_if<SemiLinearModel>(&model)) {
    return semi->tabulated() || !semi->linear_coefficients().empty();
  }
  return false;
}

SemiLinearModel linear_as_semilinear(const CausalLinearModel& model) {
  const auto& space = model.innovation();
  if (!space.is_discrete()) {
    throw UnsupportedModel("linear_as_semilinear needs a discrete innovation space (got " + space.tag() + ")");
  }
  const auto a = model.truncated();
  const auto x = space.points();
  std::vector<std::vector<double>> table(a.size(), std::vector<double>(x.size()));
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (std::size_t m = 0; m < x.size(); ++m) table[j][m] = a[j] * x[m];
  }
  return {space, std::move(table), model.tail_bound() * space.variance()};
}

SemiLinearModel semilinear_view(const CausalLinearModel& model) {
  if (model.innovation().is_discrete()) return linear_as_semilinear(model);
  const auto a = model.truncated();
  const double sd = std::sqrt(model.innovation().variance());
  std::vector<AlphaFunction> fs;
  std::vector<double> norms;
  fs.reserve(a.size());
  for (double aj : a) {
    fs.emplace_back([aj](double x) { return aj * x; });
    norms.push_back(std::abs(aj) * sd);
  }
  return SemiLinearModel::functional(model.innovation(), std::move(fs), std::move(norms),
                                     model.tail_bound() * model.innovation().variance(),
                                     std::vector<double>(a.begin(), a.end()));
}

std::vector<double> projection_norms(const ProcessModel& model, std::size_t count) {
  std::vector<double> out(count, 0.0);
  if (const auto* lin = std::get_if<CausalLinearModel>(&model)) {
    const double sd = std::sqrt(lin->innovation().variance());
    const auto a = lin->truncated();
    for (std::size_t i = 0; i < std::min(count, a.size()); ++i) out[i] = std::abs(a[i]) * sd;
    return out;
  }
  if (const auto* semi = std::get_if<SemiLinearModel>(&model)) {
    const auto& norms = semi->lag_norms();
    std::copy_n(norms.begin(), std::min(count, norms.size()), out.begin());
    return out;
  }
  throw UnsupportedModel("projection norms of Hoelder models are estimated; use p0_projection");
}

// ---------------------------------------------------------------------------

namespace {

Projection holder_projection(const HolderModel& model, std::size_t i, const McOptions& mc) {
  const auto& base = model.base();
  const std::size_t L = base.lag();
  Projection p;
  p.lag = i;
  p.exact = false;
  if (i > L) {
    // Y_i does not involve omega_0.
    p.exact = true;
    p.function = [](double) { return 0.0; };
    p.estimator = [](std::span<const double>, std::uint64_t) { return Estimate{}; };
    p.norm = {};
    return p;
  }
  if (mc.outer < 2 || mc.inner < 1) throw InvalidArgument("Monte Carlo budget too small");

  // Inner mean over futures omega_1..omega_i and an independent omega_0',
  // given alpha_i(omega_0) and the deep-past part of Y_i.
  auto owned = std::make_shared<const HolderModel>(model);
  auto inner_mean = [owned, i, inner = mc.inner](double own, double deep, Engine& rng) {
    const auto& base = owned->base();
    const auto& f = owned->function();
    CompensatedSum sum, sum_sq;
    for (std::size_t r = 0; r < inner; ++r) {
      double future = 0.0;
      for (std::size_t j = 0; j < i; ++j) future += draw_alpha(base, j, rng);
      const double other = draw_alpha(base, i, rng);
      const double v = f(future + own + deep) - f(future + other + deep);
      sum.add(v);
      sum_sq.add(v * v);
    }
    return mean_and_se(sum, sum_sq, inner);
  };

  p.estimator = [inner_mean, owned, i, L](std::span<const double> past, std::uint64_t seed) {
    const auto& base = owned->base();
    require_depth(past, L + 1 - i);
    double deep = 0.0;
    for (std::size_t j = i + 1; j <= L; ++j) deep += base.alpha(j, past[j - i]);
    Engine rng(seed);
    return inner_mean(base.alpha(i, past[0]), deep, rng);
  };

  Engine rng(substream_seed(mc.seed, i));
  CompensatedSum sum, sum_sq;
  for (std::size_t r = 0; r < mc.outer; ++r) {
    const double own = draw_alpha(base, i, rng);
    double deep = 0.0;
    for (std::size_t j = i + 1; j <= L; ++j) deep += draw_alpha(base, j, rng);
    const double m1 = inner_mean(own, deep, rng).value;
    const double m2 = inner_mean(own, deep, rng).value;
    const double prod = m1 * m2;
    sum.add(prod);
    sum_sq.add(prod * prod);
  }
  const Estimate sq = mean_and_se(sum, sum_sq, mc.outer);
  const double norm = std::sqrt(std::max(sq.value, 0.0));
  const double se = norm > 0.0 ? sq.se / (2.0 * norm) : std::sqrt(sq.se);
  p.norm = {norm, std::max(se, std::sqrt(std::max(0.0, sq.value + sq.se)) - norm)};
  p.low_precision = !(p.norm.se <= 0.1 * norm);
  return p;
}

}  // namespace

Projection p0_projection(const ProcessModel& model, std::size_t i, const McOptions& mc) {
  if (const auto* holder = std::get_if<HolderModel>(&model)) return holder_projection(*holder, i, mc);

  Projection p;
  p.lag = i;
  p.exact = true;
  if (const auto* lin = std::get_if<CausalLinearModel>(&model)) {
    const double a = i <= lin->lag() ? lin->truncated()[i] : 0.0;
    p.function = [a](double x) { return a * x; };
    for (double x : lin->innovation().points()) p.point_values.push_back(a * x);
    p.norm = {std::abs(a) * std::sqrt(lin->innovation().variance()), 0.0};
  } else {
    const auto& semi = std::get<SemiLinearModel>(model);
    if (semi.tabulated()) {
      if (i <= semi.lag()) {
        const auto row = semi.row(i);
        p.point_values.assign(row.begin(), row.end());
      } else {
        p.point_values.assign(semi.space().size(), 0.0);
      }
    }
    p.function = [semi, i](double x) { return semi.alpha(i, x); };
    p.norm = {i <= semi.lag() ? semi.lag_norms()[i] : 0.0, 0.0};
  }
  p.estimator = [f = p.function](std::span<const double> past, std::uint64_t) {
    require_depth(past, 1);
    return Estimate{f(past[0]), 0.0};
  };
  return p;
}

OracleValue exact_variance(const ProcessModel& model, std::size_t n) {
  if (n == 0) throw InvalidArgument("horizon must be >= 1");
  const auto kernel = detail::LagKernel::from(model);
  const double value = kernel.coordinate_sum(n, {}, true);
  return detail::LagKernel::widen(value, static_cast<double>(n) * std::sqrt(kernel.tail_bound()));
}

std::vector<double> conditional_drift_path(const ProcessModel& model, std::size_t n,
                                           std::span<const double> past) {
  if (std::holds_alternative<HolderModel>(model)) {
    throw UnsupportedModel("exact conditional drift needs a linear or semi-linear model");
  }
  const std::size_t L = model_lag(model);
  require_depth(past, L);
  const SemiLinearModel semi = exact_semilinear(model);
  const CoordinateView coords(semi, past.first(L));
  std::vector<double> path(n, 0.0);
  CompensatedSum s;
  // E(X_i | F_0) = sum_{t=0}^{L-i} alpha_{i+t}(omega_{-t}), zero for i > L.
  for (std::size_t i = 1; i <= n; ++i) {
    if (i <= L) {
      CompensatedSum e;
      for (std::size_t t = 0; t + i <= L; ++t) e.add(coords.alpha(i + t, t));
      s.add(e.value());
    }
    path[i - 1] = s.value();
  }
  return path;
}

namespace {

// Monte Carlo mean path k -> E(S_k | F_0) for a Hoelder model over futures.
std::vector<Estimate> holder_drift_path(const HolderModel& model, std::size_t n,
                                        std::span<const double> past, const McOptions& mc) {
  const auto& base = model.base();
  const std::size_t L = base.lag();
  require_depth(past, L);
  if (mc.outer < 2) throw InvalidArgument("Monte Carlo budget too small");
  // Contribution of the pinned coordinates to Y_k for k = 1..L.
  std::vector<double> pinned(std::min(n, L) + 1, 0.0);
  {
    const CoordinateView coords(base, past.first(L));
    for (std::size_t k = 1; k < pinned.size(); ++k) {
      for (std::size_t t = 0; t + k <= L; ++t) pinned[k] += coords.alpha(k + t, t);
    }
  }
  std::vector<CompensatedSum> sum(n), sum_sq(n);
  std::vector<double> fresh(n + 1);  // fresh[k] = omega_k as alpha-ready view
  std::vector<std::uint32_t> idx(n + 1);
  Engine rng(mc.seed);
  for (std::size_t r = 0; r < mc.outer; ++r) {
    for (std::size_t k = 1; k <= n; ++k) {
      if (base.tabulated()) {
        idx[k] = base.space().draw_index(rng);
      } else {
        fresh[k] = base.space().draw_value(rng);
      }
    }
    double s = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      double y = k < pinned.size() ? pinned[k] : 0.0;
      for (std::size_t j = 0; j <= L && j < k; ++j) {
        y += base.tabulated() ? base.alpha_at_index(j, idx[k - j]) : base.alpha(j, fresh[k - j]);
      }
      s += model.transform(y);
      sum[k - 1].add(s);
      sum_sq[k - 1].add(s * s);
    }
  }
  std::vector<Estimate> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = mean_and_se(sum[k], sum_sq[k], mc.outer);
  return out;
}

}  // namespace

Estimate conditional_expectation_S(const ProcessModel& model, std::size_t n,
                                   std::span<const double> past, const McOptions& mc) {
  if (n == 0) throw InvalidArgument("horizon must be >= 1");
  if (const auto* holder = std::get_if<HolderModel>(&model)) {
    return holder_drift_path(*holder, n, past, mc).back();
  }
  return {conditional_drift_path(model, n, past).back(), 0.0};
}

Estimate max_conditional_drift(const ProcessModel& model, std::size_t n,
                               std::span<const double> past, const McOptions& mc) {
  if (n == 0) throw InvalidArgument("horizon must be >= 1");
  if (const auto* holder = std::get_if<HolderModel>(&model)) {
    const auto path = holder_drift_path(*holder, n, past, mc);
    const auto it = std::max_element(path.begin(), path.end(), [](const Estimate& a, const Estimate& b) {
      return std::abs(a.value) < std::abs(b.value);
    });
    return {std::abs(it->value), it->se};
  }
  double best = 0.0;
  for (double v : conditional_drift_path(model, n, past)) best = std::max(best, std::abs(v));
  return {best, 0.0};
}

Past draw_past(const ProcessModel& model, std::size_t depth, Engine& rng) {
  const auto& space = model_space(model);
  Past past(depth);
  for (auto& x : past) x = space.draw_value(rng);
  return past;
}

}  // namespace martlab
