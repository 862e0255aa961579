#include "martlab/sequences.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "martlab/errors.hpp"
#include "martlab/numeric.hpp"

namespace martlab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Hurwitz zeta sum_{j>=0} (a + j)^{-s} for s > 1, a >= 1, by direct summation
// up to x >= 32 followed by Euler-Maclaurin with seven Bernoulli corrections.
double hurwitz_zeta(double s, double a) {
  CompensatedSum acc;
  double x = a;
  while (x < 32.0) {
    acc.add(std::pow(x, -s));
    x += 1.0;
  }
  static constexpr std::array<double, 7> kBernoulliOverFactorial = {
      1.0 / 6.0 / 2.0,
      -1.0 / 30.0 / 24.0,
      1.0 / 42.0 / 720.0,
      -1.0 / 30.0 / 40320.0,
      5.0 / 66.0 / 3628800.0,
      -691.0 / 2730.0 / 479001600.0,
      7.0 / 6.0 / 87178291200.0,
  };
  const double xs = std::pow(x, -s);
  acc.add(x * xs / (s - 1.0));
  acc.add(0.5 * xs);
  // d^{2m-1}/dx^{2m-1} x^{-s} = -s(s+1)...(s+2m-2) x^{-s-2m+1}
  double rising = s;
  double power = xs / x;
  for (std::size_t m = 0; m < kBernoulliOverFactorial.size(); ++m) {
    acc.add(kBernoulliOverFactorial[m] * rising * power);
    rising *= (s + 2.0 * m + 1.0) * (s + 2.0 * m + 2.0);
    power /= x * x;
  }
  return acc.value();
}

// Whether sum_i i^{-p} (ln i)^{-q} converges.
bool bertrand_converges(double p, double q) { return p > 1.0 || (p == 1.0 && q > 1.0); }

struct PowerLogShape {
  double p = 0.0;
  double q = 0.0;
};

std::optional<PowerLogShape> power_log_shape(const TailModel& t) {
  if (const auto* pl = std::get_if<tail::PowerLaw>(&t)) {
    if (pl->scale == 0.0) return std::nullopt;
    return PowerLogShape{pl->exponent, 0.0};
  }
  if (const auto* lp = std::get_if<tail::LogPowerLaw>(&t)) {
    if (lp->scale == 0.0) return std::nullopt;
    return PowerLogShape{lp->exponent, lp->log_exponent};
  }
  return std::nullopt;
}

bool trivially_summable(const TailModel& t) {
  return std::visit(Overloaded{
                        [](const tail::FiniteSupport&) { return true; },
                        [](const tail::Geometric&) { return true; },
                        [](const tail::PowerLaw& m) { return m.scale == 0.0; },
                        [](const tail::LogPowerLaw& m) { return m.scale == 0.0; },
                        [](const tail::DyadicSpikes&) { return false; },
                        [](const tail::Custom&) { return false; },
                    },
                    t);
}

// Smallest j >= 1 with 2^j >= k.
unsigned first_spike_at_or_after(std::size_t k) {
  unsigned j = 1;
  while (j < 63 && (std::size_t{1} << j) < k) ++j;
  return j;
}

TailSum log_power_tail(const tail::LogPowerLaw& m, std::size_t start, double s) {
  const double c = std::pow(std::abs(m.scale), s);
  const double sp = s * m.exponent;
  const double sq = s * m.log_exponent;
  if (!bertrand_converges(sp, sq)) return {kInf, kInf, true};
  auto f = [&](double x) { return c * std::pow(x + 2.0, -sp) * std::pow(std::log(x + 2.0), -sq); };
  constexpr std::size_t kDirect = 4096;
  CompensatedSum direct;
  for (std::size_t i = start; i < start + kDirect; ++i) direct.add(f(static_cast<double>(i)));
  const double edge = static_cast<double>(start + kDirect);
  double integral = 0.0;
  double integral_err = 0.0;
  if (sp == 1.0) {
    integral = c * std::pow(std::log(edge + 2.0), 1.0 - sq) / (sq - 1.0);
  } else {
    boost::math::quadrature::exp_sinh<double> integrator;
    double l1 = 0.0;
    integral = integrator.integrate([&](double t) { return f(edge + t); }, 0.0,
                                    std::numeric_limits<double>::infinity(), 1e-14,
                                    &integral_err, &l1);
  }
  // f decreasing: int_N^inf f <= sum_{i>=N} f(i) <= f(N) + int_N^inf f.
  const double fe = f(edge);
  const double base = direct.value() + integral;
  return {base + 0.5 * fe, inflate_ulps(base + fe + integral_err, kDirect), false};
}

TailSum model_tail_power(const TailModel& model, std::size_t start, double s) {
  return std::visit(
      Overloaded{
          [](const tail::FiniteSupport&) { return TailSum{0.0, 0.0, true}; },
          [&](const tail::Geometric& m) {
            const double rs = std::pow(m.ratio, s);
            const double v = std::pow(std::abs(m.scale), s) * std::pow(rs, static_cast<double>(start)) /
                             (1.0 - rs);
            return TailSum{v, v, true};
          },
          [&](const tail::PowerLaw& m) {
            if (m.scale == 0.0) return TailSum{0.0, 0.0, true};
            const double sp = s * m.exponent;
            if (sp <= 1.0) return TailSum{kInf, kInf, true};
            const double v =
                std::pow(std::abs(m.scale), s) * hurwitz_zeta(sp, static_cast<double>(start) + 1.0);
            return TailSum{v, v, true};
          },
          [&](const tail::LogPowerLaw& m) {
            if (m.scale == 0.0) return TailSum{0.0, 0.0, true};
            return log_power_tail(m, start, s);
          },
          [&](const tail::DyadicSpikes& m) {
            CompensatedSum acc;
            for (unsigned j = first_spike_at_or_after(start); j < 2200; ++j) {
              const double jd = static_cast<double>(j);
              const double t = std::exp2(-0.5 * s * jd) * std::pow(jd, -m.exponent * s);
              if (t == 0.0) break;
              acc.add(t);
            }
            const double v = acc.value();
            return TailSum{v, v, true};
          },
          [&](const tail::Custom& m) -> TailSum {
            if (s != 2.0 || !m.tail_l2_bound) {
              throw UncertifiedQuantity("custom sequence has no certified tail bound for power " +
                                        std::to_string(s));
            }
            const double b = m.tail_l2_bound(start);
            return TailSum{0.0, b, false};
          },
      },
      model);
}

void validate(const std::vector<double>& prefix, const TailModel& t) {
  for (double x : prefix) {
    if (!std::isfinite(x)) throw InvalidArgument("sequence prefix contains a non-finite value");
  }
  std::visit(Overloaded{
                 [](const tail::FiniteSupport&) {},
                 [](const tail::Geometric& m) {
                   if (!(m.ratio > 0.0 && m.ratio < 1.0))
                     throw InvalidArgument("Geometric tail requires 0 < r < 1");
                   if (!std::isfinite(m.scale)) throw InvalidArgument("Geometric scale must be finite");
                 },
                 [](const tail::PowerLaw& m) {
                   if (!(m.exponent > 0.0)) throw InvalidArgument("PowerLaw requires p > 0");
                   if (!(m.scale >= 0.0)) throw InvalidArgument("PowerLaw requires c >= 0");
                 },
                 [](const tail::LogPowerLaw& m) {
                   if (!(m.exponent > 0.0)) throw InvalidArgument("LogPowerLaw requires p > 0");
                   if (!(m.log_exponent >= 0.0)) throw InvalidArgument("LogPowerLaw requires q >= 0");
                   if (!(m.scale >= 0.0)) throw InvalidArgument("LogPowerLaw requires c >= 0");
                 },
                 [](const tail::DyadicSpikes& m) {
                   if (!(m.exponent > 0.5 && m.exponent < 1.0))
                     throw InvalidArgument("DyadicSpikes requires b in (1/2, 1)");
                 },
                 [](const tail::Custom&) {},
             },
             t);
}

std::vector<std::size_t> cutoffs(PartialSumGrid grid) {
  if (grid.min_log2 > grid.max_log2 || grid.max_log2 > 30) {
    throw InvalidArgument("partial-sum grid must satisfy min_log2 <= max_log2 <= 30");
  }
  std::vector<std::size_t> out;
  for (unsigned e = grid.min_log2; e <= grid.max_log2; ++e) out.push_back(std::size_t{1} << e);
  return out;
}

// Partial sums of summand(k) for k = first..max cutoff, sampled at the grid.
template <class Summand>
std::vector<PartialSum> partial_sums(PartialSumGrid grid, std::size_t first, Summand&& summand) {
  const auto cuts = cutoffs(grid);
  std::vector<PartialSum> out;
  out.reserve(cuts.size());
  CompensatedSum acc;
  std::size_t next = 0;
  for (std::size_t k = first; next < cuts.size(); ++k) {
    acc.add(summand(k));
    while (next < cuts.size() && cuts[next] == k) {
      out.push_back({k, acc.value()});
      ++next;
    }
  }
  return out;
}

// tails[k] = sum_{i>=k} |u_i|^s for k = 0..kmax, by backward recursion from
// the closed-form tail at kmax + 1.
std::vector<double> tails_up_to(const CoefficientSequence& seq, std::size_t kmax, double s) {
  std::vector<double> tails(kmax + 1);
  double start;
  try {
    start = tail_power(seq, kmax + 1, s).value;
  } catch (const UncertifiedQuantity&) {
    start = 0.0;  // raw truncation; verdict is Unknown anyway
  }
  CompensatedSum acc(start);
  for (std::size_t k = kmax + 1; k-- > 0;) {
    acc.add(std::pow(std::abs(seq.term(k)), s));
    tails[k] = acc.value();
  }
  return tails;
}

ConditionVerdict make_verdict(Condition c, double q, Classification cls, std::vector<PartialSum> ps,
                              bool analytic) {
  ConditionVerdict v;
  v.condition = c;
  v.q = q;
  v.partial_sums = std::move(ps);
  v.certified = analytic;
  v.classification = analytic ? cls : Classification::Unknown;
  return v;
}

Classification from_bool(bool converges) {
  return converges ? Classification::Converges : Classification::Diverges;
}

// Classification of sum_{k>0} (k^{-1} sum_{i>=k} |u_i|^q)^{1/q}; q = 2 is MW.
Classification lemma_classification(const CoefficientSequence& seq, double q) {
  const auto& t = seq.tail_model();
  if (trivially_summable(t)) return Classification::Converges;
  if (const auto* d = std::get_if<tail::DyadicSpikes>(&t)) {
    // Block l contributes ~ 2^{l(1/2 - 1/q)} l^{-b}.
    const double e = 0.5 - 1.0 / q;
    if (e < 0.0) return Classification::Converges;
    if (e > 0.0) return Classification::Diverges;
    return from_bool(d->exponent > 1.0);
  }
  if (auto shape = power_log_shape(t)) {
    // Tail of |u|^q is finite iff q p > 1 (or q p == 1, q q_log > 1); the
    // summand is then ~ k^{-p} (ln k)^{-q_log}.
    if (!bertrand_converges(q * shape->p, q * shape->q)) return Classification::Diverges;
    return from_bool(bertrand_converges(shape->p, shape->q));
  }
  return Classification::Unknown;
}

}  // namespace

// ---------------------------------------------------------------------------

CoefficientSequence::CoefficientSequence(std::vector<double> prefix, TailModel tail)
    : prefix_(std::move(prefix)), tail_(std::move(tail)) {
  validate(prefix_, tail_);
  nonnegative_ = std::all_of(prefix_.begin(), prefix_.end(), [](double x) { return x >= 0.0; });
  if (const auto* g = std::get_if<tail::Geometric>(&tail_)) nonnegative_ = nonnegative_ && g->scale >= 0.0;
  if (const auto* c = std::get_if<tail::Custom>(&tail_); c != nullptr && c->term) {
    for (std::size_t i = prefix_.size(); i < prefix_.size() + 64; ++i) {
      if (c->term(i) < 0.0) nonnegative_ = false;
    }
  }
}

CoefficientSequence CoefficientSequence::finite(std::vector<double> values) {
  return {std::move(values), tail::FiniteSupport{}};
}
CoefficientSequence CoefficientSequence::geometric(double ratio, double scale) {
  return {{}, tail::Geometric{ratio, scale}};
}
CoefficientSequence CoefficientSequence::power_law(double exponent, double scale) {
  return {{}, tail::PowerLaw{exponent, scale}};
}
CoefficientSequence CoefficientSequence::log_power_law(double exponent, double log_exponent,
                                                       double scale) {
  return {{}, tail::LogPowerLaw{exponent, log_exponent, scale}};
}
CoefficientSequence CoefficientSequence::dyadic_spikes(double exponent) {
  return {{}, tail::DyadicSpikes{exponent}};
}
CoefficientSequence CoefficientSequence::custom(std::vector<double> prefix,
                                                std::function<double(std::size_t)> term,
                                                std::function<double(std::size_t)> tail_l2_bound) {
  return {std::move(prefix), tail::Custom{std::move(term), std::move(tail_l2_bound)}};
}

double CoefficientSequence::model_term(std::size_t i) const {
  const double x = static_cast<double>(i);
  return std::visit(Overloaded{
                        [](const tail::FiniteSupport&) { return 0.0; },
                        [&](const tail::Geometric& m) { return m.scale * std::pow(m.ratio, x); },
                        [&](const tail::PowerLaw& m) { return m.scale * std::pow(x + 1.0, -m.exponent); },
                        [&](const tail::LogPowerLaw& m) {
                          return m.scale * std::pow(x + 2.0, -m.exponent) *
                                 std::pow(std::log(x + 2.0), -m.log_exponent);
                        },
                        [&](const tail::DyadicSpikes& m) {
                          if (i < 2 || (i & (i - 1)) != 0) return 0.0;
                          const double k = std::log2(x);
                          return std::exp2(-0.5 * k) * std::pow(k, -m.exponent);
                        },
                        [&](const tail::Custom& m) { return m.term ? m.term(i) : 0.0; },
                    },
                    tail_);
}

double CoefficientSequence::term(std::size_t i) const {
  return i < prefix_.size() ? prefix_[i] : model_term(i);
}

std::vector<double> CoefficientSequence::terms(std::size_t count) const {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = term(i);
  return out;
}

bool CoefficientSequence::analytic() const noexcept {
  return !std::holds_alternative<tail::Custom>(tail_);
}

bool CoefficientSequence::has_certified_l2_tail() const noexcept {
  if (const auto* c = std::get_if<tail::Custom>(&tail_)) return static_cast<bool>(c->tail_l2_bound);
  return true;
}

std::optional<std::size_t> CoefficientSequence::support_end() const {
  auto last_nonzero_prefix = [&]() -> std::size_t {
    std::size_t end = prefix_.size();
    while (end > 0 && prefix_[end - 1] == 0.0) --end;
    return end;
  };
  if (std::holds_alternative<tail::FiniteSupport>(tail_) || trivially_summable(tail_)) {
    if (const auto* g = std::get_if<tail::Geometric>(&tail_); g != nullptr && g->scale != 0.0) {
      return std::nullopt;
    }
    return last_nonzero_prefix();
  }
  return std::nullopt;
}

std::optional<bool> CoefficientSequence::nonincreasing() const {
  if (!analytic()) return std::nullopt;
  for (std::size_t i = 1; i < prefix_.size(); ++i) {
    if (std::abs(prefix_[i]) > std::abs(prefix_[i - 1])) return false;
  }
  if (std::holds_alternative<tail::DyadicSpikes>(tail_)) return false;
  // The remaining closed forms are nonincreasing in |.|; check the seam.
  const std::size_t m = prefix_.size();
  if (m > 0 && std::abs(model_term(m)) > std::abs(prefix_[m - 1])) return false;
  return true;
}

// ---------------------------------------------------------------------------

TailSum tail_power(const CoefficientSequence& seq, std::size_t k, double power) {
  if (!(power > 0.0)) throw InvalidArgument("tail_power requires power > 0");
  const auto& prefix = seq.prefix();
  CompensatedSum acc;
  std::size_t terms = 0;
  for (std::size_t i = k; i < prefix.size(); ++i, ++terms) acc.add(std::pow(std::abs(prefix[i]), power));
  const std::size_t start = std::max(k, prefix.size());
  TailSum model = model_tail_power(seq.tail_model(), start, power);
  const double head = acc.value();
  TailSum out;
  out.exact = model.exact;
  out.value = head + model.value;
  out.upper = model.exact ? out.value : inflate_ulps(head + model.upper, terms);
  return out;
}

TailSum tail_l2(const CoefficientSequence& seq, std::size_t k) { return tail_power(seq, k, 2.0); }

TailSum tail_signed(const CoefficientSequence& seq, std::size_t k) {
  const auto& prefix = seq.prefix();
  CompensatedSum acc;
  for (std::size_t i = k; i < prefix.size(); ++i) acc.add(prefix[i]);
  const std::size_t start = std::max(k, prefix.size());
  const auto& t = seq.tail_model();
  if (std::holds_alternative<tail::Custom>(t)) {
    throw UncertifiedQuantity("custom sequence has no certified first-power tail");
  }
  double sign = 1.0;
  if (const auto* g = std::get_if<tail::Geometric>(&t)) sign = g->scale < 0.0 ? -1.0 : 1.0;
  TailSum model = model_tail_power(t, start, 1.0);
  const double head = acc.value();
  TailSum out;
  out.exact = model.exact;
  out.value = head + sign * model.value;
  out.upper = head + sign * model.upper;
  if (out.upper < out.value) std::swap(out.upper, out.value);
  return out;
}

std::string_view to_string(Condition c) noexcept {
  switch (c) {
    case Condition::GL: return "GL";
    case Condition::H: return "H";
    case Condition::MWstrong: return "MW";
    case Condition::LemmaSeriesLHS: return "LemmaSeriesLHS";
    case Condition::RioSum: return "RioSum";
  }
  return "?";
}

std::string_view to_string(Classification c) noexcept {
  switch (c) {
    case Classification::Converges: return "Converges";
    case Classification::Diverges: return "Diverges";
    case Classification::Unknown: return "Unknown";
  }
  return "?";
}

ConditionVerdict check_gl(const CoefficientSequence& seq, PartialSumGrid grid) {
  auto ps = partial_sums(grid, 0, [&](std::size_t k) {
    const double u = seq.term(k);
    return static_cast<double>(k) * u * u;
  });
  Classification cls = Classification::Unknown;
  const auto& t = seq.tail_model();
  if (trivially_summable(t)) {
    cls = Classification::Converges;
  } else if (std::holds_alternative<tail::DyadicSpikes>(t)) {
    // sum_j 2^j u_{2^j}^2 = sum_j j^{-2b}, 2b > 1.
    cls = Classification::Converges;
  } else if (auto shape = power_log_shape(t)) {
    cls = from_bool(bertrand_converges(2.0 * shape->p - 1.0, 2.0 * shape->q));
  }
  return make_verdict(Condition::GL, 0.0, cls, std::move(ps), seq.analytic());
}

ConditionVerdict check_h(const CoefficientSequence& seq, PartialSumGrid grid) {
  auto ps = partial_sums(grid, 0, [&](std::size_t k) { return std::abs(seq.term(k)); });
  Classification cls = Classification::Unknown;
  const auto& t = seq.tail_model();
  if (trivially_summable(t) || std::holds_alternative<tail::DyadicSpikes>(t)) {
    cls = Classification::Converges;
  } else if (auto shape = power_log_shape(t)) {
    cls = from_bool(bertrand_converges(shape->p, shape->q));
  }
  return make_verdict(Condition::H, 0.0, cls, std::move(ps), seq.analytic());
}

namespace {

ConditionVerdict lhs_verdict(const CoefficientSequence& seq, double q, PartialSumGrid grid,
                             Condition tag) {
  const std::size_t kmax = cutoffs(grid).back();
  const auto tails = tails_up_to(seq, kmax, q);
  auto ps = partial_sums(grid, 1, [&](std::size_t k) {
    return std::pow(tails[k] / static_cast<double>(k), 1.0 / q);
  });
  return make_verdict(tag, tag == Condition::LemmaSeriesLHS ? q : 0.0, lemma_classification(seq, q),
                      std::move(ps), seq.analytic());
}

}  // namespace

ConditionVerdict check_mw(const CoefficientSequence& seq, PartialSumGrid grid) {
  return lhs_verdict(seq, 2.0, grid, Condition::MWstrong);
}

ConditionVerdict lemma_series_lhs(const CoefficientSequence& seq, double q, PartialSumGrid grid) {
  if (!(q > 1.0) || !std::isfinite(q)) throw InvalidArgument("lemma_series_lhs requires q in (1, inf)");
  auto v = lhs_verdict(seq, q, grid, Condition::LemmaSeriesLHS);
  if (v.certified) {
    const auto h = check_h(seq, {grid.min_log2, grid.min_log2});
    if (v.classification == Classification::Converges && h.classification == Classification::Diverges) {
      throw std::logic_error("lemma_series_lhs: convergent left-hand side with non-summable sequence");
    }
    if (seq.nonincreasing().value_or(false) && v.classification != h.classification) {
      throw std::logic_error("lemma_series_lhs: monotone sequence with mismatched verdicts");
    }
  }
  return v;
}

CoefficientSequence counterexample_sequence(double b) {
  if (!(b > 0.5 && b < 1.0)) throw InvalidArgument("counterexample_sequence requires b in (1/2, 1)");
  return CoefficientSequence::dyadic_spikes(b);
}

// ---------------------------------------------------------------------------

RioIntegral rio_integral(double alpha_k, const std::function<double(double)>& quantile,
                         std::size_t node_budget) {
  if (!(alpha_k >= 0.0 && alpha_k <= 1.0)) throw InvalidArgument("rio_integral requires alpha in [0, 1]");
  constexpr std::size_t kPoints = 20;
  using Rule = boost::math::quadrature::gauss<double, kPoints>;
  RioIntegral out;
  if (alpha_k == 0.0) return out;
  const std::size_t max_pieces = std::max<std::size_t>(node_budget / kPoints, 4);
  auto q2 = [&](double u) {
    const double q = quantile(u);
    return q * q;
  };
  CompensatedSum total;
  double hi = alpha_k;
  double prev = 0.0;
  double last = 0.0;
  std::size_t pieces = 0;
  bool settled = false;
  for (; pieces < max_pieces; ++pieces) {
    const double lo = 0.5 * hi;
    last = Rule::integrate(q2, lo, hi);
    if (!std::isfinite(last)) {
      out.value = kInf;
      out.classification = Classification::Diverges;
      out.nodes_used = (pieces + 1) * kPoints;
      return out;
    }
    total.add(last);
    hi = lo;
    if (pieces >= 8 && last <= 1e-17 * total.value()) {
      settled = true;
      ++pieces;
      break;
    }
    if (pieces + 1 < max_pieces) prev = last;
  }
  out.nodes_used = pieces * kPoints;
  if (settled || last == 0.0) {
    out.value = total.value();
    return out;
  }
  const double ratio = prev > 0.0 ? last / prev : 1.0;
  if (ratio >= 1.0 - 1e-9) {
    out.value = total.value();
    out.classification = Classification::Diverges;
    return out;
  }
  out.value = total.value() + last * ratio / (1.0 - ratio);
  return out;
}

ConditionVerdict check_rio(const CoefficientSequence& alphas,
                           const std::function<double(double)>& quantile,
                           std::optional<double> quantile_bound, PartialSumGrid grid,
                           std::size_t node_budget) {
  bool diverged = false;
  auto ps = partial_sums(grid, 0, [&](std::size_t k) {
    const double a = alphas.term(k);
    if (a < 0.0 || a > 1.0) throw InvalidArgument("alpha coefficients must lie in [0, 1]");
    const auto r = rio_integral(a, quantile, node_budget);
    if (r.classification == Classification::Diverges) diverged = true;
    return r.value;
  });
  ConditionVerdict v;
  v.condition = Condition::RioSum;
  v.partial_sums = std::move(ps);
  if (diverged) {
    v.classification = Classification::Diverges;
    v.certified = true;
  } else if (quantile_bound && std::isfinite(*quantile_bound)) {
    const auto h = check_h(alphas, {grid.min_log2, grid.min_log2});
    if (h.certified && h.classification == Classification::Converges) {
      v.classification = Classification::Converges;
      v.certified = true;
    }
  }
  return v;
}

}  // namespace martlab
