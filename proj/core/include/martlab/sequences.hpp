#pragma once

// Coefficient sequences with analytic tail models, and the summability
// conditions evaluated on them.

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace martlab {

namespace tail {

/// Every term past the prefix is exactly zero.
struct FiniteSupport {};

/// u_i = scale * ratio^i, 0 < ratio < 1.
struct Geometric {
  double ratio = 0.5;
  double scale = 1.0;
};

/// u_i = scale * (i + 1)^(-exponent).
struct PowerLaw {
  double exponent = 1.0;
  double scale = 1.0;
};

/// u_i = scale * (i + 2)^(-exponent) * ln(i + 2)^(-log_exponent).
struct LogPowerLaw {
  double exponent = 1.0;
  double log_exponent = 1.0;
  double scale = 1.0;
};

/// u_i = 0 unless i = 2^k with k >= 1, where u_{2^k} = 2^(-k/2) k^(-exponent).
/// The k = 0 spike (i = 1) would be 0^(-exponent) and is taken to be 0.
struct DyadicSpikes {
  double exponent = 0.75;
};

/// Caller-supplied terms beyond the prefix. `tail_l2_bound(k)` must satisfy
/// sum_{i>=k} u_i^2 <= tail_l2_bound(k); without it nothing is certified.
struct Custom {
  std::function<double(std::size_t)> term;
  std::function<double(std::size_t)> tail_l2_bound;
};

}  // namespace tail

using TailModel = std::variant<tail::FiniteSupport, tail::Geometric, tail::PowerLaw,
                               tail::LogPowerLaw, tail::DyadicSpikes, tail::Custom>;

/// A real sequence u_0, u_1, ... given by an explicit prefix followed by a
/// tail model evaluated at the absolute index. The prefix overrides the
/// model's first `prefix().size()` terms.
class CoefficientSequence {
 public:
  CoefficientSequence(std::vector<double> prefix, TailModel tail);

  static CoefficientSequence finite(std::vector<double> values);
  static CoefficientSequence geometric(double ratio, double scale = 1.0);
  static CoefficientSequence power_law(double exponent, double scale = 1.0);
  static CoefficientSequence log_power_law(double exponent, double log_exponent,
                                           double scale = 1.0);
  static CoefficientSequence dyadic_spikes(double exponent);
  static CoefficientSequence custom(std::vector<double> prefix,
                                    std::function<double(std::size_t)> term = {},
                                    std::function<double(std::size_t)> tail_l2_bound = {});

  [[nodiscard]] double term(std::size_t i) const;
  [[nodiscard]] double operator[](std::size_t i) const { return term(i); }
  [[nodiscard]] std::vector<double> terms(std::size_t count) const;

  [[nodiscard]] const std::vector<double>& prefix() const noexcept { return prefix_; }
  [[nodiscard]] const TailModel& tail_model() const noexcept { return tail_; }

  [[nodiscard]] bool nonnegative() const noexcept { return nonnegative_; }
  /// Whether |u_i| is nonincreasing; nullopt when it cannot be decided.
  [[nodiscard]] std::optional<bool> nonincreasing() const;
  /// True for every tail model except Custom.
  [[nodiscard]] bool analytic() const noexcept;
  [[nodiscard]] bool has_certified_l2_tail() const noexcept;
  /// One past the last possibly-nonzero index, when the support is finite.
  [[nodiscard]] std::optional<std::size_t> support_end() const;

 private:
  [[nodiscard]] double model_term(std::size_t i) const;

  std::vector<double> prefix_;
  TailModel tail_;
  bool nonnegative_ = true;
};

/// sum_{i >= k} |u_i|^power. `exact` is false when only a certified
/// interval [value, upper] (or a midpoint estimate inside it) is known.
/// `value` and `upper` are +inf when the series diverges.
struct TailSum {
  double value = 0.0;
  double upper = 0.0;
  bool exact = true;
};

/// sum_{i>=k} u_i^2. Throws UncertifiedQuantity for Custom sequences with no
/// tail bound.
TailSum tail_l2(const CoefficientSequence& seq, std::size_t k);

/// sum_{i>=k} |u_i|^power for power > 0. Custom sequences are certified only
/// for power == 2.
TailSum tail_power(const CoefficientSequence& seq, std::size_t k, double power);

/// sum_{i>=k} u_i (signed), for the Gordin series and its Cauchy tails.
TailSum tail_signed(const CoefficientSequence& seq, std::size_t k);

enum class Condition { GL, H, MWstrong, LemmaSeriesLHS, RioSum };
enum class Classification { Converges, Diverges, Unknown };

std::string_view to_string(Condition c) noexcept;
std::string_view to_string(Classification c) noexcept;

struct PartialSum {
  std::size_t cutoff = 0;
  double value = 0.0;
};

struct ConditionVerdict {
  Condition condition = Condition::GL;
  double q = 0.0;  // exponent for LemmaSeriesLHS, 0 otherwise
  Classification classification = Classification::Unknown;
  std::vector<PartialSum> partial_sums;
  bool certified = false;
};

/// Dyadic cutoffs 2^min_log2 .. 2^max_log2 for the partial-sum diagnostics.
struct PartialSumGrid {
  unsigned min_log2 = 4;
  unsigned max_log2 = 20;
};

/// sum_k k u_k^2 < inf.
ConditionVerdict check_gl(const CoefficientSequence& seq, PartialSumGrid grid = {});
/// sum_k |u_k| < inf.
ConditionVerdict check_h(const CoefficientSequence& seq, PartialSumGrid grid = {});
/// sum_{k>=1} k^{-1/2} (sum_{i>=k} u_i^2)^{1/2} < inf.
ConditionVerdict check_mw(const CoefficientSequence& seq, PartialSumGrid grid = {});

/// sum_{k>0} (k^{-1} sum_{i>=k} |u_i|^q)^{1/q} for q > 1.
///
/// The verdict is cross-checked against check_h: a convergent left-hand side
/// forces a summable sequence, and for nonincreasing sequences the two
/// verdicts coincide. A violation throws std::logic_error.
ConditionVerdict lemma_series_lhs(const CoefficientSequence& seq, double q = 2.0,
                                  PartialSumGrid grid = {});

/// DyadicSpikes(b) for b in (1/2, 1): summable and square-summable with
/// weights k, yet failing the MW-strong condition.
CoefficientSequence counterexample_sequence(double b);

struct RioIntegral {
  double value = 0.0;
  Classification classification = Classification::Converges;
  std::size_t nodes_used = 0;
};

/// int_0^{alpha_k} Q(u)^2 du by composite Gauss-Legendre on the dyadic
/// pieces [alpha_k 2^{-j-1}, alpha_k 2^{-j}]. Q must be nonincreasing and is
/// only evaluated on (0, alpha_k]. When the pieces stop shrinking before the
/// node budget runs out the integral is classified Diverges.
RioIntegral rio_integral(double alpha_k, const std::function<double(double)>& quantile,
                         std::size_t node_budget = 4096);

/// sum_k int_0^{alpha(k)} Q^2. Certified Converges only when Q is bounded by
/// `quantile_bound` and the alpha sequence is certified summable; certified
/// Diverges when some piece diverges with alpha(k) > 0.
ConditionVerdict check_rio(const CoefficientSequence& alphas,
                           const std::function<double(double)>& quantile,
                           std::optional<double> quantile_bound = std::nullopt,
                           PartialSumGrid grid = {4, 12}, std::size_t node_budget = 4096);

}  // namespace martlab
