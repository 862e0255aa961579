#include "kernel.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include "martlab/errors.hpp"

namespace martlab::detail {

LagKernel LagKernel::linear(std::span<const double> coeffs, double variance, double tail_bound) {
  LagKernel k;
  k.rows_ = coeffs.size();
  k.table_.assign(coeffs.begin(), coeffs.end());
  k.weights_ = {variance};
  k.tail_bound_ = variance * tail_bound;
  return k;
}

LagKernel LagKernel::from(const ProcessModel& model) {
  if (const auto* lin = std::get_if<CausalLinearModel>(&model)) {
    return linear(lin->truncated(), lin->innovation().variance(), lin->tail_bound());
  }
  if (const auto* semi = std::get_if<SemiLinearModel>(&model)) {
    if (semi->tabulated()) {
      LagKernel k;
      k.rows_ = semi->lag() + 1;
      const auto probs = semi->space().probs();
      k.weights_.assign(probs.begin(), probs.end());
      k.table_.reserve(k.rows_ * k.weights_.size());
      for (const auto& row : semi->table()) k.table_.insert(k.table_.end(), row.begin(), row.end());
      k.tail_bound_ = semi->tail_bound();
      return k;
    }
    if (!semi->linear_coefficients().empty()) {
      return linear(semi->linear_coefficients(), semi->space().variance(),
                    semi->tail_bound() / semi->space().variance());
    }
    throw UnsupportedModel("functional semi-linear model without linear coefficients has no exact lag table");
  }
  throw UnsupportedModel("Hoelder models have no exact lag table (Monte Carlo only)");
}

double LagKernel::norm2(std::span<const double> v) const noexcept {
  CompensatedSum acc;
  for (std::size_t m = 0; m < weights_.size(); ++m) acc.add(weights_[m] * v[m] * v[m]);
  return acc.value();
}

double LagKernel::inner(std::size_t j, std::size_t k) const noexcept {
  const auto a = row(j);
  const auto b = row(k);
  CompensatedSum acc;
  for (std::size_t m = 0; m < weights_.size(); ++m) acc.add(weights_[m] * a[m] * b[m]);
  return acc.value();
}

namespace {

class CompensatedVector {
 public:
  explicit CompensatedVector(std::size_t width) : acc_(width) {}

  void add(std::span<const double> v) {
    for (std::size_t m = 0; m < acc_.size(); ++m) acc_[m].add(v[m]);
  }
  void store(std::span<double> out) const {
    for (std::size_t m = 0; m < acc_.size(); ++m) out[m] = acc_[m].value();
  }

 private:
  std::vector<CompensatedSum> acc_;
};

}  // namespace

double LagKernel::coordinate_sum(std::size_t n, std::span<const double> d, bool include_past) const {
  const std::size_t w = width();
  const std::size_t L = lag();
  std::vector<double> zero(w, 0.0);
  if (d.empty()) d = zero;

  CompensatedSum total;
  std::vector<double> p(w), diff(w);
  CompensatedVector prefix(w);
  // Coordinates m = 1..n, with s = n - m running over 0..n-1.
  for (std::size_t s = 0; s < n; ++s) {
    if (s <= L) {
      prefix.add(row(s));
      prefix.store(p);
    }
    for (std::size_t m = 0; m < w; ++m) diff[m] = p[m] - d[m];
    const double term = norm2(diff);
    if (s >= L) {
      // P(s) is constant from here on.
      total.add(static_cast<double>(n - s) * term);
      break;
    }
    total.add(term);
  }
  if (!include_past || L == 0) return total.value();

  // Coordinates m = -t for t = 0..L-1 contribute alpha_{t+1} + ... + alpha_{min(n+t, L)},
  // written as a difference of suffix sums Q(t+1) - Q(n+t+1).
  std::vector<double> suffix((L + 2) * w, 0.0);
  CompensatedVector run(w);
  for (std::size_t j = L + 1; j-- > 0;) {
    run.add(row(j));
    run.store(std::span<double>(suffix.data() + j * w, w));
  }
  for (std::size_t t = 0; t < L; ++t) {
    const std::size_t hi = std::min(n + t + 1, L + 1);
    for (std::size_t m = 0; m < w; ++m) diff[m] = suffix[(t + 1) * w + m] - suffix[hi * w + m];
    total.add(norm2(diff));
  }
  return total.value();
}

OracleValue LagKernel::widen(double value, double delta) noexcept {
  if (delta == 0.0) return {value, 0.0};
  if (!std::isfinite(delta)) return {value, kInf};
  const double s = std::sqrt(std::max(value, 0.0));
  const double upper = (s + delta) * (s + delta);
  return {value, upper - value};
}

}  // namespace martlab::detail
