#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace martlab {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double init) : sum_(init) {}

  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  /// Merges another accumulator; the result does not depend on which side
  /// carried the larger magnitude.
  void merge(const CompensatedSum& other) noexcept {
    add(other.sum_);
    add(other.comp_);
  }

  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) noexcept {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

/// A Monte Carlo (or exact, with se == 0) scalar.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// An exact oracle value plus a certified bound on truncation error.
struct OracleValue {
  double value = 0.0;
  double err_bound = 0.0;

  [[nodiscard]] double lower() const noexcept { return value - err_bound; }
  [[nodiscard]] double upper() const noexcept { return value + err_bound; }
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Inflates x upward by `ulps` units in the last place.
inline double inflate_ulps(double x, std::size_t ulps) noexcept {
  for (std::size_t i = 0; i < ulps && std::isfinite(x); ++i) {
    x = std::nextafter(x, kInf);
  }
  return x;
}

}  // namespace martlab
