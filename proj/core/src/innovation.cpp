#include "martlab/innovation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/normal_distribution.hpp>

#include "martlab/errors.hpp"
#include "martlab/numeric.hpp"

namespace martlab {

InnovationSpace InnovationSpace::discrete(std::vector<double> points, std::vector<double> probs) {
  if (points.empty() || points.size() != probs.size()) {
    throw InvalidArgument("discrete space needs matching, nonempty points and probabilities");
  }
  if (points.size() > (std::size_t{1} << 24)) throw InvalidArgument("discrete space too large");
  CompensatedSum total;
  for (std::size_t m = 0; m < points.size(); ++m) {
    if (!std::isfinite(points[m])) throw InvalidArgument("discrete point must be finite");
    if (!(probs[m] >= 0.0)) throw InvalidArgument("discrete probabilities must be nonnegative");
    total.add(probs[m]);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw InvalidArgument("discrete probabilities must sum to 1 (got " + std::to_string(total.value()) +
                          ")");
  }
  {
    auto sorted = points;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw InvalidArgument("discrete points must be distinct");
    }
  }
  InnovationSpace s;
  s.kind_ = Kind::Discrete;
  s.points_ = std::move(points);
  s.probs_ = std::move(probs);
  s.cumulative_.resize(s.probs_.size());
  CompensatedSum run;
  for (std::size_t m = 0; m < s.probs_.size(); ++m) {
    run.add(s.probs_[m]);
    s.cumulative_[m] = run.value();
  }
  s.cumulative_.back() = 1.0;
  const std::size_t sz = s.points_.size();
  s.uniform_weights_ = std::all_of(s.probs_.begin(), s.probs_.end(),
                                   [&](double p) { return p == 1.0 / static_cast<double>(sz); });
  if (s.uniform_weights_ && (sz & (sz - 1)) == 0) {
    while ((std::size_t{1} << s.uniform_bits_) < sz) ++s.uniform_bits_;
  } else {
    s.uniform_weights_ = false;
  }
  s.mean_ = s.expectation(s.points_);
  CompensatedSum var;
  for (std::size_t m = 0; m < sz; ++m) {
    const double d = s.points_[m] - s.mean_;
    var.add(s.probs_[m] * d * d);
  }
  s.variance_ = var.value();
  return s;
}

InnovationSpace InnovationSpace::rademacher() { return discrete({-1.0, 1.0}, {0.5, 0.5}); }

InnovationSpace InnovationSpace::normal(double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) throw InvalidArgument("normal variance must be > 0");
  InnovationSpace s;
  s.kind_ = Kind::Normal;
  s.variance_ = variance;
  s.param_ = variance;
  s.sd_ = std::sqrt(variance);
  return s;
}

InnovationSpace InnovationSpace::uniform(double half_width) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw InvalidArgument("uniform half width must be > 0");
  }
  InnovationSpace s;
  s.kind_ = Kind::Uniform;
  s.variance_ = half_width * half_width / 3.0;
  s.param_ = half_width;
  return s;
}

std::string InnovationSpace::tag() const {
  switch (kind_) {
    case Kind::Discrete: return "discrete";
    case Kind::Normal: return "normal";
    case Kind::Uniform: return "uniform";
  }
  return "?";
}

double InnovationSpace::abs_moment(double r) const {
  switch (kind_) {
    case Kind::Discrete: {
      CompensatedSum acc;
      for (std::size_t m = 0; m < points_.size(); ++m) acc.add(probs_[m] * std::pow(std::abs(points_[m]), r));
      return acc.value();
    }
    case Kind::Normal:
      // E|Z|^r = 2^{r/2} Gamma((r+1)/2) / sqrt(pi)
      return std::pow(variance_, 0.5 * r) * std::exp2(0.5 * r) * boost::math::tgamma(0.5 * (r + 1.0)) /
             std::sqrt(std::numbers::pi);
    case Kind::Uniform:
      return std::pow(param_, r) / (r + 1.0);
  }
  return 0.0;
}

std::uint32_t InnovationSpace::index_of(double x) const {
  for (std::size_t m = 0; m < points_.size(); ++m) {
    if (points_[m] == x) return static_cast<std::uint32_t>(m);
  }
  throw InvalidArgument("value " + std::to_string(x) + " is not a support point of the innovation space");
}

double InnovationSpace::expectation(std::span<const double> values) const {
  CompensatedSum acc;
  for (std::size_t m = 0; m < probs_.size(); ++m) acc.add(probs_[m] * values[m]);
  return acc.value();
}

double InnovationSpace::second_moment(std::span<const double> values) const {
  CompensatedSum acc;
  for (std::size_t m = 0; m < probs_.size(); ++m) acc.add(probs_[m] * values[m] * values[m]);
  return acc.value();
}

std::uint32_t InnovationSpace::draw_index(Engine& rng) const {
  if (uniform_weights_) {
    if (uniform_bits_ == 0) return 0;
    return static_cast<std::uint32_t>(rng() >> (64 - uniform_bits_));
  }
  const double u = std::generate_canonical<double, 53>(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = static_cast<std::size_t>(it - cumulative_.begin());
  return static_cast<std::uint32_t>(std::min(idx, cumulative_.size() - 1));
}

double InnovationSpace::draw_value(Engine& rng) const {
  switch (kind_) {
    case Kind::Discrete:
      return points_[draw_index(rng)];
    case Kind::Normal: {
      boost::random::normal_distribution<double> nd(0.0, sd_);
      return nd(rng);
    }
    case Kind::Uniform: {
      const double u = std::generate_canonical<double, 53>(rng);
      return param_ * (2.0 * u - 1.0);
    }
  }
  return 0.0;
}

}  // namespace martlab
