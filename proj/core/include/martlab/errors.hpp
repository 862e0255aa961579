#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace martlab {

/// Invalid parameters for a sequence, space, or model.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The operation has no implementation for this model family or space kind.
class UnsupportedModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quantity was requested that is not certified (e.g. exact tail of a
/// Custom sequence with no tail bound).
class UncertifiedQuantity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The pinned past is too short for the model's lag.
class InsufficientPast : public std::invalid_argument {
 public:
  InsufficientPast(std::size_t required, std::size_t given)
      : std::invalid_argument("past configuration has depth " + std::to_string(given) +
                              ", model requires at least " + std::to_string(required)),
        required_(required) {}

  [[nodiscard]] std::size_t required_depth() const noexcept { return required_; }

 private:
  std::size_t required_;
};

/// The computation is refused because no reference law exists (divergent
/// Gordin series, degenerate limit variance).
class RefusedComputation : public std::runtime_error {
 public:
  enum class Reason { DivergentReference, DegenerateVariance };

  RefusedComputation(Reason reason, const std::string& what)
      : std::runtime_error(what), reason_(reason) {}

  [[nodiscard]] Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

/// A resource guard tripped (horizon x lag overflow, replicate memory budget).
class ResourceLimit : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace martlab
