#pragma once

// JSON forms of sequences, spaces, models and pasts; CSV writers for the
// documented output schemas.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "martlab/martingale.hpp"
#include "martlab/models.hpp"
#include "martlab/sequences.hpp"
#include "martlab/simulate.hpp"
#include "martlab/stats.hpp"

namespace martlab::io {

using nlohmann::json;

inline constexpr std::string_view kVersion = "0.1.0";

/// A malformed document. `path()` names the offending field, e.g.
/// "$.model.space.probs[2]".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  [[nodiscard]] const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// {"prefix": [...], "tail": {"kind": "...", "params": {...}}}. Kinds:
/// finite, geometric, power_law, log_power_law, dyadic_spikes, custom.
/// Custom tails carry no term function in JSON, so their verdicts are Unknown.
json to_json(const CoefficientSequence& seq);
CoefficientSequence sequence_from_json(const json& j, const std::string& path = "$");

/// {"kind": "rademacher"} | {"kind": "normal", "variance": v} |
/// {"kind": "uniform", "half_width": h} |
/// {"kind": "discrete", "points": [...], "probs": [...]}.
json to_json(const InnovationSpace& space);
InnovationSpace space_from_json(const json& j, const std::string& path = "$");

/// {"family": "linear|semilinear|holder", "space": {...}, "coeffs"|"alphas": ...,
///  "lag": L, "tail_bound": t, "f": {"kind": "abs_power|soft_clip", "gamma": g, "scale": s}}.
/// "alphas" is the table A[j][m]; semilinear and holder also accept "coeffs"
/// for the embedded linear case.
ProcessModel model_from_json(const json& j, const std::string& path = "$");

/// {"pasts": [[omega_0, omega_{-1}, ...], ...]}.
std::vector<Past> pasts_from_json(const json& j, const std::string& path = "$");
json pasts_to_json(std::span<const Past> pasts);

json to_json(const ConditionVerdict& v);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
/// FNV-1a of the compact dump; nlohmann::json keeps object keys sorted, so
/// key order in the source file does not matter.
std::uint64_t config_hash(const json& config);

/// Shortest round-trip decimal; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double x);

struct Footer {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  void row(const std::vector<std::string>& cells);
  /// "# config_hash=<16 hex> seed=<u64> version=<v>".
  void footer(const Footer& f);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

void write_verdicts_csv(std::ostream& out, std::span<const ConditionVerdict> verdicts, const Footer& f);

struct OracleRow {
  std::size_t n = 0;
  std::string quantity;
  OracleValue value;
};
void write_oracle_csv(std::ostream& out, std::string_view model_id, std::span<const OracleRow> rows,
                      const Footer& f);

void write_batch_csv(std::ostream& out, const ReplicateBatch& batch, const Footer& f);

void write_approximation_csv(std::ostream& out, const ApproximationReport& report, const Footer& f);

struct TestRow {
  std::string test;
  std::size_t n = 0;
  GoodnessOfFitResult result;
};
void write_tests_csv(std::ostream& out, std::string_view model_id, std::span<const TestRow> rows, const Footer& f);

}  // namespace martlab::io
