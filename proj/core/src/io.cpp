#include "martlab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "martlab/errors.hpp"

namespace martlab::io {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string child(const std::string& path, std::string_view key) { return path + "." + std::string(key); }
std::string child(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& require(const json& j, std::string_view key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const auto it = j.find(std::string(key));
  if (it == j.end()) throw ConfigError(child(path, key), "required field is missing");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, std::string_view key, double fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  return number(j.at(std::string(key)), child(path, key));
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], child(path, i)));
  return out;
}

// Library validation errors are reported against the object being built.
template <class F>
auto at_path(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
}

HolderFunction holder_function_from_json(const json& j, const std::string& path) {
  const std::string kind = text(require(j, "kind", path), child(path, "kind"));
  const double gamma = number(require(j, "gamma", path), child(path, "gamma"));
  return at_path(path, [&] {
    if (kind == "abs_power") return HolderFunction::abs_power(gamma);
    if (kind == "soft_clip") return HolderFunction::soft_clip(gamma, number_or(j, "scale", 1.0, path));
    throw ConfigError(child(path, "kind"), "unknown function kind '" + kind + "' (abs_power, soft_clip)");
  });
}

SemiLinearModel semilinear_from_json(const json& j, const InnovationSpace& space, const std::string& path) {
  const bool has_alphas = j.contains("alphas");
  const bool has_coeffs = j.contains("coeffs");
  if (has_alphas == has_coeffs) throw ConfigError(path, "exactly one of 'alphas' or 'coeffs' is required");
  if (has_coeffs) {
    const auto seq = sequence_from_json(j.at("coeffs"), child(path, "coeffs"));
    std::optional<std::size_t> lag;
    if (j.contains("lag")) lag = count(j.at("lag"), child(path, "lag"));
    return at_path(path, [&] { return semilinear_view(CausalLinearModel(seq, space, lag)); });
  }
  const std::string ap = child(path, "alphas");
  const json& a = j.at("alphas");
  if (!a.is_array() || a.empty()) throw ConfigError(ap, "expected a nonempty array of rows");
  std::vector<std::vector<double>> table;
  for (std::size_t r = 0; r < a.size(); ++r) {
    table.push_back(numbers(a[r], child(ap, r)));
    if (table.back().size() != space.size()) {
      throw ConfigError(child(ap, r), "row has " + std::to_string(table.back().size()) + " entries, space has " +
                                          std::to_string(space.size()) + " points");
    }
  }
  const double tail = number_or(j, "tail_bound", 0.0, path);
  return at_path(path, [&] { return SemiLinearModel(space, std::move(table), tail); });
}

}  // namespace

json to_json(const CoefficientSequence& seq) {
  json tail = std::visit(
      Overloaded{
          [](const tail::FiniteSupport&) { return json{{"kind", "finite"}, {"params", json::object()}}; },
          [](const tail::Geometric& m) {
            return json{{"kind", "geometric"}, {"params", {{"ratio", m.ratio}, {"scale", m.scale}}}};
          },
          [](const tail::PowerLaw& m) {
            return json{{"kind", "power_law"}, {"params", {{"exponent", m.exponent}, {"scale", m.scale}}}};
          },
          [](const tail::LogPowerLaw& m) {
            return json{{"kind", "log_power_law"},
                        {"params", {{"exponent", m.exponent}, {"log_exponent", m.log_exponent}, {"scale", m.scale}}}};
          },
          [](const tail::DyadicSpikes& m) {
            return json{{"kind", "dyadic_spikes"}, {"params", {{"exponent", m.exponent}}}};
          },
          [](const tail::Custom&) { return json{{"kind", "custom"}, {"params", json::object()}}; },
      },
      seq.tail_model());
  return json{{"prefix", seq.prefix()}, {"tail", std::move(tail)}};
}

CoefficientSequence sequence_from_json(const json& j, const std::string& path) {
  std::vector<double> prefix;
  if (j.contains("prefix")) prefix = numbers(j.at("prefix"), child(path, "prefix"));
  const std::string tp = child(path, "tail");
  const json& t = require(j, "tail", path);
  const std::string kind = text(require(t, "kind", tp), child(tp, "kind"));
  const std::string pp = child(tp, "params");
  const json params = t.contains("params") ? t.at("params") : json::object();
  if (!params.is_object()) throw ConfigError(pp, "expected an object");
  auto param = [&](std::string_view key) { return number(require(params, key, pp), child(pp, key)); };
  return at_path(tp, [&]() -> CoefficientSequence {
    if (kind == "finite") return {std::move(prefix), tail::FiniteSupport{}};
    if (kind == "geometric") return {std::move(prefix), tail::Geometric{param("ratio"), number_or(params, "scale", 1.0, pp)}};
    if (kind == "power_law") return {std::move(prefix), tail::PowerLaw{param("exponent"), number_or(params, "scale", 1.0, pp)}};
    if (kind == "log_power_law") {
      return {std::move(prefix),
              tail::LogPowerLaw{param("exponent"), param("log_exponent"), number_or(params, "scale", 1.0, pp)}};
    }
    if (kind == "dyadic_spikes") return {std::move(prefix), tail::DyadicSpikes{param("exponent")}};
    if (kind == "custom") return CoefficientSequence::custom(std::move(prefix));
    throw ConfigError(child(tp, "kind"), "unknown tail kind '" + kind +
                                             "' (finite, geometric, power_law, log_power_law, dyadic_spikes, custom)");
  });
}

json to_json(const InnovationSpace& space) {
  switch (space.kind()) {
    case InnovationSpace::Kind::Normal: return {{"kind", "normal"}, {"variance", space.variance()}};
    case InnovationSpace::Kind::Uniform: return {{"kind", "uniform"}, {"half_width", space.parameter()}};
    case InnovationSpace::Kind::Discrete: break;
  }
  return {{"kind", "discrete"},
          {"points", std::vector<double>(space.points().begin(), space.points().end())},
          {"probs", std::vector<double>(space.probs().begin(), space.probs().end())}};
}

InnovationSpace space_from_json(const json& j, const std::string& path) {
  const std::string kind = text(require(j, "kind", path), child(path, "kind"));
  return at_path(path, [&] {
    if (kind == "rademacher") return InnovationSpace::rademacher();
    if (kind == "normal") return InnovationSpace::normal(number_or(j, "variance", 1.0, path));
    if (kind == "uniform") return InnovationSpace::uniform(number(require(j, "half_width", path), child(path, "half_width")));
    if (kind == "discrete") {
      return InnovationSpace::discrete(numbers(require(j, "points", path), child(path, "points")),
                                       numbers(require(j, "probs", path), child(path, "probs")));
    }
    throw ConfigError(child(path, "kind"), "unknown space kind '" + kind + "' (rademacher, normal, uniform, discrete)");
  });
}

ProcessModel model_from_json(const json& j, const std::string& path) {
  const std::string family = text(require(j, "family", path), child(path, "family"));
  const auto space = space_from_json(require(j, "space", path), child(path, "space"));
  if (family == "linear") {
    const auto seq = sequence_from_json(require(j, "coeffs", path), child(path, "coeffs"));
    std::optional<std::size_t> lag;
    if (j.contains("lag")) lag = count(j.at("lag"), child(path, "lag"));
    return at_path(path, [&] { return ProcessModel(CausalLinearModel(seq, space, lag)); });
  }
  if (family == "semilinear") return semilinear_from_json(j, space, path);
  if (family == "holder") {
    auto base = semilinear_from_json(j, space, path);
    const auto f = holder_function_from_json(require(j, "f", path), child(path, "f"));
    CenteringOptions c;
    if (j.contains("centering")) {
      const std::string cp = child(path, "centering");
      const json& cj = j.at("centering");
      if (cj.contains("draws")) c.draws = count(cj.at("draws"), child(cp, "draws"));
      if (cj.contains("seed")) c.seed = cj.at("seed").get<std::uint64_t>();
    }
    return at_path(path, [&] { return ProcessModel(HolderModel(std::move(base), f, c)); });
  }
  throw ConfigError(child(path, "family"), "unknown family '" + family + "' (linear, semilinear, holder)");
}

std::vector<Past> pasts_from_json(const json& j, const std::string& path) {
  const std::string pp = child(path, "pasts");
  const json& arr = require(j, "pasts", path);
  if (!arr.is_array()) throw ConfigError(pp, "expected an array of pasts");
  std::vector<Past> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(numbers(arr[i], child(pp, i)));
  return out;
}

json pasts_to_json(std::span<const Past> pasts) {
  json arr = json::array();
  for (const auto& p : pasts) arr.push_back(p);
  return {{"pasts", std::move(arr)}};
}

json to_json(const ConditionVerdict& v) {
  json sums = json::array();
  for (const auto& p : v.partial_sums) sums.push_back({{"N", p.cutoff}, {"partial_sum", p.value}});
  json out{{"condition", to_string(v.condition)},
           {"classification", to_string(v.classification)},
           {"certified", v.certified},
           {"partial_sums", std::move(sums)}};
  if (v.condition == Condition::LemmaSeriesLHS) out["q"] = v.q;
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const json& config) { return fnv1a64(config.dump()); }

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw InvalidArgument("CSV row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void CsvWriter::footer(const Footer& f) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(f.config_hash));
  out_ << "# config_hash=" << hash << " seed=" << f.seed << " version=" << kVersion << '\n';
}

void write_verdicts_csv(std::ostream& out, std::span<const ConditionVerdict> verdicts, const Footer& f) {
  CsvWriter w(out, {"condition", "classification", "N", "partial_sum", "certified"});
  for (const auto& v : verdicts) {
    std::string name(to_string(v.condition));
    if (v.condition == Condition::LemmaSeriesLHS) name += "(q=" + format_double(v.q) + ")";
    const std::string cls(to_string(v.classification));
    const std::string cert = v.certified ? "true" : "false";
    if (v.partial_sums.empty()) w.row({name, cls, "", "", cert});
    for (const auto& p : v.partial_sums) w.row({name, cls, std::to_string(p.cutoff), format_double(p.value), cert});
  }
  w.footer(f);
}

void write_oracle_csv(std::ostream& out, std::string_view model_id, std::span<const OracleRow> rows,
                      const Footer& f) {
  CsvWriter w(out, {"model_id", "n", "quantity", "value", "err_bound"});
  for (const auto& r : rows) {
    w.row({std::string(model_id), std::to_string(r.n), r.quantity, format_double(r.value.value),
           format_double(r.value.err_bound)});
  }
  w.footer(f);
}

void write_batch_csv(std::ostream& out, const ReplicateBatch& batch, const Footer& f) {
  CsvWriter w(out, {"model_id", "n", "replicate", "S_n", "max_S", "max_absdev", "seed_hi", "seed_lo"});
  for (std::size_t r = 0; r < batch.records.size(); ++r) {
    const auto& rec = batch.records[r];
    w.row({batch.model_id, std::to_string(batch.n), std::to_string(r), format_double(rec.s_n),
           format_double(rec.max_s), format_double(rec.max_abs_dev), std::to_string(rec.seed >> 32),
           std::to_string(rec.seed & 0xffffffffULL)});
  }
  w.footer(f);
}

void write_approximation_csv(std::ostream& out, const ApproximationReport& report, const Footer& f) {
  CsvWriter w(out, {"model_id", "functional", "n", "value", "se", "method", "past_id", "trunc_N"});
  for (const auto& e : report.entries) {
    w.row({report.model_id, std::string(to_string(e.functional)), std::to_string(e.n), format_double(e.value),
           format_double(e.se), std::string(to_string(e.method)), e.past_id ? std::to_string(*e.past_id) : "",
           std::to_string(e.truncation)});
  }
  w.footer(f);
}

void write_tests_csv(std::ostream& out, std::string_view model_id, std::span<const TestRow> rows, const Footer& f) {
  CsvWriter w(out, {"test", "model_id", "n", "R", "statistic", "pvalue", "alpha", "pass", "past_id"});
  for (const auto& r : rows) {
    const auto& g = r.result;
    w.row({r.test, std::string(model_id), std::to_string(r.n), std::to_string(g.sample_size),
           format_double(g.statistic), format_double(g.pvalue), format_double(g.alpha), g.pass ? "true" : "false",
           g.past_id ? std::to_string(*g.past_id) : ""});
  }
  w.footer(f);
}

}  // namespace martlab::io
