#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "martlab/errors.hpp"
#include "martlab/rng.hpp"

namespace martlab::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string key_path(std::string_view key) { return "$." + std::string(key); }

std::size_t get_count(const Context& ctx, std::string_view key, std::optional<std::size_t> fallback = {}) {
  const auto it = ctx.config.find(std::string(key));
  if (it == ctx.config.end()) {
    if (fallback) return *fallback;
    throw io::ConfigError(key_path(key), "required field is missing");
  }
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    throw io::ConfigError(key_path(key), "expected a nonnegative integer");
  }
  return it->get<std::size_t>();
}

double get_number(const Context& ctx, std::string_view key, double fallback) {
  const auto it = ctx.config.find(std::string(key));
  if (it == ctx.config.end()) return fallback;
  if (!it->is_number()) throw io::ConfigError(key_path(key), "expected a number");
  return it->get<double>();
}

bool get_bool(const Context& ctx, std::string_view key, bool fallback) {
  const auto it = ctx.config.find(std::string(key));
  if (it == ctx.config.end()) return fallback;
  if (!it->is_boolean()) throw io::ConfigError(key_path(key), "expected true or false");
  return it->get<bool>();
}

std::string model_id(const Context& ctx) {
  const auto it = ctx.config.find("model_id");
  if (it == ctx.config.end()) return "model";
  if (!it->is_string() || it->get<std::string>().empty()) {
    throw io::ConfigError("$.model_id", "expected a nonempty string");
  }
  return it->get<std::string>();
}

const json& model_json(const Context& ctx) {
  const auto it = ctx.config.find("model");
  if (it == ctx.config.end()) throw io::ConfigError("$.model", "required field is missing");
  return *it;
}

ProcessModel load_model(const Context& ctx) { return io::model_from_json(model_json(ctx), "$.model"); }

/// "n_grid": [...] or "n": N.
std::vector<std::size_t> horizons(const Context& ctx) {
  if (const auto it = ctx.config.find("n_grid"); it != ctx.config.end()) {
    if (!it->is_array() || it->empty()) throw io::ConfigError("$.n_grid", "expected a nonempty array");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& v = (*it)[i];
      if (!v.is_number_integer() || v.get<long long>() < 1) {
        throw io::ConfigError("$.n_grid[" + std::to_string(i) + "]", "expected a positive integer");
      }
      out.push_back(v.get<std::size_t>());
    }
    return out;
  }
  const std::size_t n = get_count(ctx, "n");
  if (n == 0) throw io::ConfigError("$.n", "horizon must be >= 1");
  return {n};
}

McOptions mc_options(const Context& ctx) {
  McOptions mc;
  const auto it = ctx.config.find("mc");
  if (it == ctx.config.end()) return mc;
  if (!it->is_object()) throw io::ConfigError("$.mc", "expected an object");
  if (it->contains("outer")) mc.outer = it->at("outer").get<std::size_t>();
  if (it->contains("inner")) mc.inner = it->at("inner").get<std::size_t>();
  if (it->contains("seed")) mc.seed = it->at("seed").get<std::uint64_t>();
  return mc;
}

CltOptions clt_options(const Context& ctx) {
  CltOptions o;
  o.ks.alpha = get_number(ctx, "alpha", 0.01);
  if (!(o.ks.alpha > 0.0 && o.ks.alpha < 1.0)) throw io::ConfigError("$.alpha", "alpha must lie in (0, 1)");
  o.workers = ctx.workers;
  o.mc = mc_options(ctx);
  return o;
}

/// "past_file": path (relative to the config) or "pasts": {"count", "seed", "depth"}.
std::vector<Past> load_pasts(const Context& ctx, const ProcessModel& model) {
  if (const auto it = ctx.config.find("past_file"); it != ctx.config.end()) {
    if (!it->is_string()) throw io::ConfigError("$.past_file", "expected a path");
    const auto path = ctx.config_dir / it->get<std::string>();
    std::ifstream in(path);
    if (!in) throw io::ConfigError("$.past_file", "cannot open " + path.string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw io::ConfigError("$.past_file", e.what());
    }
    return io::pasts_from_json(doc, "$.past_file");
  }
  const auto it = ctx.config.find("pasts");
  if (it == ctx.config.end()) throw io::ConfigError("$.pasts", "quenched runs need 'pasts' or 'past_file'");
  if (!it->is_object()) throw io::ConfigError("$.pasts", "expected {\"count\", \"seed\"}");
  const auto count = it->value("count", std::size_t{10});
  if (count == 0) throw io::ConfigError("$.pasts.count", "need at least one past");
  const auto depth = it->value("depth", required_past_depth(model));
  Engine rng(it->value("seed", substream_seed(ctx.seed, 0x70617374ULL)));
  std::vector<Past> pasts;
  for (std::size_t p = 0; p < count; ++p) pasts.push_back(draw_past(model, depth, rng));
  return pasts;
}

std::ofstream open_out(const Context& ctx, const std::string& name) {
  std::filesystem::create_directories(ctx.out_dir);
  std::ofstream f(ctx.out_dir / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (ctx.out_dir / name).string());
  return f;
}

void write_json(const Context& ctx, const std::string& name, const json& doc) {
  auto f = open_out(ctx, name);
  f << doc.dump(2) << '\n';
}

std::string fmt(double x, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

/// Checks requested through the "expect" block; only enforced with --assert.
class Expectations {
 public:
  explicit Expectations(const Context& ctx) : ctx_(ctx) {
    if (const auto it = ctx.config.find("expect"); it != ctx.config.end()) {
      if (!it->is_object()) throw io::ConfigError("$.expect", "expected an object");
      expect_ = *it;
    }
  }

  [[nodiscard]] const json* find(std::string_view key) const {
    const auto it = expect_.find(std::string(key));
    return it == expect_.end() ? nullptr : &*it;
  }

  [[nodiscard]] double number(std::string_view key, double fallback) const {
    const auto* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw io::ConfigError("$.expect." + std::string(key), "expected a number");
    return v->get<double>();
  }

  void check(bool ok, const std::string& what) {
    if (!ctx_.assert_mode) return;
    *ctx_.out << "  expect " << what << ": " << (ok ? "ok" : "FAILED") << '\n';
    if (!ok) failures_.push_back(what);
  }

  void finish() const {
    if (failures_.empty()) return;
    std::string msg = std::to_string(failures_.size()) + " expectation(s) failed:";
    for (const auto& f : failures_) msg += " [" + f + "]";
    throw AssertionFailed(msg);
  }

 private:
  const Context& ctx_;
  json expect_ = json::object();
  std::vector<std::string> failures_;
};

/// ||P_0(X_k)||_2 as a sequence for the condition checks. Linear models use
/// the coefficients: the norms are |a_k| sd(eps), and every condition is
/// invariant under that rescaling.
CoefficientSequence norm_sequence(const Context& ctx) {
  const json& m = model_json(ctx);
  const std::string family = m.value("family", "");
  if (family == "holder") {
    (void)load_model(ctx);
    return CoefficientSequence::custom({});
  }
  if (m.contains("coeffs")) {
    (void)io::space_from_json(m.contains("space") ? m.at("space") : json(), "$.model.space");
    return io::sequence_from_json(m.at("coeffs"), "$.model.coeffs");
  }
  const auto model = load_model(ctx);
  const auto& semi = std::get<SemiLinearModel>(model);
  std::vector<double> norms = semi.lag_norms();
  const double tb = semi.tail_bound();
  if (tb == 0.0) return CoefficientSequence::finite(std::move(norms));
  std::vector<double> suffix(norms.size() + 1, tb);
  for (std::size_t i = norms.size(); i-- > 0;) suffix[i] = suffix[i + 1] + norms[i] * norms[i];
  return CoefficientSequence::custom(std::move(norms), {},
                                     [suffix](std::size_t k) { return suffix[std::min(k, suffix.size() - 1)]; });
}

double sample_variance(std::span<const double> x) {
  const double r = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= r;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / (r - 1.0);
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

}  // namespace

void cmd_check(Context& ctx) {
  auto& out = *ctx.out;
  const auto seq = norm_sequence(ctx);
  PartialSumGrid grid;
  if (const auto it = ctx.config.find("partial_sums"); it != ctx.config.end()) {
    grid.min_log2 = it->value("min_log2", grid.min_log2);
    grid.max_log2 = it->value("max_log2", grid.max_log2);
  }
  const double q = get_number(ctx, "q", 2.0);
  const std::vector<ConditionVerdict> verdicts = {check_gl(seq, grid), check_h(seq, grid), check_mw(seq, grid),
                                                  lemma_series_lhs(seq, q, grid)};
  {
    auto f = open_out(ctx, "verdicts.csv");
    io::write_verdicts_csv(f, verdicts, ctx.footer());
  }
  out << "conditions for " << model_id(ctx) << ":\n";
  bool unknown = false;
  for (const auto& v : verdicts) {
    out << "  " << to_string(v.condition) << "  " << to_string(v.classification)
        << (v.certified ? "  (certified)" : "") << '\n';
    unknown = unknown || v.classification == Classification::Unknown;
  }
  Expectations ex(ctx);
  if (const auto* e = ex.find("verdicts")) {
    for (const auto& v : verdicts) {
      const std::string name(to_string(v.condition));
      if (e->contains(name)) {
        ex.check(e->at(name).get<std::string>() == to_string(v.classification), name + " is " + e->at(name).get<std::string>());
      }
    }
  }
  if (const auto* e = ex.find("certified"); e != nullptr && e->get<bool>()) {
    ex.check(std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.certified; }),
             "all verdicts certified");
  }
  ex.finish();
  if (unknown) {
    throw UncertifiedQuantity("some conditions could not be classified; the sequence has no analytic tail");
  }
}

void cmd_simulate(Context& ctx) {
  auto& out = *ctx.out;
  const auto model = load_model(ctx);
  const auto grid = horizons(ctx);
  const std::size_t R = get_count(ctx, "replicates");
  const std::string id = model_id(ctx);

  std::optional<MartingaleIncrement> inc;
  if (!std::holds_alternative<HolderModel>(model)) {
    const auto d = gordin_increment(model, full_truncation(model));
    if (!d.divergent) inc = d.increment();
  }
  BatchOptions opts;
  opts.workers = ctx.workers;
  opts.model_id = id;
  if (inc) opts.path.martingale = &*inc;

  std::vector<io::OracleRow> summary;
  Expectations ex(ctx);
  const double k_se = ex.number("variance_within_se", kNaN);
  for (std::size_t n : grid) {
    const auto batch = replicate_batch(model, n, R, ctx.seed, opts);
    {
      auto f = open_out(ctx, "batch_n" + std::to_string(n) + ".csv");
      io::write_batch_csv(f, batch, ctx.footer());
    }
    const auto sums = batch.terminal_sums();
    const double v = sample_variance(sums);
    // Sample variance is sigma^2 chi^2_{R-1} / (R-1) under normality.
    const double se = v * std::sqrt(2.0 / (static_cast<double>(R) - 1.0));
    summary.push_back({n, "empirical_variance", {v, se}});
    out << "n=" << n << "  Var(S_n) empirical " << fmt(v) << " +- " << fmt(se, 3);
    std::optional<OracleValue> exact;
    try {
      exact = exact_variance(model, n);
    } catch (const UnsupportedModel&) {
    }
    if (exact) {
      summary.push_back({n, "exact_variance", *exact});
      const double z = (v - exact->value) / se;
      out << "  exact " << fmt(exact->value) << "  z=" << fmt(z, 3) << '\n';
      if (!std::isnan(k_se)) {
        ex.check(std::abs(v - exact->value) <= k_se * se + exact->err_bound,
                 "n=" + std::to_string(n) + " variance within " + fmt(k_se) + " SE");
      }
    } else {
      out << '\n';
    }
  }
  {
    auto f = open_out(ctx, "simulate_summary.csv");
    io::write_oracle_csv(f, id, summary, ctx.footer());
  }
  ex.finish();
}

void cmd_ma_error(Context& ctx) {
  auto& out = *ctx.out;
  const auto model = load_model(ctx);
  const auto grid = horizons(ctx);
  const std::size_t R = get_count(ctx, "replicates", 0);
  const bool maximal = get_bool(ctx, "maximal", false);
  const std::size_t N = get_count(ctx, "truncation", full_truncation(model));
  const std::string id = model_id(ctx);

  const auto d = gordin_increment(model, N, mc_options(ctx));
  if (d.divergent) {
    throw RefusedComputation(RefusedComputation::Reason::DivergentReference,
                             "the Gordin series diverges; there is no martingale to approximate by");
  }
  const bool exact = has_exact_oracles(model);
  if (!exact && R == 0) throw UnsupportedModel("no exact oracle for this model; set 'replicates' for Monte Carlo");
  if (R > 0 && !d.single_coordinate()) {
    throw UnsupportedModel("Monte Carlo MA error needs an exact martingale increment (linear or semi-linear model)");
  }

  json gordin{{"truncation", N}, {"norm", d.norm.value}, {"norm_se", d.norm.se}};
  if (d.representation == MartingaleApproximant::Representation::LinearScalar) gordin["coefficient"] = d.coefficient;
  write_json(ctx, "gordin.json", gordin);
  out << "D_N with N=" << N << ": ||D||_2 = " << fmt(d.norm.value);
  if (gordin.contains("coefficient")) out << ", D = " << fmt(d.coefficient, 17) << " * eps_0";
  out << '\n';

  ApproximationReport rep;
  rep.model_id = id;
  std::vector<double> exact_values;
  Expectations ex(ctx);
  const double k_se = ex.number("mc_within_se", kNaN);
  MaMcOptions mo;
  mo.workers = ctx.workers;
  mo.model_id = id;
  for (std::size_t n : grid) {
    std::optional<OracleValue> ev;
    if (exact) {
      ev = ma_error_exact(model, d, n);
      exact_values.push_back(ev->value);
      rep.entries.push_back({Functional::MA, n, ev->value, ev->err_bound, Method::ExactOracle, std::nullopt, N});
    }
    out << "n=" << n;
    if (ev) out << "  MA exact " << fmt(ev->value);
    if (R == 0) {
      out << '\n';
      continue;
    }
    const std::uint64_t s = substream_seed(ctx.seed, n);
    const auto mc = ma_error_mc(model, d, n, R, s, false, std::nullopt, mo);
    rep.entries.push_back(mc);
    out << "  MA mc " << fmt(mc.value) << " +- " << fmt(mc.se, 3);
    if (maximal) {
      const auto mm = ma_error_mc(model, d, n, R, s, true, std::nullopt, mo);
      rep.entries.push_back(mm);
      out << "  MMA mc " << fmt(mm.value) << " +- " << fmt(mm.se, 3);
    }
    out << '\n';
    if (ev && !std::isnan(k_se)) {
      ex.check(std::abs(mc.value - ev->value) <= k_se * mc.se + ev->err_bound,
               "n=" + std::to_string(n) + " Monte Carlo within " + fmt(k_se) + " SE");
    }
  }
  {
    auto f = open_out(ctx, "ma_error.csv");
    io::write_approximation_csv(f, rep, ctx.footer());
  }
  if (const auto* e = ex.find("decreasing"); e != nullptr && e->get<bool>()) {
    ex.check(strictly_decreasing(exact_values), "exact MA error strictly decreasing");
  }
  if (const auto* e = ex.find("last_over_first_max"); e != nullptr && !exact_values.empty()) {
    ex.check(exact_values.back() < e->get<double>() * exact_values.front(),
             "last / first < " + fmt(e->get<double>()));
  }
  if (const auto* e = ex.find("n_times_value")) {
    const double target = e->get<double>();
    const double tol = ex.number("rel_tol", 1e-12);
    for (std::size_t i = 0; i < exact_values.size(); ++i) {
      const double nv = static_cast<double>(grid[i]) * exact_values[i];
      ex.check(std::abs(nv - target) <= tol * std::abs(target),
               "n * MA(" + std::to_string(grid[i]) + ") = " + fmt(target, 17));
    }
  }
  if (const auto* e = ex.find("coefficient")) {
    ex.check(gordin.contains("coefficient") &&
                 std::abs(d.coefficient - e->get<double>()) <= ex.number("abs_tol", 1e-12),
             "Gordin coefficient = " + fmt(e->get<double>(), 17));
  }
  ex.finish();
}

namespace {

void report_tests(Context& ctx, const std::string& file, const std::vector<io::TestRow>& rows) {
  auto f = open_out(ctx, file);
  io::write_tests_csv(f, model_id(ctx), rows, ctx.footer());
}

void print_test(std::ostream& out, const io::TestRow& row) {
  const auto& g = row.result;
  out << row.test << "  n=" << row.n;
  if (g.past_id) out << "  past=" << *g.past_id;
  out << "  R=" << g.sample_size << "  D=" << fmt(g.statistic, 4) << "  p=" << fmt(g.pvalue, 4) << "  "
      << (g.pass ? "pass" : "reject");
  if (g.ties_flagged) out << "  (ties " << fmt(100.0 * g.tie_fraction, 3) << "%)";
  out << '\n';
}

template <class Run>
void goodness_of_fit(Context& ctx, const std::string& name, Run&& run) {
  const auto model = load_model(ctx);
  const auto grid = horizons(ctx);
  const std::size_t R = get_count(ctx, "replicates");
  const auto opts = clt_options(ctx);
  std::vector<io::TestRow> rows;
  for (std::size_t n : grid) {
    rows.push_back({name, n, run(model, n, R, opts)});
    print_test(*ctx.out, rows.back());
  }
  report_tests(ctx, name + ".csv", rows);
  Expectations ex(ctx);
  if (const auto* e = ex.find("pass")) {
    for (const auto& r : rows) {
      ex.check(r.result.pass == e->get<bool>(),
               name + " n=" + std::to_string(r.n) + (e->get<bool>() ? " passes" : " rejects"));
    }
  }
  ex.finish();
}

}  // namespace

void cmd_clt(Context& ctx) {
  goodness_of_fit(ctx, "clt", [&](const ProcessModel& m, std::size_t n, std::size_t R, const CltOptions& o) {
    return clt_test(m, n, R, ctx.seed, {}, o).front();
  });
}

void cmd_wip(Context& ctx) {
  goodness_of_fit(ctx, "wip", [&](const ProcessModel& m, std::size_t n, std::size_t R, const CltOptions& o) {
    return wip_sup_test(m, n, R, ctx.seed, o);
  });
}

void cmd_quenched(Context& ctx) {
  auto& out = *ctx.out;
  const auto model = load_model(ctx);
  const auto grid = horizons(ctx);
  const std::size_t R = get_count(ctx, "replicates");
  const std::size_t R_ma = get_count(ctx, "ma_replicates", R);
  const auto opts = clt_options(ctx);
  const auto pasts = load_pasts(ctx, model);
  const std::string id = model_id(ctx);
  write_json(ctx, "quenched_pasts.json", io::pasts_to_json(pasts));

  Expectations ex(ctx);
  const auto min_pass = static_cast<std::size_t>(
      ex.number("min_pass", std::ceil(0.9 * static_cast<double>(pasts.size()))));
  const double k_se = ex.number("mc_within_se", kNaN);

  std::optional<MartingaleApproximant> d;
  if (has_exact_oracles(model)) {
    d = gordin_increment(model, full_truncation(model));
    if (d->divergent) d.reset();
  }

  std::vector<io::TestRow> rows;
  for (std::size_t n : grid) {
    std::size_t passed = 0;
    for (auto& g : clt_test(model, n, R, ctx.seed, pasts, opts)) {
      passed += g.pass ? 1 : 0;
      rows.push_back({"quenched_clt", n, std::move(g)});
      print_test(out, rows.back());
    }
    GoodnessOfFitResult agg;
    agg.reference = rows.back().result.reference;
    agg.sample_size = R;
    agg.statistic = static_cast<double>(passed) / static_cast<double>(pasts.size());
    agg.pvalue = kNaN;
    agg.alpha = opts.ks.alpha;
    agg.pass = passed >= min_pass;
    rows.push_back({"quenched_clt_aggregate", n, agg});
    out << "quenched_clt_aggregate  n=" << n << "  " << passed << "/" << pasts.size() << " pasts pass (need "
        << min_pass << ")\n";
    ex.check(agg.pass, "n=" + std::to_string(n) + " at least " + std::to_string(min_pass) + " pasts pass");
  }
  report_tests(ctx, "quenched.csv", rows);
  if (!d) {
    ex.finish();
    return;
  }

  // MA0 horizons default to the KS horizons.
  std::vector<std::size_t> ma_grid = grid;
  if (ctx.config.contains("ma_n")) ma_grid = {get_count(ctx, "ma_n")};
  ApproximationReport rep;
  rep.model_id = id;
  for (std::size_t n : ma_grid) {
    const auto annealed = ma_error_exact_centered(model, *d, n);
    rep.entries.push_back(
        {Functional::MA0, n, annealed.value, annealed.err_bound, Method::ExactOracle, std::nullopt, d->truncation});
    out << "MA0 n=" << n << "  annealed exact " << fmt(annealed.value) << '\n';
    MaMcOptions mo;
    mo.workers = ctx.workers;
    mo.centered = true;
    mo.model_id = id;
    const std::size_t first = rep.entries.size();
    for (std::size_t p = 0; p < pasts.size(); ++p) {
      mo.past_id = p;
      const auto e = ma_error_mc(model, *d, n, R_ma, substream_seed(ctx.seed, 0x6d613000ULL + p), false,
                                 std::span<const double>(pasts[p]), mo);
      rep.entries.push_back(e);
      out << "  past " << p << "  " << fmt(e.value) << " +- " << fmt(e.se, 3) << '\n';
    }
    if (!std::isnan(k_se)) {
      bool to_annealed = true, mutual = true;
      for (std::size_t i = first; i < rep.entries.size(); ++i) {
        const auto& a = rep.entries[i];
        to_annealed = to_annealed && std::abs(a.value - annealed.value) <= k_se * a.se + annealed.err_bound;
        for (std::size_t j = first; j < i; ++j) {
          const auto& b = rep.entries[j];
          mutual = mutual && std::abs(a.value - b.value) <= k_se * std::hypot(a.se, b.se);
        }
      }
      ex.check(to_annealed, "n=" + std::to_string(n) + " quenched MA0 within " + fmt(k_se) + " SE of annealed");
      ex.check(mutual, "n=" + std::to_string(n) + " quenched MA0 mutually within " + fmt(k_se) + " SE");
    }
  }
  {
    auto f = open_out(ctx, "quenched_ma.csv");
    io::write_approximation_csv(f, rep, ctx.footer());
  }
  ex.finish();
}

void cmd_variance(Context& ctx) {
  auto& out = *ctx.out;
  const auto model = load_model(ctx);
  const auto grid = horizons(ctx);
  BoundednessOptions bo;
  bo.replicates = get_count(ctx, "quantile_replicates", 0);
  bo.seed = ctx.seed;
  bo.workers = ctx.workers;
  const auto rep = boundedness_diagnostic(model, grid, bo);

  std::vector<io::OracleRow> rows;
  std::vector<double> variances;
  for (const auto& r : rep.rows) {
    const auto v = exact_variance(model, r.n);
    variances.push_back(v.value);
    rows.push_back({r.n, "variance", v});
    rows.push_back({r.n, "variance_ratio", r.variance_ratio});
    if (!std::isnan(r.quantile90)) rows.push_back({r.n, "quantile90", {r.quantile90, kNaN}});
    out << "n=" << r.n << "  Var(S_n) " << fmt(v.value, 10) << "  Var(S_n)/n " << fmt(r.variance_ratio.value, 10);
    if (!std::isnan(r.quantile90)) out << "  q90 " << fmt(r.quantile90, 4);
    out << '\n';
  }
  {
    auto f = open_out(ctx, "variance.csv");
    io::write_oracle_csv(f, model_id(ctx), rows, ctx.footer());
  }
  json summary{{"model_id", model_id(ctx)},
               {"flag", to_string(rep.flag)},
               {"growth_ratio", rep.growth_ratio},
               {"ratio_to_limit", std::isnan(rep.ratio_to_limit) ? json() : json(rep.ratio_to_limit)}};
  write_json(ctx, "variance_summary.json", summary);
  out << "flag " << to_string(rep.flag) << "  last/first " << fmt(rep.growth_ratio);
  if (!std::isnan(rep.ratio_to_limit)) out << "  ratio to E D^2 " << fmt(rep.ratio_to_limit);
  out << '\n';

  Expectations ex(ctx);
  if (const auto* e = ex.find("flag")) {
    ex.check(e->get<std::string>() == to_string(rep.flag), "flag " + e->get<std::string>());
  }
  if (const auto* e = ex.find("growth_ratio_min")) {
    ex.check(rep.growth_ratio >= e->get<double>(), "last/first >= " + fmt(e->get<double>()));
  }
  if (const auto* e = ex.find("variance")) {
    const double target = e->get<double>();
    const double tol = ex.number("rel_tol", 1e-12);
    for (std::size_t i = 0; i < variances.size(); ++i) {
      ex.check(std::abs(variances[i] - target) <= tol * std::abs(target),
               "Var(S_" + std::to_string(grid[i]) + ") = " + fmt(target, 17));
    }
  }
  ex.finish();
}

void dispatch(Context& ctx) {
  if (ctx.command == "check") return cmd_check(ctx);
  if (ctx.command == "simulate") return cmd_simulate(ctx);
  if (ctx.command == "ma-error") return cmd_ma_error(ctx);
  if (ctx.command == "clt") return cmd_clt(ctx);
  if (ctx.command == "wip") return cmd_wip(ctx);
  if (ctx.command == "quenched") return cmd_quenched(ctx);
  if (ctx.command == "variance") return cmd_variance(ctx);
  throw std::logic_error("unknown command " + ctx.command);
}

}  // namespace martlab::cli
