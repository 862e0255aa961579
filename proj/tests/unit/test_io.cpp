#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "martlab/errors.hpp"
#include "martlab/io.hpp"

using namespace martlab;
using io::json;

namespace {

std::string config_error_path(const json& j) {
  try {
    (void)io::model_from_json(j);
  } catch (const io::ConfigError& e) {
    return e.path();
  }
  ADD_FAILURE() << "expected a ConfigError";
  return {};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Fnv1a64, KnownVectors) {
  EXPECT_EQ(io::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(io::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(io::fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(ConfigHash, IgnoresKeyOrderAndWhitespace) {
  const auto a = json::parse(R"({"b": 1, "a": [1, 2]})");
  const auto b = json::parse(R"({ "a":[1,2],"b":1 })");
  EXPECT_EQ(io::config_hash(a), io::config_hash(b));
  EXPECT_NE(io::config_hash(a), io::config_hash(json::parse(R"({"a":[2,1],"b":1})")));
}

TEST(FormatDouble, RoundTripsAndNonFinite) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 4090.666666666667, 1e22}) {
    EXPECT_EQ(std::stod(io::format_double(x)), x);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(io::format_double(std::nan("")), "nan");
  EXPECT_EQ(io::format_double(-INFINITY), "-inf");
}

TEST(SequenceJson, RoundTripsEveryAnalyticKind) {
  const std::vector<CoefficientSequence> seqs = {
      CoefficientSequence::finite({1.0, -0.5, 0.25}),
      CoefficientSequence::geometric(0.7, 2.0),
      CoefficientSequence::power_law(1.25),
      CoefficientSequence::log_power_law(0.5, 1.5, 3.0),
      CoefficientSequence::dyadic_spikes(0.75),
      CoefficientSequence({9.0, 8.0}, tail::PowerLaw{2.0, 1.0}),
  };
  for (const auto& s : seqs) {
    const auto back = io::sequence_from_json(json::parse(io::to_json(s).dump()));
    EXPECT_EQ(io::to_json(back), io::to_json(s));
    for (std::size_t i : {0u, 1u, 2u, 3u, 7u, 64u, 1000u}) EXPECT_EQ(back.term(i), s.term(i)) << i;
  }
}

TEST(SequenceJson, CustomKeepsOnlyThePrefix) {
  const auto s = io::sequence_from_json(json::parse(R"({"prefix":[1,2],"tail":{"kind":"custom"}})"));
  EXPECT_FALSE(s.analytic());
  EXPECT_EQ(s.prefix(), (std::vector<double>{1.0, 2.0}));
}

TEST(SpaceJson, RoundTrips) {
  for (const auto& sp : {InnovationSpace::rademacher(), InnovationSpace::normal(2.5), InnovationSpace::uniform(0.5),
                         fixtures::two_signs()}) {
    const auto back = io::space_from_json(io::to_json(sp));
    EXPECT_EQ(back.kind(), sp.kind());
    EXPECT_DOUBLE_EQ(back.variance(), sp.variance());
    EXPECT_EQ(io::to_json(back), io::to_json(sp));
  }
}

TEST(ModelJson, BuildsEachFamily) {
  const auto lin = io::model_from_json(json::parse(R"({
    "family": "linear", "space": {"kind": "rademacher"},
    "coeffs": {"tail": {"kind": "geometric", "params": {"ratio": 0.5}}}, "lag": 60})"));
  ASSERT_TRUE(std::holds_alternative<CausalLinearModel>(lin));
  EXPECT_EQ(model_lag(lin), 60u);

  const auto semi = io::model_from_json(json::parse(R"({
    "family": "semilinear", "space": {"kind": "rademacher"},
    "alphas": [[-1, 1], [0.5, -0.5]], "tail_bound": 0.0})"));
  ASSERT_TRUE(std::holds_alternative<SemiLinearModel>(semi));
  EXPECT_DOUBLE_EQ(std::get<SemiLinearModel>(semi).alpha(1, 1.0), -0.5);

  const auto hol = io::model_from_json(json::parse(R"({
    "family": "holder", "space": {"kind": "rademacher"},
    "coeffs": {"tail": {"kind": "geometric", "params": {"ratio": 0.5}}}, "lag": 20,
    "f": {"kind": "abs_power", "gamma": 0.5}})"));
  ASSERT_TRUE(std::holds_alternative<HolderModel>(hol));
  EXPECT_EQ(std::get<HolderModel>(hol).function().kind(), HolderFunction::Kind::AbsPower);
}

TEST(ModelJson, ErrorsNameTheOffendingField) {
  EXPECT_EQ(config_error_path(json::parse(R"({"space": {"kind": "rademacher"}})")), "$.family");
  EXPECT_EQ(config_error_path(json::parse(R"({"family": "arma", "space": {"kind": "rademacher"}})")), "$.family");
  EXPECT_EQ(config_error_path(json::parse(R"({"family": "linear", "space": {"kind": "cauchy"}})")),
            "$.space.kind");
  EXPECT_EQ(config_error_path(json::parse(R"({"family": "linear", "space": {"kind": "discrete",
            "points": [1, 2], "probs": [0.5, "x"]}})")),
            "$.space.probs[1]");
  EXPECT_EQ(config_error_path(json::parse(R"({"family": "linear", "space": {"kind": "rademacher"},
            "coeffs": {"tail": {"kind": "geometric", "params": {}}}})")),
            "$.coeffs.tail.params.ratio");
  // Library validation is reported against the enclosing object.
  EXPECT_EQ(config_error_path(json::parse(R"({"family": "linear", "space": {"kind": "rademacher"},
            "coeffs": {"tail": {"kind": "geometric", "params": {"ratio": 1.5}}}})")),
            "$.coeffs.tail");
  EXPECT_EQ(config_error_path(json::parse(R"({"family": "semilinear", "space": {"kind": "rademacher"},
            "alphas": [[1, -1], [1, 2, 3]]})")),
            "$.alphas[1]");
  EXPECT_EQ(config_error_path(json::parse(R"({"family": "holder", "space": {"kind": "rademacher"},
            "alphas": [[1, -1]], "f": {"kind": "abs_power", "gamma": 2}})")),
            "$.f");
}

TEST(PastsJson, RoundTrips) {
  const std::vector<Past> pasts = {{1.0, -1.0, 1.0}, {0.25, 3.0}};
  const auto back = io::pasts_from_json(io::pasts_to_json(pasts));
  EXPECT_EQ(back, pasts);
  EXPECT_THROW((void)io::pasts_from_json(json::parse(R"({"pasts": [[1, null]]})")), io::ConfigError);
}

TEST(Csv, HeaderRowsAndFooter) {
  std::ostringstream out;
  io::CsvWriter w(out, {"a", "b"});
  w.row({"1", "x"});
  EXPECT_THROW(w.row({"only"}), InvalidArgument);
  w.footer({0xabcULL, 42});
  EXPECT_EQ(out.str(), "a,b\n1,x\n# config_hash=0000000000000abc seed=42 version=0.1.0\n");
}

TEST(Csv, VerdictsOneRowPerPartialSum) {
  ConditionVerdict v;
  v.condition = Condition::H;
  v.classification = Classification::Converges;
  v.certified = true;
  v.partial_sums = {{16, 1.5}, {32, 1.75}};
  std::ostringstream out;
  io::write_verdicts_csv(out, std::span(&v, 1), {1, 2});
  const auto ls = lines(out.str());
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[0], "condition,classification,N,partial_sum,certified");
  EXPECT_EQ(ls[1], "H,Converges,16,1.5,true");
  EXPECT_EQ(ls[3].rfind("# config_hash=", 0), 0u);
}

TEST(Csv, BatchSplitsSeedsIntoHalves) {
  ReplicateBatch b;
  b.model_id = "m";
  b.n = 8;
  b.records.push_back({1.0, 2.0, 0.5, 0.25, 0x0000000500000007ULL});
  std::ostringstream out;
  io::write_batch_csv(out, b, {});
  const auto ls = lines(out.str());
  EXPECT_EQ(ls[0], "model_id,n,replicate,S_n,max_S,max_absdev,seed_hi,seed_lo");
  EXPECT_EQ(ls[1], "m,8,0,1,2,0.5,5,7");
}

TEST(Csv, TestsAndApproximationColumns) {
  io::TestRow row{"clt", 1024, {}};
  row.result.sample_size = 20000;
  row.result.statistic = 0.01;
  row.result.pvalue = 0.2;
  row.result.pass = true;
  row.result.past_id = 3;
  std::ostringstream t;
  io::write_tests_csv(t, "g", std::span(&row, 1), {});
  EXPECT_EQ(lines(t.str())[1], "clt,g,1024,20000,0.01,0.2,0.01,true,3");

  ApproximationReport rep;
  rep.model_id = "g";
  rep.entries.push_back({Functional::MA0, 64, 0.125, 0.0, Method::ExactOracle, std::nullopt, 60});
  std::ostringstream a;
  io::write_approximation_csv(a, rep, {});
  const auto ls = lines(a.str());
  EXPECT_EQ(ls[0], "model_id,functional,n,value,se,method,past_id,trunc_N");
  EXPECT_EQ(ls[1], "g,MA0,64,0.125,0,exact_oracle,,60");
}
