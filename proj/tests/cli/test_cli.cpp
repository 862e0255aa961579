#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "app.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("martlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const json& j, const std::string& name = "config.json") {
    const auto p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
  }

  Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = martlab::cli::run(args, out, err);
    return {code, out.str(), err.str()};
  }

  std::string read(const std::string& rel) const {
    std::ifstream in(dir_ / rel, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  std::string out_dir(const std::string& sub = "out") const { return (dir_ / sub).string(); }

  fs::path dir_;
};

json linear(json coeffs, json space = {{"kind", "rademacher"}}) {
  return {{"family", "linear"}, {"space", std::move(space)}, {"coeffs", std::move(coeffs)}};
}

json coboundary() { return linear({{"prefix", {1, -1}}, {"tail", {{"kind", "finite"}}}}); }
json geometric(double rho = 0.5) { return linear({{"tail", {{"kind", "geometric"}, {"params", {{"ratio", rho}}}}}}); }
json log_divergent() {
  return linear({{"tail", {{"kind", "log_power_law"}, {"params", {{"exponent", 1}, {"log_exponent", 1}}}}}});
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST_F(Cli, MissingConfigFileIsAConfigError) {
  const auto r = run({"check", "--config", (dir_ / "nope.json").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("cannot open"), std::string::npos);
}

TEST_F(Cli, UnknownSubcommandOrFlagIsAConfigError) {
  EXPECT_EQ(run({"frobnicate", "--config", "x"}).code, 2);
  EXPECT_EQ(run({"check"}).code, 2);
}

TEST_F(Cli, SchemaVersionIsRequired) {
  const auto r = run({"check", "--config", write_config({{"model", geometric()}})});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("$.schema"), std::string::npos);
  EXPECT_EQ(run({"check", "--config", write_config({{"schema", 2}, {"model", geometric()}})}).code, 2);
}

TEST_F(Cli, ConfigErrorsCarryTheFieldPath) {
  json model = geometric();
  model["space"] = {{"kind", "discrete"}, {"points", {1, 2}}, {"probs", {0.5, "half"}}};
  const auto r = run({"variance", "--config", write_config({{"schema", 1}, {"model", model}, {"n", 4}}), "--out",
                      out_dir()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("$.model.space.probs[1]"), std::string::npos) << r.err;

  const auto r2 = run({"clt", "--config", write_config({{"schema", 1}, {"model", geometric()}, {"n", 64}}), "--out",
                       out_dir()});
  EXPECT_EQ(r2.code, 2);
  EXPECT_NE(r2.err.find("$.replicates"), std::string::npos) << r2.err;
}

TEST_F(Cli, CheckWritesVerdictsWithFooter) {
  const auto cfg = write_config({{"schema", 1},
                                 {"model_id", "spikes"},
                                 {"seed", 5},
                                 {"model", linear({{"tail", {{"kind", "dyadic_spikes"}, {"params", {{"exponent", 0.75}}}}}})}});
  const auto r = run({"check", "--config", cfg, "--out", out_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(read("out/verdicts.csv"));
  EXPECT_EQ(ls.front(), "condition,classification,N,partial_sum,certified");
  EXPECT_EQ(ls.back().rfind("# config_hash=", 0), 0u);
  EXPECT_NE(ls.back().find(" seed=5 version=0.1.0"), std::string::npos);
  bool saw_mw = false;
  for (const auto& l : ls) {
    if (l.rfind("MW,", 0) == 0) {
      saw_mw = true;
      EXPECT_EQ(l.rfind("MW,Diverges,", 0), 0u) << l;
    }
  }
  EXPECT_TRUE(saw_mw);
}

TEST_F(Cli, CustomWithoutTailModelIsUnknownAndNotSuccess) {
  const auto cfg = write_config(
      {{"schema", 1}, {"model", linear({{"prefix", {1, 0.5}}, {"tail", {{"kind", "custom"}}}})}});
  const auto r = run({"check", "--config", cfg, "--out", out_dir()});
  EXPECT_EQ(r.code, 4);
  for (const auto& l : lines(read("out/verdicts.csv"))) {
    if (l[0] != '#' && l.rfind("condition", 0) != 0) EXPECT_NE(l.find(",Unknown,"), std::string::npos) << l;
  }
  EXPECT_EQ(json::parse(lines(r.out).back())["reason"], "uncertified");
}

TEST_F(Cli, VarianceOfCoboundaryIsTwoAtEveryHorizon) {
  const auto cfg = write_config({{"schema", 1}, {"model", coboundary()}, {"n_grid", {1, 7, 100, 5000}}});
  ASSERT_EQ(run({"variance", "--config", cfg, "--out", out_dir()}).code, 0);
  int rows = 0;
  for (const auto& l : lines(read("out/variance.csv"))) {
    if (l.find(",variance,") == std::string::npos) continue;
    EXPECT_NE(l.find(",variance,2,0"), std::string::npos) << l;
    ++rows;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(json::parse(read("out/variance_summary.json"))["flag"], "Converging");
}

TEST_F(Cli, CltOnDivergentModelIsRefused) {
  const auto cfg = write_config({{"schema", 1}, {"model", log_divergent()}, {"n", 256}, {"replicates", 1000}});
  const auto r = run({"clt", "--config", cfg, "--out", out_dir()});
  EXPECT_EQ(r.code, 4);
  const auto j = json::parse(lines(r.out).back());
  EXPECT_EQ(j["status"], "refused");
  EXPECT_EQ(j["reason"], "divergent_reference");
  EXPECT_EQ(json::parse(read("out/clt_refusal.json")), j);
  EXPECT_EQ(run({"wip", "--config", cfg, "--out", out_dir()}).code, 4);
}

TEST_F(Cli, DegenerateVarianceIsRefused) {
  const auto cfg = write_config({{"schema", 1}, {"model", coboundary()}, {"n", 256}, {"replicates", 1000}});
  const auto r = run({"wip", "--config", cfg, "--out", out_dir()});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(json::parse(lines(r.out).back())["reason"], "degenerate_variance");
}

TEST_F(Cli, FailedExpectationExitsThreeOnlyWithAssert) {
  const auto cfg = write_config(
      {{"schema", 1}, {"model", coboundary()}, {"n_grid", {4, 8}}, {"expect", {{"variance", 3.0}}}});
  EXPECT_EQ(run({"variance", "--config", cfg, "--out", out_dir()}).code, 0);
  const auto r = run({"variance", "--config", cfg, "--out", out_dir(), "--assert"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("assertion failed"), std::string::npos);
  const auto ok = write_config(
      {{"schema", 1}, {"model", coboundary()}, {"n_grid", {4, 8}}, {"expect", {{"variance", 2.0}}}}, "ok.json");
  EXPECT_EQ(run({"variance", "--config", ok, "--out", out_dir(), "--assert"}).code, 0);
}

TEST_F(Cli, QuenchedWritesOneRowPerPastPlusAggregate) {
  const auto cfg = write_config({{"schema", 1},
                                 {"model", geometric()},
                                 {"n", 64},
                                 {"replicates", 1000},
                                 {"pasts", {{"count", 10}, {"seed", 3}}}});
  ASSERT_EQ(run({"quenched", "--config", cfg, "--out", out_dir()}).code, 0);
  const auto ls = lines(read("out/quenched.csv"));
  ASSERT_EQ(ls.size(), 1u + 10u + 1u + 1u);
  for (int p = 0; p < 10; ++p) {
    EXPECT_EQ(ls[1 + p].rfind("quenched_clt,", 0), 0u);
    EXPECT_EQ(ls[1 + p].substr(ls[1 + p].rfind(',') + 1), std::to_string(p));
  }
  EXPECT_EQ(ls[11].rfind("quenched_clt_aggregate,", 0), 0u);
  EXPECT_EQ(json::parse(read("out/quenched_pasts.json"))["pasts"].size(), 10u);
  // 10 quenched MA0 rows plus the annealed reference.
  EXPECT_EQ(lines(read("out/quenched_ma.csv")).size(), 1u + 11u + 1u);
}

TEST_F(Cli, PastFileIsResolvedRelativeToTheConfig) {
  std::ofstream(dir_ / "pasts.json") << R"({"pasts": [[1, -1, 1, 1, -1, 1, 1, 1, -1, -1, 1, 1, 1, -1, 1]]})";
  json model = geometric();
  model["lag"] = 14;
  const auto cfg = write_config(
      {{"schema", 1}, {"model", model}, {"n", 32}, {"replicates", 1000}, {"past_file", "pasts.json"}});
  const auto r = run({"quenched", "--config", cfg, "--out", out_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(read("out/quenched.csv")).size(), 1u + 1u + 1u + 1u);

  std::ofstream(dir_ / "short.json") << R"({"pasts": [[1, -1]]})";
  const auto bad = write_config(
      {{"schema", 1}, {"model", model}, {"n", 32}, {"replicates", 1000}, {"past_file", "short.json"}}, "bad.json");
  EXPECT_EQ(run({"quenched", "--config", bad, "--out", out_dir()}).code, 2);
}

TEST_F(Cli, OutputsAreIdenticalAcrossWorkerCounts) {
  json model = geometric();
  model["lag"] = 60;
  const auto cfg = write_config({{"schema", 1},
                                 {"model", model},
                                 {"seed", 11},
                                 {"n", 512},
                                 {"replicates", 2000},
                                 {"simulate", {{"n_grid", {16, 256}}}},
                                 {"pasts", {{"count", 3}, {"seed", 4}}}});
  for (const std::string cmd : {"simulate", "clt", "wip", "quenched", "ma-error"}) {
    ASSERT_EQ(run({cmd, "--config", cfg, "--workers", "1", "--out", out_dir("w1")}).code, 0) << cmd;
    ASSERT_EQ(run({cmd, "--config", cfg, "--workers", "8", "--out", out_dir("w8")}).code, 0) << cmd;
  }
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "w1")) {
    const auto name = e.path().filename().string();
    EXPECT_EQ(read("w1/" + name), read("w8/" + name)) << name;
    ++compared;
  }
  EXPECT_GE(compared, 8u);
}

TEST_F(Cli, SeedFlagOverridesConfig) {
  const auto cfg = write_config({{"schema", 1}, {"seed", 1}, {"model", geometric()}, {"n", 32}, {"replicates", 1000}});
  ASSERT_EQ(run({"clt", "--config", cfg, "--seed", "99", "--out", out_dir("a")}).code, 0);
  ASSERT_EQ(run({"clt", "--config", cfg, "--out", out_dir("b")}).code, 0);
  EXPECT_NE(lines(read("a/clt.csv")).back().find(" seed=99 "), std::string::npos);
  EXPECT_NE(read("a/clt.csv"), read("b/clt.csv"));
}

TEST_F(Cli, ReportDataRecordsRefusalsAndContinues) {
  const auto cfg = write_config({{"schema", 1},
                                 {"model", log_divergent()},
                                 {"variance", {{"n_grid", {100, 1000}}}},
                                 {"clt", {{"n", 64}, {"replicates", 1000}}}});
  const auto r = run({"report-data", "--config", cfg, "--out", out_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto manifest = json::parse(read("out/manifest.json"));
  ASSERT_EQ(manifest["commands"].size(), 3u);
  EXPECT_EQ(manifest["commands"][0]["command"], "check");
  EXPECT_EQ(manifest["commands"][0]["status"], "ok");
  EXPECT_EQ(manifest["commands"][1]["command"], "clt");
  EXPECT_EQ(manifest["commands"][1]["status"], "divergent_reference");
  EXPECT_EQ(manifest["commands"][2]["command"], "variance");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "variance.csv"));
}
