#include "app.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <map>
#include <ostream>

#include "commands.hpp"
#include "martlab/errors.hpp"
#include "martlab/simulate.hpp"

namespace martlab::cli {

namespace {

struct Outcome {
  int code = kSuccess;
  std::string reason;
  std::string message;
};

std::string_view reason_tag(RefusedComputation::Reason r) {
  return r == RefusedComputation::Reason::DivergentReference ? "divergent_reference" : "degenerate_variance";
}

Outcome run_command(Context& ctx) {
  try {
    dispatch(ctx);
    return {};
  } catch (const io::ConfigError& e) {
    return {kConfigError, "config", e.what()};
  } catch (const json::exception& e) {
    return {kConfigError, "config", std::string("$: ") + e.what()};
  } catch (const std::invalid_argument& e) {  // InvalidArgument, InsufficientPast
    return {kConfigError, "config", std::string("$: ") + e.what()};
  } catch (const RefusedComputation& e) {
    return {kRefused, std::string(reason_tag(e.reason())), e.what()};
  } catch (const UnsupportedModel& e) {
    return {kRefused, "unsupported_model", e.what()};
  } catch (const UncertifiedQuantity& e) {
    return {kRefused, "uncertified", e.what()};
  } catch (const ResourceLimit& e) {
    return {kRefused, "resource_limit", e.what()};
  } catch (const AssertionFailed& e) {
    return {kAssertionFailed, "assertion", e.what()};
  }
}

json refusal_json(const Context& ctx, const Outcome& o) {
  json j{{"status", "refused"}, {"command", ctx.command}, {"reason", o.reason}, {"message", o.message}};
  if (o.reason == "divergent_reference") j["advice"] = "run the 'variance' command for the boundedness diagnostic";
  return j;
}

/// Writes the refusal record and prints it; config and assertion failures go
/// to stderr as plain text.
void report_outcome(const Context& ctx, const Outcome& o, std::ostream& out, std::ostream& err) {
  if (o.code == kRefused) {
    const auto j = refusal_json(ctx, o);
    out << j.dump() << '\n';
    std::error_code ec;
    std::filesystem::create_directories(ctx.out_dir, ec);
    std::ofstream f(ctx.out_dir / (ctx.command + "_refusal.json"), std::ios::binary);
    f << j.dump(2) << '\n';
  } else if (o.code == kConfigError) {
    err << "config error: " << o.message << '\n';
  } else if (o.code == kAssertionFailed) {
    err << "assertion failed (" << ctx.command << "): " << o.message << '\n';
  }
}

/// Top level with the command's own section laid over it.
json effective_config(const json& doc, const std::string& command) {
  json eff = doc;
  if (const auto it = doc.find(command); it != doc.end()) {
    if (!it->is_object()) throw io::ConfigError("$." + command, "command section must be an object");
    eff.update(*it);
  }
  return eff;
}

json load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::ConfigError("$", "cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw io::ConfigError("$", e.what());
  }
  if (!doc.is_object()) throw io::ConfigError("$", "config must be a JSON object");
  const auto it = doc.find("schema");
  if (it == doc.end()) throw io::ConfigError("$.schema", "required field is missing");
  if (*it != 1) throw io::ConfigError("$.schema", "unsupported schema version " + it->dump() + " (expected 1)");
  return doc;
}

std::vector<std::string> report_commands(const json& doc) {
  if (const auto it = doc.find("report"); it != doc.end()) {
    if (!it->is_array()) throw io::ConfigError("$.report", "expected an array of command names");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& v = (*it)[i];
      const auto& names = command_names();
      if (!v.is_string() || std::find(names.begin(), names.end(), v.get<std::string>()) == names.end()) {
        throw io::ConfigError("$.report[" + std::to_string(i) + "]", "unknown command");
      }
      out.push_back(v.get<std::string>());
    }
    return out;
  }
  std::vector<std::string> out = {"check"};
  for (const auto& name : command_names()) {
    if (name != "check" && doc.contains(name)) out.push_back(name);
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Martingale approximation experiments for stationary sequences", "martlab"};
  app.set_version_flag("--version", std::string(io::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out_dir = "out";
  bool assert_mode = false;
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--workers", workers, "worker threads (overrides MARTLAB_WORKERS)")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--assert", assert_mode, "exit 3 when an 'expect' check fails");

  const std::map<std::string, std::string> about = {
      {"check", "classify the summability conditions"},
      {"simulate", "replicate S_n and compare its variance with the exact value"},
      {"ma-error", "martingale approximation error against the Gordin increment"},
      {"clt", "KS test of S_n / sqrt(n) against the normal limit"},
      {"wip", "KS test of max_k S_k / sqrt(n) against the Brownian supremum law"},
      {"quenched", "CLT and approximation error conditional on fixed pasts"},
      {"variance", "boundedness diagnostic for Var(S_n) / n"},
  };
  for (const auto& name : command_names()) app.add_subcommand(name, about.at(name));
  app.add_subcommand("report-data", "run every configured command into one directory");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << io::kVersion << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  Context base;
  base.out_dir = out_dir;
  base.assert_mode = assert_mode;
  base.out = &out;
  base.command = command;
  json doc;
  try {
    doc = load_document(config_path);
    base.config_hash = io::config_hash(doc);
    base.config_dir = std::filesystem::path(config_path).parent_path();
    if (seed) {
      base.seed = *seed;
    } else if (const auto it = doc.find("seed"); it != doc.end()) {
      if (!it->is_number_unsigned()) throw io::ConfigError("$.seed", "expected an unsigned 64-bit integer");
      base.seed = it->get<std::uint64_t>();
    }
    base.workers = workers ? *workers : default_workers();
  } catch (const io::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  if (command != "report-data") {
    Context ctx = base;
    Outcome o;
    try {
      ctx.config = effective_config(doc, command);
      o = run_command(ctx);
    } catch (const io::ConfigError& e) {
      o = {kConfigError, "config", e.what()};
    }
    report_outcome(ctx, o, out, err);
    return o.code;
  }

  std::vector<std::string> commands;
  try {
    commands = report_commands(doc);
  } catch (const io::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(base.config_hash));
  json manifest{{"version", io::kVersion}, {"config_hash", hash}, {"seed", base.seed}, {"commands", json::array()}};
  int code = kSuccess;
  for (const auto& name : commands) {
    Context ctx = base;
    ctx.command = name;
    out << "== " << name << '\n';
    Outcome o;
    try {
      ctx.config = effective_config(doc, name);
      o = run_command(ctx);
    } catch (const io::ConfigError& e) {
      o = {kConfigError, "config", e.what()};
    }
    report_outcome(ctx, o, out, err);
    json entry{{"command", name}, {"status", o.code == kSuccess ? "ok" : o.reason}};
    if (o.code != kSuccess) entry["message"] = o.message;
    manifest["commands"].push_back(std::move(entry));
    if (o.code == kConfigError) return kConfigError;
    if (o.code == kAssertionFailed) code = kAssertionFailed;
  }
  std::filesystem::create_directories(base.out_dir);
  std::ofstream(base.out_dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
  return code;
}

}  // namespace martlab::cli
