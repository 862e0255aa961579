#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "martlab/io.hpp"

namespace martlab::cli {

using io::json;

class AssertionFailed : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One subcommand's view of the run: the document's top level merged with
/// its per-command section.
struct Context {
  std::string command;
  json config;
  std::uint64_t config_hash = 0;
  std::filesystem::path config_dir;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool assert_mode = false;
  std::ostream* out = nullptr;

  [[nodiscard]] io::Footer footer() const { return {config_hash, seed}; }
};

void cmd_check(Context& ctx);
void cmd_simulate(Context& ctx);
void cmd_ma_error(Context& ctx);
void cmd_clt(Context& ctx);
void cmd_wip(Context& ctx);
void cmd_quenched(Context& ctx);
void cmd_variance(Context& ctx);

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"check", "simulate", "ma-error", "clt",
                                                 "wip",   "quenched", "variance"};
  return names;
}

void dispatch(Context& ctx);

}  // namespace martlab::cli
