#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace crnhj::cli {

struct RunContext {
  std::string out_dir = ".";
  unsigned threads = 1;
  bool verbose = false;
  std::ostream* log = nullptr;
};

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;
};

const std::vector<std::string>& subcommands();

/// Dispatches one subcommand. Errors become an error JSON and a nonzero exit code.
RunResult run(const ExperimentConfig& cfg, const std::string& subcommand, const RunContext& ctx);

}  // namespace crnhj::cli
