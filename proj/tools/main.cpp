#include <iostream>

#include "CLI11.hpp"
#include "config.hpp"
#include "crnhj/version.hpp"
#include "runner.hpp"

int main(int argc, char** argv) {
  using namespace crnhj::cli;
  CLI::App app{"State-constrained reaction network Hamilton-Jacobi experiments"};
  app.set_version_flag("--version", crnhj::kVersion);

  std::string subcommand;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool verbose = false;
  bool print_config = false;

  app.add_option("subcommand", subcommand, "What to run")
      ->check(CLI::IsMember(subcommands()));
  app.add_option("--config", config_path, "JSON experiment config (built-in default when omitted)")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Override run.seed");
  app.add_option("--threads", threads, "Worker cap for ensembles")->check(CLI::Range(1u, 1024u));
  app.add_flag("--verbose", verbose, "Progress on stderr");
  app.add_flag("--print-config", print_config, "Print the effective config and exit");
  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? parse_config_text(default_config_text()) : parse_config(config_path);
  } catch (const ConfigError& e) {
    nlohmann::json fields = nlohmann::json::array();
    for (const auto& f : e.fields()) fields.push_back({{"field", f.field}, {"message", f.message}});
    nlohmann::json err{{"status", "error"},
                       {"version", crnhj::kVersion},
                       {"error", {{"kind", e.kind_name()}, {"message", e.what()}, {"fields", fields}}}};
    std::cout << err.dump(2) << '\n';
    return 1;
  }
  if (seed) cfg.run.seed = *seed;
  if (print_config) {
    std::cout << to_json(cfg).dump(2) << '\n';
    return 0;
  }
  if (subcommand.empty()) {
    std::cerr << "a subcommand is required\n" << app.help();
    return 1;
  }

  RunContext ctx;
  ctx.out_dir = out_dir;
  ctx.threads = threads;
  ctx.verbose = verbose;
  ctx.log = &std::cerr;
  RunResult res = run(cfg, subcommand, ctx);
  for (const auto& f : res.files) std::cout << f << '\n';
  return res.exit_code;
}
