#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "bperc/bperc.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kRuntime = 2, kWarnings = 3 };

struct Flags {
  std::string config;
  std::string out;
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool quiet = false;
};

void add_flags(CLI::App* cmd, Flags& f, bool config_required) {
  auto* c = cmd->add_option("--config", f.config, "campaign configuration (YAML)");
  if (config_required) c->required();
  cmd->add_option("--out", f.out, "output directory (overrides config)");
  cmd->add_option("--workers", f.workers, "worker threads (overrides config)")->check(CLI::Range(1u, 4096u));
  cmd->add_option("--seed", f.seed, "master seed (overrides config)");
  cmd->add_flag("--force", f.force, "overwrite existing results");
  cmd->add_flag("-q,--quiet", f.quiet, "no progress output");
}

int exit_for(bperc_status s) {
  if (s == BPERC_OK) return kOk;
  std::fprintf(stderr, "bperc: %s: %s\n", bperc_status_name(s), bperc_last_error());
  return (s == BPERC_E_CONFIG || s == BPERC_E_INVALID_ARGUMENT) ? kUsage : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo percolation with barrier allocation strategies"};
  app.set_version_flag("--version", std::string("bperc ") + bperc_version());
  app.require_subcommand(1);

  Flags f;
  auto* simulate = app.add_subcommand("simulate", "run Monte Carlo campaigns and write histograms");
  auto* analyze = app.add_subcommand("analyze", "percolation curves, thresholds and finite-size scaling");
  auto* curves = app.add_subcommand("curves", "fit critical curves and emit plot tables");
  auto* cost = app.add_subcommand("cost", "relative cost tables");
  auto* snapshot = app.add_subcommand("snapshot", "largest-cluster site classification");
  auto* validate = app.add_subcommand("validate-config", "check a configuration file");
  add_flags(simulate, f, true);
  add_flags(analyze, f, false);
  add_flags(curves, f, true);
  add_flags(cost, f, false);
  add_flags(snapshot, f, false);
  add_flags(validate, f, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  bperc_command_options opts{};
  opts.config_path = f.config.empty() ? nullptr : f.config.c_str();
  opts.out_dir = f.out.empty() ? nullptr : f.out.c_str();
  opts.workers = f.workers;
  opts.has_seed = f.seed.has_value() ? 1 : 0;
  opts.seed = f.seed.value_or(0);
  opts.force = f.force ? 1 : 0;
  opts.verbose = f.quiet ? 0 : 1;

  if (validate->parsed()) {
    bperc_config* cfg = nullptr;
    if (const bperc_status s = bperc_config_load(opts.config_path, &cfg); s != BPERC_OK) return exit_for(s);
    char hash[17];
    bperc_config_hash(cfg, hash, sizeof hash);
    bperc_config_free(cfg);
    std::printf("ok %s config_hash=%s\n", f.config.c_str(), hash);
    return kOk;
  }

  bperc_command_result result{};
  bperc_status s = BPERC_OK;
  if (simulate->parsed()) s = bperc_cmd_simulate(&opts, &result);
  else if (analyze->parsed()) s = bperc_cmd_analyze(&opts, &result);
  else if (curves->parsed()) s = bperc_cmd_curves(&opts, &result);
  else if (cost->parsed()) s = bperc_cmd_cost(&opts, &result);
  else if (snapshot->parsed()) s = bperc_cmd_snapshot(&opts, &result);
  if (s != BPERC_OK) return exit_for(s);

  if (!f.quiet)
    std::fprintf(stderr, "bperc: %zu file(s) written, %zu skipped, %zu warning(s)\n", result.files_written,
                 result.files_skipped, result.warnings);
  return result.warnings > 0 ? kWarnings : kOk;
}
