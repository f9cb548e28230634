#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "cavityg2/commands.hpp"
#include "cavityg2/run_config.hpp"

// Exit codes: 0 success, 1 runtime/module error, 2 usage or config error.
int main(int argc, char** argv) {
  CLI::App app{"Photon statistics workbench: emitter correlation model, "
               "click-stream Monte Carlo, and start-stop correlator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "run configuration file (INI)");
  app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads for simulate")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "override the configured RNG seed");

  auto* model = app.add_subcommand("model", "correlation curves and composed ensemble g2");
  auto* simulate = app.add_subcommand("simulate", "generate a Monte Carlo click stream");
  auto* correlate = app.add_subcommand("correlate", "histogram a click stream");
  auto* fit = app.add_subcommand("fit", "scaling fit across the atom-number sweep");

  std::string stream_path;
  bool naive = false;
  double bin_us = 0.0;
  double tau_max_us = 0.0;
  correlate->add_option("stream", stream_path, "input .pstm click stream")->required();
  correlate->add_flag("--naive", naive, "use the all-pairs reference counter");
  auto* bin_opt = correlate->add_option("--bin-us", bin_us, "histogram bin width (us)");
  auto* tau_opt = correlate->add_option("--tau-max-us", tau_max_us, "histogram half-range (us)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cavityg2::CommandContext ctx;
    if (!config_path.empty()) ctx.cfg = cavityg2::load_run_config(config_path);
    if (seed_opt->count() > 0) ctx.cfg.seed = seed;
    if (bin_opt->count() > 0) ctx.cfg.bin_us = bin_us;
    if (tau_opt->count() > 0) ctx.cfg.tau_max_us = tau_max_us;
    ctx.out_dir = out_dir;
    ctx.threads = threads;
    if (model->parsed()) {
      cavityg2::cmd_model(ctx);
    } else if (simulate->parsed()) {
      cavityg2::cmd_simulate(ctx);
    } else if (correlate->parsed()) {
      cavityg2::cmd_correlate(ctx, stream_path, naive);
    } else if (fit->parsed()) {
      cavityg2::cmd_fit(ctx);
    }
  } catch (const cavityg2::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
