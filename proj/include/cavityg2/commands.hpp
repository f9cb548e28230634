#pragma once

#include <string>

#include "cavityg2/run_config.hpp"

namespace cavityg2 {

// Shared subcommand inputs. Every command creates out_dir if needed and drops
// an effective_config.ini snapshot there, so a run can be reproduced from its
// artifacts alone.
struct CommandContext {
  RunConfig cfg;
  std::string out_dir = ".";
  int threads = 1;
};

// Master-equation correlation curves (g1_atom.csv, g2_atom.csv) plus one
// composed ensemble curve and classification per sweep entry.
void cmd_model(const CommandContext& ctx);

// Monte Carlo click stream for the configured mode -> clicks.pstm.
void cmd_simulate(const CommandContext& ctx);

// Click stream -> correlation histogram (histogram.csv) and classification.
// naive switches in the all-pairs reference counter (small streams only).
void cmd_correlate(const CommandContext& ctx, const std::string& stream_path, bool naive);

// Hyperbolic scaling fit g2 = offset + slope/nbar across the sweep at
// tau = 0 and tau = 1 us, plus derived scalars -> fit_report.txt.
void cmd_fit(const CommandContext& ctx);

}  // namespace cavityg2
