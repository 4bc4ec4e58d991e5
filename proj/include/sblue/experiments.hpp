#pragma once

#include "sblue/io.hpp"

namespace sblue {

// Task runners behind the command line subcommands.  Each writes its files
// under cfg.output_dir; all compute happens before the first byte is
// written so partial outputs never mix runs.

// field.csv/.pgm, mse.csv/.pgm, summary.txt
void run_reconstruct(const RunConfig& cfg);

// mask.csv, trace.csv, summary.txt; throws Infeasible (after writing the
// files) when even full activation misses the variance bound.
void run_select(const RunConfig& cfg);

// mse_vs_counts.csv or cem_vs_optimal.csv depending on the configured name.
void run_experiment(const RunConfig& cfg);

// Monte-Carlo / exhaustive-search verification suite; prints one PASS or
// FAIL line per check to stdout and returns whether all of them passed.
bool run_oracle(const RunConfig& cfg);

}  // namespace sblue
