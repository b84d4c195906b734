#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "binopt/config.hpp"
#include "binopt/lm.hpp"

namespace binopt {

struct RunOptions {
  int jobs = 1;
  bool quiet = false;
  std::optional<std::string> output_dir;         // overrides the config
  std::optional<std::uint64_t> seed_override;    // rebases all derived seeds
};

/// Result of one (noise level x initial guess) cell.
struct CellOutcome {
  std::string label;
  double noise_level = 0.0;
  std::size_t guess_index = 0;
  std::uint64_t chain_seed = 0;
  ThetaVec init{};
  ThetaVec mcmc_mean{};
  double acceptance_rate = 0.0;
  ThetaVec ess{};
  std::size_t solver_failures = 0;
  std::optional<ThetaVec> lm_theta;
  std::optional<bool> lm_converged;
};

struct ExperimentOutcome {
  bool ok = false;
  std::string error;
  std::string output_dir;
  std::vector<std::string> artifacts;  // paths relative to output_dir
  std::vector<CellOutcome> cells;
};

/// Runs the full pipeline: per noise level generate data once, then run
/// MCMC and (if enabled) LM from every initial guess; writes traces,
/// histograms, tables, drift curves, summary.txt and manifest.json under
/// the output directory. Cells run in parallel when jobs > 1.
///
/// Never throws for runtime failures: the manifest gets a FAILED marker,
/// partial outputs are kept, and the outcome carries the error. Config
/// validation problems do throw ConfigError before anything is written.
ExperimentOutcome run_experiment(const ExperimentConfig& config,
                                 const RunOptions& options = {});

}  // namespace binopt
