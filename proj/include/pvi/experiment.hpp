#pragma once
// Batch experiment commands over a loaded configuration. Each command writes
// a header and one row per solve (CSV) or one JSON object per line (JSONL) to
// the given stream, followed by summary records (rate fits, schedule flags)
// as comment lines or kind-tagged objects. Rows echo the full parameter tuple
// (epsilon, sigma, h, omega, alpha, seed, warm_start) so any row reproduces
// its solve. Timestamps and progress go to the error stream only; the data
// stream is a pure function of the configuration.
//
// Exit codes: 0 success, 1 numerical failure (non-convergence, a failed
// trend, a violated bound), 2 configuration error (thrown as ConfigError and
// mapped by the caller).

#include <iosfwd>
#include <string>

#include "pvi/config.hpp"

namespace pvi {

struct CommandOptions {
    std::string format = "csv";  // csv | jsonl
    int threads = 1;             // parallel rungs where warm starts are off
};

// One penalty solve of the schedule's single step, perturbations applied.
// Fails (1) unless the solve converged and the certificate passed.
int cmd_solve(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
              std::ostream& err);

// The exact-data schedule; fits log penalty gap against log epsilon and
// fails (1) when the fit misses the configured slope or r^2 floors.
int cmd_converge(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
                 std::ostream& err);

// Set-perturbation schedule with the proximity-bound audit columns. Fails
// (1) on stagnation, non-decreasing errors, a bound violation, or an abort.
int cmd_perturb(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
                std::ostream& err);

// Regularized schedule under data perturbations. Fails (1) on an abort,
// non-decreasing errors, or stagnation.
int cmd_regularize(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
                   std::ostream& err);

// Runs the five audit suites (projection certificate, duality-map estimates,
// coercivity bound, projection stability, monotonicity) and reports one row
// per suite. Fails (1) unless every suite passes.
int cmd_audit(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
              std::ostream& err);

}  // namespace pvi
