#pragma once
// Experiment configuration: a strict JSON schema describing one problem
// instance (space, operator, set, right-hand side), a parameter schedule,
// perturbation generators, solver and audit knobs, and output options.
//
// Parsing is strict: unknown keys anywhere are rejected with a dotted-path
// diagnostic, and malformed JSON reports the line of the failure. Every
// numeric field is validated on construction, so a loaded config is a fully
// buildable problem. Three named configs ship embedded in the library and
// mirror the files under configs/: "paper-testbed" (dim 5, p = 3, diagonal
// power operator on the unit box, boundary-active solution),
// "paper-testbed-p2" (the same instance in the Hilbert norm), and
// "flat-regularized" (a flat-direction operator demanding regularization).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pvi/modulus.hpp"
#include "pvi/operators.hpp"
#include "pvi/schedule.hpp"
#include "pvi/sets.hpp"
#include "pvi/solver.hpp"
#include "pvi/space.hpp"

namespace pvi {

// Configuration problems carry the offending path in the message and map to
// process exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

struct AuditOptions {
    int pairs = 1000;
    std::uint64_t seed = 99;
    double radius = 2.0;  // sampling radius for the duality-map estimates
};

struct OutputOptions {
    std::string path;            // empty: the command's default stream
    std::string format = "csv";  // csv | jsonl
};

struct ExperimentConfig {
    std::string name;
    SpaceSpec space;
    std::string operator_name;
    OperatorParams operator_params;
    MonotoneOp op;                // built and validated during parsing
    ConvexSet set;                // built and validated during parsing
    DualVector rhs;
    Schedule schedule;
    OperatorPerturbation op_pert;
    RhsPerturbation rhs_pert;
    bool audit_two_set = false;
    SolveOptions solve;
    std::uint64_t init_seed = 2718;
    ReferenceOptions reference;
    double min_slope = 0.9;
    double min_r2 = 0.95;
    ModulusOptions modulus;
    AuditOptions audit;
    OutputOptions output;
};

// Parses a JSON document; origin names the source in diagnostics.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

// Loads a config from a file path, or, when no such file exists, from the
// embedded named configs. Unknown names list the available ones.
ExperimentConfig load_config(const std::string& path_or_name);

const std::vector<std::string>& builtin_config_names();
std::string builtin_config_text(const std::string& name);

}  // namespace pvi
