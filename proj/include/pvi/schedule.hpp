#pragma once
// Parameter schedules for the penalty method under data perturbations, and
// the two-set proximity audit.
//
// A schedule is a strictly decreasing ladder eps_1 > eps_2 > ... of penalty
// parameters with per-rung perturbation levels (sigma for the set, h for the
// operator, omega for the right-hand side) and regularization weights alpha,
// classified by the coupling rule it claims:
//
//   exact                 sigma = h = omega = alpha = 0;
//   theorem2              h = omega = alpha = 0, only the set is perturbed;
//                         convergence needs ginv_dual(deltainv(sigma))/eps -> 0;
//   theorem3_regularized  alpha > 0 on every rung (or identically zero, the
//                         unregularized negative control); convergence needs
//                         (h + omega)/alpha -> 0 and the set coupling with an
//                         extra alpha in the denominator.
//
// Coupling quantities are recorded per rung and their trends reported, never
// enforced: a schedule that violates its own coupling is exactly the negative
// control the experiments call for.
//
// run_schedule builds the perturbed data per rung (outward inflation at
// Hausdorff distance exactly sigma, operator envelope exactly h gamma(||x||),
// right-hand side shifted exactly omega), solves, and measures errors against
// the Euclidean reference solution of the unperturbed problem.
//
// check_two_set_bound audits the proximity estimate for two penalty solutions
// differing only in the constraint set:
//
//   psi(||x1 - x2||) <= eps^{-1} C ginv_dual(2 C^2 L deltainv(4 L (d+r) sigma)),
//   C = 2 max{1, r+d},  d = max_i dist(theta, Omega_i),  r = max_i ||x_i||,
//
// with psi the rate-form monotonicity modulus and L the fixed duality-map
// constant. When proximity envelopes f1, f2 are supplied, (d+r) inside
// deltainv becomes (d+r)(f1(2r+d) + f2(2r+d)). A saturated modulus inverse
// degrades the right side to its sup value and raises the vacuous flag.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "pvi/modulus.hpp"
#include "pvi/operators.hpp"
#include "pvi/solver.hpp"

namespace pvi {

struct ScheduleStep {
    double epsilon = 1.0;
    double sigma = 0.0;
    double h = 0.0;
    double omega = 0.0;
    double alpha = 0.0;
};

enum class CouplingRule { exact, theorem2, theorem3_regularized };

struct Schedule {
    std::vector<ScheduleStep> steps;
    CouplingRule coupling = CouplingRule::exact;
    bool warm_start = true;

    // Throws std::invalid_argument when the ladder or the coupling shape is
    // malformed (see the rules above).
    void validate() const;
};

// A rung fails the halving test when its error exceeds this fraction of the
// previous rung's (and both sit above the solver noise floor).
inline constexpr double kStagnationRatio = 0.5;

struct TwoSetBoundReport {
    double t = 0.0;      // ||x1 - x2||
    double lhs = 0.0;    // psi(t), rate form
    double rhs = 0.0;    // the full right side at this sigma
    double slack = 0.0;  // rhs - lhs
    bool vacuous = false;
    double C = 0.0, d = 0.0, r = 0.0, sigma = 0.0;
    double delta_arg = 0.0, delta_value = 0.0;  // deltainv argument and value
    double g_arg = 0.0, g_value = 0.0;          // ginv_dual argument and value
    bool pass(double tol) const { return vacuous || slack >= -tol; }
};

struct ProximityEnvelopes {
    std::function<double(double)> f1, f2;
};

TwoSetBoundReport check_two_set_bound(const SpaceSpec& space, const PenaltyProblem& p1,
                                      const SolveReport& r1, const PenaltyProblem& p2,
                                      const SolveReport& r2, const MonotonicityModulus& psi,
                                      const ModulusProfile& primal, const ModulusProfile& dual,
                                      double sigma,
                                      const ProximityEnvelopes* envelopes = nullptr);

struct StepRecord {
    ScheduleStep step;
    SolveReport report;
    double error = std::numeric_limits<double>::quiet_NaN();  // ||x - x_ref||
    double gap_over_eps = 0.0;
    double sigma_used = 0.0;     // Hausdorff distance actually realized
    double coupling_set = std::numeric_limits<double>::quiet_NaN();
    bool coupling_saturated = false;
    double coupling_data = std::numeric_limits<double>::quiet_NaN();     // (h+omega)/alpha
    double coupling_set_reg = std::numeric_limits<double>::quiet_NaN();  // .../(alpha eps)
    double displacement = std::numeric_limits<double>::quiet_NaN();      // ||x_k - x_{k-1}||
    std::optional<TwoSetBoundReport> two_set;  // vs the exact-set twin
    bool twin_failed = false;                  // audit requested but twin did not converge
};

struct ScheduleResult {
    std::vector<StepRecord> records;
    VISolution reference;
    bool warm_start = true;
    bool aborted = false;
    int aborted_at = -1;
    bool errors_decreasing = true;
    bool stagnation = false;
    bool couplings_decreasing = true;
    bool bound_violation = false;
};

struct ScheduleInputs {
    PenaltyProblem base;           // epsilon and alpha overridden per rung
    OperatorPerturbation op_pert;  // h overridden per rung
    RhsPerturbation rhs_pert;      // omega overridden per rung
    SolveOptions solve;
    ReferenceOptions reference;
    const ModulusProfile* primal = nullptr;  // coupling columns + two-set audit
    const ModulusProfile* dual = nullptr;
    bool audit_two_set = false;              // solve the exact-set twin where sigma > 0
    std::optional<MonotonicityModulus> psi;  // overrides base.op.modulus for the audit
    std::uint64_t init_seed = 2718;          // fresh per-rung inits when warm_start is off
    int threads = 1;                         // honored only without warm starts
};

// Solves the ladder. A rung that fails to converge aborts the run with the
// partial records (the failing rung included). Rungs run concurrently only
// when warm starts are off; the result declares the mode actually used.
ScheduleResult run_schedule(const ScheduleInputs& in, const Schedule& schedule);

}  // namespace pvi
