#pragma once
// Penalty equations and their solvers.
//
// The constrained variational inequality
//
//     find x* in Omega :  <z - f, x - x*> >= 0  for all x in Omega, z in Ax*
//
// is replaced by the unconstrained operator equation
//
//     T(x) = A(x) + eps^{-1} J(x - P_Omega x) + alpha J(x) = f,
//
// whose root x_eps is a generalized solution: for every probe y,
//
//     <A(y) - f, y - x_eps> + eps^{-1} <J(x_eps - P x_eps), y - x_eps>
//         + alpha <J(y), y - x_eps> >= 0,
//
// stated with the monotone part evaluated at the probe point (the weak,
// Minty-style form), which a root satisfies up to residual * ||y - x_eps||
// and which is insensitive to kinks of A at x_eps itself.
//
// solve_penalty drives dual_norm(T(x) - f) to tolerance with an extragradient
// backbone over a large working box (only monotonicity and continuity are
// assumed), accelerated by a safeguarded finite-difference Newton step and a
// bisected line search along the residual direction as the last resort. The
// step size self-tunes, which tames the eps^{-1} stiffness near the boundary
// of the set.
//
// solve_vi_reference is the independent ground-truth oracle: the inequality
// itself does not mention the norm, so the same VI is solved in Euclidean
// geometry (Euclidean projections, plain extragradient) and certified by the
// sampled Minty inequality.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "pvi/operators.hpp"
#include "pvi/sets.hpp"
#include "pvi/space.hpp"

namespace pvi {

struct PenaltyProblem {
    MonotoneOp op;      // A or A^h
    DualVector rhs;     // f or f^omega
    ConvexSet set;      // Omega or Omega_sigma
    SpaceSpec space;
    double epsilon = 1.0;
    double alpha = 0.0;  // 0 = unregularized

    // Throws std::invalid_argument on epsilon <= 0, alpha < 0, or dimension
    // mismatch between space, set, rhs, and the operator's domain box.
    void validate() const;
};

struct SolveOptions {
    double tol = 1e-9;             // residual target, dual norm
    int max_iter = 100000;
    std::optional<Vector> init;    // warm start; projected onto the set first
    int certificate_samples = 1000;
    std::uint64_t seed = 7;
    double working_margin = 10.0;  // working box = set box inflated this much
};

struct CertificateResult {
    double slack = 0.0;      // worst Minty slack over samples
    double threshold = 0.0;  // pass iff slack >= -threshold
    int samples = 0;
    bool pass = false;
};

struct SolveReport {
    Vector x;
    double residual = 0.0;    // dual_norm(T(x) - rhs)
    int iterations = 0;       // outer rounds consumed
    int newton_steps = 0;     // accepted Newton updates
    int backbone_steps = 0;   // accepted extragradient / line-search updates
    double penalty_gap = 0.0; // ||x - P_Omega x||
    CertificateResult certificate;
    bool converged = false;   // residual <= tol
};

// mu(x) = J(x - P_Omega x): the penalty operator. Vanishes on the set and is
// monotone because the projection is metric.
DualVector penalty_operator(const SpaceSpec& s, const ConvexSet& set, const Vector& x);

// T as a callable oracle: T(x) = op(x) + eps^{-1} mu(x) + alpha J(x).
std::function<DualVector(const Vector&)> assemble(const PenaltyProblem& problem);

SolveReport solve_penalty(const PenaltyProblem& problem, const SolveOptions& opts = {});

// Worst sampled slack of the generalized-solution inequality at x. Samples
// mix set points with a local cloud around x, all kept inside the operator
// domain. A root passes with slack >= -max(1e-8, 10 tol diam); a perturbed x
// fails decisively.
CertificateResult check_generalized_solution(const PenaltyProblem& problem, const Vector& x,
                                             int n_samples, std::uint64_t seed,
                                             double tol = 1e-9);

// ---- reference oracle ----

struct ReferenceOptions {
    double tol = 1e-10;  // Euclidean fixed-point residual target
    int max_iter = 200000;
    int certificate_samples = 1000;
    std::uint64_t seed = 11;
    std::optional<Vector> init;
};

struct VISolution {
    Vector x_star;
    double fp_residual = 0.0;         // ||x - P(x - (A x - f))||_2
    double certificate_slack = 0.0;   // worst Minty slack over set samples
    int iterations = 0;
    bool converged = false;
    std::string method;
};

// Euclidean metric projection onto the set (the reference geometry): boxes
// clamp, halfspaces use the Euclidean normal formula, balls of the space
// norm are handled by nested bisection on the KKT multiplier.
Vector project_euclidean(const SpaceSpec& s, const ConvexSet& set, const Vector& x);

VISolution solve_vi_reference(const SpaceSpec& space, const MonotoneOp& op, const DualVector& f,
                              const ConvexSet& set, const ReferenceOptions& opts = {});

}  // namespace pvi
