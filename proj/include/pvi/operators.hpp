#pragma once
// Monotone operators A : B -> B* as deterministic selection oracles, the
// built-in examples, structured perturbations, and sampled audits.
//
// Monotonicity classes:
//   monotone             <z1 - z2, x1 - x2> >= 0
//   strictly_monotone    > 0 for x1 != x2
//   uniformly_monotone   >= psi(||x1 - x2||)        (normalized form)
//                        >= psi(||x1 - x2||) ||x1 - x2||   (rate form)
// A MonotonicityModulus carries which of the two inequalities it claims via
// its `normalized` flag; audits and bounds state the form they used.
//
// Perturbations: A^h x = A x + h gamma(||x||) u(x) with gamma nondecreasing
// and dual_norm(u(x)) <= 1, so dual_norm(A^h x - A x) <= h gamma(||x||);
// f^omega = f + omega * unit dual direction, deviation exactly omega.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pvi/sets.hpp"
#include "pvi/space.hpp"

namespace pvi {

enum class MonotoneClass { monotone, strictly_monotone, uniformly_monotone };

struct MonotonicityModulus {
    enum class Form { power, table };
    Form form = Form::power;
    double c = 1.0;  // psi(t) = c t^s
    double s = 2.0;
    std::vector<std::pair<double, double>> table;  // increasing (t, psi(t))
    bool normalized = false;  // true: pairing >= psi(t); false: >= psi(t) * t

    void validate() const;
    double eval(double t) const;
    // The lower bound the pairing must meet at separation t.
    double required_pairing(double t) const;
    // The rate-form psi entering the two-set bound (pairing >= rate(t) * t).
    double rate(double t) const;
    // psi^{-1} by bisection; psi is strictly increasing for c > 0, s >= 1.
    double inverse(double v) const;
};

struct MonotoneOp {
    std::string name;
    MonotoneClass cls = MonotoneClass::monotone;
    std::optional<Box> domain_box;  // nullopt: all of R^n
    std::function<DualVector(const Vector&)> eval;
    std::function<double(const Vector&)> potential;  // empty when not a gradient
    std::optional<MonotonicityModulus> modulus;

    // Selection oracle; throws std::domain_error outside the declared domain.
    DualVector operator()(const Vector& x) const;
    bool in_domain(const Vector& x, double margin = 0.0) const;
};

// ---- built-in examples ----

// (Ax)_i = x_i |x_i|^{s-1}; gradient of sum_i |x_i|^{s+1}/(s+1). For s = 2 the
// scalar bound (u|u| - v|v|)(u - v) >= |u - v|^3 / 2 aggregates to the rate
// modulus psi(t) = c t^2 with c = min(1, n^{1 - 3/p}) / 2 on unit weights.
MonotoneOp make_diag_power(const SpaceSpec& space, double s_exp);

// Component m (1-based): x_m |x_m|^{m-1}; gradient of sum_m |x_m|^{m+1}/(m+1).
// Unbounded on bounded sets as the index grows: ||A(2 e_m)||_* = 2^m.
MonotoneOp make_power_sum(const SpaceSpec& space);

// First component identically zero, the rest x_m |x_m|^{s-1}: monotone but
// with a flat direction (strictly proper), the class needing regularization.
MonotoneOp make_flat_first(const SpaceSpec& space, double s_exp);

// (Ax)_i = x_i. On p = 2 unit weights: pairing = t^2, rate psi(t) = t.
MonotoneOp make_identity(const SpaceSpec& space);

// A x = z constant: monotone with zero pairing everywhere.
MonotoneOp make_constant(const SpaceSpec& space, DualVector z);

// (Ax)_i = sign(x_i) with selection 0 at the kink (minimal-norm element).
MonotoneOp make_sign(const SpaceSpec& space);

// Negative control: -op, declared class left as claimed so audits refute it.
MonotoneOp negate(const MonotoneOp& op);

struct OperatorParams {
    double power = 2.0;
    std::vector<double> values;  // constant operator
};
MonotoneOp make_operator(const SpaceSpec& space, const std::string& name,
                         const OperatorParams& params = {});

// ---- perturbations ----

struct OperatorPerturbation {
    enum class Mode { constant_direction, sinusoid_field, monotone_safe };
    double h = 0.0;
    double gamma_const = 1.0;  // gamma(t) = gamma_const + gamma_slope * t,
    double gamma_slope = 0.0;  // both >= 0 so gamma is nondecreasing
    Mode mode = Mode::monotone_safe;
    DualVector direction;       // constant_direction (normalized internally)
    std::uint64_t seed = 0;     // sinusoid_field
    double safe_scale = 1.0;    // monotone_safe: u(x) = Jx / safe_scale, which
                                // keeps A^h monotone; the gamma envelope holds
                                // wherever ||x|| <= safe_scale
    void validate() const;
};

MonotoneOp perturb_operator(const SpaceSpec& space, const MonotoneOp& op,
                            const OperatorPerturbation& pert);

struct RhsPerturbation {
    double omega = 0.0;
    DualVector direction;  // normalized to unit dual norm internally
};

DualVector perturb_rhs(const SpaceSpec& space, const DualVector& f, const RhsPerturbation& pert);

// ---- audits ----

struct MonotonicityReport {
    double worst_pairing = 0.0;  // min <z1 - z2, x1 - x2> over sampled pairs
    int pairs = 0;
    bool pass(double tol) const { return worst_pairing >= -tol; }
};
MonotonicityReport check_monotonicity(const MonotoneOp& op, int n_pairs, std::uint64_t seed,
                                      const Box& region);

struct UniformMonotonicityReport {
    double worst_slack = 0.0;  // min of pairing - required_pairing(t)
    int pairs = 0;
    bool normalized_form = false;
    bool pass(double tol) const { return worst_slack >= -tol; }
};
UniformMonotonicityReport check_uniform_monotonicity(const SpaceSpec& space, const MonotoneOp& op,
                                                     const MonotonicityModulus& psi, int n_pairs,
                                                     std::uint64_t seed, const Box& region);

// Fits psi(t) = c t^s in the rate form: c = safety * min pairing / t^{s+1}
// over sampled pairs. Standard workflow: fit on one seed, audit on another.
MonotonicityModulus fit_power_modulus(const SpaceSpec& space, const MonotoneOp& op, double s_exp,
                                      int n_pairs, std::uint64_t seed, const Box& region,
                                      double safety = 0.8);

// Coercivity-style lower bound with F = op - f:
//   <F(x), x - x0> >= r0 ||F(x)||_* - c0 (||x - x0|| + r0),
// c0 = 1.1 * (sampled sup of ||F||_* over the ball S(r0, x0) united with the
// axis-extreme points x0 +- r0 w_i^{-1/p} e_i).
struct CoercivityReport {
    double c0 = 0.0;
    double worst_slack = 0.0;
    int samples = 0;
    bool pass(double tol) const { return worst_slack >= -tol; }
};
CoercivityReport check_lemma2_bound(const SpaceSpec& space, const MonotoneOp& op,
                                    const DualVector& f, const Vector& x0, double r0,
                                    int n_samples, std::uint64_t seed, const Box& region);

// For gradient operators: central finite differences of the potential against
// eval, at sample points kept away from coordinate kinks. Returns the worst
// relative error.
double check_potential_consistency(const MonotoneOp& op, int n_points, std::uint64_t seed,
                                   const Box& region, double fd_step = 1e-6,
                                   double kink_margin = 0.05);

}  // namespace pvi
