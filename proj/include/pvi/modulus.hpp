#pragma once
// Moduli of convexity and smoothness of the space's norm.
//
//   delta(eps) = inf { 1 - ||(x + y)/2||  :  ||x|| = ||y|| = 1, ||x - y|| = eps }
//   rho(tau)   = sup { (||x + tau y|| + ||x - tau y||)/2 - 1  :  ||x|| = ||y|| = 1 }
//   g(eps)     = delta(eps)/eps, continuous and increasing on (0, 2].
//
// All exponents have exact values. p = 2 (any weights) is an inner-product
// norm with closed forms
//   delta(eps) = 1 - sqrt(1 - eps^2/4),        rho(tau) = sqrt(1 + tau^2) - 1,
//   delta^{-1}(v) = 2 sqrt(2v - v^2),          g^{-1}(v) = 8v / (1 + 4v^2),
// and g(2) = 1/2. Dimension 1 is the same space under any p. For other p the
// weights drop out (x -> w^{1/p} x is a linear isometry onto plain lp) and
// Hanner's sharp two-dimensional extremals give the classical Lp moduli:
//   p >= 2:     delta(eps) = 1 - (1 - (eps/2)^p)^{1/p},
//   1 < p < 2:  (1 - delta + eps/2)^p + |1 - delta - eps/2|^p = 2 implicitly,
// and rho comes from the exact finite-dimensional duality
//   rho_B(tau) = sup_{eps} (tau eps / 2 - delta_{B*}(eps)).
// Inverses are bisections of the monotone closed forms.
//
// force_numeric replaces the closed forms by grid estimation (structured
// two-coordinate extremal candidates, random chords, a warm start from the
// neighbouring grid point, and a seeded local descent, then a monotone
// rearrangement of g-hat), kept as an independent cross-check of the
// analytic path. At the grid nodes a sampled infimum over-estimates delta
// and a sampled supremum under-estimates rho; between nodes the table is
// interpolated linearly, and since both profiles are convex the chord lies
// above the graph. For delta the two effects agree (the estimate stays
// above the true value everywhere); for rho they compete, so off-node
// evaluations are approximations without a guaranteed side.

#include <cstdint>
#include <vector>

#include "pvi/space.hpp"

namespace pvi {

// Constant L from the duality-mapping estimates; the source inequalities
// hold for any 1 < L < 3.18 and the checks fix the extreme value.
inline constexpr double kJEstimateL = 3.18;

struct ModulusOptions {
    int grid_points = 64;
    int chord_samples = 160;    // random candidate pairs per grid point
    int descent_rounds = 120;   // local descent proposals per grid point
    int rho_samples = 400;      // candidate pairs for the smoothness grid
    double tau_max = 4.0;
    std::uint64_t seed = 2024;
    bool force_numeric = false; // estimate even when closed forms exist
};

class ModulusProfile {
  public:
    struct Inverse {
        double value = 0.0;     // argument achieving the requested level
        bool saturated = false; // level above the sup; value holds the domain end
        double sup_value = 0.0; // the achievable maximum of the function
    };
    struct Sandwich {
        double c1 = 0.0, gamma = 1.0, c2 = 0.0; // c1 eps^gamma <= g(eps) <= c2 eps
    };

    double delta(double eps) const;  // eps in [0, 2]
    double rho(double tau) const;    // tau >= 0, linear extension past tau_max
    double g(double eps) const;      // delta(eps)/eps, g(0) = 0
    double g_max() const;            // g(2)
    double delta_max() const;        // delta(2)

    Inverse delta_inverse(double v) const;
    Inverse g_inverse(double v) const;

    const Sandwich& sandwich() const { return sandwich_; }
    bool analytic() const { return analytic_; }
    const SpaceSpec& space() const { return space_; }
    double tau_max() const { return tau_grid_.empty() ? 0.0 : tau_grid_.back(); }

  private:
    friend ModulusProfile build_modulus_profile(const SpaceSpec&, const ModulusOptions&);

    SpaceSpec space_;
    bool analytic_ = false;
    std::vector<double> eps_grid_, delta_grid_; // increasing, delta_grid via g-hat
    std::vector<double> tau_grid_, rho_grid_;   // increasing
    Sandwich sandwich_{};
};

ModulusProfile build_modulus_profile(const SpaceSpec& s, const ModulusOptions& opt = {});

// Empirical audit of the four duality-mapping estimates on the ball of
// radius R (L fixed at kJEstimateL, C1 = max{L, R}, C2 = max{1, R},
// C1bar = 8(sqrt(1 + 4R^2) + 1) + C1):
//
//   upper:       ||Jx - Jy||_* <= C2 ginv_dual(2 L C2 ||x - y||)
//   pairing:     <Jx - Jy, x - y> <= 8||x - y||^2 + 8 C1 rho(||x - y||)
//   pairing_alt: <Jx - Jy, x - y> <= C1bar rho(||x - y||)
//   lower:       <Jx - Jy, x - y> >= (2L)^{-1} delta(||x - y||/C2)
//
// When the upper estimate's g-inverse saturates, the right side degrades to
// 2 C2 >= ||Jx||_* + ||Jy||_*, which still dominates; such pairs are counted
// separately. Slack is (bound - quantity) for upper bounds and
// (quantity - bound) for the lower one, so negative slack is a violation.
struct JEstimateReport {
    int pairs = 0;
    int upper_saturated = 0;
    double worst_upper = 0.0;
    double worst_pairing = 0.0;
    double worst_pairing_alt = 0.0;
    double worst_lower = 0.0;
    bool pass(double tol) const {
        return worst_upper >= -tol && worst_pairing >= -tol &&
               worst_pairing_alt >= -tol && worst_lower >= -tol;
    }
};

JEstimateReport check_J_estimates(const ModulusProfile& primal, const ModulusProfile& dual,
                                  double R, int n_pairs, std::uint64_t seed);

}  // namespace pvi
