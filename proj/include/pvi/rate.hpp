#pragma once
// Empirical convergence-rate estimation: least squares on (log eps, log v)
// for tables of (eps, v) with v >= 0, estimating the exponent in v = O(eps^s).

#include <utility>
#include <vector>

namespace pvi {

struct RateFit {
    enum class Kind { fitted, exact_zero };
    Kind kind = Kind::fitted;
    double slope = 0.0;
    double intercept = 0.0;  // log v = intercept + slope * log eps
    double r_squared = 0.0;
    int n = 0;
};

// All values at or below zero_tol yield the exact_zero sentinel (the measured
// quantity vanished identically, slope meaningless). Mixing zeros with
// positive values, fewer than three positive pairs, nonpositive epsilons, or
// coincident epsilons are refused with std::invalid_argument.
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs, double zero_tol = 1e-12);

}  // namespace pvi
