#include "pvi/rate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pvi {

RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs, double zero_tol) {
    if (pairs.empty()) throw std::invalid_argument("fit_rate: empty table");
    int zeros = 0;
    for (const auto& [eps, value] : pairs) {
        if (!(eps > 0.0) || !std::isfinite(eps))
            throw std::invalid_argument("fit_rate: epsilon must be positive");
        if (!(value >= 0.0) || !std::isfinite(value))
            throw std::invalid_argument("fit_rate: values must be finite and >= 0");
        if (value <= zero_tol) ++zeros;
    }

    RateFit fit;
    if (zeros == static_cast<int>(pairs.size())) {
        fit.kind = RateFit::Kind::exact_zero;
        fit.r_squared = 1.0;
        fit.n = static_cast<int>(pairs.size());
        return fit;
    }
    if (zeros > 0)
        throw std::invalid_argument(
            "fit_rate: table mixes exact zeros with positive values; no single rate exists");
    if (pairs.size() < 3)
        throw std::invalid_argument("fit_rate: need at least three positive pairs");

    const double m = static_cast<double>(pairs.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [eps, value] : pairs) {
        sx += std::log(eps);
        sy += std::log(value);
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [eps, value] : pairs) {
        const double dx = std::log(eps) - mx;
        const double dy = std::log(value) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit_rate: epsilons must be distinct");

    fit.kind = RateFit::Kind::fitted;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.n = static_cast<int>(pairs.size());
    if (syy <= 0.0) {
        fit.r_squared = 1.0;  // all values equal: the flat fit is exact
    } else {
        fit.r_squared = std::clamp((sxy * sxy) / (sxx * syy), 0.0, 1.0);
    }
    return fit;
}

}  // namespace pvi
