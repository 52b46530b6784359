#include "pvi/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

namespace pvi {

namespace {

// ---- closed forms for inner-product norms (p = 2 or dim = 1) ----

double hilbert_delta(double eps) {
    return 1.0 - std::sqrt(std::max(0.0, 1.0 - 0.25 * eps * eps));
}

double hilbert_rho(double tau) {
    return std::sqrt(1.0 + tau * tau) - 1.0;
}

double hilbert_g(double eps) {
    // delta/eps rewritten to avoid cancellation at small eps.
    return eps / (4.0 * (1.0 + std::sqrt(std::max(0.0, 1.0 - 0.25 * eps * eps))));
}

double hilbert_g_inverse(double v) {
    return 8.0 * v / (1.0 + 4.0 * v * v);
}

double hilbert_delta_inverse(double v) {
    return 2.0 * std::sqrt(std::max(0.0, 2.0 * v - v * v));
}

// ---- closed forms for lp norms, dim >= 2 ----
//
// Weights never enter: x -> w^{1/p} x is a linear isometry onto plain lp, and
// the moduli are isometric invariants. Hanner's inequalities are sharp on
// two-dimensional coordinate sections, so for n >= 2 the lp^n moduli equal
// the classical Lp ones: explicit for p >= 2, implicit for 1 < p < 2.

double hanner_delta(double p, double eps) {
    eps = std::clamp(eps, 0.0, 2.0);
    if (eps <= 0.0) return 0.0;
    if (eps >= 2.0) return 1.0;
    const double a = 0.5 * eps;
    if (p >= 2.0) {
        // 1 - (1 - a^p)^{1/p} without cancellation at small a.
        return -std::expm1(std::log1p(-std::pow(a, p)) / p);
    }
    // (1 - d + a)^p + |1 - d - a|^p = 2, strictly decreasing in d on [0, 1].
    if (a < 1e-5) return 0.5 * (p - 1.0) * a * a;  // second-order expansion
    const auto excess = [&](double d) {
        return std::pow(1.0 - d + a, p) + std::pow(std::fabs(1.0 - d - a), p) - 2.0;
    };
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-16 * std::max(1e-9, lo); ++iter) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Lindenstrauss duality, exact in finite dimension:
//   rho_B(tau) = sup_{eps in [0, 2]} (tau eps / 2 - delta_{B*}(eps)).
// delta is convex, so the objective is concave and ternary search finds the
// supremum. For p = 2 this reproduces sqrt(1 + tau^2) - 1 identically.
double hanner_rho(double p, double tau) {
    if (tau <= 0.0) return 0.0;
    const double q = p / (p - 1.0);
    const auto objective = [&](double eps) { return 0.5 * tau * eps - hanner_delta(q, eps); };
    double lo = 0.0, hi = 2.0;
    for (int iter = 0; iter < 160 && hi - lo > 1e-13; ++iter) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (objective(m1) < objective(m2))
            lo = m1;
        else
            hi = m2;
    }
    return std::max(0.0, objective(0.5 * (lo + hi)));
}

// Piecewise-linear interpolation on an increasing grid anchored at (0, 0).
double interp_grid(const std::vector<double>& xs, const std::vector<double>& ys, double x,
                   bool extrapolate) {
    if (x <= 0.0) return 0.0;
    const std::size_t n = xs.size();
    if (x >= xs.back()) {
        if (!extrapolate || n < 2) return ys.back();
        const double slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        return ys.back() + slope * (x - xs.back());
    }
    const std::size_t hi = static_cast<std::size_t>(
        std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    const double x0 = hi == 0 ? 0.0 : xs[hi - 1];
    const double y0 = hi == 0 ? 0.0 : ys[hi - 1];
    return y0 + (ys[hi] - y0) * (x - x0) / (xs[hi] - x0);
}

// ---- candidate machinery for the numeric estimators ----

// Alternating repair: renormalize both points to the unit sphere, then rescale
// the half-chord about the midpoint to the requested length. Converges fast
// near the feasible set; the final check rejects anything that drifted.
bool fix_pair(const SpaceSpec& s, Vector& x, Vector& y, double eps) {
    for (int round = 0; round < 12; ++round) {
        const double nx = norm(s, x), ny = norm(s, y);
        if (nx < 1e-9 || ny < 1e-9) return false;
        x *= 1.0 / nx;
        y *= 1.0 / ny;
        Vector m = x;
        m += y;
        m *= 0.5;
        Vector h = x;
        h -= y;
        h *= 0.5;
        const double c = norm(s, h);
        if (c < 1e-13) return false;
        h *= 0.5 * eps / c;
        x = m;
        x += h;
        y = m;
        y -= h;
    }
    const double nx = norm(s, x), ny = norm(s, y);
    if (nx < 1e-9 || ny < 1e-9) return false;
    x *= 1.0 / nx;
    y *= 1.0 / ny;
    Vector d = x;
    d -= y;
    return std::abs(norm(s, d) - eps) <= 1e-9 * std::max(1.0, eps);
}

struct SpherePair {
    Vector x, y;
};

// y on the unit sphere at chord distance eps from x, searched along direction
// d by bisecting t -> ||x - normalize(x + t d)||.
std::optional<Vector> chord_point(const SpaceSpec& s, const Vector& x, const Vector& d,
                                  double eps) {
    const auto dist = [&](double t) -> double {
        Vector y = d;
        y *= t;
        y += x;
        const double n = norm(s, y);
        if (n < 1e-12) return -1.0;
        y *= 1.0 / n;
        Vector diff = x;
        diff -= y;
        return norm(s, diff);
    };
    double hi = 1.0;
    int grow = 0;
    while (dist(hi) < eps && grow++ < 12) hi *= 2.0;
    if (dist(hi) < eps) return std::nullopt;
    double lo = 0.0;
    for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double v = dist(mid);
        if (v < 0.0) {
            lo = mid;  // passed through the origin; the crossing is above
            continue;
        }
        (v < eps ? lo : hi) = mid;
    }
    Vector y = d;
    y *= hi;
    y += x;
    const double n = norm(s, y);
    if (n < 1e-12) return std::nullopt;
    y *= 1.0 / n;
    return y;
}

Vector gaussian_vector(const SpaceSpec& s, Rng& rng) {
    Vector g(static_cast<std::size_t>(s.dim));
    for (int i = 0; i < s.dim; ++i) g[static_cast<std::size_t>(i)] = rng.normal();
    return g;
}

Vector unit_axis(const SpaceSpec& s, std::size_t i) {
    Vector e(static_cast<std::size_t>(s.dim));
    e[i] = std::pow(s.weight(i), -1.0 / s.p);
    return e;
}

void estimate_delta_grid(const SpaceSpec& s, const ModulusOptions& opt,
                         std::vector<double>& eps_grid, std::vector<double>& delta_grid) {
    Rng rng = Rng(opt.seed).fork(11);
    const int n = opt.grid_points;
    eps_grid.resize(static_cast<std::size_t>(n));
    delta_grid.assign(static_cast<std::size_t>(n), 1.0);
    const std::size_t naxis = static_cast<std::size_t>(std::min(s.dim, 8));
    std::optional<SpherePair> prev;

    for (int k = 0; k < n; ++k) {
        const double eps = 2.0 * static_cast<double>(k + 1) / static_cast<double>(n);
        eps_grid[static_cast<std::size_t>(k)] = eps;
        double best = 1.0;  // attained by any antipodal pair, so a valid ceiling
        std::optional<SpherePair> best_pair;

        const auto consider = [&](Vector x, Vector y) {
            if (!fix_pair(s, x, y, eps)) return;
            Vector m = x;
            m += y;
            m *= 0.5;
            const double val = 1.0 - norm(s, m);
            if (val < best) {
                best = val;
                best_pair = SpherePair{std::move(x), std::move(y)};
            }
        };

        // Two-coordinate families. Axis-symmetric: x, y mirror in coordinate j
        // (extremal for p >= 2); diagonal: x, y swap coordinates (extremal for
        // p < 2). Both are fed through the repair step, so approximate seeds
        // are fine.
        for (std::size_t i = 0; i < naxis; ++i) {
            for (std::size_t j = 0; j < naxis; ++j) {
                if (i == j) continue;
                const double wj = s.weight(j);
                const double b = 0.5 * eps * std::pow(wj, -1.0 / s.p);
                if (wj * std::pow(b, s.p) <= 1.0) {
                    const double a =
                        std::pow((1.0 - wj * std::pow(b, s.p)) / s.weight(i), 1.0 / s.p);
                    Vector x(static_cast<std::size_t>(s.dim)), y(static_cast<std::size_t>(s.dim));
                    x[i] = a;
                    x[j] = b;
                    y[i] = a;
                    y[j] = -b;
                    consider(std::move(x), std::move(y));
                }
                if (j > i) {
                    for (const double u : {0.0, 0.25, 0.5, 0.75}) {
                        const double beta = u;
                        const double alpha = beta + eps * std::pow(2.0, -1.0 / s.p);
                        Vector x(static_cast<std::size_t>(s.dim)),
                            y(static_cast<std::size_t>(s.dim));
                        x[i] = alpha;
                        x[j] = beta;
                        y[i] = beta;
                        y[j] = alpha;
                        consider(std::move(x), std::move(y));
                    }
                }
            }
        }

        // Antipodal pair covers the end of the range exactly.
        if (eps >= 2.0 - 1e-12) {
            Vector e = unit_axis(s, 0);
            Vector me = e;
            me *= -1.0;
            consider(e, me);
        }

        // Warm start from the neighbouring grid point.
        if (prev) consider(prev->x, prev->y);

        // Random chords; long chords get directions blended toward the antipode.
        for (int t = 0; t < opt.chord_samples; ++t) {
            Vector x = sample_sphere(s, rng);
            Vector d = sample_sphere(s, rng);
            if (eps > 1.0) {
                const double w = std::min(1.0, (eps - 1.0) / 1.0) * 0.9;
                Vector blend = x;
                blend *= -1.5 * w;
                d *= (1.0 - w);
                d += blend;
            }
            if (auto y = chord_point(s, x, d, eps)) consider(x, std::move(*y));
        }

        // Seeded local descent around the incumbent.
        for (int r = 0; r < opt.descent_rounds; ++r) {
            if (!best_pair) break;
            const double scale =
                0.3 * std::pow(0.5, 6.0 * static_cast<double>(r) / std::max(1, opt.descent_rounds));
            Vector x = best_pair->x, y = best_pair->y;
            Vector gx = gaussian_vector(s, rng), gy = gaussian_vector(s, rng);
            gx *= scale;
            gy *= scale;
            x += gx;
            y += gy;
            consider(std::move(x), std::move(y));
        }

        delta_grid[static_cast<std::size_t>(k)] = best;
        prev = best_pair;
    }
}

void estimate_rho_grid(const SpaceSpec& s, const ModulusOptions& opt,
                       std::vector<double>& tau_grid, std::vector<double>& rho_grid) {
    Rng rng = Rng(opt.seed).fork(17);
    const int n = opt.grid_points;
    tau_grid.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        tau_grid[static_cast<std::size_t>(k)] =
            opt.tau_max * static_cast<double>(k + 1) / static_cast<double>(n);
    rho_grid.assign(static_cast<std::size_t>(n), 0.0);

    Vector best_x(static_cast<std::size_t>(s.dim)), best_y(static_cast<std::size_t>(s.dim));
    double best_end = -1.0;

    const auto consider = [&](const Vector& x, const Vector& y) {
        double end_val = 0.0;
        for (int k = 0; k < n; ++k) {
            const double tau = tau_grid[static_cast<std::size_t>(k)];
            Vector a = y;
            a *= tau;
            a += x;
            Vector b = y;
            b *= -tau;
            b += x;
            const double val = 0.5 * (norm(s, a) + norm(s, b)) - 1.0;
            if (val > rho_grid[static_cast<std::size_t>(k)])
                rho_grid[static_cast<std::size_t>(k)] = val;
            if (k == n - 1) end_val = val;
        }
        if (end_val > best_end) {
            best_end = end_val;
            best_x = x;
            best_y = y;
        }
    };

    const std::size_t naxis = static_cast<std::size_t>(std::min(s.dim, 8));
    for (std::size_t i = 0; i < naxis; ++i) {
        const Vector ei = unit_axis(s, i);
        consider(ei, ei);  // realizes the trivial floor max(tau - 1, 0)
        for (std::size_t j = 0; j < naxis; ++j) {
            if (i == j) continue;
            consider(ei, unit_axis(s, j));
            Vector d = unit_axis(s, i);
            Vector mj = unit_axis(s, j);
            mj *= -1.0;
            d += mj;
            const double nd = norm(s, d);
            if (nd > 1e-12) {
                d *= 1.0 / nd;
                consider(ei, d);
            }
        }
    }
    for (int t = 0; t < opt.rho_samples; ++t)
        consider(sample_sphere(s, rng), sample_sphere(s, rng));
    for (int r = 0; r < opt.descent_rounds; ++r) {
        if (best_end < 0.0) break;
        const double scale =
            0.3 * std::pow(0.5, 6.0 * static_cast<double>(r) / std::max(1, opt.descent_rounds));
        Vector x = best_x, y = best_y;
        Vector gx = gaussian_vector(s, rng), gy = gaussian_vector(s, rng);
        gx *= scale;
        gy *= scale;
        x += gx;
        y += gy;
        const double nx = norm(s, x), ny = norm(s, y);
        if (nx < 1e-9 || ny < 1e-9) continue;
        x *= 1.0 / nx;
        y *= 1.0 / ny;
        consider(x, y);
    }

    // rho is nondecreasing; the sampled sup inherits that by rearrangement.
    for (int k = 1; k < n; ++k)
        rho_grid[static_cast<std::size_t>(k)] = std::max(rho_grid[static_cast<std::size_t>(k)],
                                                         rho_grid[static_cast<std::size_t>(k - 1)]);
}

ModulusProfile::Sandwich fit_sandwich(const std::vector<double>& eps_grid,
                                      const std::vector<double>& g_grid) {
    // Least squares of log g against log eps gives the power gamma; the theory
    // guarantees gamma >= 1 and g <= c2 eps, so the fit is clipped.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        if (g_grid[k] <= 0.0) continue;
        const double lx = std::log(eps_grid[k]), ly = std::log(g_grid[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    ModulusProfile::Sandwich sw;
    if (m >= 2) {
        const double denom = static_cast<double>(m) * sxx - sx * sx;
        if (std::abs(denom) > 1e-12) sw.gamma = (static_cast<double>(m) * sxy - sx * sy) / denom;
    }
    sw.gamma = std::max(1.0, sw.gamma);
    double c1 = std::numeric_limits<double>::infinity(), c2 = 0.0;
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        if (g_grid[k] <= 0.0) continue;
        c1 = std::min(c1, g_grid[k] / std::pow(eps_grid[k], sw.gamma));
        c2 = std::max(c2, g_grid[k] / eps_grid[k]);
    }
    sw.c1 = std::isfinite(c1) ? c1 : 0.0;
    sw.c2 = c2;
    return sw;
}

}  // namespace

namespace {

// True when the space has inner-product closed forms (p = 2, or the line,
// whose modulus machinery is degenerate and treated as Euclidean).
bool hilbert_like(const SpaceSpec& s) { return s.p == 2.0 || s.dim == 1; }

double analytic_delta(const SpaceSpec& s, double eps) {
    return hilbert_like(s) ? hilbert_delta(eps) : hanner_delta(s.p, eps);
}

double analytic_rho(const SpaceSpec& s, double tau) {
    return hilbert_like(s) ? hilbert_rho(tau) : hanner_rho(s.p, tau);
}

double analytic_g(const SpaceSpec& s, double eps) {
    if (hilbert_like(s)) return hilbert_g(eps);
    if (eps <= 0.0) return 0.0;
    return hanner_delta(s.p, eps) / eps;
}

}  // namespace

ModulusProfile build_modulus_profile(const SpaceSpec& s, const ModulusOptions& opt) {
    s.validate();
    if (opt.grid_points < 8) throw std::invalid_argument("modulus: grid_points must be >= 8");
    if (!(opt.tau_max > 0.0)) throw std::invalid_argument("modulus: tau_max must be positive");

    ModulusProfile prof;
    prof.space_ = s;
    prof.analytic_ = !opt.force_numeric;

    const int n = opt.grid_points;
    if (prof.analytic_) {
        prof.eps_grid_.resize(static_cast<std::size_t>(n));
        prof.delta_grid_.resize(static_cast<std::size_t>(n));
        prof.tau_grid_.resize(static_cast<std::size_t>(n));
        prof.rho_grid_.resize(static_cast<std::size_t>(n));
        std::vector<double> g_grid(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const double eps = 2.0 * static_cast<double>(k + 1) / static_cast<double>(n);
            const double tau = opt.tau_max * static_cast<double>(k + 1) / static_cast<double>(n);
            prof.eps_grid_[static_cast<std::size_t>(k)] = eps;
            prof.delta_grid_[static_cast<std::size_t>(k)] = analytic_delta(s, eps);
            g_grid[static_cast<std::size_t>(k)] = analytic_g(s, eps);
            prof.tau_grid_[static_cast<std::size_t>(k)] = tau;
            prof.rho_grid_[static_cast<std::size_t>(k)] = analytic_rho(s, tau);
        }
        prof.sandwich_ = fit_sandwich(prof.eps_grid_, g_grid);
        return prof;
    }

    estimate_delta_grid(s, opt, prof.eps_grid_, prof.delta_grid_);
    estimate_rho_grid(s, opt, prof.tau_grid_, prof.rho_grid_);

    // Monotone rearrangement through g-hat: g nondecreasing is the property the
    // inverses rely on, and raising delta keeps it an upper estimate.
    std::vector<double> g_grid(prof.eps_grid_.size());
    for (std::size_t k = 0; k < g_grid.size(); ++k)
        g_grid[k] = prof.delta_grid_[k] / prof.eps_grid_[k];
    for (std::size_t k = 1; k < g_grid.size(); ++k) g_grid[k] = std::max(g_grid[k], g_grid[k - 1]);
    for (std::size_t k = 0; k < g_grid.size(); ++k)
        prof.delta_grid_[k] = g_grid[k] * prof.eps_grid_[k];
    prof.sandwich_ = fit_sandwich(prof.eps_grid_, g_grid);
    return prof;
}

double ModulusProfile::delta(double eps) const {
    if (eps < -1e-12 || eps > 2.0 + 1e-9)
        throw std::invalid_argument("modulus: delta argument outside [0, 2]");
    eps = std::clamp(eps, 0.0, 2.0);
    if (analytic_) return analytic_delta(space_, eps);
    return interp_grid(eps_grid_, delta_grid_, eps, false);
}

double ModulusProfile::rho(double tau) const {
    if (tau < -1e-12) throw std::invalid_argument("modulus: rho argument must be >= 0");
    tau = std::max(tau, 0.0);
    if (analytic_) return analytic_rho(space_, tau);
    return interp_grid(tau_grid_, rho_grid_, tau, true);
}

double ModulusProfile::g(double eps) const {
    if (eps < -1e-12 || eps > 2.0 + 1e-9)
        throw std::invalid_argument("modulus: g argument outside [0, 2]");
    eps = std::clamp(eps, 0.0, 2.0);
    if (analytic_) return analytic_g(space_, eps);
    if (eps == 0.0) return 0.0;
    return delta(eps) / eps;
}

double ModulusProfile::g_max() const { return g(2.0); }

double ModulusProfile::delta_max() const { return delta(2.0); }

ModulusProfile::Inverse ModulusProfile::delta_inverse(double v) const {
    Inverse out;
    out.sup_value = delta_max();
    if (v <= 0.0) {
        out.value = 0.0;
        return out;
    }
    if (v > out.sup_value) {
        out.value = 2.0;
        out.saturated = true;
        return out;
    }
    if (analytic_ && hilbert_like(space_)) {
        out.value = hilbert_delta_inverse(v);
        return out;
    }
    double lo = 0.0, hi = 2.0;
    for (int iter = 0; iter < 100 && hi - lo > 1e-12; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (delta(mid) < v ? lo : hi) = mid;
    }
    out.value = 0.5 * (lo + hi);
    return out;
}

ModulusProfile::Inverse ModulusProfile::g_inverse(double v) const {
    Inverse out;
    out.sup_value = g_max();
    if (v <= 0.0) {
        out.value = 0.0;
        return out;
    }
    if (v > out.sup_value) {
        out.value = 2.0;
        out.saturated = true;
        return out;
    }
    if (analytic_ && hilbert_like(space_)) {
        out.value = hilbert_g_inverse(v);
        return out;
    }
    double lo = 0.0, hi = 2.0;
    for (int iter = 0; iter < 100 && hi - lo > 1e-12; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < v ? lo : hi) = mid;
    }
    out.value = 0.5 * (lo + hi);
    return out;
}

JEstimateReport check_J_estimates(const ModulusProfile& primal, const ModulusProfile& dual,
                                  double R, int n_pairs, std::uint64_t seed) {
    const SpaceSpec& s = primal.space();
    const SpaceSpec expected_dual = s.dual();
    if (dual.space().dim != s.dim || std::abs(dual.space().p - expected_dual.p) > 1e-9)
        throw std::invalid_argument("check_J_estimates: second profile is not the dual space");
    if (!(R > 0.0) || n_pairs < 1)
        throw std::invalid_argument("check_J_estimates: need R > 0 and n_pairs >= 1");

    Rng rng = Rng(seed).fork(23);
    JEstimateReport rep;
    rep.pairs = n_pairs;
    const double inf = std::numeric_limits<double>::infinity();
    rep.worst_upper = rep.worst_pairing = rep.worst_pairing_alt = rep.worst_lower = inf;

    const double C2 = std::max(1.0, R);
    const double C1 = std::max(kJEstimateL, R);
    const double C1bar = 8.0 * (std::sqrt(1.0 + 4.0 * R * R) + 1.0) + C1;
    const double lo_t = 1e-6, hi_t = 1.99 * R;

    for (int trial = 0; trial < n_pairs; ++trial) {
        // Log-uniform chord length: the informative region for the upper
        // estimate is small ||x - y|| (everything else saturates g-inverse).
        const double t = lo_t * std::pow(hi_t / lo_t, rng.uniform());
        Vector c = sample_ball(s, std::max(R - 0.5 * t, 0.0), rng);
        Vector d = sample_sphere(s, rng);
        Vector x = d, y = d;
        x *= 0.5 * t;
        y *= -0.5 * t;
        x += c;
        y += c;

        const DualVector Jx = duality_map(s, x), Jy = duality_map(s, y);
        DualVector dJ = Jx;
        dJ -= Jy;
        Vector dxy = x;
        dxy -= y;
        const double lhs_pairing = pairing(dJ, dxy);
        const double lhs_norm = dual_norm(s, dJ);

        const auto gi = dual.g_inverse(2.0 * kJEstimateL * C2 * t);
        if (gi.saturated) ++rep.upper_saturated;
        const double rhs_upper = C2 * (gi.saturated ? 2.0 : gi.value);
        rep.worst_upper = std::min(rep.worst_upper, rhs_upper - lhs_norm);

        const double rho_t = primal.rho(t);
        rep.worst_pairing =
            std::min(rep.worst_pairing, 8.0 * t * t + 8.0 * C1 * rho_t - lhs_pairing);
        rep.worst_pairing_alt = std::min(rep.worst_pairing_alt, C1bar * rho_t - lhs_pairing);

        const double rhs_lower = 0.5 / kJEstimateL * primal.delta(t / C2);
        rep.worst_lower = std::min(rep.worst_lower, lhs_pairing - rhs_lower);
    }
    return rep;
}

}  // namespace pvi
