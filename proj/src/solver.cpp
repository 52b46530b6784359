// Penalty-equation solver and the Euclidean reference oracle.
//
// solve_penalty minimizes nothing: it finds a root of the monotone map
// F(x) = T(x) - f. Each outer round tries, in order,
//
//   1. a damped Newton step on the coordinate map of F (central-difference
//      Jacobian, Gaussian elimination with partial pivoting, backtracking
//      accepted only on sufficient residual decrease),
//   2. one adaptive extragradient step over the working box (step size
//      shrinks until gamma ||F(y) - F(x)|| <= 0.9 ||y - x||, the classical
//      rule that guarantees Fejer monotonicity toward the root set),
//   3. a bisected line search along the raw residual direction.
//
// Newton supplies the terminal quadratic convergence that the eps^{-1}
// stiffness would otherwise deny the extragradient backbone; the backbone
// supplies global progress that Newton alone lacks across the projection
// kinks; the line search covers the rare rounds where both stall. The best
// iterate by residual is tracked and returned.

#include "pvi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pvi/rng.hpp"

namespace pvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector clamp_to(const Box& b, Vector x) {
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::min(b.upper[i], std::max(b.lower[i], x[i]));
    return x;
}

// Working region for the inner solver: the set's bounding box inflated by
// the margin (uniform boundedness of x_eps keeps roots well inside), grown
// to contain the starting point and clipped to the operator's domain.
Box make_working_box(const SpaceSpec& s, const ConvexSet& set, const Vector& start,
                     double margin, const std::optional<Box>& domain) {
    const int n = s.dim;
    Vector lo(n), hi(n);
    if (auto bb = bounding_box(s, set)) {
        for (int i = 0; i < n; ++i) {
            const double c = 0.5 * (bb->lower[i] + bb->upper[i]);
            const double half = margin * (0.5 * (bb->upper[i] - bb->lower[i]) + 1.0);
            lo[i] = c - half;
            hi[i] = c + half;
        }
    } else {
        const Vector anchor = project(s, set, start);
        double reach = 1.0;
        for (int i = 0; i < n; ++i)
            reach = std::max({reach, std::fabs(anchor[i]), std::fabs(start[i])});
        for (int i = 0; i < n; ++i) {
            lo[i] = anchor[i] - margin * (reach + 1.0);
            hi[i] = anchor[i] + margin * (reach + 1.0);
        }
    }
    for (int i = 0; i < n; ++i) {
        lo[i] = std::min(lo[i], start[i] - 1.0);
        hi[i] = std::max(hi[i], start[i] + 1.0);
    }
    if (domain) {
        // inset keeps finite-difference probes from iterates on the working
        // boundary inside the operator domain
        const double inset = 1e-6;
        for (int i = 0; i < n; ++i) {
            lo[i] = std::max(lo[i], domain->lower[i] + inset);
            hi[i] = std::min(hi[i], domain->upper[i] - inset);
            if (!(lo[i] <= hi[i]))
                throw std::invalid_argument("penalty solver: working box outside operator domain");
        }
    }
    return Box{lo, hi};
}

// Gaussian elimination with partial pivoting; a is row-major and destroyed.
// Returns false when a pivot falls below the relative threshold (the flat,
// unregularized case produces exactly this).
bool solve_linear(std::vector<double>& a, std::vector<double>& b, int n) {
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::fabs(v));
    if (!(scale > 0.0) || !std::isfinite(scale)) return false;
    const double pivot_tol = 1e-13 * scale;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(a[i * n + k]) > std::fabs(a[piv * n + k])) piv = i;
        if (std::fabs(a[piv * n + k]) <= pivot_tol) return false;
        if (piv != k) {
            for (int j = k; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            const double m = a[i * n + k] / a[k * n + k];
            if (m == 0.0) continue;
            for (int j = k; j < n; ++j) a[i * n + j] -= m * a[k * n + j];
            b[i] -= m * b[k];
        }
    }
    for (int k = n - 1; k >= 0; --k) {
        double acc = b[k];
        for (int j = k + 1; j < n; ++j) acc -= a[k * n + j] * b[j];
        b[k] = acc / a[k * n + k];
    }
    for (int k = 0; k < n; ++k)
        if (!std::isfinite(b[k])) return false;
    return true;
}

using Oracle = std::function<DualVector(const Vector&)>;

// Central-difference Newton direction for the coordinate map of F.  A
// singular Jacobian falls back to damped normal equations: a flat coordinate
// contributes a zero row and column, so its step component comes out zero and
// the remaining block is solved with a small Levenberg shift.
std::optional<Vector> newton_direction(const Oracle& F, const Vector& x, const DualVector& Fx) {
    const int n = static_cast<int>(x.size());
    std::vector<double> jac(static_cast<std::size_t>(n) * n);
    Vector xp = x, xm = x;
    for (int j = 0; j < n; ++j) {
        const double dj = 1e-7 * std::max(1.0, std::fabs(x[j]));
        // probes may leave the working box; the oracle is defined on the
        // operator domain, which the box construction respects with margin
        xp[j] = x[j] + dj;
        xm[j] = x[j] - dj;
        const DualVector Fp = F(xp);
        const DualVector Fm = F(xm);
        for (int i = 0; i < n; ++i) jac[static_cast<std::size_t>(i) * n + j] = (Fp[i] - Fm[i]) / (2.0 * dj);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    std::vector<double> rhs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rhs[static_cast<std::size_t>(i)] = -Fx[i];
    const std::vector<double> jac_saved = jac;
    const std::vector<double> rhs_saved = rhs;
    if (!solve_linear(jac, rhs, n)) {
        std::vector<double> ata(static_cast<std::size_t>(n) * n, 0.0);
        std::vector<double> atb(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                double sum = 0.0;
                for (int k = 0; k < n; ++k)
                    sum += jac_saved[static_cast<std::size_t>(k) * n + i] *
                           jac_saved[static_cast<std::size_t>(k) * n + j];
                ata[static_cast<std::size_t>(i) * n + j] = sum;
                ata[static_cast<std::size_t>(j) * n + i] = sum;
            }
            double sum = 0.0;
            for (int k = 0; k < n; ++k)
                sum += jac_saved[static_cast<std::size_t>(k) * n + i] *
                       rhs_saved[static_cast<std::size_t>(k)];
            atb[static_cast<std::size_t>(i)] = sum;
        }
        double diag_scale = 0.0;
        for (int i = 0; i < n; ++i)
            diag_scale = std::max(diag_scale, ata[static_cast<std::size_t>(i) * n + i]);
        if (!(diag_scale > 0.0) || !std::isfinite(diag_scale)) return std::nullopt;
        const double damping = 1e-6 * diag_scale;
        for (int i = 0; i < n; ++i) ata[static_cast<std::size_t>(i) * n + i] += damping;
        if (!solve_linear(ata, atb, n)) return std::nullopt;
        rhs = atb;
    }
    Vector d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) d[i] = rhs[static_cast<std::size_t>(i)];
    return d;
}

double euclid_gap(const Vector& a, const Vector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace

void PenaltyProblem::validate() const {
    space.validate();
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("penalty problem: epsilon must be positive");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("penalty problem: alpha must be >= 0");
    if (static_cast<int>(rhs.size()) != space.dim)
        throw std::invalid_argument("penalty problem: rhs dimension mismatch");
    if (static_cast<int>(set.dim()) != space.dim)
        throw std::invalid_argument("penalty problem: set dimension mismatch");
    if (!op.eval) throw std::invalid_argument("penalty problem: operator has no evaluation");
    if (op.domain_box) {
        auto bb = bounding_box(space, set);
        if (!bb)
            throw std::invalid_argument(
                "penalty problem: unbounded set cannot sit inside a bounded operator domain");
        for (int i = 0; i < space.dim; ++i)
            if (bb->lower[i] < op.domain_box->lower[i] - 1e-12 ||
                bb->upper[i] > op.domain_box->upper[i] + 1e-12)
                throw std::invalid_argument("penalty problem: set leaves the operator domain");
    }
}

DualVector penalty_operator(const SpaceSpec& s, const ConvexSet& set, const Vector& x) {
    return duality_map(s, x - project(s, set, x));
}

std::function<DualVector(const Vector&)> assemble(const PenaltyProblem& problem) {
    problem.validate();
    const MonotoneOp op = problem.op;
    const ConvexSet set = problem.set;
    const SpaceSpec s = problem.space;
    const double inv_eps = 1.0 / problem.epsilon;
    const double alpha = problem.alpha;
    return [op, set, s, inv_eps, alpha](const Vector& x) {
        DualVector t = op(x);
        DualVector mu = penalty_operator(s, set, x);
        mu *= inv_eps;
        t += mu;
        if (alpha > 0.0) {
            DualVector jx = duality_map(s, x);
            jx *= alpha;
            t += jx;
        }
        return t;
    };
}

SolveReport solve_penalty(const PenaltyProblem& problem, const SolveOptions& opts) {
    problem.validate();
    if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_penalty: tol must be positive");
    if (opts.max_iter < 1) throw std::invalid_argument("solve_penalty: max_iter must be >= 1");
    const SpaceSpec& s = problem.space;
    const int n = s.dim;

    const auto T = assemble(problem);
    const DualVector f = problem.rhs;
    const Oracle F = [&T, &f](const Vector& v) {
        DualVector r = T(v);
        r -= f;
        return r;
    };

    const Vector start = opts.init ? *opts.init : Vector(static_cast<std::size_t>(n));
    const Box W =
        make_working_box(s, problem.set, start, opts.working_margin, problem.op.domain_box);
    Vector x = clamp_to(W, project(s, problem.set, start));

    DualVector Fx = F(x);
    double res = dual_norm(s, Fx);
    Vector best_x = x;
    double best_res = res;

    double gamma = 1.0;
    int newton_steps = 0;
    int backbone_steps = 0;
    int stall = 0;
    int iter = 0;

    for (; iter < opts.max_iter && best_res > opts.tol; ++iter) {
        bool advanced = false;

        if (auto dir = newton_direction(F, x, Fx)) {
            double t = 1.0;
            for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
                const Vector xc = clamp_to(W, x + t * *dir);
                const DualVector Fc = F(xc);
                const double rc = dual_norm(s, Fc);
                if (rc <= res * (1.0 - 1e-4 * t) || rc <= opts.tol) {
                    x = xc;
                    Fx = Fc;
                    res = rc;
                    ++newton_steps;
                    advanced = true;
                    break;
                }
            }
        }

        if (!advanced) {
            // extragradient round; acceptance controls the step, not the
            // residual, so the move is taken even when the residual rises
            bool shrunk = false;
            for (int tries = 0; tries < 240; ++tries) {
                const Vector y = clamp_to(W, x - gamma * as_primal_direction(Fx));
                const double step = euclid_gap(x, y);
                if (step == 0.0) break;
                const DualVector Fy = F(y);
                const double lip = euclid_gap(as_primal_direction(Fy), as_primal_direction(Fx));
                if (gamma * lip <= 0.9 * step) {
                    const Vector xn = clamp_to(W, x - gamma * as_primal_direction(Fy));
                    if (euclid_gap(x, xn) > 0.0) {
                        x = xn;
                        Fx = F(x);
                        res = dual_norm(s, Fx);
                        ++backbone_steps;
                        advanced = true;
                    }
                    if (!shrunk) gamma = std::min(gamma * 1.25, 1e8);
                    break;
                }
                gamma *= 0.5;
                shrunk = true;
                if (gamma < 1e-18) break;
            }
        }

        if (!advanced) {
            // last resort: bisected backtracking along the residual direction
            const Vector dir = as_primal_direction(Fx);
            double t = 1.0;
            for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
                const Vector xc = clamp_to(W, x - t * dir);
                const DualVector Fc = F(xc);
                const double rc = dual_norm(s, Fc);
                if (rc < res) {
                    x = xc;
                    Fx = Fc;
                    res = rc;
                    ++backbone_steps;
                    advanced = true;
                    break;
                }
            }
        }

        if (res < best_res) {
            best_res = res;
            best_x = x;
        }
        if (advanced) {
            stall = 0;
        } else if (++stall >= 3) {
            break;
        }
    }

    SolveReport report;
    report.x = best_x;
    report.residual = best_res;
    report.iterations = iter;
    report.newton_steps = newton_steps;
    report.backbone_steps = backbone_steps;
    report.penalty_gap = norm(s, best_x - project(s, problem.set, best_x));
    report.converged = best_res <= opts.tol;
    report.certificate = check_generalized_solution(
        problem, best_x, opts.certificate_samples, opts.seed ^ 0xC2B2AE3D27D4EB4FULL, opts.tol);
    return report;
}

CertificateResult check_generalized_solution(const PenaltyProblem& problem, const Vector& x,
                                             int n_samples, std::uint64_t seed, double tol) {
    problem.validate();
    if (n_samples < 1) throw std::invalid_argument("check_generalized_solution: need samples");
    const SpaceSpec& s = problem.space;
    const int n = s.dim;
    Rng rng(seed);

    const Box W = make_working_box(s, problem.set, x, 4.0, problem.op.domain_box);
    const DualVector mu = penalty_operator(s, problem.set, x);
    const double inv_eps = 1.0 / problem.epsilon;
    const double gap = norm(s, x - project(s, problem.set, x));

    double set_scale = 1.0;
    if (auto bb = bounding_box(s, problem.set))
        set_scale = std::max(1e-9, norm(s, bb->upper - bb->lower));
    const double diam = norm(s, W.upper - W.lower);
    const double threshold = std::max(1e-8, 10.0 * tol * std::max(1.0, diam));

    double worst = kInf;
    for (int k = 0; k < n_samples; ++k) {
        Vector y;
        switch (k % 3) {
            case 0:
                y = sample_in_set(s, problem.set, rng);
                break;
            case 1: {
                // local cloud at the penalty scale around x
                const double scale = 2.0 * gap + 0.1 * set_scale + 1e-9;
                y = x;
                for (int i = 0; i < n; ++i) y[i] += scale * rng.normal();
                break;
            }
            default: {
                const double scale = 0.3 * std::max(1.0, norm(s, x));
                y = x;
                for (int i = 0; i < n; ++i) y[i] += scale * rng.normal();
                break;
            }
        }
        y = clamp_to(W, y);
        const Vector d = y - x;
        DualVector ay = problem.op(y);
        ay -= problem.rhs;
        double slack = pairing(ay, d) + inv_eps * pairing(mu, d);
        if (problem.alpha > 0.0) slack += problem.alpha * pairing(duality_map(s, y), d);
        worst = std::min(worst, slack);
    }

    CertificateResult out;
    out.slack = worst;
    out.threshold = threshold;
    out.samples = n_samples;
    out.pass = worst >= -threshold;
    return out;
}

// ---- Euclidean reference geometry ----

namespace {

// t + kappa t^{p-1} = m on t >= 0 (kappa, m >= 0): strictly increasing, so
// bisection on [0, m].
double solve_radial_scalar(double kappa, double pexp, double m) {
    if (m <= 0.0) return 0.0;
    double lo = 0.0, hi = m;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double val = mid + kappa * std::pow(mid, pexp - 1.0);
        (val < m ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Euclidean projection onto {||y - c||_{p,w} <= R}: KKT gives
// u_i + lambda p w_i u_i |u_i|^{p-2} = z_i with u = y - c, z = x - c, so the
// multiplier is found by outer bisection on the constraint value.
Vector project_euclidean_ball(const SpaceSpec& s, const BallSet& ball, const Vector& x) {
    const int n = s.dim;
    Vector z = x - ball.center;
    double norm_z = norm(s, z);
    if (norm_z <= ball.radius) return x;

    const double target = std::pow(ball.radius, s.p);
    auto constraint = [&](double lambda) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t =
                solve_radial_scalar(lambda * s.p * s.weight(static_cast<std::size_t>(i)), s.p,
                                    std::fabs(z[i]));
            acc += s.weight(static_cast<std::size_t>(i)) * std::pow(t, s.p);
        }
        return acc;
    };

    double hi = 1.0;
    for (int it = 0; it < 200 && constraint(hi) > target; ++it) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 120; ++it) {
        const double mid = 0.5 * (lo + hi);
        (constraint(mid) > target ? lo : hi) = mid;
    }
    const double lambda = 0.5 * (lo + hi);
    Vector u(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = solve_radial_scalar(
            lambda * s.p * s.weight(static_cast<std::size_t>(i)), s.p, std::fabs(z[i]));
        u[i] = (z[i] < 0.0 ? -t : t);
    }
    return ball.center + u;
}

}  // namespace

Vector project_euclidean(const SpaceSpec& s, const ConvexSet& set, const Vector& x) {
    switch (set.kind()) {
        case ConvexSet::Kind::box: {
            const Box& b = set.as_box();
            Vector y = x;
            for (std::size_t i = 0; i < y.size(); ++i)
                y[i] = std::min(b.upper[i], std::max(b.lower[i], y[i]));
            return y;
        }
        case ConvexSet::Kind::halfspace: {
            const Halfspace& h = set.as_halfspace();
            double ax = 0.0, aa = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                ax += h.normal[i] * x[i];
                aa += h.normal[i] * h.normal[i];
            }
            const double excess = ax - h.offset;
            if (excess <= 0.0) return x;
            Vector y = x;
            for (std::size_t i = 0; i < y.size(); ++i) y[i] -= (excess / aa) * h.normal[i];
            return y;
        }
        case ConvexSet::Kind::ball:
            return project_euclidean_ball(s, set.as_ball(), x);
    }
    throw std::logic_error("project_euclidean: unknown set kind");
}

VISolution solve_vi_reference(const SpaceSpec& space, const MonotoneOp& op, const DualVector& f,
                              const ConvexSet& set, const ReferenceOptions& opts) {
    space.validate();
    if (static_cast<int>(f.size()) != space.dim || static_cast<int>(set.dim()) != space.dim)
        throw std::invalid_argument("solve_vi_reference: dimension mismatch");
    const int n = space.dim;

    const auto G = [&](const Vector& v) {
        DualVector z = op(v);
        z -= f;
        return as_primal_direction(z);
    };

    Vector x = project_euclidean(space, set,
                                 opts.init ? *opts.init : Vector(static_cast<std::size_t>(n)));
    Vector Gx = G(x);
    double gamma = 1.0;
    double fpr = kInf;
    int iter = 0;

    for (; iter < opts.max_iter; ++iter) {
        fpr = euclid_gap(x, project_euclidean(space, set, x - Gx));
        if (fpr <= opts.tol) break;
        bool moved = false;
        bool shrunk = false;
        for (int tries = 0; tries < 240; ++tries) {
            const Vector y = project_euclidean(space, set, x - gamma * Gx);
            const double step = euclid_gap(x, y);
            if (step == 0.0) break;
            const Vector Gy = G(y);
            if (gamma * euclid_gap(Gy, Gx) <= 0.9 * step) {
                x = project_euclidean(space, set, x - gamma * Gy);
                Gx = G(x);
                moved = true;
                if (!shrunk) gamma = std::min(gamma * 1.25, 1e8);
                break;
            }
            gamma *= 0.5;
            shrunk = true;
            if (gamma < 1e-18) break;
        }
        if (!moved) break;
    }

    VISolution out;
    out.x_star = x;
    out.fp_residual = fpr;
    out.iterations = iter;
    out.converged = fpr <= opts.tol;
    out.method = "euclidean-extragradient-adaptive";

    Rng rng(opts.seed);
    double worst = kInf;
    for (int k = 0; k < opts.certificate_samples; ++k) {
        const Vector y = sample_in_set(space, set, rng);
        DualVector zy = op(y);
        zy -= f;
        worst = std::min(worst, pairing(zy, y - x));
    }
    out.certificate_slack = worst;
    return out;
}

}  // namespace pvi
