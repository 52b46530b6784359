#include "pvi/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pvi {

namespace {

double power_term(double t, double s_exp) {
    // t |t|^{s-1} with the convention 0 * |0|^{s-1} = 0.
    return t == 0.0 ? 0.0 : t * std::pow(std::abs(t), s_exp - 1.0);
}

Vector sample_box(const Box& region, Rng& rng) {
    Vector x(region.lower.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = rng.uniform(region.lower[i], region.upper[i]);
    return x;
}

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument("operator: " + what);
}

}  // namespace

void MonotonicityModulus::validate() const {
    if (form == Form::power) {
        require(c > 0.0 && std::isfinite(c), "modulus needs c > 0");
        require(s >= 1.0 && std::isfinite(s), "modulus needs s >= 1");
    } else {
        require(table.size() >= 2, "modulus table needs >= 2 entries");
        for (std::size_t i = 0; i < table.size(); ++i) {
            require(table[i].first >= 0.0 && table[i].second >= 0.0,
                    "modulus table entries must be nonnegative");
            if (i > 0)
                require(table[i].first > table[i - 1].first &&
                            table[i].second >= table[i - 1].second,
                        "modulus table must increase");
        }
    }
}

double MonotonicityModulus::eval(double t) const {
    if (t <= 0.0) return 0.0;
    if (form == Form::power) return c * std::pow(t, s);
    // Piecewise-linear with (0, 0) anchor and linear extension upward.
    if (t >= table.back().first) {
        const auto& [t1, v1] = table[table.size() - 2];
        const auto& [t2, v2] = table.back();
        return v2 + (v2 - v1) / (t2 - t1) * (t - t2);
    }
    double t0 = 0.0, v0 = 0.0;
    for (const auto& [ti, vi] : table) {
        if (t <= ti) return v0 + (vi - v0) * (t - t0) / (ti - t0);
        t0 = ti;
        v0 = vi;
    }
    return table.back().second;
}

double MonotonicityModulus::required_pairing(double t) const {
    return normalized ? eval(t) : eval(t) * t;
}

double MonotonicityModulus::rate(double t) const {
    if (normalized) return t > 0.0 ? eval(t) / t : 0.0;
    return eval(t);
}

double MonotonicityModulus::inverse(double v) const {
    if (v <= 0.0) return 0.0;
    double hi = 1.0;
    int grow = 0;
    while (eval(hi) < v && grow++ < 200) hi *= 2.0;
    double lo = 0.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        (eval(mid) < v ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

DualVector MonotoneOp::operator()(const Vector& x) const {
    if (!in_domain(x))
        throw std::domain_error("operator '" + name + "': input outside declared domain");
    return eval(x);
}

bool MonotoneOp::in_domain(const Vector& x, double margin) const {
    if (!domain_box) return true;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < domain_box->lower[i] + margin || x[i] > domain_box->upper[i] - margin)
            return false;
    return true;
}

MonotoneOp make_diag_power(const SpaceSpec& space, double s_exp) {
    space.validate();
    require(s_exp >= 1.0, "diag_power needs exponent >= 1");
    MonotoneOp op;
    op.name = "diag_power";
    op.cls = s_exp == 2.0 ? MonotoneClass::uniformly_monotone : MonotoneClass::strictly_monotone;
    op.eval = [s_exp](const Vector& x) {
        DualVector z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) z[i] = power_term(x[i], s_exp);
        return z;
    };
    op.potential = [s_exp](const Vector& x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            acc += std::pow(std::abs(x[i]), s_exp + 1.0) / (s_exp + 1.0);
        return acc;
    };
    if (s_exp == 2.0 && space.unit_weights()) {
        MonotonicityModulus psi;
        psi.c = 0.5 * std::min(1.0, std::pow(static_cast<double>(space.dim), 1.0 - 3.0 / space.p));
        psi.s = 2.0;
        psi.normalized = false;
        op.modulus = psi;
    }
    return op;
}

MonotoneOp make_power_sum(const SpaceSpec& space) {
    space.validate();
    MonotoneOp op;
    op.name = "power_sum";
    op.cls = MonotoneClass::strictly_monotone;
    op.eval = [](const Vector& x) {
        DualVector z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            z[i] = power_term(x[i], static_cast<double>(i + 1));
        return z;
    };
    op.potential = [](const Vector& x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double m = static_cast<double>(i + 1);
            acc += std::pow(std::abs(x[i]), m + 1.0) / (m + 1.0);
        }
        return acc;
    };
    return op;
}

MonotoneOp make_flat_first(const SpaceSpec& space, double s_exp) {
    space.validate();
    require(space.dim >= 2, "flat_first needs dim >= 2");
    require(s_exp >= 1.0, "flat_first needs exponent >= 1");
    MonotoneOp op;
    op.name = "flat_first";
    op.cls = MonotoneClass::monotone;  // strictly proper: flat along e_1
    op.eval = [s_exp](const Vector& x) {
        DualVector z(x.size());
        for (std::size_t i = 1; i < x.size(); ++i) z[i] = power_term(x[i], s_exp);
        return z;
    };
    op.potential = [s_exp](const Vector& x) {
        double acc = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i)
            acc += std::pow(std::abs(x[i]), s_exp + 1.0) / (s_exp + 1.0);
        return acc;
    };
    return op;
}

MonotoneOp make_identity(const SpaceSpec& space) {
    space.validate();
    MonotoneOp op;
    op.name = "identity";
    op.cls = MonotoneClass::uniformly_monotone;
    op.eval = [](const Vector& x) { return as_dual(x); };
    op.potential = [](const Vector& x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) acc += 0.5 * x[i] * x[i];
        return acc;
    };
    if (space.p == 2.0 && space.unit_weights()) {
        MonotonicityModulus psi;
        psi.c = 1.0;
        psi.s = 1.0;
        psi.normalized = false;  // pairing = t^2 = psi(t) * t exactly
        op.modulus = psi;
    }
    return op;
}

MonotoneOp make_constant(const SpaceSpec& space, DualVector z) {
    space.validate();
    require(static_cast<int>(z.size()) == space.dim, "constant operator value has wrong dimension");
    MonotoneOp op;
    op.name = "constant";
    op.cls = MonotoneClass::monotone;
    op.eval = [z = std::move(z)](const Vector&) { return z; };
    return op;
}

MonotoneOp make_sign(const SpaceSpec& space) {
    space.validate();
    MonotoneOp op;
    op.name = "sign";
    op.cls = MonotoneClass::monotone;
    // Selection at the kink: 0, the minimal-norm element of [-1, 1].
    op.eval = [](const Vector& x) {
        DualVector z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            z[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
        return z;
    };
    return op;
}

MonotoneOp negate(const MonotoneOp& op) {
    MonotoneOp out = op;
    out.name = "negated_" + op.name;
    out.potential = nullptr;
    out.modulus.reset();
    out.eval = [inner = op.eval](const Vector& x) {
        DualVector z = inner(x);
        z *= -1.0;
        return z;
    };
    return out;
}

MonotoneOp make_operator(const SpaceSpec& space, const std::string& name,
                         const OperatorParams& params) {
    if (name == "diag_power") return make_diag_power(space, params.power);
    if (name == "power_sum") return make_power_sum(space);
    if (name == "flat_first") return make_flat_first(space, params.power);
    if (name == "identity") return make_identity(space);
    if (name == "sign") return make_sign(space);
    if (name == "constant") return make_constant(space, DualVector(params.values));
    if (name == "negated_diag_power") return negate(make_diag_power(space, params.power));
    if (name == "negated_power_sum") return negate(make_power_sum(space));
    throw std::invalid_argument("operator: unknown name '" + name + "'");
}

void OperatorPerturbation::validate() const {
    require(h >= 0.0 && std::isfinite(h), "perturbation needs h >= 0");
    require(gamma_const >= 0.0 && gamma_slope >= 0.0, "gamma must be nondecreasing (a, b >= 0)");
    if (mode == Mode::monotone_safe)
        require(safe_scale > 0.0, "monotone_safe needs a positive scale");
}

MonotoneOp perturb_operator(const SpaceSpec& space, const MonotoneOp& op,
                            const OperatorPerturbation& pert) {
    pert.validate();
    if (pert.h == 0.0) return op;

    MonotoneOp out = op;
    out.name = op.name + "+h";
    out.potential = nullptr;
    out.modulus.reset();

    const double h = pert.h, a = pert.gamma_const, b = pert.gamma_slope;
    switch (pert.mode) {
        case OperatorPerturbation::Mode::constant_direction: {
            DualVector dir = pert.direction;
            const double nd = dual_norm(space, dir);
            require(nd > 0.0, "constant perturbation direction must be nonzero");
            dir *= 1.0 / nd;
            out.eval = [inner = op.eval, space, dir, h, a, b](const Vector& x) {
                DualVector z = inner(x);
                DualVector step = dir;
                step *= h * (a + b * norm(space, x));
                z += step;
                return z;
            };
            break;
        }
        case OperatorPerturbation::Mode::sinusoid_field: {
            // Fixed random phases and frequencies; unit dual norm enforced by
            // normalization whenever the raw field exceeds it.
            Rng rng = Rng(pert.seed).fork(41);
            std::vector<double> phase(static_cast<std::size_t>(space.dim));
            std::vector<double> freq(static_cast<std::size_t>(space.dim) *
                                     static_cast<std::size_t>(space.dim));
            for (double& t : phase) t = rng.uniform(0.0, 6.283185307179586);
            for (double& t : freq) t = rng.uniform(-1.5, 1.5);
            const int n = space.dim;
            out.eval = [inner = op.eval, space, phase, freq, n, h, a, b](const Vector& x) {
                DualVector u(x.size());
                for (int i = 0; i < n; ++i) {
                    double arg = phase[static_cast<std::size_t>(i)];
                    for (int j = 0; j < n; ++j)
                        arg += freq[static_cast<std::size_t>(i * n + j)] * x[static_cast<std::size_t>(j)];
                    u[static_cast<std::size_t>(i)] = std::sin(arg);
                }
                const double nu = dual_norm(space, u);
                if (nu > 1.0) u *= 1.0 / nu;
                u *= h * (a + b * norm(space, x));
                DualVector z = inner(x);
                z += u;
                return z;
            };
            break;
        }
        case OperatorPerturbation::Mode::monotone_safe: {
            // u(x) = Jx / S: gamma(||x||) u(x) = (gamma(||x||)/S) Jx is the
            // duality map scaled by a nonnegative nondecreasing radial factor,
            // hence monotone; dual_norm(u) = ||x||/S <= 1 on ||x|| <= S.
            const double S = pert.safe_scale;
            out.eval = [inner = op.eval, space, S, h, a, b](const Vector& x) {
                DualVector u = duality_map(space, x);
                u *= h * (a + b * norm(space, x)) / S;
                DualVector z = inner(x);
                z += u;
                return z;
            };
            break;
        }
    }
    return out;
}

DualVector perturb_rhs(const SpaceSpec& space, const DualVector& f, const RhsPerturbation& pert) {
    require(pert.omega >= 0.0 && std::isfinite(pert.omega), "rhs perturbation needs omega >= 0");
    if (pert.omega == 0.0) return f;
    DualVector dir = pert.direction;
    const double nd = dual_norm(space, dir);
    require(nd > 0.0, "rhs perturbation direction must be nonzero");
    dir *= pert.omega / nd;
    DualVector out = f;
    out += dir;
    return out;
}

MonotonicityReport check_monotonicity(const MonotoneOp& op, int n_pairs, std::uint64_t seed,
                                      const Box& region) {
    require(n_pairs >= 1, "check_monotonicity needs n_pairs >= 1");
    Rng rng = Rng(seed).fork(51);
    MonotonicityReport rep;
    rep.pairs = n_pairs;
    rep.worst_pairing = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n_pairs; ++t) {
        const Vector x1 = sample_box(region, rng);
        const Vector x2 = sample_box(region, rng);
        DualVector dz = op(x1);
        dz -= op(x2);
        Vector dx = x1;
        dx -= x2;
        rep.worst_pairing = std::min(rep.worst_pairing, pairing(dz, dx));
    }
    return rep;
}

UniformMonotonicityReport check_uniform_monotonicity(const SpaceSpec& space, const MonotoneOp& op,
                                                     const MonotonicityModulus& psi, int n_pairs,
                                                     std::uint64_t seed, const Box& region) {
    psi.validate();
    require(n_pairs >= 1, "check_uniform_monotonicity needs n_pairs >= 1");
    Rng rng = Rng(seed).fork(53);
    UniformMonotonicityReport rep;
    rep.pairs = n_pairs;
    rep.normalized_form = psi.normalized;
    rep.worst_slack = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n_pairs; ++t) {
        const Vector x1 = sample_box(region, rng);
        const Vector x2 = sample_box(region, rng);
        DualVector dz = op(x1);
        dz -= op(x2);
        Vector dx = x1;
        dx -= x2;
        const double sep = norm(space, dx);
        rep.worst_slack =
            std::min(rep.worst_slack, pairing(dz, dx) - psi.required_pairing(sep));
    }
    return rep;
}

MonotonicityModulus fit_power_modulus(const SpaceSpec& space, const MonotoneOp& op, double s_exp,
                                      int n_pairs, std::uint64_t seed, const Box& region,
                                      double safety) {
    require(n_pairs >= 1 && s_exp >= 1.0 && safety > 0.0 && safety <= 1.0,
            "fit_power_modulus: bad arguments");
    Rng rng = Rng(seed).fork(57);
    double c = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n_pairs; ++t) {
        const Vector x1 = sample_box(region, rng);
        const Vector x2 = sample_box(region, rng);
        Vector dx = x1;
        dx -= x2;
        const double sep = norm(space, dx);
        if (sep < 1e-9) continue;
        DualVector dz = op(x1);
        dz -= op(x2);
        c = std::min(c, pairing(dz, dx) / std::pow(sep, s_exp + 1.0));
    }
    require(std::isfinite(c) && c > 0.0, "fit_power_modulus: sampled ratios not positive");
    MonotonicityModulus psi;
    psi.c = safety * c;
    psi.s = s_exp;
    psi.normalized = false;
    return psi;
}

CoercivityReport check_lemma2_bound(const SpaceSpec& space, const MonotoneOp& op,
                                    const DualVector& f, const Vector& x0, double r0,
                                    int n_samples, std::uint64_t seed, const Box& region) {
    require(r0 > 0.0 && n_samples >= 1, "check_lemma2_bound: need r0 > 0, samples >= 1");
    Rng rng = Rng(seed).fork(61);
    const auto F = [&](const Vector& x) {
        DualVector z = op(x);
        z -= f;
        return z;
    };

    // c0: sampled sup of ||F||_* over the ball S(r0, x0), with the axis
    // extreme points included and a 1.1 margin for the unsampled remainder.
    double sup = 0.0;
    for (int t = 0; t < n_samples; ++t) {
        Vector x = sample_ball(space, r0, rng);
        x += x0;
        sup = std::max(sup, dual_norm(space, F(x)));
    }
    for (int i = 0; i < space.dim; ++i) {
        for (const double sgn : {-1.0, 1.0}) {
            Vector x = x0;
            x[static_cast<std::size_t>(i)] +=
                sgn * r0 * std::pow(space.weight(static_cast<std::size_t>(i)), -1.0 / space.p);
            sup = std::max(sup, dual_norm(space, F(x)));
        }
    }

    CoercivityReport rep;
    rep.c0 = 1.1 * sup;
    rep.samples = n_samples;
    rep.worst_slack = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n_samples; ++t) {
        const Vector x = sample_box(region, rng);
        const DualVector Fx = F(x);
        Vector dx = x;
        dx -= x0;
        const double lhs = pairing(Fx, dx);
        const double rhs = r0 * dual_norm(space, Fx) - rep.c0 * (norm(space, dx) + r0);
        rep.worst_slack = std::min(rep.worst_slack, lhs - rhs);
    }
    return rep;
}

double check_potential_consistency(const MonotoneOp& op, int n_points, std::uint64_t seed,
                                   const Box& region, double fd_step, double kink_margin) {
    require(static_cast<bool>(op.potential), "operator has no declared potential");
    require(n_points >= 1, "check_potential_consistency needs n_points >= 1");
    Rng rng = Rng(seed).fork(67);
    double worst = 0.0;
    int accepted = 0;
    int attempts = 0;
    while (accepted < n_points && attempts++ < n_points * 200) {
        Vector x = sample_box(region, rng);
        bool smooth = true;
        for (std::size_t i = 0; i < x.size() && smooth; ++i)
            smooth = std::abs(x[i]) > kink_margin;
        if (!smooth) continue;
        ++accepted;
        const DualVector z = op(x);
        for (std::size_t i = 0; i < x.size(); ++i) {
            Vector hi = x, lo = x;
            hi[i] += fd_step;
            lo[i] -= fd_step;
            const double fd = (op.potential(hi) - op.potential(lo)) / (2.0 * fd_step);
            worst = std::max(worst, std::abs(fd - z[i]) / std::max(1.0, std::abs(z[i])));
        }
    }
    require(accepted == n_points, "could not sample enough kink-free points");
    return worst;
}

}  // namespace pvi
