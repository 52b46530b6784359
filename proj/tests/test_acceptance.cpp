// Acceptance gate: each criterion prints exactly one verdict line. Criteria
// measure the library end to end at pinned tolerances; sub-conditions are
// CHECKed individually so a red line comes with its failing clause.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pvi/cli.hpp"
#include "pvi/config.hpp"
#include "pvi/rate.hpp"
#include "pvi/schedule.hpp"

namespace {

using namespace pvi;

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int index, const char* name, bool ok, double seconds) {
    std::printf("criterion %02d  %-38s  %s  (%.1f s)\n", index, name, ok ? "PASS" : "FAIL",
                seconds);
    std::fflush(stdout);
}

SpaceSpec make_space(int dim, double p, std::vector<double> w = {}) {
    SpaceSpec s;
    s.dim = dim;
    s.p = p;
    s.weights = std::move(w);
    s.validate();
    return s;
}

ScheduleInputs inputs_from(const ExperimentConfig& cfg) {
    ScheduleInputs in;
    in.base.space = cfg.space;
    in.base.op = cfg.op;
    in.base.set = cfg.set;
    in.base.rhs = cfg.rhs;
    in.base.epsilon = 1.0;
    in.op_pert = cfg.op_pert;
    in.rhs_pert = cfg.rhs_pert;
    in.solve = cfg.solve;
    in.reference = cfg.reference;
    in.init_seed = cfg.init_seed;
    return in;
}

double set_distance(const SpaceSpec& s, const ConvexSet& set, const Vector& x) {
    Vector d = project(s, set, x);
    d -= x;
    return norm(s, d);
}

}  // namespace

TEST_CASE("acceptance 01: duality mapping identities") {
    Stopwatch sw;
    double worst_pairing = 0.0, worst_norm = 0.0, worst_identity = 0.0;
    Rng root(90101);
    for (const int dim : {1, 5, 50}) {
        for (const double p : {1.5, 2.0, 3.0}) {
            const SpaceSpec s = make_space(dim, p);
            Rng rng = root.fork(static_cast<std::uint64_t>(dim * 100 + int(p * 10)));
            for (int k = 0; k < 10000; ++k) {
                Vector x = sample_sphere(s, rng);
                x *= std::exp(rng.uniform(-3.0, 3.0));
                const double n = norm(s, x);
                const DualVector J = duality_map(s, x);
                worst_pairing = std::max(worst_pairing,
                                         std::abs(pairing(J, x) - n * n) / (n * n));
                worst_norm = std::max(worst_norm, std::abs(dual_norm(s, J) - n) / n);
                if (p == 2.0)
                    for (std::size_t i = 0; i < x.size(); ++i)
                        worst_identity = std::max(worst_identity, std::abs(J[i] - x[i]));
            }
        }
    }
    const bool identities = worst_pairing <= 1e-10 && worst_norm <= 1e-10;
    const bool hilbert = worst_identity <= 1e-14;
    const bool in_time = sw.seconds() < 10.0;
    CHECK(identities);
    CHECK(hilbert);
    CHECK(in_time);
    report(1, "duality mapping identities", identities && hilbert && in_time, sw.seconds());
}

TEST_CASE("acceptance 02: projection certificates") {
    Stopwatch sw;
    const double ps[3] = {1.5, 2.0, 3.0};
    Rng root(90202);
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i) {
        Rng rng = root.fork(static_cast<std::uint64_t>(i));
        const double p = ps[i % 3];
        const int kind = (i / 3) % 3;
        const int dim = 2 + static_cast<int>(rng.integer(5));
        std::vector<double> w;
        if (rng.uniform() < 0.5)
            for (int j = 0; j < dim; ++j) w.push_back(rng.uniform(0.5, 2.0));
        const SpaceSpec s = make_space(dim, p, w);
        const std::size_t n = static_cast<std::size_t>(dim);

        Vector center(n);
        for (std::size_t j = 0; j < n; ++j) center[j] = rng.uniform(-1.0, 1.0);
        ConvexSet set;
        if (kind == 0) {
            Vector lo = center, hi = center;
            for (std::size_t j = 0; j < n; ++j) {
                const double hw = rng.uniform(0.3, 1.2);
                lo[j] -= hw;
                hi[j] += hw;
            }
            set = ConvexSet::box(std::move(lo), std::move(hi));
        } else if (kind == 1) {
            set = ConvexSet::ball(center, rng.uniform(0.4, 1.3));
        } else {
            DualVector a(n);
            for (std::size_t j = 0; j < n; ++j) a[j] = rng.normal();
            set = ConvexSet::halfspace(a, pairing(a, center) + rng.uniform(-0.5, 0.5));
        }

        Vector x = center;
        for (std::size_t j = 0; j < n; ++j) x[j] += 2.0 * rng.normal();
        const Vector xbar = project(s, set, x);
        const CertificateReport rep =
            check_projection_certificate(s, set, x, xbar, 1000, 777000 + i);
        worst = std::min({worst, rep.min_slack, rep.min_support_slack});
    }
    const bool positive = worst >= -1e-8;

    // Negative controls: pull the candidate projection inward along the
    // residual ray; Hoelder equality makes the slack at xi = P x exactly
    // -t (gap + t), and the sampled certificate sees it.
    bool negatives = true;
    for (const double p : ps) {
        const SpaceSpec s = make_space(4, p);
        const ConvexSet sets[3] = {
            ConvexSet::box(Vector{-1, -1, -1, -1}, Vector{1, 1, 1, 1}),
            ConvexSet::ball(Vector{0, 0, 0, 0}, 1.0),
            ConvexSet::halfspace(DualVector{1, 1, 1, 1}, 1.0)};
        const Vector probes[3] = {{2.0, 0.3, -0.2, 0.5},
                                  {1.4, 1.4, 0.0, 0.0},
                                  {1.0, 1.0, 1.0, 1.0}};
        for (int kind = 0; kind < 3; ++kind) {
            const Vector& x = probes[kind];
            const Vector good = project(s, sets[kind], x);
            Vector ray = good;
            ray -= x;
            const double gap = norm(s, ray);
            REQUIRE(gap >= 0.3);
            Vector bad = good;
            Vector step = ray;
            step *= 0.3 / gap;
            bad += step;
            const CertificateReport rep = check_projection_certificate(
                s, sets[kind], x, bad, 1000, 778000 + kind + static_cast<int>(10 * p));
            const double refuted = std::min(rep.min_slack, rep.min_support_slack);
            CAPTURE(p);
            CAPTURE(kind);
            CHECK(refuted <= -1e-4);
            negatives = negatives && refuted <= -1e-4;
        }
    }
    const bool in_time = sw.seconds() < 120.0;
    CHECK(positive);
    CHECK(in_time);
    report(2, "projection certificates", positive && negatives && in_time, sw.seconds());
}

TEST_CASE("acceptance 03: duality-map estimate suite") {
    Stopwatch sw;
    bool sampled_ok = true;
    for (const double p : {1.5, 3.0}) {
        const SpaceSpec s = make_space(5, p);
        const ModulusProfile primal = build_modulus_profile(s);
        const ModulusProfile dual = build_modulus_profile(s.dual());
        const JEstimateReport rep = check_J_estimates(primal, dual, 2.0, 10000, 90303);
        CAPTURE(p);
        CAPTURE(rep.worst_upper);
        CAPTURE(rep.worst_pairing);
        CAPTURE(rep.worst_pairing_alt);
        CAPTURE(rep.worst_lower);
        CHECK(rep.pass(1e-9));
        sampled_ok = sampled_ok && rep.pass(1e-9);
    }

    // p = 2: both sides of each estimate depend on the pair only through
    // t = ||x - y||, so a grid over t covers every pair exactly.
    bool analytic_ok = true;
    {
        const double R = 2.0, L = kJEstimateL;
        const double C2 = std::max(1.0, R);
        const double C1 = std::max(L, R);
        const double C1bar = 8.0 * (std::sqrt(1.0 + 4.0 * R * R) + 1.0) + C1;
        const SpaceSpec s = make_space(5, 2.0);
        const ModulusProfile primal = build_modulus_profile(s);
        const ModulusProfile dual = build_modulus_profile(s.dual());
        for (int k = 0; k < 2000; ++k) {
            const double t = 1e-6 * std::pow(2.0 * R / 1e-6, (k + 0.5) / 2000.0);
            const auto gi = dual.g_inverse(2.0 * L * C2 * t);
            const double upper = C2 * (gi.saturated ? 2.0 : gi.value) - t;
            const double rho = primal.rho(t);
            const double pairing_slack = 8.0 * t * t + 8.0 * C1 * rho - t * t;
            const double pairing_alt_slack = C1bar * rho - t * t;
            const double lower = t * t - 0.5 / L * primal.delta(t / C2);
            const bool ok = upper >= -1e-12 && pairing_slack >= -1e-12 &&
                            pairing_alt_slack >= -1e-12 && lower >= -1e-12;
            if (!ok) {
                CAPTURE(t);
                CHECK(ok);
                analytic_ok = false;
            }
        }
        CHECK(analytic_ok);
    }
    const bool in_time = sw.seconds() < 60.0;
    CHECK(in_time);
    report(3, "duality-map estimate suite", sampled_ok && analytic_ok && in_time, sw.seconds());
}

TEST_CASE("acceptance 04: penalty gap rate on the testbed") {
    Stopwatch sw;
    const ExperimentConfig cfg = load_config("paper-testbed");
    REQUIRE(cfg.schedule.steps.size() == 4);
    CHECK(cfg.reference.tol == 1e-10);
    ScheduleInputs in = inputs_from(cfg);
    const ScheduleResult res = run_schedule(in, cfg.schedule);
    REQUIRE_FALSE(res.aborted);
    REQUIRE(res.reference.converged);

    std::vector<std::pair<double, double>> pairs;
    bool errors_ok = true;
    for (std::size_t k = 0; k < res.records.size(); ++k) {
        pairs.emplace_back(res.records[k].step.epsilon, res.records[k].report.penalty_gap);
        if (k > 0 && res.records[k].error > res.records[k - 1].error * (1.0 + 1e-9))
            errors_ok = false;
    }
    const double final_error = res.records.back().error;
    const RateFit fit = fit_rate(pairs);
    CAPTURE(fit.slope);
    CAPTURE(fit.r_squared);
    CAPTURE(final_error);
    const bool rate_ok = fit.slope >= 0.9 && fit.r_squared >= 0.95;
    const bool error_ok = errors_ok && final_error <= 1e-2;
    const bool in_time = sw.seconds() < 120.0;
    CHECK(rate_ok);
    CHECK(error_ok);
    CHECK(in_time);
    report(4, "penalty gap rate on the testbed", rate_ok && error_ok && in_time, sw.seconds());
}

TEST_CASE("acceptance 05: scalar closed form") {
    Stopwatch sw;
    PenaltyProblem prob;
    prob.space = make_space(1, 2.0);
    prob.op = make_identity(prob.space);
    prob.set = ConvexSet::box(Vector{1.0}, Vector{2.0});
    prob.rhs = DualVector{0.0};
    prob.epsilon = 0.1;
    SolveOptions opts;
    opts.tol = 1e-12;
    const SolveReport rep = solve_penalty(prob, opts);
    const double err = std::abs(rep.x[0] - 10.0 / 11.0);
    CAPTURE(rep.x[0]);
    const bool ok = rep.converged && err <= 1e-9;
    CHECK(ok);
    report(5, "scalar closed form", ok, sw.seconds());
}

TEST_CASE("acceptance 06: perturbed-set stability ladder") {
    Stopwatch sw;
    const ExperimentConfig cfg = load_config("paper-testbed-p2");
    const ModulusProfile primal = build_modulus_profile(cfg.space);
    const ModulusProfile dual = build_modulus_profile(cfg.space.dual());

    Schedule ladder;
    ladder.coupling = CouplingRule::theorem2;
    for (int k = 1; k <= 4; ++k) {
        const double eps = std::pow(10.0, -k);
        ladder.steps.push_back({eps, eps * eps, 0.0, 0.0, 0.0});
    }
    ScheduleInputs in = inputs_from(cfg);
    in.primal = &primal;
    in.dual = &dual;
    const ScheduleResult res = run_schedule(in, ladder);
    REQUIRE_FALSE(res.aborted);

    bool couplings_decreasing = true, errors_decreasing = true;
    std::printf("criterion 06 detail: coupled run (sigma = eps^2)\n");
    for (std::size_t k = 0; k < res.records.size(); ++k) {
        std::printf("  eps=%.0e  coupling=%.6g  error=%.6g\n", res.records[k].step.epsilon,
                    res.records[k].coupling_set, res.records[k].error);
        if (k > 0) {
            if (!(res.records[k].coupling_set < res.records[k - 1].coupling_set))
                couplings_decreasing = false;
            if (!(res.records[k].error < res.records[k - 1].error)) errors_decreasing = false;
        }
    }
    const double final_error = res.records.back().error;

    Schedule control = ladder;
    for (ScheduleStep& st : control.steps) st.sigma = 1e-2;
    const ScheduleResult ctl = run_schedule(in, control);
    REQUIRE_FALSE(ctl.aborted);
    std::printf("criterion 06 detail: control run (sigma = 1e-2)\n");
    for (const StepRecord& rec : ctl.records)
        std::printf("  eps=%.0e  error=%.6g\n", rec.step.epsilon, rec.error);
    std::printf("criterion 06 detail: control stagnation flag = %s\n",
                ctl.stagnation ? "true" : "false");
    const std::size_t last = ctl.records.size() - 1;
    const bool control_flattens = ctl.records[last].error >= ctl.records[last - 1].error;
    CHECK(ctl.stagnation);  // the detectable signal: the error stops halving

    CAPTURE(final_error);
    CHECK(couplings_decreasing);
    CHECK(errors_decreasing);
    CHECK(final_error <= 2e-2);
    CHECK(control_flattens);
    const bool in_time = sw.seconds() < 180.0;
    CHECK(in_time);
    report(6, "perturbed-set stability ladder",
           couplings_decreasing && errors_decreasing && final_error <= 2e-2 &&
               control_flattens && in_time,
           sw.seconds());
}

TEST_CASE("acceptance 07: two-set proximity bound") {
    Stopwatch sw;
    const SpaceSpec s = make_space(2, 2.0);
    const MonotoneOp op = make_identity(s);
    REQUIRE(op.modulus.has_value());
    const ModulusProfile primal = build_modulus_profile(s);
    const ModulusProfile dual = build_modulus_profile(s.dual());

    Rng root(90707);
    bool all_pass = true;
    int small_sigma = 0, small_nonvacuous = 0;
    for (int k = 0; k < 50; ++k) {
        Rng rng = root.fork(static_cast<std::uint64_t>(k));
        const double sigma = 1e-4 * std::pow(1000.0, rng.uniform());
        Vector center{rng.uniform(-3e-4, 3e-4), rng.uniform(-3e-4, 3e-4)};
        const double hw0 = rng.uniform(4e-4, 8e-4);
        const double hw1 = rng.uniform(4e-4, 8e-4);
        ConvexSet base;
        Vector target = center;
        if (k % 2 == 0) {
            base = ConvexSet::box(Vector{center[0] - hw0, center[1] - hw1},
                                  Vector{center[0] + hw0, center[1] + hw1});
            target[0] += 1.25 * hw0;
            target[1] += 1.25 * hw1;
        } else {
            base = ConvexSet::ball(center, hw0);
            target[0] += 1.25 * hw0;
        }
        const ConvexSet grown = inflate(s, base, sigma, InflateMode::outward);

        PenaltyProblem p1;
        p1.space = s;
        p1.op = op;
        p1.set = base;
        p1.rhs = DualVector{target[0], target[1]};
        p1.epsilon = 1e-2;
        PenaltyProblem p2 = p1;
        p2.set = grown;
        SolveOptions opts;
        opts.tol = 1e-11;
        opts.seed = 1000 + static_cast<std::uint64_t>(k);
        const SolveReport r1 = solve_penalty(p1, opts);
        const SolveReport r2 = solve_penalty(p2, opts);
        REQUIRE(r1.converged);
        REQUIRE(r2.converged);

        const TwoSetBoundReport rep =
            check_two_set_bound(s, p1, r1, p2, r2, *op.modulus, primal, dual, sigma);
        CAPTURE(k);
        CAPTURE(sigma);
        CAPTURE(rep.slack);
        CHECK(rep.pass(1e-9));
        all_pass = all_pass && rep.pass(1e-9);
        if (sigma <= 1e-3) {
            ++small_sigma;
            if (!rep.vacuous) ++small_nonvacuous;
        }
    }
    REQUIRE(small_sigma > 0);
    CAPTURE(small_sigma);
    CAPTURE(small_nonvacuous);
    const bool quorum = 5 * small_nonvacuous >= 4 * small_sigma;
    const bool in_time = sw.seconds() < 300.0;
    CHECK(quorum);
    CHECK(in_time);
    report(7, "two-set proximity bound", all_pass && quorum && in_time, sw.seconds());
}

TEST_CASE("acceptance 08: regularized flat testbed") {
    Stopwatch sw;
    const ExperimentConfig cfg = load_config("flat-regularized");
    REQUIRE(cfg.schedule.coupling == CouplingRule::theorem3_regularized);
    REQUIRE(cfg.schedule.steps.size() == 4);
    ScheduleInputs in = inputs_from(cfg);
    const ScheduleResult res = run_schedule(in, cfg.schedule);
    REQUIRE_FALSE(res.aborted);

    const Vector& limit = res.records.back().report.x;
    std::vector<double> dist;
    for (const StepRecord& rec : res.records) {
        Vector d = rec.report.x;
        d -= limit;
        dist.push_back(norm(cfg.space, d));
    }
    const bool settles = dist[0] > dist[1] && dist[1] > dist[2] && dist[2] > 0.0;
    const double limit_slack = res.records.back().report.certificate.slack;

    Schedule control = cfg.schedule;
    control.warm_start = false;
    for (ScheduleStep& st : control.steps) st.h = st.omega = st.alpha = 0.0;
    const ScheduleResult ctl = run_schedule(in, control);
    REQUIRE_FALSE(ctl.aborted);
    const double reg_move = res.records.back().displacement;
    const double ctl_move = ctl.records.back().displacement;
    const bool control_drifts = ctl_move > 10.0 * reg_move;

    CAPTURE(dist[0]);
    CAPTURE(dist[1]);
    CAPTURE(dist[2]);
    CAPTURE(limit_slack);
    CAPTURE(reg_move);
    CAPTURE(ctl_move);
    CHECK(settles);
    CHECK(limit_slack >= -1e-6);
    CHECK(control_drifts);
    const bool in_time = sw.seconds() < 180.0;
    CHECK(in_time);
    report(8, "regularized flat testbed",
           settles && limit_slack >= -1e-6 && control_drifts && in_time, sw.seconds());
}

TEST_CASE("acceptance 09: coercivity and stability audits") {
    Stopwatch sw;
    const ExperimentConfig cfg = load_config("paper-testbed");
    const SpaceSpec& s = cfg.space;
    const std::size_t n = static_cast<std::size_t>(s.dim);

    Vector lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = -4.0;
        hi[i] = 4.0;
    }
    const Box region{lo, hi};
    const Vector x0 = project(s, cfg.set, Vector(n));
    const CoercivityReport coercivity =
        check_lemma2_bound(s, cfg.op, cfg.rhs, x0, 1.0, 2000, 90909, region);
    CAPTURE(coercivity.worst_slack);
    const bool coercivity_ok = coercivity.worst_slack >= -1e-9;

    const ModulusProfile primal = build_modulus_profile(s);
    const double sigma = 0.005;
    const ConvexSet grown = inflate(s, cfg.set, sigma, InflateMode::outward);
    Rng rng = Rng(90910).fork(4);
    double worst_stability = std::numeric_limits<double>::infinity();
    int vacuous = 0;
    for (int t = 0; t < 16; ++t) {
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = rng.normal();
        const StabilityReport rep =
            check_projection_stability(s, primal, cfg.set, grown, x, sigma);
        if (rep.vacuous)
            ++vacuous;
        else
            worst_stability = std::min(worst_stability, rep.slack);
    }
    CAPTURE(worst_stability);
    CAPTURE(vacuous);
    const bool stability_ok = vacuous < 16 && worst_stability >= -1e-9;

    std::ostringstream out, err;
    const int code = run_cli({"audit", "--config", "paper-testbed"}, out, err);
    const bool cli_ok = code == 0;
    const bool in_time = sw.seconds() < 120.0;
    CHECK(coercivity_ok);
    CHECK(stability_ok);
    CHECK(cli_ok);
    CHECK(in_time);
    report(9, "coercivity and stability audits",
           coercivity_ok && stability_ok && cli_ok && in_time, sw.seconds());
}

TEST_CASE("acceptance 10: deterministic tables") {
    Stopwatch sw;
    std::ostringstream out1, err1, out2, err2;
    const int code1 = run_cli({"converge", "--config", "paper-testbed"}, out1, err1);
    const int code2 = run_cli({"converge", "--config", "paper-testbed"}, out2, err2);
    const bool ok = code1 == 0 && code2 == 0 && !out1.str().empty() && out1.str() == out2.str();
    CHECK(code1 == 0);
    CHECK(code2 == 0);
    CHECK_FALSE(out1.str().empty());
    CHECK(out1.str() == out2.str());
    report(10, "deterministic tables", ok, sw.seconds());
}
