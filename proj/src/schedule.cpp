// Schedule runner and the two-set proximity audit.

#include "pvi/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace pvi {

namespace {

bool same_space(const SpaceSpec& a, const SpaceSpec& b) {
    if (a.dim != b.dim || a.p != b.p) return false;
    for (int i = 0; i < a.dim; ++i)
        if (a.weight(static_cast<std::size_t>(i)) != b.weight(static_cast<std::size_t>(i)))
            return false;
    return true;
}

}  // namespace

void Schedule::validate() const {
    if (steps.empty()) throw std::invalid_argument("schedule: at least one step required");
    for (const ScheduleStep& st : steps) {
        if (!(st.epsilon > 0.0) || !std::isfinite(st.epsilon))
            throw std::invalid_argument("schedule: epsilon must be positive");
        if (!(st.sigma >= 0.0) || !(st.h >= 0.0) || !(st.omega >= 0.0) || !(st.alpha >= 0.0))
            throw std::invalid_argument("schedule: perturbation levels must be >= 0");
    }
    for (std::size_t k = 1; k < steps.size(); ++k)
        if (!(steps[k].epsilon < steps[k - 1].epsilon))
            throw std::invalid_argument("schedule: epsilon must decrease strictly");
    switch (coupling) {
        case CouplingRule::exact:
            for (const ScheduleStep& st : steps)
                if (st.sigma != 0.0 || st.h != 0.0 || st.omega != 0.0 || st.alpha != 0.0)
                    throw std::invalid_argument("schedule: exact coupling forbids perturbations");
            break;
        case CouplingRule::theorem2:
            for (const ScheduleStep& st : steps)
                if (st.h != 0.0 || st.omega != 0.0 || st.alpha != 0.0)
                    throw std::invalid_argument(
                        "schedule: theorem2 coupling perturbs only the set");
            break;
        case CouplingRule::theorem3_regularized: {
            const bool first_zero = steps.front().alpha == 0.0;
            for (const ScheduleStep& st : steps) {
                if ((st.alpha == 0.0) != first_zero)
                    throw std::invalid_argument(
                        "schedule: regularized coupling needs alpha > 0 on every step, or "
                        "identically zero for the control");
                if (first_zero && (st.h != 0.0 || st.omega != 0.0))
                    throw std::invalid_argument(
                        "schedule: the alpha = 0 control drops the data perturbations tied "
                        "to alpha");
            }
            break;
        }
    }
}

TwoSetBoundReport check_two_set_bound(const SpaceSpec& space, const PenaltyProblem& p1,
                                      const SolveReport& r1, const PenaltyProblem& p2,
                                      const SolveReport& r2, const MonotonicityModulus& psi,
                                      const ModulusProfile& primal, const ModulusProfile& dual,
                                      double sigma,
                                      const ProximityEnvelopes* envelopes) {
    if (p1.epsilon != p2.epsilon)
        throw std::invalid_argument("two-set bound: the solutions must share epsilon");
    if (!(sigma >= 0.0)) throw std::invalid_argument("two-set bound: sigma must be >= 0");
    if (!same_space(primal.space(), space) || !same_space(dual.space(), space.dual()))
        throw std::invalid_argument("two-set bound: modulus profiles do not match the space");
    psi.validate();

    const double L = kJEstimateL;
    const Vector theta(static_cast<std::size_t>(space.dim));

    TwoSetBoundReport out;
    out.sigma = sigma;
    out.t = norm(space, r1.x - r2.x);
    out.lhs = psi.rate(out.t);
    out.d = std::max(distance(space, p1.set, theta), distance(space, p2.set, theta));
    out.r = std::max(norm(space, r1.x), norm(space, r2.x));
    out.C = 2.0 * std::max(1.0, out.r + out.d);

    double inner = out.d + out.r;
    if (envelopes) {
        if (!envelopes->f1 || !envelopes->f2)
            throw std::invalid_argument("two-set bound: both proximity envelopes required");
        const double arg = 2.0 * out.r + out.d;
        inner = (out.d + out.r) * (envelopes->f1(arg) + envelopes->f2(arg));
    }
    out.delta_arg = 4.0 * L * inner * sigma;
    const ModulusProfile::Inverse dinv = primal.delta_inverse(out.delta_arg);
    out.delta_value = dinv.value;
    out.g_arg = 2.0 * out.C * out.C * L * dinv.value;
    const ModulusProfile::Inverse ginv = dual.g_inverse(out.g_arg);
    out.g_value = ginv.value;
    out.rhs = out.C * ginv.value / p1.epsilon;
    out.slack = out.rhs - out.lhs;
    out.vacuous = dinv.saturated || ginv.saturated;
    return out;
}

namespace {

// Everything a rung needs, prepared up front so rungs can run concurrently.
struct RungPlan {
    PenaltyProblem problem;
    std::optional<PenaltyProblem> twin;  // exact-set companion for the audit
    SolveOptions solve;
};

RungPlan plan_rung(const ScheduleInputs& in, const ScheduleStep& st, bool audit) {
    RungPlan plan{in.base, std::nullopt, in.solve};
    plan.problem.epsilon = st.epsilon;
    plan.problem.alpha = st.alpha;
    if (st.sigma > 0.0)
        plan.problem.set = inflate(in.base.space, in.base.set, st.sigma, InflateMode::outward);
    if (st.h > 0.0) {
        OperatorPerturbation pert = in.op_pert;
        pert.h = st.h;
        plan.problem.op = perturb_operator(in.base.space, in.base.op, pert);
    }
    if (st.omega > 0.0) {
        RhsPerturbation pert = in.rhs_pert;
        pert.omega = st.omega;
        plan.problem.rhs = perturb_rhs(in.base.space, in.base.rhs, pert);
    }
    if (audit && st.sigma > 0.0) {
        PenaltyProblem twin = plan.problem;
        twin.set = in.base.set;
        plan.twin = twin;
    }
    return plan;
}

void solve_rung(const ScheduleInputs& in, const RungPlan& plan, const MonotonicityModulus* psi,
                StepRecord& rec) {
    rec.report = solve_penalty(plan.problem, plan.solve);
    if (!rec.report.converged || !plan.twin) return;
    SolveOptions twin_opts = plan.solve;
    twin_opts.init = rec.report.x;
    const SolveReport twin_report = solve_penalty(*plan.twin, twin_opts);
    if (!twin_report.converged) {
        rec.twin_failed = true;
        return;
    }
    rec.two_set =
        check_two_set_bound(in.base.space, plan.problem, rec.report, *plan.twin, twin_report,
                            *psi, *in.primal, *in.dual, rec.step.sigma);
}

}  // namespace

ScheduleResult run_schedule(const ScheduleInputs& in, const Schedule& schedule) {
    schedule.validate();
    in.base.validate();
    const SpaceSpec& space = in.base.space;
    const int n_steps = static_cast<int>(schedule.steps.size());

    const bool any_sigma = std::any_of(schedule.steps.begin(), schedule.steps.end(),
                                       [](const ScheduleStep& st) { return st.sigma > 0.0; });
    const bool have_profiles = in.primal != nullptr && in.dual != nullptr;
    if (have_profiles &&
        (!same_space(in.primal->space(), space) || !same_space(in.dual->space(), space.dual())))
        throw std::invalid_argument("run_schedule: modulus profiles do not match the space");

    const MonotonicityModulus* psi = nullptr;
    if (in.psi)
        psi = &*in.psi;
    else if (in.base.op.modulus)
        psi = &*in.base.op.modulus;
    const bool audit = in.audit_two_set && any_sigma;
    if (audit && (!have_profiles || psi == nullptr))
        throw std::invalid_argument(
            "run_schedule: the two-set audit needs both modulus profiles and a "
            "monotonicity modulus");

    ScheduleResult out;
    out.warm_start = schedule.warm_start;
    out.reference =
        solve_vi_reference(space, in.base.op, in.base.rhs, in.base.set, in.reference);
    if (!out.reference.converged)
        throw std::runtime_error("run_schedule: reference solve did not converge");

    out.records.resize(static_cast<std::size_t>(n_steps));
    for (int k = 0; k < n_steps; ++k) out.records[static_cast<std::size_t>(k)].step = schedule.steps[static_cast<std::size_t>(k)];

    Rng init_rng(in.init_seed);
    std::vector<RungPlan> plans;
    plans.reserve(static_cast<std::size_t>(n_steps));
    for (int k = 0; k < n_steps; ++k) {
        RungPlan plan = plan_rung(in, schedule.steps[static_cast<std::size_t>(k)], audit);
        plan.solve.seed = in.solve.seed + static_cast<std::uint64_t>(k);
        if (!schedule.warm_start) {
            Rng fork = init_rng.fork(static_cast<std::uint64_t>(k));
            plan.solve.init = sample_in_set(space, in.base.set, fork);
        }
        plans.push_back(std::move(plan));
    }

    if (schedule.warm_start) {
        for (int k = 0; k < n_steps; ++k) {
            StepRecord& rec = out.records[static_cast<std::size_t>(k)];
            if (k > 0) plans[static_cast<std::size_t>(k)].solve.init = out.records[static_cast<std::size_t>(k - 1)].report.x;
            solve_rung(in, plans[static_cast<std::size_t>(k)], psi, rec);
            if (!rec.report.converged) break;
        }
    } else {
        const int workers =
            std::max(1, std::min(in.threads, n_steps));
        if (workers == 1) {
            for (int k = 0; k < n_steps; ++k)
                solve_rung(in, plans[static_cast<std::size_t>(k)], psi,
                           out.records[static_cast<std::size_t>(k)]);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(workers));
            for (int w = 0; w < workers; ++w)
                pool.emplace_back([&, w] {
                    for (int k = w; k < n_steps; k += workers)
                        solve_rung(in, plans[static_cast<std::size_t>(k)], psi,
                                   out.records[static_cast<std::size_t>(k)]);
                });
            for (std::thread& t : pool) t.join();
        }
    }

    // Post-processing is sequential regardless of how the rungs ran.
    const double noise_floor = 50.0 * in.solve.tol;
    for (int k = 0; k < n_steps; ++k) {
        StepRecord& rec = out.records[static_cast<std::size_t>(k)];
        const ScheduleStep& st = rec.step;
        if (rec.report.x.size() == 0) {  // rung never ran (earlier abort)
            out.records.resize(static_cast<std::size_t>(k));
            break;
        }
        rec.error = norm(space, rec.report.x - out.reference.x_star);
        rec.gap_over_eps = rec.report.penalty_gap / st.epsilon;
        rec.sigma_used = st.sigma;
        if (st.sigma > 0.0) {
            const HausdorffResult hd =
                hausdorff(space, in.base.set, plans[static_cast<std::size_t>(k)].problem.set);
            if (hd.exact) rec.sigma_used = hd.value;
        }
        if (have_profiles) {
            const ModulusProfile::Inverse dinv = in.primal->delta_inverse(st.sigma);
            const ModulusProfile::Inverse ginv = in.dual->g_inverse(dinv.value);
            rec.coupling_set = ginv.value / st.epsilon;
            rec.coupling_saturated = dinv.saturated || ginv.saturated;
            if (st.alpha > 0.0) rec.coupling_set_reg = rec.coupling_set / st.alpha;
        }
        if (st.alpha > 0.0) rec.coupling_data = (st.h + st.omega) / st.alpha;
        if (k > 0)
            rec.displacement =
                norm(space, rec.report.x - out.records[static_cast<std::size_t>(k - 1)].report.x);
        if (rec.twin_failed) out.bound_violation = true;
        if (rec.two_set && !rec.two_set->pass(1e-9)) out.bound_violation = true;
        if (!rec.report.converged) {
            out.aborted = true;
            out.aborted_at = k;
            out.records.resize(static_cast<std::size_t>(k + 1));
            break;
        }
    }

    for (std::size_t k = 1; k < out.records.size(); ++k) {
        const double prev = out.records[k - 1].error;
        const double cur = out.records[k].error;
        if (std::isfinite(prev) && std::isfinite(cur)) {
            if (cur > prev * (1.0 + 1e-9)) out.errors_decreasing = false;
            if (cur > noise_floor && cur >= kStagnationRatio * prev) out.stagnation = true;
        }
        const double cprev = out.records[k - 1].coupling_set;
        const double ccur = out.records[k].coupling_set;
        if (std::isfinite(cprev) && std::isfinite(ccur) && !(ccur < cprev))
            out.couplings_decreasing = false;
    }
    return out;
}

}  // namespace pvi
