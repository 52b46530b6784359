// Experiment commands: single solves, schedule runs with trend checks, and
// the audit suites, each emitting deterministic CSV or JSONL rows.

#include "pvi/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pvi/rate.hpp"
#include "pvi/schedule.hpp"

namespace pvi {

namespace {

// ---- row writing ----

struct Cell {
    enum class Kind { number, integer, boolean, text };
    Kind kind = Kind::number;
    double num = 0.0;
    long long whole = 0;
    bool flag = false;
    std::string text;
};

Cell num(double v) {
    Cell c;
    c.kind = Cell::Kind::number;
    c.num = v;
    return c;
}

Cell whole(long long v) {
    Cell c;
    c.kind = Cell::Kind::integer;
    c.whole = v;
    return c;
}

Cell flag(bool v) {
    Cell c;
    c.kind = Cell::Kind::boolean;
    c.flag = v;
    return c;
}

Cell text(std::string v) {
    Cell c;
    c.kind = Cell::Kind::text;
    c.text = std::move(v);
    return c;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// One table per command: a header plus value rows in CSV, or one flat object
// per line in JSONL. Summary records become comment lines or kind-tagged
// objects, so both formats carry the same information.
class RowWriter {
  public:
    RowWriter(std::ostream& out, const std::string& format, std::vector<std::string> columns)
        : out_(out), jsonl_(format == "jsonl"), columns_(std::move(columns)) {
        if (!jsonl_) {
            for (std::size_t i = 0; i < columns_.size(); ++i) {
                if (i) out_ << ',';
                out_ << columns_[i];
            }
            out_ << '\n';
        }
    }

    void row(const std::vector<Cell>& cells) {
        if (jsonl_) {
            nlohmann::ordered_json obj;
            for (std::size_t i = 0; i < cells.size(); ++i) put(obj, columns_[i], cells[i]);
            out_ << obj.dump() << '\n';
            return;
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            write_csv(cells[i]);
        }
        out_ << '\n';
    }

    void meta(const std::string& kind, const std::vector<std::pair<std::string, Cell>>& fields) {
        if (jsonl_) {
            nlohmann::ordered_json obj;
            obj["kind"] = kind;
            for (const auto& [key, cell] : fields) put(obj, key, cell);
            out_ << obj.dump() << '\n';
            return;
        }
        out_ << "# " << kind;
        for (const auto& [key, cell] : fields) {
            out_ << ' ' << key << '=';
            write_csv(cell);
        }
        out_ << '\n';
    }

  private:
    static void put(nlohmann::ordered_json& obj, const std::string& key, const Cell& c) {
        switch (c.kind) {
            case Cell::Kind::number:
                if (std::isfinite(c.num))
                    obj[key] = c.num;
                else
                    obj[key] = nullptr;
                break;
            case Cell::Kind::integer: obj[key] = c.whole; break;
            case Cell::Kind::boolean: obj[key] = c.flag; break;
            case Cell::Kind::text: obj[key] = c.text; break;
        }
    }

    void write_csv(const Cell& c) {
        switch (c.kind) {
            case Cell::Kind::number: out_ << format_double(c.num); break;
            case Cell::Kind::integer: out_ << c.whole; break;
            case Cell::Kind::boolean: out_ << (c.flag ? '1' : '0'); break;
            case Cell::Kind::text: out_ << c.text; break;
        }
    }

    std::ostream& out_;
    bool jsonl_;
    std::vector<std::string> columns_;
};

// Progress lines carry wall-clock stamps and go to the error stream only, so
// the data stream stays a pure function of the configuration.
void stamp(std::ostream& err, const std::string& what) {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm_utc);
    err << '[' << buf << "Z] " << what << '\n';
}

ScheduleInputs make_inputs(const ExperimentConfig& cfg) {
    ScheduleInputs in;
    in.base.op = cfg.op;
    in.base.rhs = cfg.rhs;
    in.base.set = cfg.set;
    in.base.space = cfg.space;
    in.op_pert = cfg.op_pert;
    in.rhs_pert = cfg.rhs_pert;
    in.solve = cfg.solve;
    in.reference = cfg.reference;
    in.audit_two_set = cfg.audit_two_set;
    in.init_seed = cfg.init_seed;
    return in;
}

void reference_meta(RowWriter& w, const VISolution& ref) {
    w.meta("reference", {{"method", text(ref.method)},
                         {"fp_residual", num(ref.fp_residual)},
                         {"certificate_slack", num(ref.certificate_slack)},
                         {"iterations", whole(ref.iterations)},
                         {"converged", flag(ref.converged)}});
}

void flags_meta(RowWriter& w, const ScheduleResult& res) {
    w.meta("schedule_flags", {{"aborted", flag(res.aborted)},
                              {"aborted_at", whole(res.aborted_at)},
                              {"errors_decreasing", flag(res.errors_decreasing)},
                              {"stagnation", flag(res.stagnation)},
                              {"couplings_decreasing", flag(res.couplings_decreasing)},
                              {"bound_violation", flag(res.bound_violation)}});
}

std::vector<Cell> step_cells(const ScheduleStep& st, long long seed, bool warm) {
    return {num(st.epsilon), num(st.sigma), num(st.h), num(st.omega), num(st.alpha), whole(seed),
            flag(warm)};
}

const std::vector<std::string> kStepColumns = {"epsilon", "sigma", "h",
                                               "omega",   "alpha", "seed",
                                               "warm_start"};

std::vector<std::string> with_step_columns(std::initializer_list<const char*> more) {
    std::vector<std::string> cols = kStepColumns;
    for (const char* c : more) cols.emplace_back(c);
    return cols;
}

}  // namespace

int cmd_solve(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
              std::ostream& err) {
    if (cfg.schedule.steps.size() != 1)
        throw ConfigError(
            "solve: the schedule must contain exactly one step (use converge, perturb, or "
            "regularize for ladders)");
    const ScheduleStep st = cfg.schedule.steps.front();
    stamp(err, "solve: assembling the perturbed penalty problem");

    PenaltyProblem problem;
    problem.space = cfg.space;
    problem.set = st.sigma > 0.0 ? inflate(cfg.space, cfg.set, st.sigma, InflateMode::outward)
                                 : cfg.set;
    if (st.h > 0.0) {
        OperatorPerturbation pert = cfg.op_pert;
        pert.h = st.h;
        problem.op = perturb_operator(cfg.space, cfg.op, pert);
    } else {
        problem.op = cfg.op;
    }
    if (st.omega > 0.0) {
        RhsPerturbation pert = cfg.rhs_pert;
        pert.omega = st.omega;
        problem.rhs = perturb_rhs(cfg.space, cfg.rhs, pert);
    } else {
        problem.rhs = cfg.rhs;
    }
    problem.epsilon = st.epsilon;
    problem.alpha = st.alpha;
    problem.validate();

    SolveOptions sopts = cfg.solve;
    if (!sopts.init) {
        Rng rng = Rng(cfg.init_seed).fork(0);
        sopts.init = sample_in_set(cfg.space, problem.set, rng);
    }
    const SolveReport rep = solve_penalty(problem, sopts);
    stamp(err, "solve: finished in " + std::to_string(rep.iterations) + " iterations");

    std::vector<std::string> cols = with_step_columns(
        {"residual", "iterations", "newton_steps", "backbone_steps", "penalty_gap",
         "certificate_slack", "certificate_pass", "converged"});
    for (std::size_t i = 0; i < rep.x.size(); ++i) cols.push_back("x" + std::to_string(i));

    RowWriter w(out, opts.format, std::move(cols));
    std::vector<Cell> cells = step_cells(st, static_cast<long long>(cfg.solve.seed),
                                         cfg.schedule.warm_start);
    cells.push_back(num(rep.residual));
    cells.push_back(whole(rep.iterations));
    cells.push_back(whole(rep.newton_steps));
    cells.push_back(whole(rep.backbone_steps));
    cells.push_back(num(rep.penalty_gap));
    cells.push_back(num(rep.certificate.slack));
    cells.push_back(flag(rep.certificate.pass));
    cells.push_back(flag(rep.converged));
    for (std::size_t i = 0; i < rep.x.size(); ++i) cells.push_back(num(rep.x[i]));
    w.row(cells);

    return (rep.converged && rep.certificate.pass) ? 0 : 1;
}

int cmd_converge(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
                 std::ostream& err) {
    if (cfg.schedule.coupling != CouplingRule::exact)
        throw ConfigError("converge: the schedule coupling must be 'exact'");
    ScheduleInputs in = make_inputs(cfg);
    in.threads = opts.threads;
    stamp(err, "converge: reference solve and " + std::to_string(cfg.schedule.steps.size()) +
                   "-rung ladder");
    const ScheduleResult res = run_schedule(in, cfg.schedule);

    RowWriter w(out, opts.format,
                with_step_columns(
                    {"error", "penalty_gap", "gap_over_eps", "residual", "converged"}));
    std::vector<std::pair<double, double>> gap_pairs;
    for (std::size_t k = 0; k < res.records.size(); ++k) {
        const StepRecord& rec = res.records[k];
        std::vector<Cell> cells = step_cells(
            rec.step, static_cast<long long>(cfg.solve.seed + k), res.warm_start);
        cells.push_back(num(rec.error));
        cells.push_back(num(rec.report.penalty_gap));
        cells.push_back(num(rec.gap_over_eps));
        cells.push_back(num(rec.report.residual));
        cells.push_back(flag(rec.report.converged));
        w.row(cells);
        gap_pairs.emplace_back(rec.step.epsilon, rec.report.penalty_gap);
    }
    reference_meta(w, res.reference);
    flags_meta(w, res);

    int exit_code = res.aborted ? 1 : 0;
    try {
        const RateFit fit = fit_rate(gap_pairs);
        const bool zero = fit.kind == RateFit::Kind::exact_zero;
        w.meta("rate_fit", {{"fit", text(zero ? "exact_zero" : "fitted")},
                            {"slope", num(fit.slope)},
                            {"intercept", num(fit.intercept)},
                            {"r2", num(fit.r_squared)},
                            {"n", whole(fit.n)},
                            {"min_slope", num(cfg.min_slope)},
                            {"min_r2", num(cfg.min_r2)}});
        if (!zero && !(fit.slope >= cfg.min_slope && fit.r_squared >= cfg.min_r2)) exit_code = 1;
    } catch (const std::invalid_argument& e) {
        w.meta("rate_fit", {{"fit", text("degenerate")}, {"detail", text(e.what())}});
        exit_code = 1;
    }
    stamp(err, "converge: done");
    return exit_code;
}

int cmd_perturb(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
                std::ostream& err) {
    if (cfg.schedule.coupling != CouplingRule::theorem2)
        throw ConfigError("perturb: the schedule coupling must be 'theorem2'");
    stamp(err, "perturb: building modulus profiles");
    const ModulusProfile primal = build_modulus_profile(cfg.space, cfg.modulus);
    const ModulusProfile dual = build_modulus_profile(cfg.space.dual(), cfg.modulus);

    ScheduleInputs in = make_inputs(cfg);
    in.primal = &primal;
    in.dual = &dual;
    in.threads = opts.threads;
    stamp(err, "perturb: reference solve and " + std::to_string(cfg.schedule.steps.size()) +
                   "-rung ladder");
    const ScheduleResult res = run_schedule(in, cfg.schedule);

    RowWriter w(out, opts.format,
                with_step_columns({"error", "penalty_gap", "residual", "converged", "sigma_used",
                                   "coupling_set", "coupling_saturated", "two_set_lhs",
                                   "two_set_rhs", "two_set_slack", "two_set_vacuous"}));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < res.records.size(); ++k) {
        const StepRecord& rec = res.records[k];
        std::vector<Cell> cells = step_cells(
            rec.step, static_cast<long long>(cfg.solve.seed + k), res.warm_start);
        cells.push_back(num(rec.error));
        cells.push_back(num(rec.report.penalty_gap));
        cells.push_back(num(rec.report.residual));
        cells.push_back(flag(rec.report.converged));
        cells.push_back(num(rec.sigma_used));
        cells.push_back(num(rec.coupling_set));
        cells.push_back(flag(rec.coupling_saturated));
        if (rec.two_set) {
            cells.push_back(num(rec.two_set->lhs));
            cells.push_back(num(rec.two_set->rhs));
            cells.push_back(num(rec.two_set->slack));
            cells.push_back(flag(rec.two_set->vacuous));
        } else {
            cells.push_back(num(nan));
            cells.push_back(num(nan));
            cells.push_back(num(nan));
            cells.push_back(flag(false));
        }
        w.row(cells);
    }
    reference_meta(w, res.reference);
    flags_meta(w, res);
    stamp(err, "perturb: done");

    const bool failed =
        res.aborted || res.stagnation || !res.errors_decreasing || res.bound_violation;
    return failed ? 1 : 0;
}

int cmd_regularize(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
                   std::ostream& err) {
    if (cfg.schedule.coupling != CouplingRule::theorem3_regularized)
        throw ConfigError("regularize: the schedule coupling must be 'theorem3_regularized'");
    bool needs_profiles = cfg.audit_two_set;
    for (const ScheduleStep& st : cfg.schedule.steps)
        if (st.sigma > 0.0) needs_profiles = true;
    std::optional<ModulusProfile> primal, dual;
    ScheduleInputs in = make_inputs(cfg);
    in.threads = opts.threads;
    if (needs_profiles) {
        stamp(err, "regularize: building modulus profiles");
        primal = build_modulus_profile(cfg.space, cfg.modulus);
        dual = build_modulus_profile(cfg.space.dual(), cfg.modulus);
        in.primal = &*primal;
        in.dual = &*dual;
    }
    stamp(err, "regularize: reference solve and " + std::to_string(cfg.schedule.steps.size()) +
                   "-rung ladder");
    const ScheduleResult res = run_schedule(in, cfg.schedule);

    std::vector<std::string> cols = {"alpha", "epsilon", "sigma", "h", "omega", "seed",
                                     "warm_start"};
    for (const char* c : {"coupling_data", "coupling_set_reg", "error", "displacement", "settle",
                          "residual", "converged"})
        cols.emplace_back(c);
    RowWriter w(out, opts.format, std::move(cols));

    const Vector* final_x = res.records.empty() ? nullptr : &res.records.back().report.x;
    for (std::size_t k = 0; k < res.records.size(); ++k) {
        const StepRecord& rec = res.records[k];
        double settle = std::numeric_limits<double>::quiet_NaN();
        if (final_x && rec.report.x.size() == final_x->size()) {
            Vector d = rec.report.x;
            d -= *final_x;
            settle = norm(cfg.space, d);
        }
        std::vector<Cell> cells = {num(rec.step.alpha),
                                   num(rec.step.epsilon),
                                   num(rec.step.sigma),
                                   num(rec.step.h),
                                   num(rec.step.omega),
                                   whole(static_cast<long long>(cfg.solve.seed + k)),
                                   flag(res.warm_start),
                                   num(rec.coupling_data),
                                   num(rec.coupling_set_reg),
                                   num(rec.error),
                                   num(rec.displacement),
                                   num(settle),
                                   num(rec.report.residual),
                                   flag(rec.report.converged)};
        w.row(cells);
    }
    reference_meta(w, res.reference);
    flags_meta(w, res);
    stamp(err, "regularize: done");

    const bool failed = res.aborted || !res.errors_decreasing || res.stagnation;
    return failed ? 1 : 0;
}

namespace {

struct AuditFrame {
    Vector center;
    std::vector<double> halfwidth;
    Box region;
    double max_halfwidth = 1.0;
};

AuditFrame make_audit_frame(const SpaceSpec& s, const ConvexSet& set, double radius) {
    const std::size_t n = static_cast<std::size_t>(s.dim);
    AuditFrame frame;
    frame.center = Vector(n);
    frame.halfwidth.assign(n, std::max(1.0, radius));
    if (const auto bb = bounding_box(s, set)) {
        for (std::size_t i = 0; i < n; ++i) {
            frame.center[i] = 0.5 * (bb->lower[i] + bb->upper[i]);
            frame.halfwidth[i] = 0.5 * (bb->upper[i] - bb->lower[i]);
        }
    } else {
        frame.center = project(s, set, Vector(n));
    }
    Vector lo(n), hi(n);
    frame.max_halfwidth = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double span = 2.0 * (frame.halfwidth[i] + 1.0);
        lo[i] = frame.center[i] - span;
        hi[i] = frame.center[i] + span;
        frame.max_halfwidth = std::max(frame.max_halfwidth, frame.halfwidth[i]);
    }
    frame.region = Box{lo, hi};
    return frame;
}

}  // namespace

int cmd_audit(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
              std::ostream& err) {
    const SpaceSpec& s = cfg.space;
    const AuditFrame frame = make_audit_frame(s, cfg.set, cfg.audit.radius);
    const int pairs = cfg.audit.pairs;
    const std::uint64_t seed = cfg.audit.seed;

    RowWriter w(out, opts.format, {"suite", "pass", "worst_slack", "detail"});
    bool all_pass = true;
    const auto emit = [&](const char* suite, bool pass, double worst, const std::string& detail) {
        w.row({text(suite), flag(pass), num(worst), text(detail)});
        all_pass = all_pass && pass;
    };

    {
        stamp(err, "audit: projection certificate");
        Rng rng = Rng(seed).fork(1);
        const int points = 8;
        const int samples = std::max(50, pairs / points);
        double worst = std::numeric_limits<double>::infinity();
        double worst_support = std::numeric_limits<double>::infinity();
        double worst_drift = 0.0;
        for (int t = 0; t < points; ++t) {
            Vector x(frame.center.size());
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] = frame.center[i] + (frame.halfwidth[i] + 1.0) * rng.normal();
            const Vector xbar = project(s, cfg.set, x);
            const CertificateReport rep =
                check_projection_certificate(s, cfg.set, x, xbar, samples, seed + 100 + t);
            worst = std::min(worst, rep.min_slack);
            worst_support = std::min(worst_support, rep.min_support_slack);
            worst_drift = std::max(worst_drift, rep.max_identity_drift);
        }
        const bool pass = worst >= -1e-7 && worst_support >= -1e-7 && worst_drift <= 1e-6;
        emit("projection-certificate", pass, std::min(worst, worst_support),
             "support=" + format_short(worst_support) + " drift=" + format_short(worst_drift) +
                 " points=" + std::to_string(points));
    }

    stamp(err, "audit: building modulus profiles");
    const ModulusProfile primal = build_modulus_profile(s, cfg.modulus);
    const ModulusProfile dual = build_modulus_profile(s.dual(), cfg.modulus);

    {
        stamp(err, "audit: duality-map estimates");
        const JEstimateReport rep = check_J_estimates(primal, dual, cfg.audit.radius, pairs,
                                                      seed + 11);
        const double worst = std::min({rep.worst_upper, rep.worst_pairing, rep.worst_pairing_alt,
                                       rep.worst_lower});
        emit("j-estimates", rep.pass(1e-6), worst,
             "upper=" + format_short(rep.worst_upper) + " pairing=" +
                 format_short(rep.worst_pairing) + " pairing_alt=" +
                 format_short(rep.worst_pairing_alt) + " lower=" + format_short(rep.worst_lower) +
                 " saturated=" + std::to_string(rep.upper_saturated) + "/" +
                 std::to_string(rep.pairs));
    }

    {
        stamp(err, "audit: coercivity bound");
        const Vector x0 = project(s, cfg.set, frame.center);
        const double r0 = std::max(1.0, frame.max_halfwidth);
        const CoercivityReport rep =
            check_lemma2_bound(s, cfg.op, cfg.rhs, x0, r0, pairs, seed + 22, frame.region);
        emit("coercivity", rep.pass(1e-8), rep.worst_slack,
             "c0=" + format_short(rep.c0) + " r0=" + format_short(r0) + " samples=" +
                 std::to_string(rep.samples));
    }

    {
        stamp(err, "audit: projection stability");
        const double sigma = 0.005 * std::max(1.0, frame.max_halfwidth);
        const ConvexSet grown = inflate(s, cfg.set, sigma, InflateMode::outward);
        Rng rng = Rng(seed).fork(4);
        const int points = 16;
        int vacuous = 0;
        double worst = std::numeric_limits<double>::infinity();
        for (int t = 0; t < points; ++t) {
            Vector x(frame.center.size());
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] = frame.center[i] + 0.5 * (frame.halfwidth[i] + 1.0) * rng.normal();
            const StabilityReport rep =
                check_projection_stability(s, primal, cfg.set, grown, x, sigma);
            if (rep.vacuous) ++vacuous;
            worst = std::min(worst, rep.slack);
        }
        emit("projection-stability", worst >= -1e-8, worst,
             "sigma=" + format_short(sigma) + " vacuous=" + std::to_string(vacuous) + "/" +
                 std::to_string(points));
    }

    {
        stamp(err, "audit: monotonicity");
        const MonotonicityReport rep = check_monotonicity(cfg.op, pairs, seed + 33, frame.region);
        double worst = rep.worst_pairing;
        bool pass = rep.pass(1e-10);
        std::string detail = "pairs=" + std::to_string(rep.pairs);
        if (cfg.op.modulus) {
            const UniformMonotonicityReport urep = check_uniform_monotonicity(
                s, cfg.op, *cfg.op.modulus, pairs, seed + 44, frame.region);
            worst = std::min(worst, urep.worst_slack);
            pass = pass && urep.pass(1e-8);
            detail += " uniform_slack=" + format_short(urep.worst_slack);
        }
        emit("monotonicity", pass, worst, detail);
    }

    stamp(err, "audit: done");
    return all_pass ? 0 : 1;
}

}  // namespace pvi
