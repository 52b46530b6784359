// Strict JSON configuration parsing and the embedded named testbeds.

#include "pvi/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"

namespace pvi {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ConfigError(path + ": " + message);
}

// Wraps the domain types' std::invalid_argument into a path-carrying error.
template <class F>
auto guarded(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& item : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(),
                         [&](const char* k) { return item.key() == k; }))
            fail(path + "." + item.key(), "unknown key");
    }
}

const json* maybe(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number_at(const json& obj, const std::string& path, const char* key) {
    const json* v = maybe(obj, key);
    if (!v) fail(path, std::string("missing required key '") + key + "'");
    if (!v->is_number()) fail(path + "." + key, "expected a number");
    return v->get<double>();
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
    return maybe(obj, key) ? number_at(obj, path, key) : fallback;
}

int int_at(const json& obj, const std::string& path, const char* key, int fallback) {
    const json* v = maybe(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(path + "." + key, "expected an integer");
    return v->get<int>();
}

std::uint64_t seed_at(const json& obj, const std::string& path, const char* key,
                      std::uint64_t fallback) {
    const json* v = maybe(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer() || v->get<double>() < 0)
        fail(path + "." + key, "expected a nonnegative integer");
    return v->get<std::uint64_t>();
}

bool bool_at(const json& obj, const std::string& path, const char* key, bool fallback) {
    const json* v = maybe(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(path + "." + key, "expected a boolean");
    return v->get<bool>();
}

std::string string_at(const json& obj, const std::string& path, const char* key,
                      const std::string& fallback) {
    const json* v = maybe(obj, key);
    if (!v) return fallback;
    if (!v->is_string()) fail(path + "." + key, "expected a string");
    return v->get<std::string>();
}

std::vector<double> numbers_at(const json& obj, const std::string& path, const char* key) {
    const json* v = maybe(obj, key);
    if (!v) fail(path, std::string("missing required key '") + key + "'");
    if (!v->is_array()) fail(path + "." + key, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v->size());
    for (const json& item : *v) {
        if (!item.is_number()) fail(path + "." + key, "expected an array of numbers");
        out.push_back(item.get<double>());
    }
    return out;
}

std::vector<double> sized_numbers_at(const json& obj, const std::string& path, const char* key,
                                     int dim) {
    std::vector<double> out = numbers_at(obj, path, key);
    if (static_cast<int>(out.size()) != dim)
        fail(path + "." + key, "expected " + std::to_string(dim) + " entries, got " +
                                   std::to_string(out.size()));
    return out;
}

SpaceSpec parse_space(const json& obj, const std::string& path) {
    check_keys(obj, path, {"dim", "p", "weights"});
    SpaceSpec s;
    s.dim = int_at(obj, path, "dim", 0);
    s.p = number_at(obj, path, "p");
    if (maybe(obj, "weights")) s.weights = numbers_at(obj, path, "weights");
    guarded(path, [&] { s.validate(); });
    return s;
}

ConvexSet parse_set(const json& obj, const std::string& path, const SpaceSpec& space) {
    check_keys(obj, path, {"kind", "lower", "upper", "center", "radius", "normal", "offset"});
    const std::string kind = string_at(obj, path, "kind", "");
    if (kind == "box") {
        Vector lower(sized_numbers_at(obj, path, "lower", space.dim));
        Vector upper(sized_numbers_at(obj, path, "upper", space.dim));
        return guarded(path, [&] { return ConvexSet::box(lower, upper); });
    }
    if (kind == "ball") {
        Vector center(sized_numbers_at(obj, path, "center", space.dim));
        const double radius = number_at(obj, path, "radius");
        return guarded(path, [&] { return ConvexSet::ball(center, radius); });
    }
    if (kind == "halfspace") {
        DualVector normal(sized_numbers_at(obj, path, "normal", space.dim));
        const double offset = number_at(obj, path, "offset");
        return guarded(path, [&] { return ConvexSet::halfspace(normal, offset); });
    }
    fail(path + ".kind", "expected one of box | ball | halfspace");
}

DualVector parse_rhs(const json& obj, const std::string& path, const SpaceSpec& space,
                     const MonotoneOp& op) {
    check_keys(obj, path, {"values", "from_roots"});
    const bool has_values = maybe(obj, "values") != nullptr;
    const bool has_roots = maybe(obj, "from_roots") != nullptr;
    if (has_values == has_roots)
        fail(path, "exactly one of 'values' or 'from_roots' is required");
    if (has_values) return DualVector(sized_numbers_at(obj, path, "values", space.dim));
    Vector roots(sized_numbers_at(obj, path, "from_roots", space.dim));
    return guarded(path, [&] { return op(roots); });
}

Schedule parse_schedule(const json& obj, const std::string& path) {
    check_keys(obj, path, {"coupling", "warm_start", "steps"});
    Schedule sched;
    const std::string coupling = string_at(obj, path, "coupling", "exact");
    if (coupling == "exact")
        sched.coupling = CouplingRule::exact;
    else if (coupling == "theorem2")
        sched.coupling = CouplingRule::theorem2;
    else if (coupling == "theorem3_regularized")
        sched.coupling = CouplingRule::theorem3_regularized;
    else
        fail(path + ".coupling", "expected one of exact | theorem2 | theorem3_regularized");
    sched.warm_start = bool_at(obj, path, "warm_start", true);
    const json* steps = maybe(obj, "steps");
    if (!steps || !steps->is_array() || steps->empty())
        fail(path + ".steps", "expected a non-empty array of steps");
    int index = 0;
    for (const json& st : *steps) {
        const std::string spath = path + ".steps[" + std::to_string(index++) + "]";
        check_keys(st, spath, {"epsilon", "sigma", "h", "omega", "alpha"});
        ScheduleStep step;
        step.epsilon = number_at(st, spath, "epsilon");
        step.sigma = number_or(st, spath, "sigma", 0.0);
        step.h = number_or(st, spath, "h", 0.0);
        step.omega = number_or(st, spath, "omega", 0.0);
        step.alpha = number_or(st, spath, "alpha", 0.0);
        if (!(step.epsilon > 0.0)) fail(spath + ".epsilon", "must be > 0");
        if (step.sigma < 0.0 || step.h < 0.0 || step.omega < 0.0 || step.alpha < 0.0)
            fail(spath, "perturbation levels must be >= 0");
        sched.steps.push_back(step);
    }
    return sched;
}

void parse_perturbations(const json& obj, const std::string& path, const SpaceSpec& space,
                         ExperimentConfig& cfg) {
    check_keys(obj, path, {"operator", "rhs", "two_set_audit"});
    if (const json* op = maybe(obj, "operator")) {
        const std::string opath = path + ".operator";
        check_keys(*op, opath,
                   {"mode", "gamma_const", "gamma_slope", "seed", "safe_scale", "direction"});
        const std::string mode = string_at(*op, opath, "mode", "monotone_safe");
        if (mode == "constant_direction")
            cfg.op_pert.mode = OperatorPerturbation::Mode::constant_direction;
        else if (mode == "sinusoid_field")
            cfg.op_pert.mode = OperatorPerturbation::Mode::sinusoid_field;
        else if (mode == "monotone_safe")
            cfg.op_pert.mode = OperatorPerturbation::Mode::monotone_safe;
        else
            fail(opath + ".mode",
                 "expected one of constant_direction | sinusoid_field | monotone_safe");
        cfg.op_pert.gamma_const = number_or(*op, opath, "gamma_const", 1.0);
        cfg.op_pert.gamma_slope = number_or(*op, opath, "gamma_slope", 0.0);
        cfg.op_pert.seed = seed_at(*op, opath, "seed", 0);
        cfg.op_pert.safe_scale = number_or(*op, opath, "safe_scale", 1.0);
        if (maybe(*op, "direction"))
            cfg.op_pert.direction =
                DualVector(sized_numbers_at(*op, opath, "direction", space.dim));
        guarded(opath, [&] { cfg.op_pert.validate(); });
    }
    if (const json* r = maybe(obj, "rhs")) {
        const std::string rpath = path + ".rhs";
        check_keys(*r, rpath, {"direction"});
        if (maybe(*r, "direction"))
            cfg.rhs_pert.direction = DualVector(sized_numbers_at(*r, rpath, "direction", space.dim));
    }
    cfg.audit_two_set = bool_at(obj, path, "two_set_audit", false);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t stop = std::min<std::size_t>(text.size(), e.byte);
        const auto line =
            1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(stop), '\n');
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + e.what());
    }
    check_keys(root, origin,
               {"name", "space", "operator", "set", "rhs", "schedule", "perturbations", "solver",
                "reference", "rate", "modulus", "audit", "output"});

    ExperimentConfig cfg;
    cfg.name = string_at(root, origin, "name", "");

    const json* space = maybe(root, "space");
    if (!space) fail(origin, "missing required key 'space'");
    cfg.space = parse_space(*space, origin + ".space");

    const json* op = maybe(root, "operator");
    if (!op) fail(origin, "missing required key 'operator'");
    const std::string opath = origin + ".operator";
    check_keys(*op, opath, {"name", "power", "values"});
    cfg.operator_name = string_at(*op, opath, "name", "");
    cfg.operator_params.power = number_or(*op, opath, "power", 2.0);
    if (maybe(*op, "values"))
        cfg.operator_params.values = sized_numbers_at(*op, opath, "values", cfg.space.dim);
    cfg.op = guarded(opath, [&] {
        return make_operator(cfg.space, cfg.operator_name, cfg.operator_params);
    });

    const json* set = maybe(root, "set");
    if (!set) fail(origin, "missing required key 'set'");
    cfg.set = parse_set(*set, origin + ".set", cfg.space);

    const json* rhs = maybe(root, "rhs");
    if (!rhs) fail(origin, "missing required key 'rhs'");
    cfg.rhs = parse_rhs(*rhs, origin + ".rhs", cfg.space, cfg.op);

    const json* schedule = maybe(root, "schedule");
    if (!schedule) fail(origin, "missing required key 'schedule'");
    cfg.schedule = parse_schedule(*schedule, origin + ".schedule");

    cfg.rhs_pert.direction = DualVector(std::vector<double>(
        static_cast<std::size_t>(cfg.space.dim), 1.0));
    if (const json* pert = maybe(root, "perturbations"))
        parse_perturbations(*pert, origin + ".perturbations", cfg.space, cfg);

    if (const json* solver = maybe(root, "solver")) {
        const std::string spath = origin + ".solver";
        check_keys(*solver, spath,
                   {"tolerance", "max_iterations", "certificate_samples", "seed",
                    "working_margin", "init", "init_seed"});
        cfg.solve.tol = number_or(*solver, spath, "tolerance", cfg.solve.tol);
        cfg.solve.max_iter = int_at(*solver, spath, "max_iterations", cfg.solve.max_iter);
        cfg.solve.certificate_samples =
            int_at(*solver, spath, "certificate_samples", cfg.solve.certificate_samples);
        cfg.solve.seed = seed_at(*solver, spath, "seed", cfg.solve.seed);
        cfg.solve.working_margin =
            number_or(*solver, spath, "working_margin", cfg.solve.working_margin);
        if (maybe(*solver, "init"))
            cfg.solve.init = Vector(sized_numbers_at(*solver, spath, "init", cfg.space.dim));
        cfg.init_seed = seed_at(*solver, spath, "init_seed", cfg.init_seed);
        if (!(cfg.solve.tol > 0.0)) fail(spath + ".tolerance", "must be > 0");
        if (cfg.solve.max_iter < 1) fail(spath + ".max_iterations", "must be >= 1");
        if (cfg.solve.certificate_samples < 1) fail(spath + ".certificate_samples", "must be >= 1");
        if (!(cfg.solve.working_margin >= 1.0)) fail(spath + ".working_margin", "must be >= 1");
    }

    if (const json* ref = maybe(root, "reference")) {
        const std::string rpath = origin + ".reference";
        check_keys(*ref, rpath, {"tolerance", "max_iterations", "certificate_samples", "seed"});
        cfg.reference.tol = number_or(*ref, rpath, "tolerance", cfg.reference.tol);
        cfg.reference.max_iter = int_at(*ref, rpath, "max_iterations", cfg.reference.max_iter);
        cfg.reference.certificate_samples =
            int_at(*ref, rpath, "certificate_samples", cfg.reference.certificate_samples);
        cfg.reference.seed = seed_at(*ref, rpath, "seed", cfg.reference.seed);
        if (!(cfg.reference.tol > 0.0)) fail(rpath + ".tolerance", "must be > 0");
        if (cfg.reference.max_iter < 1) fail(rpath + ".max_iterations", "must be >= 1");
    }

    if (const json* rate = maybe(root, "rate")) {
        const std::string rpath = origin + ".rate";
        check_keys(*rate, rpath, {"min_slope", "min_r2"});
        cfg.min_slope = number_or(*rate, rpath, "min_slope", cfg.min_slope);
        cfg.min_r2 = number_or(*rate, rpath, "min_r2", cfg.min_r2);
        if (!(cfg.min_r2 >= 0.0 && cfg.min_r2 <= 1.0)) fail(rpath + ".min_r2", "must be in [0, 1]");
    }

    if (const json* mod = maybe(root, "modulus")) {
        const std::string mpath = origin + ".modulus";
        check_keys(*mod, mpath,
                   {"grid_points", "chord_samples", "descent_rounds", "rho_samples", "tau_max",
                    "seed", "force_numeric"});
        cfg.modulus.grid_points = int_at(*mod, mpath, "grid_points", cfg.modulus.grid_points);
        cfg.modulus.chord_samples = int_at(*mod, mpath, "chord_samples", cfg.modulus.chord_samples);
        cfg.modulus.descent_rounds =
            int_at(*mod, mpath, "descent_rounds", cfg.modulus.descent_rounds);
        cfg.modulus.rho_samples = int_at(*mod, mpath, "rho_samples", cfg.modulus.rho_samples);
        cfg.modulus.tau_max = number_or(*mod, mpath, "tau_max", cfg.modulus.tau_max);
        cfg.modulus.seed = seed_at(*mod, mpath, "seed", cfg.modulus.seed);
        cfg.modulus.force_numeric = bool_at(*mod, mpath, "force_numeric", false);
        if (cfg.modulus.grid_points < 8) fail(mpath + ".grid_points", "must be >= 8");
    }

    if (const json* audit = maybe(root, "audit")) {
        const std::string apath = origin + ".audit";
        check_keys(*audit, apath, {"pairs", "seed", "radius"});
        cfg.audit.pairs = int_at(*audit, apath, "pairs", cfg.audit.pairs);
        cfg.audit.seed = seed_at(*audit, apath, "seed", cfg.audit.seed);
        cfg.audit.radius = number_or(*audit, apath, "radius", cfg.audit.radius);
        if (cfg.audit.pairs < 1) fail(apath + ".pairs", "must be >= 1");
        if (!(cfg.audit.radius > 0.0)) fail(apath + ".radius", "must be > 0");
    }

    if (const json* output = maybe(root, "output")) {
        const std::string opath2 = origin + ".output";
        check_keys(*output, opath2, {"path", "format"});
        cfg.output.path = string_at(*output, opath2, "path", "");
        cfg.output.format = string_at(*output, opath2, "format", "csv");
        if (cfg.output.format != "csv" && cfg.output.format != "jsonl")
            fail(opath2 + ".format", "expected csv | jsonl");
    }

    if (static_cast<int>(cfg.rhs_pert.direction.size()) != cfg.space.dim)
        fail(origin + ".perturbations.rhs.direction", "dimension mismatch");
    return cfg;
}

namespace {

constexpr const char* kPaperTestbed = R"json({
  "name": "paper-testbed",
  "space": { "dim": 5, "p": 3.0 },
  "operator": { "name": "diag_power", "power": 2.0 },
  "set": {
    "kind": "box",
    "lower": [-1.0, -1.0, -1.0, -1.0, -1.0],
    "upper": [1.0, 1.0, 1.0, 1.0, 1.0]
  },
  "rhs": { "from_roots": [1.5, 1.7, 1.3, 1.6, 1.4] },
  "schedule": {
    "coupling": "exact",
    "warm_start": true,
    "steps": [
      { "epsilon": 1e-1 },
      { "epsilon": 1e-2 },
      { "epsilon": 1e-3 },
      { "epsilon": 1e-4 }
    ]
  },
  "solver": {
    "tolerance": 1e-11,
    "max_iterations": 200000,
    "certificate_samples": 1000,
    "seed": 7,
    "init_seed": 2718
  },
  "reference": {
    "tolerance": 1e-10,
    "max_iterations": 200000,
    "certificate_samples": 1000,
    "seed": 11
  },
  "rate": { "min_slope": 0.9, "min_r2": 0.95 },
  "audit": { "pairs": 1000, "seed": 99, "radius": 2.0 },
  "output": { "format": "csv" }
})json";

constexpr const char* kPaperTestbedP2 = R"json({
  "name": "paper-testbed-p2",
  "space": { "dim": 5, "p": 2.0 },
  "operator": { "name": "diag_power", "power": 2.0 },
  "set": {
    "kind": "box",
    "lower": [-1.0, -1.0, -1.0, -1.0, -1.0],
    "upper": [1.0, 1.0, 1.0, 1.0, 1.0]
  },
  "rhs": { "from_roots": [1.5, 1.7, 1.3, 1.6, 1.4] },
  "schedule": {
    "coupling": "exact",
    "warm_start": true,
    "steps": [
      { "epsilon": 1e-1 },
      { "epsilon": 1e-2 },
      { "epsilon": 1e-3 },
      { "epsilon": 1e-4 }
    ]
  },
  "solver": {
    "tolerance": 1e-11,
    "max_iterations": 200000,
    "certificate_samples": 1000,
    "seed": 7,
    "init_seed": 2718
  },
  "reference": {
    "tolerance": 1e-10,
    "max_iterations": 200000,
    "certificate_samples": 1000,
    "seed": 11
  },
  "rate": { "min_slope": 0.9, "min_r2": 0.95 },
  "audit": { "pairs": 1000, "seed": 99, "radius": 2.0 },
  "output": { "format": "csv" }
})json";

constexpr const char* kFlatRegularized = R"json({
  "name": "flat-regularized",
  "space": { "dim": 3, "p": 2.0 },
  "operator": { "name": "flat_first", "power": 2.0 },
  "set": {
    "kind": "box",
    "lower": [-1.0, -1.0, -1.0],
    "upper": [1.0, 1.0, 1.0]
  },
  "rhs": { "from_roots": [0.5, 1.5, 1.7] },
  "schedule": {
    "coupling": "theorem3_regularized",
    "warm_start": false,
    "steps": [
      { "epsilon": 1e-3, "alpha": 0.31622776601683794, "h": 0.1, "omega": 0.1 },
      { "epsilon": 1e-4, "alpha": 0.1, "h": 0.01, "omega": 0.01 },
      { "epsilon": 1e-5, "alpha": 0.031622776601683791, "h": 0.001, "omega": 0.001 },
      { "epsilon": 1e-6, "alpha": 0.01, "h": 0.0001, "omega": 0.0001 }
    ]
  },
  "perturbations": {
    "operator": {
      "mode": "monotone_safe",
      "gamma_const": 1.0,
      "gamma_slope": 0.0,
      "safe_scale": 3.0
    },
    "rhs": { "direction": [1.0, 1.0, 1.0] }
  },
  "solver": {
    "tolerance": 1e-9,
    "max_iterations": 200000,
    "certificate_samples": 1000,
    "seed": 7,
    "init_seed": 2718
  },
  "reference": {
    "tolerance": 1e-10,
    "max_iterations": 200000,
    "certificate_samples": 1000,
    "seed": 11
  },
  "rate": { "min_slope": 0.9, "min_r2": 0.95 },
  "audit": { "pairs": 1000, "seed": 99, "radius": 2.0 },
  "output": { "format": "csv" }
})json";

const std::vector<std::pair<std::string, const char*>>& builtin_table() {
    static const std::vector<std::pair<std::string, const char*>> table = {
        {"paper-testbed", kPaperTestbed},
        {"paper-testbed-p2", kPaperTestbedP2},
        {"flat-regularized", kFlatRegularized},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& builtin_config_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, text] : builtin_table()) out.push_back(name);
        return out;
    }();
    return names;
}

std::string builtin_config_text(const std::string& name) {
    for (const auto& [key, text] : builtin_table())
        if (key == name) return text;
    std::string known;
    for (const std::string& k : builtin_config_names()) {
        if (!known.empty()) known += ", ";
        known += k;
    }
    throw ConfigError("no config file or embedded config named '" + name + "' (embedded: " +
                      known + ")");
}

ExperimentConfig load_config(const std::string& path_or_name) {
    std::error_code ec;
    if (std::filesystem::exists(path_or_name, ec)) {
        std::ifstream in(path_or_name);
        if (!in) throw ConfigError(path_or_name + ": cannot open for reading");
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return parse_config_text(buffer.str(), path_or_name);
    }
    return parse_config_text(builtin_config_text(path_or_name), path_or_name);
}

}  // namespace pvi
