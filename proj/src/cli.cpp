// Argument parsing and exit-code mapping around the experiment commands.

#include "pvi/cli.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "CLI11.hpp"

#include "pvi/config.hpp"
#include "pvi/experiment.hpp"

namespace pvi {

namespace {

using CommandFn = int (*)(const ExperimentConfig&, const CommandOptions&, std::ostream&,
                          std::ostream&);

struct CommonArgs {
    std::string config;
    std::string out_path;
    std::string format;
    std::uint64_t seed = 0;
    int threads = 1;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config,
                    "Config file path, or the name of an embedded config")
        ->required();
    sub->add_option("--out", args.out_path, "Write rows to this file instead of stdout");
    sub->add_option("--format", args.format, "Row format")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    sub->add_option("--seed", args.seed, "Override both the solver seed and the init seed");
    sub->add_option("--threads", args.threads,
                    "Solve rungs in parallel (cold-start schedules only)")
        ->check(CLI::PositiveNumber);
}

int dispatch(const CLI::App* sub, const CommonArgs& args, CommandFn command, std::ostream& out,
             std::ostream& err) {
    ExperimentConfig cfg = load_config(args.config);
    if (sub->count("--seed") > 0) {
        cfg.solve.seed = args.seed;
        cfg.init_seed = args.seed;
    }
    CommandOptions opts;
    opts.format = args.format.empty() ? cfg.output.format : args.format;
    opts.threads = args.threads;
    const std::string path = !args.out_path.empty() ? args.out_path : cfg.output.path;
    if (path.empty()) return command(cfg, opts, out, err);
    std::ofstream file(path);
    if (!file) throw ConfigError(path + ": cannot open for writing");
    const int code = command(cfg, opts, file, err);
    file.flush();
    if (!file) throw std::runtime_error(path + ": write failed");
    return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Penalty-method experiments for variational inequalities in weighted lp spaces"};
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        const char* description;
        CommandFn command;
        CLI::App* sub = nullptr;
        CommonArgs args;
    };
    std::array<Entry, 5> entries{{
        {"solve", "One penalty solve of a single-step schedule", &cmd_solve, nullptr, {}},
        {"converge", "Exact-data ladder with a penalty-gap rate fit", &cmd_converge, nullptr, {}},
        {"perturb", "Set-perturbation ladder with proximity-bound audits", &cmd_perturb, nullptr,
         {}},
        {"regularize", "Regularized ladder under data perturbations", &cmd_regularize, nullptr,
         {}},
        {"audit", "Estimate and inequality audit suites", &cmd_audit, nullptr, {}},
    }};
    for (Entry& entry : entries) {
        entry.sub = app.add_subcommand(entry.name, entry.description);
        add_common(entry.sub, entry.args);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        for (const Entry& entry : entries)
            if (entry.sub->parsed()) return dispatch(entry.sub, entry.args, entry.command, out, err);
        err << "usage error: no subcommand given\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace pvi
