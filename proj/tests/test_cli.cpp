#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "pvi/cli.hpp"
#include "pvi/config.hpp"

namespace {

using pvi::run_cli;

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliRun r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::filesystem::path scratch_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "pvi-cli-tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
    const auto path = scratch_dir() / name;
    std::ofstream f(path);
    f << text;
    f.close();
    return path.string();
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

std::vector<nlohmann::json> parse_jsonl(const std::string& text) {
    std::vector<nlohmann::json> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
    return rows;
}

const char* kSolveConfig = R"({
  "name": "cli-solve-smoke",
  "space": {"dim": 2, "p": 2.0},
  "operator": {"name": "diag_power", "power": 2.0},
  "set": {"kind": "box", "lower": [-1.0, -1.0], "upper": [1.0, 1.0]},
  "rhs": {"from_roots": [1.5, 0.5]},
  "schedule": {"coupling": "exact", "steps": [{"epsilon": 1e-2}]},
  "solver": {"tolerance": 1e-10}
})";

const char* kPerturbConfig = R"({
  "name": "cli-perturb-smoke",
  "space": {"dim": 2, "p": 2.0},
  "operator": {"name": "diag_power", "power": 2.0},
  "set": {"kind": "box", "lower": [-1.0, -1.0], "upper": [1.0, 1.0]},
  "rhs": {"from_roots": [1.5, 0.5]},
  "schedule": {
    "coupling": "theorem2",
    "steps": [{"epsilon": 1e-1, "sigma": 1e-3}, {"epsilon": 1e-2, "sigma": 1e-6}]
  },
  "solver": {"tolerance": 1e-10}
})";

const char* kAuditConfig = R"({
  "name": "cli-audit-smoke",
  "space": {"dim": 2, "p": 2.0},
  "operator": {"name": "diag_power", "power": 2.0},
  "set": {"kind": "box", "lower": [-1.0, -1.0], "upper": [1.0, 1.0]},
  "rhs": {"from_roots": [1.5, 0.5]},
  "schedule": {"coupling": "exact", "steps": [{"epsilon": 1e-2}]},
  "audit": {"pairs": 100, "seed": 9, "radius": 2.0}
})";

}  // namespace

TEST_CASE("cli: usage and configuration errors exit with code 2") {
    SUBCASE("no subcommand") {
        const CliRun r = cli({});
        CHECK(r.code == 2);
        CHECK(r.err.find("usage error") != std::string::npos);
    }
    SUBCASE("missing required --config") {
        const CliRun r = cli({"solve"});
        CHECK(r.code == 2);
        CHECK(r.err.find("usage error") != std::string::npos);
    }
    SUBCASE("unknown embedded config lists the available names") {
        const CliRun r = cli({"solve", "--config", "no-such-config"});
        CHECK(r.code == 2);
        CHECK(r.err.find("no-such-config") != std::string::npos);
        CHECK(r.err.find("paper-testbed") != std::string::npos);
        CHECK(r.err.find("flat-regularized") != std::string::npos);
    }
    SUBCASE("malformed JSON reports the line") {
        const std::string path = write_file("broken.json", "{ \"space\": [1,");
        const CliRun r = cli({"solve", "--config", path});
        CHECK(r.code == 2);
        CHECK(r.err.find("parse error") != std::string::npos);
        CHECK(r.err.find("line") != std::string::npos);
    }
    SUBCASE("unknown keys carry their dotted path") {
        std::string text(kSolveConfig);
        text.replace(text.find("\"dim\": 2"), 8, "\"dim\": 2, \"extra\": 1");
        const std::string path = write_file("unknown-key.json", text);
        const CliRun r = cli({"solve", "--config", path});
        CHECK(r.code == 2);
        CHECK(r.err.find("space.extra") != std::string::npos);
        CHECK(r.err.find("unknown key") != std::string::npos);
    }
    SUBCASE("solve refuses a multi-step schedule") {
        const CliRun r = cli({"solve", "--config", "paper-testbed-p2"});
        CHECK(r.code == 2);
        CHECK(r.err.find("exactly one step") != std::string::npos);
    }
}

TEST_CASE("cli: help prints the subcommands and exits cleanly") {
    const CliRun r = cli({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("solve") != std::string::npos);
    CHECK(r.out.find("converge") != std::string::npos);
    CHECK(r.out.find("audit") != std::string::npos);
}

TEST_CASE("cli: solve emits one row and maps convergence to the exit code") {
    const std::string path = write_file("solve.json", kSolveConfig);
    const CliRun r = cli({"solve", "--config", path, "--format", "jsonl"});
    CHECK(r.code == 0);
    const auto rows = parse_jsonl(r.out);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["converged"].get<bool>());
    CHECK(rows[0]["certificate_pass"].get<bool>());
    CHECK(rows[0]["epsilon"].get<double>() == 1e-2);
    CHECK(rows[0]["x0"].get<double>() > 1.0);
    CHECK(rows[0]["x1"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));

    SUBCASE("an exhausted iteration budget becomes exit code 1") {
        std::string text(kSolveConfig);
        text.replace(text.find("\"tolerance\": 1e-10"), 18,
                     "\"tolerance\": 1e-14, \"max_iterations\": 2");
        const std::string bad = write_file("solve-budget.json", text);
        const CliRun f = cli({"solve", "--config", bad, "--format", "jsonl"});
        CHECK(f.code == 1);
        const auto frows = parse_jsonl(f.out);
        REQUIRE(frows.size() == 1);
        CHECK_FALSE(frows[0]["converged"].get<bool>());
    }
}

TEST_CASE("cli: --seed overrides the recorded solver seed") {
    const std::string path = write_file("solve-seed.json", kSolveConfig);
    const CliRun base = cli({"solve", "--config", path, "--format", "jsonl"});
    const CliRun moved = cli({"solve", "--config", path, "--format", "jsonl", "--seed", "12345"});
    REQUIRE(base.code == 0);
    REQUIRE(moved.code == 0);
    const auto brows = parse_jsonl(base.out);
    const auto mrows = parse_jsonl(moved.out);
    CHECK(brows[0]["seed"].get<long long>() == 7);
    CHECK(mrows[0]["seed"].get<long long>() == 12345);
}

TEST_CASE("cli: --out writes exactly the rows the stream would carry") {
    const std::string cfg = write_file("solve-out.json", kSolveConfig);
    const std::string out_path = (scratch_dir() / "rows.jsonl").string();
    const CliRun direct = cli({"solve", "--config", cfg, "--format", "jsonl"});
    const CliRun filed = cli({"solve", "--config", cfg, "--format", "jsonl", "--out", out_path});
    REQUIRE(direct.code == 0);
    REQUIRE(filed.code == 0);
    CHECK(filed.out.empty());
    CHECK(read_file(out_path) == direct.out);
}

TEST_CASE("cli: embedded configs mirror the shipped files") {
    for (const std::string& name : pvi::builtin_config_names()) {
        CAPTURE(name);
        const std::string file_path = "configs/" + name + ".json";
        REQUIRE(std::filesystem::exists(file_path));
        const auto embedded = nlohmann::json::parse(pvi::builtin_config_text(name));
        const auto shipped = nlohmann::json::parse(read_file(file_path));
        CHECK(embedded == shipped);
    }
}

TEST_CASE("cli: converge on the p = 2 testbed reproduces the pinned ladder") {
    const CliRun r = cli({"converge", "--config", "paper-testbed-p2", "--format", "jsonl"});
    REQUIRE(r.code == 0);
    const auto rows = parse_jsonl(r.out);

    std::vector<double> gaps;
    std::vector<nlohmann::json> meta;
    for (const auto& row : rows) {
        if (row.contains("kind"))
            meta.push_back(row);
        else
            gaps.push_back(row["penalty_gap"].get<double>());
    }
    const std::vector<double> expected = {0.2469341285195934, 0.029351678363416907,
                                          0.0029883300512055441, 0.00029937124847850258};
    REQUIRE(gaps.size() == expected.size());
    for (std::size_t k = 0; k < gaps.size(); ++k)
        CHECK(gaps[k] == doctest::Approx(expected[k]).epsilon(1e-12));

    bool saw_reference = false, saw_flags = false, saw_fit = false;
    for (const auto& m : meta) {
        const std::string kind = m["kind"].get<std::string>();
        if (kind == "reference") {
            saw_reference = true;
            CHECK(m["converged"].get<bool>());
        } else if (kind == "schedule_flags") {
            saw_flags = true;
            CHECK_FALSE(m["aborted"].get<bool>());
            CHECK(m["errors_decreasing"].get<bool>());
        } else if (kind == "rate_fit") {
            saw_fit = true;
            CHECK(m["slope"].get<double>() == doctest::Approx(0.9741317464528364).epsilon(1e-12));
            CHECK(m["r2"].get<double>() == doctest::Approx(0.9996712176156145).epsilon(1e-12));
        }
    }
    CHECK(saw_reference);
    CHECK(saw_flags);
    CHECK(saw_fit);

    SUBCASE("a second run is byte-identical") {
        const CliRun again = cli({"converge", "--config", "paper-testbed-p2", "--format",
                                  "jsonl"});
        CHECK(again.code == 0);
        CHECK(again.out == r.out);
        CHECK_FALSE(r.out.empty());
    }
}

TEST_CASE("cli: perturb audits the set ladder") {
    const std::string path = write_file("perturb.json", kPerturbConfig);
    const CliRun r = cli({"perturb", "--config", path, "--format", "jsonl"});
    REQUIRE(r.code == 0);
    const auto rows = parse_jsonl(r.out);
    std::vector<nlohmann::json> data;
    for (const auto& row : rows)
        if (!row.contains("kind")) data.push_back(row);
    REQUIRE(data.size() == 2);
    CHECK(data[0]["sigma_used"].get<double>() == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(data[1]["sigma_used"].get<double>() == doctest::Approx(1e-6).epsilon(1e-12));
    CHECK(data[0]["error"].get<double>() > data[1]["error"].get<double>());
    CHECK(data[0]["coupling_set"].get<double>() > 0.0);
    CHECK(data[0]["converged"].get<bool>());
    CHECK(data[1]["converged"].get<bool>());
}

TEST_CASE("cli: audit runs every suite green on a round geometry") {
    const std::string path = write_file("audit.json", kAuditConfig);
    const CliRun r = cli({"audit", "--config", path, "--format", "jsonl"});
    REQUIRE(r.code == 0);
    const auto rows = parse_jsonl(r.out);
    int suites = 0;
    for (const auto& row : rows) {
        if (row.contains("kind")) continue;
        ++suites;
        const std::string suite = row["suite"].get<std::string>();
        CAPTURE(suite);
        CHECK(row["pass"].get<bool>());
    }
    CHECK(suites >= 3);
}
