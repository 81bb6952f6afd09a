#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace {

namespace fs = std::filesystem;

const std::string kCli = SIQRLAB_CLI_PATH;
const fs::path kScenarios = SIQRLAB_SCENARIO_DIR;

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "siqrlab_test_cli";
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string command = kCli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

std::vector<std::vector<std::string>> parse_csv(const fs::path& path) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(path));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("analyze") {
    const fs::path out = work_dir() / "analyze";

    SUBCASE("endemic fixture exits cleanly with the expected report") {
        REQUIRE(run_cli("analyze --scenario " + (kScenarios / "figure5.json").string() +
                        " --out " + out.string()) == 0);
        const auto doc = nlohmann::json::parse(slurp(out / "report.json"));
        CHECK(std::abs(doc["r0"].get<double>() - 1.7857) < 1e-4);
        CHECK(doc["endemic"]["exists"].get<bool>());
        CHECK(doc["controllability"]["rank"].get<int>() == 4);
    }

    SUBCASE("subthreshold fixture reports no endemic point") {
        REQUIRE(run_cli("analyze --scenario " + (kScenarios / "figure4.json").string() +
                        " --out " + out.string()) == 0);
        const auto doc = nlohmann::json::parse(slurp(out / "report.json"));
        CHECK(std::abs(doc["r0"].get<double>() - 0.7143) < 1e-4);
        CHECK_FALSE(doc["endemic"]["exists"].get<bool>());
    }

    SUBCASE("overrides reshape the run") {
        REQUIRE(run_cli("analyze --scenario " + (kScenarios / "figure5.json").string() +
                        " --out " + out.string() + " --set alpha=0.08") == 0);
        const auto doc = nlohmann::json::parse(slurp(out / "report.json"));
        CHECK(std::abs(doc["r0"].get<double>() - 0.7143) < 1e-4);
    }

    SUBCASE("unknown override keys are config errors") {
        CHECK(run_cli("analyze --scenario " + (kScenarios / "figure5.json").string() +
                      " --out " + out.string() + " --set aplha=0.08") == 1);
    }

    SUBCASE("malformed scenarios are config errors") {
        const fs::path bad = work_dir() / "bad.json";
        spit(bad, "{ not json");
        CHECK(run_cli("analyze --scenario " + bad.string() + " --out " + out.string()) == 1);
    }

    SUBCASE("missing scenario files are io errors") {
        CHECK(run_cli("analyze --scenario " + (work_dir() / "missing.json").string() +
                      " --out " + out.string()) == 2);
    }
}

TEST_CASE("simulate") {
    const fs::path out_a = work_dir() / "sim_a";
    const fs::path out_b = work_dir() / "sim_b";

    REQUIRE(run_cli("simulate --scenario " + (kScenarios / "figure9.json").string() +
                    " --out " + out_a.string()) == 0);
    REQUIRE(run_cli("simulate --scenario " + (kScenarios / "figure9.json").string() +
                    " --out " + out_b.string()) == 0);

    CHECK(fs::exists(out_a / "trajectory.csv"));
    CHECK(fs::exists(out_a / "trajectory.svg"));
    CHECK(slurp(out_a / "trajectory.csv") == slurp(out_b / "trajectory.csv"));
    CHECK(slurp(out_a / "trajectory.svg") == slurp(out_b / "trajectory.svg"));

    const auto rows = parse_csv(out_a / "trajectory.csv");
    REQUIRE(rows.size() >= 2);
    CHECK(rows.front() ==
          std::vector<std::string>{"t", "S", "I", "Q", "R", "N", "u1", "u2", "J_cum"});
    CHECK(rows.size() == 3002);  // header + 3001 samples at h = 0.01 over [0, 30]
}

TEST_CASE("controllability") {
    const fs::path out = work_dir() / "ctrb";
    REQUIRE(run_cli("controllability --scenario " + (kScenarios / "figure5.json").string() +
                    " --out " + out.string()) == 0);
    const auto doc = nlohmann::json::parse(slurp(out / "controllability.json"));
    CHECK(doc["rank"].get<int>() == 4);
    CHECK(doc["controllable"].get<bool>());
    CHECK(doc["controllability_matrix"].size() == 4);
    CHECK(doc["controllability_matrix"][0].size() == 8);
}

TEST_CASE("lqr") {
    const fs::path out = work_dir() / "lqr";

    SUBCASE("the controlled fixture produces a converged synthesis") {
        REQUIRE(run_cli("lqr --scenario " + (kScenarios / "figure10.json").string() + " --out " +
                        out.string()) == 0);
        const auto doc = nlohmann::json::parse(slurp(out / "riccati.json"));
        CHECK(doc["converged"].get<bool>());
        CHECK(doc["final_are_residual"].get<double>() <= 1e-6);
        for (const auto& eig : doc["closed_loop_eigenvalues"]) {
            CHECK(eig[0].get<double>() < 0.0);
        }
        CHECK(doc["cost"].get<double>() > 0.0);
        CHECK(fs::exists(out / "trajectory.csv"));
    }

    SUBCASE("an uncontrolled scenario is a config error for lqr") {
        CHECK(run_cli("lqr --scenario " + (kScenarios / "figure5.json").string() + " --out " +
                      out.string()) == 1);
    }

    SUBCASE("a riccati horizon shorter than the run is a coverage error") {
        const fs::path short_grid = work_dir() / "short_grid.json";
        std::string text = slurp(kScenarios / "figure10.json");
        const size_t at = text.find("\"riccati_horizon\": 180.0");
        REQUIRE(at != std::string::npos);
        text.replace(at, std::string("\"riccati_horizon\": 180.0").size(),
                     "\"riccati_horizon\": 10.0");
        spit(short_grid, text);
        CHECK(run_cli("lqr --scenario " + short_grid.string() + " --out " + out.string()) == 4);
    }
}

TEST_CASE("sweep") {
    const fs::path out = work_dir() / "sweep";
    const std::string base = (kScenarios / "figure5.json").string();

    SUBCASE("vaccination sweep reproduces the reported thresholds") {
        // horizon shortened; the sweep output r0 column does not depend on it
        REQUIRE(run_cli("sweep --scenario " + base + " --out " + out.string() +
                        " --key v --values 0,0.05 --set horizon=50") == 0);
        const auto rows = parse_csv(out / "sweep.csv");
        REQUIRE(rows.size() == 3);
        CHECK(rows[0] == std::vector<std::string>{"value", "r0", "S", "I", "Q", "R"});
        CHECK(std::abs(std::stod(rows[1][1]) - 6.25) < 1e-4);
        CHECK(std::abs(std::stod(rows[2][1]) - 1.7857) < 1e-4);
    }

    SUBCASE("quarantine-free point") {
        REQUIRE(run_cli("sweep --scenario " + base + " --out " + out.string() +
                        " --key eta --values 0 --set horizon=50") == 0);
        const auto rows = parse_csv(out / "sweep.csv");
        REQUIRE(rows.size() == 2);
        CHECK(std::abs(std::stod(rows[1][1]) - 4.7619) < 1e-4);
    }

    SUBCASE("an empty value list yields a header-only table") {
        REQUIRE(run_cli("sweep --scenario " + base + " --out " + out.string() +
                        " --key v --values \"\" --set horizon=50") == 0);
        const auto rows = parse_csv(out / "sweep.csv");
        CHECK(rows.size() == 1);
    }

    SUBCASE("unsupported sweep keys are config errors") {
        CHECK(run_cli("sweep --scenario " + base + " --out " + out.string() +
                      " --key mu --values 0.02") == 1);
    }

    SUBCASE("sweep output is deterministic") {
        const fs::path again = work_dir() / "sweep_again";
        REQUIRE(run_cli("sweep --scenario " + base + " --out " + out.string() +
                        " --key v --values 0,0.05 --set horizon=50") == 0);
        REQUIRE(run_cli("sweep --scenario " + base + " --out " + again.string() +
                        " --key v --values 0,0.05 --set horizon=50") == 0);
        CHECK(slurp(out / "sweep.csv") == slurp(again / "sweep.csv"));
    }
}
