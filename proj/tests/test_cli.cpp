#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "support.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("secmkt_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// Runs the CLI inside `dir`; returns its exit status.
int run(const fs::path& dir, const std::string& args, const std::string& env = "") {
    const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" + SECMKT_CLI + "' " + args + " >log.txt 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string toy() { return "--case '" + testing::data_file("toy3.json").string() + "'"; }

}  // namespace

TEST_CASE("exit codes") {
    const auto dir = scratch("exit");
    CHECK(run(dir, "--help") == 0);
    CHECK(run(dir, "--version") == 0);
    CHECK(run(dir, "") == 2);
    CHECK(run(dir, "solve " + toy() + " --model nope") == 2);
    CHECK(run(dir, "solve --case missing.json") == 2);
    CHECK(run(dir, "solve " + toy() + " --gap 2") == 2);
    std::ofstream(dir / "bad.json") << "{not json";
    CHECK(run(dir, "solve --case bad.json") == 1);
    CHECK(run(dir, "solve " + toy(), "SECMKT_SOLVER=bogus") == 1);
    CHECK(run(dir, "solve " + toy(), "SECMKT_SOLVER=highs") == 0);
}

TEST_CASE("every command writes its outputs") {
    const auto dir = scratch("outputs");
    struct Expect {
        std::string args;
        std::vector<std::string> files;
    };
    const std::vector<Expect> cases{
        {"solve " + toy() + " --model prxy --out solve", {"schedule.csv", "costs.csv", "model_stats.csv"}},
        {"omc " + toy() + " --model prxy --out omc", {"omc.csv", "schedule_corrected.csv"}},
        {"omc " + toy() + " --schedule solve/schedule.csv --out omc2", {"omc.csv", "schedule_corrected.csv"}},
        {"price " + toy() + " --out price", {"prices.csv", "price_components.csv"}},
        {"settle " + toy() + " --out settle", {"settlement.csv"}},
        {"settle " + toy() + " --model lodf --corrected --no-dual-check --out settle2", {"settlement.csv"}},
        {"ca " + toy() + " --objective base --out ca", {"violations.csv", "realized.csv"}},
        {"ca " + toy() + " --schedule solve/schedule.csv --out ca2", {"violations.csv", "realized.csv"}},
        {"export-mps " + toy() + " --model lodf --out mps", {"model.mps", "model_stats.csv"}},
        {"study pricing " + toy() + " --out sp", {"final_costs.csv", "prices.csv", "settlements.csv"}},
        {"study realized " + toy() + " --out sr", {"realized_costs.csv"}},
        {"study perturb " + toy() + " --pool 2 --cases 20 --sigma 0,0.2 --gap 0.05 --out pp",
         {"perturbation.csv", "pairs.csv", "pool_members.csv"}},
    };
    for (const auto& c : cases) {
        CAPTURE(c.args);
        REQUIRE(run(dir, c.args) == 0);
        const auto out = dir / c.args.substr(c.args.rfind(' ') + 1);
        for (const auto& f : c.files) CHECK(fs::exists(out / f));
        const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
        CHECK(manifest.contains("command"));
        CHECK(manifest.contains("rerun_config"));
        CHECK(manifest["solver"] == "highs");
        for (const auto& f : manifest["outputs"]) CHECK(fs::exists(out / f.get<std::string>()));
    }
    std::ifstream table(dir / "pp" / "perturbation.csv");
    std::string line;
    int rows = 0;
    while (std::getline(table, line)) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("runs are reproducible and a config file is equivalent to flags") {
    const auto dir = scratch("repro");
    REQUIRE(run(dir, "solve " + toy() + " --out a") == 0);
    REQUIRE(run(dir, "solve " + toy() + " --out b") == 0);
    std::ofstream(dir / "run.toml") << "[solve]\ncase=\"" << testing::data_file("toy3.json").string()
                                    << "\"\nout=\"c\"\n";
    REQUIRE(run(dir, "--config run.toml solve") == 0);
    for (const char* f : {"schedule.csv", "costs.csv", "model_stats.csv"}) {
        CAPTURE(f);
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
        CHECK(slurp(dir / "a" / f) == slurp(dir / "c" / f));
    }
}
