#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polydiag/cli.hpp"

using namespace polydiag;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Result r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "polydiag_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string data(const std::string& name) { return std::string(POLYDIAG_DATA_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::map<std::string, std::string> files_in(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        out[e.path().filename().string()] = slurp(e.path());
    }
    return out;
}

}  // namespace

TEST_CASE("fit reports the wine AIC") {
    const auto dir = scratch("fit");
    const auto r = run({"fit", "--data", data("wine.csv"), "--formula", "cultivar ~ magnesium + phenols", "--out",
                        dir.string()});
    CHECK(r.code == kExitOk);
    const auto j = read_json(dir / "fit.json");
    CHECK(j["schema_version"] == 1);
    CHECK(std::fabs(j["aic"].get<double>() - 261.50) < 0.005);
    CHECK(fs::exists(dir / "coefficients.csv"));
    CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("grouped fit reports the student AIC") {
    const auto dir = scratch("fit_grouped");
    const auto r = run({"fit", "--data", data("student_grouped.csv"), "--grouped", "--formula", "prog ~ math",
                        "--out", dir.string()});
    CHECK(r.code == kExitOk);
    const auto j = read_json(dir / "fit.json");
    CHECK(std::fabs(j["aic"].get<double>() - 182.81) < 0.005);
    CHECK(r.out.find("kernel AIC") != std::string::npos);
}

TEST_CASE("malformed formula exits 1 with the parser position") {
    const auto dir = scratch("bad_formula");
    const auto r = run({"fit", "--data", data("wine.csv"), "--formula", "cultivar ~ magnesium +", "--out",
                        dir.string()});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("position") != std::string::npos);
}

TEST_CASE("usage and validation errors exit 1") {
    const auto dir = scratch("usage");
    CHECK(run({"fit"}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"fit", "--data", (dir / "missing.csv").string(), "--formula", "y ~ 1", "--out", dir.string()}).code ==
          kExitUsage);
    const auto single = run({"compare", "--data", data("wine.csv"), "--formula", "cultivar ~ phenols", "--out",
                             dir.string()});
    CHECK(single.code == kExitUsage);
    CHECK(single.err.find("at least two") != std::string::npos);
    CHECK(run({"diagnose", "--data", data("wine.csv"), "--formula", "cultivar ~ phenols", "--seed", "1",
               "--diagnostic", "euclidean", "--out", dir.string()})
              .code == kExitUsage);
}

TEST_CASE("numerical failure exits 2") {
    const auto dir = scratch("numerical");
    const auto csv = dir / "collinear.csv";
    {
        std::ofstream f(csv);
        f << "y,a,b\n";
        for (int i = 0; i < 30; ++i) f << (i % 3) << ',' << i << ',' << 2 * i << '\n';
    }
    const auto r = run({"fit", "--data", csv.string(), "--formula", "y ~ a + b", "--out", (dir / "o").string()});
    CHECK(r.code == kExitNonConvergence);
}

TEST_CASE("compare produces the wine LR table") {
    const auto dir = scratch("compare");
    const auto r = run({"compare", "--data", data("wine.csv"), "--formula", "cultivar ~ 1", "--formula",
                        "cultivar ~ phenols", "--formula", "cultivar ~ magnesium + phenols", "--formula",
                        "cultivar ~ magnesium * phenols", "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    const auto j = read_json(dir / "compare.json");
    const std::vector<double> expected{123.98, 13.14, 1.25};
    REQUIRE(j["tests"].size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::fabs(j["tests"][k]["lr"].get<double>() - expected[k]) < 0.05);
        CHECK(j["tests"][k]["df"] == 2);
    }
    CHECK(fs::exists(dir / "compare.csv"));
}

TEST_CASE("diagnose writes residuals, plots and a verdict") {
    const auto dir = scratch("diagnose");
    const auto r = run({"diagnose", "--data", data("student_grouped.csv"), "--grouped", "--formula", "prog ~ math",
                        "--seed", "3", "--sims", "39", "--format", "json", "--format", "csv", "--format", "svg",
                        "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    const auto j = read_json(dir / "diagnose.json");
    CHECK(j["schema_version"] == 1);
    CHECK(j.contains("shapiro_wilk"));
    CHECK(j["envelopes"].size() == 3);
    CHECK(fs::exists(dir / "residuals.csv"));
    CHECK(fs::exists(dir / "histogram_quantile_residuals.svg"));
    CHECK(fs::exists(dir / "halfnormal_mahalanobis.json"));
}

TEST_CASE("diagnose prints and records a generated seed") {
    const auto dir = scratch("generated_seed");
    const auto r = run({"diagnose", "--data", data("wine.csv"), "--formula", "cultivar ~ magnesium + phenols",
                        "--sims", "19", "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("generated") != std::string::npos);
    const auto manifest = read_json(dir / "manifest.json");
    REQUIRE(!manifest["seed"].is_null());
    CHECK(r.out.find(std::to_string(manifest["seed"].get<std::uint64_t>())) != std::string::npos);
}

TEST_CASE("replaying a manifest reproduces every output byte for byte") {
    const auto first = scratch("replay_a");
    const auto second = scratch("replay_b");
    REQUIRE(run({"diagnose", "--data", data("student_grouped.csv"), "--grouped", "--formula", "prog ~ math",
                 "--seed", "11", "--sims", "19", "--threads", "2", "--format", "json", "--format", "csv",
                 "--format", "svg", "--out", first.string()})
                .code == kExitOk);
    REQUIRE(run({"replay", "--manifest", (first / "manifest.json").string(), "--out", second.string()}).code ==
            kExitOk);
    auto a = files_in(first);
    auto b = files_in(second);
    auto ma = nlohmann::json::parse(a["manifest.json"]);
    auto mb = nlohmann::json::parse(b["manifest.json"]);
    ma.erase("out");
    mb.erase("out");
    CHECK(ma == mb);
    a.erase("manifest.json");
    b.erase("manifest.json");
    CHECK(a.size() > 5);
    CHECK(a == b);
}

TEST_CASE("simulate is reproducible and rejects J = 6") {
    const auto dir = scratch("simulate");
    const auto cfg = dir / "grid.conf";
    {
        std::ofstream f(cfg);
        f << "scenario = 1\nR = 6\nseed = 5\n";
    }
    const auto a = run({"simulate", "--config", cfg.string(), "--out", (dir / "a").string()});
    REQUIRE(a.code == kExitOk);
    const auto b = run({"simulate", "--config", cfg.string(), "--threads", "2", "--out", (dir / "b").string()});
    REQUIRE(b.code == kExitOk);
    const std::string name = "s1_model1_individual_J3_N50";
    CHECK(slurp(dir / "a" / (name + "_replicates.csv")) == slurp(dir / "b" / (name + "_replicates.csv")));
    CHECK(slurp(dir / "a" / (name + "_summary.json")) == slurp(dir / "b" / (name + "_summary.json")));
    CHECK(fs::exists(dir / "a" / "simulate_summary.json"));

    const auto bad = dir / "bad.conf";
    {
        std::ofstream f(bad);
        f << "scenario = 1\nJ = 6\n";
    }
    const auto r = run({"simulate", "--config", bad.string(), "--out", (dir / "c").string()});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("J must be 3, 4 or 5") != std::string::npos);
}

TEST_CASE("simulate resumes from its replicate CSV") {
    const auto dir = scratch("resume");
    const auto full = run({"simulate", "--scenario", "1", "--replicates", "8", "--seed", "3", "--out",
                           (dir / "full").string()});
    REQUIRE(full.code == kExitOk);
    const std::string name = "s1_model1_individual_J3_N50_replicates.csv";
    const auto complete = slurp(dir / "full" / name);

    // Keep the header and the first three replicates (two rows each).
    fs::create_directories(dir / "part");
    {
        std::istringstream in(complete);
        std::ofstream f(dir / "part" / name);
        std::string line;
        for (int k = 0; k < 7 && std::getline(in, line); ++k) f << line << '\n';
    }
    const auto resumed = run({"simulate", "--scenario", "1", "--replicates", "8", "--seed", "3", "--resume",
                              "--out", (dir / "part").string()});
    REQUIRE(resumed.code == kExitOk);
    CHECK(resumed.out.find("resuming with 3") != std::string::npos);
    CHECK(slurp(dir / "part" / name) == complete);
}

TEST_CASE("the installed binary maps exit codes") {
    const std::string bin = POLYDIAG_CLI_PATH;
    const auto dir = scratch("binary");
    const std::string ok = bin + " fit --data " + data("wine.csv") +
                           " --formula 'cultivar ~ phenols' --out " + dir.string() + " > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(ok.c_str())) == 0);
    const std::string bad = bin + " fit --data " + data("wine.csv") + " --formula 'cultivar ~ (' --out " +
                            dir.string() + " > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(bad.c_str())) == 1);
}
