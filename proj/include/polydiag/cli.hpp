#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace polydiag {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitNonConvergence = 2,
};

/// Fully resolved settings of one run; echoed to manifest.json.
struct RunConfig {
    std::string command;  // fit | compare | diagnose | simulate
    std::string data;
    bool grouped = false;
    std::vector<std::string> formulas;
    std::vector<std::string> categories;
    std::vector<std::string> factors;
    std::optional<std::string> reference;
    std::vector<std::string> aggregate_by;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> diagnostics;
    int simulations = 99;
    double level = 95.0;
    unsigned threads = 1;
    std::string mahalanobis_mode = "drop_reference";
    std::string fitted_axis;  // empty: chosen from the data structure
    std::vector<std::string> formats{"json", "csv"};
    std::string out = "polydiag_out";
    // simulate
    std::string scenario_config;
    std::optional<int> scenario;
    std::optional<int> replicates;
    bool resume = false;
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Executes a resolved configuration; messages go to `out`/`err`.
int execute(RunConfig config, std::ostream& out, std::ostream& err);

/// Parses command-line arguments (without the program name) and runs them.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace polydiag
