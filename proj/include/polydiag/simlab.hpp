#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "polydiag/dataset.hpp"
#include "polydiag/envelope.hpp"
#include "polydiag/plot.hpp"

namespace polydiag {

/// Model 1: one standard normal covariate. Model 2: adds a balanced 0/1 factor.
enum class SimModel { model1, model2 };

const char* to_string(SimModel m);
SimModel parse_sim_model(const std::string& text);

/// The two predictors fitted to every simulated dataset.
enum class FittedPredictor { null_model, correct };

const char* to_string(FittedPredictor f);

struct ScenarioSpec {
    /// Preset id 1..6, or 0 for a custom combination.
    int id = 0;
    SimModel model = SimModel::model1;
    Structure structure = Structure::individual;
    int categories = 3;
    int subjects = 50;
    /// Trials per subject; grouped structure only.
    int group_size = 10;
    int replicates = 1000;
    std::uint64_t seed = 1;
    Diagnostic diagnostic = Diagnostic::quantile_residual;
    /// Envelope settings for distance diagnostics.
    int simulations = 99;
    double level = 95.0;
    unsigned threads = 1;
    /// Overrides the built-in true parameters when non-empty. Ordered as
    /// (intercepts 2..J, x1 slopes 2..J[, x2 slopes 2..J]).
    std::vector<double> theta;

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// Preset scenarios: 1/2 model 1/2 individual with Shapiro-Wilk, 3/4 the
/// same grouped, 5/6 model 1 grouped with Euclidean/Mahalanobis envelopes.
ScenarioSpec scenario_preset(int id);

/// Throws ValidationError when the spec is outside the supported grid.
void validate(const ScenarioSpec& spec);

/// Built-in true parameters in the ordering of ScenarioSpec::theta.
std::vector<double> default_theta(SimModel model, int categories);

/// spec.theta, or the built-in values when empty.
std::vector<double> resolved_theta(const ScenarioSpec& spec);

/// Category probabilities for covariates (x1, x2) with category "1" as baseline.
std::vector<double> true_probabilities(const ScenarioSpec& spec, double x1, double x2 = 0.0);

/// Simulated dataset for one replicate; a pure function of (spec, replicate).
/// Covariates are x1 (continuous) and, for model 2, x2 (factor "0"/"1").
PolytomousDataset generate_dataset(const ScenarioSpec& spec, int replicate);

/// "y ~ 1" and "y ~ x1" or "y ~ x1 + x2".
ModelFormula fitted_formula(const ScenarioSpec& spec, FittedPredictor fitted);

struct ReplicateRecord {
    int replicate = 0;
    FittedPredictor fitted = FittedPredictor::null_model;
    bool ok = false;
    /// Shapiro-Wilk W, or the number of points outside the envelope.
    double statistic = 0.0;
    /// Shapiro-Wilk p-value, or the percentage of points outside.
    double value = 0.0;
    int iterations = 0;
    std::string error;

    friend bool operator==(const ReplicateRecord&, const ReplicateRecord&) = default;
};

/// Both fits and their diagnostic for one replicate.
std::vector<ReplicateRecord> run_replicate(const ScenarioSpec& spec, int replicate);

struct CellSummary {
    FittedPredictor fitted = FittedPredictor::null_model;
    std::size_t completed = 0;
    std::size_t excluded = 0;
    /// Fraction of Shapiro-Wilk p-values below 0.05; NaN for envelope runs.
    double rejection_rate = 0.0;
    /// Counts of p-values in 20 equal bins on [0, 1] (Shapiro-Wilk runs).
    std::vector<double> p_histogram;
    /// Five-number summary of the per-replicate values.
    std::optional<BoxSummary> box;
    double median = 0.0;
};

struct ScenarioSummary {
    ScenarioSpec spec;
    std::vector<ReplicateRecord> records;  // sorted by (replicate, fitted)
    CellSummary null_cell;
    CellSummary correct_cell;
};

struct RunHooks {
    /// Records of a previous partial run; their replicates are not recomputed.
    std::vector<ReplicateRecord> resume;
    /// Called with all records so far after each chunk of replicates.
    std::function<void(const std::vector<ReplicateRecord>&)> checkpoint;
    int chunk = 50;
};

ScenarioSummary run_scenario(const ScenarioSpec& spec, const RunHooks& hooks = {});

/// Aggregates records into a summary (also used after resuming).
ScenarioSummary summarize(const ScenarioSpec& spec, std::vector<ReplicateRecord> records);

/// P-value histograms for Shapiro-Wilk runs; a percent-outside boxplot for
/// envelope runs.
std::vector<PlotData> summarize_to_plots(const ScenarioSummary& summary);

/// Boxplot of percent-outside across several envelope summaries, one box per
/// (J, N, fitted predictor) cell.
PlotData grid_boxplot(const std::vector<ScenarioSummary>& summaries, const std::string& title);

/// Parses `key = value` lines ('#' starts a comment). Comma-separated values
/// for J, N, m or diagnostic expand into the grid of their combinations.
std::vector<ScenarioSpec> parse_scenario_config(std::istream& in);
std::vector<ScenarioSpec> load_scenario_config(const std::string& path);

/// Replicate rows as CSV, header included, in record order.
void write_replicate_csv(std::ostream& out, const ScenarioSpec& spec,
                         const std::vector<ReplicateRecord>& records);

/// Records from a CSV written by write_replicate_csv; rows must match `spec`.
std::vector<ReplicateRecord> read_replicate_csv(std::istream& in, const ScenarioSpec& spec);

nlohmann::json to_json(const ScenarioSpec& spec);
nlohmann::json to_json(const ScenarioSummary& summary);

/// Short identifier such as "s1_model1_individual_J3_N50".
std::string cell_name(const ScenarioSpec& spec);

}  // namespace polydiag
