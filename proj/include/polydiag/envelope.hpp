#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polydiag/dataset.hpp"
#include "polydiag/fit.hpp"
#include "polydiag/residuals.hpp"

namespace polydiag {

/// Scalar per-subject quantity shown on a half-normal plot.
enum class Diagnostic {
    quantile_residual,  // standardized randomized quantile residual r^S
    euclidean,          // grouped only
    mahalanobis,        // grouped only
    pearson,            // every Pearson component, flattened subject-major
};

const char* to_string(Diagnostic d);
Diagnostic parse_diagnostic(const std::string& text);

/// Values of `diagnostic` for a fit. `residual_seed` drives the quantile
/// residual randomization. Throws ValidationError when the diagnostic does
/// not apply to the data structure.
Eigen::VectorXd diagnostic_values(Diagnostic diagnostic, const FittedModel& model,
                                  const PolytomousDataset& data, std::uint64_t residual_seed,
                                  MahalanobisMode mode = MahalanobisMode::drop_reference);

struct EnvelopeOptions {
    int simulations = 99;
    double level = 95.0;
    std::uint64_t seed = 0;
    /// Seed of the observed quantile residuals; defaults to `seed`.
    std::optional<std::uint64_t> residual_seed;
    unsigned threads = 1;
    /// Attempts per replicate before giving up (10 x S overall).
    int max_attempts = 10;
    MahalanobisMode mode = MahalanobisMode::drop_reference;
    FitOptions fit;
};

struct EnvelopeResult {
    Diagnostic diagnostic = Diagnostic::quantile_residual;
    std::vector<double> observed;  // sorted absolute values
    std::vector<double> expected;  // half-normal scores
    std::vector<double> lower;
    std::vector<double> median;
    std::vector<double> upper;
    double level = 95.0;
    int simulations = 0;
    std::size_t points_outside = 0;
    double percent_outside = 0.0;
    std::uint64_t seed = 0;
    /// Replicates that had to be resimulated because a refit failed.
    int refit_failures = 0;
};

/// Half-normal plot with a simulated envelope: S responses are simulated
/// from the fitted probabilities, the same formula is refitted and its
/// sorted absolute diagnostics give per-index percentile bands.
EnvelopeResult simulated_envelope(const FittedModel& model, const PolytomousDataset& data,
                                  Diagnostic diagnostic, const EnvelopeOptions& options = {});

/// Sample quantile by linear interpolation between order statistics.
double quantile_type7(std::vector<double> values, double prob);

}  // namespace polydiag
