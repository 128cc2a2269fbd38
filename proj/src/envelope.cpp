#include "polydiag/envelope.hpp"

#include <algorithm>
#include <cmath>

#include "polydiag/errors.hpp"
#include "polydiag/multinom.hpp"
#include "polydiag/parallel.hpp"
#include "polydiag/rng.hpp"
#include "polydiag/shapiro_wilk.hpp"

namespace polydiag {

namespace {

constexpr std::uint64_t kResponseStream = 1;
constexpr std::uint64_t kResidualStream = 2;

std::vector<double> sorted_abs(const Eigen::VectorXd& v) {
    std::vector<double> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = std::fabs(v[i]);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

const char* to_string(Diagnostic d) {
    switch (d) {
        case Diagnostic::quantile_residual: return "quantile_residual";
        case Diagnostic::euclidean: return "euclidean";
        case Diagnostic::mahalanobis: return "mahalanobis";
        case Diagnostic::pearson: return "pearson";
    }
    return "unknown";
}

Diagnostic parse_diagnostic(const std::string& text) {
    if (text == "quantile_residual" || text == "quantile") return Diagnostic::quantile_residual;
    if (text == "euclidean") return Diagnostic::euclidean;
    if (text == "mahalanobis") return Diagnostic::mahalanobis;
    if (text == "pearson") return Diagnostic::pearson;
    throw ValidationError("unknown diagnostic '" + text + "'");
}

Eigen::VectorXd diagnostic_values(Diagnostic diagnostic, const FittedModel& model,
                                  const PolytomousDataset& data, std::uint64_t residual_seed,
                                  MahalanobisMode mode) {
    switch (diagnostic) {
        case Diagnostic::quantile_residual:
            return quantile_residuals(model, data, residual_seed).standardized;
        case Diagnostic::euclidean:
        case Diagnostic::mahalanobis: {
            if (!data.grouped()) {
                throw ValidationError(std::string(to_string(diagnostic)) +
                                      " distance requires grouped data");
            }
            auto d = residual_distances(model, data, mode);
            return diagnostic == Diagnostic::euclidean ? d.euclidean : d.mahalanobis;
        }
        case Diagnostic::pearson: {
            auto p = pearson_residuals(model, data);
            if (p.non_finite > 0) throw NumericalError("Pearson residuals undefined for some components");
            Eigen::MatrixXd t = p.values.transpose();
            return Eigen::Map<Eigen::VectorXd>(t.data(), t.size());
        }
    }
    throw ValidationError("unknown diagnostic");
}

double quantile_type7(std::vector<double> values, double prob) {
    if (values.empty()) throw DomainError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EnvelopeResult simulated_envelope(const FittedModel& model, const PolytomousDataset& data,
                                  Diagnostic diagnostic, const EnvelopeOptions& options) {
    if (options.simulations < 1) throw ValidationError("envelope: need at least one simulation");
    if (!(options.level > 0.0 && options.level < 100.0)) {
        throw ValidationError("envelope: level must be in (0, 100)");
    }
    if (!model.converged) throw ValidationError("envelope: model did not converge");
    if ((diagnostic == Diagnostic::euclidean || diagnostic == Diagnostic::mahalanobis) &&
        !data.grouped()) {
        throw ValidationError("envelope: distance diagnostics require grouped data");
    }

    EnvelopeResult result;
    result.diagnostic = diagnostic;
    result.level = options.level;
    result.simulations = options.simulations;
    result.seed = options.seed;
    result.observed = sorted_abs(diagnostic_values(diagnostic, model, data,
                                                   options.residual_seed.value_or(options.seed),
                                                   options.mode));
    const std::size_t n = result.observed.size();
    result.expected = halfnormal_scores(n);

    std::vector<ProbabilityVector> probs;
    probs.reserve(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) probs.push_back(fitted_probability_vector(model, i));

    const auto S = static_cast<std::size_t>(options.simulations);
    std::vector<std::vector<double>> replicates(S);
    std::vector<int> failures(S, 0);

    parallel_for(S, options.threads, [&](std::size_t s) {
        for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
            const auto a = static_cast<std::uint64_t>(attempt);
            RngStream stream(derive_seed(options.seed, {kResponseStream, s, a}), 0);
            std::vector<CountVector> responses;
            responses.reserve(data.n());
            for (std::size_t i = 0; i < data.n(); ++i) {
                responses.push_back(sample_multinomial(data.group_size(i), probs[i], stream));
            }
            try {
                const auto simulated = data.with_responses(std::move(responses));
                const auto refit = fit_mle(simulated, model.formula, model.design, options.fit);
                if (!refit.converged) throw NumericalError("refit did not converge");
                auto values = sorted_abs(diagnostic_values(
                    diagnostic, refit, simulated, derive_seed(options.seed, {kResidualStream, s, a}),
                    options.mode));
                if (values.size() != n) throw NumericalError("diagnostic length changed");
                replicates[s] = std::move(values);
                return;
            } catch (const std::runtime_error&) {
                ++failures[s];
            } catch (const std::domain_error&) {
                ++failures[s];
            }
        }
    });

    int total_failures = 0;
    bool exhausted = false;
    for (std::size_t s = 0; s < S; ++s) {
        total_failures += failures[s];
        if (replicates[s].empty()) exhausted = true;
    }
    result.refit_failures = total_failures;
    if (exhausted) {
        throw NumericalError("envelope: refits kept failing (" + std::to_string(total_failures) +
                             " failed attempts)");
    }

    const double lo_p = (100.0 - options.level) / 200.0;
    const double hi_p = (100.0 + options.level) / 200.0;
    result.lower.resize(n);
    result.median.resize(n);
    result.upper.resize(n);
    std::vector<double> column(S);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < S; ++s) column[s] = replicates[s][i];
        result.lower[i] = quantile_type7(column, lo_p);
        result.median[i] = quantile_type7(column, 0.5);
        result.upper[i] = quantile_type7(column, hi_p);
        if (result.observed[i] < result.lower[i] || result.observed[i] > result.upper[i]) {
            ++result.points_outside;
        }
    }
    result.percent_outside = 100.0 * static_cast<double>(result.points_outside) / static_cast<double>(n);
    return result;
}

}  // namespace polydiag
