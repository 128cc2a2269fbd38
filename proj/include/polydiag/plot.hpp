#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "polydiag/dataset.hpp"
#include "polydiag/envelope.hpp"
#include "polydiag/fit.hpp"

namespace polydiag {

inline constexpr int kSchemaVersion = 1;

enum class PlotKind { histogram, residual_vs_fitted, halfnormal, boxplot };

const char* to_string(PlotKind k);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct BoxSummary {
    std::string label;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    std::size_t count = 0;
};

/// Serializable description of one figure. Deterministic given its inputs.
struct PlotData {
    PlotKind kind = PlotKind::histogram;
    std::string title;
    std::string x_label;
    std::string y_label;
    /// Histogram: bin edges (k + 1) and heights (k), as densities or counts.
    std::vector<double> bin_edges;
    std::vector<double> bin_heights;
    /// Scatter points (residual_vs_fitted, halfnormal observed).
    std::vector<Series> points;
    /// Curves: normal density, envelope bands, reference lines.
    std::vector<Series> curves;
    std::vector<BoxSummary> boxes;
    nlohmann::json annotations = nlohmann::json::object();
};

/// Density histogram with Freedman-Diaconis bins and a standard normal
/// density overlay.
PlotData histogram_plot(std::span<const double> values, const std::string& title);

/// Histogram of counts on fixed equal-width bins over [lo, hi].
PlotData fixed_bin_histogram(std::span<const double> values, std::size_t bins, double lo, double hi,
                             const std::string& title);

enum class FittedAxis {
    /// Individual data: fitted probability of the observed category.
    observed_probability,
    /// One panel per non-reference category: its linear predictor.
    linear_predictor,
};

PlotData residual_vs_fitted_plot(const FittedModel& model, const PolytomousDataset& data,
                                 const Eigen::VectorXd& residuals, FittedAxis axis);

PlotData halfnormal_plot(const EnvelopeResult& envelope, const std::string& title);

BoxSummary box_summary(const std::string& label, std::span<const double> values);
PlotData boxplot(std::vector<BoxSummary> boxes, const std::string& title, const std::string& y_label);

nlohmann::json to_json(const PlotData& plot);

/// Standalone SVG document.
std::string render_svg(const PlotData& plot);

}  // namespace polydiag
