#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "polydiag/errors.hpp"
#include "polydiag/fit.hpp"
#include "polydiag/formula.hpp"
#include "polydiag/numerics.hpp"
#include "polydiag/plot.hpp"
#include "polydiag/residuals.hpp"
#include "polydiag/shapiro_wilk.hpp"
#include "support.hpp"

using namespace polydiag;

namespace {

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed) {
    RngStream s(seed, 0);
    std::vector<double> v(n);
    for (auto& x : v) x = s.normal();
    return v;
}

}  // namespace

TEST_CASE("histogram uses Freedman-Diaconis bins and integrates to one") {
    const auto v = normal_sample(200, 51);
    const auto p = histogram_plot(v, "r");
    CHECK(p.kind == PlotKind::histogram);
    CHECK(p.annotations["bin_rule"] == "freedman-diaconis");
    REQUIRE(p.bin_edges.size() == p.bin_heights.size() + 1);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const double width = 2 * (quantile_type7(sorted, 0.75) - quantile_type7(sorted, 0.25)) / std::cbrt(200.0);
    CHECK(p.bin_edges[1] - p.bin_edges[0] == doctest::Approx(width).epsilon(1e-12));
    CHECK(p.bin_edges.front() <= sorted.front());
    CHECK(p.bin_edges.back() >= sorted.back());
    double area = 0;
    for (std::size_t b = 0; b < p.bin_heights.size(); ++b) {
        area += p.bin_heights[b] * (p.bin_edges[b + 1] - p.bin_edges[b]);
    }
    CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(p.curves.size() == 1);
    CHECK(p.curves[0].y[100] == doctest::Approx(normal_pdf(0.0)).epsilon(1e-15));
}

TEST_CASE("histogram falls back to Sturges when the IQR vanishes") {
    std::vector<double> v(20, 1.0);
    v.push_back(3.0);
    const auto p = histogram_plot(v, "r");
    CHECK(p.annotations["bin_rule"] == "sturges");
    CHECK(p.bin_heights.size() == static_cast<std::size_t>(std::ceil(std::log2(21.0))) + 1);
    CHECK_NOTHROW(histogram_plot(std::vector<double>(4, 2.0), "flat"));
}

TEST_CASE("fixed-bin histogram counts") {
    const std::vector<double> v{0.01, 0.04, 0.06, 0.5, 0.999, 1.0, -3, NAN};
    const auto p = fixed_bin_histogram(v, 20, 0.0, 1.0, "p");
    REQUIRE(p.bin_heights.size() == 20);
    CHECK(p.bin_heights[0] == 3);  // 0.01, 0.04 and the clamped -3
    CHECK(p.bin_heights[1] == 1);
    CHECK(p.bin_heights[10] == 1);
    CHECK(p.bin_heights[19] == 2);
    CHECK_THROWS_AS(fixed_bin_histogram(v, 0, 0.0, 1.0, "p"), ValidationError);
}

TEST_CASE("empty inputs are rejected") {
    const std::vector<double> none;
    CHECK_THROWS_AS(histogram_plot(none, "x"), ValidationError);
    CHECK_THROWS_AS(box_summary("x", none), ValidationError);
    CHECK_THROWS_AS(boxplot({}, "x", "y"), ValidationError);
    CHECK_THROWS_AS(halfnormal_plot(EnvelopeResult{}, "x"), ValidationError);
}

TEST_CASE("residual versus fitted for wine") {
    const auto wine = testsupport::load_wine();
    const auto fit = fit_mle(wine, parse_formula("cultivar ~ magnesium + phenols"));
    const auto q = quantile_residuals(fit, wine, 1);
    const auto p = residual_vs_fitted_plot(fit, wine, q.standardized, FittedAxis::observed_probability);
    REQUIRE(p.points.size() == 1);
    REQUIRE(p.points[0].x.size() == 178);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < 178; ++i) {
        const auto& y = wine.response(i);
        std::size_t j = 0;
        while (y[j] == 0) ++j;
        CHECK(p.points[0].x[i] == fit.fitted_probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        if (std::fabs(p.points[0].y[i]) <= 2.5) ++inside;
    }
    CHECK(inside >= 0.95 * 178);
    CHECK(p.curves.size() == 3);

    const auto lp = residual_vs_fitted_plot(fit, wine, q.standardized, FittedAxis::linear_predictor);
    CHECK(lp.points.size() == 2);
    CHECK(lp.annotations["fitted_axis"] == "linear_predictor");
    CHECK_THROWS_AS(residual_vs_fitted_plot(fit, wine, Eigen::VectorXd::Zero(3), FittedAxis::linear_predictor),
                    ValidationError);
}

TEST_CASE("half-normal plot carries the envelope") {
    EnvelopeResult env;
    env.diagnostic = Diagnostic::euclidean;
    env.observed = {0.1, 0.5, 2.0};
    env.expected = halfnormal_scores(3);
    env.lower = {0.0, 0.2, 0.6};
    env.median = {0.1, 0.4, 1.0};
    env.upper = {0.3, 0.8, 1.5};
    env.points_outside = 1;
    env.percent_outside = 100.0 / 3;
    env.simulations = 99;
    env.seed = 4;
    const auto p = halfnormal_plot(env, "h");
    CHECK(p.points[0].y == env.observed);
    CHECK(p.curves.size() == 3);
    const auto j = to_json(p);
    CHECK(j["schema_version"] == kSchemaVersion);
    CHECK(j["kind"] == "halfnormal");
    CHECK(j["annotations"]["points_outside"] == 1);
    CHECK(j["annotations"]["seed"] == 4);
}

TEST_CASE("box summaries") {
    const std::vector<double> v{1, 2, 3, 4, 100};
    const auto b = box_summary("cell", v);
    CHECK(b.min == 1);
    CHECK(b.q1 == 2);
    CHECK(b.median == 3);
    CHECK(b.q3 == 4);
    CHECK(b.max == 100);
    CHECK(b.count == 5);
    const auto p = boxplot({b}, "t", "percent");
    CHECK(to_json(p)["boxes"].size() == 1);
}

TEST_CASE("serialization is deterministic") {
    const auto v = normal_sample(80, 52);
    const auto a = histogram_plot(v, "r");
    const auto b = histogram_plot(v, "r");
    CHECK(to_json(a).dump() == to_json(b).dump());
    const auto svg = render_svg(a);
    CHECK(svg == render_svg(b));
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);

    EnvelopeResult env;
    env.observed = {0.1, 0.5, 2.0};
    env.expected = halfnormal_scores(3);
    env.lower = {0.0, 0.2, 0.6};
    env.median = {0.1, 0.4, 1.0};
    env.upper = {0.3, 0.8, 1.5};
    const auto h = render_svg(halfnormal_plot(env, "h"));
    CHECK(h.find("<polygon") != std::string::npos);
    CHECK(h.find("<circle") != std::string::npos);
    CHECK(h.find("white") != std::string::npos);
}
