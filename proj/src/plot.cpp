#include "polydiag/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "polydiag/errors.hpp"
#include "polydiag/numerics.hpp"

namespace polydiag {

const char* to_string(PlotKind k) {
    switch (k) {
        case PlotKind::histogram: return "histogram";
        case PlotKind::residual_vs_fitted: return "residual_vs_fitted";
        case PlotKind::halfnormal: return "halfnormal";
        case PlotKind::boxplot: return "boxplot";
    }
    return "unknown";
}

namespace {

void require_nonempty(std::span<const double> v, const char* what) {
    if (v.empty()) throw ValidationError(std::string(what) + ": empty input");
}

Series normal_density_curve(double lo, double hi) {
    Series s{"standard normal density", {}, {}};
    constexpr int points = 201;
    for (int k = 0; k < points; ++k) {
        const double x = lo + (hi - lo) * k / (points - 1);
        s.x.push_back(x);
        s.y.push_back(normal_pdf(x));
    }
    return s;
}

}  // namespace

PlotData histogram_plot(std::span<const double> values, const std::string& title) {
    require_nonempty(values, "histogram");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    const double lo = v.front();
    const double hi = v.back();
    const double iqr = quantile_type7(v, 0.75) - quantile_type7(v, 0.25);

    std::size_t bins;
    double width;
    if (hi == lo) {
        bins = 1;
        width = 1.0;
    } else {
        width = 2.0 * iqr / std::cbrt(n);
        if (!(width > 0.0)) {
            bins = static_cast<std::size_t>(std::ceil(std::log2(n))) + 1;  // Sturges
            width = (hi - lo) / static_cast<double>(bins);
        } else {
            bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
        }
    }
    const double start = hi == lo ? lo - 0.5 : lo;

    PlotData p;
    p.kind = PlotKind::histogram;
    p.title = title;
    p.x_label = "residual";
    p.y_label = "density";
    for (std::size_t b = 0; b <= bins; ++b) p.bin_edges.push_back(start + width * static_cast<double>(b));
    std::vector<double> counts(bins, 0.0);
    for (double x : v) {
        auto b = static_cast<std::size_t>(std::floor((x - start) / width));
        counts[std::min(b, bins - 1)] += 1.0;
    }
    for (double c : counts) p.bin_heights.push_back(c / (n * width));
    const double span = std::max({4.0, std::fabs(lo), std::fabs(hi)});
    p.curves.push_back(normal_density_curve(-span, span));
    p.annotations["bin_rule"] = iqr > 0.0 ? "freedman-diaconis" : "sturges";
    p.annotations["n"] = v.size();
    return p;
}

PlotData fixed_bin_histogram(std::span<const double> values, std::size_t bins, double lo, double hi,
                             const std::string& title) {
    if (bins == 0 || !(hi > lo)) throw ValidationError("histogram: invalid bins");
    PlotData p;
    p.kind = PlotKind::histogram;
    p.title = title;
    p.x_label = "value";
    p.y_label = "count";
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) p.bin_edges.push_back(lo + width * static_cast<double>(b));
    p.bin_heights.assign(bins, 0.0);
    for (double x : values) {
        if (!std::isfinite(x)) continue;
        const double c = std::clamp(x, lo, hi);
        auto b = static_cast<std::size_t>(std::floor((c - lo) / width));
        p.bin_heights[std::min(b, bins - 1)] += 1.0;
    }
    p.annotations["n"] = values.size();
    return p;
}

PlotData residual_vs_fitted_plot(const FittedModel& model, const PolytomousDataset& data,
                                 const Eigen::VectorXd& residuals, FittedAxis axis) {
    if (residuals.size() == 0) throw ValidationError("residual_vs_fitted: empty input");
    if (static_cast<std::size_t>(residuals.size()) != data.n()) {
        throw ValidationError("residual_vs_fitted: one residual per subject required");
    }
    PlotData p;
    p.kind = PlotKind::residual_vs_fitted;
    p.title = "residuals versus fitted values";
    p.y_label = "standardized quantile residual";
    if (axis == FittedAxis::observed_probability && !data.grouped()) {
        p.x_label = "fitted probability of the observed category";
        Series s{"subjects", {}, {}};
        for (std::size_t i = 0; i < data.n(); ++i) {
            const auto& y = data.response(i);
            std::size_t j = 0;
            while (y[j] == 0) ++j;
            s.x.push_back(model.fitted_probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            s.y.push_back(residuals[static_cast<Eigen::Index>(i)]);
        }
        p.points.push_back(std::move(s));
        p.annotations["fitted_axis"] = "observed_probability";
    } else {
        p.x_label = "linear predictor";
        const Eigen::MatrixXd eta = model.linear_predictors();
        for (Eigen::Index k = 0; k < eta.cols(); ++k) {
            const auto& label = model.category_labels[model.layout.category_of_block(static_cast<std::size_t>(k))];
            Series s{"log-odds " + label + " vs " + model.category_labels[model.layout.reference], {}, {}};
            for (Eigen::Index i = 0; i < eta.rows(); ++i) {
                s.x.push_back(eta(i, k));
                s.y.push_back(residuals[i]);
            }
            p.points.push_back(std::move(s));
        }
        p.annotations["fitted_axis"] = "linear_predictor";
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : p.points) {
        for (double x : s.x) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    for (double level : {-2.0, 0.0, 2.0}) {
        p.curves.push_back({"y = " + std::to_string(static_cast<int>(level)), {lo, hi}, {level, level}});
    }
    return p;
}

PlotData halfnormal_plot(const EnvelopeResult& env, const std::string& title) {
    if (env.observed.empty()) throw ValidationError("halfnormal: empty input");
    PlotData p;
    p.kind = PlotKind::halfnormal;
    p.title = title;
    p.x_label = "half-normal scores";
    p.y_label = std::string("|") + to_string(env.diagnostic) + "|";
    p.points.push_back({"observed", env.expected, env.observed});
    p.curves.push_back({"lower", env.expected, env.lower});
    p.curves.push_back({"median", env.expected, env.median});
    p.curves.push_back({"upper", env.expected, env.upper});
    p.annotations["level"] = env.level;
    p.annotations["simulations"] = env.simulations;
    p.annotations["points_outside"] = env.points_outside;
    p.annotations["percent_outside"] = env.percent_outside;
    p.annotations["seed"] = env.seed;
    p.annotations["refit_failures"] = env.refit_failures;
    return p;
}

BoxSummary box_summary(const std::string& label, std::span<const double> values) {
    require_nonempty(values, "boxplot");
    std::vector<double> v(values.begin(), values.end());
    BoxSummary b;
    b.label = label;
    b.count = v.size();
    b.min = *std::min_element(v.begin(), v.end());
    b.max = *std::max_element(v.begin(), v.end());
    b.q1 = quantile_type7(v, 0.25);
    b.median = quantile_type7(v, 0.5);
    b.q3 = quantile_type7(v, 0.75);
    return b;
}

PlotData boxplot(std::vector<BoxSummary> boxes, const std::string& title, const std::string& y_label) {
    if (boxes.empty()) throw ValidationError("boxplot: empty input");
    PlotData p;
    p.kind = PlotKind::boxplot;
    p.title = title;
    p.x_label = "";
    p.y_label = y_label;
    p.boxes = std::move(boxes);
    return p;
}

nlohmann::json to_json(const PlotData& plot) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = to_string(plot.kind);
    j["title"] = plot.title;
    j["x_label"] = plot.x_label;
    j["y_label"] = plot.y_label;
    if (!plot.bin_edges.empty()) {
        j["bin_edges"] = plot.bin_edges;
        j["bin_heights"] = plot.bin_heights;
    }
    auto series = [](const std::vector<Series>& ss) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& s : ss) arr.push_back({{"name", s.name}, {"x", s.x}, {"y", s.y}});
        return arr;
    };
    j["points"] = series(plot.points);
    j["curves"] = series(plot.curves);
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : plot.boxes) {
        boxes.push_back({{"label", b.label}, {"min", b.min}, {"q1", b.q1}, {"median", b.median},
                         {"q3", b.q3}, {"max", b.max}, {"count", b.count}});
    }
    j["boxes"] = boxes;
    j["annotations"] = plot.annotations;
    return j;
}

// ---------------------------------------------------------------- SVG

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

class Canvas {
public:
    static constexpr double kWidth = 640, kHeight = 480;
    static constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

    Canvas(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
        if (!(x1_ > x0_)) { x0_ -= 0.5; x1_ += 0.5; }
        if (!(y1_ > y0_)) { y0_ -= 0.5; y1_ += 0.5; }
        const double px = 0.04 * (x1_ - x0_);
        const double py = 0.04 * (y1_ - y0_);
        x0_ -= px; x1_ += px; y0_ -= py; y1_ += py;
    }

    double sx(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
    double sy(double y) const { return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom); }

    void axes(const PlotData& p, bool x_ticks = true) {
        out_ << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
             << fmt(kWidth - kLeft - kRight) << "\" height=\"" << fmt(kHeight - kTop - kBottom)
             << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int k = 0; k <= 4; ++k) {
            const double yv = y0_ + (y1_ - y0_) * k / 4.0;
            out_ << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(sy(yv) + 4)
                 << "\" font-size=\"11\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
            if (x_ticks) {
                const double xv = x0_ + (x1_ - x0_) * k / 4.0;
                out_ << "<text x=\"" << fmt(sx(xv)) << "\" y=\"" << fmt(kHeight - kBottom + 16)
                     << "\" font-size=\"11\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
            }
        }
        out_ << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">"
             << escape(p.title) << "</text>\n";
        out_ << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"" << fmt(kHeight - 16)
             << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(p.x_label) << "</text>\n";
        out_ << "<text x=\"16\" y=\"" << fmt(kHeight / 2) << "\" font-size=\"12\" text-anchor=\"middle\" "
             << "transform=\"rotate(-90 16 " << fmt(kHeight / 2) << ")\">" << escape(p.y_label) << "</text>\n";
    }

    void polyline(const Series& s, const char* colour, const char* dash = nullptr) {
        if (s.x.empty()) return;
        out_ << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"";
        if (dash) out_ << " stroke-dasharray=\"" << dash << "\"";
        out_ << " points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i) out_ << ' ';
            out_ << fmt(sx(s.x[i])) << ',' << fmt(sy(s.y[i]));
        }
        out_ << "\"/>\n";
    }

    void circles(const Series& s, const char* colour) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            out_ << "<circle cx=\"" << fmt(sx(s.x[i])) << "\" cy=\"" << fmt(sy(s.y[i]))
                 << "\" r=\"2.5\" fill=\"" << colour << "\"/>\n";
        }
    }

    std::ostringstream& raw() { return out_; }

    std::string finish() const {
        std::ostringstream doc;
        doc << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
            << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << out_.str() << "</svg>\n";
        return doc.str();
    }

private:
    double x0_, x1_, y0_, y1_;
    std::ostringstream out_;
};

void extend(const std::vector<double>& v, double& lo, double& hi) {
    for (double x : v) {
        if (!std::isfinite(x)) continue;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
}

constexpr const char* kPalette[] = {"#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string render_svg(const PlotData& p) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double x0 = inf, x1 = -inf, y0 = inf, y1 = -inf;

    switch (p.kind) {
        case PlotKind::histogram: {
            extend(p.bin_edges, x0, x1);
            y0 = 0.0;
            extend(p.bin_heights, y0, y1);
            for (const auto& c : p.curves) {
                // Clip the overlay to the histogram range.
                for (std::size_t i = 0; i < c.x.size(); ++i) {
                    if (c.x[i] >= x0 && c.x[i] <= x1) y1 = std::max(y1, c.y[i]);
                }
            }
            Canvas cv(x0, x1, y0, y1);
            for (std::size_t b = 0; b + 1 < p.bin_edges.size(); ++b) {
                const double left = cv.sx(p.bin_edges[b]);
                const double right = cv.sx(p.bin_edges[b + 1]);
                const double top = cv.sy(p.bin_heights[b]);
                cv.raw() << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\""
                         << fmt(right - left) << "\" height=\"" << fmt(cv.sy(0.0) - top)
                         << "\" fill=\"#c6dbef\" stroke=\"#3182bd\"/>\n";
            }
            for (const auto& c : p.curves) {
                Series clipped{c.name, {}, {}};
                for (std::size_t i = 0; i < c.x.size(); ++i) {
                    if (c.x[i] >= x0 && c.x[i] <= x1) {
                        clipped.x.push_back(c.x[i]);
                        clipped.y.push_back(c.y[i]);
                    }
                }
                cv.polyline(clipped, "red");
            }
            cv.axes(p);
            return cv.finish();
        }
        case PlotKind::residual_vs_fitted: {
            for (const auto& s : p.points) { extend(s.x, x0, x1); extend(s.y, y0, y1); }
            y0 = std::min(y0, -2.5);
            y1 = std::max(y1, 2.5);
            Canvas cv(x0, x1, y0, y1);
            for (const auto& c : p.curves) cv.polyline(c, "gray", "4 3");
            for (std::size_t k = 0; k < p.points.size(); ++k) cv.circles(p.points[k], kPalette[k % 5]);
            cv.axes(p);
            return cv.finish();
        }
        case PlotKind::halfnormal: {
            for (const auto& s : p.points) { extend(s.x, x0, x1); extend(s.y, y0, y1); }
            for (const auto& c : p.curves) { extend(c.x, x0, x1); extend(c.y, y0, y1); }
            y0 = std::min(y0, 0.0);
            Canvas cv(x0, x1, y0, y1);
            const Series* lower = nullptr;
            const Series* upper = nullptr;
            const Series* median = nullptr;
            for (const auto& c : p.curves) {
                if (c.name == "lower") lower = &c;
                if (c.name == "upper") upper = &c;
                if (c.name == "median") median = &c;
            }
            if (lower && upper) {
                cv.raw() << "<polygon fill=\"#d9d9d9\" stroke=\"none\" points=\"";
                for (std::size_t i = 0; i < lower->x.size(); ++i) {
                    cv.raw() << fmt(cv.sx(lower->x[i])) << ',' << fmt(cv.sy(lower->y[i])) << ' ';
                }
                for (std::size_t i = upper->x.size(); i-- > 0;) {
                    cv.raw() << fmt(cv.sx(upper->x[i])) << ',' << fmt(cv.sy(upper->y[i]))
                             << (i ? " " : "");
                }
                cv.raw() << "\"/>\n";
                cv.polyline(*lower, "black");
                cv.polyline(*upper, "black");
            }
            if (median) cv.polyline(*median, "black", "4 3");
            for (const auto& s : p.points) cv.circles(s, "black");
            cv.axes(p);
            return cv.finish();
        }
        case PlotKind::boxplot: {
            for (const auto& b : p.boxes) {
                y0 = std::min(y0, b.min);
                y1 = std::max(y1, b.max);
            }
            const auto count = static_cast<double>(p.boxes.size());
            Canvas cv(0.0, count, y0, y1);
            for (std::size_t k = 0; k < p.boxes.size(); ++k) {
                const auto& b = p.boxes[k];
                const double centre = cv.sx(static_cast<double>(k) + 0.5);
                const double half = 0.3 * (cv.sx(1.0) - cv.sx(0.0));
                auto& o = cv.raw();
                o << "<line x1=\"" << fmt(centre) << "\" y1=\"" << fmt(cv.sy(b.min)) << "\" x2=\""
                  << fmt(centre) << "\" y2=\"" << fmt(cv.sy(b.max)) << "\" stroke=\"black\"/>\n";
                o << "<rect x=\"" << fmt(centre - half) << "\" y=\"" << fmt(cv.sy(b.q3)) << "\" width=\""
                  << fmt(2 * half) << "\" height=\"" << fmt(cv.sy(b.q1) - cv.sy(b.q3))
                  << "\" fill=\"#c6dbef\" stroke=\"black\"/>\n";
                o << "<line x1=\"" << fmt(centre - half) << "\" y1=\"" << fmt(cv.sy(b.median)) << "\" x2=\""
                  << fmt(centre + half) << "\" y2=\"" << fmt(cv.sy(b.median))
                  << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
                o << "<text x=\"" << fmt(centre) << "\" y=\"" << fmt(Canvas::kHeight - Canvas::kBottom + 16)
                  << "\" font-size=\"10\" text-anchor=\"middle\">" << escape(b.label) << "</text>\n";
            }
            cv.axes(p, false);
            return cv.finish();
        }
    }
    return {};
}

}  // namespace polydiag
