#include "polydiag/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "polydiag/csv.hpp"
#include "polydiag/errors.hpp"
#include "polydiag/fit.hpp"
#include "polydiag/formula.hpp"
#include "polydiag/parallel.hpp"
#include "polydiag/residuals.hpp"
#include "polydiag/rng.hpp"
#include "polydiag/shapiro_wilk.hpp"

namespace polydiag {

namespace {

// Stream ids inside a replicate.
constexpr std::uint64_t kCovariateStream = 0;
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kResponseStream = 2;
constexpr std::uint64_t kDiagnosticKey = 3;

constexpr int kHistogramBins = 20;
constexpr double kAlpha = 0.05;

std::uint64_t replicate_seed(const ScenarioSpec& spec, int replicate) {
    return derive_seed(spec.seed, {static_cast<std::uint64_t>(spec.id),
                                   static_cast<std::uint64_t>(spec.model),
                                   static_cast<std::uint64_t>(spec.structure),
                                   static_cast<std::uint64_t>(spec.categories),
                                   static_cast<std::uint64_t>(spec.subjects),
                                   static_cast<std::uint64_t>(spec.group_size),
                                   static_cast<std::uint64_t>(replicate)});
}

int covariate_count(SimModel m) { return m == SimModel::model1 ? 1 : 2; }

bool is_distance(Diagnostic d) { return d == Diagnostic::euclidean || d == Diagnostic::mahalanobis; }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

long long parse_integer(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw ValidationError("scenario config: '" + key + "' expects an integer, got '" + text + "'");
    }
    return v;
}

std::uint64_t parse_seed(const std::string& text) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        if (!text.empty() && text[0] != '-') v = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw ValidationError("scenario config: seed must be a nonnegative integer, got '" + text + "'");
    }
    return v;
}

double parse_real(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw ValidationError("scenario config: '" + key + "' expects a number, got '" + text + "'");
    }
    return v;
}

Structure parse_structure(const std::string& text) {
    if (text == "individual") return Structure::individual;
    if (text == "grouped") return Structure::grouped;
    throw ValidationError("scenario config: structure must be individual or grouped, got '" + text + "'");
}

CellSummary summarize_cell(const ScenarioSpec& spec, FittedPredictor fitted,
                           const std::vector<ReplicateRecord>& records) {
    CellSummary cell;
    cell.fitted = fitted;
    std::vector<double> values;
    for (const auto& r : records) {
        if (r.fitted != fitted) continue;
        if (r.ok) {
            values.push_back(r.value);
        } else {
            ++cell.excluded;
        }
    }
    cell.completed = values.size();
    const bool sw = !is_distance(spec.diagnostic);
    if (sw) {
        cell.p_histogram.assign(kHistogramBins, 0.0);
        std::size_t rejected = 0;
        for (double p : values) {
            if (p < kAlpha) ++rejected;
            auto b = static_cast<int>(std::floor(p * kHistogramBins));
            cell.p_histogram[static_cast<std::size_t>(std::clamp(b, 0, kHistogramBins - 1))] += 1.0;
        }
        cell.rejection_rate = values.empty() ? std::numeric_limits<double>::quiet_NaN()
                                             : static_cast<double>(rejected) / static_cast<double>(values.size());
    } else {
        cell.rejection_rate = std::numeric_limits<double>::quiet_NaN();
    }
    if (!values.empty()) {
        cell.box = box_summary(to_string(fitted), values);
        cell.median = cell.box->median;
    } else {
        cell.median = std::numeric_limits<double>::quiet_NaN();
    }
    return cell;
}

nlohmann::json to_json(const CellSummary& c) {
    nlohmann::json j;
    j["fitted"] = to_string(c.fitted);
    j["completed"] = c.completed;
    j["excluded"] = c.excluded;
    if (std::isnan(c.rejection_rate)) {
        j["rejection_rate"] = nullptr;
    } else {
        j["rejection_rate"] = c.rejection_rate;
    }
    if (!c.p_histogram.empty()) j["p_histogram"] = c.p_histogram;
    if (c.box) {
        j["summary"] = {{"min", c.box->min}, {"q1", c.box->q1}, {"median", c.box->median},
                        {"q3", c.box->q3}, {"max", c.box->max}};
    }
    return j;
}

}  // namespace

const char* to_string(SimModel m) { return m == SimModel::model1 ? "model1" : "model2"; }

SimModel parse_sim_model(const std::string& text) {
    if (text == "model1" || text == "1") return SimModel::model1;
    if (text == "model2" || text == "2") return SimModel::model2;
    throw ValidationError("unknown simulation model '" + text + "'");
}

const char* to_string(FittedPredictor f) { return f == FittedPredictor::null_model ? "null" : "correct"; }

ScenarioSpec scenario_preset(int id) {
    ScenarioSpec s;
    s.id = id;
    switch (id) {
        case 1: break;
        case 2: s.model = SimModel::model2; break;
        case 3: s.structure = Structure::grouped; break;
        case 4:
            s.model = SimModel::model2;
            s.structure = Structure::grouped;
            break;
        case 5:
            s.structure = Structure::grouped;
            s.diagnostic = Diagnostic::euclidean;
            break;
        case 6:
            s.structure = Structure::grouped;
            s.diagnostic = Diagnostic::mahalanobis;
            break;
        default: throw ValidationError("scenario id must be between 1 and 6, got " + std::to_string(id));
    }
    return s;
}

void validate(const ScenarioSpec& s) {
    if (s.id < 0 || s.id > 6) throw ValidationError("scenario id must be between 0 and 6");
    if (s.categories < 3 || s.categories > 5) {
        throw ValidationError("J must be 3, 4 or 5 (true parameters are defined only there), got " +
                              std::to_string(s.categories));
    }
    if (s.subjects < 10) throw ValidationError("N must be at least 10");
    if (s.model == SimModel::model2 && s.subjects % 2 != 0) {
        throw ValidationError("model 2 needs an even N for the balanced factor");
    }
    if (s.structure == Structure::grouped && s.group_size < 1) {
        throw ValidationError("group size m must be positive");
    }
    if (s.replicates < 1) throw ValidationError("R must be positive");
    if (s.diagnostic == Diagnostic::pearson) {
        throw ValidationError("scenario diagnostic must be quantile_residual, euclidean or mahalanobis");
    }
    if (is_distance(s.diagnostic) && s.structure != Structure::grouped) {
        throw ValidationError("distance diagnostics require grouped structure");
    }
    if (is_distance(s.diagnostic) && s.simulations < 1) throw ValidationError("S must be positive");
    if (!(s.level > 0.0 && s.level < 100.0)) throw ValidationError("level must be in (0, 100)");
    const std::size_t need =
        static_cast<std::size_t>((s.categories - 1) * (1 + covariate_count(s.model)));
    if (!s.theta.empty() && s.theta.size() != need) {
        throw ValidationError("theta needs " + std::to_string(need) + " values, got " +
                              std::to_string(s.theta.size()));
    }
}

std::vector<double> default_theta(SimModel model, int categories) {
    const std::vector<double> alpha{1.5, 3.0, 2.0, 4.0};
    const std::vector<double> beta1{-3.0, -5.0, -4.0, -7.0};
    const std::vector<double> beta2{1.5, 2.5, 3.0, 3.5};
    if (categories < 3 || categories > 5) throw ValidationError("J must be 3, 4 or 5");
    const auto k = static_cast<std::size_t>(categories - 1);
    std::vector<double> theta(alpha.begin(), alpha.begin() + static_cast<long>(k));
    theta.insert(theta.end(), beta1.begin(), beta1.begin() + static_cast<long>(k));
    if (model == SimModel::model2) theta.insert(theta.end(), beta2.begin(), beta2.begin() + static_cast<long>(k));
    return theta;
}

std::vector<double> resolved_theta(const ScenarioSpec& spec) {
    return spec.theta.empty() ? default_theta(spec.model, spec.categories) : spec.theta;
}

std::vector<double> true_probabilities(const ScenarioSpec& spec, double x1, double x2) {
    const auto theta = resolved_theta(spec);
    const auto k = static_cast<std::size_t>(spec.categories - 1);
    std::vector<double> eta(k + 1, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        eta[j + 1] = theta[j] + theta[k + j] * x1;
        if (spec.model == SimModel::model2) eta[j + 1] += theta[2 * k + j] * x2;
    }
    const double top = *std::max_element(eta.begin(), eta.end());
    double total = 0.0;
    for (double& e : eta) {
        e = std::exp(e - top);
        total += e;
    }
    for (double& e : eta) e /= total;
    return eta;
}

PolytomousDataset generate_dataset(const ScenarioSpec& spec, int replicate) {
    validate(spec);
    const std::uint64_t seed = replicate_seed(spec, replicate);
    const auto n = static_cast<std::size_t>(spec.subjects);
    const auto J = static_cast<std::size_t>(spec.categories);

    RngStream cov_stream(seed, kCovariateStream);
    std::vector<double> x1(n);
    for (auto& x : x1) x = cov_stream.normal();

    std::vector<double> x2(n, 0.0);
    if (spec.model == SimModel::model2) {
        for (std::size_t i = n / 2; i < n; ++i) x2[i] = 1.0;
        RngStream shuffle(seed, kShuffleStream);
        for (std::size_t i = n - 1; i > 0; --i) {
            std::swap(x2[i], x2[shuffle.below(i + 1)]);
        }
    }

    const int m = spec.structure == Structure::grouped ? spec.group_size : 1;
    RngStream response_stream(seed, kResponseStream);
    std::vector<CountVector> responses;
    responses.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ProbabilityVector pi(true_probabilities(spec, x1[i], x2[i]), 1e-9);
        responses.push_back(sample_multinomial(m, pi, response_stream));
    }

    std::vector<std::string> labels;
    for (std::size_t j = 1; j <= J; ++j) labels.push_back(std::to_string(j));
    std::vector<Covariate> covariates;
    covariates.push_back({"x1", CovariateKind::continuous, std::move(x1), {}});
    if (spec.model == SimModel::model2) {
        covariates.push_back({"x2", CovariateKind::factor, std::move(x2), {"0", "1"}});
    }
    return PolytomousDataset(spec.structure, std::move(labels), std::move(responses), std::move(covariates));
}

ModelFormula fitted_formula(const ScenarioSpec& spec, FittedPredictor fitted) {
    if (fitted == FittedPredictor::null_model) return parse_formula("y ~ 1");
    return parse_formula(spec.model == SimModel::model1 ? "y ~ x1" : "y ~ x1 + x2");
}

std::vector<ReplicateRecord> run_replicate(const ScenarioSpec& spec, int replicate) {
    const auto data = generate_dataset(spec, replicate);
    const std::uint64_t seed = replicate_seed(spec, replicate);
    std::vector<ReplicateRecord> out;
    for (auto fitted : {FittedPredictor::null_model, FittedPredictor::correct}) {
        ReplicateRecord rec;
        rec.replicate = replicate;
        rec.fitted = fitted;
        const auto diag_seed = derive_seed(seed, {kDiagnosticKey, static_cast<std::uint64_t>(fitted)});
        try {
            const auto model = fit_mle(data, fitted_formula(spec, fitted));
            rec.iterations = model.iterations;
            if (!model.converged) throw NumericalError("fit did not converge");
            if (is_distance(spec.diagnostic)) {
                EnvelopeOptions opt;
                opt.simulations = spec.simulations;
                opt.level = spec.level;
                opt.seed = diag_seed;
                const auto env = simulated_envelope(model, data, spec.diagnostic, opt);
                rec.statistic = static_cast<double>(env.points_outside);
                rec.value = env.percent_outside;
            } else {
                const auto q = quantile_residuals(model, data, diag_seed);
                std::vector<double> r(q.standardized.data(), q.standardized.data() + q.standardized.size());
                const auto sw = shapiro_wilk(r);
                rec.statistic = sw.w;
                rec.value = sw.p_value;
            }
            rec.ok = true;
        } catch (const std::runtime_error& e) {
            rec.error = e.what();
        } catch (const std::domain_error& e) {
            rec.error = e.what();
        }
        out.push_back(std::move(rec));
    }
    return out;
}

ScenarioSummary summarize(const ScenarioSpec& spec, std::vector<ReplicateRecord> records) {
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return std::pair(a.replicate, static_cast<int>(a.fitted)) <
               std::pair(b.replicate, static_cast<int>(b.fitted));
    });
    ScenarioSummary s;
    s.spec = spec;
    s.null_cell = summarize_cell(spec, FittedPredictor::null_model, records);
    s.correct_cell = summarize_cell(spec, FittedPredictor::correct, records);
    s.records = std::move(records);
    return s;
}

ScenarioSummary run_scenario(const ScenarioSpec& spec, const RunHooks& hooks) {
    validate(spec);
    std::vector<ReplicateRecord> records;
    std::vector<bool> done(static_cast<std::size_t>(spec.replicates), false);
    for (const auto& r : hooks.resume) {
        if (r.replicate < 0 || r.replicate >= spec.replicates) {
            throw ValidationError("checkpoint replicate " + std::to_string(r.replicate) + " outside 0.." +
                                  std::to_string(spec.replicates - 1));
        }
        records.push_back(r);
        done[static_cast<std::size_t>(r.replicate)] = true;
    }
    std::vector<int> pending;
    for (int r = 0; r < spec.replicates; ++r) {
        if (!done[static_cast<std::size_t>(r)]) pending.push_back(r);
    }

    const std::size_t chunk = static_cast<std::size_t>(std::max(1, hooks.chunk));
    for (std::size_t start = 0; start < pending.size(); start += chunk) {
        const std::size_t count = std::min(chunk, pending.size() - start);
        std::vector<std::vector<ReplicateRecord>> results(count);
        parallel_for(count, spec.threads, [&](std::size_t k) {
            results[k] = run_replicate(spec, pending[start + k]);
        });
        for (auto& r : results) {
            for (auto& rec : r) records.push_back(std::move(rec));
        }
        if (hooks.checkpoint) {
            auto sorted = summarize(spec, records).records;
            hooks.checkpoint(sorted);
        }
    }
    return summarize(spec, std::move(records));
}

std::string cell_name(const ScenarioSpec& s) {
    std::string name = "s" + std::to_string(s.id) + "_" + to_string(s.model) + "_" + to_string(s.structure) +
                       "_J" + std::to_string(s.categories) + "_N" + std::to_string(s.subjects);
    if (s.structure == Structure::grouped) name += "_m" + std::to_string(s.group_size);
    if (s.id == 0 || s.diagnostic != scenario_preset(s.id).diagnostic) {
        name += std::string("_") + to_string(s.diagnostic);
    }
    return name;
}

std::vector<PlotData> summarize_to_plots(const ScenarioSummary& summary) {
    const auto& spec = summary.spec;
    std::string cell = "J = " + std::to_string(spec.categories) + ", N = " + std::to_string(spec.subjects);
    if (spec.structure == Structure::grouped) cell += ", m = " + std::to_string(spec.group_size);
    std::vector<PlotData> plots;
    if (!is_distance(spec.diagnostic)) {
        for (const auto* c : {&summary.null_cell, &summary.correct_cell}) {
            std::vector<double> p;
            for (const auto& r : summary.records) {
                if (r.ok && r.fitted == c->fitted) p.push_back(r.value);
            }
            auto plot = fixed_bin_histogram(p, kHistogramBins, 0.0, 1.0,
                                            std::string("Shapiro-Wilk p-values, ") + to_string(c->fitted) +
                                                " model, " + cell);
            plot.x_label = "p-value";
            plot.annotations["fitted"] = to_string(c->fitted);
            plot.annotations["rejection_rate"] = std::isnan(c->rejection_rate) ? nlohmann::json(nullptr)
                                                                               : nlohmann::json(c->rejection_rate);
            plot.annotations["excluded"] = c->excluded;
            plots.push_back(std::move(plot));
        }
    } else {
        std::vector<BoxSummary> boxes;
        for (const auto* c : {&summary.null_cell, &summary.correct_cell}) {
            if (c->box) boxes.push_back(*c->box);
        }
        if (!boxes.empty()) {
            plots.push_back(boxplot(std::move(boxes),
                                    std::string("Points outside the envelope (") + to_string(spec.diagnostic) +
                                        "), " + cell,
                                    "% of points outside"));
        }
    }
    return plots;
}

PlotData grid_boxplot(const std::vector<ScenarioSummary>& summaries, const std::string& title) {
    std::vector<BoxSummary> boxes;
    for (const auto& s : summaries) {
        for (const auto* c : {&s.null_cell, &s.correct_cell}) {
            if (!c->box) continue;
            auto b = *c->box;
            b.label = "J" + std::to_string(s.spec.categories) + " N" + std::to_string(s.spec.subjects) + " " +
                      to_string(c->fitted);
            boxes.push_back(std::move(b));
        }
    }
    return boxplot(std::move(boxes), title, "% of points outside");
}

std::vector<ScenarioSpec> parse_scenario_config(std::istream& in) {
    std::map<std::string, std::string> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("scenario config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ValidationError("scenario config line " + std::to_string(line_no) + ": empty key or value");
        }
        if (!entries.emplace(key, value).second) {
            throw ValidationError("scenario config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }

    ScenarioSpec base;
    if (auto it = entries.find("scenario"); it != entries.end()) {
        base = scenario_preset(static_cast<int>(parse_integer("scenario", it->second)));
        entries.erase(it);
    }
    std::vector<int> Js{base.categories};
    std::vector<int> Ns{base.subjects};
    std::vector<int> ms{base.group_size};
    std::vector<Diagnostic> diagnostics{base.diagnostic};

    auto int_list = [](const std::string& key, const std::string& value) {
        std::vector<int> out;
        for (const auto& item : split_list(value)) out.push_back(static_cast<int>(parse_integer(key, item)));
        return out;
    };

    for (const auto& [key, value] : entries) {
        if (key == "model") {
            base.model = parse_sim_model(value);
        } else if (key == "structure") {
            base.structure = parse_structure(value);
        } else if (key == "J") {
            Js = int_list(key, value);
        } else if (key == "N") {
            Ns = int_list(key, value);
        } else if (key == "m") {
            ms = int_list(key, value);
        } else if (key == "R") {
            base.replicates = static_cast<int>(parse_integer(key, value));
        } else if (key == "seed") {
            base.seed = parse_seed(value);
        } else if (key == "diagnostic") {
            diagnostics.clear();
            for (const auto& item : split_list(value)) diagnostics.push_back(parse_diagnostic(item));
        } else if (key == "S") {
            base.simulations = static_cast<int>(parse_integer(key, value));
        } else if (key == "level") {
            base.level = parse_real(key, value);
        } else if (key == "threads") {
            const auto t = parse_integer(key, value);
            if (t < 1) throw ValidationError("scenario config: threads must be positive");
            base.threads = static_cast<unsigned>(t);
        } else if (key == "theta") {
            base.theta.clear();
            for (const auto& item : split_list(value)) base.theta.push_back(parse_real(key, item));
        } else {
            throw ValidationError("scenario config: unknown key '" + key + "'");
        }
    }

    std::vector<ScenarioSpec> out;
    for (Diagnostic d : diagnostics) {
        for (int J : Js) {
            for (int N : Ns) {
                for (int m : ms) {
                    ScenarioSpec s = base;
                    s.diagnostic = d;
                    s.categories = J;
                    s.subjects = N;
                    s.group_size = m;
                    validate(s);
                    out.push_back(std::move(s));
                }
            }
        }
    }
    return out;
}

std::vector<ScenarioSpec> load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario config '" + path + "'");
    return parse_scenario_config(in);
}

void write_replicate_csv(std::ostream& out, const ScenarioSpec& spec, const std::vector<ReplicateRecord>& records) {
    out << "scenario,model,structure,J,N,m,diagnostic,replicate,fitted,status,statistic,value,iterations,error\n";
    const std::string m = spec.structure == Structure::grouped ? std::to_string(spec.group_size) : "1";
    for (const auto& r : records) {
        out << spec.id << ',' << to_string(spec.model) << ',' << to_string(spec.structure) << ','
            << spec.categories << ',' << spec.subjects << ',' << m << ',' << to_string(spec.diagnostic) << ','
            << r.replicate << ',' << to_string(r.fitted) << ',' << (r.ok ? "ok" : "failed") << ','
            << (r.ok ? format_double(r.statistic) : "") << ',' << (r.ok ? format_double(r.value) : "") << ','
            << r.iterations << ',' << csv_escape(r.error) << '\n';
    }
}

std::vector<ReplicateRecord> read_replicate_csv(std::istream& in, const ScenarioSpec& spec) {
    const auto table = read_csv(in);
    auto col = [&](const char* name) {
        const int c = table.column(name);
        if (c < 0) throw ValidationError(std::string("replicate CSV lacks column '") + name + "'");
        return static_cast<std::size_t>(c);
    };
    const auto c_scn = col("scenario"), c_J = col("J"), c_N = col("N"), c_rep = col("replicate"),
               c_fit = col("fitted"), c_status = col("status"), c_stat = col("statistic"), c_val = col("value"),
               c_it = col("iterations"), c_err = col("error"), c_diag = col("diagnostic");
    std::vector<ReplicateRecord> out;
    for (const auto& row : table.rows) {
        if (row[c_scn] != std::to_string(spec.id) || row[c_J] != std::to_string(spec.categories) ||
            row[c_N] != std::to_string(spec.subjects) || row[c_diag] != to_string(spec.diagnostic)) {
            throw ValidationError("replicate CSV belongs to a different scenario");
        }
        ReplicateRecord r;
        r.replicate = static_cast<int>(parse_integer("replicate", row[c_rep]));
        if (row[c_fit] == "null") {
            r.fitted = FittedPredictor::null_model;
        } else if (row[c_fit] == "correct") {
            r.fitted = FittedPredictor::correct;
        } else {
            throw ValidationError("replicate CSV: bad fitted value '" + row[c_fit] + "'");
        }
        r.ok = row[c_status] == "ok";
        if (r.ok) {
            r.statistic = parse_real("statistic", row[c_stat]);
            r.value = parse_real("value", row[c_val]);
        }
        r.iterations = static_cast<int>(parse_integer("iterations", row[c_it]));
        r.error = row[c_err];
        out.push_back(std::move(r));
    }
    return out;
}

nlohmann::json to_json(const ScenarioSpec& s) {
    nlohmann::json j;
    j["scenario"] = s.id;
    j["model"] = to_string(s.model);
    j["structure"] = to_string(s.structure);
    j["J"] = s.categories;
    j["N"] = s.subjects;
    if (s.structure == Structure::grouped) j["m"] = s.group_size;
    j["R"] = s.replicates;
    j["seed"] = s.seed;
    j["diagnostic"] = to_string(s.diagnostic);
    if (is_distance(s.diagnostic)) {
        j["S"] = s.simulations;
        j["level"] = s.level;
    }
    j["theta"] = resolved_theta(s);
    j["theta_overridden"] = !s.theta.empty();
    return j;
}

nlohmann::json to_json(const ScenarioSummary& summary) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["cell"] = cell_name(summary.spec);
    j["spec"] = to_json(summary.spec);
    j["null"] = to_json(summary.null_cell);
    j["correct"] = to_json(summary.correct_cell);
    return j;
}

}  // namespace polydiag
