#include "polydiag/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "polydiag/csv.hpp"
#include "polydiag/dataset.hpp"
#include "polydiag/envelope.hpp"
#include "polydiag/errors.hpp"
#include "polydiag/fit.hpp"
#include "polydiag/formula.hpp"
#include "polydiag/plot.hpp"
#include "polydiag/residuals.hpp"
#include "polydiag/rng.hpp"
#include "polydiag/shapiro_wilk.hpp"
#include "polydiag/simlab.hpp"

namespace fs = std::filesystem;

namespace polydiag {

namespace {

constexpr std::uint64_t kEnvelopeKey = 7;
constexpr double kSuitableThreshold = 5.0;

class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool wants(const RunConfig& c, const std::string& format) {
    return std::find(c.formats.begin(), c.formats.end(), format) != c.formats.end();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + path.string() + "'");
    f << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct Loaded {
    PolytomousDataset data;
    std::vector<ModelFormula> formulas;
};

Loaded load_inputs(const RunConfig& c) {
    if (c.data.empty()) throw ValidationError("--data is required");
    if (c.formulas.empty()) throw ValidationError("--formula is required");
    std::vector<ModelFormula> formulas;
    for (const auto& text : c.formulas) {
        auto f = parse_formula(text);
        if (c.reference) f.reference_category = *c.reference;
        if (!formulas.empty() && f.response != formulas.front().response) {
            throw ValidationError("all formulas must share the response '" + formulas.front().response + "'");
        }
        formulas.push_back(std::move(f));
    }
    std::vector<std::string> vars;
    auto add = [&vars](const std::string& v) {
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    };
    for (const auto& f : formulas) {
        for (const auto& v : f.variables()) add(v);
    }
    for (const auto& k : c.aggregate_by) add(k);
    for (const auto& fac : c.factors) {
        if (std::find(vars.begin(), vars.end(), fac) == vars.end()) {
            throw ValidationError("--factor '" + fac + "' is not used by any formula");
        }
    }
    if (c.grouped && !c.aggregate_by.empty()) {
        throw ValidationError("--aggregate-by applies to individual data; drop --grouped");
    }

    DatasetSchema schema;
    schema.structure = c.grouped ? Structure::grouped : Structure::individual;
    schema.response = formulas.front().response;
    schema.categories = c.categories;
    for (const auto& v : vars) {
        const bool factor = std::find(c.factors.begin(), c.factors.end(), v) != c.factors.end();
        schema.covariates.push_back({v, factor ? CovariateKind::factor : CovariateKind::continuous, {}});
    }
    auto data = load_csv(c.data, schema);
    if (!c.aggregate_by.empty()) data = data.aggregate_by(c.aggregate_by);
    return {std::move(data), std::move(formulas)};
}

nlohmann::json fit_report(const FittedModel& m) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["formula"] = m.formula.to_string();
    j["structure"] = to_string(m.structure);
    j["n_obs"] = m.n_obs;
    j["categories"] = m.category_labels;
    j["reference"] = m.category_labels[m.layout.reference];
    j["converged"] = m.converged;
    j["iterations"] = m.iterations;
    j["loglik"] = m.loglik;
    j["loglik_kernel"] = m.kernel_loglik();
    j["loglik_constant"] = m.loglik_constant;
    j["n_params"] = m.n_params;
    j["aic"] = aic(m);
    j["aic_kernel"] = aic_kernel(m);
    j["max_abs_score"] = m.max_abs_score;
    j["ridge_used"] = m.ridge_used;
    const auto se = m.standard_errors();
    nlohmann::json coefs = nlohmann::json::array();
    for (std::size_t k = 0; k < m.parameter_names.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        coefs.push_back({{"name", m.parameter_names[k]}, {"estimate", m.params[i]}, {"std_error", se[i]}});
    }
    j["coefficients"] = coefs;
    j["warnings"] = m.warnings;
    return j;
}

std::string coefficient_csv(const FittedModel& m) {
    std::ostringstream s;
    s << "parameter,estimate,std_error\n";
    const auto se = m.standard_errors();
    for (std::size_t k = 0; k < m.parameter_names.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        s << csv_escape(m.parameter_names[k]) << ',' << format_double(m.params[i]) << ','
          << format_double(se[i]) << '\n';
    }
    return s.str();
}

void print_fit(std::ostream& out, const FittedModel& m) {
    out << m.formula.to_string() << "  (" << to_string(m.structure) << ", n = " << m.n_obs
        << ", reference = " << m.category_labels[m.layout.reference] << ")\n";
    const auto se = m.standard_errors();
    for (std::size_t k = 0; k < m.parameter_names.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        out << "  " << std::left << std::setw(32) << m.parameter_names[k] << std::right << std::setw(12)
            << std::fixed << std::setprecision(5) << m.params[i] << std::setw(12) << se[i] << '\n';
    }
    out << std::setprecision(4) << "  loglik " << m.loglik << "  AIC " << aic(m);
    if (m.structure == Structure::grouped) out << "  (kernel AIC " << aic_kernel(m) << ")";
    out << "  iterations " << m.iterations << (m.converged ? "" : "  NOT CONVERGED") << '\n';
    out.unsetf(std::ios::floatfield);
    out << std::setprecision(6);
    for (const auto& w : m.warnings) out << "  warning: " << w << '\n';
}

void emit_plot(const RunConfig& c, const fs::path& dir, const std::string& stem, const PlotData& plot) {
    if (wants(c, "json")) write_json(dir / (stem + ".json"), to_json(plot));
    if (wants(c, "svg")) write_text(dir / (stem + ".svg"), render_svg(plot));
}

int cmd_fit(const RunConfig& c, std::ostream& out) {
    if (c.formulas.size() != 1) throw ValidationError("fit takes exactly one --formula");
    auto in = load_inputs(c);
    const auto m = fit_mle(in.data, in.formulas.front());
    const fs::path dir(c.out);
    if (wants(c, "json")) write_json(dir / "fit.json", fit_report(m));
    if (wants(c, "csv")) write_text(dir / "coefficients.csv", coefficient_csv(m));
    print_fit(out, m);
    return m.converged ? kExitOk : kExitNonConvergence;
}

int cmd_compare(const RunConfig& c, std::ostream& out) {
    if (c.formulas.size() < 2) throw ValidationError("compare needs at least two --formula models");
    auto in = load_inputs(c);
    std::vector<FittedModel> fits;
    bool all_converged = true;
    for (const auto& f : in.formulas) {
        fits.push_back(fit_mle(in.data, f));
        all_converged = all_converged && fits.back().converged;
    }
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["structure"] = to_string(in.data.structure());
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : fits) {
        models.push_back({{"formula", m.formula.to_string()}, {"loglik", m.loglik},
                          {"loglik_kernel", m.kernel_loglik()}, {"n_params", m.n_params},
                          {"aic", aic(m)}, {"aic_kernel", aic_kernel(m)}, {"converged", m.converged}});
    }
    j["models"] = models;

    std::ostringstream csv;
    csv << "reduced,full,lr,df,p_value,aic_reduced,aic_full,aic_kernel_reduced,aic_kernel_full\n";
    nlohmann::json tests = nlohmann::json::array();
    out << std::fixed << std::setprecision(4);
    for (std::size_t k = 0; k + 1 < fits.size(); ++k) {
        const auto& reduced = fits[k];
        const auto& full = fits[k + 1];
        const auto t = lr_test(full, reduced);
        tests.push_back({{"reduced", reduced.formula.to_string()}, {"full", full.formula.to_string()},
                         {"lr", t.statistic}, {"df", t.df}, {"p_value", t.p_value},
                         {"aic_reduced", aic(reduced)}, {"aic_full", aic(full)}});
        csv << csv_escape(reduced.formula.to_string()) << ',' << csv_escape(full.formula.to_string()) << ','
            << format_double(t.statistic) << ',' << t.df << ',' << format_double(t.p_value) << ','
            << format_double(aic(reduced)) << ',' << format_double(aic(full)) << ','
            << format_double(aic_kernel(reduced)) << ',' << format_double(aic_kernel(full)) << '\n';
        out << reduced.formula.to_string() << "  vs  " << full.formula.to_string() << ": LR = " << t.statistic
            << " on " << t.df << " df, p = " << std::setprecision(4) << std::scientific << t.p_value
            << std::fixed << '\n';
    }
    for (const auto& m : fits) {
        out << "  AIC " << std::setw(10) << aic(m);
        if (m.structure == Structure::grouped) out << "  (kernel " << aic_kernel(m) << ")";
        out << "  " << m.formula.to_string() << (m.converged ? "" : "  NOT CONVERGED") << '\n';
    }
    out.unsetf(std::ios::floatfield);
    j["tests"] = tests;
    const fs::path dir(c.out);
    if (wants(c, "json")) write_json(dir / "compare.json", j);
    if (wants(c, "csv")) write_text(dir / "compare.csv", csv.str());
    return all_converged ? kExitOk : kExitNonConvergence;
}

MahalanobisMode parse_mode(const std::string& s) {
    if (s == "drop_reference") return MahalanobisMode::drop_reference;
    if (s == "pseudo_inverse") return MahalanobisMode::pseudo_inverse;
    throw ValidationError("--mahalanobis-mode must be drop_reference or pseudo_inverse");
}

std::string residual_csv(const PolytomousDataset& data, const ResidualSet& r) {
    const auto& labels = data.category_labels();
    std::ostringstream s;
    s << "subject";
    for (const char* kind : {"ordinary", "pearson"}) {
        for (const auto& l : labels) s << ',' << csv_escape(std::string(kind) + "_" + l);
    }
    if (r.deviance) {
        for (const auto& l : labels) s << ',' << csv_escape("deviance_" + l);
    }
    s << ",cdf_value,quantile,standardized";
    if (r.distances) s << ",euclidean,mahalanobis";
    s << '\n';
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        s << i + 1;
        for (Eigen::Index j = 0; j < r.ordinary.cols(); ++j) s << ',' << format_double(r.ordinary(row, j));
        for (Eigen::Index j = 0; j < r.pearson.values.cols(); ++j) s << ',' << format_double(r.pearson.values(row, j));
        if (r.deviance) {
            for (Eigen::Index j = 0; j < r.deviance->cols(); ++j) s << ',' << format_double((*r.deviance)(row, j));
        }
        s << ',' << format_double(r.quantile.cdf_values[row]) << ',' << format_double(r.quantile.quantile[row])
          << ',' << format_double(r.quantile.standardized[row]);
        if (r.distances) {
            s << ',' << format_double(r.distances->euclidean[row]) << ','
              << format_double(r.distances->mahalanobis[row]);
        }
        s << '\n';
    }
    return s.str();
}

int cmd_diagnose(const RunConfig& c, std::ostream& out) {
    if (c.formulas.size() != 1) throw ValidationError("diagnose takes exactly one --formula");
    if (!c.seed) throw ValidationError("diagnose needs a seed");
    auto in = load_inputs(c);
    const auto& data = in.data;
    const auto m = fit_mle(data, in.formulas.front());
    print_fit(out, m);
    if (!m.converged) throw NonConvergence("model did not converge; diagnostics need a converged fit");

    const auto mode = parse_mode(c.mahalanobis_mode);
    const std::uint64_t seed = *c.seed;
    const auto residuals = compute_residuals(m, data, seed, mode);
    const fs::path dir(c.out);

    std::vector<double> rs(residuals.quantile.standardized.data(),
                           residuals.quantile.standardized.data() + residuals.quantile.standardized.size());
    const auto sw = shapiro_wilk(rs);

    nlohmann::json report;
    report["schema_version"] = kSchemaVersion;
    report["fit"] = fit_report(m);
    report["seed"] = seed;
    report["shapiro_wilk"] = {{"statistic", sw.w}, {"p_value", sw.p_value}};
    report["pearson_non_finite"] = residuals.pearson.non_finite;
    report["warnings"] = residuals.warnings;
    if (residuals.distances) report["covariance_condition_number"] = residuals.distances->covariance.condition_number;

    if (wants(c, "csv")) write_text(dir / "residuals.csv", residual_csv(data, residuals));

    emit_plot(c, dir, "histogram_quantile_residuals", histogram_plot(rs, "Standardized quantile residuals"));

    FittedAxis axis = data.grouped() ? FittedAxis::linear_predictor : FittedAxis::observed_probability;
    if (c.fitted_axis == "linear_predictor") axis = FittedAxis::linear_predictor;
    else if (c.fitted_axis == "observed_probability") axis = FittedAxis::observed_probability;
    else if (!c.fitted_axis.empty()) throw ValidationError("--fitted-axis must be observed_probability or linear_predictor");
    emit_plot(c, dir, "residuals_vs_fitted",
              residual_vs_fitted_plot(m, data, residuals.quantile.standardized, axis));

    std::vector<std::string> names = c.diagnostics;
    if (names.empty()) {
        names = {"quantile_residual"};
        if (data.grouped()) {
            names.push_back("euclidean");
            names.push_back("mahalanobis");
        }
    }
    out << "Shapiro-Wilk on standardized quantile residuals: W = " << sw.w << ", p = " << sw.p_value << '\n';
    nlohmann::json envelopes = nlohmann::json::array();
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto d = parse_diagnostic(names[k]);
        EnvelopeOptions opt;
        opt.simulations = c.simulations;
        opt.level = c.level;
        opt.seed = derive_seed(seed, {kEnvelopeKey, static_cast<std::uint64_t>(d)});
        opt.residual_seed = seed;
        opt.threads = c.threads;
        opt.mode = mode;
        const auto env = simulated_envelope(m, data, d, opt);
        const bool suitable = env.percent_outside <= kSuitableThreshold;
        envelopes.push_back({{"diagnostic", to_string(d)}, {"simulations", env.simulations}, {"level", env.level},
                             {"points_outside", env.points_outside}, {"percent_outside", env.percent_outside},
                             {"n", env.observed.size()}, {"refit_failures", env.refit_failures},
                             {"envelope_seed", env.seed}, {"verdict", suitable ? "suitable" : "lack of fit"}});
        emit_plot(c, dir, std::string("halfnormal_") + to_string(d),
                  halfnormal_plot(env, std::string("Half-normal plot with simulated envelope: ") + to_string(d)));
        out << "Envelope (" << to_string(d) << "): " << env.points_outside << " of " << env.observed.size()
            << " points outside (" << env.percent_outside << "%), " << (suitable ? "suitable" : "lack of fit")
            << '\n';
    }
    report["envelopes"] = envelopes;
    if (wants(c, "json")) write_json(dir / "diagnose.json", report);
    return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
    std::vector<ScenarioSpec> specs;
    if (!c.scenario_config.empty()) {
        if (c.scenario) throw ValidationError("use either --config or --scenario");
        specs = load_scenario_config(c.scenario_config);
    } else if (c.scenario) {
        specs.push_back(scenario_preset(*c.scenario));
    } else {
        throw ValidationError("simulate needs --config or --scenario");
    }
    for (auto& s : specs) {
        if (c.seed) s.seed = *c.seed;
        if (c.replicates) s.replicates = *c.replicates;
        s.threads = c.threads;
        validate(s);
    }

    const fs::path dir(c.out);
    std::vector<ScenarioSummary> summaries;
    nlohmann::json index = nlohmann::json::array();
    for (const auto& spec : specs) {
        const std::string name = cell_name(spec);
        const fs::path csv_path = dir / (name + "_replicates.csv");
        RunHooks hooks;
        if (c.resume && fs::exists(csv_path)) {
            std::ifstream f(csv_path);
            hooks.resume = read_replicate_csv(f, spec);
            out << name << ": resuming with " << hooks.resume.size() / 2 << " replicates done\n";
        }
        hooks.checkpoint = [&](const std::vector<ReplicateRecord>& records) {
            std::ostringstream s;
            write_replicate_csv(s, spec, records);
            write_text(csv_path, s.str());
        };
        auto summary = run_scenario(spec, hooks);
        std::ostringstream s;
        write_replicate_csv(s, spec, summary.records);
        write_text(csv_path, s.str());
        const auto j = to_json(summary);
        write_json(dir / (name + "_summary.json"), j);
        const auto plots = summarize_to_plots(summary);
        for (std::size_t k = 0; k < plots.size(); ++k) {
            std::string stem = name + "_" + (plots[k].kind == PlotKind::boxplot
                                                 ? std::string("boxplot")
                                                 : std::string("pvalues_") + plots[k].annotations["fitted"].get<std::string>());
            emit_plot(c, dir, stem, plots[k]);
        }
        index.push_back(j);
        out << name << ": ";
        for (const auto* cell : {&summary.null_cell, &summary.correct_cell}) {
            out << to_string(cell->fitted) << " ";
            if (std::isnan(cell->rejection_rate)) {
                out << "median outside " << cell->median << "% ";
            } else {
                out << "rejection " << 100.0 * cell->rejection_rate << "% ";
            }
            out << "(" << cell->completed << " ok, " << cell->excluded << " excluded)  ";
        }
        out << '\n';
        summaries.push_back(std::move(summary));
    }
    std::vector<ScenarioSummary> envelope_runs;
    for (const auto& s : summaries) {
        if (s.spec.diagnostic == Diagnostic::euclidean || s.spec.diagnostic == Diagnostic::mahalanobis) {
            envelope_runs.push_back(s);
        }
    }
    if (!envelope_runs.empty()) {
        emit_plot(c, dir, "envelope_grid_boxplot", grid_boxplot(envelope_runs, "Points outside the simulated envelope"));
    }
    write_json(dir / "simulate_summary.json", {{"schema_version", kSchemaVersion}, {"cells", index}});
    return kExitOk;
}

}  // namespace

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = c.command;
    j["data"] = c.data;
    j["grouped"] = c.grouped;
    j["formulas"] = c.formulas;
    j["categories"] = c.categories;
    j["factors"] = c.factors;
    j["reference"] = c.reference ? nlohmann::json(*c.reference) : nlohmann::json(nullptr);
    j["aggregate_by"] = c.aggregate_by;
    j["seed"] = c.seed ? nlohmann::json(*c.seed) : nlohmann::json(nullptr);
    j["diagnostics"] = c.diagnostics;
    j["simulations"] = c.simulations;
    j["level"] = c.level;
    j["threads"] = c.threads;
    j["mahalanobis_mode"] = c.mahalanobis_mode;
    j["fitted_axis"] = c.fitted_axis;
    j["formats"] = c.formats;
    j["out"] = c.out;
    j["scenario_config"] = c.scenario_config;
    j["scenario"] = c.scenario ? nlohmann::json(*c.scenario) : nlohmann::json(nullptr);
    j["replicates"] = c.replicates ? nlohmann::json(*c.replicates) : nlohmann::json(nullptr);
    j["resume"] = c.resume;
    return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion) {
            throw ValidationError("manifest schema_version " + j.at("schema_version").dump() + " is not supported");
        }
        RunConfig c;
        c.command = j.at("command").get<std::string>();
        c.data = j.at("data").get<std::string>();
        c.grouped = j.at("grouped").get<bool>();
        c.formulas = j.at("formulas").get<std::vector<std::string>>();
        c.categories = j.at("categories").get<std::vector<std::string>>();
        c.factors = j.at("factors").get<std::vector<std::string>>();
        if (!j.at("reference").is_null()) c.reference = j.at("reference").get<std::string>();
        c.aggregate_by = j.at("aggregate_by").get<std::vector<std::string>>();
        if (!j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
        c.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
        c.simulations = j.at("simulations").get<int>();
        c.level = j.at("level").get<double>();
        c.threads = j.at("threads").get<unsigned>();
        c.mahalanobis_mode = j.at("mahalanobis_mode").get<std::string>();
        c.fitted_axis = j.at("fitted_axis").get<std::string>();
        c.formats = j.at("formats").get<std::vector<std::string>>();
        c.out = j.at("out").get<std::string>();
        c.scenario_config = j.at("scenario_config").get<std::string>();
        if (!j.at("scenario").is_null()) c.scenario = j.at("scenario").get<int>();
        if (!j.at("replicates").is_null()) c.replicates = j.at("replicates").get<int>();
        c.resume = j.at("resume").get<bool>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed manifest: ") + e.what());
    }
}

int execute(RunConfig c, std::ostream& out, std::ostream& err) {
    try {
        for (const auto& f : c.formats) {
            if (f != "csv" && f != "json" && f != "svg") throw ValidationError("unknown --format '" + f + "'");
        }
        if (c.threads < 1) throw ValidationError("--threads must be at least 1");
        if (c.command == "diagnose" && !c.seed) {
            std::random_device rd;
            c.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
            out << "seed: " << *c.seed << " (generated; pass --seed " << *c.seed << " to reproduce)\n";
        }
        if (c.command == "simulate" && !c.seed && c.scenario) {
            c.seed = ScenarioSpec{}.seed;
        }
        fs::create_directories(c.out);
        write_json(fs::path(c.out) / "manifest.json", to_json(c));
        if (c.command == "fit") return cmd_fit(c, out);
        if (c.command == "compare") return cmd_compare(c, out);
        if (c.command == "diagnose") return cmd_diagnose(c, out);
        if (c.command == "simulate") return cmd_simulate(c, out);
        throw ValidationError("unknown command '" + c.command + "'");
    } catch (const NonConvergence& e) {
        err << "error: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const FormulaSyntaxError& e) {
        err << "error: " << e.what() << " (at position " << e.position() << ")\n";
        return kExitUsage;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Diagnostics for baseline-category logit models", "polydiag"};
    app.require_subcommand(1);
    RunConfig c;
    std::string categories;
    std::string aggregate;
    std::uint64_t seed = 0;
    std::string manifest;

    auto add_data = [&](CLI::App* sub) {
        sub->add_option("--data", c.data, "CSV file")->required();
        sub->add_flag("--grouped", c.grouped, "Rows are groups with count_<category> columns");
        sub->add_option("--categories", categories, "Ordered category labels, comma separated");
        sub->add_option("--factor", c.factors, "Covariate to treat as a factor (repeatable)");
        sub->add_option("--ref", c.reference, "Reference response category");
        sub->add_option("--aggregate-by", aggregate, "Group individual rows by these covariates");
        sub->add_option("--out", c.out, "Output directory")->capture_default_str();
        sub->add_option("--format", c.formats, "Output formats: csv, json, svg (repeatable)");
    };

    auto* fit = app.add_subcommand("fit", "Fit one model");
    add_data(fit);
    fit->add_option("--formula", c.formulas, "Model formula, e.g. \"y ~ a + b\"")->required();

    auto* compare = app.add_subcommand("compare", "Likelihood-ratio tests for a nested sequence");
    add_data(compare);
    compare->add_option("--formula", c.formulas, "Model formulas, smallest first (repeatable)")->required();

    auto* diagnose = app.add_subcommand("diagnose", "Residuals, Shapiro-Wilk and half-normal envelopes");
    add_data(diagnose);
    diagnose->add_option("--formula", c.formulas, "Model formula")->required();
    auto* seed_opt = diagnose->add_option("--seed", seed, "Randomization seed (generated when omitted)");
    diagnose->add_option("--diagnostic", c.diagnostics,
                         "quantile_residual, euclidean, mahalanobis or pearson (repeatable)");
    diagnose->add_option("--sims", c.simulations, "Envelope simulations")->capture_default_str();
    diagnose->add_option("--level", c.level, "Envelope level in percent")->capture_default_str();
    diagnose->add_option("--threads", c.threads, "Worker threads")->capture_default_str();
    diagnose->add_option("--mahalanobis-mode", c.mahalanobis_mode, "drop_reference or pseudo_inverse")
        ->capture_default_str();
    diagnose->add_option("--fitted-axis", c.fitted_axis, "observed_probability or linear_predictor");

    auto* simulate = app.add_subcommand("simulate", "Run simulation scenarios");
    simulate->add_option("--config", c.scenario_config, "Scenario file (key = value lines)");
    simulate->add_option("--scenario", c.scenario, "Preset scenario 1..6");
    simulate->add_option("--replicates", c.replicates, "Override R");
    auto* sim_seed = simulate->add_option("--seed", seed, "Override the master seed");
    simulate->add_option("--threads", c.threads, "Worker threads")->capture_default_str();
    simulate->add_option("--out", c.out, "Output directory")->capture_default_str();
    simulate->add_option("--format", c.formats, "Output formats: csv, json, svg (repeatable)");
    simulate->add_flag("--resume", c.resume, "Continue from existing replicate CSVs");

    auto* replay = app.add_subcommand("replay", "Re-run from a manifest.json");
    replay->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();
    std::string replay_out;
    replay->add_option("--out", replay_out, "Output directory (default: the manifest's)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (replay->parsed()) {
        std::ifstream f(manifest);
        if (!f) {
            err << "error: cannot open manifest '" << manifest << "'\n";
            return kExitUsage;
        }
        RunConfig rc;
        try {
            rc = run_config_from_json(nlohmann::json::parse(f));
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kExitUsage;
        }
        if (!replay_out.empty()) rc.out = replay_out;
        rc.resume = false;
        return execute(std::move(rc), out, err);
    }

    c.command = app.get_subcommands().front()->get_name();
    c.categories = split_commas(categories);
    c.aggregate_by = split_commas(aggregate);
    if ((seed_opt->count() > 0) || (sim_seed->count() > 0)) c.seed = seed;
    if (c.formats.empty()) c.formats = {"json", "csv"};
    return execute(std::move(c), out, err);
}

}  // namespace polydiag
