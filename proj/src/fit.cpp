#include "polydiag/fit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "polydiag/errors.hpp"
#include "polydiag/numerics.hpp"

namespace polydiag {

namespace {

struct Workspace {
    Eigen::MatrixXd xa;      // n x (p+1), leading intercept column
    Eigen::MatrixXd counts;  // n x J
    Eigen::VectorXd trials;  // m_i
    ParameterLayout layout;
};

Workspace make_workspace(const PolytomousDataset& data, const Eigen::MatrixXd& x,
                         const ParameterLayout& layout) {
    const auto n = static_cast<Eigen::Index>(data.n());
    Workspace w;
    w.layout = layout;
    w.xa.resize(n, x.cols() + 1);
    w.xa.col(0).setOnes();
    w.xa.rightCols(x.cols()) = x;
    w.counts.resize(n, static_cast<Eigen::Index>(layout.categories));
    w.trials.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& y = data.response(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < layout.categories; ++j) {
            w.counts(i, static_cast<Eigen::Index>(j)) = y[j];
        }
        w.trials[i] = y.total();
    }
    return w;
}

Eigen::Map<const Eigen::MatrixXd> coefficient_matrix(const Eigen::VectorXd& params,
                                                     const ParameterLayout& layout) {
    return {params.data(), static_cast<Eigen::Index>(layout.block()),
            static_cast<Eigen::Index>(layout.categories - 1)};
}

// Kernel log-likelihood and the n x J probability matrix.
double evaluate(const Workspace& w, const Eigen::VectorXd& params, Eigen::MatrixXd* probs) {
    const auto& layout = w.layout;
    const Eigen::MatrixXd eta = w.xa * coefficient_matrix(params, layout);
    const Eigen::Index n = eta.rows();
    const auto free = static_cast<Eigen::Index>(layout.categories - 1);
    if (probs) probs->resize(n, static_cast<Eigen::Index>(layout.categories));
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double top = std::max(0.0, eta.row(i).maxCoeff());
        double den = std::exp(-top);
        for (Eigen::Index k = 0; k < free; ++k) den += std::exp(eta(i, k) - top);
        const double log_norm = top + std::log(den);
        ll -= w.trials[i] * log_norm;
        for (Eigen::Index k = 0; k < free; ++k) {
            const auto j = static_cast<Eigen::Index>(layout.category_of_block(static_cast<std::size_t>(k)));
            ll += w.counts(i, j) * eta(i, k);
            if (probs) (*probs)(i, j) = std::exp(eta(i, k) - log_norm);
        }
        if (probs) (*probs)(i, static_cast<Eigen::Index>(layout.reference)) = std::exp(-log_norm);
    }
    return ll;
}

void score_and_information(const Workspace& w, const Eigen::MatrixXd& probs, Eigen::VectorXd& score,
                           Eigen::MatrixXd& info) {
    const auto& layout = w.layout;
    const auto q = static_cast<Eigen::Index>(layout.block());
    const auto free = static_cast<Eigen::Index>(layout.categories - 1);
    score.resize(q * free);
    info.resize(q * free, q * free);
    Eigen::VectorXd weight(w.xa.rows());
    for (Eigen::Index k = 0; k < free; ++k) {
        const auto jk = static_cast<Eigen::Index>(layout.category_of_block(static_cast<std::size_t>(k)));
        const Eigen::VectorXd resid = w.counts.col(jk) - w.trials.cwiseProduct(probs.col(jk));
        score.segment(k * q, q) = w.xa.transpose() * resid;
        for (Eigen::Index l = 0; l <= k; ++l) {
            const auto jl = static_cast<Eigen::Index>(layout.category_of_block(static_cast<std::size_t>(l)));
            weight = -probs.col(jk).cwiseProduct(probs.col(jl));
            if (k == l) weight += probs.col(jk);
            weight = weight.cwiseProduct(w.trials);
            const Eigen::MatrixXd block = w.xa.transpose() * weight.asDiagonal() * w.xa;
            info.block(k * q, l * q, q, q) = block;
            if (k != l) info.block(l * q, k * q, q, q) = block.transpose();
        }
    }
}

// Solves info * delta = rhs; falls back to a small ridge when the Cholesky
// factorization fails.
bool solve_spd(const Eigen::MatrixXd& info, const Eigen::VectorXd& rhs, Eigen::VectorXd& out,
               bool& ridge_used) {
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() == Eigen::Success) {
        out = llt.solve(rhs);
        if (out.allFinite()) return true;
    }
    const double ridge = 1e-8 * info.trace() / static_cast<double>(info.rows());
    Eigen::MatrixXd damped = info;
    damped.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt2(damped);
    if (llt2.info() != Eigen::Success) return false;
    out = llt2.solve(rhs);
    ridge_used = true;
    return out.allFinite();
}

void check_rank(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
    Eigen::MatrixXd xa(x.rows(), x.cols() + 1);
    xa.col(0).setOnes();
    xa.rightCols(x.cols()) = x;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xa);
    if (qr.rank() == xa.cols()) return;
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index r = qr.rank(); r < xa.cols(); ++r) {
        const auto c = perm[r];
        if (!cols.empty()) cols += ", ";
        cols += c == 0 ? std::string("(intercept)") : names[static_cast<std::size_t>(c - 1)];
    }
    throw NumericalError("singular information matrix: design columns are collinear; dependent: " +
                         cols);
}

std::size_t resolve_reference(const PolytomousDataset& data, const ModelFormula& formula) {
    if (!formula.reference_category) return 0;
    return data.category_index(*formula.reference_category);
}

}  // namespace

Eigen::MatrixXd predict_probabilities(const Eigen::VectorXd& params, const Eigen::MatrixXd& x,
                                      const ParameterLayout& layout) {
    Workspace w;
    w.layout = layout;
    w.xa.resize(x.rows(), x.cols() + 1);
    w.xa.col(0).setOnes();
    w.xa.rightCols(x.cols()) = x;
    w.counts = Eigen::MatrixXd::Zero(x.rows(), static_cast<Eigen::Index>(layout.categories));
    w.trials = Eigen::VectorXd::Zero(x.rows());
    Eigen::MatrixXd probs;
    evaluate(w, params, &probs);
    return probs;
}

double log_multinomial_constant(const PolytomousDataset& data) {
    if (!data.grouped()) return 0.0;
    double c = 0.0;
    for (const auto& y : data.responses()) {
        c += log_gamma(y.total() + 1.0);
        for (int v : y.values()) c -= log_gamma(v + 1.0);
    }
    return c;
}

double log_likelihood(const Eigen::VectorXd& params, const PolytomousDataset& data,
                      const DesignMatrix& x, std::size_t reference) {
    ParameterLayout layout{data.categories(), reference, static_cast<std::size_t>(x.cols())};
    if (static_cast<std::size_t>(params.size()) != layout.size() ||
        static_cast<std::size_t>(x.rows()) != data.n()) {
        throw DomainError("log_likelihood: dimension mismatch");
    }
    const Workspace w = make_workspace(data, x.matrix, layout);
    return evaluate(w, params, nullptr) + log_multinomial_constant(data);
}

std::uint64_t dataset_fingerprint(const PolytomousDataset& data) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    mix(static_cast<std::uint64_t>(data.structure()));
    for (const auto& l : data.category_labels()) {
        for (char c : l) mix(static_cast<unsigned char>(c));
        mix(0xff);
    }
    for (const auto& y : data.responses()) {
        for (int v : y.values()) mix(static_cast<std::uint64_t>(v));
    }
    return h;
}

Eigen::VectorXd FittedModel::standard_errors() const {
    return vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

Eigen::MatrixXd FittedModel::linear_predictors() const {
    Eigen::MatrixXd xa(design.rows(), design.cols() + 1);
    xa.col(0).setOnes();
    xa.rightCols(design.cols()) = design.matrix;
    return xa * coefficient_matrix(params, layout);
}

FittedModel fit_mle(const PolytomousDataset& data, const ModelFormula& formula,
                    const FitOptions& options) {
    return fit_mle(data, formula, build_design(data, formula), options);
}

FittedModel fit_mle(const PolytomousDataset& data, const ModelFormula& formula,
                    const DesignMatrix& design, const FitOptions& options) {
    if (static_cast<std::size_t>(design.rows()) != data.n()) {
        throw DomainError("fit_mle: design rows do not match the data");
    }
    check_rank(design.matrix, design.column_names);

    FittedModel fit;
    fit.formula = formula;
    fit.design = design;
    fit.layout = {data.categories(), resolve_reference(data, formula),
                  static_cast<std::size_t>(design.cols())};
    fit.category_labels = data.category_labels();
    fit.n_params = fit.layout.size();
    fit.n_obs = data.n();
    fit.structure = data.structure();
    fit.data_fingerprint = dataset_fingerprint(data);
    fit.loglik_constant = log_multinomial_constant(data);
    fit.warnings = design.warnings;
    for (std::size_t k = 0; k + 1 < data.categories(); ++k) {
        const auto& label = data.category_labels()[fit.layout.category_of_block(k)];
        fit.parameter_names.push_back(label + ":(intercept)");
        for (const auto& c : design.column_names) fit.parameter_names.push_back(label + ":" + c);
    }
    if (data.total_trials() < fit.n_params) {
        fit.warnings.push_back("fewer observations than parameters");
    }

    const Workspace w = make_workspace(data, design.matrix, fit.layout);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fit.n_params));
    Eigen::MatrixXd probs;
    Eigen::VectorXd score;
    Eigen::MatrixXd info;
    Eigen::VectorXd delta;
    double ll = evaluate(w, theta, &probs);
    const auto relative_change = [](double a, double b) { return std::fabs(a - b) / (std::fabs(b) + 1.0); };

    // After the log-likelihood settles, full Newton steps continue until the
    // step itself is negligible, so the estimate is accurate beyond what the
    // log-likelihood can resolve.
    constexpr int kMaxPolish = 5;
    int polish = 0;
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        fit.iterations = iter;
        score_and_information(w, probs, score, info);
        if (!solve_spd(info, score, delta, fit.ridge_used)) {
            fit.warnings.push_back("information matrix could not be factorized");
            break;
        }
        const double rounding = 1e-13 * (std::fabs(ll) + 1.0);
        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd candidate;
        Eigen::MatrixXd candidate_probs;
        double candidate_ll = ll;
        for (int h = 0; h <= options.max_halvings; ++h) {
            candidate = theta + step * delta;
            candidate_ll = evaluate(w, candidate, &candidate_probs);
            if (std::isfinite(candidate_ll) && candidate_ll >= ll - rounding) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (fit.converged) break;
            fit.warnings.push_back("step halving exhausted without improving the log-likelihood");
            break;
        }
        const double change = relative_change(candidate_ll, ll);
        const double step_size = (step * delta).cwiseAbs().maxCoeff();
        theta = std::move(candidate);
        probs = std::move(candidate_probs);
        ll = candidate_ll;
        if (change < options.tolerance) fit.converged = true;
        if (fit.converged) {
            const bool negligible = step_size <= 1e-12 * (1.0 + theta.cwiseAbs().maxCoeff());
            if (negligible || ++polish > kMaxPolish) break;
        }
    }
    if (!fit.converged) {
        fit.warnings.push_back("Newton-Raphson did not converge in " +
                               std::to_string(fit.iterations) + " iterations");
    }

    fit.params = theta;
    fit.fitted_probs = probs;
    fit.loglik = ll + fit.loglik_constant;
    score_and_information(w, probs, score, info);
    fit.max_abs_score = score.cwiseAbs().maxCoeff();
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() == Eigen::Success) {
        fit.vcov = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
    } else {
        fit.vcov = info.completeOrthogonalDecomposition().pseudoInverse();
        fit.warnings.push_back("information matrix singular at the estimate; vcov is a pseudo-inverse");
    }
    fit.vcov = 0.5 * (fit.vcov + fit.vcov.transpose()).eval();
    if (fit.ridge_used) fit.warnings.push_back("ridge fallback used in Newton steps");
    if (theta.size() > 0 && theta.cwiseAbs().maxCoeff() > options.separation_threshold) {
        fit.warnings.push_back("possible separation: |coefficient| exceeds " +
                               std::to_string(options.separation_threshold));
    }
    return fit;
}

LrTest lr_test(const FittedModel& full, const FittedModel& reduced) {
    if (full.data_fingerprint != reduced.data_fingerprint || full.n_obs != reduced.n_obs) {
        throw ValidationError("lr_test: models were fitted to different data");
    }
    const std::set<std::string> cols(full.design.column_names.begin(), full.design.column_names.end());
    for (const auto& c : reduced.design.column_names) {
        if (!cols.count(c)) {
            throw ValidationError("lr_test: models are not nested; column '" + c +
                                  "' is missing from the larger model");
        }
    }
    LrTest r;
    r.df = static_cast<int>(full.n_params) - static_cast<int>(reduced.n_params);
    if (r.df < 0) throw ValidationError("lr_test: the reduced model has more parameters");
    double stat = 2.0 * (full.kernel_loglik() - reduced.kernel_loglik());
    if (stat < -1e-8) {
        throw NumericalError("lr_test: negative statistic " + std::to_string(stat) +
                             " signals a convergence failure");
    }
    r.statistic = std::max(stat, 0.0);
    r.p_value = r.df > 0 ? chi_square_sf(r.statistic, r.df) : 1.0;
    return r;
}

double aic(const FittedModel& model) {
    return -2.0 * model.loglik + 2.0 * static_cast<double>(model.n_params);
}

double aic_kernel(const FittedModel& model) {
    return -2.0 * model.kernel_loglik() + 2.0 * static_cast<double>(model.n_params);
}

}  // namespace polydiag
