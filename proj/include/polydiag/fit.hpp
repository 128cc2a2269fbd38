#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polydiag/dataset.hpp"
#include "polydiag/design.hpp"
#include "polydiag/formula.hpp"

namespace polydiag {

/// Baseline-category logit coefficients, category-major: for the k-th
/// non-reference category (in label order) the block
/// [alpha_k, beta_k1, ..., beta_kp] starts at k * (p + 1).
struct ParameterLayout {
    std::size_t categories = 0;     // J
    std::size_t reference = 0;      // index of the baseline category
    std::size_t columns = 0;        // p
    std::size_t block() const { return columns + 1; }
    std::size_t size() const { return (categories - 1) * block(); }
    /// Category index of the k-th non-reference block.
    std::size_t category_of_block(std::size_t k) const { return k < reference ? k : k + 1; }
};

/// Fitted probabilities (n x J) for `params` on design `x`.
Eigen::MatrixXd predict_probabilities(const Eigen::VectorXd& params, const Eigen::MatrixXd& x,
                                      const ParameterLayout& layout);

/// Log-likelihood of `params`. Individual data gives l; grouped data gives l*,
/// including the log multinomial coefficients.
double log_likelihood(const Eigen::VectorXd& params, const PolytomousDataset& data,
                      const DesignMatrix& x, std::size_t reference = 0);

/// Sum over subjects of log[m_i! / (y_i1! ... y_iJ!)]; zero for individual data.
double log_multinomial_constant(const PolytomousDataset& data);

struct FitOptions {
    int max_iterations = 100;
    double tolerance = 1e-10;
    int max_halvings = 20;
    double separation_threshold = 30.0;
};

struct FittedModel {
    ModelFormula formula;
    DesignMatrix design;
    ParameterLayout layout;
    std::vector<std::string> category_labels;
    std::vector<std::string> parameter_names;

    Eigen::VectorXd params;
    Eigen::MatrixXd vcov;
    Eigen::MatrixXd fitted_probs;

    /// l for individual data, l* (with multinomial constant) for grouped.
    double loglik = 0.0;
    /// The multinomial-coefficient part of `loglik`.
    double loglik_constant = 0.0;
    std::size_t n_params = 0;
    std::size_t n_obs = 0;
    Structure structure = Structure::individual;
    std::uint64_t data_fingerprint = 0;

    bool converged = false;
    int iterations = 0;
    bool ridge_used = false;
    double max_abs_score = 0.0;
    std::vector<std::string> warnings;

    Eigen::VectorXd standard_errors() const;
    /// Log-likelihood without the multinomial constant.
    double kernel_loglik() const { return loglik - loglik_constant; }
    /// Linear predictors alpha_k + beta_k'x_i, n x (J-1), block order.
    Eigen::MatrixXd linear_predictors() const;
};

/// Newton-Raphson maximum likelihood from params = 0 with step halving.
/// Throws NumericalError when the design is rank deficient.
FittedModel fit_mle(const PolytomousDataset& data, const ModelFormula& formula,
                    const FitOptions& options = {});

/// Same, reusing an already built design matrix for `data`.
FittedModel fit_mle(const PolytomousDataset& data, const ModelFormula& formula,
                    const DesignMatrix& design, const FitOptions& options = {});

struct LrTest {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
};

/// Likelihood-ratio test of nested fits on the same data.
LrTest lr_test(const FittedModel& full, const FittedModel& reduced);

/// -2 loglik + 2 n_params, using the loglik convention of the fit.
double aic(const FittedModel& model);

/// AIC without the multinomial constant (differs from aic() for grouped data).
double aic_kernel(const FittedModel& model);

/// Hash of structure, labels and responses; equal fingerprints mean same data.
std::uint64_t dataset_fingerprint(const PolytomousDataset& data);

}  // namespace polydiag
