#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polydiag/dataset.hpp"
#include "polydiag/fit.hpp"
#include "polydiag/multinom.hpp"

namespace polydiag {

enum class MahalanobisMode {
    /// Invert the covariance of the J-1 non-reference coordinates.
    drop_reference,
    /// Moore-Penrose inverse of the full J x J covariance.
    pseudo_inverse,
};

/// Second-moment matrix of grouped ordinary residuals about the zero vector.
struct ResidualCovariance {
    Eigen::MatrixXd full;     // J x J, singular: residual rows sum to zero
    Eigen::MatrixXd reduced;  // (J-1) x (J-1), reference coordinate removed
    std::size_t dropped_category = 0;
    MahalanobisMode mode = MahalanobisMode::drop_reference;
    double condition_number = 0.0;
};

/// y_i - pi_i (individual) or (y_i - m_i pi_i) / m_i (grouped); n x J.
Eigen::MatrixXd ordinary_residuals(const FittedModel& model, const PolytomousDataset& data);

struct PearsonResiduals {
    /// n x J; NaN where the fitted probability is 0 or 1.
    Eigen::MatrixXd values;
    std::size_t non_finite = 0;
};

/// (y_ij - m_i pi_ij) / sqrt(m_i pi_ij (1 - pi_ij)).
PearsonResiduals pearson_residuals(const FittedModel& model, const PolytomousDataset& data);

/// Individual data only: sign(y - pi) sqrt(2[(y - 1) log(1 - pi) - y log(pi)]).
/// Throws ValidationError for grouped data.
Eigen::MatrixXd deviance_residuals(const FittedModel& model, const PolytomousDataset& data);

/// Randomized distribution value F(m - y; pi) + u f(y; pi), clamped to
/// [1e-10, 1 - 1e-10]. For individual data m = 1.
double randomized_cdf_value(const CountVector& y, const ProbabilityVector& pi, double u);

struct QuantileResiduals {
    Eigen::VectorXd quantile;      // r^Q
    Eigen::VectorXd standardized;  // r^S: centred, unit sample sd (divisor n - 1)
    Eigen::VectorXd cdf_values;    // F* before the normal quantile
};

/// Subject i draws its uniform from RngStream(seed, i).
QuantileResiduals quantile_residuals(const FittedModel& model, const PolytomousDataset& data,
                                     std::uint64_t seed);

/// Centres and scales to mean 0, sample sd 1. Throws NumericalError for n < 2
/// or zero spread.
Eigen::VectorXd standardize(const Eigen::VectorXd& values);

struct ResidualDistances {
    Eigen::VectorXd euclidean;    // sqrt(r'r)
    Eigen::VectorXd mahalanobis;  // r' C^{-1} r, no square root
    ResidualCovariance covariance;
};

/// Grouped data only. Throws NumericalError when the reduced covariance has
/// condition number above 1e12 in drop_reference mode.
ResidualDistances residual_distances(const FittedModel& model, const PolytomousDataset& data,
                                     MahalanobisMode mode = MahalanobisMode::drop_reference);

/// Distances computed from a ready residual matrix (n x J).
ResidualDistances residual_distances(const Eigen::MatrixXd& ordinary, std::size_t reference,
                                     MahalanobisMode mode = MahalanobisMode::drop_reference);

/// Everything above for one fit.
struct ResidualSet {
    Structure structure = Structure::individual;
    Eigen::MatrixXd ordinary;
    PearsonResiduals pearson;
    std::optional<Eigen::MatrixXd> deviance;
    QuantileResiduals quantile;
    std::optional<ResidualDistances> distances;
    std::uint64_t randomization_seed = 0;
    std::vector<std::string> warnings;
};

ResidualSet compute_residuals(const FittedModel& model, const PolytomousDataset& data,
                              std::uint64_t seed,
                              MahalanobisMode mode = MahalanobisMode::drop_reference);

/// Row i of the fitted probabilities as a validated vector.
ProbabilityVector fitted_probability_vector(const FittedModel& model, std::size_t i);

}  // namespace polydiag
