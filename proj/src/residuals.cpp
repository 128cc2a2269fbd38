#include "polydiag/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polydiag/errors.hpp"
#include "polydiag/numerics.hpp"
#include "polydiag/rng.hpp"

namespace polydiag {

namespace {

constexpr double kCdfFloor = 1e-10;
constexpr double kMaxCondition = 1e12;

void require_same_data(const FittedModel& model, const PolytomousDataset& data) {
    if (model.n_obs != data.n() ||
        static_cast<std::size_t>(model.fitted_probs.cols()) != data.categories()) {
        throw ValidationError("residuals: model was not fitted to this dataset");
    }
}

}  // namespace

ProbabilityVector fitted_probability_vector(const FittedModel& model, std::size_t i) {
    const auto row = model.fitted_probs.row(static_cast<Eigen::Index>(i));
    const double sum = row.sum();
    std::vector<double> p(static_cast<std::size_t>(row.size()));
    for (Eigen::Index j = 0; j < row.size(); ++j) p[static_cast<std::size_t>(j)] = row[j] / sum;
    return ProbabilityVector(std::move(p), 1e-9);
}

Eigen::MatrixXd ordinary_residuals(const FittedModel& model, const PolytomousDataset& data) {
    require_same_data(model, data);
    Eigen::MatrixXd r(model.fitted_probs.rows(), model.fitted_probs.cols());
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        const auto& y = data.response(static_cast<std::size_t>(i));
        const double m = y.total();
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
            r(i, j) = (y[static_cast<std::size_t>(j)] - m * model.fitted_probs(i, j)) / m;
        }
    }
    return r;
}

PearsonResiduals pearson_residuals(const FittedModel& model, const PolytomousDataset& data) {
    require_same_data(model, data);
    PearsonResiduals out;
    out.values.resize(model.fitted_probs.rows(), model.fitted_probs.cols());
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
        const auto& y = data.response(static_cast<std::size_t>(i));
        const double m = y.total();
        for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
            const double p = model.fitted_probs(i, j);
            if (p <= 0.0 || p >= 1.0) {
                out.values(i, j) = std::numeric_limits<double>::quiet_NaN();
                ++out.non_finite;
                continue;
            }
            out.values(i, j) = (y[static_cast<std::size_t>(j)] - m * p) / std::sqrt(m * p * (1.0 - p));
        }
    }
    return out;
}

Eigen::MatrixXd deviance_residuals(const FittedModel& model, const PolytomousDataset& data) {
    if (data.grouped()) {
        throw ValidationError("deviance residuals are defined for individual data only");
    }
    require_same_data(model, data);
    Eigen::MatrixXd d(model.fitted_probs.rows(), model.fitted_probs.cols());
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        const auto& y = data.response(static_cast<std::size_t>(i));
        for (Eigen::Index j = 0; j < d.cols(); ++j) {
            const double p = model.fitted_probs(i, j);
            const int yij = y[static_cast<std::size_t>(j)];
            // (y - 1) log(1 - p) - y log(p), with the vanishing term dropped.
            const double half_dev = yij == 1 ? -std::log(p) : -std::log1p(-p);
            const double mag = std::sqrt(2.0 * std::max(0.0, half_dev));
            d(i, j) = (yij - p) < 0.0 ? -mag : mag;
        }
    }
    return d;
}

double randomized_cdf_value(const CountVector& y, const ProbabilityVector& pi, double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("randomized_cdf_value: u must lie in (0, 1)");
    const int m = y.total();
    std::vector<int> limits(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) limits[j] = m - y[j];
    const double value = rectangular_cdf(limits, m, pi) + u * multinomial_pmf(y, pi);
    return std::clamp(value, kCdfFloor, 1.0 - kCdfFloor);
}

Eigen::VectorXd standardize(const Eigen::VectorXd& values) {
    const auto n = values.size();
    if (n < 2) throw NumericalError("standardization needs at least two residuals");
    const double mean = values.mean();
    const Eigen::VectorXd centred = values.array() - mean;
    const double sd = std::sqrt(centred.squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) {
        throw NumericalError("standardization failed: residuals have zero spread");
    }
    return centred / sd;
}

QuantileResiduals quantile_residuals(const FittedModel& model, const PolytomousDataset& data,
                                     std::uint64_t seed) {
    require_same_data(model, data);
    const auto n = static_cast<Eigen::Index>(data.n());
    QuantileResiduals out;
    out.quantile.resize(n);
    out.cdf_values.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        RngStream stream(seed, idx);
        const double f = randomized_cdf_value(data.response(idx), fitted_probability_vector(model, idx),
                                              stream.uniform());
        out.cdf_values[i] = f;
        out.quantile[i] = normal_quantile(f);
    }
    out.standardized = standardize(out.quantile);
    return out;
}

ResidualDistances residual_distances(const Eigen::MatrixXd& r, std::size_t reference,
                                     MahalanobisMode mode) {
    const Eigen::Index n = r.rows();
    const Eigen::Index J = r.cols();
    if (n <= J) {
        throw NumericalError("Mahalanobis distance needs more subjects than categories");
    }
    ResidualDistances out;
    out.euclidean = r.rowwise().norm();

    auto& cov = out.covariance;
    cov.mode = mode;
    cov.dropped_category = reference;
    cov.full = Eigen::MatrixXd::Zero(J, J);
    for (Eigen::Index i = 0; i < n; ++i) cov.full.noalias() += r.row(i).transpose() * r.row(i);
    cov.full /= static_cast<double>(n);

    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < J; ++j) {
        if (static_cast<std::size_t>(j) != reference) keep.push_back(j);
    }
    const auto q = static_cast<Eigen::Index>(keep.size());
    cov.reduced.resize(q, q);
    Eigen::MatrixXd reduced_r(n, q);
    for (Eigen::Index a = 0; a < q; ++a) {
        reduced_r.col(a) = r.col(keep[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < q; ++b) {
            cov.reduced(a, b) = cov.full(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.reduced);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    cov.condition_number = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();

    out.mahalanobis.resize(n);
    if (mode == MahalanobisMode::drop_reference) {
        if (!(cov.condition_number <= kMaxCondition)) {
            throw NumericalError(
                "reduced residual covariance is numerically singular (condition number " +
                std::to_string(cov.condition_number) + "); use pseudo-inverse mode");
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(cov.reduced);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::VectorXd v = reduced_r.row(i).transpose();
            out.mahalanobis[i] = std::max(0.0, v.dot(ldlt.solve(v)));
        }
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full_eig(cov.full);
        const Eigen::VectorXd& ev = full_eig.eigenvalues();
        const double cutoff = 1e-10 * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
        Eigen::VectorXd inv = Eigen::VectorXd::Zero(J);
        for (Eigen::Index j = 0; j < J; ++j) {
            if (ev[j] > cutoff) inv[j] = 1.0 / ev[j];
        }
        const Eigen::MatrixXd pinv =
            full_eig.eigenvectors() * inv.asDiagonal() * full_eig.eigenvectors().transpose();
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::VectorXd v = r.row(i).transpose();
            out.mahalanobis[i] = std::max(0.0, v.dot(pinv * v));
        }
    }
    return out;
}

ResidualDistances residual_distances(const FittedModel& model, const PolytomousDataset& data,
                                     MahalanobisMode mode) {
    if (!data.grouped()) {
        throw ValidationError("residual distances are defined for grouped data only");
    }
    return residual_distances(ordinary_residuals(model, data), model.layout.reference, mode);
}

ResidualSet compute_residuals(const FittedModel& model, const PolytomousDataset& data,
                              std::uint64_t seed, MahalanobisMode mode) {
    ResidualSet set;
    set.structure = data.structure();
    set.randomization_seed = seed;
    set.ordinary = ordinary_residuals(model, data);
    set.pearson = pearson_residuals(model, data);
    if (set.pearson.non_finite > 0) {
        set.warnings.push_back(std::to_string(set.pearson.non_finite) +
                               " Pearson components undefined (fitted probability 0 or 1)");
    }
    if (!data.grouped()) set.deviance = deviance_residuals(model, data);
    set.quantile = quantile_residuals(model, data, seed);
    if (data.grouped()) {
        try {
            set.distances = residual_distances(set.ordinary, model.layout.reference, mode);
        } catch (const NumericalError& e) {
            set.warnings.push_back(std::string("distances unavailable: ") + e.what());
        }
    }
    return set;
}

}  // namespace polydiag
