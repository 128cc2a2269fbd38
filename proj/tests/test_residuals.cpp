#include <doctest.h>

#include <cmath>
#include <vector>

#include "polydiag/errors.hpp"
#include "polydiag/fit.hpp"
#include "polydiag/formula.hpp"
#include "polydiag/numerics.hpp"
#include "polydiag/residuals.hpp"
#include "polydiag/simlab.hpp"
#include "support.hpp"

using namespace polydiag;

namespace {

// A model whose fitted probabilities are given directly, one row per subject.
FittedModel fixed_model(const Eigen::MatrixXd& probs, Structure structure) {
    FittedModel m;
    m.fitted_probs = probs;
    m.n_obs = static_cast<std::size_t>(probs.rows());
    m.structure = structure;
    m.layout.categories = static_cast<std::size_t>(probs.cols());
    m.layout.reference = 0;
    for (Eigen::Index j = 0; j < probs.cols(); ++j) m.category_labels.push_back("c" + std::to_string(j));
    return m;
}

PolytomousDataset dataset_of(Structure structure, std::size_t J, const std::vector<std::vector<int>>& rows) {
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < J; ++j) labels.push_back("c" + std::to_string(j));
    std::vector<CountVector> y;
    for (const auto& r : rows) y.emplace_back(r);
    return PolytomousDataset(structure, labels, y, {});
}

Eigen::MatrixXd rows_of(const std::vector<std::vector<double>>& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

FittedModel wine_m3(const PolytomousDataset& wine) {
    return fit_mle(wine, parse_formula("cultivar ~ magnesium + phenols"));
}

}  // namespace

TEST_CASE("ordinary residuals") {
    const auto grouped = dataset_of(Structure::grouped, 3, {{2, 3, 5}});
    const auto gm = fixed_model(rows_of({{0.2, 0.3, 0.5}}), Structure::grouped);
    const auto rg = ordinary_residuals(gm, grouped);
    for (int j = 0; j < 3; ++j) CHECK(std::fabs(rg(0, j)) < 1e-15);

    const auto indiv = dataset_of(Structure::individual, 3, {{0, 0, 1}});
    const auto im = fixed_model(rows_of({{0.2, 0.3, 0.5}}), Structure::individual);
    const auto ri = ordinary_residuals(im, indiv);
    CHECK(ri(0, 0) == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(ri(0, 1) == doctest::Approx(-0.3).epsilon(1e-15));
    CHECK(ri(0, 2) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("ordinary residual vectors sum to zero on fitted models") {
    const auto wine = testsupport::load_wine();
    const auto r = ordinary_residuals(wine_m3(wine), wine);
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        CHECK(std::fabs(r.row(i).sum()) < 1e-12);
        for (Eigen::Index j = 0; j < r.cols(); ++j) CHECK(std::fabs(r(i, j)) < 1.0);
    }
    const auto student = testsupport::load_student_grouped();
    const auto fit = fit_mle(student, parse_formula("y ~ math"));
    const auto rg = ordinary_residuals(fit, student);
    for (Eigen::Index i = 0; i < rg.rows(); ++i) CHECK(std::fabs(rg.row(i).sum()) < 1e-12);
}

TEST_CASE("pearson residuals") {
    const auto grouped = dataset_of(Structure::grouped, 3, {{4, 3, 3}, {2, 3, 5}});
    const auto gm = fixed_model(rows_of({{0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}}), Structure::grouped);
    const auto p = pearson_residuals(gm, grouped);
    CHECK(p.values(0, 0) == doctest::Approx(2.0 / std::sqrt(1.6)).epsilon(1e-14));
    CHECK(p.values(0, 0) == doctest::Approx(1.5811).epsilon(1e-4));
    for (int j = 0; j < 3; ++j) CHECK(std::fabs(p.values(1, j)) < 1e-15);
    CHECK(p.non_finite == 0);

    const auto indiv = dataset_of(Structure::individual, 2, {{1, 0}});
    const auto im = fixed_model(rows_of({{0.5, 0.5}}), Structure::individual);
    CHECK(pearson_residuals(im, indiv).values(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

    const auto degenerate = fixed_model(rows_of({{1.0, 0.0}}), Structure::individual);
    const auto flagged = pearson_residuals(degenerate, indiv);
    CHECK(flagged.non_finite == 2);
    CHECK(std::isnan(flagged.values(0, 0)));
}

TEST_CASE("deviance residuals") {
    const auto indiv = dataset_of(Structure::individual, 2, {{1, 0}});
    const auto im = fixed_model(rows_of({{0.5, 0.5}}), Structure::individual);
    const auto d = deviance_residuals(im, indiv);
    CHECK(d(0, 0) == doctest::Approx(std::sqrt(2 * std::log(2.0))).epsilon(1e-14));
    CHECK(d(0, 0) == doctest::Approx(1.1774).epsilon(1e-4));
    CHECK(d(0, 1) == doctest::Approx(-1.1774).epsilon(1e-4));

    const auto near_one = fixed_model(rows_of({{1 - 1e-12, 1e-12}}), Structure::individual);
    CHECK(std::fabs(deviance_residuals(near_one, indiv)(0, 0)) < 1e-5);

    const auto grouped = dataset_of(Structure::grouped, 2, {{1, 1}});
    const auto gm = fixed_model(rows_of({{0.5, 0.5}}), Structure::grouped);
    CHECK_THROWS_AS(deviance_residuals(gm, grouped), ValidationError);
}

TEST_CASE("randomized cdf value examples") {
    const ProbabilityVector half({0.25, 0.5, 0.25});
    CHECK(randomized_cdf_value(CountVector::one_hot(3, 1), half, 0.5) == doctest::Approx(0.75).epsilon(1e-14));

    const ProbabilityVector p({0.3, 0.7});
    CHECK(randomized_cdf_value(CountVector::one_hot(2, 0), p, 1e-15) == doctest::Approx(0.7).epsilon(1e-12));

    const ProbabilityVector even({0.5, 0.5});
    CHECK(randomized_cdf_value(CountVector({1, 1}), even, 0.5) == doctest::Approx(0.75).epsilon(1e-14));

    CHECK(normal_quantile(0.75) == doctest::Approx(0.6744897501960817).epsilon(1e-14));
}

TEST_CASE("randomized cdf value is clamped") {
    const ProbabilityVector spread({0.3, 0.3, 0.4});
    CHECK(randomized_cdf_value(CountVector({1, 1, 1}), spread, 0.9) == 1 - 1e-10);

    const ProbabilityVector certain({1.0, 0.0});
    const double v = randomized_cdf_value(CountVector::one_hot(2, 1), certain, 0.5);
    CHECK(v == 1 - 1e-10);
    CHECK(std::isfinite(normal_quantile(v)));
}

TEST_CASE("randomized cdf value increases strictly in u below the clamp") {
    // F(m - y) + u f(y) can exceed one for grouped counts, where the clamp
    // flattens it; strict increase is checked where the value stays inside.
    RngStream s(21, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const int J = 2 + static_cast<int>(s.below(4));
        const auto pi = testsupport::random_probs(J, s);
        const int m = 1 + static_cast<int>(s.below(6));
        std::vector<int> y(static_cast<std::size_t>(J), 0);
        for (int k = 0; k < m; ++k) ++y[s.below(static_cast<std::uint64_t>(J))];
        const CountVector cv(y);
        if (randomized_cdf_value(cv, pi, 0.99) >= 1 - 1e-10) continue;
        double previous = randomized_cdf_value(cv, pi, 0.01);
        for (int k = 2; k < 100; ++k) {
            const double next = randomized_cdf_value(cv, pi, k / 100.0);
            CHECK(next > previous);
            previous = next;
        }
    }
}

TEST_CASE("randomized cdf value agrees with enumeration for grouped counts") {
    RngStream s(22, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const int J = 2 + static_cast<int>(s.below(3));
        const int m = 1 + static_cast<int>(s.below(6));
        const auto pi = testsupport::random_probs(J, s);
        std::vector<int> y(static_cast<std::size_t>(J), 0);
        for (int k = 0; k < m; ++k) ++y[s.below(static_cast<std::uint64_t>(J))];
        std::vector<int> limits(y.size());
        for (std::size_t j = 0; j < y.size(); ++j) limits[j] = m - y[j];
        const double u = s.uniform();
        const double expected =
            testsupport::enumerated_cdf(limits, m, pi) + u * multinomial_pmf(CountVector(y), pi);
        CHECK(randomized_cdf_value(CountVector(y), pi, u) ==
              doctest::Approx(std::clamp(expected, 1e-10, 1 - 1e-10)).epsilon(1e-12));
    }
}

TEST_CASE("two-category residuals relate to the Bernoulli randomized residual") {
    // With Z = 1{second category} and p its probability, the Bernoulli residual
    // is F(Z - 1) + u P(Z). A second-category observation gives the same value;
    // a first-category observation gives the mirror image 1 - value(1 - u).
    RngStream s(23, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const double p = 0.02 + 0.96 * s.uniform();
        const ProbabilityVector pi({1 - p, p});
        const double u = s.uniform();
        const double success = randomized_cdf_value(CountVector::one_hot(2, 1), pi, u);
        CHECK(success == doctest::Approx((1 - p) + u * p).epsilon(1e-14));
        const double failure = randomized_cdf_value(CountVector::one_hot(2, 0), pi, u);
        const double bernoulli_failure = (1 - u) * (1 - p);
        CHECK(failure == doctest::Approx(1 - bernoulli_failure).epsilon(1e-14));
        CHECK(normal_quantile(failure) == doctest::Approx(-normal_quantile(bernoulli_failure)).epsilon(1e-9));
    }
}

TEST_CASE("quantile residuals") {
    const auto wine = testsupport::load_wine();
    const auto fit = wine_m3(wine);
    const auto q = quantile_residuals(fit, wine, 5);
    REQUIRE(q.quantile.size() == 178);
    CHECK(std::fabs(q.standardized.mean()) < 1e-10);
    const double sd = std::sqrt((q.standardized.array() - q.standardized.mean()).square().sum() / 177.0);
    CHECK(sd == doctest::Approx(1.0).epsilon(1e-10));
    for (Eigen::Index i = 0; i < q.quantile.size(); ++i) {
        CHECK(q.quantile[i] == doctest::Approx(normal_quantile(q.cdf_values[i])).epsilon(1e-15));
    }

    // Subject i uses its own stream, so a draw is reproducible in isolation.
    RngStream s7(5, 7);
    const double u = s7.uniform();
    const double expected = randomized_cdf_value(wine.response(7), fitted_probability_vector(fit, 7), u);
    CHECK(q.cdf_values[7] == doctest::Approx(expected).epsilon(1e-15));

    const auto again = quantile_residuals(fit, wine, 5);
    CHECK(again.quantile == q.quantile);
    const auto other = quantile_residuals(fit, wine, 6);
    CHECK(other.quantile != q.quantile);
}

TEST_CASE("standardize") {
    Eigen::VectorXd v(4);
    v << 1, 2, 3, 4;
    const auto s = standardize(v);
    CHECK(std::fabs(s.mean()) < 1e-15);
    CHECK(s[3] == doctest::Approx(1.5 / std::sqrt(5.0 / 3.0)).epsilon(1e-14));
    CHECK_THROWS_AS(standardize(Eigen::VectorXd::Constant(5, 0.3)), NumericalError);
    CHECK_THROWS_AS(standardize(Eigen::VectorXd::Constant(1, 0.3)), NumericalError);
}

TEST_CASE("identical cdf values cannot be standardized") {
    const auto d = dataset_of(Structure::individual, 2, {{0, 1}, {0, 1}, {0, 1}});
    const auto m = fixed_model(rows_of({{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}}), Structure::individual);
    CHECK_THROWS_AS(quantile_residuals(m, d, 1), NumericalError);
}

TEST_CASE("distance examples") {
    Eigen::MatrixXd r(1, 3);
    r << 0.3, -0.1, -0.2;
    Eigen::MatrixXd several(4, 3);
    several << 0.3, -0.1, -0.2, 0, 0, 0, -0.2, 0.3, -0.1, 0.1, 0.1, -0.2;
    const auto d = residual_distances(several, 0);
    CHECK(d.euclidean[0] == doctest::Approx(std::sqrt(0.14)).epsilon(1e-14));
    CHECK(d.euclidean[0] == doctest::Approx(0.374166).epsilon(1e-6));
    CHECK(d.euclidean[1] == 0.0);
    CHECK(d.mahalanobis[1] == 0.0);

    // C is the zero-centred second moment with divisor n.
    const Eigen::MatrixXd c = several.transpose() * several / 4.0;
    CHECK((d.covariance.full - c).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((d.covariance.reduced - c.bottomRightCorner(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
    for (Eigen::Index i = 0; i < 4; ++i) {
        const Eigen::VectorXd z = several.row(i).tail(2).transpose();
        CHECK(d.mahalanobis[i] == doctest::Approx(z.dot(c.bottomRightCorner(2, 2).inverse() * z)).epsilon(1e-12));
    }
}

TEST_CASE("identity covariance gives the squared reduced norm") {
    // Reduced coordinates (±1, 0) and (0, ±1) have identity second moment / 2;
    // scaling by sqrt(2) makes it exactly the identity.
    const double a = std::sqrt(2.0);
    Eigen::MatrixXd r(4, 3);
    r << -a, a, 0, a, -a, 0, -a, 0, a, a, 0, -a;
    const auto d = residual_distances(r, 0);
    CHECK((d.covariance.reduced - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    for (Eigen::Index i = 0; i < 4; ++i) {
        CHECK(d.mahalanobis[i] == doctest::Approx(r.row(i).tail(2).squaredNorm()).epsilon(1e-14));
    }
}

TEST_CASE("mahalanobis distance is invariant under linear maps") {
    RngStream s(24, 0);
    const int n = 30;
    Eigen::MatrixXd z(n, 3);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) z(i, j) = s.normal();
    }
    const auto base = residual_distances(z, 0, MahalanobisMode::drop_reference);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd a(2, 2);
        do {
            for (int k = 0; k < 4; ++k) a(k / 2, k % 2) = s.normal();
        } while (std::fabs(a.determinant()) < 0.1);
        Eigen::MatrixXd mapped = z;
        mapped.rightCols(2) = z.rightCols(2) * a.transpose();
        mapped.col(0) = -mapped.rightCols(2).rowwise().sum();
        const auto d = residual_distances(mapped, 0, MahalanobisMode::drop_reference);
        for (int i = 0; i < n; ++i) {
            CHECK(d.mahalanobis[i] == doctest::Approx(base.mahalanobis[i]).epsilon(1e-9));
            CHECK(d.mahalanobis[i] >= 0.0);
            CHECK(d.euclidean[i] >= 0.0);
        }
    }
}

TEST_CASE("pseudo-inverse mode agrees with dropping the reference") {
    const auto student = testsupport::load_student_grouped();
    const auto fit = fit_mle(student, parse_formula("y ~ math"));
    const auto drop = residual_distances(fit, student, MahalanobisMode::drop_reference);
    const auto pinv = residual_distances(fit, student, MahalanobisMode::pseudo_inverse);
    REQUIRE(drop.mahalanobis.size() == pinv.mahalanobis.size());
    for (Eigen::Index i = 0; i < drop.mahalanobis.size(); ++i) {
        CHECK(pinv.mahalanobis[i] == doctest::Approx(drop.mahalanobis[i]).epsilon(1e-8));
    }
    CHECK(drop.covariance.condition_number > 1.0);
}

TEST_CASE("singular reduced covariance is reported") {
    Eigen::MatrixXd r(5, 3);
    for (int i = 0; i < 5; ++i) r.row(i) << -0.2 * i, 0.1 * i, 0.1 * i;
    CHECK_THROWS_AS(residual_distances(r, 0, MahalanobisMode::drop_reference), NumericalError);
    CHECK_NOTHROW(residual_distances(r, 0, MahalanobisMode::pseudo_inverse));
}

TEST_CASE("distances require grouped data") {
    const auto wine = testsupport::load_wine();
    CHECK_THROWS_AS(residual_distances(wine_m3(wine), wine), ValidationError);
}

TEST_CASE("residual set") {
    const auto student = testsupport::load_student_grouped();
    const auto fit = fit_mle(student, parse_formula("y ~ math"));
    const auto set = compute_residuals(fit, student, 9);
    CHECK(set.structure == Structure::grouped);
    CHECK(set.randomization_seed == 9);
    CHECK(set.distances.has_value());
    CHECK_FALSE(set.deviance.has_value());
    CHECK(set.quantile.quantile == quantile_residuals(fit, student, 9).quantile);

    const auto wine = testsupport::load_wine();
    const auto wset = compute_residuals(wine_m3(wine), wine, 9);
    CHECK(wset.deviance.has_value());
    CHECK_FALSE(wset.distances.has_value());
}

TEST_CASE("mahalanobis distances sum to n(J - 1)") {
    // With C the second moment of the same residuals, sum_i r_i' C^{-1} r_i =
    // trace(C^{-1} n C); a common rescaling of all residuals leaves d^M unchanged.
    const auto student = testsupport::load_student_grouped();
    for (const char* f : {"prog ~ 1", "prog ~ math"}) {
        const auto fit = fit_mle(student, parse_formula(f));
        const auto d = residual_distances(fit, student);
        CHECK(d.mahalanobis.sum() == doctest::Approx(2.0 * student.n()).epsilon(1e-10));
        const auto scaled = residual_distances(3.0 * ordinary_residuals(fit, student), 0);
        for (Eigen::Index i = 0; i < d.mahalanobis.size(); ++i) {
            CHECK(scaled.mahalanobis[i] == doctest::Approx(d.mahalanobis[i]).epsilon(1e-10));
        }
    }
}
