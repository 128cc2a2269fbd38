#pragma once

#include <functional>
#include <string>
#include <vector>

#include "polydiag/dataset.hpp"
#include "polydiag/multinom.hpp"
#include "polydiag/rng.hpp"

namespace testsupport {

/// Calls fn for every count vector of length J summing to m.
inline void for_each_composition(int J, int m, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> y(static_cast<std::size_t>(J), 0);
    std::function<void(int, int)> rec = [&](int j, int left) {
        if (j == J - 1) {
            y[static_cast<std::size_t>(j)] = left;
            fn(y);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            y[static_cast<std::size_t>(j)] = v;
            rec(j + 1, left - v);
        }
    };
    rec(0, m);
}

/// Calls fn for every limit vector in {0..hi}^J.
inline void for_each_limit(int J, int hi, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> n(static_cast<std::size_t>(J), 0);
    std::function<void(int)> rec = [&](int j) {
        if (j == J) {
            fn(n);
            return;
        }
        for (int v = 0; v <= hi; ++v) {
            n[static_cast<std::size_t>(j)] = v;
            rec(j + 1);
        }
    };
    rec(0);
}

/// Brute-force P(Y <= limits) by summing the pmf over the rectangle.
inline double enumerated_cdf(const std::vector<int>& limits, int m, const polydiag::ProbabilityVector& pi) {
    double total = 0.0;
    for_each_composition(static_cast<int>(limits.size()), m, [&](const std::vector<int>& y) {
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[j] > limits[j]) return;
        }
        total += polydiag::multinomial_pmf(polydiag::CountVector(y), pi);
    });
    return total;
}

/// Random probability vector with entries bounded away from zero.
inline polydiag::ProbabilityVector random_probs(int J, polydiag::RngStream& s) {
    std::vector<double> p(static_cast<std::size_t>(J));
    double total = 0;
    for (auto& v : p) {
        v = 0.05 + s.uniform();
        total += v;
    }
    for (auto& v : p) v /= total;
    return polydiag::ProbabilityVector(p, 1e-12);
}

inline std::string data_path(const std::string& name) { return std::string(POLYDIAG_DATA_DIR) + "/" + name; }

inline polydiag::PolytomousDataset load_wine() {
    polydiag::DatasetSchema schema;
    schema.response = "cultivar";
    schema.covariates = {{"magnesium", polydiag::CovariateKind::continuous, {}},
                         {"phenols", polydiag::CovariateKind::continuous, {}}};
    return polydiag::load_csv(data_path("wine.csv"), schema);
}

inline polydiag::PolytomousDataset load_student_grouped() {
    polydiag::DatasetSchema schema;
    schema.structure = polydiag::Structure::grouped;
    schema.covariates = {{"math", polydiag::CovariateKind::continuous, {}}};
    return polydiag::load_csv(data_path("student_grouped.csv"), schema);
}

inline polydiag::PolytomousDataset load_student_individual() {
    polydiag::DatasetSchema schema;
    schema.response = "prog";
    schema.categories = {"academic", "general", "vocational"};
    schema.covariates = {{"math", polydiag::CovariateKind::continuous, {}}};
    return polydiag::load_csv(data_path("student.csv"), schema);
}

}  // namespace testsupport
