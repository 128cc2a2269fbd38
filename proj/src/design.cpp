#include "polydiag/design.hpp"

#include <cmath>

#include "polydiag/errors.hpp"

namespace polydiag {

namespace {

struct CodedColumn {
    std::string name;
    Eigen::VectorXd values;
};

std::vector<CodedColumn> code_variable(const Covariate& c, Eigen::Index n) {
    std::vector<CodedColumn> out;
    if (!c.is_factor()) {
        out.push_back({c.name, Eigen::Map<const Eigen::VectorXd>(c.values.data(), n)});
        return out;
    }
    if (c.levels.size() < 2) {
        throw ValidationError("factor '" + c.name + "' has fewer than two levels");
    }
    for (std::size_t level = 1; level < c.levels.size(); ++level) {
        CodedColumn col{c.name + "[" + c.levels[level] + "]", Eigen::VectorXd::Zero(n)};
        for (Eigen::Index i = 0; i < n; ++i) {
            if (static_cast<std::size_t>(c.values[static_cast<std::size_t>(i)]) == level) {
                col.values[i] = 1.0;
            }
        }
        out.push_back(std::move(col));
    }
    return out;
}

}  // namespace

DesignMatrix build_design(const PolytomousDataset& data, const ModelFormula& formula) {
    const auto n = static_cast<Eigen::Index>(data.n());
    DesignMatrix d;
    std::vector<CodedColumn> columns;

    for (std::size_t t = 0; t < formula.terms.size(); ++t) {
        const Term& term = formula.terms[t];
        std::vector<CodedColumn> acc{{"", Eigen::VectorXd::Ones(n)}};
        for (const auto& var : term.variables) {
            const Covariate& cov = data.covariate(var);
            auto coded = code_variable(cov, n);
            if (cov.is_factor() && !d.factor_coding.count(cov.name)) {
                auto& names = d.factor_coding[cov.name];
                for (const auto& c : coded) names.push_back(c.name);
            }
            std::vector<CodedColumn> next;
            for (const auto& a : acc) {
                for (const auto& b : coded) {
                    next.push_back({a.name.empty() ? b.name : a.name + ":" + b.name,
                                    a.values.cwiseProduct(b.values)});
                }
            }
            acc = std::move(next);
        }
        for (auto& c : acc) {
            d.column_term.push_back(t);
            columns.push_back(std::move(c));
        }
    }

    d.matrix.resize(n, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        d.matrix.col(col) = columns[k].values;
        d.column_names.push_back(columns[k].name);
        const double lo = columns[k].values.minCoeff();
        const double hi = columns[k].values.maxCoeff();
        if (hi - lo == 0.0) {
            d.warnings.push_back("column '" + columns[k].name +
                                 "' is constant and confounded with the intercept");
        }
    }
    return d;
}

}  // namespace polydiag
