#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polydiag/dataset.hpp"
#include "polydiag/formula.hpp"

namespace polydiag {

/// Covariate columns of the linear predictor, one row per subject. The
/// intercept is not a column.
struct DesignMatrix {
    Eigen::MatrixXd matrix;
    std::vector<std::string> column_names;
    /// Index into the formula's terms for each column.
    std::vector<std::size_t> column_term;
    /// Factor name -> its dummy column names (first level is the reference).
    std::map<std::string, std::vector<std::string>> factor_coding;
    std::vector<std::string> warnings;

    Eigen::Index rows() const { return matrix.rows(); }
    Eigen::Index cols() const { return matrix.cols(); }
};

/// Continuous terms are copied, an L-level factor contributes L-1 dummy
/// columns, and interactions are elementwise products of the coded columns.
DesignMatrix build_design(const PolytomousDataset& data, const ModelFormula& formula);

}  // namespace polydiag
