#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polydiag/csv.hpp"
#include "polydiag/multinom.hpp"

namespace polydiag {

enum class Structure { individual, grouped };

const char* to_string(Structure s);

enum class CovariateKind { continuous, factor };

/// One covariate column. Factors store level codes into `levels`; their
/// `values` hold the codes as doubles.
struct Covariate {
    std::string name;
    CovariateKind kind = CovariateKind::continuous;
    std::vector<double> values;
    std::vector<std::string> levels;

    bool is_factor() const { return kind == CovariateKind::factor; }
};

/// Individual or grouped nominal responses with their covariates.
///
/// Individual records carry one-hot responses (m_i = 1); grouped records carry
/// J counts summing to m_i >= 1. Immutable after construction.
class PolytomousDataset {
public:
    PolytomousDataset(Structure structure, std::vector<std::string> category_labels,
                      std::vector<CountVector> responses, std::vector<Covariate> covariates);

    Structure structure() const { return structure_; }
    bool grouped() const { return structure_ == Structure::grouped; }
    std::size_t n() const { return responses_.size(); }
    std::size_t categories() const { return labels_.size(); }
    const std::vector<std::string>& category_labels() const { return labels_; }
    std::size_t category_index(const std::string& label) const;

    const CountVector& response(std::size_t i) const { return responses_[i]; }
    const std::vector<CountVector>& responses() const { return responses_; }
    int group_size(std::size_t i) const { return responses_[i].total(); }
    std::size_t total_trials() const;

    const std::vector<Covariate>& covariates() const { return covariates_; }
    const Covariate* find_covariate(const std::string& name) const;
    const Covariate& covariate(const std::string& name) const;

    /// Same covariates and structure with new responses.
    PolytomousDataset with_responses(std::vector<CountVector> responses) const;

    /// Grouped dataset pooling subjects sharing identical values of `keys`.
    /// Groups are ordered by first appearance; covariates outside `keys` are
    /// dropped.
    PolytomousDataset aggregate_by(const std::vector<std::string>& keys) const;

    /// Individual dataset expanding each group into m_i one-hot records.
    PolytomousDataset disaggregate() const;

private:
    Structure structure_;
    std::vector<std::string> labels_;
    std::vector<CountVector> responses_;
    std::vector<Covariate> covariates_;
};

struct CovariateSpec {
    std::string name;
    CovariateKind kind = CovariateKind::continuous;
    /// Declared factor levels in coding order; empty means sorted distinct values.
    std::vector<std::string> levels;
};

/// Declares how CSV columns map onto a dataset. Factors are never inferred.
struct DatasetSchema {
    Structure structure = Structure::individual;
    /// Individual: name of the single category column.
    std::string response = "response";
    /// Ordered category labels. Empty: sorted distinct responses (individual)
    /// or the `count_<label>` columns in header order (grouped).
    std::vector<std::string> categories;
    /// Grouped: optional column of declared group sizes, validated when present.
    std::string group_size_column = "m";
    std::vector<CovariateSpec> covariates;
};

PolytomousDataset dataset_from_table(const CsvTable& table, const DatasetSchema& schema);
PolytomousDataset load_csv(const std::string& path, const DatasetSchema& schema);

/// Sorts labels numerically when they all parse as numbers, else lexicographically.
std::vector<std::string> sorted_levels(std::vector<std::string> values);

}  // namespace polydiag
