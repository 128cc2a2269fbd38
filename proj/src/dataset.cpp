#include "polydiag/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "polydiag/errors.hpp"

namespace polydiag {

const char* to_string(Structure s) {
    return s == Structure::individual ? "individual" : "grouped";
}

PolytomousDataset::PolytomousDataset(Structure structure, std::vector<std::string> category_labels,
                                     std::vector<CountVector> responses,
                                     std::vector<Covariate> covariates)
    : structure_(structure),
      labels_(std::move(category_labels)),
      responses_(std::move(responses)),
      covariates_(std::move(covariates)) {
    if (labels_.size() < 2) throw ValidationError("dataset: need at least two categories");
    if (std::set<std::string>(labels_.begin(), labels_.end()).size() != labels_.size()) {
        throw ValidationError("dataset: duplicate category label");
    }
    if (responses_.empty()) throw ValidationError("dataset: no records");
    for (std::size_t i = 0; i < responses_.size(); ++i) {
        const auto& y = responses_[i];
        if (y.size() != labels_.size()) {
            throw ValidationError("dataset: record " + std::to_string(i + 1) +
                                  " has the wrong number of categories");
        }
        if (structure_ == Structure::individual && y.total() != 1) {
            throw ValidationError("dataset: individual record " + std::to_string(i + 1) +
                                  " is not a single response");
        }
        if (y.total() < 1) {
            throw ValidationError("dataset: record " + std::to_string(i + 1) + " has group size 0");
        }
    }
    for (const auto& c : covariates_) {
        if (c.values.size() != responses_.size()) {
            throw ValidationError("dataset: covariate '" + c.name + "' has wrong length");
        }
    }
}

std::size_t PolytomousDataset::category_index(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw ValidationError("unknown category label '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t PolytomousDataset::total_trials() const {
    std::size_t total = 0;
    for (const auto& y : responses_) total += static_cast<std::size_t>(y.total());
    return total;
}

const Covariate* PolytomousDataset::find_covariate(const std::string& name) const {
    for (const auto& c : covariates_) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

const Covariate& PolytomousDataset::covariate(const std::string& name) const {
    if (const auto* c = find_covariate(name)) return *c;
    throw ValidationError("unknown covariate '" + name + "'");
}

PolytomousDataset PolytomousDataset::with_responses(std::vector<CountVector> responses) const {
    return PolytomousDataset(structure_, labels_, std::move(responses), covariates_);
}

PolytomousDataset PolytomousDataset::aggregate_by(const std::vector<std::string>& keys) const {
    std::vector<const Covariate*> key_cols;
    for (const auto& k : keys) key_cols.push_back(&covariate(k));

    std::map<std::vector<double>, std::size_t> group_of;
    std::vector<std::vector<int>> counts;
    std::vector<std::size_t> first_row;
    for (std::size_t i = 0; i < n(); ++i) {
        std::vector<double> key;
        for (const auto* c : key_cols) key.push_back(c->values[i]);
        auto [it, inserted] = group_of.emplace(key, counts.size());
        if (inserted) {
            counts.emplace_back(categories(), 0);
            first_row.push_back(i);
        }
        auto& g = counts[it->second];
        for (std::size_t j = 0; j < categories(); ++j) g[j] += responses_[i][j];
    }
    std::vector<CountVector> grouped;
    for (auto& c : counts) grouped.emplace_back(std::move(c));
    std::vector<Covariate> covs;
    for (const auto* c : key_cols) {
        Covariate out{c->name, c->kind, {}, c->levels};
        for (std::size_t r : first_row) out.values.push_back(c->values[r]);
        covs.push_back(std::move(out));
    }
    return PolytomousDataset(Structure::grouped, labels_, std::move(grouped), std::move(covs));
}

PolytomousDataset PolytomousDataset::disaggregate() const {
    std::vector<CountVector> rows;
    std::vector<Covariate> covs = covariates_;
    for (auto& c : covs) c.values.clear();
    for (std::size_t i = 0; i < n(); ++i) {
        for (std::size_t j = 0; j < categories(); ++j) {
            for (int k = 0; k < responses_[i][j]; ++k) {
                rows.push_back(CountVector::one_hot(categories(), j));
                for (std::size_t c = 0; c < covs.size(); ++c) {
                    covs[c].values.push_back(covariates_[c].values[i]);
                }
            }
        }
    }
    return PolytomousDataset(Structure::individual, labels_, std::move(rows), std::move(covs));
}

namespace {

bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN"; }

std::optional<double> parse_number(const std::string& s) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string where(std::size_t row) {
    return "row " + std::to_string(row + 1) + " (line " + std::to_string(row + 2) + ")";
}

std::size_t require_column(const CsvTable& t, const std::string& name) {
    const int c = t.column(name);
    if (c < 0) throw ValidationError("csv: missing column '" + name + "'");
    return static_cast<std::size_t>(c);
}

Covariate read_covariate(const CsvTable& t, const CovariateSpec& spec) {
    const std::size_t col = require_column(t, spec.name);
    Covariate cov{spec.name, spec.kind, {}, {}};
    cov.values.reserve(t.rows.size());
    if (spec.kind == CovariateKind::continuous) {
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& cell = t.rows[r][col];
            if (is_missing(cell)) {
                throw ValidationError("csv: missing value for '" + spec.name + "' at " + where(r));
            }
            auto v = parse_number(cell);
            if (!v) {
                throw ValidationError("csv: non-numeric value '" + cell + "' for continuous '" +
                                      spec.name + "' at " + where(r));
            }
            cov.values.push_back(*v);
        }
        return cov;
    }
    if (spec.levels.empty()) {
        std::vector<std::string> seen;
        for (const auto& row : t.rows) {
            if (!is_missing(row[col])) seen.push_back(row[col]);
        }
        cov.levels = sorted_levels(std::move(seen));
    } else {
        cov.levels = spec.levels;
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& cell = t.rows[r][col];
        if (is_missing(cell)) {
            throw ValidationError("csv: missing value for '" + spec.name + "' at " + where(r));
        }
        auto it = std::find(cov.levels.begin(), cov.levels.end(), cell);
        if (it == cov.levels.end()) {
            throw ValidationError("csv: undeclared level '" + cell + "' of factor '" + spec.name +
                                  "' at " + where(r));
        }
        cov.values.push_back(static_cast<double>(it - cov.levels.begin()));
    }
    return cov;
}

}  // namespace

std::vector<std::string> sorted_levels(std::vector<std::string> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    const bool numeric = std::all_of(values.begin(), values.end(),
                                     [](const std::string& s) { return parse_number(s).has_value(); });
    if (numeric) {
        std::stable_sort(values.begin(), values.end(), [](const std::string& a, const std::string& b) {
            return *parse_number(a) < *parse_number(b);
        });
    }
    return values;
}

PolytomousDataset dataset_from_table(const CsvTable& t, const DatasetSchema& schema) {
    if (t.rows.empty()) throw ValidationError("csv: no data rows");
    std::vector<std::string> labels = schema.categories;
    std::vector<CountVector> responses;
    responses.reserve(t.rows.size());

    if (schema.structure == Structure::individual) {
        const std::size_t col = require_column(t, schema.response);
        if (labels.empty()) {
            std::vector<std::string> seen;
            for (const auto& row : t.rows) {
                if (!is_missing(row[col])) seen.push_back(row[col]);
            }
            labels = sorted_levels(std::move(seen));
        }
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& cell = t.rows[r][col];
            if (is_missing(cell)) throw ValidationError("csv: missing response at " + where(r));
            auto it = std::find(labels.begin(), labels.end(), cell);
            if (it == labels.end()) {
                throw ValidationError("csv: unknown category label '" + cell + "' at " + where(r));
            }
            responses.push_back(CountVector::one_hot(labels.size(),
                                                     static_cast<std::size_t>(it - labels.begin())));
        }
    } else {
        const std::string prefix = "count_";
        if (labels.empty()) {
            for (const auto& h : t.header) {
                if (h.rfind(prefix, 0) == 0 && h.size() > prefix.size()) {
                    labels.push_back(h.substr(prefix.size()));
                }
            }
        }
        std::vector<std::size_t> cols;
        for (const auto& l : labels) cols.push_back(require_column(t, prefix + l));
        const int m_col = schema.group_size_column.empty() ? -1 : t.column(schema.group_size_column);
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            std::vector<int> counts;
            for (std::size_t c : cols) {
                const auto& cell = t.rows[r][c];
                auto v = parse_number(cell);
                if (!v || *v != std::floor(*v)) {
                    throw ValidationError("csv: count '" + cell + "' in '" + t.header[c] +
                                          "' is not an integer at " + where(r));
                }
                if (*v < 0) {
                    throw ValidationError("csv: negative count in '" + t.header[c] + "' at " +
                                          where(r));
                }
                counts.push_back(static_cast<int>(*v));
            }
            CountVector y(std::move(counts));
            if (m_col >= 0) {
                auto m = parse_number(t.rows[r][static_cast<std::size_t>(m_col)]);
                if (!m || *m != static_cast<double>(y.total())) {
                    throw ValidationError("csv: counts sum to " + std::to_string(y.total()) +
                                          " but declared group size is '" +
                                          t.rows[r][static_cast<std::size_t>(m_col)] + "' at " +
                                          where(r));
                }
            }
            if (y.total() == 0) throw ValidationError("csv: empty group at " + where(r));
            responses.push_back(std::move(y));
        }
    }

    std::vector<Covariate> covs;
    for (const auto& spec : schema.covariates) covs.push_back(read_covariate(t, spec));
    return PolytomousDataset(schema.structure, std::move(labels), std::move(responses),
                             std::move(covs));
}

PolytomousDataset load_csv(const std::string& path, const DatasetSchema& schema) {
    return dataset_from_table(read_csv_file(path), schema);
}

}  // namespace polydiag
