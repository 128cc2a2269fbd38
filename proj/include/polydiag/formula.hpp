#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polydiag/errors.hpp"

namespace polydiag {

/// A main effect (one variable) or an interaction (several, joined by ':').
struct Term {
    std::vector<std::string> variables;

    std::string label() const;
    bool is_interaction() const { return variables.size() > 1; }
    friend bool operator==(const Term&, const Term&) = default;
};

/// `response ~ terms`. The intercept is always present; an empty term list is
/// the intercept-only (null) model.
struct ModelFormula {
    std::string response;
    std::vector<Term> terms;
    /// Baseline response category; unset means the first category label.
    std::optional<std::string> reference_category;

    bool intercept_only() const { return terms.empty(); }
    /// Every variable used by some term, in first-use order.
    std::vector<std::string> variables() const;
    /// Canonical text, e.g. "y ~ a + b + a:b" or "y ~ 1".
    std::string to_string() const;

    friend bool operator==(const ModelFormula&, const ModelFormula&) = default;
};

class FormulaSyntaxError : public ValidationError {
public:
    FormulaSyntaxError(const std::string& message, std::size_t position);
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Parses `response ~ rhs`, where rhs is `1`, empty, or a '+'-separated list of
/// products. `a * b` expands to `a + b + a:b` and binds tighter than '+'.
/// Duplicate terms are rejected.
ModelFormula parse_formula(std::string_view text);

}  // namespace polydiag
