#pragma once

#include <span>
#include <vector>

namespace polydiag {

struct ShapiroWilkResult {
    double w = 0.0;
    double p_value = 1.0;
};

/// Shapiro-Wilk W and its p-value by Royston's AS R94 approximation,
/// for 3 <= n <= 5000. Throws DomainError outside that range and
/// NumericalError for a sample with zero spread.
ShapiroWilkResult shapiro_wilk(std::span<const double> sample);

/// Expected half-normal order statistics
/// Phi^{-1}((i + n - 1/8) / (2n + 1/2)), i = 1..n.
std::vector<double> halfnormal_scores(std::size_t n);

}  // namespace polydiag
