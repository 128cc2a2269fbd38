#pragma once

#include <span>
#include <vector>

#include "polydiag/rng.hpp"

namespace polydiag {

/// J >= 2 category probabilities in [0, 1] summing to one.
class ProbabilityVector {
public:
    /// Validates the invariants; throws DomainError on violation.
    explicit ProbabilityVector(std::vector<double> probs, double tolerance = 1e-12);

    std::span<const double> values() const { return probs_; }
    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t j) const { return probs_[j]; }

private:
    std::vector<double> probs_;
};

/// Nonnegative category counts together with their total m.
class CountVector {
public:
    explicit CountVector(std::vector<int> counts);

    /// One-hot vector of an individual response in `category`.
    static CountVector one_hot(std::size_t categories, std::size_t category);

    std::span<const int> values() const { return counts_; }
    std::size_t size() const { return counts_.size(); }
    int operator[](std::size_t j) const { return counts_[j]; }
    int total() const { return total_; }

    friend bool operator==(const CountVector&, const CountVector&) = default;

private:
    std::vector<int> counts_;
    int total_ = 0;
};

/// Multinomial probability of `y` given `pi`, with m = y.total().
double multinomial_pmf(const CountVector& y, const ProbabilityVector& pi);

/// P(Y_1 <= limits_1, ..., Y_J <= limits_J) for Y ~ Multinomial(m, pi),
/// computed exactly via Levin's truncated-Poisson representation.
double rectangular_cdf(std::span<const int> limits, int m, const ProbabilityVector& pi);

/// Multinomial draw by sequential conditional binomials.
CountVector sample_multinomial(int m, const ProbabilityVector& pi, RngStream& stream);

}  // namespace polydiag
