#include "polydiag/multinom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "polydiag/errors.hpp"
#include "polydiag/numerics.hpp"

namespace polydiag {

ProbabilityVector::ProbabilityVector(std::vector<double> probs, double tolerance)
    : probs_(std::move(probs)) {
    if (probs_.size() < 2) throw DomainError("ProbabilityVector: need at least two categories");
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DomainError("ProbabilityVector: entry outside [0, 1]: " + std::to_string(p));
        }
        sum += p;
    }
    if (std::fabs(sum - 1.0) > tolerance) {
        throw DomainError("ProbabilityVector: entries sum to " + std::to_string(sum));
    }
}

CountVector::CountVector(std::vector<int> counts) : counts_(std::move(counts)) {
    for (int c : counts_) {
        if (c < 0) throw DomainError("CountVector: negative count");
        total_ += c;
    }
}

CountVector CountVector::one_hot(std::size_t categories, std::size_t category) {
    std::vector<int> c(categories, 0);
    c.at(category) = 1;
    return CountVector(std::move(c));
}

double multinomial_pmf(const CountVector& y, const ProbabilityVector& pi) {
    if (y.size() != pi.size()) {
        throw DomainError("multinomial_pmf: dimension mismatch");
    }
    double log_p = log_gamma(y.total() + 1.0);
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (y[j] == 0) continue;
        if (pi[j] == 0.0) return 0.0;
        log_p += y[j] * std::log(pi[j]) - log_gamma(y[j] + 1.0);
    }
    return std::exp(log_p);
}

double rectangular_cdf(std::span<const int> limits, int m, const ProbabilityVector& pi) {
    if (limits.size() != pi.size()) {
        throw DomainError("rectangular_cdf: dimension mismatch");
    }
    if (m < 1) throw DomainError("rectangular_cdf: m must be positive");
    for (int n : limits) {
        if (n < 0) throw DomainError("rectangular_cdf: negative limit");
    }

    // Categories with zero probability are point masses at zero and never bind.
    bool all_free = true;
    long capacity = 0;
    for (std::size_t j = 0; j < limits.size(); ++j) {
        if (pi[j] == 0.0) continue;
        const int t = std::min(limits[j], m);
        capacity += t;
        if (t < m) all_free = false;
    }
    if (all_free) return 1.0;
    if (capacity < m) return 0.0;

    const double s = m;
    double log_result = log_gamma(m + 1.0) - m * std::log(s) + s;

    // dist[k] = P(W = k) for the running sum of truncated Poissons, k <= m.
    std::vector<double> dist{1.0};
    std::vector<double> trunc;
    std::vector<double> next;
    for (std::size_t j = 0; j < limits.size(); ++j) {
        if (pi[j] == 0.0) continue;
        const int t = std::min(limits[j], m);
        const double lambda = s * pi[j];
        const double log_lambda = std::log(lambda);

        trunc.assign(static_cast<std::size_t>(t) + 1, 0.0);
        double mass = 0.0;
        for (int k = 0; k <= t; ++k) {
            trunc[k] = std::exp(k * log_lambda - lambda - log_gamma(k + 1.0));
            mass += trunc[k];
        }
        if (mass <= 0.0) return 0.0;
        log_result += std::log(mass);
        for (double& v : trunc) v /= mass;

        const std::size_t width = std::min<std::size_t>(dist.size() + t, m + 1);
        next.assign(width, 0.0);
        for (std::size_t a = 0; a < dist.size(); ++a) {
            if (dist[a] == 0.0) continue;
            const std::size_t top = std::min<std::size_t>(t, width - 1 - a);
            for (std::size_t b = 0; b <= top && a + b < width; ++b) {
                next[a + b] += dist[a] * trunc[b];
            }
        }
        dist.swap(next);
    }
    if (dist.size() <= static_cast<std::size_t>(m) || dist[m] <= 0.0) return 0.0;
    log_result += std::log(dist[m]);
    return std::clamp(std::exp(log_result), 0.0, 1.0);
}

CountVector sample_multinomial(int m, const ProbabilityVector& pi, RngStream& stream) {
    std::vector<int> counts(pi.size(), 0);
    int remaining = m;
    double remaining_prob = 1.0;
    for (std::size_t j = 0; j + 1 < pi.size() && remaining > 0; ++j) {
        const double p = remaining_prob > 0.0 ? std::min(1.0, pi[j] / remaining_prob) : 0.0;
        counts[j] = stream.binomial(remaining, p);
        remaining -= counts[j];
        remaining_prob -= pi[j];
    }
    counts.back() += remaining;
    return CountVector(std::move(counts));
}

}  // namespace polydiag
