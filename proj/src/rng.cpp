#include "polydiag/rng.hpp"

#include <cmath>

#include "polydiag/numerics.hpp"

namespace polydiag {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = seed;
    std::uint64_t out = splitmix64(h);
    for (std::uint64_t key : path) {
        h = out ^ (key * 0xd6e8feb86659fd93ULL + 0x632be59bd9b4e019ULL);
        out = splitmix64(h);
    }
    return out;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    std::uint64_t x = derive_seed(seed, {stream_id});
    for (auto& s : state_) s = splitmix64(x);
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::uniform() {
    // Midpoint of one of 2^53 equal cells: never 0, never 1.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return normal_quantile(uniform()); }

std::uint64_t RngStream::below(std::uint64_t n) {
    // Lemire's nearly divisionless method.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = -n % n;
        while (low < threshold) {
            x = next_u64();
            m = static_cast<__uint128_t>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

int RngStream::binomial(int n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (p > 0.5) return n - binomial(n, 1.0 - p);
    // Keep (1-p)^n well away from underflow.
    if (n * p > 200.0) {
        const int half = n / 2;
        return binomial(half, p) + binomial(n - half, p);
    }
    return binomial_inversion(n, p);
}

int RngStream::binomial_inversion(int n, double p) {
    const double q = 1.0 - p;
    const double ratio = p / q;
    double prob = std::pow(q, n);
    double cdf = prob;
    const double u = uniform();
    int k = 0;
    while (u > cdf && k < n) {
        prob *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
        ++k;
        cdf += prob;
    }
    return k;
}

}  // namespace polydiag
