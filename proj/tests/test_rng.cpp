#include <doctest.h>

#include <cmath>
#include <vector>

#include "polydiag/rng.hpp"

using namespace polydiag;

TEST_CASE("streams are reproducible") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct stream ids and seeds give distinct sequences") {
    RngStream a(42, 7), b(42, 8), c(43, 7);
    int same_ab = 0, same_ac = 0;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        same_ab += x == b.next_u64();
        same_ac += x == c.next_u64();
    }
    CHECK(same_ab == 0);
    CHECK(same_ac == 0);
}

TEST_CASE("derive_seed depends on every path element and its order") {
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {2, 3, 0}));
    CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
}

TEST_CASE("uniform draws lie strictly inside the unit interval with the right moments") {
    RngStream s(5, 0);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sq += u * u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sq / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12).epsilon(0.02));
}

TEST_CASE("normal draws have unit variance") {
    RngStream s(9, 1);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::fabs(sum / n) < 0.01);
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("below is uniform over its range") {
    RngStream s(11, 2);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const auto k = s.below(7);
        REQUIRE(k < 7);
        ++counts[k];
    }
    for (int c : counts) CHECK(std::fabs(c - 10000) < 500);
}

TEST_CASE("binomial draws") {
    RngStream s(13, 3);
    CHECK(s.binomial(0, 0.4) == 0);
    CHECK(s.binomial(10, 0.0) == 0);
    CHECK(s.binomial(10, 1.0) == 10);
    for (auto [n, p] : {std::pair{10, 0.3}, std::pair{1000, 0.45}, std::pair{5, 0.97}}) {
        double sum = 0, sq = 0;
        const int reps = 40000;
        for (int i = 0; i < reps; ++i) {
            const int k = s.binomial(n, p);
            REQUIRE(k >= 0);
            REQUIRE(k <= n);
            sum += k;
            sq += static_cast<double>(k) * k;
        }
        const double mean = sum / reps;
        const double var = sq / reps - mean * mean;
        CHECK(mean == doctest::Approx(n * p).epsilon(0.01));
        CHECK(var == doctest::Approx(n * p * (1 - p)).epsilon(0.05));
    }
}
