#include "polydiag/shapiro_wilk.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polydiag/errors.hpp"
#include "polydiag/numerics.hpp"

namespace polydiag {

namespace {

// c[0] + c[1] x + ... + c[k-1] x^(k-1)
template <std::size_t N>
double poly(const double (&c)[N], double x) {
    double r = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) r = r * x + c[i];
    return r;
}

constexpr double kG[] = {-2.273, 0.459};
constexpr double kC1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
constexpr double kC2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr double kC3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
constexpr double kC4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
constexpr double kC5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr double kC6[] = {-0.4803, -0.082676, 0.0030302};

// Coefficients for the lower half, a[0] belonging to the smallest value
// (stored positive; the lower half enters W with a minus sign).
std::vector<double> half_coefficients(std::size_t n) {
    const std::size_t half = n / 2;
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
        return a;
    }
    const double an = static_cast<double>(n);
    const double an25 = an + 0.25;
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        a[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / an25);
        summ2 += a[i] * a[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(kC1, rsn) - a[0] / ssumm2;

    std::size_t first_scaled;
    double fac;
    if (n > 5) {
        first_scaled = 2;
        const double a2 = -a[1] / ssumm2 + poly(kC2, rsn);
        fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                        (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
        a[1] = a2;
    } else {
        first_scaled = 1;
        fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first_scaled; i < half; ++i) a[i] /= -fac;
    return a;
}

}  // namespace

ShapiroWilkResult shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3 || n > 5000) {
        throw DomainError("shapiro_wilk: sample size must be in [3, 5000], got " + std::to_string(n));
    }
    std::vector<double> x(sample.begin(), sample.end());
    for (double v : x) {
        if (!std::isfinite(v)) throw DomainError("shapiro_wilk: non-finite value in sample");
    }
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 1e-19 * std::max(1.0, std::fabs(x.front())))) {
        throw NumericalError("shapiro_wilk: sample has zero spread");
    }

    const auto a = half_coefficients(n);
    std::vector<double> coef(n, 0.0);
    for (std::size_t i = 0; i < n / 2; ++i) {
        coef[i] = -a[i];
        coef[n - 1 - i] = a[i];
    }

    // W as the squared correlation between range-scaled data and coefficients.
    double sa = 0.0;
    double sx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sa += coef[i];
        sx += x[i] / range;
    }
    sa /= static_cast<double>(n);
    sx /= static_cast<double>(n);
    double ssa = 0.0;
    double ssx = 0.0;
    double sax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double asa = coef[i] - sa;
        const double xsx = x[i] / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);  // 1 - W

    ShapiroWilkResult r;
    r.w = 1.0 - w1;
    if (n == 3) {
        constexpr double pi6 = 1.90985931710274;   // 6 / pi
        constexpr double stqr = 1.04719755119660;  // pi / 3
        r.p_value = std::max(0.0, pi6 * (std::asin(std::sqrt(r.w)) - stqr));
        return r;
    }
    const double an = static_cast<double>(n);
    double y = std::log(w1);
    double m;
    double s;
    if (n <= 11) {
        const double gamma = poly(kG, an);
        if (y >= gamma) {
            r.p_value = 1e-99;
            return r;
        }
        y = -std::log(gamma - y);
        m = poly(kC3, an);
        s = std::exp(poly(kC4, an));
    } else {
        const double log_n = std::log(an);
        m = poly(kC5, log_n);
        s = std::exp(poly(kC6, log_n));
    }
    r.p_value = normal_sf((y - m) / s);
    return r;
}

std::vector<double> halfnormal_scores(std::size_t n) {
    std::vector<double> out(n);
    const double nn = static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i) {
        out[i - 1] = normal_quantile((static_cast<double>(i) + nn - 0.125) / (2.0 * nn + 0.5));
    }
    return out;
}

}  // namespace polydiag
