#pragma once

namespace polydiag {

/// ln Gamma(x) for x > 0.
double log_gamma(double x);

/// Standard normal distribution function.
double normal_cdf(double z);

/// Upper tail 1 - Phi(z), accurate far into the tail.
double normal_sf(double z);

/// Standard normal density.
double normal_pdf(double z);

/// Inverse of the standard normal distribution function, p in (0, 1).
double normal_quantile(double p);

/// Regularized upper incomplete gamma function Q(a, x).
double gamma_q(double a, double x);

/// P(X > x) for a chi-square variable with `df` degrees of freedom.
double chi_square_sf(double x, int df);

}  // namespace polydiag
