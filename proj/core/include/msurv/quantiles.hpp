#pragma once

// Distribution kernels shared by the interval and pooling code.

namespace msurv {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF (Wichura's AS 241, absolute error well below
/// 1e-10 over (0, 1)). Returns -inf / +inf at 0 / 1.
double normal_quantile(double p);

/// z_{1 - alpha/2}, the two-sided critical value at level 1 - alpha.
double two_sided_z(double alpha);

/// Quantile of Student's t with `df` degrees of freedom; df must be > 0.
double student_t_quantile(double df, double p);

/// Chi-squared quantile: x with P(X <= x) = p.
double chi_squared_quantile(double df, double p);

}  // namespace msurv
