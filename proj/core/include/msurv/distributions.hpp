#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "msurv/rng.hpp"

namespace msurv {

struct Exponential {
  double rate = 1.0;
};

/// S(t) = exp(-(t / scale)^shape).
struct Weibull {
  double shape = 1.0;
  double scale = 1.0;
};

struct MixtureComponent {
  double weight = 1.0;
  Weibull weibull;
};

struct WeibullMixture {
  std::vector<MixtureComponent> components;
};

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

/// All mass at `value`; +infinity expresses "never censored".
struct PointMass {
  double value = std::numeric_limits<double>::infinity();
};

using AnalyticDistribution = std::variant<Exponential, Weibull, WeibullMixture, Uniform, PointMass>;

/// Checks parameters (positive rates/shapes/scales, lo < hi, mixture weights
/// positive and summing to 1 within 1e-12); throws InvalidArgument.
void validate(const AnalyticDistribution& dist);

double pdf(const AnalyticDistribution& dist, double t);
double survival(const AnalyticDistribution& dist, double t);
double cdf(const AnalyticDistribution& dist, double t);

/// Inverse CDF; mixtures are inverted by bisection to 1e-14 relative width.
double quantile(const AnalyticDistribution& dist, double p);

/// Solves S(m) = 1/2: closed form where available, bisection otherwise.
double true_median(const AnalyticDistribution& dist);

/// E[X^r]; infinite for PointMass at infinity.
double raw_moment(const AnalyticDistribution& dist, int r);

/// Inverse-CDF draw. Mixtures draw the component first, then invert it.
double sample(const AnalyticDistribution& dist, RngStream& rng);

struct Skewness {
  double bowley = 0.0;          // (Q3 + Q1 - 2 Q2) / (Q3 - Q1)
  double pearson_moment = 0.0;  // E[(X - mu)^3] / sigma^3
};

Skewness skewness_coefficients(const AnalyticDistribution& dist);

/// Canonical text form, e.g. "weibull(2,35)"; accepted back by parse_distribution.
std::string describe(const AnalyticDistribution& dist);

/// Parses exponential(rate), weibull(shape,scale), uniform(lo,hi),
/// point(value), never, and weibull_mixture(w,shape,scale; w,shape,scale; ...).
/// Numbers may be written as fractions ("1/40", "2/3").
AnalyticDistribution parse_distribution(std::string_view text);

/// Parses a decimal number or a fraction a/b.
double parse_number(std::string_view text);

}  // namespace msurv
