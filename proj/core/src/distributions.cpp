#include "msurv/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "msurv/error.hpp"

namespace msurv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double weibull_survival(const Weibull& w, double t) {
  if (t <= 0.0) return 1.0;
  return std::exp(-std::pow(t / w.scale, w.shape));
}

double weibull_pdf(const Weibull& w, double t) {
  if (t < 0.0) return 0.0;
  const double x = t / w.scale;
  return w.shape / w.scale * std::pow(x, w.shape - 1.0) * std::exp(-std::pow(x, w.shape));
}

double weibull_quantile(const Weibull& w, double p) { return w.scale * std::pow(-std::log1p(-p), 1.0 / w.shape); }

double mixture_survival(const WeibullMixture& m, double t) {
  double s = 0.0;
  for (const auto& c : m.components) s += c.weight * weibull_survival(c.weibull, t);
  return s;
}

double mixture_quantile(const WeibullMixture& m, double p) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& c : m.components) {
    const double q = weibull_quantile(c.weibull, p);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  // The mixture CDF is a weighted average of the component CDFs, so its
  // quantile lies between the extreme component quantiles.
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - mixture_survival(m, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return parts;
}

}  // namespace

double parse_number(std::string_view text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  const auto slash = t.find('/');
  if (slash != std::string::npos) {
    const double den = parse_number(std::string_view(t).substr(slash + 1));
    if (den == 0.0) fail(ErrorCode::ParseError, "zero denominator in '" + t + "'");
    return parse_number(std::string_view(t).substr(0, slash)) / den;
  }
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    fail(ErrorCode::ParseError, "not a number: '" + t + "'");
  }
  return value;
}

void validate(const AnalyticDistribution& dist) {
  auto positive = [](double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) fail(ErrorCode::InvalidArgument, std::string(what) + " must be positive");
  };
  std::visit(overloaded{
                 [&](const Exponential& e) { positive(e.rate, "exponential rate"); },
                 [&](const Weibull& w) {
                   positive(w.shape, "weibull shape");
                   positive(w.scale, "weibull scale");
                 },
                 [&](const WeibullMixture& m) {
                   if (m.components.empty()) fail(ErrorCode::InvalidArgument, "mixture has no components");
                   double total = 0.0;
                   for (const auto& c : m.components) {
                     positive(c.weight, "mixture weight");
                     positive(c.weibull.shape, "weibull shape");
                     positive(c.weibull.scale, "weibull scale");
                     total += c.weight;
                   }
                   if (std::fabs(total - 1.0) > 1e-12) {
                     fail(ErrorCode::InvalidArgument, "mixture weights sum to " + format_number(total));
                   }
                 },
                 [&](const Uniform& u) {
                   if (!(u.lo < u.hi) || !std::isfinite(u.lo) || !std::isfinite(u.hi) || u.lo < 0.0) {
                     fail(ErrorCode::InvalidArgument, "uniform needs 0 <= lo < hi < inf");
                   }
                 },
                 [&](const PointMass& p) {
                   if (!(p.value >= 0.0)) fail(ErrorCode::InvalidArgument, "point mass must be nonnegative");
                 },
             },
             dist);
}

double pdf(const AnalyticDistribution& dist, double t) {
  return std::visit(overloaded{
                        [&](const Exponential& e) { return t < 0.0 ? 0.0 : e.rate * std::exp(-e.rate * t); },
                        [&](const Weibull& w) { return weibull_pdf(w, t); },
                        [&](const WeibullMixture& m) {
                          double f = 0.0;
                          for (const auto& c : m.components) f += c.weight * weibull_pdf(c.weibull, t);
                          return f;
                        },
                        [&](const Uniform& u) { return (t < u.lo || t > u.hi) ? 0.0 : 1.0 / (u.hi - u.lo); },
                        [&](const PointMass&) { return 0.0; },
                    },
                    dist);
}

double survival(const AnalyticDistribution& dist, double t) {
  return std::visit(overloaded{
                        [&](const Exponential& e) { return t <= 0.0 ? 1.0 : std::exp(-e.rate * t); },
                        [&](const Weibull& w) { return weibull_survival(w, t); },
                        [&](const WeibullMixture& m) { return mixture_survival(m, t); },
                        [&](const Uniform& u) { return std::clamp((u.hi - t) / (u.hi - u.lo), 0.0, 1.0); },
                        [&](const PointMass& p) { return t < p.value ? 1.0 : 0.0; },
                    },
                    dist);
}

double cdf(const AnalyticDistribution& dist, double t) { return 1.0 - survival(dist, t); }

double quantile(const AnalyticDistribution& dist, double p) {
  if (!(p >= 0.0 && p < 1.0)) fail(ErrorCode::InvalidArgument, "quantile: p must lie in [0, 1)");
  return std::visit(overloaded{
                        [&](const Exponential& e) { return -std::log1p(-p) / e.rate; },
                        [&](const Weibull& w) { return weibull_quantile(w, p); },
                        [&](const WeibullMixture& m) { return mixture_quantile(m, p); },
                        [&](const Uniform& u) { return u.lo + p * (u.hi - u.lo); },
                        [&](const PointMass& pm) { return pm.value; },
                    },
                    dist);
}

double true_median(const AnalyticDistribution& dist) {
  return std::visit(overloaded{
                        [&](const Exponential& e) { return std::log(2.0) / e.rate; },
                        [&](const Weibull& w) { return w.scale * std::pow(std::log(2.0), 1.0 / w.shape); },
                        [&](const auto&) { return quantile(dist, 0.5); },
                    },
                    dist);
}

double raw_moment(const AnalyticDistribution& dist, int r) {
  if (r < 0) fail(ErrorCode::InvalidArgument, "raw_moment: order must be nonnegative");
  const double rd = static_cast<double>(r);
  auto weibull_moment = [&](const Weibull& w) { return std::pow(w.scale, rd) * std::tgamma(1.0 + rd / w.shape); };
  return std::visit(overloaded{
                        [&](const Exponential& e) { return std::tgamma(rd + 1.0) / std::pow(e.rate, rd); },
                        [&](const Weibull& w) { return weibull_moment(w); },
                        [&](const WeibullMixture& m) {
                          double total = 0.0;
                          for (const auto& c : m.components) total += c.weight * weibull_moment(c.weibull);
                          return total;
                        },
                        [&](const Uniform& u) {
                          return (std::pow(u.hi, rd + 1.0) - std::pow(u.lo, rd + 1.0)) / ((rd + 1.0) * (u.hi - u.lo));
                        },
                        [&](const PointMass& p) { return std::pow(p.value, rd); },
                    },
                    dist);
}

double sample(const AnalyticDistribution& dist, RngStream& rng) {
  return std::visit(overloaded{
                        [&](const WeibullMixture& m) {
                          double u = rng.uniform_open();
                          for (const auto& c : m.components) {
                            if (u < c.weight) return weibull_quantile(c.weibull, rng.uniform_open());
                            u -= c.weight;
                          }
                          return weibull_quantile(m.components.back().weibull, rng.uniform_open());
                        },
                        [&](const PointMass& p) { return p.value; },
                        [&](const auto&) { return quantile(dist, rng.uniform_open()); },
                    },
                    dist);
}

Skewness skewness_coefficients(const AnalyticDistribution& dist) {
  Skewness out;
  const double q1 = quantile(dist, 0.25);
  const double q2 = quantile(dist, 0.5);
  const double q3 = quantile(dist, 0.75);
  out.bowley = (q3 + q1 - 2.0 * q2) / (q3 - q1);
  const double m1 = raw_moment(dist, 1);
  const double m2 = raw_moment(dist, 2);
  const double m3 = raw_moment(dist, 3);
  const double var = m2 - m1 * m1;
  out.pearson_moment = (m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1) / std::pow(var, 1.5);
  return out;
}

std::string describe(const AnalyticDistribution& dist) {
  return std::visit(
      overloaded{
          [](const Exponential& e) { return "exponential(" + format_number(e.rate) + ")"; },
          [](const Weibull& w) { return "weibull(" + format_number(w.shape) + "," + format_number(w.scale) + ")"; },
          [](const WeibullMixture& m) {
            std::string s = "weibull_mixture(";
            for (std::size_t i = 0; i < m.components.size(); ++i) {
              const auto& c = m.components[i];
              if (i > 0) s += ";";
              s += format_number(c.weight) + "," + format_number(c.weibull.shape) + "," +
                   format_number(c.weibull.scale);
            }
            return s + ")";
          },
          [](const Uniform& u) { return "uniform(" + format_number(u.lo) + "," + format_number(u.hi) + ")"; },
          [](const PointMass& p) {
            return std::isinf(p.value) ? std::string("never") : "point(" + format_number(p.value) + ")";
          },
      },
      dist);
}

AnalyticDistribution parse_distribution(std::string_view text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "never" || t == "none") return PointMass{};

  const auto open = t.find('(');
  if (open == std::string::npos || t.back() != ')') {
    fail(ErrorCode::ParseError, "expected name(args) in distribution '" + t + "'");
  }
  const std::string name = trim(std::string_view(t).substr(0, open));
  const std::string body = t.substr(open + 1, t.size() - open - 2);

  auto numbers = [&](std::string_view s, std::size_t expected) {
    std::vector<double> v;
    for (const auto& part : split(s, ',')) v.push_back(parse_number(part));
    if (v.size() != expected) {
      fail(ErrorCode::ParseError, name + " expects " + std::to_string(expected) + " parameters");
    }
    return v;
  };

  AnalyticDistribution dist;
  if (name == "exponential" || name == "exp") {
    dist = Exponential{numbers(body, 1)[0]};
  } else if (name == "weibull") {
    const auto v = numbers(body, 2);
    dist = Weibull{v[0], v[1]};
  } else if (name == "uniform") {
    const auto v = numbers(body, 2);
    dist = Uniform{v[0], v[1]};
  } else if (name == "point") {
    dist = PointMass{numbers(body, 1)[0]};
  } else if (name == "weibull_mixture" || name == "mixture") {
    WeibullMixture m;
    for (const auto& comp : split(body, ';')) {
      const auto v = numbers(comp, 3);
      m.components.push_back({v[0], Weibull{v[1], v[2]}});
    }
    dist = std::move(m);
  } else {
    fail(ErrorCode::ParseError, "unknown distribution '" + name + "'");
  }
  validate(dist);
  return dist;
}

}  // namespace msurv
