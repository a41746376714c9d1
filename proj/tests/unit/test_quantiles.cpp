#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "msurv/quantiles.hpp"
#include "support/oracles.hpp"

namespace {

using msurv::chi_squared_quantile;
using msurv::normal_quantile;
using msurv::student_t_quantile;

TEST(NormalQuantile, ReferenceValue) {
  EXPECT_NEAR(normal_quantile(0.975), 1.9599640, 1e-6);
  EXPECT_NEAR(msurv::two_sided_z(0.05), 1.959963984540054, 1e-12);
  EXPECT_DOUBLE_EQ(normal_quantile(0.5), 0.0);
}

TEST(NormalQuantile, AbsoluteErrorBelowOneInTenBillion) {
  for (double logp = -12.0; logp < 0.0; logp += 0.05) {
    for (double p : {std::pow(10.0, logp), 1.0 - std::pow(10.0, logp)}) {
      if (!(p > 0.0 && p < 1.0)) continue;
      const double x = normal_quantile(p);
      // One Newton step against the erfc-based CDF gives the reference root.
      const double exact = x - (oracle::normal_cdf(x) - p) / oracle::normal_pdf(x);
      EXPECT_NEAR(x, exact, 1e-10) << "p=" << p;
    }
  }
}

TEST(NormalQuantile, Endpoints) {
  EXPECT_EQ(normal_quantile(0.0), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(normal_quantile(1.0), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(msurv::normal_cdf(1.959963984540054), 0.975, 1e-15);
}

TEST(StudentT, ReferenceValue) { EXPECT_NEAR(student_t_quantile(1.0, 0.975), 12.706205, 1e-6); }

TEST(StudentT, CauchyClosedForm) {
  for (double p : {0.6, 0.9, 0.975, 0.999}) {
    EXPECT_NEAR(student_t_quantile(1.0, p), std::tan(std::numbers::pi * (p - 0.5)), 1e-9 * (1.0 + std::tan(std::numbers::pi * (p - 0.5))));
  }
}

TEST(StudentT, InvertsIncompleteBetaCdf) {
  for (double df : {1.0, 2.0, 3.0, 5.0, 10.0, 18.0, 28.0, 100.0}) {
    for (double p : {0.6, 0.9, 0.95, 0.975, 0.995}) {
      const double q = student_t_quantile(df, p);
      EXPECT_NEAR(oracle::student_t_cdf(df, q), p, 1e-10) << "df=" << df << " p=" << p;
      EXPECT_NEAR(student_t_quantile(df, 1.0 - p), -q, 1e-9 * q);
    }
  }
}

TEST(ChiSquared, ReferenceValue) { EXPECT_NEAR(chi_squared_quantile(1.0, 0.95), 3.841459, 1e-6); }

TEST(ChiSquared, TwoDegreesClosedForm) {
  for (double p : {0.025, 0.5, 0.975}) EXPECT_NEAR(chi_squared_quantile(2.0, p), -2.0 * std::log1p(-p), 1e-10);
}

TEST(ChiSquared, InvertsSeriesCdf) {
  for (double df : {1.0, 4.0, 19.0, 29.0, 60.0}) {
    for (double p : {0.025, 0.05, 0.5, 0.95, 0.975}) {
      EXPECT_NEAR(oracle::chi_squared_cdf(df, chi_squared_quantile(df, p)), p, 1e-10) << "df=" << df;
    }
  }
}

}  // namespace
