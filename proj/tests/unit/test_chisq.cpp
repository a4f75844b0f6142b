#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "boltssi/chisq.hpp"
#include "boltssi/error.hpp"

using namespace boltssi;

namespace {

double boost_critical(int df, double alpha) {
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared(df), alpha));
}

constexpr double kGenomeAlpha = 0.05 / (319156.0 * 319155.0 / 2.0);

}  // namespace

TEST_SUITE("chisq") {
  TEST_CASE("genome-wide Bonferroni critical values") {
    CHECK(std::abs(chisq_critical(4, kGenomeAlpha) - 62.237) <= 0.01);
    CHECK(std::abs(chisq_critical(1, kGenomeAlpha) - 50.880) <= 0.01);
    CHECK(chisq_critical(4, kGenomeAlpha) == doctest::Approx(boost_critical(4, kGenomeAlpha)).epsilon(1e-10));
    CHECK(chisq_critical(1, kGenomeAlpha) == doctest::Approx(boost_critical(1, kGenomeAlpha)).epsilon(1e-10));
  }

  TEST_CASE("median of chi-square(1)") {
    CHECK(std::abs(chisq_critical(1, 0.5) - 0.4549) <= 1e-3);
    CHECK(chisq_critical(1, 0.5) == doctest::Approx(0.45493642311957283).epsilon(1e-10));
  }

  TEST_CASE("quantiles agree with Boost over a grid") {
    for (int df = 1; df <= 60; df += (df < 10 ? 1 : 7)) {
      for (double alpha : {0.9, 0.5, 0.1, 0.05, 1e-3, 1e-6, 1e-10, 1e-14}) {
        const double ours = chisq_critical(df, alpha);
        CHECK(ours == doctest::Approx(boost_critical(df, alpha)).epsilon(1e-9));
        CHECK(chisq_upper_tail(ours, df) == doctest::Approx(alpha).epsilon(1e-8));
      }
    }
  }

  TEST_CASE("incomplete gamma agrees with Boost") {
    for (double a : {0.5, 1.0, 2.0, 7.5, 30.0, 112.5}) {
      for (double x : {1e-3, 0.3, 1.0, 4.0, 20.0, 90.0, 200.0}) {
        CHECK(gamma_p(a, x) == doctest::Approx(boost::math::gamma_p(a, x)).epsilon(1e-12));
        const double q = boost::math::gamma_q(a, x);
        if (q > 1e-300) CHECK(std::exp(log_gamma_q(a, x)) == doctest::Approx(q).epsilon(1e-10));
      }
    }
    CHECK(chisq_cdf(0.0, 3) == 0.0);
    CHECK(chisq_upper_tail(-1.0, 3) == 1.0);
  }

  TEST_CASE("domain errors") {
    CHECK_THROWS_AS(chisq_critical(0, 0.05), Error);
    CHECK_THROWS_AS(chisq_critical(2, 0.0), Error);
    CHECK_THROWS_AS(chisq_critical(2, 1.0), Error);
    CHECK_THROWS_AS(gamma_p(-1.0, 1.0), Error);
  }
}
