#pragma once

namespace boltssi {

// log of the regularized upper incomplete gamma function Q(a, x), accurate
// deep into the tail (needed for Bonferroni levels around 1e-12).
double log_gamma_q(double a, double x);
double gamma_p(double a, double x);

double chisq_cdf(double x, double df);
double chisq_upper_tail(double x, double df);

// Upper-tail quantile: the x with P(chi2_df > x) = alpha.
// Throws ErrorKind::Domain unless df >= 1 and 0 < alpha < 1.
double chisq_critical(int df, double alpha);

}  // namespace boltssi
