#include "boltssi/chisq.hpp"

#include <cmath>
#include <limits>

#include "boltssi/error.hpp"

namespace boltssi {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxTerms = 1000;

// log of x^a e^-x / Gamma(a)
double log_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

// Series for P(a, x) / prefactor, valid for x < a + 1.
double series_sum(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int k = 0; k < kMaxTerms; ++k) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum;
}

// Modified Lentz continued fraction for Q(a, x) / prefactor, x >= a + 1.
double continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double log_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw Error(ErrorKind::Domain, "log_gamma_q: invalid arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) {
    const double p = std::exp(log_prefactor(a, x)) * series_sum(a, x);
    return std::log1p(-std::min(p, 1.0));
  }
  return log_prefactor(a, x) + std::log(continued_fraction(a, x));
}

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw Error(ErrorKind::Domain, "gamma_p: invalid arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return std::min(1.0, std::exp(log_prefactor(a, x)) * series_sum(a, x));
  return -std::expm1(log_gamma_q(a, x));
}

double chisq_cdf(double x, double df) {
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * df, 0.5 * x);
}

double chisq_upper_tail(double x, double df) {
  if (x <= 0.0) return 1.0;
  return std::exp(log_gamma_q(0.5 * df, 0.5 * x));
}

double chisq_critical(int df, double alpha) {
  if (df < 1 || !(alpha > 0.0) || !(alpha < 1.0)) {
    throw Error(ErrorKind::Domain, "chisq_critical needs df >= 1 and 0 < alpha < 1");
  }
  const double a = 0.5 * df;
  const double target = std::log(alpha);
  auto g = [&](double x) { return log_gamma_q(a, 0.5 * x) - target; };

  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(df));
  while (g(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
  }

  // Safeguarded Newton on log Q; d/dx log Q = -f(x) / Q(x).
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double gx = g(x);
    if (gx > 0.0) lo = x; else hi = x;
    const double log_density =
        (a - 1.0) * std::log(0.5 * x) - 0.5 * x - std::lgamma(a) - std::log(2.0);
    const double slope = -std::exp(log_density - (gx + target));
    double next = x - gx / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-14 * std::max(1.0, x)) return next;
    x = next;
  }
  return x;
}

}  // namespace boltssi
