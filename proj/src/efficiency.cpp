#include "boltssi/efficiency.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "boltssi/error.hpp"
#include "boltssi/simulate.hpp"

namespace boltssi {

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::Domain, "correlation needs two equal-length samples of size >= 2");
  }
}

// Runs body(rep) for rep in [0, reps) on up to `threads` workers.
template <typename Fn>
void for_reps(std::size_t reps, unsigned threads, Fn&& body) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(reps)));
  if (workers == 1) {
    for (std::size_t r = 0; r < reps; ++r) body(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t r = next++; r < reps; r = next++) body(r);
    });
  }
}

void bivariate_normal(double rho, std::size_t n, std::uint64_t seed, std::vector<double>& x,
                      std::vector<double>& y) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  x.resize(n);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = normal(rng);
    const double b = normal(rng);
    x[i] = a;
    y[i] = rho * a + s * b;
  }
}

double sample_variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

double indicator_correlation(std::uint64_t n11, std::uint64_t n10, std::uint64_t n01,
                             std::uint64_t n00) {
  const double a = static_cast<double>(n11), b = static_cast<double>(n10);
  const double c = static_cast<double>(n01), d = static_cast<double>(n00);
  const double den = std::sqrt((a + b) * (a + c)) * std::sqrt((c + d) * (b + d));
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (a * d - b * c) / den;
}

double indicator_correlation(std::span<const double> x, std::span<const double> y, double split_x,
                             double split_y) {
  check_lengths(x, y);
  std::array<std::uint64_t, 4> counts{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    counts[(x[i] > split_x ? 0 : 2) + (y[i] > split_y ? 0 : 1)] += 1;
  }
  return indicator_correlation(counts[0], counts[1], counts[2], counts[3]);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const std::size_t n = x.size();
  std::int64_t s = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[j] - x[i], dy = y[j] - y[i];
      s += ((dx > 0) - (dx < 0)) * ((dy > 0) - (dy < 0));
    }
  }
  return 2.0 * static_cast<double>(s) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double rho_from_tau(double tau) { return std::sin(std::numbers::pi / 2.0 * tau); }

double arcsine_curve(double rho) { return 2.0 / std::numbers::pi * std::asin(rho); }

double theoretical_efficiency_ratio(double rho) {
  if (!(std::abs(rho) < 1.0)) throw Error(ErrorKind::Domain, "efficiency ratio needs |rho| < 1");
  const double t = arcsine_curve(rho / 2.0);
  return std::numbers::pi * std::numbers::pi * (1.0 / 9.0 - t * t) / (1.0 - rho * rho);
}

ArcsineRow arcsine_check(double rho, std::size_t n, std::size_t reps, std::uint64_t seed,
                         unsigned threads) {
  if (!(std::abs(rho) <= 1.0) || n == 0 || reps == 0) {
    throw Error(ErrorKind::Domain, "arcsine_check needs |rho| <= 1, n >= 1, reps >= 1");
  }
  std::vector<std::array<std::uint64_t, 4>> per_rep(reps);
  for_reps(reps, threads, [&](std::size_t r) {
    std::vector<double> x, y;
    bivariate_normal(rho, n, replication_seed(seed, r), x, y);
    auto& c = per_rep[r];
    for (std::size_t i = 0; i < n; ++i) c[(x[i] > 0.0 ? 0 : 2) + (y[i] > 0.0 ? 0 : 1)] += 1;
  });
  std::array<std::uint64_t, 4> total{};
  for (const auto& c : per_rep) {
    for (int k = 0; k < 4; ++k) total[k] += c[k];
  }
  ArcsineRow row;
  row.rho = rho;
  row.estimate = indicator_correlation(total[0], total[1], total[2], total[3]);
  row.theoretical = arcsine_curve(rho);
  row.abs_error = std::abs(row.estimate - row.theoretical);
  row.samples = static_cast<std::uint64_t>(n) * reps;
  return row;
}

EfficiencyRow efficiency_ratio(double rho, std::size_t n, std::size_t reps, std::uint64_t seed,
                               TauEstimator estimator, unsigned threads) {
  if (!(std::abs(rho) < 1.0) || n < 3 || reps < 2) {
    throw Error(ErrorKind::Domain, "efficiency_ratio needs |rho| < 1, n >= 3, reps >= 2");
  }
  std::vector<double> tau_based(reps), pearson(reps);
  for_reps(reps, threads, [&](std::size_t r) {
    std::vector<double> x, y;
    bivariate_normal(rho, n, replication_seed(seed, r), x, y);
    const double tau = estimator == TauEstimator::Kendall ? kendall_tau(x, y)
                                                          : indicator_correlation(x, y);
    tau_based[r] = rho_from_tau(tau);
    pearson[r] = pearson_correlation(x, y);
  });
  EfficiencyRow row;
  row.rho = rho;
  row.reps = reps;
  row.var_tau = sample_variance(tau_based);
  row.var_pearson = sample_variance(pearson);
  row.ratio = row.var_tau / row.var_pearson;
  row.theoretical = theoretical_efficiency_ratio(rho);
  return row;
}

EffLossReport efficiency_report(std::span<const double> rho_grid, std::size_t n,
                                std::size_t reps, std::uint64_t seed, TauEstimator estimator,
                                unsigned threads) {
  EffLossReport report;
  for (std::size_t g = 0; g < rho_grid.size(); ++g) {
    const double rho = rho_grid[g];
    const std::uint64_t s = replication_seed(seed, 1'000'000 + g);
    report.rho.push_back(rho);
    report.arcsine.push_back(arcsine_check(rho, n, reps, s, threads));
    report.efficiency.push_back(efficiency_ratio(rho, n, reps, s, estimator, threads));
  }
  return report;
}

}  // namespace boltssi
