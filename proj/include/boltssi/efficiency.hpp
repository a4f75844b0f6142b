#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace boltssi {

// Phi coefficient of the indicators I(x > split_x) and I(y > split_y).
double indicator_correlation(std::span<const double> x, std::span<const double> y,
                             double split_x = 0.0, double split_y = 0.0);
// Same, from the 2x2 counts (n11 = both above the split).
double indicator_correlation(std::uint64_t n11, std::uint64_t n10, std::uint64_t n01,
                             std::uint64_t n00);
// Kendall's tau-a, O(n^2).
double kendall_tau(std::span<const double> x, std::span<const double> y);
double pearson_correlation(std::span<const double> x, std::span<const double> y);
// sin(pi / 2 * tau)
double rho_from_tau(double tau);
// (2 / pi) asin(rho)
double arcsine_curve(double rho);

struct ArcsineRow {
  double rho = 0.0;
  double estimate = 0.0;     // pooled median-split indicator correlation
  double theoretical = 0.0;  // (2 / pi) asin(rho)
  double abs_error = 0.0;
  std::uint64_t samples = 0;
};

// Bivariate normal pairs split at the population median 0. |rho| <= 1.
ArcsineRow arcsine_check(double rho, std::size_t n, std::size_t reps, std::uint64_t seed,
                         unsigned threads = 1);

enum class TauEstimator {
  Kendall,      // tau-hat = Kendall's tau-a
  MedianSplit,  // tau-hat = median-split indicator correlation
};

struct EfficiencyRow {
  double rho = 0.0;
  double var_tau = 0.0;      // variance over reps of sin(pi / 2 * tau-hat)
  double var_pearson = 0.0;  // variance over reps of the Pearson correlation
  double ratio = 0.0;
  double theoretical = 0.0;
  std::size_t reps = 0;
};

// Monte-Carlo Var(rho_tau) / Var(rho_s). |rho| < 1, reps >= 2.
EfficiencyRow efficiency_ratio(double rho, std::size_t n, std::size_t reps, std::uint64_t seed,
                               TauEstimator estimator = TauEstimator::Kendall,
                               unsigned threads = 1);

// pi^2 [1/9 - ((2/pi) asin(rho/2))^2] / (1 - rho^2)
double theoretical_efficiency_ratio(double rho);

inline constexpr double kEfficiencyLower = 1.096622711232151;  // pi^2 / 9
inline constexpr double kEfficiencyUpper = 1.2091995761561452;  // 2 sqrt(3) pi / 9

struct EffLossReport {
  std::vector<double> rho;
  std::vector<ArcsineRow> arcsine;
  std::vector<EfficiencyRow> efficiency;
};

EffLossReport efficiency_report(std::span<const double> rho_grid, std::size_t n,
                                std::size_t reps, std::uint64_t seed,
                                TauEstimator estimator = TauEstimator::Kendall,
                                unsigned threads = 1);

}  // namespace boltssi
