#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "boltssi/dataset.hpp"
#include "boltssi/pairs.hpp"
#include "boltssi/screen.hpp"

namespace boltssi {

enum class Heredity { Strong, Weak, Anti, Mixed };

const char* to_string(Heredity h) noexcept;

// Interaction set of each heredity pattern, 0-based.
std::vector<PairIndex> interaction_set(Heredity h);

// AR(1) covariates with Sigma_jk = rho^|j-k|; main effects on x_1..x_10 with
// coefficient 1 and ten interactions chosen by the heredity pattern.
struct SimDesign {
  Family family = Family::Gaussian;
  Heredity heredity = Heredity::Strong;
  std::size_t n = 500;
  std::size_t p = 500;
  double rho = 0.5;
  double sigma = 2.0;       // Gaussian noise sd
  double beta_inter = 2.0;  // interaction coefficient
  std::uint64_t seed = 1;

  std::vector<std::size_t> main_set() const;
  std::vector<PairIndex> inter_set() const { return interaction_set(heredity); }
  void validate() const;

  // Examples 1-4 are Gaussian, 5-8 logistic, cycling Strong, Weak, Anti, Mixed.
  static SimDesign example(int k);
};

struct SimData {
  Dataset data;
  std::vector<PairIndex> truth;
  std::vector<double> eta;  // linear predictor before noise / link
};

SimData generate(const SimDesign& design);
// Seed of replication `rep`; replications are independent streams.
std::uint64_t replication_seed(std::uint64_t seed, std::size_t rep);

struct RepMetrics {
  std::size_t covered = 0;
  std::size_t truth_size = 0;
  double acr = 0.0;
  std::size_t model_size = 0;
  std::optional<double> r2_out;  // percent
  std::optional<double> pmr;     // percent
};

RepMetrics evaluate(const ScreenResult& result, std::span<const PairIndex> truth);

struct SimMetrics {
  double acr = 0.0;
  double ams = 0.0;
  std::optional<double> r2_out;
  std::optional<double> pmr;
  std::size_t reps = 0;
  double acr_se = 0.0;
  double ams_se = 0.0;
  double r2_se = 0.0;
  double pmr_se = 0.0;
};

SimMetrics aggregate(std::span<const RepMetrics> reps);

// Predictions for `test` from a model refitted on `train` using the selected
// pairs. Gaussian: fitted means. Binomial: probabilities of y = 1.
using Predictor = std::function<std::vector<double>(
    const Dataset& train, std::span<const PairIndex> selected, const Dataset& test)>;

// 100 (1 - SSE / SST) with SST around the test mean.
double out_of_sample_r2(std::span<const double> y, std::span<const double> prediction);
// Percent of test samples with (prediction > 0.5) != y.
double misclassification_rate(std::span<const double> y, std::span<const double> prediction);

struct SimulationRun {
  std::vector<RepMetrics> per_rep;
  SimMetrics summary;
};

// Screens each replication with `cfg`. With a predictor, the first 75% of the
// samples are screened and used for the refit, the rest for R^2 / PMR.
// Replications run on `rep_threads` workers; cfg.threads applies within each.
SimulationRun run_simulation(const SimDesign& design, const ScreenConfig& cfg, std::size_t reps,
                             unsigned rep_threads = 1, const Predictor& predictor = {});

}  // namespace boltssi
