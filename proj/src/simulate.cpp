#include "boltssi/simulate.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "boltssi/error.hpp"

namespace boltssi {

const char* to_string(Heredity h) noexcept {
  switch (h) {
    case Heredity::Strong: return "strong";
    case Heredity::Weak: return "weak";
    case Heredity::Anti: return "anti";
    case Heredity::Mixed: return "mixed";
  }
  return "unknown";
}

std::vector<PairIndex> interaction_set(Heredity h) {
  using Printed = std::array<std::pair<int, int>, 10>;
  static constexpr Printed strong{{{1, 2}, {1, 3}, {2, 3}, {2, 5}, {3, 4},
                                   {6, 8}, {6, 10}, {7, 8}, {7, 9}, {9, 10}}};
  static constexpr Printed weak{{{1, 2}, {1, 13}, {2, 3}, {2, 15}, {3, 4},
                                 {6, 10}, {6, 18}, {7, 9}, {7, 18}, {10, 19}}};
  static constexpr Printed anti{{{11, 12}, {11, 13}, {12, 13}, {12, 15}, {13, 14},
                                 {16, 18}, {16, 20}, {17, 18}, {17, 19}, {19, 20}}};
  static constexpr Printed mixed{{{1, 2}, {1, 3}, {2, 3}, {2, 15}, {6, 18},
                                  {7, 18}, {16, 20}, {17, 18}, {17, 19}, {19, 20}}};
  const Printed* table = &strong;
  if (h == Heredity::Weak) table = &weak;
  if (h == Heredity::Anti) table = &anti;
  if (h == Heredity::Mixed) table = &mixed;
  std::vector<PairIndex> out;
  for (auto [a, b] : *table) {
    out.push_back(PairIndex{static_cast<std::uint32_t>(a - 1), static_cast<std::uint32_t>(b - 1)});
  }
  return out;
}

std::vector<std::size_t> SimDesign::main_set() const {
  std::vector<std::size_t> s(10);
  std::iota(s.begin(), s.end(), std::size_t{0});
  return s;
}

void SimDesign::validate() const {
  if (n < 4) throw Error(ErrorKind::InvalidConfig, "simulation needs n >= 4");
  if (p < 20) throw Error(ErrorKind::InvalidConfig, "simulation needs p >= 20");
  if (!(rho >= 0.0 && rho < 1.0)) throw Error(ErrorKind::InvalidConfig, "rho must lie in [0, 1)");
  if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidConfig, "sigma must be >= 0");
  if (!std::isfinite(beta_inter)) throw Error(ErrorKind::InvalidConfig, "beta_inter must be finite");
}

SimDesign SimDesign::example(int k) {
  if (k < 1 || k > 8) throw Error(ErrorKind::InvalidConfig, "example must be 1..8");
  SimDesign d;
  d.family = k <= 4 ? Family::Gaussian : Family::Binomial;
  d.heredity = static_cast<Heredity>((k - 1) % 4);
  d.beta_inter = 2.0;
  return d;
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (std::uint64_t{out[0]} << 32) | out[1];
}

SimData generate(const SimDesign& design) {
  design.validate();
  const std::size_t n = design.n, p = design.p;
  std::mt19937_64 rng(design.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double rho = design.rho;
  const double innovation = std::sqrt(1.0 - rho * rho);

  std::vector<double> x(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    double prev = normal(rng);
    x[i] = prev;
    for (std::size_t k = 1; k < p; ++k) {
      prev = rho * prev + innovation * normal(rng);
      x[k * n + i] = prev;
    }
  }

  const auto truth = design.inter_set();
  const auto mains = design.main_set();
  std::vector<double> eta(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double e = 0.0;
    for (std::size_t k : mains) e += x[k * n + i];
    for (const auto& t : truth) e += design.beta_inter * x[t.i * n + i] * x[t.j * n + i];
    eta[i] = e;
  }

  std::vector<double> y(n);
  if (design.family == Family::Gaussian) {
    for (std::size_t i = 0; i < n; ++i) y[i] = eta[i] + design.sigma * normal(rng);
  } else {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = unit(rng) < 1.0 / (1.0 + std::exp(-eta[i])) ? 1.0 : 0.0;
    }
  }
  return SimData{Dataset(std::move(x), n, p, std::move(y), design.family), truth, std::move(eta)};
}

RepMetrics evaluate(const ScreenResult& result, std::span<const PairIndex> truth) {
  RepMetrics m;
  m.truth_size = truth.size();
  m.model_size = result.n_selected;
  for (const auto& s : result.ranked) {
    if (s.selected && std::find(truth.begin(), truth.end(), s.pair) != truth.end()) ++m.covered;
  }
  m.acr = truth.empty() ? 1.0 : static_cast<double>(m.covered) / static_cast<double>(truth.size());
  return m;
}

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe out;
  if (v.empty()) return out;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  out.mean = m;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    out.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return out;
}

}  // namespace

SimMetrics aggregate(std::span<const RepMetrics> reps) {
  SimMetrics s;
  s.reps = reps.size();
  std::vector<double> acr, ams, r2, pmr;
  for (const auto& r : reps) {
    acr.push_back(r.acr);
    ams.push_back(static_cast<double>(r.model_size));
    if (r.r2_out) r2.push_back(*r.r2_out);
    if (r.pmr) pmr.push_back(*r.pmr);
  }
  auto a = mean_se(acr), b = mean_se(ams);
  s.acr = a.mean;
  s.acr_se = a.se;
  s.ams = b.mean;
  s.ams_se = b.se;
  if (!r2.empty()) {
    auto c = mean_se(r2);
    s.r2_out = c.mean;
    s.r2_se = c.se;
  }
  if (!pmr.empty()) {
    auto c = mean_se(pmr);
    s.pmr = c.mean;
    s.pmr_se = c.se;
  }
  return s;
}

double out_of_sample_r2(std::span<const double> y, std::span<const double> prediction) {
  if (y.size() != prediction.size() || y.empty()) {
    throw Error(ErrorKind::InvalidConfig, "prediction length does not match the test set");
  }
  const double m = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sse += (y[i] - prediction[i]) * (y[i] - prediction[i]);
    sst += (y[i] - m) * (y[i] - m);
  }
  return 100.0 * (1.0 - sse / sst);
}

double misclassification_rate(std::span<const double> y, std::span<const double> prediction) {
  if (y.size() != prediction.size() || y.empty()) {
    throw Error(ErrorKind::InvalidConfig, "prediction length does not match the test set");
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    wrong += ((prediction[i] > 0.5) != (y[i] > 0.5)) ? 1 : 0;
  }
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(y.size());
}

SimulationRun run_simulation(const SimDesign& design, const ScreenConfig& cfg, std::size_t reps,
                             unsigned rep_threads, const Predictor& predictor) {
  design.validate();
  cfg.validate();
  SimulationRun run;
  run.per_rep.resize(reps);

  auto one = [&](std::size_t rep) {
    SimDesign d = design;
    d.seed = replication_seed(design.seed, rep);
    SimData sim = generate(d);
    if (!predictor) {
      run.per_rep[rep] = evaluate(screen(sim.data, cfg), sim.truth);
      return;
    }
    const std::size_t n_train = (3 * d.n) / 4;
    std::vector<std::size_t> train_rows(n_train), test_rows(d.n - n_train);
    std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
    std::iota(test_rows.begin(), test_rows.end(), n_train);
    const Dataset train = sim.data.subset(train_rows);
    const Dataset test = sim.data.subset(test_rows);
    const ScreenResult result = screen(train, cfg);
    RepMetrics m = evaluate(result, sim.truth);
    const auto selected = result.selected_pairs();
    const auto prediction = predictor(train, selected, test);
    if (d.family == Family::Gaussian) {
      m.r2_out = out_of_sample_r2(test.response(), prediction);
    } else {
      m.pmr = misclassification_rate(test.response(), prediction);
    }
    run.per_rep[rep] = m;
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(rep_threads, static_cast<unsigned>(reps)));
  if (workers <= 1) {
    for (std::size_t r = 0; r < reps; ++r) one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
          for (std::size_t r = next++; r < reps; r = next++) {
            try {
              one(r);
            } catch (...) {
              std::lock_guard lock(failure_lock);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  run.summary = aggregate(run.per_rep);
  return run;
}

}  // namespace boltssi
