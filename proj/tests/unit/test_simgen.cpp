#include <doctest.h>

#include <cmath>
#include <set>

#include "boltssi/error.hpp"
#include "boltssi/simulate.hpp"

using namespace boltssi;

namespace {

double corr(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) ma += a[k], mb += b[k];
  ma /= n, mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::set<std::pair<int, int>> printed(Heredity h) {
  std::set<std::pair<int, int>> s;
  for (auto pr : interaction_set(h)) s.insert({int(pr.i) + 1, int(pr.j) + 1});
  return s;
}

ScreenResult fake_result(const std::vector<PairIndex>& selected) {
  ScreenResult r;
  for (auto pr : selected) r.ranked.push_back(ScoredPair{pr, 1.0, 1.0, 0, 1, true, true});
  r.ranked.push_back(ScoredPair{{40, 41}, 0.5, 0.5, 0, 1, true, false});
  r.n_selected = selected.size();
  return r;
}

}  // namespace

TEST_SUITE("simgen") {
  TEST_CASE("interaction tables as printed") {
    using P = std::set<std::pair<int, int>>;
    CHECK(printed(Heredity::Strong) ==
          P{{1, 2}, {1, 3}, {2, 3}, {2, 5}, {3, 4}, {6, 8}, {6, 10}, {7, 8}, {7, 9}, {9, 10}});
    CHECK(printed(Heredity::Weak) ==
          P{{1, 2}, {1, 13}, {2, 3}, {2, 15}, {3, 4}, {6, 10}, {6, 18}, {7, 9}, {7, 18}, {10, 19}});
    CHECK(printed(Heredity::Anti) == P{{11, 12}, {11, 13}, {12, 13}, {12, 15}, {13, 14},
                                       {16, 18}, {16, 20}, {17, 18}, {17, 19}, {19, 20}});
    CHECK(printed(Heredity::Mixed) == P{{1, 2}, {1, 3}, {2, 3}, {2, 15}, {6, 18},
                                        {7, 18}, {16, 20}, {17, 18}, {17, 19}, {19, 20}});
    for (Heredity h : {Heredity::Strong, Heredity::Weak, Heredity::Anti, Heredity::Mixed}) {
      CHECK(interaction_set(h).size() == 10);
    }
  }

  TEST_CASE("example designs") {
    for (int k = 1; k <= 8; ++k) {
      const auto d = SimDesign::example(k);
      CHECK(d.family == (k <= 4 ? Family::Gaussian : Family::Binomial));
      CHECK(d.main_set().size() == 10);
    }
    CHECK(SimDesign::example(3).heredity == Heredity::Anti);
    CHECK(SimDesign::example(7).heredity == Heredity::Anti);
    CHECK(SimDesign::example(8).heredity == Heredity::Mixed);
    CHECK_THROWS_AS(SimDesign::example(9), Error);
    CHECK_THROWS_AS(SimDesign::example(0), Error);
    SimDesign bad;
    bad.p = 15;
    CHECK_THROWS_AS(generate(bad), Error);
  }

  TEST_CASE("independent columns at rho = 0") {
    SimDesign d;
    d.n = 10000;
    d.p = 20;
    d.rho = 0.0;
    const auto sim = generate(d);
    const double tol = 4.0 / std::sqrt(double(d.n));
    for (std::size_t k = 0; k + 1 < d.p; ++k) {
      CHECK(std::abs(corr(sim.data.column(k), sim.data.column(k + 1))) < tol);
    }
  }

  TEST_CASE("AR(1) autocorrelation and unit variance") {
    SimDesign d;
    d.n = 10000;
    d.p = 20;
    d.rho = 0.5;
    const auto sim = generate(d);
    const double n = double(d.n);
    for (std::size_t k = 0; k + 2 < d.p; ++k) {
      CHECK(std::abs(corr(sim.data.column(k), sim.data.column(k + 2)) - 0.25) < 4 / std::sqrt(n));
      CHECK(std::abs(corr(sim.data.column(k), sim.data.column(k + 1)) - 0.5) < 4 / std::sqrt(n));
    }
    for (std::size_t k = 0; k < d.p; ++k) {
      double m = 0, ss = 0;
      for (double v : sim.data.column(k)) m += v;
      m /= n;
      for (double v : sim.data.column(k)) ss += (v - m) * (v - m);
      CHECK(std::abs(ss / (n - 1) - 1) < 5 / std::sqrt(n));
    }
  }

  TEST_CASE("noiseless generator identity") {
    SimDesign d = SimDesign::example(1);
    d.n = 50;
    d.p = 30;
    d.sigma = 0.0;
    const auto sim = generate(d);
    const auto& x = sim.data;
    for (std::size_t r = 0; r < d.n; ++r) {
      double expect = 0;
      for (int k = 0; k < 10; ++k) expect += x.column(k)[r];
      for (auto [a, b] : std::vector<std::pair<int, int>>{
               {1, 2}, {1, 3}, {2, 3}, {2, 5}, {3, 4}, {6, 8}, {6, 10}, {7, 8}, {7, 9}, {9, 10}}) {
        expect += 2 * x.column(a - 1)[r] * x.column(b - 1)[r];
      }
      CHECK(x.response()[r] == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  TEST_CASE("reproducible under a seed") {
    SimDesign d = SimDesign::example(5);
    d.n = 100;
    d.p = 25;
    const auto a = generate(d), b = generate(d);
    CHECK(std::equal(a.data.values().begin(), a.data.values().end(), b.data.values().begin()));
    CHECK(std::equal(a.data.response().begin(), a.data.response().end(), b.data.response().begin()));
    d.seed = 2;
    const auto c = generate(d);
    CHECK_FALSE(std::equal(a.data.values().begin(), a.data.values().end(), c.data.values().begin()));
    CHECK(replication_seed(1, 0) != replication_seed(1, 1));
  }

  TEST_CASE("logistic calibration") {
    SimDesign d = SimDesign::example(5);
    d.n = 50000;
    d.p = 20;
    d.beta_inter = 1.0;
    const auto sim = generate(d);
    // Bins of width 0.5 on the linear predictor.
    std::vector<double> count(40, 0), ones(40, 0), expected(40, 0);
    for (std::size_t r = 0; r < d.n; ++r) {
      const double eta = sim.eta[r];
      const int bin = std::clamp(int(std::floor(eta * 2)) + 20, 0, 39);
      count[bin] += 1;
      ones[bin] += sim.data.response()[r];
      expected[bin] += 1 / (1 + std::exp(-eta));
    }
    int bins = 0;
    for (int b = 0; b < 40; ++b) {
      if (count[b] < 200) continue;
      ++bins;
      const double pbar = expected[b] / count[b];
      const double se = std::sqrt(std::max(pbar * (1 - pbar), 1e-4) / count[b]);
      CHECK(std::abs(ones[b] / count[b] - pbar) < 4.5 * se);
    }
    CHECK(bins >= 8);
  }

  TEST_CASE("coverage metrics") {
    const auto truth = interaction_set(Heredity::Strong);
    CHECK(evaluate(fake_result(truth), truth).acr == 1.0);
    CHECK(evaluate(fake_result({{30, 31}, {32, 33}}), truth).acr == 0.0);
    std::vector<PairIndex> seven(truth.begin(), truth.begin() + 7);
    seven.push_back({30, 35});
    const auto m = evaluate(fake_result(seven), truth);
    CHECK(m.acr == doctest::Approx(0.7));
    CHECK(m.covered == 7);
    CHECK(m.model_size == 8);

    std::vector<RepMetrics> reps(4);
    for (int k = 0; k < 4; ++k) reps[k].acr = k * 0.25, reps[k].model_size = 10;
    const auto s = aggregate(reps);
    CHECK(s.acr == doctest::Approx(0.375));
    CHECK(s.ams == 10);
    CHECK(s.ams_se == 0);
    CHECK(s.acr_se == doctest::Approx(std::sqrt(0.3125 / 3 / 4)));
    CHECK_FALSE(s.r2_out.has_value());
  }

  TEST_CASE("prediction metrics") {
    const std::vector<double> y{1, 2, 3, 4};
    CHECK(out_of_sample_r2(y, y) == 100.0);
    CHECK(out_of_sample_r2(y, std::vector<double>(4, 2.5)) == 0.0);
    CHECK(misclassification_rate(std::vector<double>{0, 1, 1, 0}, std::vector<double>{0.2, 0.9, 0.4, 0.6}) == 50.0);
  }

  TEST_CASE("simulation runner with a predictor hook") {
    SimDesign d = SimDesign::example(1);
    d.n = 200;
    d.p = 30;
    ScreenConfig cfg;
    cfg.method = Method::Ssi;
    std::size_t calls = 0;
    Predictor mean_model = [&](const Dataset& train, std::span<const PairIndex>, const Dataset& test) {
      ++calls;
      CHECK(train.n() == 150);
      CHECK(test.n() == 50);
      double m = 0;
      for (double v : train.response()) m += v;
      return std::vector<double>(test.n(), m / train.n());
    };
    const auto run = run_simulation(d, cfg, 3, 1, mean_model);
    CHECK(calls == 3);
    REQUIRE(run.summary.r2_out.has_value());
    CHECK(*run.summary.r2_out < 5.0);

    const auto serial = run_simulation(d, cfg, 4, 1);
    const auto parallel = run_simulation(d, cfg, 4, 3);
    for (std::size_t r = 0; r < 4; ++r) {
      CHECK(serial.per_rep[r].acr == parallel.per_rep[r].acr);
      CHECK(serial.per_rep[r].model_size == parallel.per_rep[r].model_size);
    }
    CHECK(serial.summary.ams == 199);
  }
}
