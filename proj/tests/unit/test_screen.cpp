#include <doctest.h>

#include <cmath>
#include <random>

#include "../common/oracles.hpp"
#include "boltssi/error.hpp"
#include "boltssi/marginal_glm.hpp"
#include "boltssi/screen.hpp"

using namespace boltssi;

namespace {

Dataset planted(std::uint64_t seed, std::size_t n, std::size_t p, PairIndex pr, Family fam) {
  std::mt19937_64 rng(seed);
  auto x = oracle::normal_matrix(rng, n, p);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double eta = 1.5 * x[pr.i * n + r] * x[pr.j * n + r];
    y[r] = fam == Family::Gaussian ? eta + z(rng) : (u(rng) < 1 / (1 + std::exp(-eta)) ? 1 : 0);
  }
  return Dataset(std::move(x), n, p, std::move(y), fam);
}

bool same(const ScreenResult& a, const ScreenResult& b) {
  if (a.ranked.size() != b.ranked.size() || a.pruned.size() != b.pruned.size()) return false;
  for (std::size_t k = 0; k < a.ranked.size(); ++k) {
    const auto &x = a.ranked[k], &y = b.ranked[k];
    if (x.pair != y.pair || x.score != y.score || x.statistic != y.statistic || x.df != y.df ||
        x.selected != y.selected || x.ksa_statistic != y.ksa_statistic)
      return false;
  }
  return true;
}

std::vector<ScoredPair> scored(std::initializer_list<double> scores) {
  std::vector<ScoredPair> v;
  std::uint32_t j = 1;
  for (double s : scores) v.push_back(ScoredPair{{0, j++}, s, s, 0, 1, true, false});
  return v;
}

}  // namespace

TEST_SUITE("screen") {
  TEST_CASE("planted pair ranks first among three") {
    for (Family fam : {Family::Gaussian, Family::Binomial}) {
      const Dataset ds = planted(79, 400, 3, {1, 2}, fam);
      // Brute force: score each pair from the two marginal fits.
      double best = -1;
      PairIndex arg{};
      for (auto pr : pair_iterator(3)) {
        const double L = fit_marginal(ds, pr, false).neg_loglik - fit_marginal(ds, pr, true).neg_loglik;
        if (L > best) best = L, arg = pr;
      }
      CHECK(arg == PairIndex{1, 2});
      for (Method m : {Method::Ssi, Method::BoltSsi}) {
        ScreenConfig cfg;
        cfg.method = m;
        cfg.selection = TopD{1};
        const auto r = screen(ds, cfg);
        CHECK(r.ranked.front().pair == PairIndex{1, 2});
        CHECK(r.selected_pairs() == std::vector<PairIndex>{{1, 2}});
        if (m == Method::Ssi) CHECK(r.ranked.front().score == doctest::Approx(best).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("KSA with zero threshold equals plain BOLT") {
    const Dataset ds = planted(83, 300, 25, {3, 7}, Family::Binomial);
    ScreenConfig a;
    a.method = Method::BoltSsi;
    ScreenConfig b = a;
    b.method = Method::BoltSsiKsa;
    b.ksa_gamma = 0.0;
    const auto ra = screen(ds, a), rb = screen(ds, b);
    CHECK(rb.n_pruned_by_ksa == 0);
    REQUIRE(ra.ranked.size() == rb.ranked.size());
    for (std::size_t k = 0; k < ra.ranked.size(); ++k) {
      CHECK(ra.ranked[k].pair == rb.ranked[k].pair);
      CHECK(ra.ranked[k].score == rb.ranked[k].score);
      CHECK(ra.ranked[k].selected == rb.ranked[k].selected);
    }
  }

  TEST_CASE("pruned pairs stay below the KSA threshold") {
    const Dataset ds = planted(89, 250, 30, {0, 5}, Family::Gaussian);
    for (double gamma : {0.5, 2.0, 6.0, 15.0}) {
      ScreenConfig cfg;
      cfg.method = Method::BoltSsiKsa;
      cfg.ksa_gamma = gamma;
      cfg.audit_pruning = true;
      const auto r = screen(ds, cfg);
      CHECK(r.n_pruned_by_ksa > 0);
      for (const auto& pr : r.pruned) {
        REQUIRE(pr.audited_statistic.has_value());
        CHECK(*pr.audited_statistic < gamma);
        CHECK(pr.ksa_statistic < gamma);
      }
      CHECK(r.n_evaluated + r.n_pruned_by_ksa + r.n_skipped == pair_count(30));
    }
    ScreenConfig bonf;
    bonf.method = Method::BoltSsiKsa;
    bonf.ksa_gamma = BonferroniAlpha{0.05};
    const auto r = screen(ds, bonf);
    CHECK(r.n_pruned_by_ksa > 0);
    CHECK(r.ranked.front().pair == PairIndex{0, 5});
  }

  TEST_CASE("thread count does not change the output") {
    const Dataset ds = planted(97, 200, 60, {2, 9}, Family::Gaussian);
    for (Method m : {Method::Ssi, Method::BoltSsi, Method::BoltSsiKsa}) {
      ScreenConfig c1;
      c1.method = m;
      c1.ksa_gamma = 1.0;
      ScreenConfig c8 = c1;
      c8.threads = 8;
      const auto r1 = screen(ds, c1), r8 = screen(ds, c8);
      CHECK(r8.threads_used == 8);
      CHECK(same(r1, r8));
    }
  }

  TEST_CASE("ranking order and accounting") {
    const Dataset ds = planted(101, 120, 15, {4, 5}, Family::Gaussian);
    const auto r = screen(ds, ScreenConfig{});
    for (std::size_t k = 1; k < r.ranked.size(); ++k) {
      const auto &a = r.ranked[k - 1], &b = r.ranked[k];
      CHECK((a.score > b.score || (a.score == b.score && a.pair < b.pair)));
    }
    CHECK(r.n_evaluated == pair_count(15));
    CHECK(r.resolved_d == 120);
    CHECK(r.n_selected == std::min<std::uint64_t>(120, pair_count(15)));
  }

  TEST_CASE("top-d resolution") {
    CHECK(resolve_top_d(TopDAuto{}, Method::Ssi, 500, 2000) == 499);
    CHECK(resolve_top_d(TopDAuto{}, Method::BoltSsi, 500, 2000) == 2000);
    CHECK(resolve_top_d(TopDAuto{}, Method::BoltSsiKsa, 800, 300) == 800);
    CHECK(resolve_top_d(TopDNLogN{}, Method::Ssi, 500, 2000) == 80);
    CHECK(resolve_top_d(TopD{7}, Method::Ssi, 500, 2000) == 7);
    CHECK(resolve_top_d(Threshold{1.0}, Method::Ssi, 500, 2000) == 0);
  }

  TEST_CASE("selection rules") {
    const auto s = scored({3, 1, 2});
    CHECK(select(s, TopD{2}, 10, 10) == std::vector<bool>{true, false, true});
    CHECK(select(s, Threshold{2.0}, 10, 10) == std::vector<bool>{true, false, true});
    CHECK(select(s, Threshold{5.0}, 10, 10) == std::vector<bool>{false, false, false});
    const auto tied = scored({1, 1, 1});
    CHECK(select(tied, TopD{2}, 10, 10) == std::vector<bool>{true, true, false});
    const auto with_nan = scored({std::nan(""), 1});
    CHECK(select(with_nan, TopD{2}, 10, 10) == std::vector<bool>{false, true});
  }

  TEST_CASE("top-d is monotone in d") {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> u;
    std::vector<ScoredPair> v;
    for (std::uint32_t j = 1; j < 200; ++j) v.push_back(ScoredPair{{0, j}, std::floor(u(rng) * 20)});
    for (std::uint64_t d = 1; d < 60; ++d) {
      const auto a = select(v, TopD{d}, 10, 10), b = select(v, TopD{d + 1}, 10, 10);
      for (std::size_t k = 0; k < v.size(); ++k) CHECK((!a[k] || b[k]));
    }
  }

  TEST_CASE("Bonferroni uses each pair's df") {
    std::vector<ScoredPair> v{ScoredPair{{0, 1}, 0, 63.332, 0, 4},
                              ScoredPair{{0, 2}, 0, 53.566, 0, 4},
                              ScoredPair{{0, 3}, 0, 53.566, 0, 1}};
    CHECK(select(v, BonferroniAlpha{0.05}, 5000, 319156) == std::vector<bool>{true, false, true});
  }

  TEST_CASE("degenerate and collinear pairs are skipped") {
    std::mt19937_64 rng(107);
    auto x = oracle::normal_matrix(rng, 60, 4);
    std::fill(x.begin() + 120, x.begin() + 180, 2.5);  // column 2 constant
    std::vector<double> y(60);
    for (std::size_t r = 0; r < 60; ++r) y[r] = x[r] + x[60 + r] + 0.5 * x[180 + r];
    const Dataset ds(x, 60, 4, y, Family::Gaussian);
    for (Method m : {Method::Ssi, Method::BoltSsi}) {
      ScreenConfig cfg;
      cfg.method = m;
      const auto r = screen(ds, cfg);
      CHECK(r.n_skipped == 3);
      CHECK(r.n_evaluated == 3);
      for (const auto& s : r.skipped) CHECK((s.pair.i == 2 || s.pair.j == 2));
      CHECK(r.skipped.front().reason ==
            (m == Method::Ssi ? SkipReason::Collinear : SkipReason::DegenerateColumn));
    }
  }

  TEST_CASE("BOLT needs two usable columns") {
    std::vector<double> x(40, 1.0);
    for (int r = 0; r < 10; ++r) x[r] = r;
    std::vector<double> y(10);
    for (int r = 0; r < 10; ++r) y[r] = r;
    const Dataset ds(x, 10, 4, y, Family::Gaussian);
    CHECK_THROWS_AS(screen(ds, ScreenConfig{}), Error);
  }

  TEST_CASE("parsing and validation") {
    CHECK(std::holds_alternative<TopDAuto>(parse_selection("topd:auto")));
    CHECK(std::holds_alternative<TopDNLogN>(parse_selection("topd:nlogn")));
    CHECK(std::get<TopD>(parse_selection("topd:500")).d == 500);
    CHECK(std::get<Threshold>(parse_selection("threshold:0.25")).gamma == 0.25);
    CHECK(std::get<BonferroniAlpha>(parse_selection("bonferroni:0.01")).alpha == 0.01);
    CHECK(std::get<double>(parse_ksa_threshold("3.5")) == 3.5);
    CHECK(std::get<BonferroniAlpha>(parse_ksa_threshold("bonferroni:0.05")).alpha == 0.05);
    CHECK(parse_method("bolt-ksa") == Method::BoltSsiKsa);
    for (const char* bad : {"topd:0", "topd:1.5", "threshold:-1", "bonferroni:1", "bonferroni:0",
                            "best:3", "topd:x"}) {
      CHECK_THROWS_AS(parse_selection(bad), Error);
    }
    CHECK_THROWS_AS(parse_ksa_threshold("-2"), Error);
    CHECK_THROWS_AS(parse_method("fast"), Error);
    ScreenConfig cfg;
    cfg.arity.predictor_arity = 1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = ScreenConfig{};
    cfg.selection = TopD{0};
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK(resolve_threads(3) == 3);
    CHECK(resolve_threads(0) >= 1);
  }
}
