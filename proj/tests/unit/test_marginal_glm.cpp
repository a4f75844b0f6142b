#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "../common/oracles.hpp"
#include "boltssi/chisq.hpp"
#include "boltssi/marginal_glm.hpp"

using namespace boltssi;

namespace {

Eigen::MatrixXd design(const Dataset& ds, PairIndex pr, bool inter) {
  const std::size_t n = ds.n();
  Eigen::MatrixXd X(n, inter ? 4 : 3);
  for (std::size_t r = 0; r < n; ++r) {
    const double a = ds.column(pr.i)[r], b = ds.column(pr.j)[r];
    X(r, 0) = 1;
    X(r, 1) = a;
    X(r, 2) = b;
    if (inter) X(r, 3) = a * b;
  }
  return X;
}

Eigen::VectorXd response(const Dataset& ds) {
  Eigen::VectorXd y(ds.n());
  for (std::size_t r = 0; r < ds.n(); ++r) y(r) = ds.response()[r];
  return y;
}

// Least squares by column-pivoted Householder QR.
struct LsFit {
  Eigen::VectorXd beta;
  double rss;
};

LsFit qr_fit(const Dataset& ds, PairIndex pr, bool inter) {
  const auto X = design(ds, pr, inter);
  const auto y = response(ds);
  Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  return {beta, (y - X * beta).squaredNorm()};
}

// Plain Newton-Raphson on the raw-basis logistic likelihood with LDLT.
struct LogitFit {
  Eigen::VectorXd beta;
  double nll;
};

LogitFit newton_logit(const Dataset& ds, PairIndex pr, bool inter) {
  const auto X = design(ds, pr, inter);
  const auto y = response(ds);
  const double n = static_cast<double>(ds.n());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  auto nll = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = X * b;
    double s = 0;
    for (Eigen::Index r = 0; r < eta.size(); ++r) {
      const double e = eta(r);
      s += (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) - e * y(r);
    }
    return s / n;
  };
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd p(eta.size()), w(eta.size());
    for (Eigen::Index r = 0; r < eta.size(); ++r) {
      p(r) = 1 / (1 + std::exp(-eta(r)));
      w(r) = p(r) * (1 - p(r));
    }
    const Eigen::VectorXd g = X.transpose() * (p - y);
    const Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
    Eigen::VectorXd step = H.ldlt().solve(g);
    double t = 1;
    const double f0 = nll(beta);
    while (nll(beta - t * step) > f0 + 1e-15 && t > 1e-10) t /= 2;
    beta -= t * step;
    if (step.lpNorm<Eigen::Infinity>() * t < 1e-13) break;
  }
  return {beta, nll(beta)};
}

Dataset random_gaussian(std::mt19937_64& rng, std::size_t n, std::size_t p, double inter) {
  auto x = oracle::normal_matrix(rng, n, p);
  std::normal_distribution<double> z;
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) y[r] = 0.5 + x[r] - x[n + r] + inter * x[r] * x[n + r] + z(rng);
  return Dataset(std::move(x), n, p, std::move(y), Family::Gaussian).standardize();
}

Dataset random_binomial(std::mt19937_64& rng, std::size_t n, std::size_t p, double inter) {
  auto x = oracle::normal_matrix(rng, n, p);
  std::uniform_real_distribution<double> u;
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double eta = 0.3 + 0.8 * x[r] - 0.5 * x[n + r] + inter * x[r] * x[n + r];
    y[r] = u(rng) < 1 / (1 + std::exp(-eta)) ? 1 : 0;
  }
  return Dataset(std::move(x), n, p, std::move(y), Family::Binomial);
}

}  // namespace

TEST_SUITE("marginal_glm") {
  TEST_CASE("noiseless Gaussian interaction model is interpolated") {
    const std::vector<double> xi{0.3, -1.2, 2.0, 0.7, -0.4, 1.5, -2.2, 0.9};
    const std::vector<double> xj{1.1, 0.4, -0.8, -1.9, 2.3, 0.2, -0.6, 1.7};
    std::vector<double> x(xi), y(8);
    x.insert(x.end(), xj.begin(), xj.end());
    for (int r = 0; r < 8; ++r) y[r] = 1 + 2 * xi[r] - xj[r] + 3 * xi[r] * xj[r];
    const Dataset ds(x, 8, 2, y, Family::Gaussian);
    const auto f4 = fit_marginal(ds, {0, 1}, true);
    const double expect[4] = {1, 2, -1, 3};
    for (int k = 0; k < 4; ++k) CHECK(std::abs(f4.beta[k] - expect[k]) < 1e-8);
    double ss = 0;
    for (double v : y) ss += v * v;
    CHECK(f4.neg_loglik == doctest::Approx(-ss / 16).epsilon(1e-12));
    const auto f3 = fit_marginal(ds, {0, 1}, false);
    CHECK(f4.neg_loglik <= f3.neg_loglik + 1e-10);
  }

  TEST_CASE("Gaussian fits agree with a QR oracle") {
    std::mt19937_64 rng(43);
    for (int rep = 0; rep < 200; ++rep) {
      const std::size_t n = 20 + rng() % 200;
      std::normal_distribution<double> z;
      auto x = oracle::normal_matrix(rng, n, 3);
      for (auto& v : x) v = v * 2.5 + 4;  // raw scale, not standardized
      std::vector<double> y(n);
      for (auto& v : y) v = 3 + z(rng) * 2;
      for (std::size_t r = 0; r < n; ++r) y[r] += 0.7 * x[r] * x[n + r];
      const Dataset ds(std::move(x), n, 3, std::move(y), Family::Gaussian);
      double ssy = 0;
      for (double v : ds.response()) ssy += v * v;
      for (PairIndex pr : {PairIndex{0, 1}, PairIndex{0, 2}, PairIndex{1, 2}}) {
        const auto q3 = qr_fit(ds, pr, false), q4 = qr_fit(ds, pr, true);
        const auto f3 = fit_marginal(ds, pr, false), f4 = fit_marginal(ds, pr, true);
        for (int k = 0; k < 3; ++k) CHECK(f3.beta[k] == doctest::Approx(q3.beta(k)).epsilon(1e-9));
        for (int k = 0; k < 4; ++k) CHECK(f4.beta[k] == doctest::Approx(q4.beta(k)).epsilon(1e-9));
        CHECK(f4.neg_loglik == doctest::Approx((q4.rss - ssy) / (2.0 * n)).epsilon(1e-10));
        const double L = ssi_score(ds, pr).increment;
        const double drss = q3.rss - q4.rss;
        // The QR oracle's own difference carries rounding of order eps * RSS3.
        CHECK(std::abs(2.0 * n * L - drss) <= 1e-8 * drss + 1e-13 * q3.rss);
        CHECK(L >= -1e-10);
        CHECK(f4.gradient_norm < 1e-6 * std::max(1.0, ssy / n));
      }
    }
  }

  TEST_CASE("logistic fits agree with a Newton oracle") {
    std::mt19937_64 rng(47);
    for (int rep = 0; rep < 100; ++rep) {
      const std::size_t n = 80 + rng() % 300;
      const Dataset ds = random_binomial(rng, n, 2, rep % 2 ? 1.0 : 0.0);
      const auto o3 = newton_logit(ds, {0, 1}, false), o4 = newton_logit(ds, {0, 1}, true);
      const auto f3 = fit_marginal(ds, {0, 1}, false), f4 = fit_marginal(ds, {0, 1}, true);
      REQUIRE(f4.status == FitStatus::Ok);
      CHECK(f3.neg_loglik == doctest::Approx(o3.nll).epsilon(1e-10));
      CHECK(f4.neg_loglik == doctest::Approx(o4.nll).epsilon(1e-10));
      for (int k = 0; k < 4; ++k) CHECK(std::abs(f4.beta[k] - o4.beta(k)) < 1e-6);
      CHECK(f4.converged);
      CHECK(f4.gradient_norm <= 1e-8);
      CHECK(ssi_score(ds, {0, 1}).increment >= -1e-10);
    }
  }

  TEST_CASE("nestedness on random instances") {
    std::mt19937_64 rng(53);
    for (int rep = 0; rep < 100; ++rep) {
      const Dataset g = random_gaussian(rng, 30 + rng() % 100, 4, 0.0);
      const Dataset b = random_binomial(rng, 30 + rng() % 100, 4, 0.0);
      const MarginalScorer sg(g), sb(b);
      for (auto pr : pair_iterator(4)) {
        CHECK(sg.score(pr).increment >= -1e-10);
        const auto s = sb.score(pr);
        if (s.status != FitStatus::Collinear) CHECK(s.increment >= -1e-10);
      }
    }
  }

  TEST_CASE("swap symmetry and scale equivariance") {
    std::mt19937_64 rng(59);
    for (Family fam : {Family::Gaussian, Family::Binomial}) {
      const Dataset ds = fam == Family::Gaussian ? random_gaussian(rng, 150, 2, 0.5)
                                                 : random_binomial(rng, 150, 2, 0.8);
      std::vector<double> swapped(ds.column(1).begin(), ds.column(1).end());
      swapped.insert(swapped.end(), ds.column(0).begin(), ds.column(0).end());
      const Dataset sw(swapped, 150, 2, {ds.response().begin(), ds.response().end()}, fam);
      CHECK(ssi_score(ds, {0, 1}).increment ==
            doctest::Approx(ssi_score(sw, {0, 1}).increment).epsilon(1e-9));

      std::vector<double> scaled(ds.values().begin(), ds.values().end());
      for (std::size_t r = 0; r < 150; ++r) scaled[r] = scaled[r] * 17.5 + 3;
      const Dataset raw(scaled, 150, 2, {ds.response().begin(), ds.response().end()}, fam);
      CHECK(ssi_score(raw.standardize(), {0, 1}).increment ==
            doctest::Approx(ssi_score(ds.standardize(), {0, 1}).increment).epsilon(1e-9));
    }
  }

  TEST_CASE("identical columns are collinear") {
    std::mt19937_64 rng(61);
    auto x = oracle::normal_matrix(rng, 50, 2);
    std::copy(x.begin(), x.begin() + 50, x.begin() + 50);
    std::vector<double> y(50);
    std::normal_distribution<double> z;
    for (auto& v : y) v = z(rng);
    const Dataset ds(x, 50, 2, y, Family::Gaussian);
    const auto s = ssi_score(ds, {0, 1});
    CHECK(s.status == FitStatus::Collinear);
    CHECK(std::isnan(s.increment));
  }

  TEST_CASE("separation is capped and flagged") {
    std::mt19937_64 rng(67);
    auto x = oracle::normal_matrix(rng, 60, 2);
    std::vector<double> y(60);
    for (std::size_t r = 0; r < 60; ++r) y[r] = x[r] > 0 ? 1 : 0;
    const Dataset ds(x, 60, 2, y, Family::Binomial);
    const auto f = fit_marginal(ds, {0, 1}, false);
    CHECK(f.status == FitStatus::Separation);
    CHECK_FALSE(f.converged);
    const auto s = ssi_score(ds, {0, 1});
    CHECK(std::isfinite(s.increment));
    CHECK(s.increment >= -1e-10);
  }

  TEST_CASE("logistic null: L below the 0.999 chi-square quantile / 2n") {
    std::mt19937_64 rng(71);
    const std::size_t n = 1000;
    const double cut = chisq_critical(1, 0.001) / (2.0 * n);
    int below = 0;
    std::bernoulli_distribution coin(0.5);
    for (int rep = 0; rep < 500; ++rep) {
      auto x = oracle::normal_matrix(rng, n, 2);
      std::vector<double> y(n);
      for (auto& v : y) v = coin(rng) ? 1 : 0;
      const Dataset ds(std::move(x), n, 2, std::move(y), Family::Binomial);
      below += ssi_score(ds, {0, 1}).increment < cut ? 1 : 0;
    }
    CHECK(below >= 495);
  }

  TEST_CASE("planted interaction beats the null pairs") {
    std::mt19937_64 rng(73);
    int wins = 0;
    const std::size_t n = 500, p = 30;
    for (int rep = 0; rep < 100; ++rep) {
      auto x = oracle::normal_matrix(rng, n, p);
      std::normal_distribution<double> z;
      std::vector<double> y(n);
      for (std::size_t r = 0; r < n; ++r) y[r] = 2 * x[10 * n + r] * x[11 * n + r] + 2 * z(rng);
      const Dataset ds(std::move(x), n, p, std::move(y), Family::Gaussian);
      const MarginalScorer sc(ds);
      std::vector<double> null;
      double truth = 0;
      for (auto pr : pair_iterator(p)) {
        const double s = sc.score(pr).increment;
        if (pr == PairIndex{10, 11}) truth = s;
        else null.push_back(s);
      }
      std::sort(null.begin(), null.end());
      wins += truth > null[static_cast<std::size_t>(0.99 * null.size())] ? 1 : 0;
    }
    CHECK(wins >= 95);
  }
}
