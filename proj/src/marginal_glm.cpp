#include "boltssi/marginal_glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "boltssi/error.hpp"
#include "boltssi/kernels.hpp"

namespace boltssi {

const char* to_string(FitStatus status) noexcept {
  switch (status) {
    case FitStatus::Ok: return "ok";
    case FitStatus::Collinear: return "collinear";
    case FitStatus::Separation: return "separation";
    case FitStatus::NotConverged: return "not_converged";
  }
  return "unknown";
}

namespace {

constexpr double kPivotTolerance = 1e-10;
constexpr unsigned kMaxNewtonIterations = 50;
constexpr double kStepTolerance = 1e-8;
constexpr double kScoreTolerance = 1e-10;

// In-place upper Cholesky factor of a dim x dim symmetric matrix (row-major,
// upper triangle read). Returns false when pivot k < dim_checked falls below
// kPivotTolerance relative to the original diagonal entry.
template <std::size_t N>
bool cholesky(std::array<double, N * N>& g, std::size_t dim, std::size_t dim_checked) {
  std::array<double, N> diag{};
  for (std::size_t k = 0; k < dim; ++k) diag[k] = g[k * N + k];
  for (std::size_t k = 0; k < dim; ++k) {
    double d = g[k * N + k];
    for (std::size_t m = 0; m < k; ++m) d -= g[m * N + k] * g[m * N + k];
    if (k < dim_checked && !(d > kPivotTolerance * std::max(diag[k], 1e-300))) return false;
    const double r = std::sqrt(std::max(d, 0.0));
    g[k * N + k] = r;
    for (std::size_t c = k + 1; c < dim; ++c) {
      double v = g[k * N + c];
      for (std::size_t m = 0; m < k; ++m) v -= g[m * N + k] * g[m * N + c];
      g[k * N + c] = r > 0.0 ? v / r : 0.0;
    }
  }
  return true;
}

// Solves R c = rhs for the leading dim x dim block of an upper factor.
template <std::size_t N>
std::array<double, 4> back_substitute(const std::array<double, N * N>& r, std::size_t dim,
                                      const std::array<double, 4>& rhs) {
  std::array<double, 4> c{};
  for (std::size_t k = dim; k-- > 0;) {
    double v = rhs[k];
    for (std::size_t m = k + 1; m < dim; ++m) v -= r[k * N + m] * c[m];
    c[k] = v / r[k * N + k];
  }
  return c;
}

inline double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

inline double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

}  // namespace

// Gram matrix of the centered basis (1, a, b, w = a b) augmented with the
// centered response, row-major 5 x 5.
struct MarginalScorer::Gram {
  std::array<double, 25> g{};
};

MarginalScorer::MarginalScorer(const Dataset& ds)
    : n_(ds.n()), p_(ds.p()), family_(ds.family()), xc_(ds.n() * ds.p()) {
  means_.resize(p_);
  sum_c_.resize(p_);
  sum_cc_.resize(p_);
  sum_cy_.resize(p_);
  const auto y = ds.response();
  y_.assign(y.begin(), y.end());
  y_mean_ = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n_);
  yc_.resize(n_);
  for (std::size_t r = 0; r < n_; ++r) {
    yc_[r] = y[r] - y_mean_;
    y_sum_c_ += yc_[r];
    y_ss_c_ += yc_[r] * yc_[r];
    y_ss_raw_ += y[r] * y[r];
  }
  for (std::size_t k = 0; k < p_; ++k) {
    const auto col = ds.column(k);
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n_);
    means_[k] = mean;
    double* out = xc_.data() + k * n_;
    for (std::size_t r = 0; r < n_; ++r) {
      out[r] = col[r] - mean;
      sum_c_[k] += out[r];
      sum_cc_[k] += out[r] * out[r];
      sum_cy_[k] += out[r] * yc_[r];
    }
  }
}

MarginalScorer::Gram MarginalScorer::gram(PairIndex pair) const {
  if (pair.i >= p_ || pair.j >= p_ || pair.i == pair.j) {
    throw Error(ErrorKind::IndexOutOfRange, "invalid pair for marginal fit");
  }
  const std::size_t a = pair.i, b = pair.j;
  const kernels::PairMoments m = kernels::kernel_set(kernels::active_isa())
                                     .pair_moments(centered(a), centered(b), yc_.data(), n_);
  Gram out;
  auto& g = out.g;
  auto set = [&](int r, int c, double v) {
    g[r * 5 + c] = v;
    g[c * 5 + r] = v;
  };
  set(0, 0, static_cast<double>(n_));
  set(0, 1, sum_c_[a]);
  set(0, 2, sum_c_[b]);
  set(0, 3, m.w);
  set(0, 4, y_sum_c_);
  set(1, 1, sum_cc_[a]);
  set(1, 2, m.w);
  set(1, 3, m.aw);
  set(1, 4, sum_cy_[a]);
  set(2, 2, sum_cc_[b]);
  set(2, 3, m.bw);
  set(2, 4, sum_cy_[b]);
  set(3, 3, m.ww);
  set(3, 4, m.wy);
  set(4, 4, y_ss_c_);
  return out;
}

void MarginalScorer::finish(MarginalFit& fit, PairIndex pair) const {
  // Map centered-basis coefficients (c0..c3) to the raw basis.
  const double ma = means_[pair.i], mb = means_[pair.j];
  const auto c = fit.beta;
  const double c3 = fit.parameters == 4 ? c[3] : 0.0;
  const double shift = family_ == Family::Gaussian ? y_mean_ : 0.0;
  fit.beta[0] = shift + c[0] - c[1] * ma - c[2] * mb + c3 * ma * mb;
  fit.beta[1] = c[1] - c3 * mb;
  fit.beta[2] = c[2] - c3 * ma;
  fit.beta[3] = c3;

  // Empirical score (1/n) X^T (b'(theta) - y) in the raw basis.
  const double* a = centered(pair.i);
  const double* b = centered(pair.j);
  std::array<double, 4> grad{};
  for (std::size_t r = 0; r < n_; ++r) {
    const double xa = a[r] + ma, xb = b[r] + mb;
    const double theta = fit.beta[0] + fit.beta[1] * xa + fit.beta[2] * xb + fit.beta[3] * xa * xb;
    const double resid = (family_ == Family::Gaussian ? theta : logistic(theta)) - y_[r];
    grad[0] += resid;
    grad[1] += resid * xa;
    grad[2] += resid * xb;
    grad[3] += resid * xa * xb;
  }
  double norm = 0.0;
  for (std::size_t k = 0; k < fit.parameters; ++k) norm += grad[k] * grad[k];
  fit.gradient_norm = std::sqrt(norm) / static_cast<double>(n_);
}

MarginalFit MarginalScorer::fit_gaussian(PairIndex pair, bool with_interaction) const {
  const Gram full = gram(pair);
  MarginalFit fit;
  fit.parameters = with_interaction ? 4 : 3;
  fit.iterations = 1;

  // Factor [design | y]; without the interaction the w row/column is dropped.
  const std::size_t k = fit.parameters;
  std::array<double, 25> g{};
  std::array<std::size_t, 5> cols{0, 1, 2, 3, 4};
  if (!with_interaction) cols = {0, 1, 2, 4, 4};
  for (std::size_t r = 0; r <= k; ++r) {
    for (std::size_t c = 0; c <= k; ++c) g[r * 5 + c] = full.g[cols[r] * 5 + cols[c]];
  }
  if (!cholesky<5>(g, k + 1, k)) {
    fit.status = FitStatus::Collinear;
    fit.neg_loglik = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  std::array<double, 4> rhs{};
  for (std::size_t r = 0; r < k; ++r) rhs[r] = g[r * 5 + k];
  fit.beta = back_substitute<5>(g, k, rhs);
  const double rss = g[k * 5 + k] * g[k * 5 + k];
  fit.neg_loglik = (rss - y_ss_raw_) / (2.0 * static_cast<double>(n_));
  fit.converged = true;
  finish(fit, pair);
  return fit;
}

SsiScore MarginalScorer::score_gaussian(PairIndex pair) const {
  Gram gm = gram(pair);
  SsiScore s;
  if (!cholesky<5>(gm.g, 5, 4)) {
    s.status = FitStatus::Collinear;
    s.increment = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  // RSS_3 - RSS_4 is the squared (w, y) entry of the factor.
  const double r34 = gm.g[3 * 5 + 4];
  s.increment = r34 * r34 / (2.0 * static_cast<double>(n_));
  return s;
}

MarginalFit MarginalScorer::fit_logistic(PairIndex pair, bool with_interaction,
                                         const MarginalFit* warm) const {
  MarginalFit fit;
  fit.parameters = with_interaction ? 4 : 3;
  const std::size_t k = fit.parameters;

  {
    Gram design = gram(pair);
    if (!cholesky<5>(design.g, k, k)) {
      fit.status = FitStatus::Collinear;
      fit.neg_loglik = std::numeric_limits<double>::quiet_NaN();
      return fit;
    }
  }

  const double* a = centered(pair.i);
  const double* b = centered(pair.j);
  const double inv_n = 1.0 / static_cast<double>(n_);

  struct Eval {
    double loss = 0.0;
    std::array<double, 4> grad{};
    std::array<double, 16> hess{};
  };
  auto evaluate = [&](const std::array<double, 4>& beta) {
    Eval e;
    for (std::size_t r = 0; r < n_; ++r) {
      const std::array<double, 4> x{1.0, a[r], b[r], a[r] * b[r]};
      double eta = beta[0] + beta[1] * x[1] + beta[2] * x[2];
      if (k == 4) eta += beta[3] * x[3];
      e.loss += softplus(eta) - y_[r] * eta;
      const double mu = logistic(eta);
      const double v = mu * (1.0 - mu);
      const double resid = mu - y_[r];
      for (std::size_t u = 0; u < k; ++u) {
        e.grad[u] += resid * x[u];
        for (std::size_t t = u; t < k; ++t) e.hess[u * 4 + t] += v * x[u] * x[t];
      }
    }
    e.loss *= inv_n;
    for (std::size_t u = 0; u < k; ++u) {
      e.grad[u] *= inv_n;
      for (std::size_t t = u; t < k; ++t) e.hess[u * 4 + t] *= inv_n;
    }
    return e;
  };

  std::array<double, 4> beta{};
  if (warm != nullptr && warm->status != FitStatus::Collinear) {
    beta = warm->beta;  // centered-basis coefficients of the nested fit
    beta[3] = 0.0;
  } else {
    const double ybar = std::clamp(y_mean_, 1e-12, 1.0 - 1e-12);
    beta[0] = std::log(ybar / (1.0 - ybar));
  }

  Eval cur = evaluate(beta);
  fit.status = FitStatus::NotConverged;
  for (unsigned it = 1; it <= kMaxNewtonIterations; ++it) {
    fit.iterations = it;
    double gnorm = 0.0;
    for (std::size_t u = 0; u < k; ++u) gnorm += cur.grad[u] * cur.grad[u];
    if (std::sqrt(gnorm) <= kScoreTolerance) {
      fit.status = FitStatus::Ok;
      break;
    }

    std::array<double, 16> h = cur.hess;
    if (!cholesky<4>(h, k, k)) {
      // Weights have collapsed (complete separation); keep the current fit.
      fit.status = FitStatus::Separation;
      break;
    }
    // Newton direction: solve R^T R d = grad.
    std::array<double, 4> z{};
    for (std::size_t u = 0; u < k; ++u) {
      double v = cur.grad[u];
      for (std::size_t m = 0; m < u; ++m) v -= h[m * 4 + u] * z[m];
      z[u] = v / h[u * 4 + u];
    }
    const std::array<double, 4> dir = back_substitute<4>(h, k, z);

    double step = 1.0;
    bool accepted = false;
    bool capped = false;
    std::array<double, 4> trial{};
    Eval next;
    for (int halving = 0; halving < 40 && !accepted; ++halving, step *= 0.5) {
      double t = step;
      for (std::size_t u = 0; u < k; ++u) {
        if (dir[u] == 0.0) continue;
        const double limit = dir[u] > 0.0 ? (beta[u] + kLogisticCoefficientCap) / dir[u]
                                          : (beta[u] - kLogisticCoefficientCap) / dir[u];
        if (limit < t) t = std::max(limit, 0.0);
      }
      capped = t < step;
      for (std::size_t u = 0; u < k; ++u) trial[u] = beta[u] - t * dir[u];
      next = evaluate(trial);
      // Near the optimum the Newton decrease falls below the rounding of the loss.
      const double slack = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(cur.loss));
      if (next.loss <= cur.loss + slack) {
        accepted = true;
        double change = 0.0;
        for (std::size_t u = 0; u < k; ++u) change = std::max(change, std::abs(t * dir[u]));
        beta = trial;
        cur = next;
        if (capped) {
          fit.status = FitStatus::Separation;
        } else if (change <= kStepTolerance) {
          fit.status = FitStatus::Ok;
        }
      }
    }
    if (!accepted) {
      // No descent left at working precision: stationary point.
      fit.status = FitStatus::Ok;
      break;
    }
    if (fit.status != FitStatus::NotConverged) break;
  }

  fit.beta = beta;
  fit.neg_loglik = cur.loss;
  fit.converged = fit.status == FitStatus::Ok;
  return fit;
}

MarginalFit MarginalScorer::fit(PairIndex pair, bool with_interaction) const {
  if (family_ == Family::Gaussian) return fit_gaussian(pair, with_interaction);
  MarginalFit result;
  if (with_interaction) {
    const MarginalFit nested = fit_logistic(pair, false, nullptr);
    result = fit_logistic(pair, true, &nested);
  } else {
    result = fit_logistic(pair, false, nullptr);
  }
  if (result.status != FitStatus::Collinear) finish(result, pair);
  return result;
}

SsiScore MarginalScorer::score(PairIndex pair) const {
  if (family_ == Family::Gaussian) return score_gaussian(pair);
  SsiScore s;
  const MarginalFit nested = fit_logistic(pair, false, nullptr);
  if (nested.status == FitStatus::Collinear) {
    s.status = FitStatus::Collinear;
    s.increment = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  const MarginalFit full = fit_logistic(pair, true, &nested);
  if (full.status == FitStatus::Collinear) {
    s.status = FitStatus::Collinear;
    s.increment = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.increment = std::max(0.0, nested.neg_loglik - full.neg_loglik);
  s.status = nested.status != FitStatus::Ok ? nested.status : full.status;
  s.converged = nested.converged && full.converged;
  return s;
}

MarginalFit fit_marginal(const Dataset& ds, PairIndex pair, bool with_interaction) {
  return MarginalScorer(ds).fit(pair, with_interaction);
}

SsiScore ssi_score(const Dataset& ds, PairIndex pair) { return MarginalScorer(ds).score(pair); }

}  // namespace boltssi
