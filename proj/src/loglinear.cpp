#include "boltssi/loglinear.hpp"

#include <algorithm>
#include <cmath>

#include "boltssi/error.hpp"

namespace boltssi {

namespace {

// Observed cells and margins as reals, with the optional pseudo-count folded in.
struct Observed {
  unsigned rows, cols, classes;
  std::array<double, kMaxCells> n{};
  std::array<double, kMaxArity * kMaxArity> ij{};
  std::array<double, kMaxArity * kMaxClasses> ik{};
  std::array<double, kMaxArity * kMaxClasses> jk{};
  std::array<double, kMaxArity> i{};
  std::array<double, kMaxArity> j{};
  std::array<double, kMaxClasses> k{};
  double total = 0.0;

  Observed(const ContingencyTable3& t, double pseudo)
      : rows(t.rows()), cols(t.cols()), classes(t.classes()) {
    const auto counts = t.counts();
    for (std::size_t x = 0; x < counts.size(); ++x) n[x] = counts[x] + pseudo;
    for (unsigned a = 0; a < rows; ++a) {
      for (unsigned b = 0; b < cols; ++b) {
        for (unsigned c = 0; c < classes; ++c) {
          const double v = n[(a * cols + b) * classes + c];
          ij[a * cols + b] += v;
          ik[a * classes + c] += v;
          jk[b * classes + c] += v;
          i[a] += v;
          j[b] += v;
          k[c] += v;
          total += v;
        }
      }
    }
  }

  std::size_t cells() const { return std::size_t{rows} * cols * classes; }
};

double kernel_value(const Observed& obs, const std::array<double, kMaxCells>& mu) {
  double value = 0.0;
  for (std::size_t x = 0; x < obs.cells(); ++x) {
    if (obs.n[x] > 0.0) value += obs.n[x] * std::log(mu[x]);
    value -= mu[x];
  }
  return value;
}

double increment_value(const Observed& obs, const std::array<double, kMaxCells>& mu) {
  double gap = 0.0;
  double fitted_total = 0.0;
  for (std::size_t x = 0; x < obs.cells(); ++x) {
    if (obs.n[x] > 0.0) gap += obs.n[x] * std::log(obs.n[x] / mu[x]);
    fitted_total += mu[x];
  }
  return std::max(0.0, gap - obs.total + fitted_total);
}

inline double ratio(double target, double current) {
  return current > 0.0 ? target / current : 0.0;
}

}  // namespace

double saturated_loglik(const ContingencyTable3& t, double pseudo_count) {
  const Observed obs(t, pseudo_count);
  double value = 0.0;
  for (std::size_t x = 0; x < obs.cells(); ++x) {
    if (obs.n[x] > 0.0) value += obs.n[x] * std::log(obs.n[x]);
    value -= obs.n[x];
  }
  return value;
}

LogLinearFit ipf_fit(const ContingencyTable3& t, const IpfOptions& options) {
  const Observed obs(t, options.pseudo_count);
  const unsigned I = obs.rows, J = obs.cols, K = obs.classes;
  LogLinearFit fit;
  fit.rows = I;
  fit.cols = J;
  fit.classes = K;
  auto& mu = fit.mu;
  const std::size_t cells = obs.cells();
  std::fill_n(mu.begin(), cells, obs.total / static_cast<double>(cells));

  auto at = [&](unsigned a, unsigned b, unsigned c) -> double& { return mu[(a * J + b) * K + c]; };

  for (unsigned cycle = 1; cycle <= options.max_cycles; ++cycle) {
    for (unsigned a = 0; a < I; ++a) {
      for (unsigned b = 0; b < J; ++b) {
        double s = 0.0;
        for (unsigned c = 0; c < K; ++c) s += at(a, b, c);
        const double f = ratio(obs.ij[a * J + b], s);
        for (unsigned c = 0; c < K; ++c) at(a, b, c) *= f;
      }
    }
    for (unsigned a = 0; a < I; ++a) {
      for (unsigned c = 0; c < K; ++c) {
        double s = 0.0;
        for (unsigned b = 0; b < J; ++b) s += at(a, b, c);
        const double f = ratio(obs.ik[a * K + c], s);
        for (unsigned b = 0; b < J; ++b) at(a, b, c) *= f;
      }
    }
    for (unsigned b = 0; b < J; ++b) {
      for (unsigned c = 0; c < K; ++c) {
        double s = 0.0;
        for (unsigned a = 0; a < I; ++a) s += at(a, b, c);
        const double f = ratio(obs.jk[b * K + c], s);
        for (unsigned a = 0; a < I; ++a) at(a, b, c) *= f;
      }
    }

    // The +jk margins are exact after the last step; check the other two.
    double worst = 0.0;
    for (unsigned a = 0; a < I; ++a) {
      std::array<double, kMaxClasses> by_class{};
      for (unsigned b = 0; b < J; ++b) {
        double s = 0.0;
        for (unsigned c = 0; c < K; ++c) {
          s += at(a, b, c);
          by_class[c] += at(a, b, c);
        }
        worst = std::max(worst, std::abs(s - obs.ij[a * J + b]));
      }
      for (unsigned c = 0; c < K; ++c) {
        worst = std::max(worst, std::abs(by_class[c] - obs.ik[a * K + c]));
      }
    }
    fit.iterations = cycle;
    fit.max_discrepancy = worst;
    if (worst <= options.tol) {
      fit.converged = true;
      break;
    }
  }
  fit.loglik_kernel = kernel_value(obs, mu);
  return fit;
}

LogLinearFit ksa_fit(const ContingencyTable3& t, double pseudo_count) {
  const Observed obs(t, pseudo_count);
  const unsigned I = obs.rows, J = obs.cols, K = obs.classes;
  LogLinearFit fit;
  fit.rows = I;
  fit.cols = J;
  fit.classes = K;
  double eta = 0.0;
  for (unsigned a = 0; a < I; ++a) {
    for (unsigned b = 0; b < J; ++b) {
      for (unsigned c = 0; c < K; ++c) {
        const double den = obs.i[a] * obs.j[b] * obs.k[c];
        const double raw =
            den > 0.0 ? obs.ij[a * J + b] * obs.ik[a * K + c] * obs.jk[b * K + c] / den : 0.0;
        fit.mu[(a * J + b) * K + c] = raw;
        eta += raw;
      }
    }
  }
  const double scale = eta > 0.0 ? obs.total / eta : 0.0;
  for (std::size_t x = 0; x < obs.cells(); ++x) fit.mu[x] *= scale;
  fit.loglik_kernel = kernel_value(obs, fit.mu);
  fit.converged = true;
  return fit;
}

double ksa_loglik(const ContingencyTable3& t, double pseudo_count) {
  return ksa_fit(t, pseudo_count).loglik_kernel;
}

double loglik_increment(const ContingencyTable3& t, const LogLinearFit& fit, double pseudo_count) {
  return increment_value(Observed(t, pseudo_count), fit.mu);
}

double ksa_increment(const ContingencyTable3& t, double pseudo_count) {
  const Observed obs(t, pseudo_count);
  return increment_value(obs, ksa_fit(t, pseudo_count).mu);
}

PairScore score_pair(const ContingencyTable3& t, const ScoreOptions& options) {
  PairScore score;
  score.pair = t.pair();
  score.df = t.degrees_of_freedom();
  if (score.df == 0) {
    throw Error(ErrorKind::DegeneratePair, "table has fewer than two occupied levels on an axis");
  }
  const LogLinearFit fit = ipf_fit(t, options.ipf);
  score.increment = loglik_increment(t, fit, options.ipf.pseudo_count);
  score.statistic = 2.0 * score.increment;
  score.converged = fit.converged;
  score.iterations = fit.iterations;
  if (options.with_ksa) score.ksa_bound = ksa_increment(t, options.ipf.pseudo_count);
  return score;
}

}  // namespace boltssi
