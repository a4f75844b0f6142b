#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "boltssi/contingency.hpp"

namespace boltssi {

// Log-linear fits on a three-way table.
//
// Log-likelihood values are the Poisson kernel L(mu) = sum n log mu - sum mu
// with 0 log 0 = 0. The saturated fit maximises it, so every "increment"
// below is L(saturated) - L(model), the negative-log-likelihood gap l_M - l_S,
// and is nonnegative. The screening statistic is the deviance, twice that.

struct IpfOptions {
  double tol = 1e-8;        // max absolute two-way margin discrepancy
  unsigned max_cycles = 100;
  double pseudo_count = 0.0;  // added to every cell before fitting
};

struct LogLinearFit {
  unsigned rows = 0;
  unsigned cols = 0;
  unsigned classes = 0;
  std::array<double, kMaxCells> mu{};
  double loglik_kernel = 0.0;
  double max_discrepancy = 0.0;
  unsigned iterations = 0;
  bool converged = false;

  double fitted(unsigned a, unsigned b, unsigned c) const noexcept {
    return mu[(a * cols + b) * classes + c];
  }
};

// L at mu = n (the saturated fit).
double saturated_loglik(const ContingencyTable3& t, double pseudo_count = 0.0);

// Homogeneous-association fit by iterative proportional fitting from the
// uniform start mu = n / (I J K); each cycle matches the ij+, i+k and +jk
// margins in turn. A fit that exhausts max_cycles is returned with
// converged = false rather than thrown.
LogLinearFit ipf_fit(const ContingencyTable3& t, const IpfOptions& options = {});

// Kirkwood superposition fit, mu proportional to
// n_ij+ n_i+k n_+jk / (n_i++ n_+j+ n_++k), normalised to sum to n.
LogLinearFit ksa_fit(const ContingencyTable3& t, double pseudo_count = 0.0);
double ksa_loglik(const ContingencyTable3& t, double pseudo_count = 0.0);

// L(saturated) - L(mu) evaluated directly as sum n log(n / mu) - n + sum mu,
// clamped at zero.
double loglik_increment(const ContingencyTable3& t, const LogLinearFit& fit,
                        double pseudo_count = 0.0);

struct PairScore {
  PairIndex pair{};
  double increment = 0.0;   // l_H - l_S
  double statistic = 0.0;   // 2 * increment (G^2)
  unsigned df = 0;
  std::optional<double> ksa_bound;  // l_KSA - l_S
  bool converged = true;
  unsigned iterations = 0;
};

struct ScoreOptions {
  bool with_ksa = false;
  IpfOptions ipf{};
};

// Throws ErrorKind::DegeneratePair when the effective df is zero.
PairScore score_pair(const ContingencyTable3& t, const ScoreOptions& options = {});

// KSA increment only (the cheap bound used for pruning).
double ksa_increment(const ContingencyTable3& t, double pseudo_count = 0.0);

}  // namespace boltssi
