#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "boltssi/dataset.hpp"
#include "boltssi/pairs.hpp"

namespace boltssi {

enum class FitStatus {
  Ok,
  Collinear,     // design matrix singular to working precision; no fit
  Separation,    // logistic coefficients reached the |beta| cap
  NotConverged,  // iteration budget exhausted
};

const char* to_string(FitStatus status) noexcept;

// Maximum marginal likelihood fit of y on (1, x_i, x_j[, x_i x_j]).
// neg_loglik is the empirical mean of b(theta) - theta y (the c(y) term and
// the dispersion are dropped), so for the Gaussian family it equals
// (RSS - sum y^2) / (2n).
struct MarginalFit {
  std::array<double, 4> beta{};
  std::size_t parameters = 0;
  double neg_loglik = 0.0;
  double gradient_norm = 0.0;
  unsigned iterations = 0;
  bool converged = false;
  FitStatus status = FitStatus::Ok;
};

struct SsiScore {
  double increment = 0.0;  // L_ij,n >= 0; NaN when the pair was skipped
  FitStatus status = FitStatus::Ok;
  bool converged = true;
};

inline constexpr double kLogisticCoefficientCap = 30.0;

// Per-dataset precomputation shared by all pairs: column means, centered
// copies of the columns and response, and the per-column cross products.
// Fits are computed in the centered basis (1, x_i - m_i, x_j - m_j,
// (x_i - m_i)(x_j - m_j)), which spans the same space as the raw design;
// reported coefficients are mapped back to the raw basis. The logistic
// coefficient cap applies in the centered basis.
class MarginalScorer {
 public:
  explicit MarginalScorer(const Dataset& ds);

  MarginalFit fit(PairIndex pair, bool with_interaction) const;
  SsiScore score(PairIndex pair) const;

  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return p_; }

 private:
  struct Gram;
  Gram gram(PairIndex pair) const;
  MarginalFit fit_gaussian(PairIndex pair, bool with_interaction) const;
  MarginalFit fit_logistic(PairIndex pair, bool with_interaction, const MarginalFit* warm) const;
  SsiScore score_gaussian(PairIndex pair) const;
  void finish(MarginalFit& fit, PairIndex pair) const;
  const double* centered(std::size_t k) const { return xc_.data() + k * n_; }

  std::size_t n_;
  std::size_t p_;
  Family family_;
  std::vector<double> xc_;
  std::vector<double> means_;
  std::vector<double> sum_c_;   // sum of centered values (rounding residue)
  std::vector<double> sum_cc_;  // sum of squares of centered values
  std::vector<double> sum_cy_;  // cross product with the centered response
  std::vector<double> y_;
  std::vector<double> yc_;
  double y_mean_ = 0.0;
  double y_sum_c_ = 0.0;
  double y_ss_c_ = 0.0;
  double y_ss_raw_ = 0.0;
};

MarginalFit fit_marginal(const Dataset& ds, PairIndex pair, bool with_interaction);
SsiScore ssi_score(const Dataset& ds, PairIndex pair);

}  // namespace boltssi
