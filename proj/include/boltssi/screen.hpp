#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "boltssi/dataset.hpp"
#include "boltssi/discretize.hpp"
#include "boltssi/pairs.hpp"

namespace boltssi {

enum class Method { Ssi, BoltSsi, BoltSsiKsa };

const char* to_string(Method method) noexcept;
Method parse_method(const std::string& text);

struct TopD {
  std::uint64_t d = 1;
};
// d = n - 1 for SSI, max(n, p) for the BOLT methods.
struct TopDAuto {};
// d = floor(n / log n).
struct TopDNLogN {};
struct Threshold {
  double gamma = 0.0;
};
// Keep pairs whose statistic exceeds the chi-square critical value at
// alpha / (p (p - 1) / 2) for that pair's df.
struct BonferroniAlpha {
  double alpha = 0.05;
};

using SelectionRule = std::variant<TopD, TopDAuto, TopDNLogN, Threshold, BonferroniAlpha>;
// KSA pruning threshold on the deviance scale, or a Bonferroni level.
using KsaThreshold = std::variant<double, BonferroniAlpha>;

// "topd:500", "topd:auto", "topd:nlogn", "threshold:0.1", "bonferroni:0.05"
SelectionRule parse_selection(const std::string& text);
KsaThreshold parse_ksa_threshold(const std::string& text);
std::string to_string(const SelectionRule& rule);

struct ScreenConfig {
  Method method = Method::BoltSsi;
  SelectionRule selection = TopDAuto{};
  KsaThreshold ksa_gamma = 0.0;
  DiscretizationSpec arity{};
  unsigned threads = 1;  // 0 = hardware concurrency
  double ipf_tol = 1e-8;
  unsigned max_cycles = 100;
  double pseudo_count = 0.0;
  // Also fit IPF on KSA-pruned pairs so the bound can be audited.
  bool audit_pruning = false;

  void validate() const;
};

enum class SkipReason : std::uint8_t { DegenerateColumn, Collinear };

const char* to_string(SkipReason reason) noexcept;

struct ScoredPair {
  PairIndex pair{};
  double score = 0.0;      // SSI: L_ij,n; BOLT: l_H - l_S
  double statistic = 0.0;  // SSI: 2 n L_ij,n; BOLT: 2 (l_H - l_S)
  double ksa_statistic = 0.0;  // 2 (l_KSA - l_S); BoltSsiKsa only
  std::uint16_t df = 1;
  bool converged = true;
  bool selected = false;
};

struct PrunedPair {
  PairIndex pair{};
  double ksa_statistic = 0.0;
  double threshold = 0.0;
  std::uint16_t df = 1;
  std::optional<double> audited_statistic;  // IPF statistic when audited
};

struct SkippedPair {
  PairIndex pair{};
  SkipReason reason{};
};

struct ScreenResult {
  Method method = Method::BoltSsi;
  std::string selection;          // rule as configured
  std::uint64_t resolved_d = 0;   // for top-d rules
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<ScoredPair> ranked;  // score descending, ties by (i, j)
  std::vector<PrunedPair> pruned;  // lexicographic
  std::vector<SkippedPair> skipped;
  std::uint64_t n_evaluated = 0;
  std::uint64_t n_pruned_by_ksa = 0;
  std::uint64_t n_skipped = 0;
  std::uint64_t n_selected = 0;
  double wall_time = 0.0;
  unsigned threads_used = 1;

  std::vector<PairIndex> selected_pairs() const;
};

// Runs the full pair sweep. Per-pair failures are recorded as skipped; the
// output is identical for any thread count.
ScreenResult screen(const Dataset& ds, const ScreenConfig& cfg);

// Number of pairs a top-d style rule keeps (0 for threshold rules).
std::uint64_t resolve_top_d(const SelectionRule& rule, Method method, std::size_t n,
                            std::size_t p);

// Selection flags for `scores` under `rule`. Non-finite scores are never
// selected; top-d ties are broken by (i, j) order.
std::vector<bool> select(std::span<const ScoredPair> scores, const SelectionRule& rule,
                         std::size_t n, std::size_t p, Method method = Method::BoltSsi);

unsigned resolve_threads(unsigned requested) noexcept;

}  // namespace boltssi
