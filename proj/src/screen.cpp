#include "boltssi/screen.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "boltssi/bitmatrix.hpp"
#include "boltssi/chisq.hpp"
#include "boltssi/contingency.hpp"
#include "boltssi/error.hpp"
#include "boltssi/loglinear.hpp"
#include "boltssi/marginal_glm.hpp"

namespace boltssi {

const char* to_string(Method method) noexcept {
  switch (method) {
    case Method::Ssi: return "ssi";
    case Method::BoltSsi: return "bolt";
    case Method::BoltSsiKsa: return "bolt-ksa";
  }
  return "unknown";
}

Method parse_method(const std::string& text) {
  if (text == "ssi") return Method::Ssi;
  if (text == "bolt" || text == "bolt-ssi") return Method::BoltSsi;
  if (text == "bolt-ksa" || text == "bolt-ssi-ksa") return Method::BoltSsiKsa;
  throw Error(ErrorKind::InvalidConfig, "unknown method '" + text + "'");
}

const char* to_string(SkipReason reason) noexcept {
  return reason == SkipReason::DegenerateColumn ? "degenerate_column" : "collinear";
}

namespace {

double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidConfig, "cannot parse " + what + " '" + text + "'");
  }
  return v;
}

BonferroniAlpha checked_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "Bonferroni alpha must lie in (0, 1)");
  }
  return BonferroniAlpha{alpha};
}

}  // namespace

SelectionRule parse_selection(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "topd") {
    if (arg == "auto" || arg.empty()) return TopDAuto{};
    if (arg == "nlogn") return TopDNLogN{};
    const double d = parse_real(arg, "top-d count");
    if (d < 1 || d != std::floor(d)) throw Error(ErrorKind::InvalidConfig, "top-d needs d >= 1");
    return TopD{static_cast<std::uint64_t>(d)};
  }
  if (kind == "threshold") {
    const double g = parse_real(arg, "threshold");
    if (g < 0) throw Error(ErrorKind::InvalidConfig, "threshold must be >= 0");
    return Threshold{g};
  }
  if (kind == "bonferroni") return checked_alpha(parse_real(arg.empty() ? "0.05" : arg, "alpha"));
  throw Error(ErrorKind::InvalidConfig, "unknown selection rule '" + text + "'");
}

KsaThreshold parse_ksa_threshold(const std::string& text) {
  if (text.rfind("bonferroni", 0) == 0) {
    const auto colon = text.find(':');
    return checked_alpha(
        parse_real(colon == std::string::npos ? "0.05" : text.substr(colon + 1), "alpha"));
  }
  const double g = parse_real(text, "KSA threshold");
  if (g < 0) throw Error(ErrorKind::InvalidConfig, "KSA threshold must be >= 0");
  return g;
}

std::string to_string(const SelectionRule& rule) {
  struct Visitor {
    std::string operator()(const TopD& r) const { return "topd:" + std::to_string(r.d); }
    std::string operator()(const TopDAuto&) const { return "topd:auto"; }
    std::string operator()(const TopDNLogN&) const { return "topd:nlogn"; }
    std::string operator()(const Threshold& r) const { return "threshold:" + std::to_string(r.gamma); }
    std::string operator()(const BonferroniAlpha& r) const {
      return "bonferroni:" + std::to_string(r.alpha);
    }
  };
  return std::visit(Visitor{}, rule);
}

void ScreenConfig::validate() const {
  if (const auto* t = std::get_if<TopD>(&selection); t && t->d < 1) {
    throw Error(ErrorKind::InvalidConfig, "top-d needs d >= 1");
  }
  if (const auto* t = std::get_if<Threshold>(&selection); t && !(t->gamma >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "threshold must be >= 0");
  }
  if (const auto* b = std::get_if<BonferroniAlpha>(&selection)) checked_alpha(b->alpha);
  if (const auto* g = std::get_if<double>(&ksa_gamma); g && !(*g >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "KSA threshold must be >= 0");
  }
  if (const auto* b = std::get_if<BonferroniAlpha>(&ksa_gamma)) checked_alpha(b->alpha);
  if (method != Method::Ssi) {
    if (arity.predictor_arity < 2 || arity.predictor_arity > kMaxArity) {
      throw Error(ErrorKind::InvalidConfig, "arity must lie in [2, 16]");
    }
  }
  if (!(ipf_tol > 0.0) || max_cycles < 1) {
    throw Error(ErrorKind::InvalidConfig, "IPF tolerance and cycle budget must be positive");
  }
  if (!(pseudo_count >= 0.0)) throw Error(ErrorKind::InvalidConfig, "pseudo-count must be >= 0");
}

std::vector<PairIndex> ScreenResult::selected_pairs() const {
  std::vector<PairIndex> out;
  out.reserve(n_selected);
  for (const auto& s : ranked) {
    if (s.selected) out.push_back(s.pair);
  }
  return out;
}

unsigned resolve_threads(unsigned requested) noexcept {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t resolve_top_d(const SelectionRule& rule, Method method, std::size_t n,
                            std::size_t p) {
  if (const auto* t = std::get_if<TopD>(&rule)) return t->d;
  if (std::holds_alternative<TopDAuto>(rule)) {
    return method == Method::Ssi ? static_cast<std::uint64_t>(n - 1)
                                 : static_cast<std::uint64_t>(std::max(n, p));
  }
  if (std::holds_alternative<TopDNLogN>(rule)) {
    return static_cast<std::uint64_t>(
        std::floor(static_cast<double>(n) / std::log(static_cast<double>(n))));
  }
  return 0;
}

namespace {

bool ranks_before(const ScoredPair& a, const ScoredPair& b) {
  const bool fa = std::isfinite(a.score), fb = std::isfinite(b.score);
  if (fa != fb) return fa;
  if (fa && a.score != b.score) return a.score > b.score;
  return a.pair < b.pair;
}

// Bonferroni critical values indexed by df, computed on demand.
class CriticalValues {
 public:
  CriticalValues(double alpha, std::size_t p)
      : level_(alpha / static_cast<double>(pair_count(p))) {}

  double at(unsigned df) {
    auto it = cache_.find(df);
    if (it == cache_.end()) it = cache_.emplace(df, chisq_critical(static_cast<int>(df), level_)).first;
    return it->second;
  }

 private:
  double level_;
  std::map<unsigned, double> cache_;
};

// Flags for an already ranked list.
void apply_selection(std::vector<ScoredPair>& ranked, const SelectionRule& rule, std::size_t n,
                     std::size_t p, Method method) {
  for (auto& s : ranked) s.selected = false;
  if (const auto* t = std::get_if<Threshold>(&rule)) {
    for (auto& s : ranked) s.selected = std::isfinite(s.score) && s.score >= t->gamma;
    return;
  }
  if (const auto* b = std::get_if<BonferroniAlpha>(&rule)) {
    CriticalValues crit(b->alpha, p);
    for (auto& s : ranked) {
      s.selected = std::isfinite(s.statistic) && s.statistic >= crit.at(s.df);
    }
    return;
  }
  const std::uint64_t d = resolve_top_d(rule, method, n, p);
  std::uint64_t kept = 0;
  for (auto& s : ranked) {
    if (kept >= d || !std::isfinite(s.score)) break;
    s.selected = true;
    ++kept;
  }
}

enum class SlotKind : std::uint8_t { Scored, Pruned, Skipped };

struct Slot {
  double score = 0.0;
  double statistic = 0.0;
  double ksa_statistic = 0.0;
  double audited = std::numeric_limits<double>::quiet_NaN();
  double threshold = 0.0;
  std::uint16_t df = 1;
  SlotKind kind = SlotKind::Scored;
  SkipReason reason{};
  bool converged = true;
};

// Splits [0, q) into contiguous chunks handed out in order; each worker
// writes only the slots of the chunks it takes.
template <typename Fn>
void parallel_sweep(std::uint64_t q, std::uint64_t p, unsigned threads, Fn&& per_worker) {
  const std::uint64_t chunk =
      std::max<std::uint64_t>(256, q / (std::uint64_t{threads} * 16) + 1);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    auto visit = per_worker();
    while (true) {
      const std::uint64_t begin = next.fetch_add(chunk, std::memory_order_relaxed);
      if (begin >= q) break;
      const std::uint64_t end = std::min(q, begin + chunk);
      PairIndex pair = pair_at(begin, p);
      for (std::uint64_t idx = begin; idx < end; ++idx) {
        visit(idx, pair);
        if (++pair.j == p) {
          ++pair.i;
          pair.j = pair.i + 1;
        }
      }
    }
  };
  if (threads <= 1) {
    work();
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
}

}  // namespace

std::vector<bool> select(std::span<const ScoredPair> scores, const SelectionRule& rule,
                         std::size_t n, std::size_t p, Method method) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ranks_before(scores[a], scores[b]); });
  std::vector<ScoredPair> ranked;
  ranked.reserve(scores.size());
  for (std::size_t idx : order) ranked.push_back(scores[idx]);
  apply_selection(ranked, rule, n, p, method);
  std::vector<bool> flags(scores.size());
  for (std::size_t r = 0; r < order.size(); ++r) flags[order[r]] = ranked[r].selected;
  return flags;
}

ScreenResult screen(const Dataset& ds, const ScreenConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = ds.n();
  const std::size_t p = ds.p();
  const std::uint64_t q = pair_count(p);
  const unsigned threads = resolve_threads(cfg.threads);

  std::vector<Slot> slots(q);

  if (cfg.method == Method::Ssi) {
    const MarginalScorer scorer(ds);
    const double two_n = 2.0 * static_cast<double>(n);
    parallel_sweep(q, p, threads, [&] {
      return [&](std::uint64_t idx, PairIndex pair) {
        Slot& slot = slots[idx];
        const SsiScore s = scorer.score(pair);
        if (s.status == FitStatus::Collinear) {
          slot.kind = SlotKind::Skipped;
          slot.reason = SkipReason::Collinear;
          return;
        }
        slot.score = s.increment;
        slot.statistic = two_n * s.increment;
        slot.df = 1;
        slot.converged = s.converged;
      };
    });
  } else {
    const DiscreteMatrix dm = discretize(ds, cfg.arity);
    const BitMatrix bm(dm);
    std::size_t usable = 0;
    for (std::size_t k = 0; k < p; ++k) usable += bm.degenerate(k) ? 0 : 1;
    if (usable < 2) {
      throw Error(ErrorKind::DegenerateColumn, "fewer than two columns survive discretization");
    }

    const bool prune = cfg.method == Method::BoltSsiKsa;
    // Thresholds for every df that can occur, resolved before the sweep.
    std::vector<double> ksa_threshold(kMaxArity * kMaxArity * kMaxClasses + 1, 0.0);
    if (prune) {
      if (const auto* b = std::get_if<BonferroniAlpha>(&cfg.ksa_gamma)) {
        CriticalValues crit(b->alpha, p);
        std::vector<bool> seen(kMaxArity + 1, false);
        for (std::size_t k = 0; k < p; ++k) seen[bm.arity(k)] = true;
        // Effective arities can shrink per pair, so cover every smaller level count too.
        unsigned top = 0;
        for (unsigned a = 0; a <= kMaxArity; ++a) top = seen[a] ? a : top;
        for (unsigned a = 2; a <= top; ++a) {
          for (unsigned c = 2; c <= top; ++c) {
            for (unsigned k = 2; k <= bm.classes(); ++k) {
              const unsigned df = (a - 1) * (c - 1) * (k - 1);
              ksa_threshold[df] = crit.at(df);
            }
          }
        }
      } else {
        std::fill(ksa_threshold.begin(), ksa_threshold.end(), std::get<double>(cfg.ksa_gamma));
      }
    }

    const ScoreOptions options{false, IpfOptions{cfg.ipf_tol, cfg.max_cycles, cfg.pseudo_count}};
    parallel_sweep(q, p, threads, [&] {
      return [&, table = ContingencyTable3{}](std::uint64_t idx, PairIndex pair) mutable {
        Slot& slot = slots[idx];
        if (bm.degenerate(pair.i) || bm.degenerate(pair.j)) {
          slot.kind = SlotKind::Skipped;
          slot.reason = SkipReason::DegenerateColumn;
          return;
        }
        build_table_into(bm, pair, table);
        const unsigned df = table.degrees_of_freedom();
        if (df == 0) {
          slot.kind = SlotKind::Skipped;
          slot.reason = SkipReason::DegenerateColumn;
          return;
        }
        slot.df = static_cast<std::uint16_t>(df);
        if (prune) {
          slot.ksa_statistic = 2.0 * ksa_increment(table, cfg.pseudo_count);
          slot.threshold = ksa_threshold[df];
          if (slot.ksa_statistic < slot.threshold) {
            slot.kind = SlotKind::Pruned;
            if (cfg.audit_pruning) slot.audited = score_pair(table, options).statistic;
            return;
          }
        }
        const PairScore s = score_pair(table, options);
        slot.score = s.increment;
        slot.statistic = s.statistic;
        slot.converged = s.converged;
      };
    });
  }

  ScreenResult result;
  result.method = cfg.method;
  result.selection = to_string(cfg.selection);
  result.n = n;
  result.p = p;
  result.threads_used = threads;
  PairIndex pair{0, 1};
  for (std::uint64_t idx = 0; idx < q; ++idx) {
    const Slot& slot = slots[idx];
    switch (slot.kind) {
      case SlotKind::Scored:
        result.ranked.push_back(ScoredPair{pair, slot.score, slot.statistic, slot.ksa_statistic,
                                           slot.df, slot.converged, false});
        break;
      case SlotKind::Pruned: {
        PrunedPair pr{pair, slot.ksa_statistic, slot.threshold, slot.df, std::nullopt};
        if (!std::isnan(slot.audited)) pr.audited_statistic = slot.audited;
        result.pruned.push_back(pr);
        break;
      }
      case SlotKind::Skipped:
        result.skipped.push_back(SkippedPair{pair, slot.reason});
        break;
    }
    if (++pair.j == p) {
      ++pair.i;
      pair.j = pair.i + 1;
    }
  }
  slots.clear();
  slots.shrink_to_fit();

  std::sort(result.ranked.begin(), result.ranked.end(), ranks_before);
  apply_selection(result.ranked, cfg.selection, n, p, cfg.method);
  result.resolved_d = resolve_top_d(cfg.selection, cfg.method, n, p);
  result.n_evaluated = result.ranked.size();
  result.n_pruned_by_ksa = result.pruned.size();
  result.n_skipped = result.skipped.size();
  result.n_selected = static_cast<std::uint64_t>(std::count_if(
      result.ranked.begin(), result.ranked.end(), [](const ScoredPair& s) { return s.selected; }));
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace boltssi
