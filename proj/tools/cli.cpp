#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "boltssi/dataset.hpp"
#include "boltssi/efficiency.hpp"
#include "boltssi/error.hpp"
#include "boltssi/kernels.hpp"
#include "boltssi/screen.hpp"
#include "boltssi/simulate.hpp"

namespace boltssi::cli {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig: return kUsage;
    case ErrorKind::Collinear:
    case ErrorKind::NotConverged:
    case ErrorKind::Domain: return kNumericFailure;
    default: return kDataError;
  }
}

char parse_delimiter(const std::string& text) {
  if (text == "tab" || text == "\\t") return '\t';
  if (text.size() != 1) throw Error(ErrorKind::InvalidConfig, "delimiter must be one character");
  return text[0];
}

// Output sink: the named file, or `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

struct ScreenArgs {
  std::string input;
  std::string response;
  std::size_t response_col = 0;
  std::string family = "gaussian";
  std::string method = "bolt";
  unsigned arity = 3;
  std::string select = "topd:auto";
  std::string ksa_gamma = "0";
  unsigned threads = 1;
  std::string output;
  bool full = false;
  bool json = false;
  std::string delimiter = ",";
  std::string header = "auto";
  bool no_standardize = false;
  bool standardize_response = false;
  double ipf_tol = 1e-8;
  unsigned max_cycles = 100;
  double pseudo_count = 0.0;
  bool audit = false;
};

struct Record {
  std::optional<std::size_t> rank;
  std::string var_i, var_j;
  std::optional<double> score, statistic;
  std::optional<unsigned> df;
  bool selected = false;
  std::string prune_reason;
};

std::vector<Record> build_records(const ScreenResult& r, const std::vector<std::string>& names,
                                  bool full) {
  std::vector<Record> out;
  for (std::size_t k = 0; k < r.ranked.size(); ++k) {
    const auto& s = r.ranked[k];
    if (!full && !s.selected) continue;
    out.push_back(Record{k + 1, names[s.pair.i], names[s.pair.j], s.score, s.statistic, s.df,
                         s.selected, ""});
  }
  if (!full) return out;
  for (const auto& pr : r.pruned) {
    out.push_back(Record{std::nullopt, names[pr.pair.i], names[pr.pair.j], std::nullopt,
                         pr.ksa_statistic, pr.df, false, "ksa"});
  }
  for (const auto& sk : r.skipped) {
    out.push_back(Record{std::nullopt, names[sk.pair.i], names[sk.pair.j], std::nullopt,
                         std::nullopt, std::nullopt, false, to_string(sk.reason)});
  }
  return out;
}

void write_csv(std::ostream& os, const std::vector<Record>& records) {
  os << "rank,var_i,var_j,score,statistic,df,selected,prune_reason\n";
  for (const auto& r : records) {
    os << (r.rank ? std::to_string(*r.rank) : "") << ',' << csv_field(r.var_i) << ','
       << csv_field(r.var_j) << ',' << (r.score ? fmt(*r.score) : "") << ','
       << (r.statistic ? fmt(*r.statistic) : "") << ','
       << (r.df ? std::to_string(*r.df) : "") << ',' << (r.selected ? 1 : 0) << ','
       << r.prune_reason << '\n';
  }
}

void write_json(std::ostream& os, const std::vector<Record>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  auto opt = [](const auto& v) -> nlohmann::ordered_json {
    if (v) return *v;
    return nullptr;
  };
  for (const auto& r : records) {
    nlohmann::ordered_json o;
    o["rank"] = opt(r.rank);
    o["var_i"] = r.var_i;
    o["var_j"] = r.var_j;
    o["score"] = r.score ? nlohmann::ordered_json(std::stod(fmt(*r.score))) : nullptr;
    o["statistic"] = r.statistic ? nlohmann::ordered_json(std::stod(fmt(*r.statistic))) : nullptr;
    o["df"] = opt(r.df);
    o["selected"] = r.selected;
    o["prune_reason"] = r.prune_reason.empty() ? nlohmann::ordered_json(nullptr)
                                               : nlohmann::ordered_json(r.prune_reason);
    arr.push_back(std::move(o));
  }
  os << arr.dump(2) << '\n';
}

void summarize(std::ostream& err, const ScreenResult& r) {
  std::uint64_t unconverged = 0;
  for (const auto& s : r.ranked) unconverged += s.converged ? 0 : 1;
  err << "method=" << to_string(r.method) << " n=" << r.n << " p=" << r.p
      << " pairs=" << pair_count(r.p) << " evaluated=" << r.n_evaluated
      << " pruned=" << r.n_pruned_by_ksa << " skipped=" << r.n_skipped
      << " selected=" << r.n_selected << " select=" << r.selection;
  if (r.resolved_d > 0) err << " d=" << r.resolved_d;
  err << " threads=" << r.threads_used << " kernel=" << kernels::to_string(kernels::active_isa())
      << " wall_time=" << fmt(r.wall_time) << "s\n";
  if (unconverged > 0) err << "warning: " << unconverged << " pair fits did not converge\n";
}

ScreenConfig make_config(const std::string& method, unsigned arity, const std::string& select,
                         const std::string& ksa_gamma, unsigned threads) {
  ScreenConfig cfg;
  cfg.method = parse_method(method);
  cfg.selection = parse_selection(select);
  cfg.ksa_gamma = parse_ksa_threshold(ksa_gamma);
  cfg.arity.predictor_arity = arity;
  cfg.threads = threads;
  return cfg;
}

int cmd_screen(const ScreenArgs& a, std::ostream& out, std::ostream& err) {
  LoadOptions opts;
  if (!a.response.empty()) {
    opts.response = a.response;
  } else if (a.response_col > 0) {
    opts.response = a.response_col - 1;
  } else {
    throw Error(ErrorKind::InvalidConfig, "one of --response or --response-col is required");
  }
  opts.family = parse_family(a.family);
  opts.delimiter = parse_delimiter(a.delimiter);
  opts.standardize = !a.no_standardize;
  opts.standardize_response = a.standardize_response;
  if (a.header == "auto") opts.header = HeaderMode::Auto;
  else if (a.header == "yes") opts.header = HeaderMode::Present;
  else if (a.header == "no") opts.header = HeaderMode::Absent;
  else throw Error(ErrorKind::InvalidConfig, "--header must be auto, yes or no");

  ScreenConfig cfg = make_config(a.method, a.arity, a.select, a.ksa_gamma, a.threads);
  cfg.ipf_tol = a.ipf_tol;
  cfg.max_cycles = a.max_cycles;
  cfg.pseudo_count = a.pseudo_count;
  cfg.audit_pruning = a.audit;
  cfg.validate();

  const Dataset ds = load_delimited(a.input, opts);
  const ScreenResult result = screen(ds, cfg);
  const auto records = build_records(result, ds.column_names(), a.full);
  Sink sink(a.output, out);
  if (a.json) write_json(*sink, records);
  else write_csv(*sink, records);
  summarize(err, result);
  if (a.audit && !result.pruned.empty()) {
    std::uint64_t violations = 0;
    for (const auto& pr : result.pruned) {
      violations += (pr.audited_statistic && *pr.audited_statistic >= pr.threshold) ? 1 : 0;
    }
    err << "audit: " << result.pruned.size() << " pruned pairs rescored, " << violations
        << " at or above the KSA threshold\n";
  }
  return kOk;
}

struct SimulateArgs {
  int example = 1;
  std::size_t reps = 20;
  std::size_t n = 500;
  std::size_t p = 500;
  double rho = 0.5;
  double sigma = 2.0;
  double beta_inter = 2.0;
  std::uint64_t seed = 1;
  std::string method = "bolt";
  unsigned arity = 3;
  std::string select = "topd:auto";
  std::string ksa_gamma = "0";
  unsigned threads = 1;
  unsigned rep_threads = 1;
  std::string output;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  SimDesign d = SimDesign::example(a.example);
  d.n = a.n;
  d.p = a.p;
  d.rho = a.rho;
  d.sigma = a.sigma;
  d.beta_inter = a.beta_inter;
  d.seed = a.seed;
  const ScreenConfig cfg = make_config(a.method, a.arity, a.select, a.ksa_gamma, a.threads);
  const SimulationRun run = run_simulation(d, cfg, a.reps, a.rep_threads);

  Sink sink(a.output, out);
  std::ostream& os = *sink;
  const std::string prefix = std::to_string(a.example) + "," + to_string(cfg.method) + ",";
  os << "example,method,rep,acr,model_size,covered\n";
  for (std::size_t r = 0; r < run.per_rep.size(); ++r) {
    const auto& m = run.per_rep[r];
    os << prefix << r + 1 << ',' << fmt(m.acr) << ',' << m.model_size << ',' << m.covered << '\n';
  }
  os << prefix << "mean," << fmt(run.summary.acr) << ',' << fmt(run.summary.ams) << ",\n";
  os << prefix << "se," << fmt(run.summary.acr_se) << ',' << fmt(run.summary.ams_se) << ",\n";
  err << "example=" << a.example << " family=" << to_string(d.family)
      << " heredity=" << to_string(d.heredity) << " reps=" << a.reps << " ACR=" << fmt(run.summary.acr)
      << " AMS=" << fmt(run.summary.ams) << '\n';
  return kOk;
}

struct BenchArgs {
  int example = 1;
  std::size_t n = 500;
  std::size_t p = 2000;
  std::string method = "bolt";
  unsigned arity = 3;
  std::vector<unsigned> threads{1};
  std::size_t repeat = 1;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  SimDesign d = SimDesign::example(a.example);
  d.n = a.n;
  d.p = a.p;
  d.seed = a.seed;
  const SimData sim = generate(d);
  Sink sink(a.output, out);
  std::ostream& os = *sink;
  os << "method,n,p,pairs,threads,kernel,wall_time,speedup\n";
  double base = 0.0;
  for (unsigned t : a.threads) {
    ScreenConfig cfg = make_config(a.method, a.arity, "topd:auto", "0", t);
    double best = 0.0;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, a.repeat); ++r) {
      const double w = screen(sim.data, cfg).wall_time;
      best = r == 0 ? w : std::min(best, w);
    }
    if (base == 0.0) base = best;
    os << to_string(cfg.method) << ',' << a.n << ',' << a.p << ',' << pair_count(a.p) << ','
       << resolve_threads(t) << ',' << kernels::to_string(kernels::active_isa()) << ','
       << fmt(best) << ',' << fmt(base / best) << '\n';
  }
  err << "hardware threads=" << resolve_threads(0) << '\n';
  return kOk;
}

struct EfficiencyArgs {
  std::vector<double> rho{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t n = 500;
  std::size_t reps = 2000;
  std::uint64_t seed = 1;
  std::string estimator = "kendall";
  unsigned threads = 1;
  std::string output;
};

int cmd_efficiency(const EfficiencyArgs& a, std::ostream& out, std::ostream&) {
  TauEstimator est;
  if (a.estimator == "kendall") est = TauEstimator::Kendall;
  else if (a.estimator == "median-split") est = TauEstimator::MedianSplit;
  else throw Error(ErrorKind::InvalidConfig, "--estimator must be kendall or median-split");
  const EffLossReport report = efficiency_report(a.rho, a.n, a.reps, a.seed, est, a.threads);
  Sink sink(a.output, out);
  std::ostream& os = *sink;
  os << "rho,indicator_corr,arcsine,abs_error,var_tau,var_pearson,ratio,ratio_theory\n";
  for (std::size_t g = 0; g < report.rho.size(); ++g) {
    const auto& s = report.arcsine[g];
    const auto& e = report.efficiency[g];
    os << fmt(report.rho[g]) << ',' << fmt(s.estimate) << ',' << fmt(s.theoretical) << ','
       << fmt(s.abs_error) << ',' << fmt(e.var_tau) << ',' << fmt(e.var_pearson) << ','
       << fmt(e.ratio) << ',' << fmt(e.theoretical) << '\n';
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pairwise interaction screening (SSI and BOLT-SSI)", "boltssi"};
  app.require_subcommand(1);
  std::string kernel = "auto";
  app.add_option("--kernel", kernel, "Kernel variant: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  ScreenArgs sa;
  auto* sc = app.add_subcommand("screen", "Screen all pairs of a delimited data file");
  sc->add_option("-i,--input", sa.input, "Input file")->required()->check(CLI::ExistingFile);
  auto* resp = sc->add_option("--response", sa.response, "Response column name");
  auto* resp_col = sc->add_option("--response-col", sa.response_col, "Response column (1-based)")
                       ->check(CLI::PositiveNumber);
  resp->excludes(resp_col);
  sc->add_option("--family", sa.family, "gaussian or binomial")->capture_default_str();
  sc->add_option("--method", sa.method, "ssi, bolt or bolt-ksa")->capture_default_str();
  sc->add_option("--arity", sa.arity, "Quantile levels per covariate")->capture_default_str();
  sc->add_option("--select", sa.select, "topd:N|auto|nlogn, threshold:G or bonferroni:A")
      ->capture_default_str();
  sc->add_option("--ksa-gamma", sa.ksa_gamma, "KSA pruning threshold (deviance) or bonferroni:A")
      ->capture_default_str();
  sc->add_option("--threads", sa.threads, "Worker threads, 0 = all available")
      ->envname("BOLTSSI_THREADS")
      ->capture_default_str();
  sc->add_option("-o,--output", sa.output, "Output file (default stdout)");
  sc->add_flag("--full", sa.full, "Write every pair, not only the selected ones");
  sc->add_flag("--json", sa.json, "Write JSON instead of CSV");
  sc->add_option("--delimiter", sa.delimiter, "Field delimiter (one character or 'tab')")
      ->capture_default_str();
  sc->add_option("--header", sa.header, "auto, yes or no")->capture_default_str();
  sc->add_flag("--no-standardize", sa.no_standardize, "Keep covariates on their original scale");
  sc->add_flag("--standardize-response", sa.standardize_response, "Z-score a Gaussian response");
  sc->add_option("--ipf-tol", sa.ipf_tol, "IPF margin tolerance")->capture_default_str();
  sc->add_option("--max-cycles", sa.max_cycles, "IPF cycle budget")->capture_default_str();
  sc->add_option("--pseudo-count", sa.pseudo_count, "Added to every table cell")
      ->capture_default_str();
  sc->add_flag("--audit", sa.audit, "Rescore KSA-pruned pairs with IPF");

  SimulateArgs ma;
  auto* sim = app.add_subcommand("simulate", "Run a simulation design and report ACR / AMS");
  sim->add_option("--example", ma.example, "Design 1-8")->check(CLI::Range(1, 8))
      ->capture_default_str();
  sim->add_option("--reps", ma.reps, "Replications")->capture_default_str();
  sim->add_option("--n", ma.n, "Samples")->capture_default_str();
  sim->add_option("--p", ma.p, "Covariates")->capture_default_str();
  sim->add_option("--rho", ma.rho, "AR(1) correlation")->capture_default_str();
  sim->add_option("--sigma", ma.sigma, "Gaussian noise sd")->capture_default_str();
  sim->add_option("--beta-inter", ma.beta_inter, "Interaction coefficient")->capture_default_str();
  sim->add_option("--seed", ma.seed, "RNG seed")->capture_default_str();
  sim->add_option("--method", ma.method, "ssi, bolt or bolt-ksa")->capture_default_str();
  sim->add_option("--arity", ma.arity, "Quantile levels per covariate")->capture_default_str();
  sim->add_option("--select", ma.select, "Selection rule")->capture_default_str();
  sim->add_option("--ksa-gamma", ma.ksa_gamma, "KSA pruning threshold")->capture_default_str();
  sim->add_option("--threads", ma.threads, "Threads per screen, 0 = all")
      ->envname("BOLTSSI_THREADS")
      ->capture_default_str();
  sim->add_option("--rep-threads", ma.rep_threads, "Replications run concurrently")
      ->capture_default_str();
  sim->add_option("-o,--output", ma.output, "Output file (default stdout)");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time the sweep at several thread counts");
  bench->add_option("--example", ba.example, "Design used to generate data")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  bench->add_option("--n", ba.n, "Samples")->capture_default_str();
  bench->add_option("--p", ba.p, "Covariates")->capture_default_str();
  bench->add_option("--method", ba.method, "ssi, bolt or bolt-ksa")->capture_default_str();
  bench->add_option("--arity", ba.arity, "Quantile levels")->capture_default_str();
  bench->add_option("--threads", ba.threads, "Thread counts, e.g. 1,2,4")->delimiter(',');
  bench->add_option("--repeat", ba.repeat, "Runs per thread count (best is kept)")
      ->capture_default_str();
  bench->add_option("--seed", ba.seed, "RNG seed")->capture_default_str();
  bench->add_option("-o,--output", ba.output, "Output file (default stdout)");

  EfficiencyArgs ea;
  auto* eff = app.add_subcommand("check-efficiency", "Arcsine relation and efficiency ratio table");
  eff->add_option("--rho", ea.rho, "Correlation grid, e.g. 0,0.5,0.9")->delimiter(',');
  eff->add_option("--n", ea.n, "Samples per replication")->capture_default_str();
  eff->add_option("--reps", ea.reps, "Replications")->capture_default_str();
  eff->add_option("--seed", ea.seed, "RNG seed")->capture_default_str();
  eff->add_option("--estimator", ea.estimator, "kendall or median-split")->capture_default_str();
  eff->add_option("--threads", ea.threads, "Worker threads")->capture_default_str();
  eff->add_option("-o,--output", ea.output, "Output file (default stdout)");

  std::vector<const char*> argv{"boltssi"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (kernel == "scalar") kernels::set_active_isa(kernels::Isa::Scalar);
    if (kernel == "avx2") kernels::set_active_isa(kernels::Isa::Avx2);
    if (*sc) return cmd_screen(sa, out, err);
    if (*sim) return cmd_simulate(ma, out, err);
    if (*bench) return cmd_bench(ba, out, err);
    if (*eff) return cmd_efficiency(ea, out, err);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace boltssi::cli
