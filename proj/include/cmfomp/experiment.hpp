#pragma once

// Experiment harness behind the cmfomp command-line tool: configuration
// documents, instance generation, and the run / trial / certify /
// paper-examples commands. Commands write to caller-supplied streams and
// return the process exit code.
//
// Exit codes: 0 completed, 1 example assertion failure, 2 configuration error,
// 3 numerical degeneracy.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cmfomp/certify.hpp"
#include "cmfomp/errors.hpp"
#include "cmfomp/generators.hpp"
#include "cmfomp/gram.hpp"
#include "cmfomp/kernels.hpp"
#include "cmfomp/omp.hpp"
#include "cmfomp/optimizer.hpp"
#include "cmfomp/parallel.hpp"
#include "cmfomp/param_space.hpp"
#include "cmfomp/rng.hpp"

namespace cmfomp {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitAssertion = 1, kExitConfig = 2, kExitDegenerate = 3 };

class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

struct KernelConfig {
  std::string family = "laplace";
  double lambda = 1.0;
  double p = 1.0;
  std::size_t dimension = 1;

  KernelSpec build() const {
    if (family == "gaussian") {
      if (dimension != 1) throw ConfigError("kernel: the gaussian control kernel is one-dimensional");
      return KernelSpec::gaussian();
    }
    if (family == "laplace") return KernelSpec::cmf(CmfSpec::laplace(lambda), p, dimension);
    if (family == "inverse_linear") return KernelSpec::cmf(CmfSpec::inverse_linear(lambda), p, dimension);
    throw ConfigError("kernel: unknown family '" + family + "'");
  }
};

struct SupportConfig {
  enum class Mode { Explicit, Random, Separated };
  Mode mode = Mode::Explicit;
  std::vector<Point> points;
  std::size_t k_min = 1;
  std::size_t k_max = 1;
  // Random mode.
  double lo = -5.0;
  double hi = 5.0;
  double min_gap = 0.0;
  double tight_fraction = 0.0;
  // Separated mode: delta0^p = factor * log(2k-1) / lambda.
  double factor = 1.05;
  double spread = 1.0;
};

struct CoefficientConfig {
  enum class Mode { Explicit, Random, Adversarial };
  Mode mode = Mode::Random;
  std::vector<double> values;
  double lo = 0.1;
  double hi = 10.0;
  bool positive = false;
};

struct OmpConfig {
  std::size_t max_iter = 0;  // 0 selects k^D + k
  double eps_stop = kDefaultEpsStop;
  double tau_match = kDefaultTauMatch;
};

struct CertifyConfig {
  std::size_t falsifier_trials = 500;
  std::vector<std::vector<double>> falsifier_probes;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 0;
  KernelConfig kernel;
  SupportConfig support;
  CoefficientConfig coefficients;
  OmpConfig omp;
  OptimizerConfig optimizer;
  std::size_t trials = 1;
  CertifyConfig certify;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

inline std::pair<double, double> get_range(const json& j, const char* key, std::pair<double, double> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(std::string(key) + ": expected [lo, hi]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

inline void parse_count_range(const json& j, SupportConfig& s) {
  if (!j.contains("k")) throw ConfigError("support: missing 'k'");
  const auto& k = j.at("k");
  if (k.is_number_unsigned()) {
    s.k_min = s.k_max = k.get<std::size_t>();
  } else if (k.is_array() && k.size() == 2 && k[0].is_number_unsigned() && k[1].is_number_unsigned()) {
    s.k_min = k[0].get<std::size_t>();
    s.k_max = k[1].get<std::size_t>();
  } else {
    throw ConfigError("support.k: expected a count or [min, max]");
  }
  if (s.k_min == 0 || s.k_min > s.k_max) throw ConfigError("support.k: need 1 <= min <= max");
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using detail::get_or;
  detail::reject_unknown(j, "config",
                         {"schema_version", "seed", "kernel", "support", "coefficients", "omp", "optimizer", "trials",
                          "certify", "description"});
  ExperimentConfig cfg;
  if (!j.contains("schema_version")) throw ConfigError("config: missing schema_version");
  cfg.schema_version = get_or<int>(j, "schema_version", 0);
  if (cfg.schema_version != kSchemaVersion) {
    throw ConfigError("config: unsupported schema_version " + std::to_string(cfg.schema_version));
  }
  cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
  cfg.trials = get_or<std::size_t>(j, "trials", 1);
  if (cfg.trials == 0) throw ConfigError("trials must be >= 1");

  if (!j.contains("kernel")) throw ConfigError("config: missing kernel");
  const auto& jk = j.at("kernel");
  detail::reject_unknown(jk, "kernel", {"family", "lambda", "p", "dimension"});
  cfg.kernel.family = get_or<std::string>(jk, "family", "laplace");
  cfg.kernel.lambda = get_or<double>(jk, "lambda", 1.0);
  cfg.kernel.p = get_or<double>(jk, "p", 1.0);
  cfg.kernel.dimension = get_or<std::size_t>(jk, "dimension", 1);
  if (!(cfg.kernel.lambda > 0.0)) throw ConfigError("kernel.lambda must be positive");
  if (!(cfg.kernel.p > 0.0 && cfg.kernel.p <= 1.0)) throw ConfigError("kernel.p must lie in (0,1]");
  if (cfg.kernel.dimension == 0 || cfg.kernel.dimension > 8) throw ConfigError("kernel.dimension must lie in [1,8]");
  (void)cfg.kernel.build();

  if (!j.contains("support")) throw ConfigError("config: missing support");
  const auto& js = j.at("support");
  detail::reject_unknown(js, "support", {"points", "random", "separated"});
  if (js.size() != 1) throw ConfigError("support: give exactly one of points, random, separated");
  if (js.contains("points")) {
    cfg.support.mode = SupportConfig::Mode::Explicit;
    const auto& jp = js.at("points");
    if (!jp.is_array()) throw ConfigError("support.points: expected an array of points");
    for (const auto& p : jp) {
      if (!p.is_array() || p.size() != cfg.kernel.dimension) {
        throw ConfigError("support.points: every point needs " + std::to_string(cfg.kernel.dimension) + " coordinates");
      }
      std::vector<double> c;
      for (const auto& x : p) {
        if (!x.is_number()) throw ConfigError("support.points: non-numeric coordinate");
        c.push_back(x.get<double>());
      }
      cfg.support.points.emplace_back(std::move(c));
    }
    cfg.support.k_min = cfg.support.k_max = cfg.support.points.size();
    (void)Support(cfg.support.points);
  } else if (js.contains("random")) {
    const auto& jr = js.at("random");
    detail::reject_unknown(jr, "support.random", {"k", "box", "min_gap", "tight_fraction"});
    cfg.support.mode = SupportConfig::Mode::Random;
    detail::parse_count_range(jr, cfg.support);
    std::tie(cfg.support.lo, cfg.support.hi) = detail::get_range(jr, "box", {-5.0, 5.0});
    cfg.support.min_gap = get_or<double>(jr, "min_gap", 0.0);
    cfg.support.tight_fraction = get_or<double>(jr, "tight_fraction", 0.0);
    if (!(cfg.support.hi > cfg.support.lo)) throw ConfigError("support.random.box: need lo < hi");
    if (!(cfg.support.min_gap >= 0.0) ||
        cfg.support.min_gap * static_cast<double>(cfg.support.k_max) > cfg.support.hi - cfg.support.lo) {
      throw ConfigError("support.random.min_gap: must be >= 0 and fit k_max points in the box");
    }
    if (!(cfg.support.tight_fraction >= 0.0 && cfg.support.tight_fraction <= 1.0)) {
      throw ConfigError("support.random.tight_fraction must lie in [0,1]");
    }
  } else {
    const auto& jr = js.at("separated");
    detail::reject_unknown(jr, "support.separated", {"k", "factor", "spread"});
    cfg.support.mode = SupportConfig::Mode::Separated;
    detail::parse_count_range(jr, cfg.support);
    cfg.support.factor = get_or<double>(jr, "factor", 1.05);
    cfg.support.spread = get_or<double>(jr, "spread", 1.0);
    if (cfg.support.k_min < 2) throw ConfigError("support.separated.k: need k >= 2");
    if (!(cfg.support.factor > 0.0) || !(cfg.support.spread >= 0.0)) {
      throw ConfigError("support.separated: factor must be positive, spread nonnegative");
    }
    if (cfg.kernel.family != "laplace") throw ConfigError("support.separated: requires the laplace family");
  }

  if (j.contains("coefficients")) {
    const auto& jc = j.at("coefficients");
    detail::reject_unknown(jc, "coefficients", {"values", "random", "adversarial"});
    if (jc.size() != 1) throw ConfigError("coefficients: give exactly one of values, random, adversarial");
    if (jc.contains("values")) {
      cfg.coefficients.mode = CoefficientConfig::Mode::Explicit;
      cfg.coefficients.values = get_or<std::vector<double>>(jc, "values", {});
      if (cfg.support.mode != SupportConfig::Mode::Explicit ||
          cfg.coefficients.values.size() != cfg.support.points.size()) {
        throw ConfigError("coefficients.values: needs explicit support points of the same count");
      }
      for (double c : cfg.coefficients.values) {
        if (!std::isfinite(c) || c == 0.0) throw ConfigError("coefficients.values: must be finite and nonzero");
      }
    } else {
      const bool adv = jc.contains("adversarial");
      const auto& jr = jc.at(adv ? "adversarial" : "random");
      detail::reject_unknown(jr, adv ? "coefficients.adversarial" : "coefficients.random", {"magnitude", "signs"});
      cfg.coefficients.mode = adv ? CoefficientConfig::Mode::Adversarial : CoefficientConfig::Mode::Random;
      std::tie(cfg.coefficients.lo, cfg.coefficients.hi) = detail::get_range(jr, "magnitude", {0.1, 10.0});
      const auto signs = get_or<std::string>(jr, "signs", "signed");
      if (signs != "signed" && signs != "positive") throw ConfigError("coefficients.signs: signed or positive");
      cfg.coefficients.positive = signs == "positive";
      if (!(cfg.coefficients.lo > 0.0 && cfg.coefficients.hi >= cfg.coefficients.lo)) {
        throw ConfigError("coefficients.magnitude: need 0 < lo <= hi");
      }
    }
  }

  if (j.contains("omp")) {
    const auto& jo = j.at("omp");
    detail::reject_unknown(jo, "omp", {"max_iter", "eps_stop", "tau_match"});
    cfg.omp.max_iter = get_or<std::size_t>(jo, "max_iter", 0);
    cfg.omp.eps_stop = get_or<double>(jo, "eps_stop", kDefaultEpsStop);
    cfg.omp.tau_match = get_or<double>(jo, "tau_match", kDefaultTauMatch);
    if (!(cfg.omp.eps_stop > 0.0) || !(cfg.omp.tau_match > 0.0)) {
      throw ConfigError("omp: eps_stop and tau_match must be positive");
    }
  }

  if (j.contains("optimizer")) {
    const auto& jo = j.at("optimizer");
    detail::reject_unknown(jo, "optimizer",
                           {"grid_points_per_axis", "refine_iterations", "tie_tolerance", "exclusion_epsilon",
                            "lattice_budget", "refine_starts", "max_grid_seeds", "merge_radius"});
    auto& o = cfg.optimizer;
    o.grid_points_per_axis = get_or<std::size_t>(jo, "grid_points_per_axis", o.grid_points_per_axis);
    o.refine_iterations = get_or<std::size_t>(jo, "refine_iterations", o.refine_iterations);
    o.tie_tolerance = get_or<double>(jo, "tie_tolerance", o.tie_tolerance);
    o.exclusion_epsilon = get_or<double>(jo, "exclusion_epsilon", o.exclusion_epsilon);
    o.lattice_budget = get_or<std::size_t>(jo, "lattice_budget", o.lattice_budget);
    o.refine_starts = get_or<std::size_t>(jo, "refine_starts", o.refine_starts);
    o.max_grid_seeds = get_or<std::size_t>(jo, "max_grid_seeds", o.max_grid_seeds);
    o.merge_radius = get_or<double>(jo, "merge_radius", o.merge_radius);
    try {
      o.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  }

  if (j.contains("certify")) {
    const auto& jc = j.at("certify");
    detail::reject_unknown(jc, "certify", {"falsifier_trials", "falsifier_probes"});
    cfg.certify.falsifier_trials = get_or<std::size_t>(jc, "falsifier_trials", 500);
    cfg.certify.falsifier_probes = get_or<std::vector<std::vector<double>>>(jc, "falsifier_probes", {});
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return parse_config(j);
}

struct CliOptions {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string out_path;
  std::string format = "json";
  bool timing = false;
  // Example-3 distance as a multiple of the Laplace crossover log(k-1)/lambda.
  double simplex_scale = 0.9;
};

inline std::string fmt17(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

inline nlohmann::json to_json(const Point& p) { return nlohmann::json(std::vector<double>(p.coords().begin(), p.coords().end())); }

inline nlohmann::json to_json(const std::vector<Point>& pts) {
  auto j = nlohmann::json::array();
  for (const auto& p : pts) j.push_back(to_json(p));
  return j;
}

// Draws the instance for one run or trial.
inline SparseSignal make_instance(const ExperimentConfig& cfg, Rng& rng) {
  const KernelSpec kernel = cfg.kernel.build();
  const std::size_t dim = cfg.kernel.dimension;
  const std::size_t k = cfg.support.k_min + rng.index(cfg.support.k_max - cfg.support.k_min + 1);
  Support support;
  switch (cfg.support.mode) {
    case SupportConfig::Mode::Explicit:
      support = Support(cfg.support.points);
      break;
    case SupportConfig::Mode::Random: {
      const bool tight = rng.uniform01() < cfg.support.tight_fraction;
      support = random_support(rng, k, dim, cfg.support.lo, cfg.support.hi, cfg.support.min_gap, tight);
      break;
    }
    case SupportConfig::Mode::Separated: {
      const double dp = cfg.support.factor * std::log(2.0 * static_cast<double>(k) - 1.0) / cfg.kernel.lambda;
      support = separated_support(rng, k, dim, std::pow(dp, 1.0 / cfg.kernel.p), cfg.support.spread);
      break;
    }
  }
  std::vector<double> coef;
  switch (cfg.coefficients.mode) {
    case CoefficientConfig::Mode::Explicit:
      coef = cfg.coefficients.values;
      break;
    case CoefficientConfig::Mode::Adversarial:
      coef = adversarial_coefficients(kernel, support);
      if (!coef.empty()) break;
      [[fallthrough]];
    case CoefficientConfig::Mode::Random:
      coef = random_coefficients(rng, support.size(), cfg.coefficients.lo, cfg.coefficients.hi,
                                 cfg.coefficients.positive);
      break;
  }
  return SparseSignal(std::move(support), std::move(coef));
}

inline std::size_t max_iter_for(const ExperimentConfig& cfg, const SparseSignal& s) {
  return cfg.omp.max_iter > 0 ? cfg.omp.max_iter : std::max<std::size_t>(1, default_max_iter(s.size(), cfg.kernel.dimension));
}

struct TrialRecord {
  std::size_t trial_index = 0;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::size_t dim = 0;
  std::string verdict;
  std::size_t iterations = 0;
  double residual = 0.0;  // final residual norm relative to ||y||
  double erc_max = 0.0;
  std::optional<double> ms;
};

struct TrialOutcome {
  TrialRecord record;
  std::optional<SparseSignal> signal;
  OMPTrace trace;
  std::optional<Verdict> verdict;
  std::string error;
};

inline TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t index, std::uint64_t master_seed) {
  TrialOutcome out;
  auto& rec = out.record;
  rec.trial_index = index;
  rec.seed = trial_seed(master_seed, index);
  rec.dim = cfg.kernel.dimension;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Rng rng(rec.seed);
    const KernelSpec kernel = cfg.kernel.build();
    out.signal.emplace(make_instance(cfg, rng));
    const auto& sig = *out.signal;
    rec.k = sig.size();
    rec.erc_max = sig.size() > 0 ? restricted_erc(kernel, sig.support()).value : 0.0;
    out.trace = run_omp(sig, kernel, cfg.optimizer, max_iter_for(cfg, sig), cfg.omp.eps_stop);
    out.verdict = classify(out.trace, sig, cfg.omp.tau_match);
    rec.verdict = out.trace.terminated == Termination::Degenerate ? "Degenerate" : to_string(out.verdict->kind);
    rec.iterations = out.trace.iterations.size();
    rec.residual = out.trace.relative_residual();
  } catch (const Error& e) {
    rec.verdict = "Error";
    out.error = e.what();
  }
  rec.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

namespace detail {

inline void emit(const CliOptions& opt, const std::string& doc, std::ostream& out) {
  if (opt.out_path.empty()) {
    out << doc;
    return;
  }
  std::ofstream f(opt.out_path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + opt.out_path + "'");
  f << doc;
}

inline void check_format(const CliOptions& opt) {
  if (opt.format != "json" && opt.format != "csv") throw ConfigError("--format must be csv or json");
}

inline nlohmann::json trace_json(const OMPTrace& trace) {
  auto its = nlohmann::json::array();
  for (const auto& it : trace.iterations) {
    its.push_back({{"selected", to_json(it.selected)},
                   {"tie_set", to_json(it.tie_set)},
                   {"selection_value", it.selection_value},
                   {"ls_coefficients", it.ls_coefficients},
                   {"residual_norm", it.residual_norm},
                   {"max_selected_correlation", it.max_selected_correlation}});
  }
  return {{"iterations", its},
          {"terminated", to_string(trace.terminated)},
          {"signal_norm", trace.signal_norm},
          {"detail", trace.detail}};
}

inline nlohmann::json verdict_json(const Verdict& v) {
  auto matched = nlohmann::json::array();
  for (const auto& m : v.matched) matched.push_back(m ? nlohmann::json(*m) : nlohmann::json(nullptr));
  return {{"kind", to_string(v.kind)},
          {"matched_iteration", matched},
          {"max_grid_distance", v.max_grid_distance},
          {"details", v.details}};
}

}  // namespace detail

inline int cmd_run(const ExperimentConfig& cfg, const CliOptions& opt, std::ostream& out, std::ostream& err) {
  detail::check_format(opt);
  if (cfg.support.mode != SupportConfig::Mode::Explicit || cfg.coefficients.mode != CoefficientConfig::Mode::Explicit) {
    throw ConfigError("run: needs explicit support.points and coefficients.values");
  }
  const KernelSpec kernel = cfg.kernel.build();
  const SparseSignal sig(Support(cfg.support.points), cfg.coefficients.values);
  const OMPTrace trace = run_omp(sig, kernel, cfg.optimizer, max_iter_for(cfg, sig), cfg.omp.eps_stop);
  const Verdict verdict = classify(trace, sig, cfg.omp.tau_match);

  nlohmann::json recon = nullptr;
  if (trace.terminated == Termination::ResidualZero) {
    const auto rep = recovered_signal(trace, sig, cfg.omp.tau_match);
    auto entries = nlohmann::json::array();
    for (const auto& e : rep.entries) {
      entries.push_back({{"selected", to_json(e.selected)},
                         {"estimate", e.estimate},
                         {"expected", e.expected},
                         {"true_index", e.true_index ? nlohmann::json(*e.true_index) : nlohmann::json(nullptr)},
                         {"ok", e.ok}});
    }
    recon = {{"entries", entries}, {"all_ok", rep.all_ok}};
  }

  std::string doc;
  if (opt.format == "json") {
    nlohmann::json j = {{"schema_version", kSchemaVersion},
                        {"kernel", kernel.describe()},
                        {"signal", {{"support", to_json(sig.support().points())}, {"coefficients", sig.coefficients()}}},
                        {"trace", detail::trace_json(trace)},
                        {"verdict", detail::verdict_json(verdict)},
                        {"reconstruction", recon}};
    doc = j.dump(2) + "\n";
  } else {
    std::ostringstream os;
    os << "iteration,selected,selection_value,residual_norm\n";
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
      const auto& it = trace.iterations[i];
      os << i + 1 << ",";
      for (std::size_t d = 0; d < it.selected.dim(); ++d) os << (d ? " " : "") << fmt17(it.selected[d]);
      os << "," << fmt17(it.selection_value) << "," << fmt17(it.residual_norm) << "\n";
    }
    doc = os.str();
  }
  std::ostream& summary = opt.out_path.empty() ? err : out;
  detail::emit(opt, doc, out);
  summary << "kernel: " << kernel.describe() << "\n"
          << "verdict: " << to_string(verdict.kind) << (verdict.details.empty() ? "" : " (" + verdict.details + ")")
          << "\n"
          << "iterations: " << trace.iterations.size() << "\n"
          << "terminated: " << to_string(trace.terminated) << "\n"
          << "relative residual: " << fmt17(trace.relative_residual()) << "\n";
  if (trace.terminated == Termination::Degenerate) {
    summary << "degenerate: " << trace.detail << "\n";
    return kExitDegenerate;
  }
  return kExitOk;
}

inline int cmd_trial(const ExperimentConfig& cfg, const CliOptions& opt, std::ostream& out, std::ostream& err) {
  detail::check_format(opt);
  if (cfg.trials == 0) throw ConfigError("trials must be >= 1");
  const std::uint64_t master = opt.seed.value_or(cfg.seed);
  std::vector<TrialRecord> rows(cfg.trials);
  parallel_for(cfg.trials, opt.jobs, [&](std::size_t i) { rows[i] = run_trial(cfg, i, master).record; });

  std::map<std::string, std::size_t> counts;
  for (const auto& r : rows) ++counts[r.verdict];

  std::string doc;
  if (opt.format == "csv") {
    std::ostringstream os;
    os << "trial_index,seed,k,D,verdict,iterations,residual,erc_max,ms\n";
    for (const auto& r : rows) {
      os << r.trial_index << "," << r.seed << "," << r.k << "," << r.dim << "," << r.verdict << "," << r.iterations
         << "," << fmt17(r.residual) << "," << fmt17(r.erc_max) << ",";
      if (opt.timing && r.ms) os << fmt17(*r.ms);
      os << "\n";
    }
    for (const auto& [verdict, n] : counts) os << "# summary," << verdict << "," << n << "\n";
    doc = os.str();
  } else {
    auto arr = nlohmann::json::array();
    for (const auto& r : rows) {
      arr.push_back({{"trial_index", r.trial_index},
                     {"seed", r.seed},
                     {"k", r.k},
                     {"D", r.dim},
                     {"verdict", r.verdict},
                     {"iterations", r.iterations},
                     {"residual", r.residual},
                     {"erc_max", r.erc_max},
                     {"ms", opt.timing && r.ms ? nlohmann::json(*r.ms) : nlohmann::json(nullptr)}});
    }
    nlohmann::json j = {{"schema_version", kSchemaVersion}, {"master_seed", master}, {"trials", arr}, {"summary", counts}};
    doc = j.dump(2) + "\n";
  }
  detail::emit(opt, doc, out);
  for (const auto& [verdict, n] : counts) err << verdict << ": " << n << "\n";
  return kExitOk;
}

inline int cmd_certify(const ExperimentConfig& cfg, const CliOptions& opt, std::ostream& out, std::ostream& err) {
  detail::check_format(opt);
  if (cfg.support.mode != SupportConfig::Mode::Explicit) throw ConfigError("certify: needs explicit support.points");
  const KernelSpec kernel = cfg.kernel.build();
  const Support truth(cfg.support.points);
  if (truth.empty()) throw ConfigError("certify: support is empty");

  const RestrictedErc erc = restricted_erc(kernel, truth);
  const CoherenceReport coh = coherence_certificate(kernel, truth);
  std::optional<SeparationReport> sep;
  if (cfg.kernel.family == "laplace") sep = separation_certificate(truth, cfg.kernel.lambda, cfg.kernel.p);
  const CartesianGrid grid = set_aug(truth);
  const FalsifierReport fal = axis_admissibility_falsifier(kernel, grid, cfg.certify.falsifier_trials,
                                                           opt.seed.value_or(cfg.seed), cfg.certify.falsifier_probes,
                                                           cfg.omp.tau_match, cfg.optimizer);
  const std::string fal_status = fal.violated ? "violated" : "not-falsified";

  auto inf_safe = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json("inf"); };
  std::string doc;
  if (opt.format == "json") {
    nlohmann::json witness = nullptr;
    if (fal.witness) {
      witness = {{"axis", fal.witness->axis},
                 {"offset", to_json(fal.witness->offset)},
                 {"coefficients", fal.witness->coefficients},
                 {"maximizers", fal.witness->maximizers},
                 {"value", fal.witness->value},
                 {"best_on_axis", fal.witness->best_on_axis}};
    }
    nlohmann::json j = {
        {"schema_version", kSchemaVersion},
        {"kernel", kernel.describe()},
        {"k", truth.size()},
        {"restricted_erc",
         {{"value", erc.value}, {"argmax", erc.argmax ? to_json(*erc.argmax) : nlohmann::json(nullptr)},
          {"status", to_string(erc.status)}}},
        {"coherence", {{"mu", coh.mu}, {"bound_k", inf_safe(coh.bound)}, {"status", to_string(coh.status)}}},
        {"separation", sep ? nlohmann::json{{"delta0", sep->delta0 ? nlohmann::json(*sep->delta0) : nlohmann::json(nullptr)},
                                            {"delta0_p", sep->delta0_p},
                                            {"threshold", sep->threshold},
                                            {"status", to_string(sep->status)}}
                           : nlohmann::json{{"status", "not-applicable"}}},
        {"axis_falsifier",
         {{"status", fal_status}, {"trials", fal.trials_run}, {"skipped_zero", fal.skipped_zero}, {"witness", witness}}}};
    doc = j.dump(2) + "\n";
  } else {
    std::ostringstream os;
    os << "certificate,value,threshold,status\n";
    os << "restricted_erc," << fmt17(erc.value) << ",1," << to_string(erc.status) << "\n";
    os << "coherence," << fmt17(coh.mu) << "," << fmt17(coh.bound) << "," << to_string(coh.status) << "\n";
    if (sep) {
      os << "separation," << fmt17(sep->delta0_p) << "," << fmt17(sep->threshold) << "," << to_string(sep->status) << "\n";
    } else {
      os << "separation,,,not-applicable\n";
    }
    os << "axis_falsifier," << fal.trials_run << ",," << fal_status << "\n";
    doc = os.str();
  }
  detail::emit(opt, doc, out);
  err << "restricted ERC " << to_string(erc.status) << ", coherence " << to_string(coh.status) << ", separation "
      << (sep ? to_string(sep->status) : "not-applicable") << ", axis falsifier " << fal_status << "\n";
  return kExitOk;
}

struct ExampleCheck {
  std::string name;
  bool pass = false;
  std::string summary;
  nlohmann::json data;
};

// Gaussian deconvolution with two positive spikes: the first selection falls
// strictly between them.
inline ExampleCheck check_gaussian_example(const OptimizerConfig& ocfg = {}) {
  ExampleCheck c;
  c.name = "gaussian-two-spike";
  const SparseSignal sig(Support({Point{0.0}, Point{1.0}}), {1.0, 1.0});
  const OMPTrace trace = run_omp(sig, KernelSpec::gaussian(), ocfg, 3);
  const double first = trace.iterations.at(0).selected[0];
  // Independent oracle: dense grid at step 1e-5.
  double best_t = 0.0, best_v = -1.0;
  for (long i = 0; i <= 500000; ++i) {
    const double t = -2.0 + 1e-5 * static_cast<double>(i);
    const double v = std::exp(-0.25 * t * t) + std::exp(-0.25 * (t - 1.0) * (t - 1.0));
    if (v > best_v) best_v = v, best_t = t;
  }
  const Verdict v = classify(trace, sig);
  const double dist = std::min(std::abs(first), std::abs(first - 1.0));
  c.pass = dist > 1e-3 && std::abs(first - best_t) <= 1e-4 && v.kind == VerdictKind::SpuriousSelection;
  c.summary = "first selection " + fmt17(first) + " (grid oracle " + fmt17(best_t) + "), verdict " + to_string(v.kind);
  c.data = {{"first_selection", first}, {"oracle", best_t}, {"verdict", to_string(v.kind)}};
  return c;
}

// Simplex configuration in D = 3 with equal coefficients: the origin is preferred
// to every true parameter exactly when the margin function is negative.
inline ExampleCheck check_simplex_example(double scale, const OptimizerConfig& ocfg = {}) {
  ExampleCheck c;
  c.name = "simplex-necessary-separation";
  constexpr std::size_t k = 3;
  constexpr std::size_t dim = 3;
  const CmfSpec phi = CmfSpec::laplace(1.0);
  const double x = scale * std::log(2.0);  // Delta^p, p = 1
  const double margin = simplex_margin(phi, k, x);
  const KernelSpec kernel = KernelSpec::cmf(phi, 1.0, dim);
  const Support truth = simplex_configuration(k, dim, x, 1.0);
  const SparseSignal sig(truth, {1.0, 1.0, 1.0});
  const CorrelationFunction f(kernel, truth.points(), sig.coefficients());
  const double at_origin = f(Point::zeros(dim));
  double at_truth = 0.0;
  for (const auto& p : truth) at_truth = std::max(at_truth, f(p));
  const OMPTrace trace = run_omp(sig, kernel, ocfg, 1);
  const Point& first = trace.iterations.at(0).selected;
  const bool origin_first = same_point(first, Point::zeros(dim), kDefaultTauMatch);
  const bool truth_first = truth.find(first, kDefaultTauMatch).has_value();
  const bool predicted_failure = margin < 0.0;
  bool pass = predicted_failure ? (at_origin > at_truth && origin_first) : (at_truth > at_origin && truth_first);

  // Inverse-linear family: the bisection crossover separates the two regimes.
  const CmfSpec il = CmfSpec::inverse_linear(1.0);
  const double cross = simplex_crossover(il, k);
  const bool il_ok = simplex_margin(il, k, 0.5 * cross) < 0.0 && simplex_margin(il, k, 1.5 * cross) > 0.0 &&
                     std::abs(simplex_margin(il, k, 0.0)) <= 1e-14;
  pass = pass && il_ok;
  c.pass = pass;
  c.summary = std::string(predicted_failure ? "failure regime" : "recovery regime") + ": Delta^p = " + fmt17(x) +
              ", margin " + fmt17(margin) + ", corr(origin) " + fmt17(at_origin) + " vs max corr(support) " +
              fmt17(at_truth) + ", first selection " + (origin_first ? "origin" : (truth_first ? "in support" : "elsewhere")) +
              "; inverse-linear crossover " + fmt17(cross);
  c.data = {{"delta_p", x},
            {"margin", margin},
            {"regime", predicted_failure ? "failure" : "recovery"},
            {"corr_origin", at_origin},
            {"corr_support_max", at_truth},
            {"first_selection", to_json(first)},
            {"inverse_linear_crossover", cross}};
  return c;
}

// Grid {0,1}^2 with the inverse-linear CMF: the first-axis section through the
// origin peaks strictly between the axis values. The Laplace CMF never does.
inline ExampleCheck check_grid_example(std::uint64_t seed, const OptimizerConfig& ocfg = {}) {
  ExampleCheck c;
  c.name = "non-admissible-grid";
  const double delta = 1.0;
  const CmfSpec il = CmfSpec::inverse_linear(1.0);
  const GridSectionProbe sec = grid_section_probe(il, delta, 1.0);
  const CartesianGrid grid({{0.0, delta}, {0.0, delta}});
  const std::vector<std::vector<double>> probes{{1.0, sec.c34, 1.0, sec.c34}};  // grid order (0,0),(0,1),(1,0),(1,1)
  const FalsifierReport il_rep =
      axis_admissibility_falsifier(KernelSpec::cmf(il, 1.0, 2), grid, 0, seed, probes, kDefaultTauMatch, ocfg);
  const FalsifierReport lap_rep = axis_admissibility_falsifier(KernelSpec::cmf(CmfSpec::laplace(1.0), 1.0, 2), grid,
                                                               500, seed, probes, kDefaultTauMatch, ocfg);
  c.pass = std::abs(sec.f_zero) <= 1e-12 && std::abs(sec.f_delta) <= 1e-12 &&
           std::abs(sec.f_half - sec.closed_form) <= 1e-12 && sec.f_half > 0.0 && il_rep.violated && !lap_rep.violated;
  c.summary = "f1(0) = " + fmt17(sec.f_zero) + ", f1(Delta) = " + fmt17(sec.f_delta) + ", f1(Delta/2) = " +
              fmt17(sec.f_half) + " (closed form " + fmt17(sec.closed_form) + "); inverse-linear falsifier " +
              (il_rep.violated ? "violated" : "not-falsified") + ", laplace falsifier " +
              (lap_rep.violated ? "violated" : "not-falsified") + " over " + std::to_string(lap_rep.trials_run) +
              " sections";
  c.data = {{"f1_zero", sec.f_zero},
            {"f1_delta", sec.f_delta},
            {"f1_half", sec.f_half},
            {"f1_half_closed_form", sec.closed_form},
            {"inverse_linear_violated", il_rep.violated},
            {"laplace_violated", lap_rep.violated}};
  return c;
}

inline int cmd_paper_examples(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  detail::check_format(opt);
  if (!(opt.simplex_scale > 0.0)) throw ConfigError("--simplex-scale must be positive");
  const std::vector<ExampleCheck> checks{check_gaussian_example(), check_simplex_example(opt.simplex_scale),
                                         check_grid_example(opt.seed.value_or(0))};
  bool all = true;
  std::ostringstream text;
  auto bundle = nlohmann::json::array();
  for (const auto& c : checks) {
    all = all && c.pass;
    text << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.summary << "\n";
    bundle.push_back({{"name", c.name}, {"pass", c.pass}, {"summary", c.summary}, {"data", c.data}});
  }
  if (opt.format == "json") {
    const nlohmann::json j = {{"schema_version", kSchemaVersion}, {"examples", bundle}, {"all_pass", all}};
    if (!opt.out_path.empty()) detail::emit(opt, j.dump(2) + "\n", out);
    out << text.str();
  } else {
    std::ostringstream csv;
    csv << "example,pass\n";
    for (const auto& c : checks) csv << c.name << "," << (c.pass ? 1 : 0) << "\n";
    detail::emit(opt, csv.str(), out);
    if (!opt.out_path.empty()) out << text.str();
  }
  if (!all) err << "example assertion failed\n";
  return all ? kExitOk : kExitAssertion;
}

}  // namespace cmfomp
