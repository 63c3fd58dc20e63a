#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lsearch/baselines.hpp"
#include "lsearch/causal.hpp"
#include "lsearch/io.hpp"
#include "lsearch/parallel.hpp"
#include "lsearch/prob.hpp"
#include "lsearch/search.hpp"
#include "lsearch/skeleton.hpp"
#include "lsearch/synth.hpp"
#include "lsearch/version.hpp"

using namespace lsearch;

namespace {

// Exit codes: 0 success, 2 malformed input, 3 a requested run raised its
// divergence flag (outputs are still written).
constexpr int kExitInputError = 2;
constexpr int kExitDiverged = 3;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void emit_manifest(const std::string& subcommand, const std::string& config_hash,
                   std::uint64_t seed, const std::vector<std::string>& outputs,
                   double seconds) {
  RunManifest mf;
  mf.subcommand = subcommand;
  mf.config_hash = config_hash;
  mf.master_seed = seed;
  mf.version = kVersion;
  mf.duration_seconds = seconds;
  mf.outputs = outputs;
  write_manifest(outputs.front() + ".manifest.json", mf);
}

std::vector<std::string> split_names(const std::string& spec) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : spec) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// ---- search ----------------------------------------------------------------

struct SearchOpts {
  std::string joint_file;
  std::size_t k = 2;
  std::string beta = "0";
  int iters = 1000;
  int restarts = 40;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out;
};

int cmd_search(const SearchOpts& o, const std::string& invocation) {
  Stopwatch watch;
  const Joint2 p = read_joint_any(o.joint_file);
  const std::vector<double> betas = parse_beta_range(o.beta);

  SearchConfig cfg;
  cfg.max_iters = o.iters;
  cfg.fixed_point_tol = o.tol;
  cfg.restarts = o.restarts;
  cfg.seed = o.seed;

  const bool range_mode = o.beta.find(':') != std::string::npos;
  const std::string out = !o.out.empty() ? o.out : (range_mode ? "frontier.csv" : "trace.csv");

  if (range_mode) {
    const std::vector<TradeoffPoint> points =
        frontier_sweep(p, o.k, betas, cfg, resolve_workers(o.workers));
    write_frontier_csv(out, points);
    std::size_t converged = 0;
    for (const TradeoffPoint& pt : points) converged += pt.converged ? 1 : 0;
    std::cout << "wrote " << points.size() << " tradeoff points (" << converged
              << " converged) to " << out << "\n";
  } else {
    cfg.beta = betas.front();
    std::mt19937_64 rng = make_rng(o.seed, 0, 0);
    const SearchResult res = latent_search(p, o.k, cfg, std::nullopt, rng);
    write_trace_csv(out, res.trace);
    const TraceRecord& last = res.trace.records.back();
    std::cout << "beta=" << format_double_short(cfg.beta) << " iterations=" << res.trace.iterations_run
              << " converged=" << (res.trace.converged ? "yes" : "no")
              << " loss_bits=" << format_double(last.loss_bits)
              << " cmi_bits=" << format_double(last.cmi_bits)
              << " entropy_z_bits=" << format_double(last.entropy_z_bits) << "\n"
              << "wrote trace to " << out << "\n";
  }
  emit_manifest("search", hash_string_hex(invocation), o.seed, {out}, watch.seconds());
  return 0;
}

// ---- infer -----------------------------------------------------------------

struct InferOpts {
  std::string joint_file;
  std::size_t k = 0;  // 0: min of the two cardinalities
  double theta = -1.0;
  std::string theta_rule;
  double cmi_threshold = 0.001;
  std::string betas = "0:0.025:100";
  int restarts = 40;
  int iters = 1000;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out = "verdict.json";
};

int cmd_infer(const InferOpts& o, bool theta_given, const std::string& invocation) {
  Stopwatch watch;
  const Joint2 p = read_joint_any(o.joint_file);

  InferGraphConfig cfg;
  cfg.k = o.k > 0 ? o.k : std::min(p.rows(), p.cols());
  cfg.cmi_threshold = o.cmi_threshold;
  cfg.restarts = o.restarts;
  cfg.betas = parse_beta_range(o.betas);
  cfg.search.max_iters = o.iters;
  cfg.search.fixed_point_tol = o.tol;
  cfg.search.seed = o.seed;
  if (theta_given) {
    cfg.theta = o.theta;
  } else {
    cfg.theta = apply_threshold_rule(ThresholdRule::parse(o.theta_rule), p);
  }

  const GraphVerdict v = infer_graph(p, cfg, resolve_workers(o.workers));
  write_text_file(o.out, verdict_to_json(v, cfg) + "\n");
  std::cout << "graph=" << graph_kind_name(v.graph) << " h_min_bits="
            << (std::isinf(v.h_min_bits) ? "inf" : format_double(v.h_min_bits))
            << " theta_bits=" << format_double(v.theta_bits)
            << " qualifying_runs=" << v.qualifying_runs << "\n"
            << "wrote verdict to " << o.out << "\n";
  emit_manifest("infer", hash_string_hex(invocation), o.seed, {o.out}, watch.seconds());
  return 0;
}

// ---- synth -----------------------------------------------------------------

struct SynthOpts {
  std::string graph = "latent";
  std::size_t m = 20, n = 20, k = 10;
  std::string alpha = "1.0";
  std::uint64_t seed = 0;
  std::string out = "model";
};

int cmd_synth(const SynthOpts& o, const std::string& invocation) {
  Stopwatch watch;
  AlphaSpec alpha;
  alpha.values = parse_double_list(o.alpha);
  std::mt19937_64 rng = make_rng(o.seed, 0, 0);

  CausalModel model;
  if (o.graph == "latent") {
    model = sample_latent_model(o.m, o.n, o.k, alpha, rng);
  } else if (o.graph == "triangle") {
    model = sample_triangle_model(o.m, o.n, o.k, alpha, rng);
  } else {
    throw std::runtime_error("--graph must be latent or triangle, got '" + o.graph + "'");
  }

  const std::string joint_path = o.out + ".joint.csv";
  const std::string model_path = o.out + ".model.json";
  write_joint_csv(joint_path, model.joint());
  write_text_file(model_path, model.to_json() + "\n");
  std::cout << "sampled " << o.graph << " model m=" << o.m << " n=" << o.n << " k=" << o.k
            << " true_entropy_z_bits=" << format_double(model.true_entropy_z()) << "\n"
            << "wrote " << joint_path << " and " << model_path << "\n";
  emit_manifest("synth", hash_string_hex(invocation), o.seed, {joint_path, model_path},
                watch.seconds());
  return 0;
}

// ---- experiment --------------------------------------------------------------

std::vector<double> betas_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_beta_range(j.get<std::string>());
  return j.get<std::vector<double>>();
}

std::vector<AlphaSpec> alphas_from_json(const nlohmann::json& j) {
  std::vector<AlphaSpec> out;
  for (const auto& e : j) {
    AlphaSpec spec;
    if (e.is_number()) {
      spec.values = {e.get<double>()};
    } else {
      spec.values = e.get<std::vector<double>>();
    }
    out.push_back(std::move(spec));
  }
  if (out.empty()) throw std::runtime_error("experiment config: empty dirichlet list");
  return out;
}

int run_scatter_config(const nlohmann::json& j, int workers, const std::string& config_hash) {
  Stopwatch watch;
  ScatterConfig cfg;
  cfg.m = j.value("m", cfg.m);
  cfg.n = j.value("n", cfg.n);
  cfg.k_true = j.value("k_true", cfg.k_true);
  cfg.k_search = j.value("k_search", cfg.k_search);
  cfg.samples_per_graph = j.value("samples_per_graph", cfg.samples_per_graph);
  if (j.contains("dirichlet")) cfg.dirichlet_params = alphas_from_json(j.at("dirichlet"));
  cfg.cmi_threshold = j.value("cmi_threshold", cfg.cmi_threshold);
  cfg.betas = betas_from_json(j.at("betas"));
  cfg.restarts = j.value("restarts", cfg.restarts);
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  cfg.fixed_point_tol = j.value("tol", cfg.fixed_point_tol);
  const std::string mode = j.value("theta_mode", "max_true_entropy");
  if (mode == "max_true_entropy") {
    cfg.theta_mode = ThetaMode::MaxTrueEntropy;
  } else if (mode == "rule") {
    cfg.theta_mode = ThetaMode::Rule;
    cfg.theta_rule = ThresholdRule::parse(j.at("theta_rule").get<std::string>());
  } else {
    throw std::runtime_error("experiment config: theta_mode must be max_true_entropy or rule");
  }
  cfg.seed = j.value("seed", 0ULL);
  cfg.workers = workers;

  const std::string out = j.value("out", std::string("scatter.csv"));
  const ScatterResult result = run_scatter_experiment(cfg);
  write_records_csv(out, result.records);

  int correct = 0;
  for (const ExperimentRecord& r : result.records) correct += r.correct ? 1 : 0;
  std::cout << "scatter: " << result.records.size() << " models, theta_bits="
            << format_double(result.theta_bits) << ", correct=" << correct << "/"
            << result.records.size() << "\n"
            << "wrote " << out << "\n";
  emit_manifest("experiment", config_hash, cfg.seed, {out}, watch.seconds());
  return 0;
}

int run_accuracy_config(const nlohmann::json& j, int workers, const std::string& config_hash) {
  Stopwatch watch;
  AccuracyConfig cfg;
  cfg.sizes = j.at("sizes").get<std::vector<std::size_t>>();
  for (const auto& r : j.at("rules")) cfg.rules.push_back(ThresholdRule::parse(r.get<std::string>()));
  cfg.samples_per_graph = j.value("samples_per_graph", cfg.samples_per_graph);
  if (j.contains("dirichlet")) cfg.dirichlet_params = alphas_from_json(j.at("dirichlet"));
  cfg.cmi_threshold = j.value("cmi_threshold", cfg.cmi_threshold);
  cfg.betas = betas_from_json(j.at("betas"));
  cfg.restarts = j.value("restarts", cfg.restarts);
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  cfg.fixed_point_tol = j.value("tol", cfg.fixed_point_tol);
  cfg.seed = j.value("seed", 0ULL);
  cfg.workers = workers;

  const std::string out = j.value("out", std::string("accuracy.csv"));
  const AccuracyResult result = run_accuracy_experiment(cfg);
  write_accuracy_csv(out, result.rows);
  std::vector<std::string> outputs{out};
  if (j.contains("records_out")) {
    outputs.push_back(j.at("records_out").get<std::string>());
    write_records_csv(outputs.back(), result.records);
  }
  for (const AccuracyRow& row : result.rows) {
    std::cout << "n=" << row.n << " rule=" << row.rule
              << " accuracy=" << format_double(row.overall_accuracy) << "\n";
  }
  std::cout << "wrote " << out << "\n";
  emit_manifest("experiment", config_hash, cfg.seed, outputs, watch.seconds());
  return 0;
}

int run_baselines_config(const nlohmann::json& j, int workers, const std::string& config_hash) {
  Stopwatch watch;
  (void)workers;  // every run below is a single trajectory; nothing to split

  Joint2 p = [&]() {
    if (j.contains("joint")) return read_joint_any(j.at("joint").get<std::string>());
    const nlohmann::json& s = j.at("synth");
    AlphaSpec alpha;
    alpha.values = s.contains("alpha") ? s.at("alpha").get<std::vector<double>>()
                                       : std::vector<double>{1.0};
    std::mt19937_64 rng = make_rng(s.value("seed", 0ULL), 0, 0);
    const std::size_t m = s.at("m").get<std::size_t>();
    const std::size_t n = s.at("n").get<std::size_t>();
    const std::size_t kk = s.at("k").get<std::size_t>();
    return (s.value("graph", std::string("latent")) == "triangle"
                ? sample_triangle_model(m, n, kk, alpha, rng)
                : sample_latent_model(m, n, kk, alpha, rng))
        .joint();
  }();

  const std::size_t k = j.value("k", std::min(p.rows(), p.cols()));
  const double beta = j.value("beta", 0.0);
  const std::uint64_t seed = j.value("seed", 0ULL);
  const int ls_iters = j.value("ls_iters", 1000);
  const int gd_iters = j.value("gd_iters", 10000);
  const std::vector<double> gd_steps =
      j.contains("gd_steps") ? j.at("gd_steps").get<std::vector<double>>()
                             : std::vector<double>{0.001, 0.1};
  const int em_iters = j.value("em_iters", 300);
  const std::vector<std::size_t> nmf_ks =
      j.contains("nmf_ks") ? j.at("nmf_ks").get<std::vector<std::size_t>>()
                           : std::vector<std::size_t>{k};
  const int stride = std::max(1, j.value("trace_stride", 50));

  std::vector<ComparisonRow> rows;
  const auto keep = [&](int it, int total) { return it % stride == 0 || it == total; };

  {
    SearchConfig cfg;
    cfg.beta = beta;
    cfg.max_iters = ls_iters;
    std::mt19937_64 rng = make_rng(seed, 1, 0);
    const SearchResult res = latent_search(p, k, cfg, std::nullopt, rng);
    const std::string status = res.trace.converged ? "converged" : "not_converged";
    for (const TraceRecord& t : res.trace.records) {
      if (!keep(t.iteration, res.trace.iterations_run)) continue;
      rows.push_back({"latent_search", beta, 0, t.iteration, t.loss_bits, t.cmi_bits,
                      t.entropy_z_bits, status});
    }
  }

  bool any_diverged = false;
  for (std::size_t si = 0; si < gd_steps.size(); ++si) {
    BaselineConfig cfg;
    cfg.step_size = gd_steps[si];
    cfg.max_iters = gd_iters;
    std::mt19937_64 rng = make_rng(seed, 2, si);
    const GdResult res = gradient_descent_search(p, k, beta, cfg, rng);
    any_diverged = any_diverged || res.diverged;
    const std::string status =
        res.diverged ? "diverged" : (res.trace.converged ? "converged" : "not_converged");
    const std::string name = "gd:" + format_double_short(gd_steps[si]);
    for (const TraceRecord& t : res.trace.records) {
      if (!keep(t.iteration, res.trace.iterations_run)) continue;
      rows.push_back({name, beta, 0, t.iteration, t.loss_bits, t.cmi_bits, t.entropy_z_bits,
                      status});
    }
  }

  {
    std::mt19937_64 rng = make_rng(seed, 3, 0);
    const EmResult res = em_plsa(p, k, random_plsa_factors(k, p.rows(), p.cols(), rng), em_iters);
    for (const EmRecord& t : res.trace) {
      if (!keep(t.iteration, em_iters)) continue;
      rows.push_back({"em", static_cast<double>(k), 0, t.iteration,
                      t.cmi_bits + beta * t.entropy_z_bits, t.cmi_bits, t.entropy_z_bits,
                      "completed"});
    }
  }

  for (std::size_t ki = 0; ki < nmf_ks.size(); ++ki) {
    BaselineConfig cfg;
    cfg.max_iters = j.value("nmf_outer_iters", 60);
    cfg.nmf_inner_iters = j.value("nmf_inner_iters", 50);
    std::mt19937_64 rng = make_rng(seed, 4, ki);
    const NmfResult res = nmf_factorize(p, nmf_ks[ki], cfg, rng);
    const PosteriorQ q = nmf_implied_posterior(p, res.u, res.v);
    const Joint3 joint = joint_from_posterior(p, q);
    const double cmi = conditional_mutual_information(joint);
    const Dist1 qz = joint.marginal_z();
    const double hz = entropy(qz);
    rows.push_back({"nmf", static_cast<double>(nmf_ks[ki]), 0, cfg.max_iters,
                    cmi + beta * hz, cmi, hz, "completed"});
  }

  const std::string out = j.value("out", std::string("comparison.csv"));
  write_comparison_csv(out, rows);
  std::cout << "wrote " << rows.size() << " comparison rows to " << out << "\n";
  if (any_diverged) std::cout << "note: at least one gradient-descent run diverged\n";
  emit_manifest("experiment", config_hash, seed, {out}, watch.seconds());
  return any_diverged ? kExitDiverged : 0;
}

int cmd_experiment(const std::string& config_path, int workers) {
  const nlohmann::json j = nlohmann::json::parse(read_text_file(config_path));
  const std::string mode = j.at("mode").get<std::string>();
  const std::string config_hash = hash_file_hex(config_path);
  const int w = resolve_workers(workers);
  if (mode == "scatter") return run_scatter_config(j, w, config_hash);
  if (mode == "accuracy") return run_accuracy_config(j, w, config_hash);
  if (mode == "baselines") return run_baselines_config(j, w, config_hash);
  throw std::runtime_error("experiment config: unknown mode '" + mode +
                           "' (expected scatter, accuracy or baselines)");
}

// ---- skeleton ----------------------------------------------------------------

struct SkeletonOpts {
  std::string data;
  std::string columns;
  std::string theta_rule = "min:0.8";
  std::string k_rule = "min";
  double cmi_threshold = 0.0005;
  std::string betas = "0:0.025:100";
  int restarts = 40;
  int iters = 1000;
  double tol = 1e-10;
  double smoothing = 0.0;
  std::string missing = "?,";
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_dot = "skeleton.dot";
  std::string out_json = "skeleton.json";
  std::string out_pairs = "pairs.csv";
  std::string fixture;
};

int cmd_skeleton(const SkeletonOpts& o, const std::string& invocation) {
  Stopwatch watch;
  const std::vector<std::string> columns =
      o.columns.empty() ? std::vector<std::string>{} : split_names(o.columns);
  const CategoricalTable table = load_table(o.data, columns, split_names(o.missing));
  std::cout << "loaded " << table.row_count << " rows, " << table.column_count()
            << " columns after cleaning\n";

  SkeletonConfig cfg;
  cfg.theta_rule = ThresholdRule::parse(o.theta_rule);
  cfg.k_rule = KRule::parse(o.k_rule);
  cfg.betas = parse_beta_range(o.betas);
  cfg.restarts = o.restarts;
  cfg.max_iters = o.iters;
  cfg.fixed_point_tol = o.tol;
  cfg.cmi_threshold = o.cmi_threshold;
  cfg.smoothing_eps = o.smoothing;
  cfg.seed = o.seed;
  cfg.workers = resolve_workers(o.workers);

  const Skeleton s = recover_skeleton(table, cfg);
  write_skeleton_dot(o.out_dot, s);
  write_skeleton_json(o.out_json, s);
  write_pairs_csv(o.out_pairs, s);
  std::cout << "kept " << s.edges.size() << " of " << s.pairs.size() << " edges\n";
  for (const auto& [a, b] : s.edges) std::cout << "  " << a << " -- " << b << "\n";

  if (!o.fixture.empty()) {
    const EdgeDiff diff = diff_edges(s, read_edge_list(o.fixture));
    std::cout << "fixture comparison (" << o.fixture << "):\n" << format_edge_diff(diff);
  }
  emit_manifest("skeleton", hash_string_hex(invocation), o.seed,
                {o.out_dot, o.out_json, o.out_pairs}, watch.seconds());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::string invocation;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) invocation += ' ';
    invocation += argv[i];
  }

  CLI::App app{"Low-entropy latent variable search and causal structure tools"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SearchOpts so;
  CLI::App* search = app.add_subcommand(
      "search", "Run the fixed-point search on a stored joint distribution");
  search->add_option("joint", so.joint_file, "joint distribution file (.csv or .json)")
      ->required();
  search->add_option("--k", so.k, "latent cardinality")->required();
  search->add_option("--beta", so.beta,
                     "entropy weight: single value, or start:stop:count for a sweep (default 0)");
  search->add_option("--iters", so.iters, "iteration budget per run (default 1000)");
  search->add_option("--restarts", so.restarts, "random restarts per beta in sweeps (default 40)");
  search->add_option("--tol", so.tol, "fixed-point stop tolerance (default 1e-10)");
  search->add_option("--seed", so.seed, "master seed (default 0)");
  search->add_option("--workers", so.workers, "worker threads; 0 = LSEARCH_WORKERS or hardware");
  search->add_option("--out", so.out, "output CSV (default frontier.csv / trace.csv)");

  InferOpts io_;
  CLI::App* infer = app.add_subcommand(
      "infer", "Decide latent-confounder vs direct-edge structure for a stored joint");
  infer->add_option("joint", io_.joint_file, "joint distribution file (.csv or .json)")
      ->required();
  infer->add_option("--k", io_.k, "latent cardinality; 0 = min of the two cardinalities");
  CLI::Option* theta_opt =
      infer->add_option("--theta", io_.theta, "entropy threshold in bits");
  CLI::Option* rule_opt = infer->add_option(
      "--theta-rule", io_.theta_rule, "threshold rule: const:c, min:a or minoff:a:b");
  theta_opt->excludes(rule_opt);
  infer->add_option("--cmi-threshold", io_.cmi_threshold,
                    "conditional-dependence acceptance threshold (default 0.001)");
  infer->add_option("--betas", io_.betas, "beta grid (default 0:0.025:100)");
  infer->add_option("--restarts", io_.restarts, "restarts per beta (default 40)");
  infer->add_option("--iters", io_.iters, "iteration budget per run (default 1000)");
  infer->add_option("--tol", io_.tol, "fixed-point stop tolerance (default 1e-10)");
  infer->add_option("--seed", io_.seed, "master seed (default 0)");
  infer->add_option("--workers", io_.workers, "worker threads; 0 = LSEARCH_WORKERS or hardware");
  infer->add_option("--out", io_.out, "verdict JSON path (default verdict.json)");

  SynthOpts yo;
  CLI::App* synth = app.add_subcommand(
      "synth", "Sample a ground-truth model and store its joint distribution");
  synth->add_option("--graph", yo.graph, "latent or triangle (default latent)");
  synth->add_option("--m", yo.m, "states of X (default 20)");
  synth->add_option("--n", yo.n, "states of Y (default 20)");
  synth->add_option("--k", yo.k, "states of Z (default 10)");
  synth->add_option("--alpha", yo.alpha,
                    "Dirichlet concentration(s) for the latent prior, e.g. 1.0,0.5,0.2,0.1 "
                    "(a list is tiled across states; default 1.0)");
  synth->add_option("--seed", yo.seed, "master seed (default 0)");
  synth->add_option("--out", yo.out, "output prefix (default model)");

  std::string config_path;
  int experiment_workers = 0;
  CLI::App* experiment = app.add_subcommand(
      "experiment", "Run a study described by a JSON config (scatter, accuracy or baselines)");
  experiment->add_option("--config", config_path, "JSON config file")->required();
  experiment->add_option("--workers", experiment_workers,
                         "worker threads; 0 = LSEARCH_WORKERS or hardware");

  SkeletonOpts ko;
  CLI::App* skeleton = app.add_subcommand(
      "skeleton", "Recover the pairwise structure of a categorical data table");
  skeleton->add_option("--data", ko.data, "CSV table with a header row")->required();
  skeleton->add_option("--columns", ko.columns, "comma-separated column subset (default all)");
  skeleton->add_option("--theta-rule", ko.theta_rule, "threshold rule (default min:0.8)");
  skeleton->add_option("--k-rule", ko.k_rule,
                       "latent cardinality per pair: min or fixed:K (default min)");
  skeleton->add_option("--cmi-threshold", ko.cmi_threshold,
                       "conditional-dependence acceptance threshold (default 0.0005)");
  skeleton->add_option("--betas", ko.betas, "beta grid (default 0:0.025:100)");
  skeleton->add_option("--restarts", ko.restarts, "restarts per beta (default 40)");
  skeleton->add_option("--iters", ko.iters, "iteration budget per run (default 1000)");
  skeleton->add_option("--tol", ko.tol, "fixed-point stop tolerance (default 1e-10)");
  skeleton->add_option("--smoothing", ko.smoothing, "additive smoothing mass (default 0)");
  skeleton->add_option("--missing", ko.missing,
                       "comma-separated missing-value tokens (default \"?,\" meaning ? and empty)");
  skeleton->add_option("--seed", ko.seed, "master seed (default 0)");
  skeleton->add_option("--workers", ko.workers, "worker threads; 0 = LSEARCH_WORKERS or hardware");
  skeleton->add_option("--out-dot", ko.out_dot, "DOT output (default skeleton.dot)");
  skeleton->add_option("--out-json", ko.out_json, "JSON diagnostics output (default skeleton.json)");
  skeleton->add_option("--out-pairs", ko.out_pairs, "per-pair CSV output (default pairs.csv)");
  skeleton->add_option("--fixture", ko.fixture,
                       "edge-list file to diff against (informational)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (search->parsed()) return cmd_search(so, invocation);
    if (infer->parsed()) {
      if (theta_opt->count() == 0 && rule_opt->count() == 0) {
        throw std::runtime_error("infer: provide --theta or --theta-rule");
      }
      return cmd_infer(io_, theta_opt->count() > 0, invocation);
    }
    if (synth->parsed()) return cmd_synth(yo, invocation);
    if (experiment->parsed()) return cmd_experiment(config_path, experiment_workers);
    if (skeleton->parsed()) return cmd_skeleton(ko, invocation);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return 0;
}
