#include "lsearch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "json.hpp"
#include "lsearch/io.hpp"
#include "lsearch/parallel.hpp"

namespace lsearch {

namespace {

constexpr std::uint64_t kModelStream = 0x6d6f64;  // model sampling
constexpr std::uint64_t kSweepStream = 0x737770;  // search restarts

// Split index i of `total` into |parts| even chunks, in order.
std::size_t chunk_index(int i, int total, std::size_t parts) {
  if (parts == 0) throw std::invalid_argument("experiment: empty Dirichlet parameter list");
  std::size_t idx = static_cast<std::size_t>(i) * parts / static_cast<std::size_t>(total);
  return std::min(idx, parts - 1);
}

struct SweepSummary {
  double h_min = std::numeric_limits<double>::infinity();
  int qualifying = 0;
};

SweepSummary sweep_joint(const Joint2& p, std::size_t k, const std::vector<double>& betas,
                         int restarts, int max_iters, double tol, double cmi_threshold,
                         std::uint64_t seed) {
  SearchConfig scfg;
  scfg.max_iters = max_iters;
  scfg.fixed_point_tol = tol;
  scfg.restarts = restarts;
  scfg.seed = seed;
  SweepSummary out;
  for (const TradeoffPoint& pt : frontier_sweep(p, k, betas, scfg, 1)) {
    if (pt.cmi_bits <= cmi_threshold) {
      ++out.qualifying;
      out.h_min = std::min(out.h_min, pt.entropy_z_bits);
    }
  }
  return out;
}

std::vector<std::vector<double>> rows_to_json(const std::vector<Dist1>& rows) {
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const Dist1& r : rows) out.push_back(r.probs());
  return out;
}

std::vector<Dist1> rows_from_json(const nlohmann::json& arr, std::size_t expected_rows,
                                  std::size_t expected_dim, const char* what) {
  if (!arr.is_array() || arr.size() != expected_rows) {
    throw std::runtime_error(std::string("model json: ") + what + ": expected " +
                             std::to_string(expected_rows) + " rows");
  }
  std::vector<Dist1> rows;
  rows.reserve(expected_rows);
  for (const auto& row : arr) {
    std::vector<double> v = row.get<std::vector<double>>();
    if (v.size() != expected_dim) {
      throw std::runtime_error(std::string("model json: ") + what + ": row has " +
                               std::to_string(v.size()) + " entries, expected " +
                               std::to_string(expected_dim));
    }
    rows.emplace_back(std::move(v));
  }
  return rows;
}

}  // namespace

std::string AlphaSpec::label() const {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double_short(values[i]);
  }
  return out;
}

Joint2 CausalModel::joint() const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t z = 0; z < k; ++z) {
    for (std::size_t x = 0; x < m; ++x) {
      const double pzx = z_prior[z] * x_given_z[z][x];
      if (pzx == 0.0) continue;
      const Dist1& yr = y_rows[kind == GraphKind::LatentGraph ? z : z * m + x];
      for (std::size_t y = 0; y < n; ++y) {
        p(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) += pzx * yr[y];
      }
    }
  }
  return Joint2(std::move(p));
}

Joint3 CausalModel::full_joint() const {
  std::vector<double> probs(k * m * n, 0.0);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t z = 0; z < k; ++z) {
        const Dist1& yr = y_rows[kind == GraphKind::LatentGraph ? z : z * m + x];
        probs[(x * n + y) * k + z] = z_prior[z] * x_given_z[z][x] * yr[y];
      }
    }
  }
  return Joint3(k, m, n, std::move(probs));
}

std::string CausalModel::to_json() const {
  nlohmann::json j;
  j["kind"] = graph_kind_name(kind);
  j["m"] = m;
  j["n"] = n;
  j["k"] = k;
  j["z_prior"] = z_prior.probs();
  j["x_given_z"] = rows_to_json(x_given_z);
  j[kind == GraphKind::LatentGraph ? "y_given_z" : "y_given_zx"] = rows_to_json(y_rows);
  return j.dump(2);
}

CausalModel CausalModel::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  CausalModel model;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "LatentGraph") {
    model.kind = GraphKind::LatentGraph;
  } else if (kind == "TriangleGraph") {
    model.kind = GraphKind::TriangleGraph;
  } else {
    throw std::runtime_error("model json: unknown kind '" + kind + "'");
  }
  model.m = j.at("m").get<std::size_t>();
  model.n = j.at("n").get<std::size_t>();
  model.k = j.at("k").get<std::size_t>();
  if (model.m == 0 || model.n == 0 || model.k == 0) {
    throw std::runtime_error("model json: m, n, k must be positive");
  }
  std::vector<double> prior = j.at("z_prior").get<std::vector<double>>();
  if (prior.size() != model.k) throw std::runtime_error("model json: z_prior size != k");
  model.z_prior = Dist1(std::move(prior));
  model.x_given_z = rows_from_json(j.at("x_given_z"), model.k, model.m, "x_given_z");
  if (model.kind == GraphKind::LatentGraph) {
    model.y_rows = rows_from_json(j.at("y_given_z"), model.k, model.n, "y_given_z");
  } else {
    model.y_rows = rows_from_json(j.at("y_given_zx"), model.k * model.m, model.n, "y_given_zx");
  }
  return model;
}

CausalModel sample_latent_model(std::size_t m, std::size_t n, std::size_t k,
                                const AlphaSpec& alpha_z, std::mt19937_64& rng) {
  CausalModel model;
  model.kind = GraphKind::LatentGraph;
  model.m = m;
  model.n = n;
  model.k = k;
  model.z_prior = sample_simplex(k, alpha_z.values, rng);
  for (std::size_t z = 0; z < k; ++z) model.x_given_z.push_back(sample_simplex(m, 1.0, rng));
  for (std::size_t z = 0; z < k; ++z) model.y_rows.push_back(sample_simplex(n, 1.0, rng));
  return model;
}

CausalModel sample_triangle_model(std::size_t m, std::size_t n, std::size_t k,
                                  const AlphaSpec& alpha_z, std::mt19937_64& rng) {
  CausalModel model;
  model.kind = GraphKind::TriangleGraph;
  model.m = m;
  model.n = n;
  model.k = k;
  model.z_prior = sample_simplex(k, alpha_z.values, rng);
  for (std::size_t z = 0; z < k; ++z) model.x_given_z.push_back(sample_simplex(m, 1.0, rng));
  for (std::size_t z = 0; z < k; ++z) {
    for (std::size_t x = 0; x < m; ++x) model.y_rows.push_back(sample_simplex(n, 1.0, rng));
  }
  return model;
}

ScatterResult run_scatter_experiment(const ScatterConfig& cfg) {
  if (cfg.samples_per_graph <= 0) throw std::invalid_argument("scatter: samples_per_graph <= 0");
  if (cfg.betas.empty()) throw std::invalid_argument("scatter: empty beta list");
  const int total = 2 * cfg.samples_per_graph;

  std::vector<ExperimentRecord> records(static_cast<std::size_t>(total));
  parallel_for(static_cast<std::size_t>(total), cfg.workers, [&](std::size_t idx) {
    const int i = static_cast<int>(idx);
    const bool latent = i < cfg.samples_per_graph;
    const int within = latent ? i : i - cfg.samples_per_graph;
    const AlphaSpec& alpha =
        cfg.dirichlet_params[chunk_index(within, cfg.samples_per_graph, cfg.dirichlet_params.size())];

    std::mt19937_64 rng = make_rng(cfg.seed, kModelStream, idx);
    const CausalModel model =
        latent ? sample_latent_model(cfg.m, cfg.n, cfg.k_true, alpha, rng)
               : sample_triangle_model(cfg.m, cfg.n, cfg.k_true, alpha, rng);
    const Joint2 p = model.joint();

    ExperimentRecord& rec = records[idx];
    rec.index = i;
    rec.graph_true = model.kind;
    rec.m = cfg.m;
    rec.n = cfg.n;
    rec.k_true = cfg.k_true;
    rec.k_search = cfg.k_search;
    rec.alpha_label = alpha.label();
    rec.true_entropy_z_bits = model.true_entropy_z();
    rec.entropy_x_bits = entropy(p.marginal_x());
    rec.entropy_y_bits = entropy(p.marginal_y());

    const SweepSummary sweep =
        sweep_joint(p, cfg.k_search, cfg.betas, cfg.restarts, cfg.max_iters,
                    cfg.fixed_point_tol, cfg.cmi_threshold, mix_seed(cfg.seed, kSweepStream, idx));
    rec.h_min_bits = sweep.h_min;
    rec.qualifying_runs = sweep.qualifying;
    if (cfg.theta_mode == ThetaMode::Rule) {
      rec.theta_bits = cfg.theta_rule.evaluate(rec.entropy_x_bits, rec.entropy_y_bits);
    }
  });

  ScatterResult result;
  if (cfg.theta_mode == ThetaMode::MaxTrueEntropy) {
    double theta = 0.0;
    for (const ExperimentRecord& rec : records) theta = std::max(theta, rec.true_entropy_z_bits);
    for (ExperimentRecord& rec : records) rec.theta_bits = theta;
    result.theta_bits = theta;
  }
  for (ExperimentRecord& rec : records) {
    rec.graph_est =
        rec.h_min_bits <= rec.theta_bits ? GraphKind::LatentGraph : GraphKind::TriangleGraph;
    rec.correct = rec.graph_est == rec.graph_true;
  }
  if (cfg.theta_mode == ThetaMode::Rule && !records.empty()) {
    result.theta_bits = records.front().theta_bits;
  }
  result.records = std::move(records);
  return result;
}

AccuracyResult run_accuracy_experiment(const AccuracyConfig& cfg) {
  if (cfg.samples_per_graph <= 0) throw std::invalid_argument("accuracy: samples_per_graph <= 0");
  if (cfg.rules.empty()) throw std::invalid_argument("accuracy: empty rule list");
  if (cfg.betas.empty()) throw std::invalid_argument("accuracy: empty beta list");

  AccuracyResult result;
  for (std::size_t size_idx = 0; size_idx < cfg.sizes.size(); ++size_idx) {
    const std::size_t n = cfg.sizes[size_idx];
    if (n == 0) throw std::invalid_argument("accuracy: size 0");
    if (n == 1) {
      for (const ThresholdRule& rule : cfg.rules) {
        result.rows.push_back({n, rule.to_string(), 1.0, 1.0, 1.0});
      }
      continue;
    }

    const int total = 2 * cfg.samples_per_graph;
    std::vector<ExperimentRecord> records(static_cast<std::size_t>(total));
    parallel_for(static_cast<std::size_t>(total), cfg.workers, [&](std::size_t idx) {
      const int i = static_cast<int>(idx);
      const bool latent = i < cfg.samples_per_graph;
      const int within = latent ? i : i - cfg.samples_per_graph;
      const AlphaSpec& alpha = cfg.dirichlet_params[chunk_index(
          within, cfg.samples_per_graph, cfg.dirichlet_params.size())];

      std::mt19937_64 rng = make_rng(cfg.seed, kModelStream, size_idx, idx);
      const CausalModel model = latent ? sample_latent_model(n, n, n, alpha, rng)
                                       : sample_triangle_model(n, n, n, alpha, rng);
      const Joint2 p = model.joint();

      ExperimentRecord& rec = records[idx];
      rec.index = i;
      rec.graph_true = model.kind;
      rec.m = n;
      rec.n = n;
      rec.k_true = n;
      rec.k_search = n;
      rec.alpha_label = alpha.label();
      rec.true_entropy_z_bits = model.true_entropy_z();
      rec.entropy_x_bits = entropy(p.marginal_x());
      rec.entropy_y_bits = entropy(p.marginal_y());

      const SweepSummary sweep = sweep_joint(p, n, cfg.betas, cfg.restarts, cfg.max_iters,
                                             cfg.fixed_point_tol, cfg.cmi_threshold,
                                             mix_seed(cfg.seed, kSweepStream, size_idx, idx));
      rec.h_min_bits = sweep.h_min;
      rec.qualifying_runs = sweep.qualifying;
    });

    for (const ThresholdRule& rule : cfg.rules) {
      int correct_latent = 0;
      int correct_triangle = 0;
      for (ExperimentRecord& rec : records) {
        const double theta = rule.evaluate(rec.entropy_x_bits, rec.entropy_y_bits);
        const GraphKind est =
            rec.h_min_bits <= theta ? GraphKind::LatentGraph : GraphKind::TriangleGraph;
        if (est == rec.graph_true) {
          (rec.graph_true == GraphKind::LatentGraph ? correct_latent : correct_triangle)++;
        }
        if (&rule == &cfg.rules.front()) {
          rec.theta_bits = theta;
          rec.graph_est = est;
          rec.correct = est == rec.graph_true;
        }
      }
      AccuracyRow row;
      row.n = n;
      row.rule = rule.to_string();
      row.p_latent_given_latent =
          static_cast<double>(correct_latent) / cfg.samples_per_graph;
      row.p_triangle_given_triangle =
          static_cast<double>(correct_triangle) / cfg.samples_per_graph;
      row.overall_accuracy = 0.5 * (row.p_latent_given_latent + row.p_triangle_given_triangle);
      result.rows.push_back(row);
    }
    result.records.insert(result.records.end(), records.begin(), records.end());
  }
  return result;
}

void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "index,graph_true,m,n,k_true,k_search,alpha,true_entropy_z_bits,entropy_x_bits,"
         "entropy_y_bits,h_min_bits,qualifying_runs,theta_bits,graph_est,correct\n";
  for (const ExperimentRecord& r : records) {
    out << r.index << ',' << graph_kind_name(r.graph_true) << ',' << r.m << ',' << r.n << ','
        << r.k_true << ',' << r.k_search << ',' << r.alpha_label << ','
        << format_double(r.true_entropy_z_bits) << ',' << format_double(r.entropy_x_bits) << ','
        << format_double(r.entropy_y_bits) << ','
        << (std::isinf(r.h_min_bits) ? "inf" : format_double(r.h_min_bits)) << ','
        << r.qualifying_runs << ',' << format_double(r.theta_bits) << ','
        << graph_kind_name(r.graph_est) << ',' << (r.correct ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_accuracy_csv(const std::string& path, const std::vector<AccuracyRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "n,rule,overall_accuracy,p_latent_given_latent,p_triangle_given_triangle\n";
  for (const AccuracyRow& r : rows) {
    out << r.n << ',' << r.rule << ',' << format_double(r.overall_accuracy) << ','
        << format_double(r.p_latent_given_latent) << ','
        << format_double(r.p_triangle_given_triangle) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace lsearch
