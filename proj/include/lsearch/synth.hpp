#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lsearch/causal.hpp"
#include "lsearch/prob.hpp"
#include "lsearch/search.hpp"

// Ground-truth generators and the two study harnesses built on them: the
// entropy-recovery scatter (true latent entropy vs. smallest recovered
// entropy) and the accuracy table over threshold rules.

namespace lsearch {

// Dirichlet concentration spec: a single value means symmetric, a longer
// vector is tiled to the sampled dimension.
struct AlphaSpec {
  std::vector<double> values{1.0};
  std::string label() const;
};

// A sampled ground-truth model over (Z, X, Y).
//   LatentGraph:   p(z) p(x|z) p(y|z)            y_rows[z]
//   TriangleGraph: p(z) p(x|z) p(y|x,z)          y_rows[z * m + x]
struct CausalModel {
  GraphKind kind = GraphKind::LatentGraph;
  std::size_t m = 0, n = 0, k = 0;
  Dist1 z_prior = Dist1::point_mass(1, 0);
  std::vector<Dist1> x_given_z;
  std::vector<Dist1> y_rows;

  Joint2 joint() const;
  Joint3 full_joint() const;
  double true_entropy_z() const { return entropy(z_prior); }

  std::string to_json() const;
  static CausalModel from_json(const std::string& text);
};

// z_prior ~ Dirichlet(alpha tiled to k); all conditionals are uniform
// simplex draws.
CausalModel sample_latent_model(std::size_t m, std::size_t n, std::size_t k,
                                const AlphaSpec& alpha_z, std::mt19937_64& rng);
CausalModel sample_triangle_model(std::size_t m, std::size_t n, std::size_t k,
                                  const AlphaSpec& alpha_z, std::mt19937_64& rng);

struct ExperimentRecord {
  int index = 0;
  GraphKind graph_true = GraphKind::LatentGraph;
  std::size_t m = 0, n = 0, k_true = 0, k_search = 0;
  std::string alpha_label;
  double true_entropy_z_bits = 0.0;
  double entropy_x_bits = 0.0;
  double entropy_y_bits = 0.0;
  double h_min_bits = 0.0;  // +inf when no qualifying run
  int qualifying_runs = 0;
  double theta_bits = 0.0;
  GraphKind graph_est = GraphKind::TriangleGraph;
  bool correct = false;
};

// How the scatter harness picks its entropy threshold: either a rule on the
// observed marginals, or the largest sampled true latent entropy (the known
// upper bound on H(Z)).
enum class ThetaMode { Rule, MaxTrueEntropy };

struct ScatterConfig {
  std::size_t m = 20, n = 20, k_true = 10, k_search = 10;
  int samples_per_graph = 50;
  std::vector<AlphaSpec> dirichlet_params{{{1.0}}, {{0.5}}, {{0.2}}, {{0.1}}};
  double cmi_threshold = 0.001;
  std::vector<double> betas;
  int restarts = 5;
  int max_iters = 1000;
  double fixed_point_tol = 1e-10;
  ThetaMode theta_mode = ThetaMode::MaxTrueEntropy;
  ThresholdRule theta_rule = ThresholdRule::constant(0.0);
  std::uint64_t seed = 0;
  int workers = 1;
};

struct ScatterResult {
  std::vector<ExperimentRecord> records;
  double theta_bits = 0.0;
};

// Samples samples_per_graph models of each kind (Dirichlet settings split
// evenly across dirichlet_params, in order), runs the (beta x restart)
// sweep on every sampled joint and records the smallest qualifying H(Z).
ScatterResult run_scatter_experiment(const ScatterConfig& cfg);

struct AccuracyConfig {
  std::vector<std::size_t> sizes;  // m = n = k per entry
  std::vector<ThresholdRule> rules;
  int samples_per_graph = 40;
  std::vector<AlphaSpec> dirichlet_params{{{1.0}}, {{0.5}}, {{0.2}}, {{0.1}}};
  double cmi_threshold = 0.001;
  std::vector<double> betas;
  int restarts = 5;
  int max_iters = 1000;
  double fixed_point_tol = 1e-10;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct AccuracyRow {
  std::size_t n = 0;
  std::string rule;
  double overall_accuracy = 0.0;
  double p_latent_given_latent = 0.0;
  double p_triangle_given_triangle = 0.0;
};

struct AccuracyResult {
  std::vector<AccuracyRow> rows;
  std::vector<ExperimentRecord> records;  // one per (size, model), first rule's verdict
};

// The sweep runs once per sampled model; every rule is then evaluated on the
// shared h_min. Size 1 is degenerate (all entropies vanish) and scores 1 by
// convention.
AccuracyResult run_accuracy_experiment(const AccuracyConfig& cfg);

void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records);
void write_accuracy_csv(const std::string& path, const std::vector<AccuracyRow>& rows);

}  // namespace lsearch
