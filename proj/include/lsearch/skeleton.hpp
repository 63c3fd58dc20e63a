#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lsearch/causal.hpp"
#include "lsearch/prob.hpp"
#include "lsearch/search.hpp"

// Pairwise skeleton recovery over a categorical data table: estimate the
// joint of every column pair, find the smallest latent entropy that drives
// the pair's conditional dependence below a threshold, and keep the edge
// only when that entropy is at least theta (a cheap latent explanation
// removes the edge).

namespace lsearch {

struct CategoricalTable {
  std::vector<std::string> column_names;
  std::vector<std::vector<std::string>> dictionaries;  // per column, code -> value
  std::vector<std::size_t> codes;                      // row-major, row * columns + col
  std::size_t row_count = 0;

  std::size_t column_count() const { return column_names.size(); }
  std::size_t cardinality(std::size_t col) const { return dictionaries[col].size(); }
  std::size_t code_at(std::size_t row, std::size_t col) const {
    return codes[row * column_names.size() + col];
  }
  std::size_t column_index(const std::string& name) const;  // throws on unknown name
};

// CSV with a header row. Values are trimmed and case-folded before the
// dictionaries are built; rows containing any missing token (compared after
// the same cleaning) are dropped. An empty `columns` keeps every column,
// otherwise the listed columns are kept in the given order.
CategoricalTable load_table(const std::string& path,
                            const std::vector<std::string>& columns = {},
                            const std::vector<std::string>& missing_tokens = {"?", ""});

// Empirical relative frequencies of a column pair, labeled with the
// dictionary values. smoothing_eps > 0 adds eps to every cell before
// normalizing (off by default: abundant rows need no smoothing).
Joint2 estimate_joint(const CategoricalTable& t, const std::string& var_x,
                      const std::string& var_y, double smoothing_eps = 0.0);

struct PairScan {
  double h_min_bits = 0.0;  // +inf when no run qualifies
  int qualifying_runs = 0;
  std::vector<TradeoffPoint> points;
};

// Smallest final H(Z) over all (beta, restart) runs whose final conditional
// dependence is at most cmi_threshold.
PairScan pairwise_hmin(const Joint2& p, std::size_t k, const std::vector<double>& betas,
                       const SearchConfig& cfg, double cmi_threshold);

// Latent cardinality per pair: the largest k at which the rank obstruction
// can still bind (min of the two cardinalities), or a fixed value.
struct KRule {
  enum class Kind { MinCard, Fixed };
  Kind kind = Kind::MinCard;
  std::size_t k = 2;

  static KRule min_card() { return {Kind::MinCard, 0}; }
  static KRule fixed(std::size_t k) { return {Kind::Fixed, k}; }
  static KRule parse(const std::string& spec);  // "min" or "fixed:K"
  std::string to_string() const;
  std::size_t evaluate(std::size_t card_x, std::size_t card_y) const;
};

struct PairDiagnostics {
  std::string var_x, var_y;  // canonical order: var_x < var_y
  std::size_t card_x = 0, card_y = 0, k = 0;
  double entropy_x_bits = 0.0, entropy_y_bits = 0.0;
  double h_min_bits = 0.0;  // +inf when no run qualifies
  double theta_bits = 0.0;
  bool edge_kept = false;  // h_min >= theta
  int qualifying_runs = 0;
  int betas_used = 0;
  double cmi_threshold = 0.0;
};

struct Skeleton {
  std::vector<std::string> variables;
  std::vector<std::pair<std::string, std::string>> edges;  // canonical order
  std::vector<PairDiagnostics> pairs;
};

struct SkeletonConfig {
  ThresholdRule theta_rule = ThresholdRule::scaled_min(0.8);
  KRule k_rule = KRule::min_card();
  std::vector<double> betas;
  int restarts = 40;
  int max_iters = 1000;
  double fixed_point_tol = 1e-10;
  double cmi_threshold = 0.0005;
  double smoothing_eps = 0.0;
  std::uint64_t seed = 0;
  int workers = 1;
};

// Starts from the complete undirected graph and prunes each pair whose
// h_min falls below the pair's theta. Pairs are processed once, in
// lexicographic name order, each with a seed derived from the pair's names,
// so results do not depend on column order or worker count.
Skeleton recover_skeleton(const CategoricalTable& t, const SkeletonConfig& cfg);

void write_skeleton_dot(const std::string& path, const Skeleton& s);
void write_skeleton_json(const std::string& path, const Skeleton& s);
// Per-pair CSV: var_x, var_y, cards, k, entropies, h_min, theta, edge_kept.
void write_pairs_csv(const std::string& path, const Skeleton& s);

// Edge-list fixture support: one edge per line, "a -- b" or "a,b", '#'
// comments. Used to report an informational diff against a stored skeleton.
std::vector<std::pair<std::string, std::string>> read_edge_list(const std::string& path);

struct EdgeDiff {
  std::vector<std::pair<std::string, std::string>> missing;  // in fixture, not recovered
  std::vector<std::pair<std::string, std::string>> extra;    // recovered, not in fixture
};

EdgeDiff diff_edges(const Skeleton& s,
                    const std::vector<std::pair<std::string, std::string>>& fixture);
std::string format_edge_diff(const EdgeDiff& diff);

}  // namespace lsearch
