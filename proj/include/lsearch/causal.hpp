#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsearch/prob.hpp"
#include "lsearch/search.hpp"

// Decides between the two candidate structures for an observed pair (X, Y):
// a hidden common cause only (LatentGraph), or a hidden common cause plus a
// direct X -> Y edge (TriangleGraph). The decision statistic is the smallest
// latent entropy among searches that reached near conditional independence.

namespace lsearch {

enum class GraphKind { LatentGraph, TriangleGraph };

const char* graph_kind_name(GraphKind kind);

// Entropy threshold as a function of the observed marginal entropies:
//   Constant(c):            theta = c
//   ScaledMin(a):           theta = a * min(H(X), H(Y))
//   ScaledMinOffset(a, b):  theta = a * min(H(X), H(Y)) - b   (clamped at 0)
struct ThresholdRule {
  enum class Kind { Constant, ScaledMin, ScaledMinOffset };
  Kind kind = Kind::Constant;
  double a = 0.0;
  double b = 0.0;

  static ThresholdRule constant(double c);
  static ThresholdRule scaled_min(double a);
  static ThresholdRule scaled_min_offset(double a, double b);
  // "const:2", "min:0.8", "minoff:1:1".
  static ThresholdRule parse(const std::string& spec);
  std::string to_string() const;

  double evaluate(double hx_bits, double hy_bits) const;
};

double apply_threshold_rule(const ThresholdRule& rule, const Joint2& p);

struct InferGraphConfig {
  std::size_t k = 2;
  double theta = 0.0;
  double cmi_threshold = 0.001;
  int restarts = 40;
  std::vector<double> betas;
  SearchConfig search;  // beta/restarts fields are overridden per run
};

struct GraphVerdict {
  GraphKind graph = GraphKind::TriangleGraph;
  double h_min_bits = 0.0;  // +inf when no run reached the cmi threshold
  int qualifying_runs = 0;
  double theta_bits = 0.0;
  std::vector<TradeoffPoint> points;
};

// Runs the (beta x restart) sweep, pools the points whose final cmi is at or
// below cfg.cmi_threshold, and declares LatentGraph iff the smallest H(Z)
// among them is at or below theta.
GraphVerdict infer_graph(const Joint2& p, const InferGraphConfig& cfg, int workers = 1);

struct RankTestResult {
  bool passes = false;   // numeric rank <= k
  int numeric_rank = 0;
  double rel_tol = 0.0;
};

// Numeric rank of the joint matrix: singular values above
// rel_tol * sigma_max. rel_tol <= 0 selects the default max(m, n) * 1e-12.
// A joint that factors exactly through a k-state latent has rank at most k;
// a generic joint with a direct edge does not.
RankTestResult rank_test(const Joint2& p, std::size_t k, double rel_tol = -1.0);

std::string verdict_to_json(const GraphVerdict& verdict, const InferGraphConfig& cfg);

}  // namespace lsearch
