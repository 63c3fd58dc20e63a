#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "lsearch/prob.hpp"

// Iterative minimization of
//
//     L(q) = I(X;Y|Z) + beta * H(Z)
//
// over posteriors q(z|x,y), for a fixed observed joint p(x,y). One update:
// form the joint q(x,y,z) = q(z|x,y) p(x,y), take its marginals, and set
//
//     q'(z|x,y) = q(z|x) q(z|y) / q(z)^(1-beta) / N(x,y),
//
// with N(x,y) the per-cell normalizer. Fixed points of this map are the
// stationary points of L. Cells with p(x,y) = 0 contribute nothing to the
// loss and keep their previous value.

namespace lsearch {

struct SearchConfig {
  double beta = 0.0;             // entropy weight, >= 0
  int max_iters = 1000;
  double fixed_point_tol = 1e-10;  // stop when max |q' - q| drops below this
  int restarts = 40;
  std::uint64_t seed = 0;
};

struct TraceRecord {
  int iteration = 0;
  double loss_bits = 0.0;
  double cmi_bits = 0.0;
  double entropy_z_bits = 0.0;
  double max_abs_change = 0.0;  // against the previous iterate; 0 at iteration 0
};

struct SearchTrace {
  std::vector<TraceRecord> records;
  bool converged = false;
  int iterations_run = 0;
};

// One point on the entropy / conditional-dependence tradeoff, produced by a
// single (beta, restart) run.
struct TradeoffPoint {
  double beta = 0.0;
  int restart_id = 0;
  double entropy_z_bits = 0.0;
  double cmi_bits = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SearchResult {
  PosteriorQ q;
  SearchTrace trace;
};

// L(q) = I(X;Y|Z) + beta * H(Z), in bits, from the joint q(z|x,y) p(x,y).
double loss(const Joint2& p, const PosteriorQ& q, double beta);

// A single fixed-point update.
PosteriorQ latent_search_step(const Joint2& p, const PosteriorQ& q, double beta);

// Runs the fixed-point iteration from `init` (or a random posterior drawn
// from rng when absent) until the iterate change drops below
// cfg.fixed_point_tol or cfg.max_iters is reached. When record_trace is
// false only the final record is kept.
SearchResult latent_search(const Joint2& p, std::size_t k, const SearchConfig& cfg,
                           const std::optional<PosteriorQ>& init, std::mt19937_64& rng,
                           bool record_trace = true);

// Convenience overload seeding the init draw from cfg.seed.
SearchResult latent_search(const Joint2& p, std::size_t k, const SearchConfig& cfg);

// max |step(q) - q| over cells with p(x,y) > 0: how far q is from satisfying
// the stationarity condition.
double stationarity_residual(const Joint2& p, const PosteriorQ& q, double beta);

// One TradeoffPoint per (beta, restart) pair, sorted by beta then restart_id.
// Each run draws its init from a stream derived from (cfg.seed, beta index,
// restart), so the output is identical for any worker count.
std::vector<TradeoffPoint> frontier_sweep(const Joint2& p, std::size_t k,
                                          const std::vector<double>& betas,
                                          const SearchConfig& cfg, int workers = 1);

// Lower envelope of a tradeoff point cloud: points (sorted by entropy) whose
// cmi is below every point with smaller entropy. The envelope cmi values are
// non-increasing in entropy.
std::vector<TradeoffPoint> pareto_lower_envelope(std::vector<TradeoffPoint> points);

}  // namespace lsearch
