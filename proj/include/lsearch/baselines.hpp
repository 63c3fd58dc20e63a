#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "lsearch/prob.hpp"
#include "lsearch/search.hpp"

// Reference minimizers used to compare against the fixed-point iteration:
// projected gradient descent on the same loss, EM on a shared-latent mixture
// model, and non-negative matrix factorization under an entrywise l1 loss.

namespace lsearch {

struct BaselineConfig {
  double step_size = 0.001;
  int max_iters = 10000;
  std::uint64_t seed = 0;
  int nmf_inner_iters = 50;
};

// ---- projected gradient descent ------------------------------------------

// Gradient of loss() with respect to q(z|x,y), in bits:
//     p(x,y) * (ln(q(z|x,y) q(z)^(1-beta) / (q(z|x) q(z|y))) - beta) / ln 2.
// Marginals are floored at kMassFloor inside the logarithm. The constant
// per-cell shift (the normalization multiplier) is absorbed by the simplex
// projection.
std::vector<double> loss_gradient(const Joint2& p, const PosteriorQ& q, double beta);

struct GdResult {
  PosteriorQ q;
  SearchTrace trace;
  bool diverged = false;
};

// Descent with a constant step and exact Euclidean projection onto the
// simplex per cell. A run is flagged diverged when an iterate or gradient
// goes non-finite, or when the loss climbs more than kGdDivergeBits above
// the best value seen; the iterate then stops at the last finite point.
inline constexpr double kGdDivergeBits = 0.5;

GdResult gradient_descent_search(const Joint2& p, std::size_t k, double beta,
                                 const BaselineConfig& cfg, std::mt19937_64& rng,
                                 const std::optional<PosteriorQ>& init = std::nullopt);

// Euclidean projection of v onto the probability simplex (in place).
void project_to_simplex(double* v, std::size_t n);

// ---- EM on the shared-latent mixture --------------------------------------

struct PlsaFactors {
  Dist1 z_prior;
  std::vector<Dist1> x_given_z;  // one row per latent state
  std::vector<Dist1> y_given_z;
};

struct EmRecord {
  int iteration = 0;
  double log_likelihood_bits = 0.0;  // sum_xy p(x,y) log2 sum_z p(z)p(x|z)p(y|z)
  double cmi_bits = 0.0;             // diagnostics of the responsibility posterior
  double entropy_z_bits = 0.0;
};

struct EmResult {
  PlsaFactors factors;
  std::vector<EmRecord> trace;
};

// Factors implied by a posterior: marginalize q(z|x,y) p(x,y).
PlsaFactors plsa_from_posterior(const Joint2& p, const PosteriorQ& q);

// E-step responsibilities r(z|x,y) proportional to p(z)p(x|z)p(y|z).
PosteriorQ plsa_responsibilities(const PlsaFactors& factors, std::size_t m, std::size_t n);

PlsaFactors random_plsa_factors(std::size_t k, std::size_t m, std::size_t n,
                                std::mt19937_64& rng);

// EM iterations with the observed p(x,y) as data weights. The trace carries
// the weighted log-likelihood (non-decreasing) and the cmi / H(Z) of the
// responsibility posterior applied to p.
EmResult em_plsa(const Joint2& p, std::size_t k, const PlsaFactors& init, int iters);

// ---- l1 non-negative matrix factorization ---------------------------------

struct NmfResult {
  Eigen::MatrixXd u;  // m x k, column-stochastic after canonicalization
  Eigen::MatrixXd v;  // k x n
  double l1_residual = 0.0;
  std::vector<double> residual_per_outer;
};

// Alternating projected subgradient on sum |M - UV|: one factor is fixed
// while the other takes nmf_inner_iters subgradient steps (negative entries
// clipped), keeping the best iterate of each inner run. Step length is the
// Polyak ratio residual / |g|^2 (target value 0), so exact factorizations
// pull the residual toward zero.
NmfResult nmf_factorize(const Joint2& p, std::size_t k, const BaselineConfig& cfg,
                        std::mt19937_64& rng);

// Posterior implied by the factorization: q(z|x,y) proportional to
// U(x,z) V(z,y); cells where UV vanishes fall back to uniform. Diagnostics
// (cmi, H(Z)) of an NMF point are those of this posterior applied to p.
PosteriorQ nmf_implied_posterior(const Joint2& p, const Eigen::MatrixXd& u,
                                 const Eigen::MatrixXd& v);

// Rows for the shared comparison CSV. status: "converged", "not_converged",
// "diverged", or "completed" for fixed-budget methods.
struct ComparisonRow {
  std::string algorithm;
  double beta_or_k = 0.0;
  int restart_id = 0;
  int iteration = 0;
  double loss_bits = 0.0;
  double cmi_bits = 0.0;
  double entropy_z_bits = 0.0;
  std::string status = "completed";
};

void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows);

}  // namespace lsearch
