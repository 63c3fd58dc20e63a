#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

// Discrete probability containers and the information-theoretic primitives
// built on them. Conventions used throughout the library:
//   - all entropies and mutual informations are in bits (log base 2),
//   - 0 * log(0) contributes 0,
//   - distributions must be non-negative and normalized within kSumTol,
//   - conditional distributions of zero-mass conditioning events are uniform.

namespace lsearch {

inline constexpr double kSumTol = 1e-9;       // normalization acceptance tolerance
inline constexpr double kNegEntryTol = 1e-12; // entries in [-kNegEntryTol, 0) clamp to 0
inline constexpr double kMassFloor = 1e-12;   // floor for marginals used in ratios

// Probability vector over a finite state space.
class Dist1 {
 public:
  explicit Dist1(std::vector<double> probs);
  static Dist1 uniform(std::size_t dim);
  static Dist1 point_mass(std::size_t dim, std::size_t state);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// Joint distribution over two observed variables X (rows) and Y (columns),
// with optional state labels used by file round-trips.
class Joint2 {
 public:
  explicit Joint2(Eigen::MatrixXd probs);
  Joint2(Eigen::MatrixXd probs, std::vector<std::string> labels_x,
         std::vector<std::string> labels_y);

  std::size_t rows() const { return static_cast<std::size_t>(probs_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(probs_.cols()); }
  double operator()(std::size_t x, std::size_t y) const {
    return probs_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
  }
  const Eigen::MatrixXd& probs() const { return probs_; }
  const std::vector<std::string>& labels_x() const { return labels_x_; }
  const std::vector<std::string>& labels_y() const { return labels_y_; }

  Dist1 marginal_x() const;
  Dist1 marginal_y() const;

 private:
  Eigen::MatrixXd probs_;
  std::vector<std::string> labels_x_;
  std::vector<std::string> labels_y_;
};

// Conditional distribution q(z | x, y): one point on the k-simplex per
// observed cell (x, y). Flat storage, index (x * n + y) * k + z.
class PosteriorQ {
 public:
  PosteriorQ(std::size_t k, std::size_t m, std::size_t n, std::vector<double> probs);
  static PosteriorQ uniform(std::size_t k, std::size_t m, std::size_t n);
  // Independent uniform-simplex draw per (x, y) cell.
  static PosteriorQ random(std::size_t k, std::size_t m, std::size_t n, std::mt19937_64& rng);

  std::size_t k() const { return k_; }
  std::size_t m() const { return m_; }
  std::size_t n() const { return n_; }
  double operator()(std::size_t z, std::size_t x, std::size_t y) const {
    return probs_[(x * n_ + y) * k_ + z];
  }
  const std::vector<double>& data() const { return probs_; }

  // Same posterior with latent states relabeled: entry z comes from perm[z].
  PosteriorQ permute_z(const std::vector<std::size_t>& perm) const;

 private:
  PosteriorQ(std::size_t k, std::size_t m, std::size_t n);  // uninitialized, internal
  std::size_t k_, m_, n_;
  std::vector<double> probs_;
};

// Joint distribution over (Z, X, Y). Same flat layout as PosteriorQ.
class Joint3 {
 public:
  Joint3(std::size_t k, std::size_t m, std::size_t n, std::vector<double> probs);

  std::size_t k() const { return k_; }
  std::size_t m() const { return m_; }
  std::size_t n() const { return n_; }
  double operator()(std::size_t z, std::size_t x, std::size_t y) const {
    return probs_[(x * n_ + y) * k_ + z];
  }
  const std::vector<double>& data() const { return probs_; }

  Dist1 marginal_z() const;
  Eigen::MatrixXd marginal_xy() const;

 private:
  std::size_t k_, m_, n_;
  std::vector<double> probs_;
};

// Marginals of a (Z, X, Y) joint in the form consumed by the fixed-point
// update, plus the per-cell normalizer N(x, y) = sum_z q(z|x) q(z|y) q(z)^(beta-1).
// Columns of z_given_x / z_given_y are distributions over Z; zero-mass
// columns are uniform. z is floored at kMassFloor and renormalized before
// being raised to the (beta - 1) power.
struct MarginalSet {
  Eigen::MatrixXd z_given_x;  // k x m
  Eigen::MatrixXd z_given_y;  // k x n
  Eigen::VectorXd z;          // k
  Eigen::MatrixXd normalizer; // m x n
};

double entropy(const Dist1& p);
double entropy_bits(const double* p, std::size_t n);

// I(X;Y) = H(X) + H(Y) - H(X,Y), clamped at 0 against rounding.
double mutual_information(const Joint2& p);

// I(X;Y|Z) by direct summation over the joint, clamped at 0.
double conditional_mutual_information(const Joint3& q);

// Dirichlet draw on the dim-simplex. The alpha vector is tiled cyclically
// when shorter than dim; a single entry means a symmetric Dirichlet.
Dist1 sample_simplex(std::size_t dim, const std::vector<double>& alpha, std::mt19937_64& rng);
Dist1 sample_simplex(std::size_t dim, double alpha, std::mt19937_64& rng);

// q(x, y, z) = q(z | x, y) * p(x, y).
Joint3 joint_from_posterior(const Joint2& p, const PosteriorQ& q);

MarginalSet marginal_set(const Joint3& joint, double beta);

}  // namespace lsearch
