#include "lsearch/prob.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lsearch {

namespace {

// Validates entries, clamps rounding-scale negatives to zero and returns the
// sum. Throws when an entry is genuinely negative or non-finite.
double clean_entries(std::vector<double>& v, const char* what) {
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double e = v[i];
    if (!std::isfinite(e)) {
      throw std::invalid_argument(std::string(what) + ": non-finite entry at index " +
                                  std::to_string(i));
    }
    if (e < 0.0) {
      if (e < -kNegEntryTol) {
        throw std::invalid_argument(std::string(what) + ": negative entry " +
                                    std::to_string(e) + " at index " + std::to_string(i));
      }
      e = 0.0;
      v[i] = 0.0;
    }
    sum += e;
  }
  return sum;
}

void check_sum(double sum, const char* what) {
  if (std::abs(sum - 1.0) > kSumTol) {
    throw std::invalid_argument(std::string(what) + ": mass sums to " + std::to_string(sum) +
                                ", expected 1 within " + std::to_string(kSumTol));
  }
}

// Mass this close to 1 is left untouched. Dividing by it would only churn
// the last bits, and skipping the division keeps file round-trips bit-exact.
constexpr double kRenormSkipTol = 1e-12;

bool needs_renorm(double sum) { return std::abs(sum - 1.0) > kRenormSkipTol; }

}  // namespace

Dist1::Dist1(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("Dist1: empty support");
  double sum = clean_entries(probs_, "Dist1");
  check_sum(sum, "Dist1");
  if (needs_renorm(sum)) {
    for (double& e : probs_) e /= sum;
  }
}

Dist1 Dist1::uniform(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("Dist1::uniform: dim 0");
  return Dist1(std::vector<double>(dim, 1.0 / static_cast<double>(dim)));
}

Dist1 Dist1::point_mass(std::size_t dim, std::size_t state) {
  if (state >= dim) throw std::invalid_argument("Dist1::point_mass: state out of range");
  std::vector<double> v(dim, 0.0);
  v[state] = 1.0;
  return Dist1(std::move(v));
}

Joint2::Joint2(Eigen::MatrixXd probs) : Joint2(std::move(probs), {}, {}) {}

Joint2::Joint2(Eigen::MatrixXd probs, std::vector<std::string> labels_x,
               std::vector<std::string> labels_y)
    : probs_(std::move(probs)), labels_x_(std::move(labels_x)), labels_y_(std::move(labels_y)) {
  const std::size_t m = rows(), n = cols();
  if (m == 0 || n == 0) throw std::invalid_argument("Joint2: empty matrix");
  double sum = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      double e = probs_(x, y);
      if (!std::isfinite(e)) {
        throw std::invalid_argument("Joint2: non-finite entry at row " + std::to_string(x) +
                                    ", col " + std::to_string(y));
      }
      if (e < 0.0) {
        if (e < -kNegEntryTol) {
          throw std::invalid_argument("Joint2: negative entry " + std::to_string(e) +
                                      " at row " + std::to_string(x) + ", col " +
                                      std::to_string(y));
        }
        probs_(x, y) = 0.0;
        e = 0.0;
      }
      sum += e;
    }
  }
  check_sum(sum, "Joint2");
  if (needs_renorm(sum)) probs_ /= sum;
  if (labels_x_.empty()) {
    for (std::size_t x = 0; x < m; ++x) labels_x_.push_back("x" + std::to_string(x));
  }
  if (labels_y_.empty()) {
    for (std::size_t y = 0; y < n; ++y) labels_y_.push_back("y" + std::to_string(y));
  }
  if (labels_x_.size() != m) {
    throw std::invalid_argument("Joint2: " + std::to_string(labels_x_.size()) +
                                " row labels for " + std::to_string(m) + " rows");
  }
  if (labels_y_.size() != n) {
    throw std::invalid_argument("Joint2: " + std::to_string(labels_y_.size()) +
                                " column labels for " + std::to_string(n) + " columns");
  }
}

Dist1 Joint2::marginal_x() const {
  std::vector<double> v(rows());
  for (std::size_t x = 0; x < rows(); ++x) v[x] = probs_.row(x).sum();
  return Dist1(std::move(v));
}

Dist1 Joint2::marginal_y() const {
  std::vector<double> v(cols());
  for (std::size_t y = 0; y < cols(); ++y) v[y] = probs_.col(y).sum();
  return Dist1(std::move(v));
}

PosteriorQ::PosteriorQ(std::size_t k, std::size_t m, std::size_t n)
    : k_(k), m_(m), n_(n), probs_(k * m * n) {}

PosteriorQ::PosteriorQ(std::size_t k, std::size_t m, std::size_t n, std::vector<double> probs)
    : k_(k), m_(m), n_(n), probs_(std::move(probs)) {
  if (k_ == 0 || m_ == 0 || n_ == 0) throw std::invalid_argument("PosteriorQ: zero dimension");
  if (probs_.size() != k_ * m_ * n_) {
    throw std::invalid_argument("PosteriorQ: got " + std::to_string(probs_.size()) +
                                " entries, expected " + std::to_string(k_ * m_ * n_));
  }
  clean_entries(probs_, "PosteriorQ");
  for (std::size_t c = 0; c < m_ * n_; ++c) {
    double sum = 0.0;
    for (std::size_t z = 0; z < k_; ++z) sum += probs_[c * k_ + z];
    if (std::abs(sum - 1.0) > kSumTol) {
      throw std::invalid_argument("PosteriorQ: cell (" + std::to_string(c / n_) + ", " +
                                  std::to_string(c % n_) + ") sums to " + std::to_string(sum));
    }
    if (needs_renorm(sum)) {
      for (std::size_t z = 0; z < k_; ++z) probs_[c * k_ + z] /= sum;
    }
  }
}

PosteriorQ PosteriorQ::uniform(std::size_t k, std::size_t m, std::size_t n) {
  if (k == 0 || m == 0 || n == 0) throw std::invalid_argument("PosteriorQ::uniform: zero dim");
  PosteriorQ q(k, m, n);
  std::fill(q.probs_.begin(), q.probs_.end(), 1.0 / static_cast<double>(k));
  return q;
}

PosteriorQ PosteriorQ::random(std::size_t k, std::size_t m, std::size_t n,
                              std::mt19937_64& rng) {
  if (k == 0 || m == 0 || n == 0) throw std::invalid_argument("PosteriorQ::random: zero dim");
  PosteriorQ q(k, m, n);
  for (std::size_t c = 0; c < m * n; ++c) {
    Dist1 cell = sample_simplex(k, 1.0, rng);
    for (std::size_t z = 0; z < k; ++z) q.probs_[c * k + z] = cell[z];
  }
  return q;
}

PosteriorQ PosteriorQ::permute_z(const std::vector<std::size_t>& perm) const {
  if (perm.size() != k_) throw std::invalid_argument("PosteriorQ::permute_z: bad permutation");
  PosteriorQ out(k_, m_, n_);
  for (std::size_t c = 0; c < m_ * n_; ++c) {
    for (std::size_t z = 0; z < k_; ++z) out.probs_[c * k_ + z] = probs_[c * k_ + perm[z]];
  }
  return out;
}

Joint3::Joint3(std::size_t k, std::size_t m, std::size_t n, std::vector<double> probs)
    : k_(k), m_(m), n_(n), probs_(std::move(probs)) {
  if (k_ == 0 || m_ == 0 || n_ == 0) throw std::invalid_argument("Joint3: zero dimension");
  if (probs_.size() != k_ * m_ * n_) {
    throw std::invalid_argument("Joint3: got " + std::to_string(probs_.size()) +
                                " entries, expected " + std::to_string(k_ * m_ * n_));
  }
  double sum = clean_entries(probs_, "Joint3");
  check_sum(sum, "Joint3");
  if (needs_renorm(sum)) {
    for (double& e : probs_) e /= sum;
  }
}

Dist1 Joint3::marginal_z() const {
  std::vector<double> v(k_, 0.0);
  for (std::size_t c = 0; c < m_ * n_; ++c) {
    for (std::size_t z = 0; z < k_; ++z) v[z] += probs_[c * k_ + z];
  }
  return Dist1(std::move(v));
}

Eigen::MatrixXd Joint3::marginal_xy() const {
  Eigen::MatrixXd out(m_, n_);
  for (std::size_t x = 0; x < m_; ++x) {
    for (std::size_t y = 0; y < n_; ++y) {
      double s = 0.0;
      const double* cell = probs_.data() + (x * n_ + y) * k_;
      for (std::size_t z = 0; z < k_; ++z) s += cell[z];
      out(x, y) = s;
    }
  }
  return out;
}

double entropy_bits(const double* p, std::size_t n) {
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log2(p[i]);
  }
  return h;
}

double entropy(const Dist1& p) { return entropy_bits(p.probs().data(), p.size()); }

double mutual_information(const Joint2& p) {
  const Dist1 px = p.marginal_x();
  const Dist1 py = p.marginal_y();
  double hxy = 0.0;
  for (std::size_t x = 0; x < p.rows(); ++x) {
    for (std::size_t y = 0; y < p.cols(); ++y) {
      double e = p(x, y);
      if (e > 0.0) hxy -= e * std::log2(e);
    }
  }
  double mi = entropy(px) + entropy(py) - hxy;
  return mi > 0.0 ? mi : 0.0;
}

double conditional_mutual_information(const Joint3& q) {
  const std::size_t k = q.k(), m = q.m(), n = q.n();
  // I(X;Y|Z) = sum q(x,y,z) log2( q(x,y,z) q(z) / (q(x,z) q(y,z)) )
  std::vector<double> qz(k, 0.0), qxz(m * k, 0.0), qyz(n * k, 0.0);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t z = 0; z < k; ++z) {
        double e = q(z, x, y);
        qz[z] += e;
        qxz[x * k + z] += e;
        qyz[y * k + z] += e;
      }
    }
  }
  double cmi = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t z = 0; z < k; ++z) {
        double e = q(z, x, y);
        if (e > 0.0) {
          // Keep the ratio as two well-scaled quotients: e <= q(x,z) and
          // q(y,z) <= q(z), so neither division can underflow even when the
          // masses themselves are denormal. Forming e*qz/(qxz*qyz) directly
          // can hit 0/0 for near-collapsed posteriors.
          cmi += e * (std::log2(e / qxz[x * k + z]) + std::log2(qz[z] / qyz[y * k + z]));
        }
      }
    }
  }
  return cmi > 0.0 ? cmi : 0.0;
}

Dist1 sample_simplex(std::size_t dim, const std::vector<double>& alpha, std::mt19937_64& rng) {
  if (dim == 0) throw std::invalid_argument("sample_simplex: dim 0");
  if (alpha.empty()) throw std::invalid_argument("sample_simplex: empty alpha");
  for (double a : alpha) {
    if (!(a > 0.0)) throw std::invalid_argument("sample_simplex: alpha must be positive");
  }
  std::vector<double> v(dim);
  while (true) {
    double sum = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      std::gamma_distribution<double> gamma(alpha[i % alpha.size()], 1.0);
      v[i] = gamma(rng);
      sum += v[i];
    }
    if (sum > 0.0) {
      for (double& e : v) e /= sum;
      return Dist1(std::move(v));
    }
    // All draws underflowed (tiny alpha); redraw.
  }
}

Dist1 sample_simplex(std::size_t dim, double alpha, std::mt19937_64& rng) {
  return sample_simplex(dim, std::vector<double>{alpha}, rng);
}

Joint3 joint_from_posterior(const Joint2& p, const PosteriorQ& q) {
  if (q.m() != p.rows() || q.n() != p.cols()) {
    throw std::invalid_argument("joint_from_posterior: posterior is " + std::to_string(q.m()) +
                                "x" + std::to_string(q.n()) + ", joint is " +
                                std::to_string(p.rows()) + "x" + std::to_string(p.cols()));
  }
  const std::size_t k = q.k(), m = q.m(), n = q.n();
  std::vector<double> out(k * m * n);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const double pxy = p(x, y);
      const std::size_t base = (x * n + y) * k;
      for (std::size_t z = 0; z < k; ++z) out[base + z] = pxy * q.data()[base + z];
    }
  }
  return Joint3(k, m, n, std::move(out));
}

MarginalSet marginal_set(const Joint3& joint, double beta) {
  const std::size_t k = joint.k(), m = joint.m(), n = joint.n();
  MarginalSet ms;
  ms.z_given_x = Eigen::MatrixXd::Zero(k, m);
  ms.z_given_y = Eigen::MatrixXd::Zero(k, n);
  ms.z = Eigen::VectorXd::Zero(k);
  ms.normalizer = Eigen::MatrixXd::Zero(m, n);

  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t z = 0; z < k; ++z) {
        double e = joint(z, x, y);
        ms.z_given_x(z, x) += e;
        ms.z_given_y(z, y) += e;
        ms.z(z) += e;
      }
    }
  }
  // Column-normalize; zero-mass conditioning states fall back to uniform.
  for (std::size_t x = 0; x < m; ++x) {
    double s = ms.z_given_x.col(x).sum();
    if (s > 0.0) {
      ms.z_given_x.col(x) /= s;
    } else {
      ms.z_given_x.col(x).setConstant(1.0 / static_cast<double>(k));
    }
  }
  for (std::size_t y = 0; y < n; ++y) {
    double s = ms.z_given_y.col(y).sum();
    if (s > 0.0) {
      ms.z_given_y.col(y) /= s;
    } else {
      ms.z_given_y.col(y).setConstant(1.0 / static_cast<double>(k));
    }
  }
  // Floor before the (beta - 1) power so beta < 1 never divides by zero.
  for (std::size_t z = 0; z < k; ++z) {
    if (ms.z(z) < kMassFloor) ms.z(z) = kMassFloor;
  }
  ms.z /= ms.z.sum();

  std::vector<double> zpow(k);
  for (std::size_t z = 0; z < k; ++z) zpow[z] = std::pow(ms.z(z), beta - 1.0);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      double s = 0.0;
      for (std::size_t z = 0; z < k; ++z) {
        s += ms.z_given_x(z, x) * ms.z_given_y(z, y) * zpow[z];
      }
      ms.normalizer(x, y) = s;
    }
  }
  return ms;
}

}  // namespace lsearch
