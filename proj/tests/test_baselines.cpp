#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lsearch/baselines.hpp"
#include "lsearch/parallel.hpp"
#include "lsearch/prob.hpp"
#include "lsearch/search.hpp"

using namespace lsearch;

namespace {

Joint2 random_joint(std::size_t m, std::size_t n, std::mt19937_64& rng) {
  Dist1 flat = sample_simplex(m * n, 1.0, rng);
  Eigen::MatrixXd mat(m, n);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < n; ++y) mat(x, y) = flat[x * n + y];
  return Joint2(mat);
}

// Interior posterior: every entry at least 1 / (2k), so log terms stay finite
// under small perturbations.
PosteriorQ interior_posterior(std::size_t k, std::size_t m, std::size_t n,
                              std::mt19937_64& rng) {
  PosteriorQ r = PosteriorQ::random(k, m, n, rng);
  std::vector<double> mixed(r.data());
  for (double& v : mixed) v = 0.5 * v + 0.5 / static_cast<double>(k);
  return PosteriorQ(k, m, n, std::move(mixed));
}

Joint2 ci_joint_2x3x3() {
  const double pz[2] = {0.4, 0.6};
  const double px[2][3] = {{0.7, 0.2, 0.1}, {0.1, 0.3, 0.6}};
  const double py[2][3] = {{0.5, 0.4, 0.1}, {0.2, 0.2, 0.6}};
  Eigen::MatrixXd mat(3, 3);
  mat.setZero();
  for (int z = 0; z < 2; ++z)
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) mat(x, y) += pz[z] * px[z][x] * py[z][y];
  return Joint2(mat);
}

}  // namespace

TEST_CASE("simplex projection hand cases") {
  {
    double v[3] = {2.0, 0.0, 0.0};
    project_to_simplex(v, 3);
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == doctest::Approx(0.0));
    CHECK(v[2] == doctest::Approx(0.0));
  }
  {
    double v[3] = {0.5, 0.5, 0.5};
    project_to_simplex(v, 3);
    for (double e : v) CHECK(e == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }
  {
    double v[3] = {1.0, 1.0, -1.0};
    project_to_simplex(v, 3);
    CHECK(v[0] == doctest::Approx(0.5));
    CHECK(v[1] == doctest::Approx(0.5));
    CHECK(v[2] == doctest::Approx(0.0));
  }
}

TEST_CASE("simplex projection satisfies the optimality conditions") {
  std::mt19937_64 rng(211);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> v(5), x(5);
    for (double& e : v) e = unif(rng);
    x = v;
    project_to_simplex(x.data(), 5);

    double sum = 0.0;
    for (double e : x) {
      CHECK(e >= 0.0);
      sum += e;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    // active coordinates share one multiplier tau; zeroed ones sit below it
    double tau = 0.0;
    int active = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      if (x[i] > 1e-12) {
        tau += v[i] - x[i];
        ++active;
      }
    }
    REQUIRE(active > 0);
    tau /= active;
    for (std::size_t i = 0; i < 5; ++i) {
      if (x[i] > 1e-12) {
        CHECK(v[i] - x[i] == doctest::Approx(tau).epsilon(1e-9));
      } else {
        CHECK(v[i] <= tau + 1e-9);
      }
    }

    // projection is invariant to a constant shift of the input
    std::vector<double> shifted(v);
    for (double& e : shifted) e += 0.75;
    project_to_simplex(shifted.data(), 5);
    for (std::size_t i = 0; i < 5; ++i)
      CHECK(shifted[i] == doctest::Approx(x[i]).epsilon(1e-9));
  }
}

TEST_CASE("loss gradient matches central differences along simplex directions") {
  std::mt19937_64 rng(223);
  const std::size_t k = 3, m = 3, n = 4;
  Joint2 p = random_joint(m, n, rng);
  const double h = 1e-6;
  for (double beta : {0.0, 0.5, 1.2}) {
    PosteriorQ q = interior_posterior(k, m, n, rng);
    std::vector<double> grad = loss_gradient(p, q, beta);
    for (int trial = 0; trial < 12; ++trial) {
      const std::size_t x = rng() % m, y = rng() % n;
      const std::size_t z1 = rng() % k;
      std::size_t z2 = rng() % k;
      if (z2 == z1) z2 = (z1 + 1) % k;
      const std::size_t i1 = (x * n + y) * k + z1;
      const std::size_t i2 = (x * n + y) * k + z2;

      std::vector<double> up(q.data()), dn(q.data());
      up[i1] += h;
      up[i2] -= h;
      dn[i1] -= h;
      dn[i2] += h;
      const double fd = (loss(p, PosteriorQ(k, m, n, std::move(up)), beta) -
                         loss(p, PosteriorQ(k, m, n, std::move(dn)), beta)) /
                        (2.0 * h);
      CHECK(grad[i1] - grad[i2] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("gradient descent reduces the loss at a small step") {
  std::mt19937_64 rng(227);
  Joint2 p = random_joint(4, 4, rng);
  BaselineConfig cfg;
  cfg.step_size = 0.001;
  cfg.max_iters = 500;
  GdResult res = gradient_descent_search(p, 2, 0.1, cfg, rng);
  CHECK(!res.diverged);
  REQUIRE(res.trace.records.size() > 10);
  CHECK(res.trace.records.back().loss_bits < res.trace.records.front().loss_bits);

  // deterministic restart from the same stream
  std::mt19937_64 rng2 = make_rng(227, 0);
  std::mt19937_64 rng3 = make_rng(227, 0);
  GdResult a = gradient_descent_search(p, 2, 0.1, cfg, rng2);
  GdResult b = gradient_descent_search(p, 2, 0.1, cfg, rng3);
  CHECK(a.trace.records.back().loss_bits == b.trace.records.back().loss_bits);
}

TEST_CASE("oversized steps trip the divergence flag") {
  std::mt19937_64 rng(229);
  Joint2 p = random_joint(5, 5, rng);
  BaselineConfig cfg;
  cfg.step_size = 50.0;
  cfg.max_iters = 200;
  GdResult res = gradient_descent_search(p, 3, 0.0, cfg, rng);
  CHECK(res.diverged);
  CHECK(res.trace.iterations_run < cfg.max_iters);
}

TEST_CASE("factor extraction inverts the mixture construction") {
  Joint2 p = ci_joint_2x3x3();
  const double pz[2] = {0.4, 0.6};
  const double px[2][3] = {{0.7, 0.2, 0.1}, {0.1, 0.3, 0.6}};
  const double py[2][3] = {{0.5, 0.4, 0.1}, {0.2, 0.2, 0.6}};

  // true posterior p(z|x,y) for the generating model
  std::vector<double> qdata(2 * 3 * 3);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      double cell[2], s = 0.0;
      for (int z = 0; z < 2; ++z) {
        cell[z] = pz[z] * px[z][x] * py[z][y];
        s += cell[z];
      }
      for (int z = 0; z < 2; ++z) qdata[(x * 3 + y) * 2 + z] = cell[z] / s;
    }
  PosteriorQ q(2, 3, 3, std::move(qdata));

  PlsaFactors f = plsa_from_posterior(p, q);
  for (int z = 0; z < 2; ++z) {
    CHECK(f.z_prior[z] == doctest::Approx(pz[z]).epsilon(1e-12));
    for (int x = 0; x < 3; ++x) CHECK(f.x_given_z[z][x] == doctest::Approx(px[z][x]).epsilon(1e-12));
    for (int y = 0; y < 3; ++y) CHECK(f.y_given_z[z][y] == doctest::Approx(py[z][y]).epsilon(1e-12));
  }

  // responsibilities of the recovered factors reproduce the posterior
  PosteriorQ r = plsa_responsibilities(f, 3, 3);
  for (std::size_t i = 0; i < r.data().size(); ++i)
    CHECK(r.data()[i] == doctest::Approx(q.data()[i]).epsilon(1e-12));
}

TEST_CASE("em likelihood is non-decreasing and fixes the exact model") {
  std::mt19937_64 rng(233);
  Joint2 p = random_joint(4, 4, rng);
  PlsaFactors init = random_plsa_factors(2, 4, 4, rng);
  EmResult res = em_plsa(p, 2, init, 120);
  REQUIRE(res.trace.size() > 1);
  for (std::size_t i = 1; i < res.trace.size(); ++i)
    CHECK(res.trace[i].log_likelihood_bits >= res.trace[i - 1].log_likelihood_bits - 1e-12);

  // starting at the generating factors of an exact mixture, EM stays put and
  // the likelihood equals -H(X,Y)
  Joint2 ci = ci_joint_2x3x3();
  const double pz[2] = {0.4, 0.6};
  const double px[2][3] = {{0.7, 0.2, 0.1}, {0.1, 0.3, 0.6}};
  const double py[2][3] = {{0.5, 0.4, 0.1}, {0.2, 0.2, 0.6}};
  std::vector<Dist1> xz, yz;
  for (int z = 0; z < 2; ++z) {
    xz.emplace_back(std::vector<double>(px[z], px[z] + 3));
    yz.emplace_back(std::vector<double>(py[z], py[z] + 3));
  }
  PlsaFactors exact{Dist1({pz[0], pz[1]}), std::move(xz), std::move(yz)};
  EmResult fixed = em_plsa(ci, 2, exact, 25);
  std::vector<double> flat;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) flat.push_back(ci(x, y));
  const double target = -entropy_bits(flat.data(), flat.size());
  CHECK(fixed.trace.front().log_likelihood_bits == doctest::Approx(target).epsilon(1e-12));
  CHECK(fixed.trace.back().log_likelihood_bits == doctest::Approx(target).epsilon(1e-12));
  CHECK(fixed.trace.back().cmi_bits == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("l1 factorization drives rank-one joints to small residual") {
  std::mt19937_64 rng(239);
  Dist1 mx = sample_simplex(3, 1.0, rng);
  Dist1 my = sample_simplex(4, 1.0, rng);
  Eigen::MatrixXd mat(3, 4);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 4; ++y) mat(x, y) = mx[x] * my[y];
  Joint2 p(mat);

  BaselineConfig cfg;
  cfg.max_iters = 60;
  cfg.nmf_inner_iters = 50;
  NmfResult res = nmf_factorize(p, 1, cfg, rng);
  CHECK(res.l1_residual < 1e-3);
  REQUIRE(!res.residual_per_outer.empty());
  for (std::size_t i = 1; i < res.residual_per_outer.size(); ++i)
    CHECK(res.residual_per_outer[i] <= res.residual_per_outer[i - 1] + 1e-12);

  // canonical form: columns of u are distributions
  for (int z = 0; z < res.u.cols(); ++z) {
    double s = 0.0;
    for (int x = 0; x < res.u.rows(); ++x) {
      CHECK(res.u(x, z) >= 0.0);
      s += res.u(x, z);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("implied factorization posterior is normalized with uniform fallback") {
  std::mt19937_64 rng(241);
  Joint2 p = random_joint(3, 3, rng);
  Eigen::MatrixXd u(3, 2), v(2, 3);
  u << 0.5, 0.0, 0.5, 0.0, 0.0, 1.0;
  v << 0.2, 0.3, 0.5, 0.0, 0.0, 0.0;  // second component dead: UV row 2 is zero
  PosteriorQ q = nmf_implied_posterior(p, u, v);
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y) {
      double s = 0.0;
      for (std::size_t z = 0; z < 2; ++z) s += q(z, x, y);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
  // cell (2, y): UV = u(2,0) v(0,y) + u(2,1) v(1,y) = 0 for all y -> uniform
  CHECK(q(0, 2, 0) == doctest::Approx(0.5));
  CHECK(q(1, 2, 1) == doctest::Approx(0.5));
}
