#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "lsearch/parallel.hpp"
#include "lsearch/prob.hpp"

using namespace lsearch;

namespace {

// Reference entropy/information computations, written independently of the
// library code paths: plain loops over explicit 3d arrays.
double ref_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

double ref_cmi(const std::vector<double>& pxyz, std::size_t k, std::size_t m, std::size_t n) {
  std::vector<double> pz(k, 0.0);
  std::vector<double> pxz(m * k, 0.0), pyz(n * k, 0.0);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < k; ++z) {
        const double v = pxyz[(x * n + y) * k + z];
        pz[z] += v;
        pxz[x * k + z] += v;
        pyz[y * k + z] += v;
      }
  double cmi = 0.0;
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < k; ++z) {
        const double v = pxyz[(x * n + y) * k + z];
        if (v > 0.0) cmi += v * std::log2(pz[z] * v / (pxz[x * k + z] * pyz[y * k + z]));
      }
  return cmi;
}

Joint2 make_joint(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = rows.begin()->size();
  Eigen::MatrixXd mat(m, n);
  std::size_t x = 0;
  for (const auto& row : rows) {
    std::size_t y = 0;
    for (double v : row) mat(x, y++) = v;
    ++x;
  }
  return Joint2(mat);
}

}  // namespace

TEST_CASE("distribution validation") {
  CHECK_THROWS(Dist1({0.5, 0.6}));
  CHECK_THROWS(Dist1({1.5, -0.5}));
  CHECK_THROWS(Dist1({}));

  Dist1 ok({0.25, 0.75});
  CHECK(ok[0] == doctest::Approx(0.25));

  // entries in [-1e-12, 0) are rounding noise and clamp to zero
  Dist1 clamped({1.0 + 5e-13, -5e-13});
  CHECK(clamped[1] == 0.0);
  CHECK(clamped[0] == doctest::Approx(1.0).epsilon(1e-12));

  Dist1 u = Dist1::uniform(4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(0.25));
  Dist1 pm = Dist1::point_mass(3, 1);
  CHECK(pm[1] == 1.0);
  CHECK(pm[0] == 0.0);
}

TEST_CASE("entropy basics") {
  CHECK(entropy(Dist1::uniform(8)) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(entropy(Dist1::point_mass(5, 2)) == 0.0);
  CHECK(entropy(Dist1({0.5, 0.25, 0.25})) == doctest::Approx(1.5).epsilon(1e-12));

  const std::vector<double> raw{0.1, 0.2, 0.3, 0.4};
  CHECK(entropy_bits(raw.data(), raw.size()) == doctest::Approx(ref_entropy(raw)).epsilon(1e-12));
}

TEST_CASE("joint2 invariants and marginals") {
  CHECK_THROWS(make_joint({{0.6, 0.6}, {0.0, 0.0}}));

  Joint2 p = make_joint({{0.4, 0.1}, {0.1, 0.4}});
  Dist1 mx = p.marginal_x();
  CHECK(mx[0] == doctest::Approx(0.5));
  CHECK(mx[1] == doctest::Approx(0.5));

  // independent joint: MI is zero
  Joint2 ind = make_joint({{0.12, 0.28}, {0.18, 0.42}});
  CHECK(mutual_information(ind) == doctest::Approx(0.0).epsilon(1e-12));

  // perfectly coupled pair carries one full bit
  Joint2 diag = make_joint({{0.5, 0.0}, {0.0, 0.5}});
  CHECK(mutual_information(diag) == doctest::Approx(1.0).epsilon(1e-12));

  // cross-check against the defining formula on a non-trivial joint
  double hx = entropy(p.marginal_x());
  double hy = entropy(p.marginal_y());
  std::vector<double> flat{0.4, 0.1, 0.1, 0.4};
  CHECK(mutual_information(p) == doctest::Approx(hx + hy - ref_entropy(flat)).epsilon(1e-12));
}

TEST_CASE("posterior storage and permutation") {
  // cell (x, y) holds a distribution over z at stride 1
  PosteriorQ q(2, 2, 2, {0.3, 0.7, 0.2, 0.8, 0.9, 0.1, 0.5, 0.5});
  CHECK(q(0, 0, 0) == doctest::Approx(0.3));
  CHECK(q(1, 0, 0) == doctest::Approx(0.7));
  CHECK(q(0, 1, 1) == doctest::Approx(0.5));

  CHECK_THROWS(PosteriorQ(2, 2, 2, {0.3, 0.6, 0.2, 0.8, 0.9, 0.1, 0.5, 0.5}));

  PosteriorQ perm = q.permute_z({1, 0});
  CHECK(perm(0, 0, 0) == doctest::Approx(0.7));
  CHECK(perm(1, 0, 0) == doctest::Approx(0.3));
  PosteriorQ back = perm.permute_z({1, 0});
  for (std::size_t i = 0; i < back.data().size(); ++i) CHECK(back.data()[i] == q.data()[i]);

  std::mt19937_64 rng(7);
  PosteriorQ r = PosteriorQ::random(3, 4, 5, rng);
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t y = 0; y < 5; ++y) {
      double s = 0.0;
      for (std::size_t z = 0; z < 3; ++z) s += r(z, x, y);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("joint3 marginals against reference loops") {
  std::mt19937_64 rng(11);
  Dist1 flat = sample_simplex(2 * 3 * 4, 1.0, rng);
  Joint3 j(2, 3, 4, flat.probs());

  Dist1 mz = j.marginal_z();
  std::vector<double> ref_z(2, 0.0);
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t z = 0; z < 2; ++z) ref_z[z] += j(z, x, y);
  CHECK(mz[0] == doctest::Approx(ref_z[0]).epsilon(1e-12));
  CHECK(mz[1] == doctest::Approx(ref_z[1]).epsilon(1e-12));

  Eigen::MatrixXd mxy = j.marginal_xy();
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 4; ++y) {
      double s = 0.0;
      for (std::size_t z = 0; z < 2; ++z) s += j(z, x, y);
      CHECK(mxy(x, y) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("conditional mutual information against reference") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 5; ++rep) {
    Dist1 flat = sample_simplex(3 * 4 * 2, 1.0, rng);
    Joint3 j(3, 4, 2, flat.probs());
    CHECK(conditional_mutual_information(j) ==
          doctest::Approx(ref_cmi(flat.probs(), 3, 4, 2)).epsilon(1e-10));
  }

  // conditionally independent by construction: p(z) p(x|z) p(y|z)
  std::vector<double> ci(2 * 2 * 2, 0.0);
  const double pz[2] = {0.3, 0.7};
  const double px[2][2] = {{0.2, 0.8}, {0.6, 0.4}};
  const double py[2][2] = {{0.9, 0.1}, {0.5, 0.5}};
  for (std::size_t z = 0; z < 2; ++z)
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y) ci[(x * 2 + y) * 2 + z] = pz[z] * px[z][x] * py[z][y];
  Joint3 jci(2, 2, 2, ci);
  CHECK(conditional_mutual_information(jci) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("dirichlet sampling") {
  std::mt19937_64 rng(17);
  // alpha = (2, 1, 1): mean (0.5, 0.25, 0.25)
  const int reps = 20000;
  double mean[3] = {0, 0, 0};
  for (int i = 0; i < reps; ++i) {
    Dist1 d = sample_simplex(3, std::vector<double>{2.0, 1.0, 1.0}, rng);
    double s = 0.0;
    for (std::size_t z = 0; z < 3; ++z) {
      CHECK(d[z] >= 0.0);
      s += d[z];
      mean[z] += d[z] / reps;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(mean[0] == doctest::Approx(0.5).epsilon(0.02));
  CHECK(mean[1] == doctest::Approx(0.25).epsilon(0.03));
  CHECK(mean[2] == doctest::Approx(0.25).epsilon(0.03));

  // a short alpha vector tiles cyclically
  std::mt19937_64 rng2(19);
  double mean4[4] = {0, 0, 0, 0};
  for (int i = 0; i < reps; ++i) {
    Dist1 d = sample_simplex(4, std::vector<double>{1.0, 3.0}, rng2);
    for (std::size_t z = 0; z < 4; ++z) mean4[z] += d[z] / reps;
  }
  CHECK(mean4[0] == doctest::Approx(1.0 / 8).epsilon(0.05));
  CHECK(mean4[1] == doctest::Approx(3.0 / 8).epsilon(0.05));
  CHECK(mean4[3] == doctest::Approx(3.0 / 8).epsilon(0.05));
}

TEST_CASE("posterior to joint and marginal set") {
  std::mt19937_64 rng(23);
  Joint2 p = make_joint({{0.4, 0.1}, {0.1, 0.4}});
  PosteriorQ q = PosteriorQ::random(3, 2, 2, rng);
  Joint3 j = joint_from_posterior(p, q);

  double total = 0.0;
  for (double v : j.data()) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j(1, 0, 1) == doctest::Approx(q(1, 0, 1) * p(0, 1)).epsilon(1e-12));

  // uniform posterior: conditionals stay uniform and the update normalizer
  // is k^(-beta) in every cell
  PosteriorQ u = PosteriorQ::uniform(4, 2, 2);
  Joint3 ju = joint_from_posterior(p, u);
  for (double beta : {0.0, 0.3, 1.0}) {
    MarginalSet ms = marginal_set(ju, beta);
    CHECK(ms.z(0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(ms.z_given_x(2, 1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(ms.z_given_y(3, 0) == doctest::Approx(0.25).epsilon(1e-12));
    const double expected = std::pow(4.0, -beta);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        CHECK(ms.normalizer(x, y) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("zero-mass conditioning events fall back to uniform") {
  // x = 1 never occurs, so q(z | x=1) must come out uniform
  Eigen::MatrixXd mat(2, 2);
  mat << 0.5, 0.5, 0.0, 0.0;
  Joint2 p(mat);
  PosteriorQ q(2, 2, 2, {0.9, 0.1, 0.2, 0.8, 1.0, 0.0, 0.3, 0.7});
  Joint3 j = joint_from_posterior(p, q);
  MarginalSet ms = marginal_set(j, 0.5);
  CHECK(ms.z_given_x(0, 1) == doctest::Approx(0.5));
  CHECK(ms.z_given_x(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("seed mixing separates streams") {
  CHECK(mix_seed(1, 2, 3) != mix_seed(1, 3, 2));
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  CHECK(mix_seed(0, 0, 0) == mix_seed(0, 0, 0));
  std::mt19937_64 a = make_rng(5, 1);
  std::mt19937_64 b = make_rng(5, 1);
  CHECK(a() == b());
}
