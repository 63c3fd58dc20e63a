#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"
#include "lsearch/causal.hpp"
#include "lsearch/parallel.hpp"
#include "lsearch/synth.hpp"

using namespace lsearch;

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i)
    v.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  return v;
}

}  // namespace

TEST_CASE("threshold rule parsing and evaluation") {
  ThresholdRule c = ThresholdRule::parse("const:2");
  CHECK(c.evaluate(5.0, 3.0) == doctest::Approx(2.0));

  ThresholdRule s = ThresholdRule::parse("min:0.8");
  CHECK(s.evaluate(2.0, 3.0) == doctest::Approx(1.6));
  CHECK(s.evaluate(3.0, 2.0) == doctest::Approx(1.6));

  ThresholdRule o = ThresholdRule::parse("minoff:1:1");
  CHECK(o.evaluate(2.5, 3.0) == doctest::Approx(1.5));
  CHECK(o.evaluate(0.5, 0.5) == doctest::Approx(0.0));  // clamped at zero

  CHECK(ThresholdRule::parse("min:0.8").to_string() == "min:0.8");
  CHECK_THROWS(ThresholdRule::parse("bogus"));
  CHECK_THROWS(ThresholdRule::parse("min:"));
  CHECK_THROWS(ThresholdRule::parse("const"));
}

TEST_CASE("independent pair is declared latent with near-zero entropy") {
  std::mt19937_64 rng(307);
  Dist1 mx = sample_simplex(3, 1.0, rng);
  Dist1 my = sample_simplex(3, 1.0, rng);
  Eigen::MatrixXd mat(3, 3);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) mat(x, y) = mx[x] * my[y];
  Joint2 p(mat);

  InferGraphConfig cfg;
  cfg.k = 2;
  cfg.theta = 0.5;
  cfg.cmi_threshold = 1e-4;
  cfg.restarts = 5;
  cfg.betas = linspace(0.0, 0.1, 5);
  cfg.search.max_iters = 1000;
  cfg.search.seed = 7;
  GraphVerdict v = infer_graph(p, cfg);
  CHECK(v.graph == GraphKind::LatentGraph);
  CHECK(v.qualifying_runs > 0);
  CHECK(v.h_min_bits < 0.05);
  CHECK(v.points.size() == cfg.betas.size() * cfg.restarts);
}

TEST_CASE("latent mixtures qualify and generic triangles do not") {
  std::mt19937_64 rng_model = make_rng(311, 0);
  CausalModel latent = sample_latent_model(5, 5, 3, AlphaSpec{{1.0}}, rng_model);
  CausalModel triangle = sample_triangle_model(5, 5, 3, AlphaSpec{{1.0}}, rng_model);

  InferGraphConfig cfg;
  cfg.k = 3;
  cfg.cmi_threshold = 1e-4;
  cfg.restarts = 8;
  cfg.betas = linspace(0.0, 0.01, 6);
  cfg.search.max_iters = 2000;
  cfg.search.fixed_point_tol = 1e-11;
  cfg.search.seed = 11;
  cfg.theta = latent.true_entropy_z();

  GraphVerdict vl = infer_graph(latent.joint(), cfg, 1);
  CHECK(vl.graph == GraphKind::LatentGraph);
  CHECK(vl.qualifying_runs > 0);
  CHECK(vl.h_min_bits <= cfg.theta + 1e-9);

  // a full-rank 5x5 joint cannot reach conditional independence with k = 3,
  // so the qualifying set is empty and h_min is +inf
  cfg.theta = triangle.true_entropy_z();
  GraphVerdict vt = infer_graph(triangle.joint(), cfg, 1);
  CHECK(vt.graph == GraphKind::TriangleGraph);
  CHECK(vt.qualifying_runs == 0);
  CHECK(std::isinf(vt.h_min_bits));
}

TEST_CASE("verdicts do not depend on the worker count") {
  std::mt19937_64 rng(313);
  Dist1 flat = sample_simplex(16, 1.0, rng);
  Eigen::MatrixXd mat(4, 4);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) mat(x, y) = flat[x * 4 + y];
  Joint2 p(mat);

  InferGraphConfig cfg;
  cfg.k = 2;
  cfg.theta = 1.0;
  cfg.restarts = 4;
  cfg.betas = linspace(0.0, 0.02, 4);
  cfg.search.max_iters = 400;
  cfg.search.seed = 17;
  GraphVerdict a = infer_graph(p, cfg, 1);
  GraphVerdict b = infer_graph(p, cfg, 3);
  CHECK(a.graph == b.graph);
  CHECK(a.h_min_bits == b.h_min_bits);
  CHECK(a.qualifying_runs == b.qualifying_runs);
}

TEST_CASE("rank test separates exact mixtures from generic joints") {
  std::mt19937_64 rng_model = make_rng(317, 0);
  CausalModel latent = sample_latent_model(6, 6, 3, AlphaSpec{{1.0}}, rng_model);
  RankTestResult rl = rank_test(latent.joint(), 3);
  CHECK(rl.passes);
  CHECK(rl.numeric_rank == 3);

  CausalModel triangle = sample_triangle_model(5, 5, 3, AlphaSpec{{1.0}}, rng_model);
  RankTestResult rt = rank_test(triangle.joint(), 3);
  CHECK(!rt.passes);
  CHECK(rt.numeric_rank == 5);
}

TEST_CASE("verdict json carries the decision fields") {
  GraphVerdict v;
  v.graph = GraphKind::LatentGraph;
  v.h_min_bits = 0.25;
  v.qualifying_runs = 3;
  v.theta_bits = 0.8;
  InferGraphConfig cfg;
  cfg.k = 2;
  cfg.cmi_threshold = 0.001;
  cfg.betas = {0.0, 0.01};

  nlohmann::json j = nlohmann::json::parse(verdict_to_json(v, cfg));
  CHECK(j["graph"] == "LatentGraph");
  CHECK(j["h_min_bits"].get<double>() == doctest::Approx(0.25));
  CHECK(j["qualifying_runs"].get<int>() == 3);
  CHECK(j["theta_bits"].get<double>() == doctest::Approx(0.8));
  CHECK(j["k"].get<int>() == 2);

  // unreachable threshold: h_min serializes as null
  v.h_min_bits = std::numeric_limits<double>::infinity();
  v.qualifying_runs = 0;
  nlohmann::json j2 = nlohmann::json::parse(verdict_to_json(v, cfg));
  CHECK(j2["h_min_bits"].is_null());
}
