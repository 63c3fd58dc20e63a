#include "lsearch/causal.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "lsearch/io.hpp"

namespace lsearch {

const char* graph_kind_name(GraphKind kind) {
  return kind == GraphKind::LatentGraph ? "LatentGraph" : "TriangleGraph";
}

ThresholdRule ThresholdRule::constant(double c) { return {Kind::Constant, c, 0.0}; }
ThresholdRule ThresholdRule::scaled_min(double a) { return {Kind::ScaledMin, a, 0.0}; }
ThresholdRule ThresholdRule::scaled_min_offset(double a, double b) {
  return {Kind::ScaledMinOffset, a, b};
}

ThresholdRule ThresholdRule::parse(const std::string& spec) {
  const std::size_t c1 = spec.find(':');
  if (c1 == std::string::npos) {
    throw std::runtime_error("threshold rule '" + spec + "': expected const:c, min:a or minoff:a:b");
  }
  const std::string name = spec.substr(0, c1);
  const std::string rest = spec.substr(c1 + 1);
  try {
    if (name == "const") return constant(std::stod(rest));
    if (name == "min") return scaled_min(std::stod(rest));
    if (name == "minoff") {
      const std::size_t c2 = rest.find(':');
      if (c2 == std::string::npos) throw std::runtime_error("minoff needs two parameters");
      return scaled_min_offset(std::stod(rest.substr(0, c2)), std::stod(rest.substr(c2 + 1)));
    }
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("threshold rule '" + spec + "': bad number");
  }
  throw std::runtime_error("threshold rule '" + spec + "': unknown kind '" + name + "'");
}

std::string ThresholdRule::to_string() const {
  switch (kind) {
    case Kind::Constant:
      return "const:" + format_double_short(a);
    case Kind::ScaledMin:
      return "min:" + format_double_short(a);
    case Kind::ScaledMinOffset:
    default:
      return "minoff:" + format_double_short(a) + ":" + format_double_short(b);
  }
}

double ThresholdRule::evaluate(double hx_bits, double hy_bits) const {
  const double hmin = std::min(hx_bits, hy_bits);
  double theta = 0.0;
  switch (kind) {
    case Kind::Constant:
      theta = a;
      break;
    case Kind::ScaledMin:
      theta = a * hmin;
      break;
    case Kind::ScaledMinOffset:
      theta = a * hmin - b;
      break;
  }
  return theta > 0.0 ? theta : 0.0;
}

double apply_threshold_rule(const ThresholdRule& rule, const Joint2& p) {
  return rule.evaluate(entropy(p.marginal_x()), entropy(p.marginal_y()));
}

GraphVerdict infer_graph(const Joint2& p, const InferGraphConfig& cfg, int workers) {
  if (cfg.betas.empty()) throw std::invalid_argument("infer_graph: empty beta list");
  if (cfg.cmi_threshold < 0.0) throw std::invalid_argument("infer_graph: negative cmi threshold");
  SearchConfig sc = cfg.search;
  sc.restarts = cfg.restarts;

  GraphVerdict verdict;
  verdict.theta_bits = cfg.theta;
  verdict.points = frontier_sweep(p, cfg.k, cfg.betas, sc, workers);
  verdict.h_min_bits = std::numeric_limits<double>::infinity();
  for (const TradeoffPoint& pt : verdict.points) {
    if (pt.cmi_bits <= cfg.cmi_threshold) {
      ++verdict.qualifying_runs;
      if (pt.entropy_z_bits < verdict.h_min_bits) verdict.h_min_bits = pt.entropy_z_bits;
    }
  }
  verdict.graph = verdict.h_min_bits <= cfg.theta ? GraphKind::LatentGraph
                                                  : GraphKind::TriangleGraph;
  return verdict;
}

RankTestResult rank_test(const Joint2& p, std::size_t k, double rel_tol) {
  if (rel_tol <= 0.0) {
    rel_tol = static_cast<double>(std::max(p.rows(), p.cols())) * 1e-12;
  }
  if (rel_tol >= 1.0) throw std::invalid_argument("rank_test: rel_tol must be below 1");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.probs());
  const Eigen::VectorXd& sv = svd.singularValues();
  RankTestResult res;
  res.rel_tol = rel_tol;
  if (sv.size() == 0 || sv(0) <= 0.0) {
    res.numeric_rank = 0;
  } else {
    const double cutoff = rel_tol * sv(0);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > cutoff) ++res.numeric_rank;
    }
  }
  res.passes = res.numeric_rank <= static_cast<int>(k);
  return res;
}

std::string verdict_to_json(const GraphVerdict& verdict, const InferGraphConfig& cfg) {
  nlohmann::json j;
  j["graph"] = graph_kind_name(verdict.graph);
  if (std::isinf(verdict.h_min_bits)) {
    j["h_min_bits"] = nullptr;
  } else {
    j["h_min_bits"] = verdict.h_min_bits;
  }
  j["qualifying_runs"] = verdict.qualifying_runs;
  j["theta_bits"] = verdict.theta_bits;
  j["cmi_threshold_bits"] = cfg.cmi_threshold;
  j["k"] = cfg.k;
  j["restarts"] = cfg.restarts;
  j["seed"] = cfg.search.seed;
  return j.dump(2) + "\n";
}

}  // namespace lsearch
