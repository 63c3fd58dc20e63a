#include "lsearch/skeleton.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "lsearch/io.hpp"
#include "lsearch/parallel.hpp"

namespace lsearch {

namespace {

std::string clean_value(const std::string& raw) {
  std::size_t b = 0, e = raw.size();
  while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string v = raw.substr(b, e - b);
  for (char& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return v;
}

std::string trim_only(const std::string& raw) {
  std::size_t b = 0, e = raw.size();
  while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
  return raw.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, delim)) fields.push_back(field);
  if (!line.empty() && line.back() == delim) fields.emplace_back();
  return fields;
}

std::pair<std::string, std::string> canonical_pair(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

}  // namespace

std::size_t CategoricalTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < column_names.size(); ++i) {
    if (column_names[i] == name) return i;
  }
  throw std::runtime_error("unknown column '" + name + "'");
}

CategoricalTable load_table(const std::string& path, const std::vector<std::string>& columns,
                            const std::vector<std::string>& missing_tokens) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  for (const std::string& f : split_line(line, ',')) header.push_back(trim_only(f));

  std::vector<std::size_t> keep;
  if (columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) keep.push_back(i);
  } else {
    for (const std::string& want : columns) {
      const auto it = std::find(header.begin(), header.end(), want);
      if (it == header.end()) {
        throw std::runtime_error(path + ": no column named '" + want + "' in header");
      }
      keep.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }

  std::set<std::string> missing;
  for (const std::string& t : missing_tokens) missing.insert(clean_value(t));

  CategoricalTable table;
  for (std::size_t i : keep) table.column_names.push_back(header[i]);
  table.dictionaries.resize(keep.size());
  std::vector<std::map<std::string, std::size_t>> code_of(keep.size());

  std::size_t line_no = 1;
  std::vector<std::string> cleaned(keep.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_only(line).empty()) continue;
    const std::vector<std::string> fields = split_line(line, ',');
    if (fields.size() != header.size()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    }
    bool drop = false;
    for (std::size_t c = 0; c < keep.size(); ++c) {
      cleaned[c] = clean_value(fields[keep[c]]);
      if (missing.count(cleaned[c])) {
        drop = true;
        break;
      }
    }
    if (drop) continue;
    for (std::size_t c = 0; c < keep.size(); ++c) {
      auto [it, inserted] = code_of[c].try_emplace(cleaned[c], table.dictionaries[c].size());
      if (inserted) table.dictionaries[c].push_back(cleaned[c]);
      table.codes.push_back(it->second);
    }
    ++table.row_count;
  }
  if (table.row_count == 0) {
    throw std::runtime_error(path + ": no rows left after dropping missing values");
  }
  return table;
}

Joint2 estimate_joint(const CategoricalTable& t, const std::string& var_x,
                      const std::string& var_y, double smoothing_eps) {
  if (smoothing_eps < 0.0) throw std::invalid_argument("estimate_joint: negative smoothing");
  const std::size_t cx = t.column_index(var_x);
  const std::size_t cy = t.column_index(var_y);
  const std::size_t m = t.cardinality(cx);
  const std::size_t n = t.cardinality(cy);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(m),
                                                     static_cast<Eigen::Index>(n), smoothing_eps);
  for (std::size_t r = 0; r < t.row_count; ++r) {
    counts(static_cast<Eigen::Index>(t.code_at(r, cx)),
           static_cast<Eigen::Index>(t.code_at(r, cy))) += 1.0;
  }
  counts /= counts.sum();
  return Joint2(std::move(counts), t.dictionaries[cx], t.dictionaries[cy]);
}

PairScan pairwise_hmin(const Joint2& p, std::size_t k, const std::vector<double>& betas,
                       const SearchConfig& cfg, double cmi_threshold) {
  PairScan scan;
  scan.h_min_bits = std::numeric_limits<double>::infinity();
  scan.points = frontier_sweep(p, k, betas, cfg, 1);
  for (const TradeoffPoint& pt : scan.points) {
    if (pt.cmi_bits <= cmi_threshold) {
      ++scan.qualifying_runs;
      scan.h_min_bits = std::min(scan.h_min_bits, pt.entropy_z_bits);
    }
  }
  return scan;
}

KRule KRule::parse(const std::string& spec) {
  if (spec == "min") return min_card();
  if (spec.rfind("fixed:", 0) == 0) {
    try {
      const long k = std::stol(spec.substr(6));
      if (k <= 0) throw std::runtime_error("");
      return fixed(static_cast<std::size_t>(k));
    } catch (const std::exception&) {
      throw std::runtime_error("k rule '" + spec + "': fixed:K needs a positive integer");
    }
  }
  throw std::runtime_error("k rule '" + spec + "': expected min or fixed:K");
}

std::string KRule::to_string() const {
  return kind == Kind::MinCard ? "min" : "fixed:" + std::to_string(k);
}

std::size_t KRule::evaluate(std::size_t card_x, std::size_t card_y) const {
  return kind == Kind::MinCard ? std::min(card_x, card_y) : k;
}

Skeleton recover_skeleton(const CategoricalTable& t, const SkeletonConfig& cfg) {
  if (t.column_count() < 2) throw std::runtime_error("skeleton needs at least two columns");
  if (cfg.betas.empty()) throw std::runtime_error("skeleton: empty beta list");

  std::vector<std::string> vars = t.column_names;
  std::sort(vars.begin(), vars.end());

  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    for (std::size_t j = i + 1; j < vars.size(); ++j) pairs.emplace_back(vars[i], vars[j]);
  }

  std::vector<PairDiagnostics> diags(pairs.size());
  parallel_for(pairs.size(), cfg.workers, [&](std::size_t idx) {
    const auto& [name_x, name_y] = pairs[idx];
    const Joint2 p = estimate_joint(t, name_x, name_y, cfg.smoothing_eps);

    PairDiagnostics& d = diags[idx];
    d.var_x = name_x;
    d.var_y = name_y;
    d.card_x = p.rows();
    d.card_y = p.cols();
    d.k = cfg.k_rule.evaluate(d.card_x, d.card_y);
    d.entropy_x_bits = entropy(p.marginal_x());
    d.entropy_y_bits = entropy(p.marginal_y());
    d.betas_used = static_cast<int>(cfg.betas.size());
    d.cmi_threshold = cfg.cmi_threshold;

    SearchConfig scfg;
    scfg.max_iters = cfg.max_iters;
    scfg.fixed_point_tol = cfg.fixed_point_tol;
    scfg.restarts = cfg.restarts;
    scfg.seed = mix_seed(cfg.seed, fnv1a64(name_x.data(), name_x.size()),
                         fnv1a64(name_y.data(), name_y.size()));
    const PairScan scan = pairwise_hmin(p, d.k, cfg.betas, scfg, cfg.cmi_threshold);
    d.h_min_bits = scan.h_min_bits;
    d.qualifying_runs = scan.qualifying_runs;

    d.theta_bits = cfg.theta_rule.evaluate(d.entropy_x_bits, d.entropy_y_bits);
    d.edge_kept = d.h_min_bits >= d.theta_bits;
  });

  Skeleton s;
  s.variables = std::move(vars);
  s.pairs = std::move(diags);
  for (const PairDiagnostics& d : s.pairs) {
    if (d.edge_kept) s.edges.emplace_back(d.var_x, d.var_y);
  }
  return s;
}

void write_skeleton_dot(const std::string& path, const Skeleton& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "graph skeleton {\n";
  for (const std::string& v : s.variables) out << "  \"" << v << "\";\n";
  for (const auto& [a, b] : s.edges) out << "  \"" << a << "\" -- \"" << b << "\";\n";
  out << "}\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_skeleton_json(const std::string& path, const Skeleton& s) {
  nlohmann::json j;
  j["variables"] = s.variables;
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : s.edges) edges.push_back({a, b});
  j["edges"] = edges;
  nlohmann::json pairs = nlohmann::json::array();
  for (const PairDiagnostics& d : s.pairs) {
    nlohmann::json p;
    p["var_x"] = d.var_x;
    p["var_y"] = d.var_y;
    p["card_x"] = d.card_x;
    p["card_y"] = d.card_y;
    p["k"] = d.k;
    p["entropy_x_bits"] = d.entropy_x_bits;
    p["entropy_y_bits"] = d.entropy_y_bits;
    if (std::isinf(d.h_min_bits)) {
      p["h_min_bits"] = nullptr;
    } else {
      p["h_min_bits"] = d.h_min_bits;
    }
    p["theta_bits"] = d.theta_bits;
    p["edge_kept"] = d.edge_kept;
    p["qualifying_runs"] = d.qualifying_runs;
    p["betas_used"] = d.betas_used;
    p["cmi_threshold"] = d.cmi_threshold;
    pairs.push_back(std::move(p));
  }
  j["pairs"] = pairs;
  write_text_file(path, j.dump(2) + "\n");
}

void write_pairs_csv(const std::string& path, const Skeleton& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "var_x,var_y,card_x,card_y,k,entropy_x_bits,entropy_y_bits,h_min_bits,theta_bits,"
         "edge_kept,qualifying_runs\n";
  for (const PairDiagnostics& d : s.pairs) {
    out << d.var_x << ',' << d.var_y << ',' << d.card_x << ',' << d.card_y << ',' << d.k << ','
        << format_double(d.entropy_x_bits) << ',' << format_double(d.entropy_y_bits) << ','
        << (std::isinf(d.h_min_bits) ? "inf" : format_double(d.h_min_bits)) << ','
        << format_double(d.theta_bits) << ',' << (d.edge_kept ? 1 : 0) << ','
        << d.qualifying_runs << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::pair<std::string, std::string>> read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  std::vector<std::pair<std::string, std::string>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string body = trim_only(line);
    if (body.empty()) continue;
    const std::size_t dashes = body.find("--");
    std::string a, b;
    if (dashes != std::string::npos) {
      a = trim_only(body.substr(0, dashes));
      b = trim_only(body.substr(dashes + 2));
    } else {
      const std::size_t comma = body.find(',');
      if (comma == std::string::npos) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected 'a -- b' or 'a,b'");
      }
      a = trim_only(body.substr(0, comma));
      b = trim_only(body.substr(comma + 1));
    }
    if (a.empty() || b.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty endpoint");
    }
    edges.push_back(canonical_pair(a, b));
  }
  return edges;
}

EdgeDiff diff_edges(const Skeleton& s,
                    const std::vector<std::pair<std::string, std::string>>& fixture) {
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& e : s.edges) got.insert(canonical_pair(e.first, e.second));
  std::set<std::pair<std::string, std::string>> want(fixture.begin(), fixture.end());
  EdgeDiff diff;
  for (const auto& e : want) {
    if (!got.count(e)) diff.missing.push_back(e);
  }
  for (const auto& e : got) {
    if (!want.count(e)) diff.extra.push_back(e);
  }
  return diff;
}

std::string format_edge_diff(const EdgeDiff& diff) {
  if (diff.missing.empty() && diff.extra.empty()) return "edge sets match\n";
  std::string out;
  for (const auto& [a, b] : diff.missing) out += "missing: " + a + " -- " + b + "\n";
  for (const auto& [a, b] : diff.extra) out += "extra:   " + a + " -- " + b + "\n";
  return out;
}

}  // namespace lsearch
