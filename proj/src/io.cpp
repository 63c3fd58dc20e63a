#include "lsearch/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace lsearch {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double_field(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(context + ": cannot parse '" + s + "' as a number");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_double_short(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

Joint2 read_joint_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2) throw std::runtime_error(path + ": header has no Y labels");
  std::vector<std::string> labels_y(header.begin() + 1, header.end());

  std::vector<std::string> labels_x;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != labels_y.size() + 1) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(labels_y.size() + 1) + " fields, got " +
                               std::to_string(fields.size()));
    }
    labels_x.push_back(fields[0]);
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      row.push_back(parse_double_field(fields[i], path + ":" + std::to_string(lineno)));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  Eigen::MatrixXd probs(rows.size(), labels_y.size());
  for (std::size_t x = 0; x < rows.size(); ++x) {
    for (std::size_t y = 0; y < labels_y.size(); ++y) probs(x, y) = rows[x][y];
  }
  return Joint2(std::move(probs), std::move(labels_x), std::move(labels_y));
}

void write_joint_csv(const std::string& path, const Joint2& joint) {
  std::ostringstream out;
  for (std::size_t y = 0; y < joint.cols(); ++y) out << ',' << joint.labels_y()[y];
  out << '\n';
  for (std::size_t x = 0; x < joint.rows(); ++x) {
    out << joint.labels_x()[x];
    for (std::size_t y = 0; y < joint.cols(); ++y) out << ',' << format_double(joint(x, y));
    out << '\n';
  }
  write_text_file(path, out.str());
}

Joint2 read_joint_json(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (!j.contains("probs")) throw std::runtime_error(path + ": missing 'probs'");
  const auto& probs = j.at("probs");
  if (!probs.is_array() || probs.empty()) throw std::runtime_error(path + ": 'probs' must be a non-empty array");
  const std::size_t m = probs.size();
  const std::size_t n = probs.at(0).size();
  Eigen::MatrixXd mat(m, n);
  for (std::size_t x = 0; x < m; ++x) {
    if (probs.at(x).size() != n) {
      throw std::runtime_error(path + ": row " + std::to_string(x) + " has " +
                               std::to_string(probs.at(x).size()) + " entries, expected " +
                               std::to_string(n));
    }
    for (std::size_t y = 0; y < n; ++y) mat(x, y) = probs.at(x).at(y).get<double>();
  }
  std::vector<std::string> lx, ly;
  if (j.contains("labels_x")) lx = j.at("labels_x").get<std::vector<std::string>>();
  if (j.contains("labels_y")) ly = j.at("labels_y").get<std::vector<std::string>>();
  return Joint2(std::move(mat), std::move(lx), std::move(ly));
}

void write_joint_json(const std::string& path, const Joint2& joint) {
  json j;
  j["labels_x"] = joint.labels_x();
  j["labels_y"] = joint.labels_y();
  std::vector<std::vector<double>> probs(joint.rows(), std::vector<double>(joint.cols()));
  for (std::size_t x = 0; x < joint.rows(); ++x) {
    for (std::size_t y = 0; y < joint.cols(); ++y) probs[x][y] = joint(x, y);
  }
  j["probs"] = probs;
  write_text_file(path, j.dump(2) + "\n");
}

Joint2 read_joint_any(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return read_joint_json(path);
  return read_joint_csv(path);
}

void write_frontier_csv(const std::string& path, const std::vector<TradeoffPoint>& points) {
  std::ostringstream out;
  out << "beta,restart_id,entropy_z_bits,cmi_bits,iterations,converged\n";
  for (const TradeoffPoint& p : points) {
    out << format_double(p.beta) << ',' << p.restart_id << ',' << format_double(p.entropy_z_bits)
        << ',' << format_double(p.cmi_bits) << ',' << p.iterations << ','
        << (p.converged ? 1 : 0) << '\n';
  }
  write_text_file(path, out.str());
}

void write_trace_csv(const std::string& path, const SearchTrace& trace) {
  std::ostringstream out;
  out << "iteration,loss_bits,cmi_bits,entropy_z_bits,max_abs_change\n";
  for (const TraceRecord& r : trace.records) {
    out << r.iteration << ',' << format_double(r.loss_bits) << ',' << format_double(r.cmi_bits)
        << ',' << format_double(r.entropy_z_bits) << ',' << format_double(r.max_abs_change)
        << '\n';
  }
  write_text_file(path, out.str());
}

std::vector<double> linspace(double start, double stop, std::size_t count) {
  if (count == 0) throw std::invalid_argument("linspace: count must be positive");
  if (count == 1) return {start};
  std::vector<double> v(count);
  const double step = (stop - start) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) v[i] = start + step * static_cast<double>(i);
  v.back() = stop;
  return v;
}

std::vector<double> parse_beta_range(const std::string& spec) {
  const std::size_t c1 = spec.find(':');
  if (c1 == std::string::npos) {
    return {parse_double_field(spec, "beta spec '" + spec + "'")};
  }
  const std::size_t c2 = spec.find(':', c1 + 1);
  if (c2 == std::string::npos) {
    throw std::runtime_error("beta range '" + spec + "': expected start:stop:count");
  }
  const std::string ctx = "beta range '" + spec + "'";
  double start = parse_double_field(spec.substr(0, c1), ctx);
  double stop = parse_double_field(spec.substr(c1 + 1, c2 - c1 - 1), ctx);
  long count = std::strtol(spec.c_str() + c2 + 1, nullptr, 10);
  if (count <= 0) throw std::runtime_error(ctx + ": count must be a positive integer");
  if (count == 1 && start != stop) {
    throw std::runtime_error(ctx + ": count 1 needs start == stop");
  }
  return linspace(start, stop, static_cast<std::size_t>(count));
}

std::vector<double> parse_double_list(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_double_field(item, "list '" + spec + "'"));
  }
  if (out.empty()) throw std::runtime_error("list '" + spec + "': no values");
  return out;
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const unsigned char* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_string_hex(const std::string& text) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(text.data(), text.size())));
  return buf;
}

std::string hash_file_hex(const std::string& path) { return hash_string_hex(read_text_file(path)); }

void write_manifest(const std::string& path, const RunManifest& manifest) {
  json j;
  j["subcommand"] = manifest.subcommand;
  j["config_hash"] = manifest.config_hash;
  j["master_seed"] = manifest.master_seed;
  j["version"] = manifest.version;
  j["duration_seconds"] = manifest.duration_seconds;
  j["outputs"] = manifest.outputs;
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace lsearch
