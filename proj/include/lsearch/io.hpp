#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsearch/prob.hpp"
#include "lsearch/search.hpp"

// File formats and small parsing helpers shared by the CLI and the tests.
// Doubles are written with %.17g so reruns with identical inputs produce
// byte-identical files.

namespace lsearch {

std::string format_double(double v);

// Shortest decimal string that parses back to the same double. For labels
// and config echoes where "0.8" beats "0.80000000000000004".
std::string format_double_short(double v);

// Joint2 as CSV: header row carries the Y-state labels (first cell blank),
// each following row starts with its X-state label.
Joint2 read_joint_csv(const std::string& path);
void write_joint_csv(const std::string& path, const Joint2& joint);

// Joint2 as JSON: {"labels_x": [...], "labels_y": [...], "probs": [[...]]}.
Joint2 read_joint_json(const std::string& path);
void write_joint_json(const std::string& path, const Joint2& joint);

// Dispatch on extension: .json goes through JSON, anything else through CSV.
Joint2 read_joint_any(const std::string& path);

void write_frontier_csv(const std::string& path, const std::vector<TradeoffPoint>& points);
void write_trace_csv(const std::string& path, const SearchTrace& trace);

// Inclusive linear grid: linspace(0, 0.025, 100) steps by 0.025/99.
std::vector<double> linspace(double start, double stop, std::size_t count);

// "start:stop:count" -> inclusive grid; a plain number -> singleton list.
std::vector<double> parse_beta_range(const std::string& spec);

// Comma-separated doubles, e.g. "1.0,0.5,0.2,0.1".
std::vector<double> parse_double_list(const std::string& spec);

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::string hash_file_hex(const std::string& path);
std::string hash_string_hex(const std::string& text);

struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string version;
  double duration_seconds = 0.0;
  std::vector<std::string> outputs;
};

void write_manifest(const std::string& path, const RunManifest& manifest);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace lsearch
