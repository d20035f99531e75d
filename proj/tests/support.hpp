#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>
#include <cstdint>
#include <string>

#include "actgraph/builder.hpp"
#include "actgraph/graph_store.hpp"
#include "actgraph/ingest.hpp"
#include "actgraph/ontology.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(ACTGRAPH_FIXTURES) / name; }
inline std::filesystem::path data_file(const std::string& name) { return std::filesystem::path(ACTGRAPH_DATA) / name; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline actgraph::Timestamp at(const char* iso) { return *actgraph::parse_iso8601(iso); }

inline actgraph::ActivityGraph booking_pair_graph() {
  auto loaded = actgraph::load_file(fixture("booking_pair.csv"), actgraph::InputFormat::Csv);
  actgraph::ActivityGraph g;
  actgraph::build_graph(loaded.events, actgraph::Catalog::builtin(), g);
  return g;
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           (tag + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "-" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace testing
