#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "actgraph/graph_types.hpp"
#include "actgraph/time.hpp"

namespace actgraph {

class ImportError : public std::runtime_error {
 public:
  ImportError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct GraphNode {
  NodeKey key;
  Attributes attributes;
  std::map<std::string, double> criticality;  // CIA context -> score in [0,1]

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  NodeKey source;
  NodeKey target;
  Relation relation;
  Attributes attributes;
  std::optional<Timestamp> timestamp;  // present iff explicit

  bool is_explicit() const { return relation.kind == RelationKind::ExplicitEvent; }
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

// Immutable result of a query. Nodes sorted by key; explicit edges in
// (timestamp, event_id) order followed by implicit edges in key order.
struct GraphView {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;

  std::size_t explicit_count() const;
  std::size_t implicit_count() const { return edges.size() - explicit_count(); }
};

struct RequestMatch {
  std::vector<GraphEdge> events;  // timestamp order
  std::vector<NodeKey> nodes;     // endpoints, sorted
};

struct Distribution {
  std::map<std::string, std::size_t> counts;  // event_name -> count
  std::size_t edge_count = 0;
  std::vector<NodeKey> unknown_nodes;  // selection entries not in the graph
};

struct UpsertStats {
  std::size_t explicit_added = 0;
  std::size_t explicit_duplicates = 0;
  std::size_t implicit_added = 0;
  std::size_t nodes_added = 0;
};

enum class ExportFormat { EdgeList, GraphScript };

std::optional<ExportFormat> export_format_from_string(std::string_view name);

// In-process activity graph. Every logged event is its own explicit edge;
// implicit edges are unique per (source, relation, target) and timeless.
// Many readers, one writer: queries take a shared lock and return copies.
class ActivityGraph {
 public:
  ActivityGraph();
  ~ActivityGraph();
  ActivityGraph(ActivityGraph&& other) noexcept;
  ActivityGraph& operator=(ActivityGraph&& other) noexcept;
  ActivityGraph(const ActivityGraph&) = delete;
  ActivityGraph& operator=(const ActivityGraph&) = delete;

  // Explicit triplets are keyed by their event_id attribute; re-inserting an
  // event is a no-op. Throws std::invalid_argument for an explicit triplet
  // without event_id or timestamp.
  UpsertStats upsert(std::span<const Triplet> triplets);

  // Throws std::out_of_range for an unknown node, std::invalid_argument for a
  // score outside [0,1].
  void set_criticality(const NodeKey& key, const std::string& context, double score);

  // Explicit edges with from <= t < to, their endpoints, and the implicit
  // edges touching those endpoints (with the far endpoint). Throws
  // std::invalid_argument when from > to.
  GraphView window(TimeWindow w) const;
  GraphView snapshot() const;

  RequestMatch find_request(std::string_view request_id) const;

  // Counts explicit edges in the window incident to any selected node; each
  // edge counts once.
  Distribution event_distribution(std::span<const NodeKey> selection, TimeWindow w) const;

  // Explicit edges source -> target in the window.
  std::size_t edge_weight(const NodeKey& source, const NodeKey& target, TimeWindow w) const;

  // Nodes joined to `key` by an explicit edge (either direction) in the window.
  std::set<NodeKey> neighbors(const NodeKey& key, TimeWindow w) const;

  // Explicit edges in the window touching the selection (all when empty),
  // timestamp order.
  std::vector<GraphEdge> events(std::span<const NodeKey> selection, TimeWindow w) const;

  std::optional<GraphNode> node(const NodeKey& key) const;
  std::vector<NodeKey> nodes_named(std::string_view name) const;
  std::size_t node_count() const;
  std::size_t explicit_edge_count() const;
  std::size_t implicit_edge_count() const;

  // [earliest, latest + 1ms), or nullopt for a graph without events.
  std::optional<TimeWindow> time_span() const;

  std::string export_document(ExportFormat format) const;
  // Edge-list documents only.
  static ActivityGraph import_document(std::string_view document);

  void save(const std::filesystem::path& path) const;
  static ActivityGraph load(const std::filesystem::path& path);

 private:
  struct State;
  static void check_window(TimeWindow w);

  mutable std::shared_mutex mutex_;
  std::unique_ptr<State> state_;
};

}  // namespace actgraph
