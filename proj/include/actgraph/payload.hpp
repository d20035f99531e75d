#pragma once

// Query views shaped for clients, and their JSON payloads. Every payload
// carries "schema_version".

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "actgraph/builder.hpp"
#include "actgraph/coa/kendall.hpp"
#include "actgraph/coa/ranking.hpp"
#include "actgraph/graph_store.hpp"
#include "actgraph/ingest.hpp"

namespace actgraph {

inline constexpr int kSchemaVersion = 1;

// Explicit events between one ordered pair, folded into a single edge whose
// weight is the event count (the dashboard's edge thickness).
struct AggregatedEdge {
  NodeKey source;
  NodeKey target;
  std::size_t weight = 0;
  std::map<std::string, std::size_t> events;  // event_name -> count

  friend bool operator==(const AggregatedEdge&, const AggregatedEdge&) = default;
};

std::vector<AggregatedEdge> aggregate_edges(const GraphView& view);

// Node and class filters of the graph endpoint. A node matches when its key
// is listed or its class is listed; the filtered view keeps edges touching a
// matching node and the endpoints of those edges.
struct ViewFilter {
  std::vector<NodeKey> nodes;
  std::vector<std::string> classes;

  bool empty() const { return nodes.empty() && classes.empty(); }
};

GraphView filter_view(const GraphView& view, const ViewFilter& filter);

namespace payload {

using Json = nlohmann::ordered_json;

Json window(TimeWindow w);
Json node(const GraphNode& n);
Json edge(const GraphEdge& e);
Json aggregated(const AggregatedEdge& e);

// {schema_version, window, nodes, edges (aggregated explicit), implicit, counts}
Json view(const GraphView& v, TimeWindow w);
Json request(std::string_view request_id, const RequestMatch& match);
Json distribution(const Distribution& d, std::span<const NodeKey> selection, TimeWindow w);
Json edge_weight(const NodeKey& source, const NodeKey& target, TimeWindow w, std::size_t weight);
Json neighbors(const NodeKey& key, TimeWindow w, const std::set<NodeKey>& found);
// One page of raw events: items [offset, offset + limit).
Json events_page(const std::vector<GraphEdge>& events, TimeWindow w, std::size_t offset, std::size_t limit);
Json ingest(const IngestReport& report, const BuildStats& stats);

// Scores ranked high to low, with Kendall's W across the contributing
// annotators when there are at least two.
Json ranking(const coa::RankingResult& result, const std::vector<std::string>& annotators,
             const std::optional<coa::AgreementReport>& agreement);

}  // namespace payload
}  // namespace actgraph
