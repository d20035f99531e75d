#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "actgraph/graph_store.hpp"
#include "actgraph/payload.hpp"

namespace actgraph {

// Snapshot of an investigation: the graph around a selection in a window,
// the raw events behind it, and their distribution. Events and distribution
// are computed over the same selection and window.
struct ReportDocument {
  TimeWindow window;
  std::vector<NodeKey> selection;  // effective selection
  GraphView view;
  std::vector<AggregatedEdge> edges;
  std::vector<GraphEdge> events;
  Distribution distribution;
  std::map<NodeKey, std::map<std::string, double>> criticality;
  Timestamp generated_at;
};

// An empty selection means every node in the window. Throws
// std::invalid_argument when from > to.
ReportDocument make_report(const ActivityGraph& graph, std::span<const NodeKey> selection, TimeWindow w,
                           Timestamp generated_at);

payload::Json report_json(const ReportDocument& report);

}  // namespace actgraph
