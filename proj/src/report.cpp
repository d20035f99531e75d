#include "actgraph/report.hpp"

#include <algorithm>
#include <set>

namespace actgraph {

ReportDocument make_report(const ActivityGraph& graph, std::span<const NodeKey> selection, TimeWindow w,
                           Timestamp generated_at) {
  ReportDocument r;
  r.window = w;
  r.generated_at = generated_at;

  const GraphView whole = graph.window(w);
  if (selection.empty()) {
    for (const auto& n : whole.nodes) r.selection.push_back(n.key);
  } else {
    r.selection.assign(selection.begin(), selection.end());
  }

  r.events = graph.events(r.selection, w);
  r.distribution = graph.event_distribution(r.selection, w);

  std::set<NodeKey> keys;
  for (const auto& k : r.selection)
    if (graph.node(k)) keys.insert(k);
  for (const auto& e : r.events) {
    keys.insert(e.source);
    keys.insert(e.target);
  }
  for (const auto& n : whole.nodes)
    if (keys.count(n.key)) r.view.nodes.push_back(n);
  for (const auto& k : keys) {
    // Selected nodes without activity in the window are still shown.
    if (std::none_of(r.view.nodes.begin(), r.view.nodes.end(), [&](const GraphNode& n) { return n.key == k; }))
      r.view.nodes.push_back(*graph.node(k));
  }
  std::sort(r.view.nodes.begin(), r.view.nodes.end(), [](const auto& a, const auto& b) { return a.key < b.key; });

  r.view.edges = r.events;
  for (const auto& e : whole.edges)
    if (!e.is_explicit() && keys.count(e.source) && keys.count(e.target)) r.view.edges.push_back(e);
  r.edges = aggregate_edges(r.view);

  for (const auto& n : r.view.nodes)
    if (!n.criticality.empty()) r.criticality[n.key] = n.criticality;
  return r;
}

payload::Json report_json(const ReportDocument& r) {
  payload::Json j;
  j["schema_version"] = kSchemaVersion;
  j["generated_at"] = format_iso8601(r.generated_at);
  j["window"] = payload::window(r.window);
  j["selection"] = payload::Json::array();
  for (const auto& k : r.selection) j["selection"].push_back(to_string(k));
  j["nodes"] = payload::Json::array();
  for (const auto& n : r.view.nodes) j["nodes"].push_back(payload::node(n));
  j["edges"] = payload::Json::array();
  for (const auto& e : r.edges) j["edges"].push_back(payload::aggregated(e));
  j["implicit"] = payload::Json::array();
  for (const auto& e : r.view.edges)
    if (!e.is_explicit()) j["implicit"].push_back(payload::edge(e));
  j["events"] = payload::Json::array();
  for (const auto& e : r.events) j["events"].push_back(payload::edge(e));
  j["distribution"] = {{"counts", r.distribution.counts}, {"edge_count", r.distribution.edge_count}};
  j["criticality"] = payload::Json::object();
  for (const auto& [k, scores] : r.criticality) j["criticality"][to_string(k)] = scores;
  return j;
}

}  // namespace actgraph
