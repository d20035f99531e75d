#include "actgraph/payload.hpp"

#include <algorithm>
#include <set>

namespace actgraph {

std::vector<AggregatedEdge> aggregate_edges(const GraphView& view) {
  std::map<std::pair<NodeKey, NodeKey>, AggregatedEdge> pairs;
  for (const auto& e : view.edges) {
    if (!e.is_explicit()) continue;
    auto& agg = pairs[{e.source, e.target}];
    agg.source = e.source;
    agg.target = e.target;
    ++agg.weight;
    ++agg.events[e.relation.event_name];
  }
  std::vector<AggregatedEdge> out;
  out.reserve(pairs.size());
  for (auto& [_, agg] : pairs) out.push_back(std::move(agg));
  return out;
}

GraphView filter_view(const GraphView& view, const ViewFilter& filter) {
  if (filter.empty()) return view;
  const std::set<NodeKey> keys(filter.nodes.begin(), filter.nodes.end());
  const std::set<std::string> classes(filter.classes.begin(), filter.classes.end());
  auto matches = [&](const NodeKey& k) { return keys.count(k) || classes.count(k.cls); };

  GraphView out;
  std::set<NodeKey> kept;
  for (const auto& n : view.nodes)
    if (matches(n.key)) kept.insert(n.key);
  for (const auto& e : view.edges) {
    if (matches(e.source) || matches(e.target)) {
      out.edges.push_back(e);
      kept.insert(e.source);
      kept.insert(e.target);
    }
  }
  for (const auto& n : view.nodes)
    if (kept.count(n.key)) out.nodes.push_back(n);
  return out;
}

namespace payload {

Json window(TimeWindow w) { return {{"from", format_iso8601(w.from)}, {"to", format_iso8601(w.to)}}; }

Json node(const GraphNode& n) {
  Json j;
  j["key"] = to_string(n.key);
  j["name"] = n.key.name;
  j["class"] = n.key.cls;
  j["attributes"] = n.attributes;
  j["criticality"] = n.criticality;
  return j;
}

Json edge(const GraphEdge& e) {
  Json j;
  j["source"] = to_string(e.source);
  j["target"] = to_string(e.target);
  j["relation"] = to_string(e.relation.kind);
  if (e.is_explicit()) j["event_name"] = e.relation.event_name;
  if (e.timestamp) j["timestamp"] = format_iso8601(*e.timestamp);
  j["attributes"] = e.attributes;
  return j;
}

Json aggregated(const AggregatedEdge& e) {
  return {{"source", to_string(e.source)}, {"target", to_string(e.target)}, {"weight", e.weight}, {"events", e.events}};
}

Json view(const GraphView& v, TimeWindow w) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["window"] = window(w);
  j["nodes"] = Json::array();
  for (const auto& n : v.nodes) j["nodes"].push_back(node(n));
  j["edges"] = Json::array();
  for (const auto& e : aggregate_edges(v)) j["edges"].push_back(aggregated(e));
  j["implicit"] = Json::array();
  for (const auto& e : v.edges)
    if (!e.is_explicit()) j["implicit"].push_back(edge(e));
  j["counts"] = {{"nodes", v.nodes.size()}, {"explicit", v.explicit_count()}, {"implicit", v.implicit_count()}};
  return j;
}

Json request(std::string_view request_id, const RequestMatch& match) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["request_id"] = request_id;
  j["events"] = Json::array();
  for (const auto& e : match.events) j["events"].push_back(edge(e));
  j["nodes"] = Json::array();
  for (const auto& k : match.nodes) j["nodes"].push_back(to_string(k));
  return j;
}

Json distribution(const Distribution& d, std::span<const NodeKey> selection, TimeWindow w) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["window"] = window(w);
  j["selection"] = Json::array();
  for (const auto& k : selection) j["selection"].push_back(to_string(k));
  j["counts"] = d.counts;
  j["edge_count"] = d.edge_count;
  j["unknown_nodes"] = Json::array();
  for (const auto& k : d.unknown_nodes) j["unknown_nodes"].push_back(to_string(k));
  return j;
}

Json edge_weight(const NodeKey& source, const NodeKey& target, TimeWindow w, std::size_t weight) {
  return {{"schema_version", kSchemaVersion},
          {"window", window(w)},
          {"source", to_string(source)},
          {"target", to_string(target)},
          {"weight", weight}};
}

Json neighbors(const NodeKey& key, TimeWindow w, const std::set<NodeKey>& found) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["window"] = window(w);
  j["node"] = to_string(key);
  j["neighbors"] = Json::array();
  for (const auto& k : found) j["neighbors"].push_back(to_string(k));
  return j;
}

Json events_page(const std::vector<GraphEdge>& events, TimeWindow w, std::size_t offset, std::size_t limit) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["window"] = window(w);
  j["total"] = events.size();
  j["offset"] = offset;
  j["limit"] = limit;
  j["events"] = Json::array();
  const std::size_t end = std::min(events.size(), offset + limit);
  for (std::size_t i = offset; i < end; ++i) j["events"].push_back(edge(events[i]));
  return j;
}

Json ingest(const IngestReport& report, const BuildStats& stats) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["total_records"] = report.total_records;
  j["parsed"] = report.parsed;
  j["skipped"] = report.skipped;
  j["skip_reasons"] = report.skip_reasons;
  if (report.time_span)
    j["time_span"] = {{"first", format_iso8601(report.time_span->first)},
                      {"last", format_iso8601(report.time_span->second)}};
  j["explicit_added"] = stats.explicit_added;
  j["duplicate_events"] = stats.duplicate_events;
  j["implicit_added"] = stats.implicit_added;
  return j;
}

Json ranking(const coa::RankingResult& result, const std::vector<std::string>& annotators,
             const std::optional<coa::AgreementReport>& agreement) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["context"] = coa::to_string(result.context);
  j["annotator"] = result.annotator;
  j["annotators"] = annotators;
  auto scores = result.scores;
  std::stable_sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  j["scores"] = Json::array();
  for (const auto& s : scores)
    j["scores"].push_back({{"key", to_string(s.key)},
                           {"name", s.key.name},
                           {"class", s.key.cls},
                           {"process", s.process},
                           {"score", s.score}});
  if (agreement) {
    j["agreement"] = {{"kendall_w", agreement->kendall_w},
                      {"annotators", agreement->annotators},
                      {"items", agreement->items},
                      {"verdict", agreement->verdict == coa::Verdict::Strong ? "strong" : "weak"}};
  } else {
    j["agreement"] = nullptr;
  }
  return j;
}

}  // namespace payload
}  // namespace actgraph
