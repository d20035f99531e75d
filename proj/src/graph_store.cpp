#include "actgraph/graph_store.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

namespace actgraph {

using nlohmann::json;

namespace {

using NodeId = std::size_t;
using EdgeId = std::size_t;

struct StoredEdge {
  NodeId source;
  NodeId target;
  Relation relation;
  Attributes attributes;
  std::optional<Timestamp> timestamp;
};

using TimeKey = std::pair<Timestamp, std::string>;  // (timestamp, event_id)

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view s, std::size_t line) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) throw ImportError(line, "dangling escape");
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: throw ImportError(line, std::string("unknown escape \\") + s[i]);
    }
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    parts.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string cypher_string(std::string_view s) { return json(std::string(s)).dump(); }

std::string cypher_identifier(std::string_view s) {
  std::string out = "`";
  for (char c : s) {
    if (c == '`') out += '`';
    out += c;
  }
  return out + "`";
}

std::string cypher_props(const Attributes& attrs, const std::string& lead = {}) {
  std::string out = "{" + lead;
  bool first = lead.empty();
  for (const auto& [k, v] : attrs) {
    if (!first) out += ", ";
    first = false;
    out += cypher_identifier(k) + ": " + cypher_string(v);
  }
  return out + "}";
}

}  // namespace

struct ActivityGraph::State {
  std::vector<GraphNode> nodes;
  std::map<NodeKey, NodeId> node_index;
  std::vector<StoredEdge> edges;

  std::map<TimeKey, EdgeId> by_time;
  std::unordered_map<std::string, EdgeId> by_event_id;
  std::unordered_map<std::string, std::vector<EdgeId>> by_request;
  // Incident explicit edges per node, kept in TimeKey order.
  std::vector<std::vector<EdgeId>> explicit_by_node;
  std::vector<std::vector<EdgeId>> implicit_by_node;
  std::set<std::tuple<NodeId, RelationKind, NodeId>> implicit_set;

  TimeKey time_key(EdgeId id) const {
    const auto& e = edges[id];
    auto it = e.attributes.find(attr::kEventId);
    return {*e.timestamp, it == e.attributes.end() ? std::string() : it->second};
  }

  NodeId ensure_node(const NodeKey& key, const Attributes& attrs, UpsertStats& stats) {
    auto [it, inserted] = node_index.try_emplace(key, nodes.size());
    if (inserted) {
      nodes.push_back({key, {}, {}});
      explicit_by_node.emplace_back();
      implicit_by_node.emplace_back();
      ++stats.nodes_added;
    }
    auto& node_attrs = nodes[it->second].attributes;
    for (const auto& kv : attrs) node_attrs.insert(kv);
    return it->second;
  }

  void index_by_node(std::vector<EdgeId>& list, EdgeId id) {
    auto key = time_key(id);
    auto pos = std::upper_bound(list.begin(), list.end(), key,
                                [&](const TimeKey& k, EdgeId other) { return k < time_key(other); });
    list.insert(pos, id);
  }

  void add_explicit(StoredEdge edge, const std::string& event_id, UpsertStats& stats) {
    if (by_event_id.count(event_id)) {
      ++stats.explicit_duplicates;
      return;
    }
    EdgeId id = edges.size();
    edges.push_back(std::move(edge));
    const auto& e = edges.back();
    by_event_id.emplace(event_id, id);
    by_time.emplace(TimeKey{*e.timestamp, event_id}, id);
    if (auto it = e.attributes.find(attr::kRequestId); it != e.attributes.end())
      by_request[it->second].push_back(id);
    index_by_node(explicit_by_node[e.source], id);
    if (e.target != e.source) index_by_node(explicit_by_node[e.target], id);
    ++stats.explicit_added;
  }

  void add_implicit(StoredEdge edge, UpsertStats& stats) {
    if (!implicit_set.emplace(edge.source, edge.relation.kind, edge.target).second) return;
    EdgeId id = edges.size();
    edges.push_back(std::move(edge));
    implicit_by_node[edges.back().source].push_back(id);
    if (edges.back().target != edges.back().source) implicit_by_node[edges.back().target].push_back(id);
    ++stats.implicit_added;
  }

  GraphEdge materialize(EdgeId id) const {
    const auto& e = edges[id];
    return {nodes[e.source].key, nodes[e.target].key, e.relation, e.attributes, e.timestamp};
  }

  // Explicit edge ids in [from, to) for one node's incident list.
  template <typename F>
  void for_node_window(NodeId n, TimeWindow w, F&& f) const {
    const auto& list = explicit_by_node[n];
    auto lo = std::lower_bound(list.begin(), list.end(), w.from,
                               [&](EdgeId id, Timestamp t) { return *edges[id].timestamp < t; });
    for (auto it = lo; it != list.end() && *edges[*it].timestamp < w.to; ++it) f(*it);
  }

  std::optional<NodeId> find(const NodeKey& key) const {
    auto it = node_index.find(key);
    if (it == node_index.end()) return std::nullopt;
    return it->second;
  }

  GraphView view_of(std::vector<EdgeId> explicit_ids) const {
    std::set<NodeId> included;
    for (EdgeId id : explicit_ids) {
      included.insert(edges[id].source);
      included.insert(edges[id].target);
    }
    std::set<std::tuple<NodeKey, RelationKind, NodeKey>> seen;
    std::vector<EdgeId> implicit_ids;
    std::set<NodeId> context;
    for (NodeId n : included) {
      for (EdgeId id : implicit_by_node[n]) {
        const auto& e = edges[id];
        if (seen.emplace(nodes[e.source].key, e.relation.kind, nodes[e.target].key).second) {
          implicit_ids.push_back(id);
          context.insert(e.source);
          context.insert(e.target);
        }
      }
    }
    included.insert(context.begin(), context.end());

    GraphView view;
    for (NodeId n : included) view.nodes.push_back(nodes[n]);
    std::sort(view.nodes.begin(), view.nodes.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    for (EdgeId id : explicit_ids) view.edges.push_back(materialize(id));
    std::vector<GraphEdge> implicit_edges;
    for (EdgeId id : implicit_ids) implicit_edges.push_back(materialize(id));
    std::sort(implicit_edges.begin(), implicit_edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
      return std::tie(a.source, a.relation, a.target) < std::tie(b.source, b.relation, b.target);
    });
    view.edges.insert(view.edges.end(), implicit_edges.begin(), implicit_edges.end());
    return view;
  }
};

std::size_t GraphView::explicit_count() const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [](const GraphEdge& e) { return e.is_explicit(); }));
}

std::optional<ExportFormat> export_format_from_string(std::string_view name) {
  if (name == "edge-list") return ExportFormat::EdgeList;
  if (name == "graph-script") return ExportFormat::GraphScript;
  return std::nullopt;
}

ActivityGraph::ActivityGraph() : state_(std::make_unique<State>()) {}
ActivityGraph::~ActivityGraph() = default;
ActivityGraph::ActivityGraph(ActivityGraph&& other) noexcept : state_(std::move(other.state_)) {
  other.state_ = std::make_unique<State>();
}
ActivityGraph& ActivityGraph::operator=(ActivityGraph&& other) noexcept {
  if (this != &other) {
    std::unique_lock lock(mutex_);
    state_ = std::move(other.state_);
    other.state_ = std::make_unique<State>();
  }
  return *this;
}

void ActivityGraph::check_window(TimeWindow w) {
  if (!w.valid()) throw std::invalid_argument("time window has from > to");
}

UpsertStats ActivityGraph::upsert(std::span<const Triplet> triplets) {
  // Validate first so a bad batch leaves the graph untouched.
  for (const auto& t : triplets) {
    if (!t.is_explicit()) continue;
    auto it = t.attributes.find(attr::kEventId);
    if (it == t.attributes.end() || it->second.empty())
      throw std::invalid_argument("explicit triplet without event_id");
    if (!t.timestamp && !t.attributes.count(attr::kTimestamp))
      throw std::invalid_argument("explicit triplet without timestamp");
    if (!t.timestamp && !parse_iso8601(t.attributes.at(attr::kTimestamp)))
      throw std::invalid_argument("explicit triplet with unparseable timestamp");
  }

  std::unique_lock lock(mutex_);
  UpsertStats stats;
  auto& s = *state_;
  for (const auto& t : triplets) {
    StoredEdge edge;
    edge.source = s.ensure_node(t.source, t.source_attributes, stats);
    edge.target = s.ensure_node(t.target, t.target_attributes, stats);
    edge.relation = t.relation;
    if (t.is_explicit()) {
      edge.attributes = t.attributes;
      edge.timestamp = t.timestamp ? *t.timestamp : *parse_iso8601(t.attributes.at(attr::kTimestamp));
      edge.attributes[attr::kTimestamp] = format_iso8601(*edge.timestamp);
      std::string event_id = edge.attributes.at(attr::kEventId);
      s.add_explicit(std::move(edge), event_id, stats);
    } else {
      edge.relation.event_name.clear();
      s.add_implicit(std::move(edge), stats);
    }
  }
  return stats;
}

void ActivityGraph::set_criticality(const NodeKey& key, const std::string& context, double score) {
  if (!(score >= 0.0 && score <= 1.0)) throw std::invalid_argument("criticality score outside [0,1]");
  std::unique_lock lock(mutex_);
  auto id = state_->find(key);
  if (!id) throw std::out_of_range("unknown node " + to_string(key));
  state_->nodes[*id].criticality[context] = score;
}

GraphView ActivityGraph::window(TimeWindow w) const {
  check_window(w);
  std::shared_lock lock(mutex_);
  const auto& s = *state_;
  std::vector<EdgeId> ids;
  auto lo = s.by_time.lower_bound({w.from, std::string()});
  auto hi = s.by_time.lower_bound({w.to, std::string()});
  for (auto it = lo; it != hi; ++it) ids.push_back(it->second);
  return s.view_of(std::move(ids));
}

GraphView ActivityGraph::snapshot() const {
  std::shared_lock lock(mutex_);
  const auto& s = *state_;
  GraphView view;
  view.nodes = s.nodes;
  std::sort(view.nodes.begin(), view.nodes.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  for (const auto& [key, id] : s.by_time) view.edges.push_back(s.materialize(id));
  std::vector<GraphEdge> implicit_edges;
  for (EdgeId id = 0; id < s.edges.size(); ++id)
    if (!s.edges[id].timestamp) implicit_edges.push_back(s.materialize(id));
  std::sort(implicit_edges.begin(), implicit_edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.source, a.relation, a.target) < std::tie(b.source, b.relation, b.target);
  });
  view.edges.insert(view.edges.end(), implicit_edges.begin(), implicit_edges.end());
  return view;
}

RequestMatch ActivityGraph::find_request(std::string_view request_id) const {
  std::shared_lock lock(mutex_);
  const auto& s = *state_;
  RequestMatch match;
  auto it = s.by_request.find(std::string(request_id));
  if (it == s.by_request.end()) return match;
  std::vector<EdgeId> ids = it->second;
  std::sort(ids.begin(), ids.end(), [&](EdgeId a, EdgeId b) { return s.time_key(a) < s.time_key(b); });
  std::set<NodeKey> nodes;
  for (EdgeId id : ids) {
    match.events.push_back(s.materialize(id));
    nodes.insert(match.events.back().source);
    nodes.insert(match.events.back().target);
  }
  match.nodes.assign(nodes.begin(), nodes.end());
  return match;
}

Distribution ActivityGraph::event_distribution(std::span<const NodeKey> selection, TimeWindow w) const {
  check_window(w);
  std::shared_lock lock(mutex_);
  const auto& s = *state_;
  Distribution dist;
  std::set<EdgeId> counted;
  for (const auto& key : selection) {
    auto id = s.find(key);
    if (!id) {
      dist.unknown_nodes.push_back(key);
      continue;
    }
    s.for_node_window(*id, w, [&](EdgeId e) {
      if (counted.insert(e).second) ++dist.counts[s.edges[e].relation.event_name];
    });
  }
  dist.edge_count = counted.size();
  return dist;
}

std::size_t ActivityGraph::edge_weight(const NodeKey& source, const NodeKey& target, TimeWindow w) const {
  check_window(w);
  std::shared_lock lock(mutex_);
  const auto& s = *state_;
  auto src = s.find(source);
  auto tgt = s.find(target);
  if (!src || !tgt) return 0;
  std::size_t count = 0;
  s.for_node_window(*src, w, [&](EdgeId e) {
    if (s.edges[e].source == *src && s.edges[e].target == *tgt) ++count;
  });
  return count;
}

std::set<NodeKey> ActivityGraph::neighbors(const NodeKey& key, TimeWindow w) const {
  check_window(w);
  std::shared_lock lock(mutex_);
  const auto& s = *state_;
  std::set<NodeKey> out;
  auto id = s.find(key);
  if (!id) return out;
  s.for_node_window(*id, w, [&](EdgeId e) {
    const auto& edge = s.edges[e];
    NodeId other = edge.source == *id ? edge.target : edge.source;
    if (other != *id) out.insert(s.nodes[other].key);
  });
  return out;
}

std::vector<GraphEdge> ActivityGraph::events(std::span<const NodeKey> selection, TimeWindow w) const {
  check_window(w);
  std::shared_lock lock(mutex_);
  const auto& s = *state_;
  std::vector<EdgeId> ids;
  if (selection.empty()) {
    auto lo = s.by_time.lower_bound({w.from, std::string()});
    auto hi = s.by_time.lower_bound({w.to, std::string()});
    for (auto it = lo; it != hi; ++it) ids.push_back(it->second);
  } else {
    std::set<EdgeId> picked;
    for (const auto& key : selection)
      if (auto id = s.find(key)) s.for_node_window(*id, w, [&](EdgeId e) { picked.insert(e); });
    ids.assign(picked.begin(), picked.end());
    std::sort(ids.begin(), ids.end(), [&](EdgeId a, EdgeId b) { return s.time_key(a) < s.time_key(b); });
  }
  std::vector<GraphEdge> out;
  out.reserve(ids.size());
  for (EdgeId id : ids) out.push_back(s.materialize(id));
  return out;
}

std::optional<GraphNode> ActivityGraph::node(const NodeKey& key) const {
  std::shared_lock lock(mutex_);
  auto id = state_->find(key);
  if (!id) return std::nullopt;
  return state_->nodes[*id];
}

std::vector<NodeKey> ActivityGraph::nodes_named(std::string_view name) const {
  std::shared_lock lock(mutex_);
  std::vector<NodeKey> out;
  for (auto it = state_->node_index.lower_bound(NodeKey{std::string(name), std::string()});
       it != state_->node_index.end() && it->first.name == name; ++it)
    out.push_back(it->first);
  return out;
}

std::size_t ActivityGraph::node_count() const {
  std::shared_lock lock(mutex_);
  return state_->nodes.size();
}

std::size_t ActivityGraph::explicit_edge_count() const {
  std::shared_lock lock(mutex_);
  return state_->by_time.size();
}

std::size_t ActivityGraph::implicit_edge_count() const {
  std::shared_lock lock(mutex_);
  return state_->implicit_set.size();
}

std::optional<TimeWindow> ActivityGraph::time_span() const {
  std::shared_lock lock(mutex_);
  const auto& s = *state_;
  if (s.by_time.empty()) return std::nullopt;
  return TimeWindow{s.by_time.begin()->first.first, s.by_time.rbegin()->first.first + std::chrono::milliseconds{1}};
}

std::string ActivityGraph::export_document(ExportFormat format) const {
  GraphView all = snapshot();
  std::ostringstream out;
  if (format == ExportFormat::EdgeList) {
    out << "#actgraph-edge-list\tv1\tnodes=" << all.nodes.size() << "\tedges=" << all.edges.size() << '\n';
    out << "#N\tname\tclass\tattributes\tcriticality\t|\tE\tsource\tsource_class\trelation\tevent_name\ttarget"
           "\ttarget_class\tattributes\n";
    for (const auto& n : all.nodes) {
      json crit = json::object();
      for (const auto& [ctx, score] : n.criticality) crit[ctx] = score;
      out << "N\t" << escape_field(n.key.name) << '\t' << escape_field(n.key.cls) << '\t'
          << json(n.attributes).dump() << '\t' << crit.dump() << '\n';
    }
    for (const auto& e : all.edges) {
      out << "E\t" << escape_field(e.source.name) << '\t' << escape_field(e.source.cls) << '\t'
          << to_string(e.relation.kind) << '\t' << escape_field(e.relation.event_name) << '\t'
          << escape_field(e.target.name) << '\t' << escape_field(e.target.cls) << '\t'
          << json(e.attributes).dump() << '\n';
    }
    return out.str();
  }

  // Cypher-flavoured creation script.
  out << "// actgraph graph-script v1: " << all.nodes.size() << " nodes, " << all.edges.size() << " edges\n";
  for (const auto& n : all.nodes) {
    Attributes props = n.attributes;
    for (const auto& [ctx, score] : n.criticality) props["criticality_" + ctx] = json(score).dump();
    out << "MERGE (n:" << cypher_identifier(n.key.cls) << " {name: " << cypher_string(n.key.name) << "})";
    if (!props.empty()) out << " SET n += " << cypher_props(props);
    out << ";\n";
  }
  for (const auto& e : all.edges) {
    out << "MATCH (a:" << cypher_identifier(e.source.cls) << " {name: " << cypher_string(e.source.name)
        << "}), (b:" << cypher_identifier(e.target.cls) << " {name: " << cypher_string(e.target.name) << "}) ";
    if (e.is_explicit()) {
      out << "CREATE (a)-[:EVENT "
          << cypher_props(e.attributes, "event_name: " + cypher_string(e.relation.event_name)) << "]->(b);\n";
    } else {
      out << "MERGE (a)-[:" << to_string(e.relation.kind) << "]->(b);\n";
    }
  }
  return out.str();
}

ActivityGraph ActivityGraph::import_document(std::string_view document) {
  ActivityGraph graph;
  std::vector<Triplet> triplets;
  std::vector<std::pair<NodeKey, std::map<std::string, double>>> criticality;
  std::set<NodeKey> declared;
  std::map<NodeKey, Attributes> node_attrs;
  std::vector<NodeKey> node_order;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool saw_magic = false;
  while (pos < document.size()) {
    auto nl = document.find('\n', pos);
    std::string_view line = document.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? document.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (!line.starts_with("#actgraph-edge-list\tv1")) throw ImportError(line_no, "not an actgraph edge-list v1 document");
      saw_magic = true;
      continue;
    }
    if (line.empty() || line.front() == '#') continue;

    auto parts = split_tabs(line);
    auto parse_attrs = [&](std::string_view text) {
      try {
        return json::parse(text).get<Attributes>();
      } catch (const json::exception& e) {
        throw ImportError(line_no, std::string("bad attribute map: ") + e.what());
      }
    };
    if (parts[0] == "N") {
      if (parts.size() != 5) throw ImportError(line_no, "node line needs 5 fields");
      NodeKey key{unescape_field(parts[1], line_no), unescape_field(parts[2], line_no)};
      if (!declared.insert(key).second) throw ImportError(line_no, "duplicate node " + to_string(key));
      node_attrs[key] = parse_attrs(parts[3]);
      node_order.push_back(key);
      try {
        auto crit = json::parse(parts[4]).get<std::map<std::string, double>>();
        if (!crit.empty()) criticality.emplace_back(key, std::move(crit));
      } catch (const json::exception& e) {
        throw ImportError(line_no, std::string("bad criticality map: ") + e.what());
      }
    } else if (parts[0] == "E") {
      if (parts.size() != 8) throw ImportError(line_no, "edge line needs 8 fields");
      Triplet t;
      t.source = {unescape_field(parts[1], line_no), unescape_field(parts[2], line_no)};
      auto kind = relation_from_string(parts[3]);
      if (!kind) throw ImportError(line_no, "unknown relation " + std::string(parts[3]));
      t.relation = {*kind, unescape_field(parts[4], line_no)};
      t.target = {unescape_field(parts[5], line_no), unescape_field(parts[6], line_no)};
      if (!declared.count(t.source) || !declared.count(t.target))
        throw ImportError(line_no, "edge references an undeclared node");
      if (t.is_explicit()) {
        t.attributes = parse_attrs(parts[7]);
        auto ts = t.attributes.find(attr::kTimestamp);
        if (ts == t.attributes.end() || !parse_iso8601(ts->second))
          throw ImportError(line_no, "explicit edge without a valid timestamp");
        if (!t.attributes.count(attr::kEventId)) throw ImportError(line_no, "explicit edge without event_id");
        t.timestamp = parse_iso8601(ts->second);
      }
      triplets.push_back(std::move(t));
    } else {
      throw ImportError(line_no, "unknown record type '" + std::string(parts[0]) + "'");
    }
  }
  if (!saw_magic) throw ImportError(1, "empty document");

  // Nodes first, so isolated nodes survive and attributes are attached.
  UpsertStats ignored;
  for (const auto& key : node_order) graph.state_->ensure_node(key, node_attrs[key], ignored);
  graph.upsert(triplets);
  for (const auto& [key, crit] : criticality)
    for (const auto& [ctx, score] : crit) graph.set_criticality(key, ctx, score);
  return graph;
}

void ActivityGraph::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write graph " + path.string());
  out << export_document(ExportFormat::EdgeList);
  if (!out) throw std::runtime_error("write failed for graph " + path.string());
}

ActivityGraph ActivityGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read graph " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return import_document(buf.str());
}

std::string to_string(const NodeKey& key) { return key.cls + ":" + key.name; }

std::optional<NodeKey> parse_node_key(std::string_view text) {
  auto pos = text.find(':');
  if (pos == std::string_view::npos || pos == 0 || pos + 1 == text.size()) return std::nullopt;
  return NodeKey{std::string(text.substr(pos + 1)), std::string(text.substr(0, pos))};
}

std::string label(const Relation& relation) {
  return relation.kind == RelationKind::ExplicitEvent ? relation.event_name : std::string(to_string(relation.kind));
}

}  // namespace actgraph
