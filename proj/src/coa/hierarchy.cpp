#include "actgraph/coa/hierarchy.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "actgraph/graph_store.hpp"

namespace actgraph::coa {

using nlohmann::json;

std::size_t Hierarchy::resource_count() const {
  std::size_t n = 0;
  for (const auto& p : processes)
    for (const auto& g : p.groups) n += g.members.size();
  return n;
}

void Hierarchy::validate() const {
  if (processes.empty()) throw HierarchyError("hierarchy has no business processes");
  std::set<std::string> process_names;
  std::set<NodeKey> seen;
  for (const auto& p : processes) {
    if (!process_names.insert(p.name).second) throw HierarchyError("duplicate business process " + p.name);
    if (p.groups.empty()) throw HierarchyError("business process " + p.name + " has no resources");
    std::set<std::string> classes;
    for (const auto& g : p.groups) {
      if (!classes.insert(g.cls).second)
        throw HierarchyError("process " + p.name + " has two groups of class " + g.cls);
      if (g.members.empty()) throw HierarchyError("empty group " + g.cls + " in process " + p.name);
      for (const auto& m : g.members) {
        if (m.cls != g.cls) throw HierarchyError(to_string(m) + " is not of group class " + g.cls);
        if (!seen.insert(m).second) throw HierarchyError(to_string(m) + " appears in more than one group");
      }
    }
  }
}

Hierarchy Hierarchy::parse(std::string_view text) {
  Hierarchy h;
  try {
    json doc = json::parse(text);
    h.root = doc.value("root", std::string("application"));
    for (const auto& p : doc.at("processes")) {
      BusinessProcess bp{p.at("name").get<std::string>(), {}};
      for (const auto& g : p.at("groups")) {
        ResourceGroup group{g.at("class").get<std::string>(), {}};
        for (const auto& m : g.at("members")) group.members.push_back({m.get<std::string>(), group.cls});
        bp.groups.push_back(std::move(group));
      }
      h.processes.push_back(std::move(bp));
    }
  } catch (const json::exception& e) {
    throw HierarchyError(std::string("malformed hierarchy document: ") + e.what());
  }
  h.validate();
  return h;
}

std::string Hierarchy::dump() const {
  nlohmann::ordered_json doc;
  doc["root"] = root;
  doc["processes"] = nlohmann::ordered_json::array();
  for (const auto& p : processes) {
    nlohmann::ordered_json pj;
    pj["name"] = p.name;
    pj["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : p.groups) {
      std::vector<std::string> names;
      for (const auto& m : g.members) names.push_back(m.name);
      pj["groups"].push_back({{"class", g.cls}, {"members", names}});
    }
    doc["processes"].push_back(std::move(pj));
  }
  return doc.dump(2) + "\n";
}

std::string_view to_string(Level level) {
  switch (level) {
    case Level::Process: return "process";
    case Level::Group: return "group";
    case Level::Resource: return "resource";
  }
  return "?";
}

std::string to_string(const SiblingSet& s) {
  switch (s.level) {
    case Level::Process: return "processes";
    case Level::Group: return "groups/" + s.process;
    case Level::Resource: return "resources/" + s.process + "/" + s.group;
  }
  return "?";
}

SiblingSet parse_sibling_set(std::string_view text) {
  if (text == "processes") return {Level::Process, {}, {}};
  if (text.starts_with("groups/")) return {Level::Group, std::string(text.substr(7)), {}};
  if (text.starts_with("resources/")) {
    auto rest = text.substr(10);
    // Class names contain no '/', so split at the last one.
    auto slash = rest.rfind('/');
    if (slash != std::string_view::npos)
      return {Level::Resource, std::string(rest.substr(0, slash)), std::string(rest.substr(slash + 1))};
  }
  throw HierarchyError("bad sibling set id: " + std::string(text));
}

std::vector<SiblingGroup> sibling_sets(const Hierarchy& h) {
  std::vector<SiblingGroup> out;
  SiblingGroup top{{Level::Process, {}, {}}, {}};
  for (const auto& p : h.processes) top.labels.push_back(p.name);
  out.push_back(std::move(top));
  for (const auto& p : h.processes) {
    SiblingGroup groups{{Level::Group, p.name, {}}, {}};
    for (const auto& g : p.groups) groups.labels.push_back(g.cls);
    out.push_back(std::move(groups));
  }
  for (const auto& p : h.processes)
    for (const auto& g : p.groups) {
      SiblingGroup res{{Level::Resource, p.name, g.cls}, {}};
      for (const auto& m : g.members) res.labels.push_back(m.name);
      out.push_back(std::move(res));
    }
  return out;
}

ProcessAssignment ProcessAssignment::parse(std::string_view text) {
  ProcessAssignment a;
  try {
    json doc = json::parse(text);
    for (const auto& p : doc.at("processes"))
      a.processes.emplace_back(p.at("name").get<std::string>(), p.at("resources").get<std::vector<std::string>>());
    if (doc.contains("ignore")) {
      for (const auto& name : doc.at("ignore")) a.ignore.insert(name.get<std::string>());
    }
  } catch (const json::exception& e) {
    throw HierarchyError(std::string("malformed process assignment: ") + e.what());
  }
  return a;
}

Hierarchy build_hierarchy(const ActivityGraph& graph, const Catalog& catalog, const ProcessAssignment& assignment,
                          std::string root) {
  GraphView all = graph.snapshot();
  std::vector<NodeKey> resources;
  for (const auto& n : all.nodes) {
    const OntologyClass* c = catalog.find_class(n.key.cls);
    if (c && c->kind == ClassKind::Resource) resources.push_back(n.key);
  }

  auto resolve = [&](const std::string& entry) -> NodeKey {
    if (auto key = parse_node_key(entry); key && catalog.find_class(key->cls)) {
      if (!graph.node(*key)) throw HierarchyError("assignment names unknown node " + entry);
      return *key;
    }
    std::vector<NodeKey> matches;
    for (const auto& k : resources)
      if (k.name == entry) matches.push_back(k);
    if (matches.empty()) throw HierarchyError("assignment names unknown resource " + entry);
    if (matches.size() > 1) throw HierarchyError("ambiguous resource name " + entry + "; use Class:name");
    return matches.front();
  };

  // Ignore entries may name resources absent from this graph.
  std::set<NodeKey> ignored;
  for (const auto& entry : assignment.ignore) {
    auto key = parse_node_key(entry);
    for (const auto& k : resources)
      if (key && catalog.find_class(key->cls) ? k == *key : k.name == entry) ignored.insert(k);
  }

  Hierarchy h;
  h.root = std::move(root);
  std::set<NodeKey> assigned;
  for (const auto& [process, entries] : assignment.processes) {
    BusinessProcess bp{process, {}};
    for (const auto& entry : entries) {
      NodeKey key = resolve(entry);
      if (catalog.kind_of(key.cls) != ClassKind::Resource)
        throw HierarchyError(entry + " is an IAM identity, not a resource");
      if (!assigned.insert(key).second) throw HierarchyError(entry + " is assigned to more than one process");
      auto it = std::find_if(bp.groups.begin(), bp.groups.end(), [&](const auto& g) { return g.cls == key.cls; });
      if (it == bp.groups.end()) it = bp.groups.insert(bp.groups.end(), ResourceGroup{key.cls, {}});
      it->members.push_back(std::move(key));
    }
    h.processes.push_back(std::move(bp));
  }

  std::vector<std::string> orphans;
  for (const auto& k : resources)
    if (!assigned.count(k) && !ignored.count(k)) orphans.push_back(to_string(k));
  if (!orphans.empty()) {
    std::string msg = "resources without a business process:";
    for (const auto& o : orphans) msg += " " + o;
    throw HierarchyError(msg);
  }
  h.validate();
  return h;
}

ComparisonCount comparison_count(const Hierarchy& h) {
  auto pairs = [](std::size_t s) { return s * (s - 1) / 2; };
  ComparisonCount c;
  for (const auto& sg : sibling_sets(h)) c.ahp += pairs(sg.labels.size());
  c.naive = pairs(h.resource_count());
  return c;
}

}  // namespace actgraph::coa
