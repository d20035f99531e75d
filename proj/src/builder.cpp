#include "actgraph/builder.hpp"

#include "actgraph/graph_store.hpp"

namespace actgraph {
namespace {

struct Endpoint {
  NodeKey key;
  Attributes attributes;
};

std::string lookup_column(const ApiEvent& e, std::string_view field) {
  if (field.starts_with(kRequestParamPrefix)) {
    auto it = e.request_parameters.find(std::string(field));
    return it == e.request_parameters.end() ? std::string() : it->second;
  }
  constexpr std::string_view res = "resources_";
  if (field.starts_with(res)) {
    auto rest = field.substr(res.size());
    auto sep = rest.find('_');
    if (sep == std::string_view::npos) return {};
    std::size_t n = 0;
    for (char c : rest.substr(0, sep)) {
      if (c < '0' || c > '9') return {};
      n = n * 10 + static_cast<std::size_t>(c - '0');
    }
    if (n >= e.resources.size()) return {};
    auto leaf = rest.substr(sep + 1);
    if (leaf == "ARN") return e.resources[n].arn;
    if (leaf == "type") return e.resources[n].type;
    return {};
  }
  if (field == "event_source") return e.event_source;
  if (field == "user_agent") return e.user_agent;
  if (field == "identity_type") return e.identity_type;
  if (field == "principal_id") return e.principal_id;
  if (field == "region") return e.region;
  if (field == "principal_session") {
    auto pos = e.principal_id.rfind(':');
    return pos == std::string::npos ? std::string() : e.principal_id.substr(pos + 1);
  }
  if (field == "identity_arn_name") {
    auto pos = e.identity_arn.rfind('/');
    if (pos != std::string::npos) return e.identity_arn.substr(pos + 1);
    pos = e.identity_arn.rfind(':');
    return pos == std::string::npos ? e.identity_arn : e.identity_arn.substr(pos + 1);
  }
  return {};
}

std::string name_from_rules(const ApiEvent& e, const std::vector<std::string>& rules) {
  for (const auto& rule : rules) {
    std::string name = resolve_name_field(e, rule);
    if (!name.empty()) return name;
  }
  return {};
}

Attributes explicit_attributes(const ApiEvent& e) {
  Attributes a;
  auto put = [&](const char* key, const std::string& value) {
    if (!value.empty()) a[key] = value;
  };
  put(attr::kEventId, e.event_id);
  put(attr::kRequestId, e.request_id);
  a[attr::kTimestamp] = format_iso8601(e.timestamp);
  put(attr::kRegion, e.region);
  put(attr::kUserAgent, e.user_agent);
  put(attr::kSourceIp, e.source_ip);
  put(attr::kErrorCode, e.error_code);
  put(attr::kEventSource, e.event_source);
  for (const auto& [k, v] : e.request_parameters) a[k] = v;
  return a;
}

Triplet implicit(const NodeKey& from, RelationKind kind, const NodeKey& to) {
  Triplet t;
  t.source = from;
  t.relation = {kind, {}};
  t.target = to;
  return t;
}

}  // namespace

std::string resource_tail(std::string_view value) {
  bool arn = value.starts_with("arn:");
  bool url = value.find("://") != std::string_view::npos;
  if (!arn && !url) return std::string(value);
  while (!value.empty() && (value.back() == '/' || value.back() == ':')) value.remove_suffix(1);
  auto pos = value.find_last_of(arn ? ":/" : "/");
  return std::string(pos == std::string_view::npos ? value : value.substr(pos + 1));
}

std::string resolve_name_field(const ApiEvent& event, std::string_view field) {
  return resource_tail(lookup_column(event, field));
}

std::string assumed_role_name(const ApiEvent& e) {
  constexpr std::string_view marker = ":assumed-role/";
  if (auto pos = e.identity_arn.find(marker); pos != std::string::npos) {
    auto rest = std::string_view(e.identity_arn).substr(pos + marker.size());
    auto slash = rest.find('/');
    return std::string(rest.substr(0, slash));
  }
  auto colon = e.principal_id.find(':');
  return e.principal_id.substr(0, colon);
}

std::vector<Triplet> map_event(const ApiEvent& e, const Catalog& catalog, const BuildOptions& options) {
  const Classification c = catalog.classify(e.event_source, e.user_agent, e.identity_type);

  Endpoint target;
  target.key = {name_from_rules(e, c.target.name_from), c.target.class_name};
  if (target.key.name.empty()) target.key = {e.event_source, std::string(cls::kCspInternal)};
  target.attributes["service"] = e.event_source;
  if (!e.resources.empty() && !e.resources[0].arn.empty()) target.attributes["arn"] = e.resources[0].arn;

  Endpoint actor;
  actor.key = {name_from_rules(e, c.actor.name_from), c.actor.class_name};
  if (actor.key.name.empty()) {
    actor.key = {"caller@" + e.event_source, std::string(cls::kCspInternal)};
  }
  if (!e.identity_type.empty()) actor.attributes["identity_type"] = e.identity_type;

  std::vector<Triplet> out;
  Triplet ev;
  ev.source = actor.key;
  ev.relation = {RelationKind::ExplicitEvent, e.event_name};
  ev.target = target.key;
  ev.attributes = explicit_attributes(e);
  ev.timestamp = e.timestamp;
  ev.source_attributes = actor.attributes;
  ev.target_attributes = target.attributes;
  out.push_back(std::move(ev));

  if (c.actor.assumes_role && e.identity_type == "AssumedRole") {
    std::string role = assumed_role_name(e);
    if (!role.empty()) {
      NodeKey role_key{role, std::string(cls::kRole)};
      out.push_back(implicit(actor.key, RelationKind::HasAssumed, role_key));
      out.push_back(implicit(role_key, RelationKind::HasPolicy, target.key));
    }
  }
  if (catalog.is_a(target.key.cls, cls::kStorage)) {
    if (is_write_event(e.event_name)) out.push_back(implicit(actor.key, RelationKind::HasWrite, target.key));
    else if (is_read_event(e.event_name)) out.push_back(implicit(actor.key, RelationKind::HasRead, target.key));
  }
  if (is_invoke_event(e.event_name) && catalog.is_a(target.key.cls, cls::kCompute) &&
      catalog.is_a(actor.key.cls, cls::kAppIntegration)) {
    out.push_back(implicit(actor.key, RelationKind::HasInvoke, target.key));
  }
  if (options.account_owner && !options.account_owner->empty()) {
    NodeKey owner{*options.account_owner, std::string(cls::kUser)};
    for (const NodeKey* k : {&actor.key, &target.key}) {
      const OntologyClass* oc = catalog.find_class(k->cls);
      if (oc && oc->kind == ClassKind::Resource) out.push_back(implicit(*k, RelationKind::HasOwner, owner));
    }
  }
  return out;
}

BuildStats build_graph(std::span<const ApiEvent> events, const Catalog& catalog, ActivityGraph& graph,
                       const BuildOptions& options) {
  BuildStats stats;
  std::vector<Triplet> batch;
  for (const auto& e : events) {
    auto triplets = map_event(e, catalog, options);
    batch.insert(batch.end(), std::make_move_iterator(triplets.begin()), std::make_move_iterator(triplets.end()));
    ++stats.events;
  }
  UpsertStats up = graph.upsert(batch);
  stats.explicit_added = up.explicit_added;
  stats.duplicate_events = up.explicit_duplicates;
  stats.implicit_added = up.implicit_added;
  return stats;
}

}  // namespace actgraph
