#include "actgraph/ontology.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace actgraph {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<RelationKind, std::string_view>, 8> kRelationNames{{
    {RelationKind::HasSubclass, "has_subclass"},
    {RelationKind::HasAssumed, "has_assumed"},
    {RelationKind::HasInvoke, "has_invoke"},
    {RelationKind::HasOwner, "has_owner"},
    {RelationKind::HasPolicy, "has_policy"},
    {RelationKind::HasRead, "has_read"},
    {RelationKind::HasWrite, "has_write"},
    {RelationKind::ExplicitEvent, "ExplicitEvent"},
}};

constexpr std::array<std::string_view, 7> kReadPrefixes{"Get", "List", "Query", "Scan", "BatchGet",
                                                         "Describe", "Head"};
constexpr std::array<std::string_view, 6> kWritePrefixes{"Put", "Update", "Delete", "BatchWrite",
                                                          "Create", "Copy"};

bool has_any_prefix(std::string_view name, const auto& prefixes) {
  return std::any_of(prefixes.begin(), prefixes.end(),
                     [&](std::string_view p) { return name.starts_with(p); });
}

ServiceMapping target_rule(std::string source, std::string_view cls, std::vector<std::string> name_from) {
  ServiceMapping m;
  m.subject = MappingSubject::Target;
  m.event_source_pattern = std::move(source);
  m.target_class = std::string(cls);
  m.name_from = std::move(name_from);
  return m;
}

ServiceMapping actor_rule(std::optional<std::string> user_agent, std::optional<std::string> identity,
                          std::string_view cls, std::vector<std::string> name_from, bool assumes_role) {
  ServiceMapping m;
  m.subject = MappingSubject::Actor;
  m.user_agent_pattern = std::move(user_agent);
  m.identity_type_pattern = std::move(identity);
  m.target_class = std::string(cls);
  m.name_from = std::move(name_from);
  m.assumes_role = assumes_role;
  return m;
}

bool mapping_matches(const ServiceMapping& m, std::string_view event_source, std::string_view user_agent,
                     std::string_view identity_type) {
  if (!glob_match(m.event_source_pattern, event_source)) return false;
  if (m.user_agent_pattern && !glob_match(*m.user_agent_pattern, user_agent)) return false;
  if (m.identity_type_pattern && !glob_match(*m.identity_type_pattern, identity_type)) return false;
  return true;
}

std::string_view kind_name(ClassKind k) { return k == ClassKind::IamIdentity ? "IamIdentity" : "Resource"; }

json mapping_to_json(const ServiceMapping& m) {
  json j;
  j["subject"] = m.subject == MappingSubject::Target ? "target" : "actor";
  j["event_source"] = m.event_source_pattern;
  j["user_agent"] = m.user_agent_pattern ? json(*m.user_agent_pattern) : json(nullptr);
  j["identity_type"] = m.identity_type_pattern ? json(*m.identity_type_pattern) : json(nullptr);
  j["class"] = m.target_class;
  j["name_from"] = m.name_from;
  j["assumes_role"] = m.assumes_role;
  return j;
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(RelationKind kind) {
  for (const auto& [k, name] : kRelationNames)
    if (k == kind) return name;
  return "?";
}

std::optional<RelationKind> relation_from_string(std::string_view text) {
  for (const auto& [k, name] : kRelationNames)
    if (name == text) return k;
  return std::nullopt;
}

bool ServiceMapping::is_catch_all() const {
  auto open = [](const std::optional<std::string>& p) { return !p || *p == "*"; };
  return event_source_pattern == "*" && open(user_agent_pattern) && open(identity_type_pattern);
}

bool glob_match(std::string_view pattern, std::string_view text) {
  // Iterative matcher with single-star backtracking.
  std::size_t p = 0, t = 0;
  std::size_t star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

Catalog::Catalog(int version, std::vector<OntologyClass> classes, std::vector<ServiceMapping> mappings)
    : version_(version), classes_(std::move(classes)), mappings_(std::move(mappings)) {
  validate();
}

void Catalog::validate() const {
  std::set<std::string, std::less<>> names;
  for (const auto& c : classes_) {
    if (c.name.empty()) throw CatalogError("ontology class with empty name");
    if (!names.insert(c.name).second) throw CatalogError("duplicate ontology class: " + c.name);
  }
  for (const auto& c : classes_) {
    if (!c.parent) {
      bool iam_root = c.name == cls::kIamRoot && c.kind == ClassKind::IamIdentity;
      bool res_root = c.name == cls::kResourceRoot && c.kind == ClassKind::Resource;
      if (!iam_root && !res_root) throw CatalogError("unexpected root class: " + c.name);
      continue;
    }
    const OntologyClass* parent = find_class(*c.parent);
    if (!parent) throw CatalogError("class " + c.name + " has unknown parent " + *c.parent);
    if (parent->kind != c.kind) throw CatalogError("class " + c.name + " kind differs from its parent");
    // Walk up; a cycle would never reach a root.
    const OntologyClass* cur = &c;
    for (std::size_t steps = 0; cur->parent; ++steps) {
      if (steps > classes_.size()) throw CatalogError("cycle in class tree at " + c.name);
      cur = find_class(*cur->parent);
    }
  }
  for (auto root : {cls::kIamRoot, cls::kResourceRoot})
    if (!find_class(root)) throw CatalogError("missing root class " + std::string(root));

  bool target_total = false, actor_total = false;
  for (const auto& m : mappings_) {
    if (!find_class(m.target_class)) throw CatalogError("mapping targets unknown class: " + m.target_class);
    if (m.is_catch_all()) (m.subject == MappingSubject::Target ? target_total : actor_total) = true;
  }
  if (!target_total || !actor_total)
    throw CatalogError("catalog needs a catch-all mapping for both targets and actors");
}

Catalog Catalog::builtin() {
  using K = ClassKind;
  std::vector<OntologyClass> classes{
      {std::string(cls::kIamRoot), std::nullopt, K::IamIdentity},
      {std::string(cls::kUser), std::string(cls::kIamRoot), K::IamIdentity},
      {std::string(cls::kRole), std::string(cls::kIamRoot), K::IamIdentity},
      {std::string(cls::kIamUser), std::string(cls::kIamRoot), K::IamIdentity},
      {std::string(cls::kPolicy), std::string(cls::kIamRoot), K::IamIdentity},
      {std::string(cls::kResourceRoot), std::nullopt, K::Resource},
      {std::string(cls::kCompute), std::string(cls::kResourceRoot), K::Resource},
      {std::string(cls::kStorage), std::string(cls::kResourceRoot), K::Resource},
      {std::string(cls::kAppIntegration), std::string(cls::kResourceRoot), K::Resource},
      {std::string(cls::kCspService), std::string(cls::kResourceRoot), K::Resource},
      {std::string(cls::kCspInternal), std::string(cls::kResourceRoot), K::Resource},
  };

  const std::string arn0 = "resources_0_ARN";
  std::vector<ServiceMapping> m{
      target_rule("dynamodb.amazonaws.com", cls::kStorage, {"requestParameters_tableName", arn0}),
      target_rule("s3.amazonaws.com", cls::kStorage, {"requestParameters_bucketName", arn0}),
      target_rule("lambda.amazonaws.com", cls::kCompute, {"requestParameters_functionName", arn0}),
      target_rule("states.amazonaws.com", cls::kAppIntegration, {"requestParameters_stateMachineArn", arn0}),
      target_rule("sqs.amazonaws.com", cls::kAppIntegration, {"requestParameters_queueUrl", arn0}),
      target_rule("sns.amazonaws.com", cls::kAppIntegration, {"requestParameters_topicArn", arn0}),
      target_rule("appsync.amazonaws.com", cls::kAppIntegration, {"requestParameters_apiId", arn0}),
      target_rule("events.amazonaws.com", cls::kAppIntegration, {"requestParameters_name", arn0}),
      target_rule("apigateway.amazonaws.com", cls::kAppIntegration, {arn0}),
      target_rule("*", cls::kCspService, {arn0, "event_source"}),

      actor_rule("*exec-env/AWS_Lambda*", std::nullopt, cls::kCompute,
                 {"principal_session", "identity_arn_name"}, true),
      actor_rule("states.amazonaws.com", std::nullopt, cls::kAppIntegration, {"principal_session"}, false),
      actor_rule("appsync.amazonaws.com", std::nullopt, cls::kAppIntegration, {"principal_session"}, false),
      actor_rule("apigateway.amazonaws.com", std::nullopt, cls::kAppIntegration, {"principal_session"}, false),
      actor_rule("events.amazonaws.com", std::nullopt, cls::kAppIntegration, {"principal_session"}, false),
      actor_rule("sns.amazonaws.com", std::nullopt, cls::kAppIntegration, {"principal_session"}, false),
      actor_rule("sqs.amazonaws.com", std::nullopt, cls::kAppIntegration, {"principal_session"}, false),
      actor_rule(std::nullopt, std::string("Root"), cls::kUser, {"principal_id", "identity_arn_name"}, false),
      actor_rule(std::nullopt, std::string("IAMUser"), cls::kIamUser, {"identity_arn_name", "principal_id"},
                 false),
      actor_rule(std::nullopt, std::string("AWSService"), cls::kCspInternal, {"user_agent"}, false),
      actor_rule(std::string(""), std::string(""), cls::kCspInternal, {}, false),
      actor_rule(std::nullopt, std::nullopt, cls::kCspService,
                 {"principal_session", "identity_arn_name", "principal_id", "user_agent"}, false),
  };
  return Catalog(1, std::move(classes), std::move(m));
}

Catalog Catalog::parse(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CatalogError(std::string("catalog parse error: ") + e.what());
  }
  try {
    std::vector<OntologyClass> classes;
    for (const auto& c : doc.at("classes")) {
      std::string kind = c.at("kind").get<std::string>();
      if (kind != "IamIdentity" && kind != "Resource") throw CatalogError("unknown class kind: " + kind);
      classes.push_back({c.at("name").get<std::string>(), optional_string(c, "parent"),
                         kind == "IamIdentity" ? ClassKind::IamIdentity : ClassKind::Resource});
    }
    std::vector<ServiceMapping> mappings;
    for (const auto& j : doc.at("mappings")) {
      ServiceMapping m;
      std::string subject = j.at("subject").get<std::string>();
      if (subject != "target" && subject != "actor") throw CatalogError("unknown mapping subject: " + subject);
      m.subject = subject == "target" ? MappingSubject::Target : MappingSubject::Actor;
      m.event_source_pattern = j.value("event_source", std::string("*"));
      m.user_agent_pattern = optional_string(j, "user_agent");
      m.identity_type_pattern = optional_string(j, "identity_type");
      m.target_class = j.at("class").get<std::string>();
      m.name_from = j.value("name_from", std::vector<std::string>{});
      m.assumes_role = j.value("assumes_role", false);
      mappings.push_back(std::move(m));
    }
    return Catalog(doc.value("version", 1), std::move(classes), std::move(mappings));
  } catch (const json::exception& e) {
    throw CatalogError(std::string("malformed catalog: ") + e.what());
  }
}

Catalog Catalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CatalogError("cannot read catalog " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Catalog::dump() const {
  json doc;
  doc["version"] = version_;
  doc["classes"] = json::array();
  for (const auto& c : classes_) {
    doc["classes"].push_back({{"name", c.name},
                              {"parent", c.parent ? json(*c.parent) : json(nullptr)},
                              {"kind", kind_name(c.kind)}});
  }
  doc["mappings"] = json::array();
  for (const auto& m : mappings_) doc["mappings"].push_back(mapping_to_json(m));
  return doc.dump(2) + "\n";
}

void Catalog::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw CatalogError("cannot write catalog " + path.string());
  out << dump();
}

MappingMatch Catalog::classify_target(std::string_view event_source) const {
  for (std::size_t i = 0; i < mappings_.size(); ++i) {
    const auto& m = mappings_[i];
    if (m.subject == MappingSubject::Target && glob_match(m.event_source_pattern, event_source))
      return {m.target_class, m.name_from, false, i};
  }
  // Unreachable: validate() guarantees a catch-all.
  return {std::string(cls::kCspService), {"event_source"}, false, mappings_.size()};
}

MappingMatch Catalog::classify_actor(std::string_view event_source, std::string_view user_agent,
                                     std::string_view identity_type) const {
  for (std::size_t i = 0; i < mappings_.size(); ++i) {
    const auto& m = mappings_[i];
    if (m.subject == MappingSubject::Actor && mapping_matches(m, event_source, user_agent, identity_type))
      return {m.target_class, m.name_from, m.assumes_role, i};
  }
  return {std::string(cls::kCspInternal), {}, false, mappings_.size()};
}

Classification Catalog::classify(std::string_view event_source, std::string_view user_agent,
                                 std::string_view identity_type) const {
  return {classify_actor(event_source, user_agent, identity_type), classify_target(event_source)};
}

Catalog Catalog::with_mapping(ServiceMapping mapping, std::size_t position) const {
  if (!find_class(mapping.target_class))
    throw CatalogError("mapping targets unknown class: " + mapping.target_class);
  auto mappings = mappings_;
  position = std::min(position, mappings.size());
  mappings.insert(mappings.begin() + static_cast<std::ptrdiff_t>(position), std::move(mapping));
  return Catalog(version_ + 1, classes_, std::move(mappings));
}

Catalog Catalog::with_class(OntologyClass c) const {
  auto classes = classes_;
  classes.push_back(std::move(c));
  return Catalog(version_ + 1, std::move(classes), mappings_);
}

const OntologyClass* Catalog::find_class(std::string_view name) const {
  auto it = std::find_if(classes_.begin(), classes_.end(), [&](const auto& c) { return c.name == name; });
  return it == classes_.end() ? nullptr : &*it;
}

ClassKind Catalog::kind_of(std::string_view class_name) const {
  const OntologyClass* c = find_class(class_name);
  if (!c) throw CatalogError("unknown class: " + std::string(class_name));
  return c->kind;
}

bool Catalog::is_a(std::string_view class_name, std::string_view ancestor) const {
  for (const OntologyClass* c = find_class(class_name); c; c = c->parent ? find_class(*c->parent) : nullptr)
    if (c->name == ancestor) return true;
  return false;
}

bool is_read_event(std::string_view event_name) { return has_any_prefix(event_name, kReadPrefixes); }

bool is_write_event(std::string_view event_name) {
  return !is_read_event(event_name) && has_any_prefix(event_name, kWritePrefixes);
}

bool is_invoke_event(std::string_view event_name) { return event_name.starts_with("Invoke"); }

}  // namespace actgraph
