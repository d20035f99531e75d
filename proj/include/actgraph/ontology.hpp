#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace actgraph {

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ClassKind { IamIdentity, Resource };

namespace cls {
inline constexpr std::string_view kIamRoot = "IAMIdentity";
inline constexpr std::string_view kResourceRoot = "Resource";
inline constexpr std::string_view kUser = "User";
inline constexpr std::string_view kRole = "Role";
inline constexpr std::string_view kIamUser = "IAMUser";
inline constexpr std::string_view kPolicy = "Policy";
inline constexpr std::string_view kCompute = "Compute";
inline constexpr std::string_view kStorage = "Storage";
inline constexpr std::string_view kAppIntegration = "ApplicationIntegration";
inline constexpr std::string_view kCspService = "CSPService";
inline constexpr std::string_view kCspInternal = "CSPInternal";
}  // namespace cls

struct OntologyClass {
  std::string name;
  std::optional<std::string> parent;  // has_subclass edge from parent
  ClassKind kind = ClassKind::Resource;

  friend bool operator==(const OntologyClass&, const OntologyClass&) = default;
};

enum class RelationKind {
  HasSubclass,
  HasAssumed,
  HasInvoke,
  HasOwner,
  HasPolicy,
  HasRead,
  HasWrite,
  ExplicitEvent,
};

std::string_view to_string(RelationKind kind);
std::optional<RelationKind> relation_from_string(std::string_view text);

// Which end of an API event a mapping classifies: the service receiving the
// call (eventSource) or the caller (userAgent / userIdentity).
enum class MappingSubject { Target, Actor };

// One ordered classification rule. Patterns are globs ('*' and '?'); an unset
// pattern matches anything, and the empty pattern "" matches only an empty
// field.
struct ServiceMapping {
  MappingSubject subject = MappingSubject::Target;
  std::string event_source_pattern = "*";
  std::optional<std::string> user_agent_pattern;
  std::optional<std::string> identity_type_pattern;
  std::string target_class;
  // Log fields tried in order to name the instance; see builder.hpp for the
  // pseudo-fields (principal_session, identity_arn_name, ...).
  std::vector<std::string> name_from;
  // Actor mappings only: whether an assumed-role identity yields Role context
  // edges. Integration services act under service-linked permissions.
  bool assumes_role = false;

  bool is_catch_all() const;
  friend bool operator==(const ServiceMapping&, const ServiceMapping&) = default;
};

struct MappingMatch {
  std::string class_name;
  std::vector<std::string> name_from;
  bool assumes_role = false;
  std::size_t rule_index = 0;
};

struct Classification {
  MappingMatch actor;
  MappingMatch target;
};

bool glob_match(std::string_view pattern, std::string_view text);

// Immutable ontology catalog: the two-rooted class tree plus the ordered
// mapping table. Mutation returns a new catalog.
class Catalog {
 public:
  Catalog(int version, std::vector<OntologyClass> classes, std::vector<ServiceMapping> mappings);

  static Catalog builtin();
  static Catalog parse(std::string_view json_text);
  static Catalog load(const std::filesystem::path& path);

  std::string dump() const;
  void save(const std::filesystem::path& path) const;

  // First matching rule wins, per subject.
  Classification classify(std::string_view event_source, std::string_view user_agent,
                          std::string_view identity_type) const;
  MappingMatch classify_target(std::string_view event_source) const;
  MappingMatch classify_actor(std::string_view event_source, std::string_view user_agent,
                              std::string_view identity_type) const;

  // Inserts at `position` (clamped to the end). Throws CatalogError when the
  // mapping names a class the catalog does not define.
  Catalog with_mapping(ServiceMapping mapping, std::size_t position) const;
  Catalog with_class(OntologyClass cls) const;

  const OntologyClass* find_class(std::string_view name) const;
  ClassKind kind_of(std::string_view class_name) const;
  bool is_a(std::string_view class_name, std::string_view ancestor) const;

  int version() const { return version_; }
  const std::vector<OntologyClass>& classes() const { return classes_; }
  const std::vector<ServiceMapping>& mappings() const { return mappings_; }

 private:
  void validate() const;

  int version_;
  std::vector<OntologyClass> classes_;
  std::vector<ServiceMapping> mappings_;
};

// Storage access predicates over CloudTrail verbs. Mutually exclusive.
bool is_read_event(std::string_view event_name);
bool is_write_event(std::string_view event_name);
bool is_invoke_event(std::string_view event_name);

}  // namespace actgraph
