#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "actgraph/ontology.hpp"
#include "actgraph/time.hpp"

namespace actgraph {

using Attributes = std::map<std::string, std::string>;

// Node identity: instance name plus ontology class.
struct NodeKey {
  std::string name;
  std::string cls;

  friend auto operator<=>(const NodeKey&, const NodeKey&) = default;
  friend bool operator==(const NodeKey&, const NodeKey&) = default;
};

// "Class:name". Parsing splits at the first ':'; class names never contain one.
std::string to_string(const NodeKey& key);
std::optional<NodeKey> parse_node_key(std::string_view text);

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const noexcept {
    return std::hash<std::string>{}(k.name) * 31u ^ std::hash<std::string>{}(k.cls);
  }
};

struct Relation {
  RelationKind kind = RelationKind::ExplicitEvent;
  std::string event_name;  // set only for ExplicitEvent

  friend auto operator<=>(const Relation&, const Relation&) = default;
  friend bool operator==(const Relation&, const Relation&) = default;
};

// Label used in exports and payloads: the event name for explicit edges,
// the relation name otherwise.
std::string label(const Relation& relation);

struct Triplet {
  NodeKey source;
  Relation relation;
  NodeKey target;
  Attributes attributes;               // explicit triplets only
  std::optional<Timestamp> timestamp;  // explicit triplets only
  Attributes source_attributes;        // merged into the node on upsert
  Attributes target_attributes;

  bool is_explicit() const { return relation.kind == RelationKind::ExplicitEvent; }
};

namespace attr {
inline constexpr const char* kEventId = "event_id";
inline constexpr const char* kRequestId = "request_id";
inline constexpr const char* kTimestamp = "timestamp";
inline constexpr const char* kRegion = "region";
inline constexpr const char* kUserAgent = "user_agent";
inline constexpr const char* kSourceIp = "source_ip";
inline constexpr const char* kErrorCode = "error_code";
inline constexpr const char* kEventSource = "event_source";
}  // namespace attr

}  // namespace actgraph
