#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "actgraph/event.hpp"
#include "actgraph/graph_types.hpp"
#include "actgraph/ontology.hpp"

namespace actgraph {

class ActivityGraph;

struct BuildOptions {
  // Account principal that owns every resource; enables has_owner context.
  std::optional<std::string> account_owner;
};

// Resolves a name_from entry against an event. Besides the flattened log
// columns (requestParameters_*, resources_N_ARN, resources_N_type) these
// pseudo-fields exist: event_source, user_agent, identity_type, principal_id,
// principal_session (text after the last ':' of the principal id),
// identity_arn_name (last '/' segment of the identity ARN).
// ARN and URL values are reduced to their trailing resource name.
std::string resolve_name_field(const ApiEvent& event, std::string_view field);

// Role behind an assumed-role identity: the role component of an
// ".../assumed-role/<role>/<session>" ARN, else the principal id with its
// ":session" suffix stripped. Empty when neither is present.
std::string assumed_role_name(const ApiEvent& event);

std::string resource_tail(std::string_view value);

// One explicit triplet plus the implicit context the ontology prescribes.
std::vector<Triplet> map_event(const ApiEvent& event, const Catalog& catalog, const BuildOptions& options = {});

struct BuildStats {
  std::size_t events = 0;
  std::size_t explicit_added = 0;
  std::size_t duplicate_events = 0;  // event_id already present
  std::size_t implicit_added = 0;
};

BuildStats build_graph(std::span<const ApiEvent> events, const Catalog& catalog, ActivityGraph& graph,
                       const BuildOptions& options = {});

}  // namespace actgraph
