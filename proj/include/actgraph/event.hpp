#pragma once

#include <map>
#include <string>
#include <vector>

#include "actgraph/time.hpp"

namespace actgraph {

struct ResourceRef {
  std::string type;
  std::string arn;

  friend bool operator==(const ResourceRef&, const ResourceRef&) = default;
};

// One normalized audit-log record. request_parameters keys are flattened with
// underscores, e.g. "requestParameters_tableName".
struct ApiEvent {
  std::string event_id;
  std::string request_id;
  std::string event_source;
  std::string event_name;
  Timestamp timestamp{};
  std::string region;
  std::string source_ip;
  std::string user_agent;
  std::string identity_type;
  std::string principal_id;
  std::string identity_arn;
  std::vector<ResourceRef> resources;
  std::map<std::string, std::string> request_parameters;
  std::string error_code;

  friend bool operator==(const ApiEvent&, const ApiEvent&) = default;
};

inline constexpr const char* kRequestParamPrefix = "requestParameters_";

}  // namespace actgraph
