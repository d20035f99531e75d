#pragma once

// HTTP facade over the graph store and the CoA workflow. Routing lives in
// Service::handle so the same handlers serve the network listener, the CLI
// and in-process tests.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actgraph/builder.hpp"
#include "actgraph/coa/hierarchy.hpp"
#include "actgraph/coa/ranking.hpp"
#include "actgraph/graph_store.hpp"
#include "actgraph/ontology.hpp"

namespace actgraph {

// "Class:name", or a bare name that identifies exactly one node. Throws
// std::invalid_argument otherwise.
NodeKey resolve_node(const ActivityGraph& graph, std::string_view text);

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks an ephemeral port
  std::optional<std::filesystem::path> graph_path;    // loaded at startup, saved on shutdown
  std::optional<std::filesystem::path> catalog_path;  // builtin catalog otherwise
  std::optional<std::filesystem::path> hierarchy_path;
  // Used when no hierarchy file is given: the hierarchy is built from the
  // current graph on demand.
  std::optional<std::filesystem::path> assignment_path;
  BuildOptions build;
};

struct Request {
  std::string method;  // GET or POST
  std::string path;    // e.g. /api/v1/graph
  std::multimap<std::string, std::string> params;
  std::string body;

  std::optional<std::string> param(const std::string& name) const;
  std::vector<std::string> params_named(const std::string& name) const;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class Service {
 public:
  // Throws on unreadable graph, catalog, hierarchy or assignment files.
  explicit Service(ServiceConfig config);
  Service(ServiceConfig config, ActivityGraph graph, Catalog catalog);
  ~Service();

  Response handle(const Request& request);

  // Blocks until stop(). Throws std::runtime_error when the address cannot be
  // bound.
  void listen();
  // Binds and serves on a background thread; returns the bound port.
  int start();
  void stop();

  // Writes the graph back to graph_path when ingests changed it.
  void flush();

  const ActivityGraph& graph() const { return graph_; }
  const Catalog& catalog() const { return catalog_; }

 private:
  struct Server;

  Response graph_view(const Request& r) const;
  Response node_detail(const Request& r) const;
  Response request_search(const Request& r) const;
  Response distribution(const Request& r) const;
  Response edge_weight(const Request& r) const;
  Response neighbors(const Request& r) const;
  Response events(const Request& r) const;
  Response report(const Request& r) const;
  Response status() const;
  Response ingest(const Request& r);
  Response questionnaire(const Request& r);
  Response submit(const Request& r);
  Response aggregate(const Request& r);
  Response rankings(const Request& r);

  coa::Hierarchy hierarchy();

  ServiceConfig config_;
  ActivityGraph graph_;
  Catalog catalog_;
  std::optional<coa::Hierarchy> fixed_hierarchy_;
  std::optional<coa::ProcessAssignment> assignment_;

  std::mutex write_mutex_;  // single writer for ingest
  bool dirty_ = false;

  std::mutex coa_mutex_;
  std::map<coa::CiaContext, std::map<std::string, coa::RankingResult>> submissions_;
  std::map<coa::CiaContext, coa::RankingResult> consensus_;
  std::map<coa::CiaContext, std::string> consensus_payload_;

  std::unique_ptr<Server> server_;
};

}  // namespace actgraph
