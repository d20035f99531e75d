#include "actgraph/service.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "actgraph/ingest.hpp"
#include "actgraph/payload.hpp"
#include "actgraph/report.hpp"

namespace actgraph {
namespace {

using payload::Json;

struct HttpError : std::runtime_error {
  HttpError(int status, const std::string& what) : std::runtime_error(what), status(status) {}
  int status;
};

Response json_response(const Json& j, int status = 200) { return {status, j.dump() + "\n"}; }

Response error_response(int status, const std::string& message) {
  return json_response({{"schema_version", kSchemaVersion}, {"error", message}}, status);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Timestamp time_param(const Request& r, const std::string& name, Timestamp fallback) {
  auto text = r.param(name);
  if (!text) return fallback;
  auto ts = parse_iso8601(*text);
  if (!ts) throw HttpError(400, "'" + name + "' is not an ISO-8601 date-time: " + *text);
  return *ts;
}

TimeWindow window_param(const Request& r) {
  const auto all = TimeWindow::everything();
  TimeWindow w{time_param(r, "from", all.from), time_param(r, "to", all.to)};
  if (!w.valid()) throw HttpError(400, "'from' is after 'to'");
  return w;
}

NodeKey key_param(const ActivityGraph& g, const Request& r, const std::string& name) {
  auto text = r.param(name);
  if (!text) throw HttpError(400, "missing parameter '" + name + "'");
  try {
    return resolve_node(g, *text);
  } catch (const std::invalid_argument& e) {
    throw HttpError(404, e.what());
  }
}

std::vector<NodeKey> keys_param(const ActivityGraph& g, const Request& r, const std::string& name) {
  std::vector<NodeKey> keys;
  for (const auto& text : r.params_named(name)) {
    try {
      keys.push_back(resolve_node(g, text));
    } catch (const std::invalid_argument& e) {
      throw HttpError(404, e.what());
    }
  }
  return keys;
}

std::size_t size_param(const Request& r, const std::string& name, std::size_t fallback) {
  auto text = r.param(name);
  if (!text) return fallback;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(*text, &used);
    if (used != text->size() || v < 0) throw std::invalid_argument(name);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw HttpError(400, "'" + name + "' must be a non-negative integer");
  }
}

coa::CiaContext context_param(const Request& r) {
  auto text = r.param("context");
  if (!text) throw HttpError(400, "missing parameter 'context'");
  auto ctx = coa::cia_context_from_string(*text);
  if (!ctx) throw HttpError(400, "unknown CIA context '" + *text + "'");
  return *ctx;
}

constexpr std::size_t kDefaultPage = 500;

}  // namespace

NodeKey resolve_node(const ActivityGraph& graph, std::string_view text) {
  if (text.find(':') != std::string_view::npos) {
    if (auto key = parse_node_key(text)) return *key;
    throw std::invalid_argument("malformed node key '" + std::string(text) + "'");
  }
  auto found = graph.nodes_named(text);
  if (found.empty()) throw std::invalid_argument("unknown node '" + std::string(text) + "'");
  if (found.size() > 1) {
    std::string msg = "ambiguous node name '" + std::string(text) + "':";
    for (const auto& k : found) msg += " " + to_string(k);
    throw std::invalid_argument(msg);
  }
  return found.front();
}

std::optional<std::string> Request::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Request::params_named(const std::string& name) const {
  std::vector<std::string> out;
  auto [lo, hi] = params.equal_range(name);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  return out;
}

struct Service::Server {
  httplib::Server http;
  std::thread thread;
};

Service::Service(ServiceConfig config)
    : Service(config,
              config.graph_path && std::filesystem::exists(*config.graph_path) ? ActivityGraph::load(*config.graph_path)
                                                                                 : ActivityGraph{},
              config.catalog_path ? Catalog::load(*config.catalog_path) : Catalog::builtin()) {}

Service::Service(ServiceConfig config, ActivityGraph graph, Catalog catalog)
    : config_(std::move(config)), graph_(std::move(graph)), catalog_(std::move(catalog)) {
  if (config_.hierarchy_path) fixed_hierarchy_ = coa::Hierarchy::parse(read_file(*config_.hierarchy_path));
  if (config_.assignment_path) assignment_ = coa::ProcessAssignment::parse(read_file(*config_.assignment_path));
}

Service::~Service() {
  stop();
}

Response Service::handle(const Request& r) {
  static constexpr std::string_view prefix = "/api/v1/";
  try {
    if (r.path.rfind(prefix, 0) != 0) throw HttpError(404, "no such endpoint " + r.path);
    const std::string route = r.path.substr(prefix.size());
    if (r.method == "GET") {
      if (route == "graph") return graph_view(r);
      if (route == "node") return node_detail(r);
      if (route == "request") return request_search(r);
      if (route.rfind("request/", 0) == 0) {
        Request copy = r;
        copy.params.emplace("id", route.substr(8));
        return request_search(copy);
      }
      if (route == "distribution") return distribution(r);
      if (route == "edge-weight") return edge_weight(r);
      if (route == "neighbors") return neighbors(r);
      if (route == "events") return events(r);
      if (route == "report") return report(r);
      if (route == "status") return status();
      if (route == "coa/questionnaire") return questionnaire(r);
      if (route == "coa/rankings") return rankings(r);
    } else if (r.method == "POST") {
      if (route == "ingest") return ingest(r);
      if (route == "coa/responses") return submit(r);
      if (route == "coa/aggregate") return aggregate(r);
    } else {
      throw HttpError(405, "method " + r.method + " not allowed");
    }
    throw HttpError(404, "no such endpoint " + r.method + " " + r.path);
  } catch (const HttpError& e) {
    return error_response(e.status, e.what());
  } catch (const coa::HierarchyError& e) {
    return error_response(422, e.what());
  } catch (const coa::RankingError& e) {
    return error_response(422, e.what());
  } catch (const std::invalid_argument& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

Response Service::graph_view(const Request& r) const {
  const auto w = window_param(r);
  ViewFilter filter{keys_param(graph_, r, "node"), r.params_named("class")};
  return json_response(payload::view(filter_view(graph_.window(w), filter), w));
}

Response Service::node_detail(const Request& r) const {
  const auto key = key_param(graph_, r, "key");
  auto node = graph_.node(key);
  if (!node) throw HttpError(404, "unknown node " + to_string(key));
  const std::vector<NodeKey> one{key};
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["node"] = payload::node(*node);
  j["explicit_degree"] = graph_.events(one, TimeWindow::everything()).size();
  return json_response(j);
}

Response Service::request_search(const Request& r) const {
  auto id = r.param("id");
  if (!id) throw HttpError(400, "missing parameter 'id'");
  return json_response(payload::request(*id, graph_.find_request(*id)));
}

Response Service::distribution(const Request& r) const {
  const auto w = window_param(r);
  const auto keys = keys_param(graph_, r, "node");
  return json_response(payload::distribution(graph_.event_distribution(keys, w), keys, w));
}

Response Service::edge_weight(const Request& r) const {
  const auto w = window_param(r);
  const auto source = key_param(graph_, r, "source");
  const auto target = key_param(graph_, r, "target");
  return json_response(payload::edge_weight(source, target, w, graph_.edge_weight(source, target, w)));
}

Response Service::neighbors(const Request& r) const {
  const auto w = window_param(r);
  const auto key = key_param(graph_, r, "node");
  return json_response(payload::neighbors(key, w, graph_.neighbors(key, w)));
}

Response Service::events(const Request& r) const {
  const auto w = window_param(r);
  const auto keys = keys_param(graph_, r, "node");
  const auto offset = size_param(r, "offset", 0);
  const auto limit = size_param(r, "limit", kDefaultPage);
  return json_response(payload::events_page(graph_.events(keys, w), w, offset, limit));
}

Response Service::report(const Request& r) const {
  const auto w = window_param(r);
  const auto keys = keys_param(graph_, r, "node");
  const auto now = std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
  return json_response(report_json(make_report(graph_, keys, w, now)));
}

Response Service::status() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["nodes"] = graph_.node_count();
  j["explicit_edges"] = graph_.explicit_edge_count();
  j["implicit_edges"] = graph_.implicit_edge_count();
  if (auto span = graph_.time_span()) j["time_span"] = payload::window(*span);
  else j["time_span"] = nullptr;
  j["catalog_version"] = catalog_.version();
  return json_response(j);
}

Response Service::ingest(const Request& r) {
  const auto format_name = r.param("format").value_or("json-lines");
  const auto format = input_format_from_string(format_name);
  if (!format) throw HttpError(400, "unknown input format '" + format_name + "'");
  std::istringstream in(r.body);
  IngestResult result;
  try {
    result = load_stream(in, *format);
  } catch (const IoError& e) {
    throw HttpError(422, e.what());
  }
  auto events = correlate_invocations(std::move(result.events));
  std::lock_guard lock(write_mutex_);
  const auto stats = build_graph(events, catalog_, graph_, config_.build);
  if (stats.explicit_added || stats.implicit_added) dirty_ = true;
  return json_response(payload::ingest(result.report, stats));
}

coa::Hierarchy Service::hierarchy() {
  if (fixed_hierarchy_) return *fixed_hierarchy_;
  if (!assignment_) throw HttpError(409, "no hierarchy or process assignment configured");
  return coa::build_hierarchy(graph_, catalog_, *assignment_);
}

Response Service::questionnaire(const Request& r) {
  const auto ctx = context_param(r);
  return {200, coa::questionnaire_document(hierarchy(), ctx)};
}

Response Service::submit(const Request& r) {
  const auto responses = coa::ResponseSet::parse(r.body);
  auto result = coa::rank(hierarchy(), responses);
  auto feedback = Json::parse(coa::feedback_document(result));
  feedback["accepted"] = result.valid();
  if (result.valid()) {
    std::lock_guard lock(coa_mutex_);
    submissions_[responses.context][responses.annotator] = std::move(result);
  }
  return json_response(feedback);
}

Response Service::aggregate(const Request& r) {
  const auto ctx = context_param(r);
  const auto h = hierarchy();
  std::lock_guard lock(coa_mutex_);
  auto it = submissions_.find(ctx);
  if (it == submissions_.end() || it->second.empty())
    throw HttpError(409, "no accepted submissions for " + std::string(coa::to_string(ctx)));
  std::vector<coa::RankingResult> results;
  std::vector<std::string> annotators;
  for (const auto& [name, result] : it->second) {
    annotators.push_back(name);
    results.push_back(result);
  }
  auto consensus = coa::aggregate(h, results);
  {
    std::lock_guard write(write_mutex_);
    for (const auto& s : consensus.scores)
      if (graph_.node(s.key)) graph_.set_criticality(s.key, std::string(coa::to_string(ctx)), s.score);
    dirty_ = true;
  }
  auto doc = payload::ranking(consensus, annotators, coa::agreement(results));
  consensus_[ctx] = std::move(consensus);
  consensus_payload_[ctx] = doc.dump() + "\n";
  return {200, consensus_payload_[ctx]};
}

Response Service::rankings(const Request& r) {
  const auto ctx = context_param(r);
  std::lock_guard lock(coa_mutex_);
  auto it = consensus_payload_.find(ctx);
  if (it == consensus_payload_.end())
    throw HttpError(404, "no ranking aggregated yet for " + std::string(coa::to_string(ctx)));
  return {200, it->second};
}

namespace {

void bind_routes(httplib::Server& http, Service& service) {
  auto adapt = [&service](const httplib::Request& req, httplib::Response& res) {
    Request r;
    r.method = req.method;
    r.path = req.path;
    r.params.insert(req.params.begin(), req.params.end());
    r.body = req.body;
    auto out = service.handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  http.Get(R"(/api/v1/.*)", adapt);
  http.Post(R"(/api/v1/.*)", adapt);
}

}  // namespace

void Service::listen() {
  if (!server_) server_ = std::make_unique<Server>();
  bind_routes(server_->http, *this);
  if (!server_->http.listen(config_.host, config_.port))
    throw std::runtime_error("cannot bind " + config_.host + ":" + std::to_string(config_.port));
  flush();
}

int Service::start() {
  server_ = std::make_unique<Server>();
  bind_routes(server_->http, *this);
  int port = config_.port == 0 ? server_->http.bind_to_any_port(config_.host)
                               : (server_->http.bind_to_port(config_.host, config_.port) ? config_.port : -1);
  if (port < 0) throw std::runtime_error("cannot bind " + config_.host + ":" + std::to_string(config_.port));
  server_->thread = std::thread([this] { server_->http.listen_after_bind(); });
  server_->http.wait_until_ready();
  return port;
}

void Service::stop() {
  if (!server_) return;
  server_->http.stop();
  if (server_->thread.joinable()) server_->thread.join();
  server_.reset();
  flush();
}

void Service::flush() {
  std::lock_guard lock(write_mutex_);
  if (dirty_ && config_.graph_path) {
    graph_.save(*config_.graph_path);
    dirty_ = false;
  }
}

}  // namespace actgraph
