#include <doctest.h>

#include <json.hpp>

#include "actgraph/payload.hpp"
#include "actgraph/report.hpp"
#include "actgraph/service.hpp"
#include "actgraph/simulator.hpp"
#include "support.hpp"

#include <httplib.h>

using namespace actgraph;
using nlohmann::json;

namespace {

Request get(std::string path, std::multimap<std::string, std::string> params = {}) {
  return {"GET", "/api/v1/" + path, std::move(params), ""};
}

json body(const Response& r) { return json::parse(r.body); }

Service booking_pair_service(ServiceConfig cfg = {}) { return Service(std::move(cfg), testing::booking_pair_graph(), Catalog::builtin()); }

struct DowFixture {
  sim::Simulation sim;
  TimeWindow burst;
  std::size_t burst_size = 0;

  DowFixture() {
    sim::ScenarioConfig cfg;
    cfg.duration = std::chrono::hours{1};
    cfg.attack = sim::AttackKind::DoW;
    cfg.anomaly_rate = 0.05;
    cfg.dow_burst_size = 200;
    sim = sim::simulate(cfg);
    std::string flow;
    Timestamp first{}, last{};
    for (std::size_t i = 0; i < sim.labels.size(); ++i) {
      if (!sim.labels[i].attack) continue;
      if (flow.empty()) {
        flow = sim.labels[i].flow_instance;
        first = sim.events[i].timestamp;
      }
      if (sim.labels[i].flow_instance != flow) break;
      last = sim.events[i].timestamp;
      ++burst_size;
    }
    burst = {first, last + std::chrono::milliseconds{1}};
  }
};

}  // namespace

TEST_CASE("resolve node names") {
  auto g = testing::booking_pair_graph();
  CHECK(resolve_node(g, "BookingTable") == NodeKey{"BookingTable", "Storage"});
  CHECK(resolve_node(g, "Storage:BookingTable") == NodeKey{"BookingTable", "Storage"});
  CHECK_THROWS_AS(resolve_node(g, "Nope"), std::invalid_argument);
}

TEST_CASE("graph endpoint for the example") {
  auto svc = booking_pair_service();
  auto r = svc.handle(get("graph"));
  REQUIRE(r.status == 200);
  auto j = body(r);
  CHECK(j["schema_version"] == 1);
  CHECK(j["nodes"].size() == 5);
  CHECK(j["edges"].size() == 2);
  CHECK(j["counts"]["explicit"] == 2);
  CHECK(j["counts"]["implicit"] == 4);
  CHECK(svc.handle(get("graph")).body == r.body);

  auto filtered = body(svc.handle(get("graph", {{"class", "Storage"}})));
  CHECK(filtered["edges"].size() == 1);
  CHECK(filtered["edges"][0]["target"] == "Storage:BookingTable");
}

TEST_CASE("endpoints return the library results") {
  auto svc = booking_pair_service();
  const auto& g = svc.graph();
  const TimeWindow w{testing::at("2023-05-01T10:15:00Z"), testing::at("2023-05-01T10:15:03Z")};
  const std::multimap<std::string, std::string> window{{"from", "2023-05-01T10:15:00Z"}, {"to", "2023-05-01T10:15:03Z"}};
  auto with = [&](std::multimap<std::string, std::string> extra) {
    extra.insert(window.begin(), window.end());
    return extra;
  };
  const NodeKey flow = resolve_node(g, "Airline-Booking-flow");
  const NodeKey confirm = resolve_node(g, "ConfirmBooking");

  CHECK(svc.handle(get("graph", window)).body == payload::view(g.window(w), w).dump() + "\n");

  const std::vector<NodeKey> sel{confirm};
  CHECK(svc.handle(get("distribution", with({{"node", "ConfirmBooking"}}))).body ==
        payload::distribution(g.event_distribution(sel, w), sel, w).dump() + "\n");
  CHECK(svc.handle(get("edge-weight", with({{"source", "Airline-Booking-flow"}, {"target", "ConfirmBooking"}}))).body ==
        payload::edge_weight(flow, confirm, w, 1).dump() + "\n");
  CHECK(svc.handle(get("neighbors", with({{"node", "ConfirmBooking"}}))).body ==
        payload::neighbors(confirm, w, g.neighbors(confirm, w)).dump() + "\n");
  CHECK(svc.handle(get("events", with({{"node", "ConfirmBooking"}}))).body ==
        payload::events_page(g.events(sel, w), w, 0, 500).dump() + "\n");

  auto node = body(svc.handle(get("node", {{"key", "ConfirmBooking"}})));
  CHECK(node["node"]["class"] == "Compute");
  CHECK(node["explicit_degree"] == 1);

  std::string req;
  for (const auto& e : g.snapshot().edges)
    if (e.is_explicit() && e.target == confirm) req = e.attributes.at(attr::kRequestId);
  auto by_query = svc.handle(get("request", {{"id", req}}));
  CHECK(by_query.status == 200);
  CHECK(svc.handle(get("request/" + req)).body == by_query.body);
  CHECK(body(by_query)["events"].size() == 1);

  auto status = body(svc.handle(get("status")));
  CHECK(status["nodes"] == 5);
  CHECK(status["explicit_edges"] == 2);
}

TEST_CASE("error statuses") {
  auto svc = booking_pair_service();
  auto bad_window = svc.handle(get("graph", {{"from", "2023-05-02T00:00:00Z"}, {"to", "2023-05-01T00:00:00Z"}}));
  CHECK(bad_window.status == 400);
  CHECK(body(bad_window)["error"].get<std::string>().find("after") != std::string::npos);
  CHECK(svc.handle(get("graph", {{"from", "yesterday"}})).status == 400);
  CHECK(svc.handle(get("neighbors", {{"node", "Ghost"}})).status == 404);
  CHECK(svc.handle(get("neighbors")).status == 400);
  CHECK(svc.handle(get("events", {{"limit", "-3"}})).status == 400);
  CHECK(svc.handle(get("nowhere")).status == 404);
  CHECK(svc.handle({"DELETE", "/api/v1/graph", {}, ""}).status == 405);
  CHECK(svc.handle(get("coa/questionnaire", {{"context", "integrity"}})).status == 409);
  CHECK(svc.handle(get("coa/rankings", {{"context", "secrecy"}})).status == 400);
  CHECK(svc.handle({"POST", "/api/v1/ingest", {{"format", "xml"}}, ""}).status == 400);
}

TEST_CASE("report for the example") {
  auto svc = booking_pair_service();
  auto j = body(svc.handle(get("report")));
  CHECK(j["events"].size() == 2);
  CHECK(j["edges"].size() == 2);
  CHECK(j["nodes"].size() == 5);
  CHECK(j["distribution"]["edge_count"] == 2);

  auto empty = body(svc.handle(get("report", {{"from", "2024-01-01T00:00:00Z"}, {"to", "2024-01-02T00:00:00Z"}})));
  CHECK(empty["events"].empty());
  CHECK(empty["edges"].empty());
  CHECK(empty["distribution"]["edge_count"] == 0);
}

TEST_CASE("report and weights agree on an attack burst") {
  DowFixture dow;
  REQUIRE(dow.burst_size == 200);
  ActivityGraph g;
  build_graph(dow.sim.events, Catalog::builtin(), g);
  Service svc({}, std::move(g), Catalog::builtin());
  std::multimap<std::string, std::string> w{{"from", format_iso8601(dow.burst.from)},
                                            {"to", format_iso8601(dow.burst.to)}};
  auto weight = w;
  weight.insert({{"source", "ReserveBooking"}, {"target", "BookingTable"}});
  CHECK(body(svc.handle(get("edge-weight", weight)))["weight"] == 200);

  auto sel = w;
  sel.insert({"node", "BookingTable"});
  auto rep = body(svc.handle(get("report", sel)));
  std::size_t from_edges = 0;
  for (const auto& e : rep["edges"])
    if (e["source"] == "Compute:ReserveBooking" && e["target"] == "Storage:BookingTable") from_edges = e["weight"];
  CHECK(from_edges == 200);
  CHECK(rep["events"].size() == rep["distribution"]["edge_count"]);
}

TEST_CASE("ingest updates every view") {
  Service svc({}, ActivityGraph{}, Catalog::builtin());
  CHECK(body(svc.handle(get("status")))["nodes"] == 0);
  auto r = svc.handle({"POST", "/api/v1/ingest", {{"format", "csv"}}, testing::slurp(testing::fixture("booking_pair.csv"))});
  REQUIRE(r.status == 200);
  CHECK(body(r)["parsed"] == 2);
  CHECK(body(r)["explicit_added"] == 2);
  auto d = body(svc.handle(get("distribution", {{"node", "BookingTable"}})));
  CHECK(d["counts"]["PutItem"] == 1);
  auto again = body(svc.handle({"POST", "/api/v1/ingest", {{"format", "csv"}}, testing::slurp(testing::fixture("booking_pair.csv"))}));
  CHECK(again["duplicate_events"] == 2);
  CHECK(body(svc.handle(get("status")))["explicit_edges"] == 2);
}

TEST_CASE("criticality workflow") {
  ServiceConfig cfg;
  cfg.hierarchy_path = testing::fixture("example_hierarchy.json");
  Service svc(cfg, ActivityGraph{}, Catalog::builtin());
  auto q = body(svc.handle(get("coa/questionnaire", {{"context", "confidentiality"}})));
  REQUIRE(q["questions"].size() == 18);
  CHECK(svc.handle({"POST", "/api/v1/coa/aggregate", {{"context", "confidentiality"}}, ""}).status == 409);

  auto submission = [&](const std::string& who, int answer) {
    json doc{{"annotator", who}, {"context", "confidentiality"}, {"responses", json::object()}};
    for (const auto& item : q["questions"]) doc["responses"][item["id"].get<std::string>()] = answer;
    return svc.handle({"POST", "/api/v1/coa/responses", {}, doc.dump()});
  };
  auto ok = body(submission("alice", 5));
  CHECK(ok["accepted"] == true);
  CHECK(body(submission("bob", 5))["accepted"] == true);
  CHECK(svc.handle({"POST", "/api/v1/coa/responses", {}, "{}"}).status == 422);

  auto agg = svc.handle({"POST", "/api/v1/coa/aggregate", {{"context", "confidentiality"}}, ""});
  REQUIRE(agg.status == 200);
  auto ranked = body(agg);
  CHECK(ranked["scores"].size() == 15);
  CHECK(ranked["annotators"] == json::array({"alice", "bob"}));
  double total = 0;
  for (const auto& s : ranked["scores"]) total += s["score"].get<double>();
  CHECK(total == doctest::Approx(1.0));
  CHECK(svc.handle(get("coa/rankings", {{"context", "confidentiality"}})).body == agg.body);
  CHECK(svc.handle(get("coa/rankings", {{"context", "integrity"}})).status == 404);
}

TEST_CASE("served over http") {
  testing::TempDir tmp("actgraph-service");
  ServiceConfig cfg;
  cfg.port = 0;
  cfg.graph_path = tmp / "graph.tsv";
  Service svc(cfg, ActivityGraph{}, Catalog::builtin());
  const int port = svc.start();
  REQUIRE(port > 0);
  httplib::Client client("127.0.0.1", port);
  auto posted = client.Post("/api/v1/ingest?format=csv", testing::slurp(testing::fixture("booking_pair.csv")), "text/csv");
  REQUIRE(posted);
  CHECK(posted->status == 200);
  auto res = client.Get("/api/v1/graph");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type") == "application/json");
  CHECK(res->body == svc.handle(get("graph")).body);
  auto bad = client.Get("/api/v1/graph?from=2023-05-02T00:00:00Z&to=2023-05-01T00:00:00Z");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  svc.stop();
  REQUIRE(std::filesystem::exists(tmp / "graph.tsv"));
  CHECK(ActivityGraph::load(tmp / "graph.tsv").explicit_edge_count() == 2);
}
