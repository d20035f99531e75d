#include <doctest.h>

#include <set>
#include <sstream>

#include "actgraph/simulator.hpp"
#include "support.hpp"

using namespace actgraph;
using namespace actgraph::sim;

namespace {

ScenarioConfig small(AttackKind attack = AttackKind::None) {
  ScenarioConfig cfg;
  cfg.duration = std::chrono::hours{2};
  cfg.attack = attack;
  cfg.anomaly_rate = attack == AttackKind::None ? 0.0 : 0.1;
  return cfg;
}

std::size_t count_steps(const std::vector<Interaction>& s, std::string_view caller, std::string_view target,
                        std::string_view name) {
  std::size_t n = 0;
  for (const auto& i : s) n += i.caller == caller && i.target == target && i.event_name == name;
  return n;
}

}  // namespace

TEST_CASE("topology") {
  const auto& t = Topology::airline_booking();
  CHECK(t.count(ResourceKind::Function) == 12);
  CHECK(t.count(ResourceKind::Table) == 4);
  CHECK(t.count(ResourceKind::Bucket) == 4);
  CHECK(t.at(names::kReserveBooking).role == "ConfirmBookingRole");
  CHECK(t.at(names::kConfirmBooking).role == "ConfirmBookingRole");
  CHECK(t.at("SearchFlights").role == "SearchFlightsRole");
  CHECK(t.contains(names::kFlow));
  CHECK_THROWS_AS(t.at("Nope"), std::out_of_range);
}

TEST_CASE("flow scripts") {
  const auto& topo = Topology::airline_booking();
  for (auto kind : {FlowKind::Catalog, FlowKind::Loyalty, FlowKind::Booking, FlowKind::BackOffice})
    for (const auto& step : script_flow(kind)) {
      CHECK(topo.contains(step.caller));
      CHECK(topo.contains(step.target));
      CHECK_FALSE(step.deviates);
    }

  auto booking = script_flow(FlowKind::Booking);
  CHECK(booking.front().event_name == "StartExecution");
  CHECK(count_steps(booking, names::kFlow, names::kConfirmBooking, "Invoke") == 1);
  CHECK(count_steps(booking, names::kConfirmBooking, names::kReceiptsBucket, "PutObject") == 1);

  FlowVariant v;
  v.dow_burst_size = 37;
  auto dow = script_flow(FlowKind::Booking, AttackKind::DoW, v);
  CHECK(dow.size() == booking.size() + 37);
  std::size_t deviating = 0;
  for (const auto& s : dow)
    if (s.deviates) {
      ++deviating;
      CHECK(s == Interaction{names::kReserveBooking, names::kBookingTable, "GetItem", "", true});
    }
  CHECK(deviating == 37);

  auto leak = script_flow(FlowKind::Booking, AttackKind::Leakage);
  CHECK(leak.size() == booking.size());
  CHECK(count_steps(leak, names::kConfirmBooking, names::kReceiptsBucket, "PutObject") == 0);
  CHECK(count_steps(leak, names::kConfirmBooking, names::kPublicBucket, "PutObject") == 1);

  FlowVariant err;
  err.user_error = true;
  auto failed = script_flow(FlowKind::Booking, AttackKind::None, err);
  CHECK(count_steps(failed, names::kFlow, "RefundPayment", "Invoke") == 1);
  CHECK(count_steps(failed, names::kFlow, names::kConfirmBooking, "Invoke") == 0);
}

TEST_CASE("same seed, same output") {
  auto a = simulate(small(AttackKind::DoW));
  auto b = simulate(small(AttackKind::DoW));
  CHECK(a.events_document == b.events_document);
  CHECK(a.labels_document == b.labels_document);
  auto other = small(AttackKind::DoW);
  other.seed = 43;
  CHECK(simulate(other).events_document != a.events_document);
}

TEST_CASE("events are ordered, unique and labelled") {
  auto s = simulate(small(AttackKind::Leakage));
  REQUIRE(s.events.size() == s.labels.size());
  REQUIRE_FALSE(s.events.empty());
  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    CHECK(s.labels[i].event_id == s.events[i].event_id);
    ids.insert(s.events[i].event_id);
    if (i) CHECK(s.events[i - 1].timestamp < s.events[i].timestamp);
  }
  CHECK(ids.size() == s.events.size());
  const auto cfg = small(AttackKind::Leakage);
  CHECK(s.events.front().timestamp >= cfg.start);

  std::size_t attacked = 0, attack_labels = 0;
  for (const auto& f : s.flows) attacked += f.attack == AttackKind::Leakage;
  for (const auto& l : s.labels) attack_labels += l.attack;
  CHECK(attacked > 0);
  CHECK(attack_labels == attacked);  // one swapped upload per attacked run

  std::istringstream labels(s.labels_document);
  std::string line;
  std::getline(labels, line);
  CHECK(line == "event_id,flow_instance,label,attack_type");
  std::size_t rows = 0;
  while (std::getline(labels, line)) ++rows;
  CHECK(rows == s.events.size());
}

TEST_CASE("function invocations carry an execution record") {
  auto s = simulate(small());
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& e = s.events[i];
    if (e.event_name != "Invoke" || e.event_source != "lambda.amazonaws.com") continue;
    REQUIRE(i + 1 < s.events.size());
    const auto& p = s.events[i + 1];
    CHECK(p.event_name == "FunctionExecution");
    CHECK(p.request_id == e.request_id);
    CHECK(p.request_parameters.count("requestParameters_durationMs") == 1);
  }
}

TEST_CASE("dow burst size and limits") {
  auto cfg = small(AttackKind::DoW);
  cfg.dow_burst_size = 120;
  auto s = simulate(cfg);
  std::map<std::string, std::size_t> per_flow;
  for (const auto& l : s.labels)
    if (l.attack) ++per_flow[l.flow_instance];
  REQUIRE_FALSE(per_flow.empty());
  for (const auto& [_, n] : per_flow) CHECK(n == 120);

  cfg.max_events = 250;
  CHECK(simulate(cfg).events.size() == 250);
}

TEST_CASE("csv output parses back to the same events") {
  auto cfg = small();
  cfg.format = InputFormat::Csv;
  cfg.duration = std::chrono::minutes{20};
  auto s = simulate(cfg);
  std::istringstream in(s.events_document);
  auto loaded = load_stream(in, InputFormat::Csv);
  CHECK(loaded.report.skipped == 0);
  CHECK(loaded.events == s.events);
}

TEST_CASE("every simulated event maps onto the graph") {
  auto s = simulate(small(AttackKind::DoW));
  ActivityGraph g;
  auto stats = build_graph(s.events, Catalog::builtin(), g);
  CHECK(stats.explicit_added == s.events.size());
  for (const auto& r : Topology::airline_booking().resources())
    if (r.name != names::kPublicBucket) CHECK_FALSE(g.nodes_named(r.name).empty());  // only leaks reach it
}

TEST_CASE("invalid configurations") {
  auto cfg = small();
  cfg.flow_mix = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
  cfg = small();
  cfg.anomaly_rate = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small();
  cfg.duration = std::chrono::seconds{0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(attack_from_string("dow") == AttackKind::DoW);
  CHECK(attack_from_string("leakage") == AttackKind::Leakage);
  CHECK_FALSE(attack_from_string("ddos"));
}
