#pragma once

// Deterministic CloudTrail-style activity for the Airline Booking topology.
//
// A run picks one user flow (catalog, loyalty, booking) with a single seeded
// generator, expands it into an ordered script of resource interactions, and
// renders each interaction as one API event. Lambda invocations also emit a
// platform execution record that shares the invocation's requestID. About
// `anomaly_rate` of runs are turned into attacked booking flows when an
// attack is configured.

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actgraph/event.hpp"
#include "actgraph/ingest.hpp"
#include "actgraph/time.hpp"

namespace actgraph::sim {

enum class FlowKind { Catalog, Loyalty, Booking, BackOffice };
enum class AttackKind { None, DoW, Leakage };

std::string_view to_string(FlowKind kind);
std::string_view to_string(AttackKind kind);
std::optional<AttackKind> attack_from_string(std::string_view text);

enum class ResourceKind { Function, Table, Bucket, Queue, Topic, Api, Flow, Schedule };

struct SimResource {
  std::string name;
  ResourceKind kind;
  std::string role;  // execution role (functions and integration callers)
};

// 12 functions, 4 tables, 4 buckets, queue, topic, GraphQL API, booking
// state machine, plus the back-office schedule rule. Names other than
// ReserveBooking, ConfirmBooking, ConfirmBookingRole, BookingTable,
// Airline-Booking-flow, amplify-booking-reports and Airline-BackLogOffice-v3
// are synthetic placeholders.
class Topology {
 public:
  static const Topology& airline_booking();

  const SimResource& at(std::string_view name) const;
  bool contains(std::string_view name) const;
  const std::vector<SimResource>& resources() const { return resources_; }
  std::size_t count(ResourceKind kind) const;

 private:
  std::vector<SimResource> resources_;
};

namespace names {
inline constexpr const char* kApi = "AirlineBookingApi";
inline constexpr const char* kFlow = "Airline-Booking-flow";
inline constexpr const char* kReserveBooking = "ReserveBooking";
inline constexpr const char* kConfirmBooking = "ConfirmBooking";
inline constexpr const char* kBookingTable = "BookingTable";
inline constexpr const char* kReceiptsBucket = "booking-receipts";
inline constexpr const char* kPublicBucket = "booking-public-assets";
inline constexpr const char* kLoyaltyTable = "LoyaltyTable";
}  // namespace names

struct Interaction {
  std::string caller;
  std::string target;
  std::string event_name;
  std::string error_code;
  bool deviates = false;  // spliced in by an attack
  friend bool operator==(const Interaction&, const Interaction&) = default;
};

struct FlowVariant {
  bool round_trip = false;  // booking: reserve a return seat too
  bool user_error = false;  // booking: payment declined, seats released
  std::size_t dow_burst_size = 500;
};

// Ordered resource interactions of one flow. Catalog and loyalty flows are
// single-function reads; booking is orchestrated by the state machine.
std::vector<Interaction> script_flow(FlowKind flow, AttackKind attack = AttackKind::None,
                                     const FlowVariant& variant = {});

struct ScenarioConfig {
  std::uint64_t seed = 42;
  Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{2023} / 5 / 1}};
  std::chrono::seconds duration = std::chrono::hours{24};
  std::array<double, 3> flow_mix{1.0 / 3, 1.0 / 3, 1.0 / 3};  // catalog, loyalty, booking
  double anomaly_rate = 0.02;
  AttackKind attack = AttackKind::None;
  std::size_t dow_burst_size = 500;
  double user_error_rate = 0.05;
  double round_trip_rate = 0.5;
  std::size_t backoffice_every = 50;  // runs between back-office jobs; 0 disables
  std::optional<std::size_t> max_events;
  InputFormat format = InputFormat::JsonLines;

  // Throws std::invalid_argument on a mix that does not sum to one, a rate
  // outside [0,1], or a non-positive duration.
  void validate() const;
};

struct EventLabel {
  std::string event_id;
  std::string flow_instance;
  bool attack = false;
  AttackKind attack_type = AttackKind::None;
};

struct FlowRecord {
  std::string id;
  FlowKind kind;
  AttackKind attack;
  FlowVariant variant;
  Timestamp started;
};

struct Simulation {
  std::vector<ApiEvent> events;
  std::vector<EventLabel> labels;  // parallel to events
  std::vector<FlowRecord> flows;
  std::string events_document;     // in config.format
  std::string labels_document;     // CSV: event_id,flow_instance,label,attack_type
};

Simulation simulate(const ScenarioConfig& config);

}  // namespace actgraph::sim
