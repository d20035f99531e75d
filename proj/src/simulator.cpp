#include "actgraph/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

#include "actgraph/csv.hpp"

namespace actgraph::sim {
namespace {

constexpr const char* kAccount = "123456789012";
constexpr const char* kRegion = "us-east-1";
constexpr const char* kLambdaAgent = "aws-sdk-nodejs/2.1350.0 linux/v18.16.0 exec-env/AWS_Lambda_nodejs18.x";

// Portable draws on top of the standard engine; the <random> distributions
// are implementation-defined and would break byte-identical output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::int64_t between(std::int64_t lo, std::int64_t hi) {  // inclusive
    return lo + static_cast<std::int64_t>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool chance(double p) { return unit() < p; }
  std::string uuid() {
    std::uint64_t a = engine_(), b = engine_();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%08x-%04x-4%03x-%04x-%012llx", static_cast<unsigned>(a >> 32),
                  static_cast<unsigned>((a >> 16) & 0xffff), static_cast<unsigned>(a & 0xfff),
                  static_cast<unsigned>(0x8000 | ((b >> 48) & 0x3fff)),
                  static_cast<unsigned long long>(b & 0xffffffffffffull));
    return buf;
  }

 private:
  std::mt19937_64 engine_;
};

std::string role_id(std::string_view role) {
  // Stable pseudo role id in the AROA... style.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : role) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static constexpr char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";
  std::string id = "AROA";
  for (int i = 0; i < 17; ++i) {
    id += alphabet[h & 31];
    h = (h >> 5) | (h << 59);
  }
  return id;
}

std::string service_of(ResourceKind kind) {
  switch (kind) {
    case ResourceKind::Function: return "lambda.amazonaws.com";
    case ResourceKind::Table: return "dynamodb.amazonaws.com";
    case ResourceKind::Bucket: return "s3.amazonaws.com";
    case ResourceKind::Queue: return "sqs.amazonaws.com";
    case ResourceKind::Topic: return "sns.amazonaws.com";
    case ResourceKind::Api: return "appsync.amazonaws.com";
    case ResourceKind::Flow: return "states.amazonaws.com";
    case ResourceKind::Schedule: return "events.amazonaws.com";
  }
  return "unknown.amazonaws.com";
}

void describe_target(const SimResource& r, ApiEvent& e, const std::string& flow_id) {
  const std::string acct = kAccount, region = kRegion;
  e.event_source = service_of(r.kind);
  auto& p = e.request_parameters;
  switch (r.kind) {
    case ResourceKind::Function:
      p["requestParameters_functionName"] = r.name;
      e.resources.push_back({"AWS::Lambda::Function", "arn:aws:lambda:" + region + ":" + acct + ":function:" + r.name});
      break;
    case ResourceKind::Table:
      p["requestParameters_tableName"] = r.name;
      e.resources.push_back({"AWS::DynamoDB::Table", "arn:aws:dynamodb:" + region + ":" + acct + ":table/" + r.name});
      break;
    case ResourceKind::Bucket:
      p["requestParameters_bucketName"] = r.name;
      p["requestParameters_key"] = "bookings/" + flow_id + ".json";
      e.resources.push_back({"AWS::S3::Bucket", "arn:aws:s3:::" + r.name});
      break;
    case ResourceKind::Queue:
      p["requestParameters_queueUrl"] = "https://sqs." + region + ".amazonaws.com/" + acct + "/" + r.name;
      e.resources.push_back({"AWS::SQS::Queue", "arn:aws:sqs:" + region + ":" + acct + ":" + r.name});
      break;
    case ResourceKind::Topic:
      p["requestParameters_topicArn"] = "arn:aws:sns:" + region + ":" + acct + ":" + r.name;
      e.resources.push_back({"AWS::SNS::Topic", p["requestParameters_topicArn"]});
      break;
    case ResourceKind::Api:
      p["requestParameters_apiId"] = r.name;
      e.resources.push_back({"AWS::AppSync::GraphQLApi", "arn:aws:appsync:" + region + ":" + acct + ":apis/" + r.name});
      break;
    case ResourceKind::Flow:
      p["requestParameters_stateMachineArn"] = "arn:aws:states:" + region + ":" + acct + ":stateMachine:" + r.name;
      e.resources.push_back({"AWS::StepFunctions::StateMachine", p["requestParameters_stateMachineArn"]});
      break;
    case ResourceKind::Schedule:
      p["requestParameters_name"] = r.name;
      e.resources.push_back({"AWS::Events::Rule", "arn:aws:events:" + region + ":" + acct + ":rule/" + r.name});
      break;
  }
}

void describe_caller(const SimResource& r, ApiEvent& e, Rng& rng) {
  e.identity_type = "AssumedRole";
  e.principal_id = role_id(r.role) + ":" + r.name;
  e.identity_arn = std::string("arn:aws:sts::") + kAccount + ":assumed-role/" + r.role + "/" + r.name;
  if (r.kind == ResourceKind::Function) {
    e.user_agent = kLambdaAgent;
    e.source_ip = "3." + std::to_string(rng.between(80, 95)) + "." + std::to_string(rng.between(0, 255)) + "." +
                  std::to_string(rng.between(1, 254));
  } else {
    e.user_agent = service_of(r.kind);
    e.source_ip = e.user_agent;
  }
}

Interaction step(std::string caller, std::string target, std::string event, std::string error = {}) {
  return {std::move(caller), std::move(target), std::move(event), std::move(error), false};
}

}  // namespace

std::string_view to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::Catalog: return "catalog";
    case FlowKind::Loyalty: return "loyalty";
    case FlowKind::Booking: return "booking";
    case FlowKind::BackOffice: return "backoffice";
  }
  return "?";
}

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::None: return "none";
    case AttackKind::DoW: return "dow";
    case AttackKind::Leakage: return "leakage";
  }
  return "?";
}

std::optional<AttackKind> attack_from_string(std::string_view text) {
  for (auto k : {AttackKind::None, AttackKind::DoW, AttackKind::Leakage})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

const Topology& Topology::airline_booking() {
  static const Topology topology = [] {
    using K = ResourceKind;
    Topology t;
    auto fn = [&](std::string name, std::string role = {}) {
      if (role.empty()) role = name + "Role";
      t.resources_.push_back({std::move(name), K::Function, std::move(role)});
    };
    fn("SearchFlights");
    fn("GetLoyalty");
    fn("IngestLoyalty");
    fn("ReserveFlightSeat");
    fn("ReleaseFlightSeat");
    fn(names::kReserveBooking, "ConfirmBookingRole");
    fn("CollectPayment");
    fn("RefundPayment");
    fn(names::kConfirmBooking, "ConfirmBookingRole");
    fn("CancelBooking");
    fn("NotifyBooking");
    fn("Airline-BackLogOffice-v3");
    for (const char* table : {"FlightTable", names::kBookingTable, "PaymentTable", names::kLoyaltyTable})
      t.resources_.push_back({table, K::Table, {}});
    for (const char* bucket : {"flight-catalog-assets", names::kReceiptsBucket, names::kPublicBucket,
                               "amplify-booking-reports"})
      t.resources_.push_back({bucket, K::Bucket, {}});
    t.resources_.push_back({"BookingQueue", K::Queue, "BookingQueueServiceRole"});
    t.resources_.push_back({"BookingTopic", K::Topic, "BookingTopicServiceRole"});
    t.resources_.push_back({names::kApi, K::Api, "AirlineBookingApiServiceRole"});
    t.resources_.push_back({names::kFlow, K::Flow, "BookingFlowExecutionRole"});
    t.resources_.push_back({"BackOfficeSchedule", K::Schedule, "BackOfficeScheduleRole"});
    return t;
  }();
  return topology;
}

const SimResource& Topology::at(std::string_view name) const {
  auto it = std::find_if(resources_.begin(), resources_.end(), [&](const auto& r) { return r.name == name; });
  if (it == resources_.end()) throw std::out_of_range("unknown simulated resource " + std::string(name));
  return *it;
}

bool Topology::contains(std::string_view name) const {
  return std::any_of(resources_.begin(), resources_.end(), [&](const auto& r) { return r.name == name; });
}

std::size_t Topology::count(ResourceKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(resources_.begin(), resources_.end(), [&](const auto& r) { return r.kind == kind; }));
}

std::vector<Interaction> script_flow(FlowKind flow, AttackKind attack, const FlowVariant& variant) {
  using namespace names;
  std::vector<Interaction> s;
  switch (flow) {
    case FlowKind::Catalog:
      s.push_back(step(kApi, "SearchFlights", "Invoke"));
      s.push_back(step("SearchFlights", "FlightTable", "Query"));
      s.push_back(step("SearchFlights", "flight-catalog-assets", "GetObject"));
      break;
    case FlowKind::Loyalty:
      s.push_back(step(kApi, "GetLoyalty", "Invoke"));
      s.push_back(step("GetLoyalty", kLoyaltyTable, "GetItem"));
      break;
    case FlowKind::BackOffice:
      s.push_back(step("BackOfficeSchedule", "Airline-BackLogOffice-v3", "Invoke"));
      s.push_back(step("Airline-BackLogOffice-v3", kBookingTable, "Scan"));
      s.push_back(step("Airline-BackLogOffice-v3", "PaymentTable", "Scan"));
      s.push_back(step("Airline-BackLogOffice-v3", "amplify-booking-reports", "PutObject"));
      break;
    case FlowKind::Booking: {
      s.push_back(step(kApi, kFlow, "StartExecution"));
      for (int leg = 0; leg < (variant.round_trip ? 2 : 1); ++leg) {
        s.push_back(step(kFlow, "ReserveFlightSeat", "Invoke"));
        s.push_back(step("ReserveFlightSeat", "FlightTable", "UpdateItem"));
      }
      s.push_back(step(kFlow, kReserveBooking, "Invoke"));
      s.push_back(step(kReserveBooking, kBookingTable, "PutItem"));
      if (attack == AttackKind::DoW) {
        for (std::size_t i = 0; i < variant.dow_burst_size; ++i) {
          auto burst = step(kReserveBooking, kBookingTable, "GetItem");
          burst.deviates = true;
          s.push_back(std::move(burst));
        }
      }
      s.push_back(step(kFlow, "CollectPayment", "Invoke"));
      if (variant.user_error) {
        s.push_back(step("CollectPayment", "PaymentTable", "PutItem", "ConditionalCheckFailedException"));
        s.push_back(step(kFlow, "RefundPayment", "Invoke"));
        s.push_back(step("RefundPayment", "PaymentTable", "UpdateItem"));
        s.push_back(step(kFlow, "CancelBooking", "Invoke"));
        s.push_back(step("CancelBooking", kBookingTable, "DeleteItem"));
        s.push_back(step(kFlow, "ReleaseFlightSeat", "Invoke"));
        s.push_back(step("ReleaseFlightSeat", "FlightTable", "UpdateItem"));
        break;
      }
      s.push_back(step("CollectPayment", "PaymentTable", "PutItem"));
      s.push_back(step(kFlow, kConfirmBooking, "Invoke"));
      s.push_back(step(kConfirmBooking, kBookingTable, "UpdateItem"));
      {
        auto store = step(kConfirmBooking, kReceiptsBucket, "PutObject");
        if (attack == AttackKind::Leakage) {
          store.target = kPublicBucket;
          store.deviates = true;
        }
        s.push_back(std::move(store));
      }
      s.push_back(step(kFlow, "NotifyBooking", "Invoke"));
      s.push_back(step("NotifyBooking", "BookingTopic", "Publish"));
      s.push_back(step("NotifyBooking", "BookingQueue", "SendMessage"));
      s.push_back(step("BookingQueue", "IngestLoyalty", "Invoke"));
      s.push_back(step("IngestLoyalty", kLoyaltyTable, "UpdateItem"));
      break;
    }
  }
  return s;
}

void ScenarioConfig::validate() const {
  double sum = flow_mix[0] + flow_mix[1] + flow_mix[2];
  if (std::any_of(flow_mix.begin(), flow_mix.end(), [](double p) { return p < 0; }) || std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("flow_mix must be non-negative and sum to 1");
  for (double rate : {anomaly_rate, user_error_rate, round_trip_rate})
    if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("rates must lie in [0,1]");
  if (duration.count() <= 0) throw std::invalid_argument("duration must be positive");
}

Simulation simulate(const ScenarioConfig& config) {
  config.validate();
  const Topology& topo = Topology::airline_booking();
  Rng rng(config.seed);
  Simulation out;

  const Timestamp end = config.start + config.duration;
  Timestamp clock = config.start;
  std::size_t run = 0;
  bool full = false;

  auto emit = [&](ApiEvent e, const std::string& flow_id, bool deviates, AttackKind attack) {
    if (config.max_events && out.events.size() >= *config.max_events) {
      full = true;
      return;
    }
    out.labels.push_back({e.event_id, flow_id, deviates, deviates ? attack : AttackKind::None});
    out.events.push_back(std::move(e));
  };

  while (clock < end && !full) {
    ++run;
    FlowKind kind;
    AttackKind attack = AttackKind::None;
    FlowVariant variant;
    variant.dow_burst_size = config.dow_burst_size;

    const bool anomalous = rng.chance(config.anomaly_rate);
    const double pick = rng.unit();
    variant.round_trip = rng.chance(config.round_trip_rate);
    variant.user_error = rng.chance(config.user_error_rate);
    if (config.backoffice_every && run % config.backoffice_every == 0) {
      kind = FlowKind::BackOffice;
    } else if (anomalous && config.attack != AttackKind::None) {
      kind = FlowKind::Booking;
      attack = config.attack;
      variant.user_error = false;  // the attacked step must be reached
    } else if (pick < config.flow_mix[0]) {
      kind = FlowKind::Catalog;
    } else if (pick < config.flow_mix[0] + config.flow_mix[1]) {
      kind = FlowKind::Loyalty;
    } else {
      kind = FlowKind::Booking;
    }

    char flow_id[24];
    std::snprintf(flow_id, sizeof flow_id, "run-%06zu", run);
    out.flows.push_back({flow_id, kind, attack, variant, clock});

    const auto script = script_flow(kind, attack, variant);
    Timestamp t = clock;
    for (std::size_t i = 0; i < script.size() && !full; ++i) {
      const auto& step_i = script[i];
      const bool burst = step_i.deviates && attack == AttackKind::DoW;
      t += std::chrono::milliseconds{burst ? 20 : rng.between(40, 400)};

      const SimResource& caller = topo.at(step_i.caller);
      const SimResource& target = topo.at(step_i.target);
      char request_id[40];
      std::snprintf(request_id, sizeof request_id, "%s-%04zu", flow_id, i + 1);

      ApiEvent e;
      e.event_id = rng.uuid();
      e.request_id = request_id;
      e.event_name = step_i.event_name;
      e.timestamp = t;
      e.region = kRegion;
      e.error_code = step_i.error_code;
      describe_caller(caller, e, rng);
      describe_target(target, e, flow_id);
      const bool invokes_function = step_i.event_name == "Invoke" && target.kind == ResourceKind::Function;
      emit(std::move(e), flow_id, step_i.deviates, attack);

      if (invokes_function && !full) {
        // Platform execution record, correlated through the requestID.
        const auto duration = rng.between(20, 800);
        t += std::chrono::milliseconds{duration};
        ApiEvent p;
        p.event_id = rng.uuid();
        p.request_id = request_id;
        p.event_name = "FunctionExecution";
        p.timestamp = t;
        p.region = kRegion;
        p.identity_type = "AWSService";
        p.user_agent = "lambda.amazonaws.com";
        p.source_ip = "lambda.amazonaws.com";
        describe_target(target, p, flow_id);
        p.request_parameters["requestParameters_durationMs"] = std::to_string(duration);
        p.request_parameters["requestParameters_billedDurationMs"] = std::to_string((duration + 99) / 100 * 100);
        p.request_parameters["requestParameters_memorySizeMB"] = "256";
        emit(std::move(p), flow_id, false, attack);
      }
    }
    clock = t + std::chrono::milliseconds{rng.between(5000, 55000)};
  }

  std::ostringstream events_doc;
  if (config.format == InputFormat::Csv) write_csv(events_doc, out.events);
  else write_json_lines(events_doc, out.events);
  out.events_document = events_doc.str();

  std::ostringstream labels_doc;
  csv::write_record(labels_doc, {"event_id", "flow_instance", "label", "attack_type"});
  for (const auto& l : out.labels)
    csv::write_record(labels_doc, {l.event_id, l.flow_instance, l.attack ? "attack" : "benign",
                                   std::string(to_string(l.attack_type))});
  out.labels_document = labels_doc.str();
  return out;
}

}  // namespace actgraph::sim
