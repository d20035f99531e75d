#include "actgraph/ingest.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "actgraph/csv.hpp"

namespace actgraph {

using nlohmann::json;

namespace {

std::string synthetic_id(std::string_view raw) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : raw) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "h-%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void flatten_into(const json& value, const std::string& prefix, std::map<std::string, std::string>& out) {
  if (value.is_object()) {
    for (auto it = value.begin(); it != value.end(); ++it) flatten_into(it.value(), prefix + "_" + it.key(), out);
  } else if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) flatten_into(value[i], prefix + "_" + std::to_string(i), out);
  } else if (value.is_string()) {
    if (!value.get_ref<const std::string&>().empty()) out[prefix] = value.get<std::string>();
  } else if (!value.is_null()) {
    out[prefix] = value.dump();
  }
}

std::string string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

void finish(ApiEvent& e, std::string_view timestamp_text, std::string_view raw, std::size_t line) {
  if (e.event_source.empty() || e.event_name.empty() || timestamp_text.empty()) {
    std::string missing = e.event_source.empty() ? "eventSource" : e.event_name.empty() ? "eventName" : "date";
    throw RecordError(skip_reason::kMissingField, "missing required field " + missing, line);
  }
  auto ts = parse_iso8601(timestamp_text);
  if (!ts) throw RecordError(skip_reason::kBadTimestamp, "unparseable timestamp '" + std::string(timestamp_text) + "'", line);
  e.timestamp = *ts;
  if (e.event_id.empty()) e.event_id = synthetic_id(raw);
}

int resource_index(std::string_view column, std::string_view& leaf) {
  // resources_<n>_<leaf>
  constexpr std::string_view prefix = "resources_";
  if (!column.starts_with(prefix)) return -1;
  column.remove_prefix(prefix.size());
  auto sep = column.find('_');
  if (sep == 0 || sep == std::string_view::npos) return -1;
  int n = 0;
  for (char c : column.substr(0, sep)) {
    if (c < '0' || c > '9') return -1;
    n = n * 10 + (c - '0');
  }
  leaf = column.substr(sep + 1);
  return n;
}

}  // namespace

RecordError::RecordError(std::string reason, std::string detail, std::size_t line, std::size_t byte)
    : std::runtime_error("line " + std::to_string(line) + ": " + detail),
      reason_(std::move(reason)),
      line_(line),
      byte_(byte) {}

std::optional<InputFormat> input_format_from_string(std::string_view name) {
  if (name == "json-lines" || name == "jsonl") return InputFormat::JsonLines;
  if (name == "csv") return InputFormat::Csv;
  return std::nullopt;
}

std::string_view to_string(InputFormat format) { return format == InputFormat::Csv ? "csv" : "json-lines"; }

const std::vector<std::string>& standard_csv_columns() {
  static const std::vector<std::string> columns{
      "eventID",           "requestID",
      "eventSource",       "eventName",
      "date",              "awsRegion",
      "sourceIPAddress",   "userAgent",
      "userIdentity_type", "userIdentity_principalId",
      "userIdentity_arn",  "resources_0_type",
      "resources_0_ARN",   "requestParameters_tableName",
      "requestParameters_bucketName", "errorCode"};
  return columns;
}

CsvSchema::CsvSchema(std::vector<std::string> header) : columns_(std::move(header)) {
  // Tolerate a UTF-8 byte-order mark on the first column.
  if (!columns_.empty() && columns_[0].starts_with("\xEF\xBB\xBF")) columns_[0].erase(0, 3);
}

ApiEvent parse_record(std::string_view json_line, std::size_t line) {
  json doc;
  try {
    doc = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw RecordError(skip_reason::kMalformed, e.what(), line, e.byte);
  }
  if (!doc.is_object()) throw RecordError(skip_reason::kMalformed, "record is not a JSON object", line);

  ApiEvent e;
  e.event_id = string_field(doc, "eventID");
  e.request_id = string_field(doc, "requestID");
  e.event_source = string_field(doc, "eventSource");
  e.event_name = string_field(doc, "eventName");
  e.region = string_field(doc, "awsRegion");
  e.source_ip = string_field(doc, "sourceIPAddress");
  e.user_agent = string_field(doc, "userAgent");
  e.error_code = string_field(doc, "errorCode");
  if (auto it = doc.find("userIdentity"); it != doc.end() && it->is_object()) {
    e.identity_type = string_field(*it, "type");
    e.principal_id = string_field(*it, "principalId");
    e.identity_arn = string_field(*it, "arn");
  }
  if (auto it = doc.find("resources"); it != doc.end() && it->is_array()) {
    for (const auto& r : *it) {
      if (!r.is_object()) continue;
      ResourceRef ref{string_field(r, "type"), string_field(r, "ARN")};
      if (!ref.type.empty() || !ref.arn.empty()) e.resources.push_back(std::move(ref));
    }
  }
  if (auto it = doc.find("requestParameters"); it != doc.end() && !it->is_null()) {
    flatten_into(*it, "requestParameters", e.request_parameters);
  }
  std::string date = string_field(doc, "date");
  if (date.empty()) date = string_field(doc, "eventTime");
  finish(e, date, json_line, line);
  return e;
}

ApiEvent parse_record(const CsvSchema& schema, const std::vector<std::string>& fields, std::size_t line) {
  const auto& cols = schema.columns();
  if (fields.size() != cols.size()) {
    throw RecordError(skip_reason::kMalformed,
                      "expected " + std::to_string(cols.size()) + " fields, found " + std::to_string(fields.size()),
                      line);
  }
  ApiEvent e;
  std::string date;
  std::map<int, ResourceRef> resources;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const std::string& col = cols[i];
    const std::string& v = fields[i];
    std::string_view leaf;
    if (col == "eventID") e.event_id = v;
    else if (col == "requestID") e.request_id = v;
    else if (col == "eventSource") e.event_source = v;
    else if (col == "eventName") e.event_name = v;
    else if (col == "date" || col == "eventTime") { if (date.empty()) date = v; }
    else if (col == "awsRegion") e.region = v;
    else if (col == "sourceIPAddress") e.source_ip = v;
    else if (col == "userAgent") e.user_agent = v;
    else if (col == "userIdentity_type") e.identity_type = v;
    else if (col == "userIdentity_principalId") e.principal_id = v;
    else if (col == "userIdentity_arn") e.identity_arn = v;
    else if (col == "errorCode") e.error_code = v;
    else if (col.starts_with(kRequestParamPrefix)) { if (!v.empty()) e.request_parameters[col] = v; }
    else if (int n = resource_index(col, leaf); n >= 0) {
      if (leaf == "type") resources[n].type = v;
      else if (leaf == "ARN") resources[n].arn = v;
    }
  }
  for (auto& [n, ref] : resources)
    if (!ref.type.empty() || !ref.arn.empty()) e.resources.push_back(std::move(ref));

  std::string raw;
  for (const auto& f : fields) raw += f + '\x1f';
  finish(e, date, raw, line);
  return e;
}

ApiEvent parse_record(const CsvSchema& schema, std::string_view csv_row, std::size_t line) {
  std::vector<std::string> fields;
  std::string error;
  if (!csv::split_record(csv_row, fields, error)) throw RecordError(skip_reason::kMalformed, error, line);
  return parse_record(schema, fields, line);
}

IngestResult load_stream(std::istream& in, InputFormat format) {
  IngestResult result;
  auto& report = result.report;
  std::set<std::string, std::less<>> seen_ids;

  auto accept = [&](ApiEvent e) {
    if (!seen_ids.insert(e.event_id).second) {
      ++report.skipped;
      ++report.skip_reasons[skip_reason::kDuplicateId];
      return;
    }
    ++report.parsed;
    if (!report.time_span) {
      report.time_span = std::pair{e.timestamp, e.timestamp};
    } else {
      report.time_span->first = std::min(report.time_span->first, e.timestamp);
      report.time_span->second = std::max(report.time_span->second, e.timestamp);
    }
    result.events.push_back(std::move(e));
  };
  auto reject = [&](const std::string& reason) {
    ++report.skipped;
    ++report.skip_reasons[reason];
  };

  if (format == InputFormat::JsonLines) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      ++report.total_records;
      try {
        accept(parse_record(line, line_no));
      } catch (const RecordError& err) {
        reject(err.reason());
      }
    }
  } else {
    csv::Reader reader(in);
    std::vector<std::string> fields;
    std::string error;
    auto status = reader.next(fields, error);
    if (status != csv::Reader::Status::Ok) {
      if (status == csv::Reader::Status::Malformed) throw IoError("unreadable CSV header: " + error);
      return result;
    }
    CsvSchema schema(fields);
    while ((status = reader.next(fields, error)) != csv::Reader::Status::End) {
      ++report.total_records;
      if (status == csv::Reader::Status::Malformed) {
        reject(skip_reason::kMalformed);
        continue;
      }
      try {
        accept(parse_record(schema, fields, reader.record_line()));
      } catch (const RecordError& err) {
        reject(err.reason());
      }
    }
  }
  if (in.bad()) throw IoError("read error while ingesting");
  return result;
}

IngestResult load_file(const std::filesystem::path& path, InputFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return load_stream(in, format);
}

std::vector<ApiEvent> correlate_invocations(std::vector<ApiEvent> events) {
  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < events.size(); ++i)
    if (!events[i].request_id.empty()) groups[events[i].request_id].push_back(i);

  for (auto& [id, members] : groups) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = events[a];
      const auto& y = events[b];
      return std::tie(x.timestamp, x.event_id) < std::tie(y.timestamp, y.event_id);
    });
    std::map<std::string, std::string> merged;
    for (std::size_t i : members)
      for (const auto& kv : events[i].request_parameters) merged.insert(kv);
    for (std::size_t i : members)
      for (const auto& kv : merged) events[i].request_parameters.insert(kv);
  }
  return events;
}

std::string to_json_line(const ApiEvent& e) {
  // ordered_json keeps the documented field order stable across runs.
  nlohmann::ordered_json j;
  j["eventID"] = e.event_id;
  if (!e.request_id.empty()) j["requestID"] = e.request_id;
  j["eventSource"] = e.event_source;
  j["eventName"] = e.event_name;
  j["date"] = format_iso8601(e.timestamp);
  j["awsRegion"] = e.region;
  if (!e.source_ip.empty()) j["sourceIPAddress"] = e.source_ip;
  if (!e.user_agent.empty()) j["userAgent"] = e.user_agent;
  j["resources"] = nlohmann::ordered_json::array();
  for (const auto& r : e.resources) j["resources"].push_back({{"type", r.type}, {"ARN", r.arn}});
  j["userIdentity"] = {{"type", e.identity_type}, {"principalId", e.principal_id}, {"arn", e.identity_arn}};
  if (!e.request_parameters.empty()) {
    auto& params = j["requestParameters"] = nlohmann::ordered_json::object();
    const std::size_t skip = std::string_view(kRequestParamPrefix).size();
    for (const auto& [k, v] : e.request_parameters) params[k.substr(std::min(skip, k.size()))] = v;
  } else {
    j["requestParameters"] = nullptr;
  }
  if (!e.error_code.empty()) j["errorCode"] = e.error_code;
  return j.dump();
}

void write_json_lines(std::ostream& out, const std::vector<ApiEvent>& events) {
  for (const auto& e : events) out << to_json_line(e) << '\n';
}

std::vector<std::string> csv_columns_for(const std::vector<ApiEvent>& events) {
  std::vector<std::string> cols = standard_csv_columns();
  std::set<std::string> have(cols.begin(), cols.end());
  std::set<std::string> params;
  std::size_t max_resources = 1;
  for (const auto& e : events) {
    for (const auto& kv : e.request_parameters)
      if (!have.count(kv.first)) params.insert(kv.first);
    max_resources = std::max(max_resources, e.resources.size());
  }
  for (std::size_t n = 1; n < max_resources; ++n) {
    cols.push_back("resources_" + std::to_string(n) + "_type");
    cols.push_back("resources_" + std::to_string(n) + "_ARN");
  }
  cols.insert(cols.end(), params.begin(), params.end());
  return cols;
}

void write_csv(std::ostream& out, const std::vector<ApiEvent>& events) {
  const auto cols = csv_columns_for(events);
  csv::write_record(out, cols);
  std::vector<std::string> row;
  for (const auto& e : events) {
    row.clear();
    for (const auto& col : cols) {
      std::string_view leaf;
      if (col == "eventID") row.push_back(e.event_id);
      else if (col == "requestID") row.push_back(e.request_id);
      else if (col == "eventSource") row.push_back(e.event_source);
      else if (col == "eventName") row.push_back(e.event_name);
      else if (col == "date") row.push_back(format_iso8601(e.timestamp));
      else if (col == "awsRegion") row.push_back(e.region);
      else if (col == "sourceIPAddress") row.push_back(e.source_ip);
      else if (col == "userAgent") row.push_back(e.user_agent);
      else if (col == "userIdentity_type") row.push_back(e.identity_type);
      else if (col == "userIdentity_principalId") row.push_back(e.principal_id);
      else if (col == "userIdentity_arn") row.push_back(e.identity_arn);
      else if (col == "errorCode") row.push_back(e.error_code);
      else if (int n = resource_index(col, leaf); n >= 0) {
        auto idx = static_cast<std::size_t>(n);
        if (idx >= e.resources.size()) row.emplace_back();
        else row.push_back(leaf == "type" ? e.resources[idx].type : e.resources[idx].arn);
      } else {
        auto it = e.request_parameters.find(col);
        row.push_back(it == e.request_parameters.end() ? std::string() : it->second);
      }
    }
    csv::write_record(out, row);
  }
}

}  // namespace actgraph
