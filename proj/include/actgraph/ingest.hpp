#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "actgraph/event.hpp"

namespace actgraph {

enum class InputFormat { JsonLines, Csv };

std::optional<InputFormat> input_format_from_string(std::string_view name);
std::string_view to_string(InputFormat format);

namespace skip_reason {
inline constexpr const char* kMalformed = "malformed-syntax";
inline constexpr const char* kMissingField = "missing-required-field";
inline constexpr const char* kBadTimestamp = "bad-timestamp";
inline constexpr const char* kDuplicateId = "duplicate-event-id";
}  // namespace skip_reason

// A record that could not become an ApiEvent. `reason` is one of the
// skip_reason tags; line/byte locate the problem when known (1-based line,
// 0-based byte offset within the record).
class RecordError : public std::runtime_error {
 public:
  RecordError(std::string reason, std::string detail, std::size_t line = 0, std::size_t byte = 0);

  const std::string& reason() const { return reason_; }
  std::size_t line() const { return line_; }
  std::size_t byte() const { return byte_; }

 private:
  std::string reason_;
  std::size_t line_;
  std::size_t byte_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Column layout of a flattened CSV export, built from its header row.
class CsvSchema {
 public:
  explicit CsvSchema(std::vector<std::string> header);

  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

// The fixed column set; writers append extra requestParameters_* and
// resources_N_* columns when a batch carries them.
const std::vector<std::string>& standard_csv_columns();

ApiEvent parse_record(std::string_view json_line, std::size_t line = 1);
ApiEvent parse_record(const CsvSchema& schema, const std::vector<std::string>& fields, std::size_t line = 1);
ApiEvent parse_record(const CsvSchema& schema, std::string_view csv_row, std::size_t line = 1);

struct IngestReport {
  std::size_t total_records = 0;
  std::size_t parsed = 0;
  std::size_t skipped = 0;
  std::map<std::string, std::size_t> skip_reasons;
  std::optional<std::pair<Timestamp, Timestamp>> time_span;
};

struct IngestResult {
  std::vector<ApiEvent> events;
  IngestReport report;
};

// Per-record failures are counted and skipped; a CSV without a usable header
// skips nothing and parses nothing.
IngestResult load_stream(std::istream& in, InputFormat format);
IngestResult load_file(const std::filesystem::path& path, InputFormat format);

// Records sharing a non-empty request_id receive the union of their request
// parameters (a record's own values win; otherwise the earliest correlate's).
// Order and count are unchanged.
std::vector<ApiEvent> correlate_invocations(std::vector<ApiEvent> events);

std::string to_json_line(const ApiEvent& event);
void write_json_lines(std::ostream& out, const std::vector<ApiEvent>& events);
std::vector<std::string> csv_columns_for(const std::vector<ApiEvent>& events);
void write_csv(std::ostream& out, const std::vector<ApiEvent>& events);

}  // namespace actgraph
