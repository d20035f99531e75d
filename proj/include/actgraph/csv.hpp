#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace actgraph::csv {

// RFC-4180 record reader. Quoted fields may span lines; "" inside quotes is a
// literal quote. Records end at LF or CRLF.
class Reader {
 public:
  enum class Status { Ok, End, Malformed };

  explicit Reader(std::istream& in) : in_(in) {}

  // On Malformed, `error` describes the problem and the reader has resynced
  // to the start of the next physical line.
  Status next(std::vector<std::string>& fields, std::string& error);

  // 1-based line on which the last returned record started.
  std::size_t record_line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

// Splits a single record held in memory.
bool split_record(std::string_view text, std::vector<std::string>& fields, std::string& error);

void write_field(std::ostream& out, std::string_view field);
void write_record(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace actgraph::csv
