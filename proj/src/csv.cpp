#include "actgraph/csv.hpp"

#include <sstream>

namespace actgraph::csv {

Reader::Status Reader::next(std::vector<std::string>& fields, std::string& error) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool after_quote = false;  // just closed a quoted section
  bool any = false;
  int c;

  // Skip blank lines between records.
  while ((c = in_.peek()) == '\n' || c == '\r') {
    in_.get();
    if (c == '\n') ++line_;
  }
  record_line_ = line_;

  auto resync = [&](std::string message) {
    error = std::move(message);
    int ch;
    while ((ch = in_.get()) != EOF && ch != '\n') {
    }
    if (ch == '\n') ++line_;
    return Status::Malformed;
  };

  while ((c = in_.get()) != EOF) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(static_cast<char>(c));
      }
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      after_quote = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && in_.peek() == '\n') in_.get();
      ++line_;
      fields.push_back(std::move(field));
      return Status::Ok;
    } else if (after_quote) {
      return resync("unexpected character after closing quote");
    } else if (c == '"') {
      if (!field.empty()) return resync("quote inside unquoted field");
      in_quotes = true;
    } else {
      field.push_back(static_cast<char>(c));
    }
  }
  if (in_quotes) {
    error = "unterminated quoted field";
    return Status::Malformed;
  }
  if (!any) return Status::End;
  fields.push_back(std::move(field));
  return Status::Ok;
}

bool split_record(std::string_view text, std::vector<std::string>& fields, std::string& error) {
  std::istringstream in{std::string(text)};
  Reader reader(in);
  auto status = reader.next(fields, error);
  if (status == Reader::Status::End) {
    fields.clear();
    error = "empty record";
    return false;
  }
  if (status == Reader::Status::Malformed) return false;
  std::vector<std::string> extra;
  std::string ignored;
  if (reader.next(extra, ignored) != Reader::Status::End) {
    error = "more than one record";
    return false;
  }
  return true;
}

void write_field(std::ostream& out, std::string_view field) {
  bool quote = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!quote) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void write_record(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    write_field(out, fields[i]);
  }
  out << '\n';
}

}  // namespace actgraph::csv
