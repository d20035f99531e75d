#include <doctest.h>

#include <sstream>

#include "actgraph/csv.hpp"
#include "actgraph/time.hpp"

using namespace actgraph;
using namespace std::chrono;

TEST_CASE("iso8601 parsing") {
  auto base = sys_days{year{2023} / 5 / 1} + hours{12};
  CHECK(parse_iso8601("2023-05-01T12:00:00Z") == Timestamp{base});
  CHECK(parse_iso8601("2023-05-01T12:00:00") == Timestamp{base});
  CHECK(parse_iso8601("2023-05-01T14:00:00+02:00") == Timestamp{base});
  CHECK(parse_iso8601("2023-05-01T07:30:00-0430") == Timestamp{base});
  CHECK(parse_iso8601("2023-05-01T12:00:00.2509Z") == Timestamp{base + milliseconds{250}});
  CHECK(parse_iso8601("2023-05-01 12:00:00Z") == Timestamp{base});

  CHECK_FALSE(parse_iso8601(""));
  CHECK_FALSE(parse_iso8601("2023-02-30T00:00:00Z"));
  CHECK_FALSE(parse_iso8601("2023-05-01T24:00:00Z"));
  CHECK_FALSE(parse_iso8601("2023-05-01T12:00:00.Z"));
  CHECK_FALSE(parse_iso8601("2023-05-01T12:00:00Zjunk"));
  CHECK_FALSE(parse_iso8601("yesterday"));
}

TEST_CASE("iso8601 formatting round-trips") {
  for (const char* text : {"2023-05-01T12:00:00Z", "1999-12-31T23:59:59.001Z", "2024-02-29T00:00:00.5Z"}) {
    auto ts = parse_iso8601(text);
    REQUIRE(ts);
    CHECK(parse_iso8601(format_iso8601(*ts)) == ts);
  }
  CHECK(format_iso8601(*parse_iso8601("2023-05-01T12:00:00.000Z")) == "2023-05-01T12:00:00Z");
  CHECK(format_iso8601(*parse_iso8601("2023-05-01T12:00:00.120Z")) == "2023-05-01T12:00:00.120Z");
}

TEST_CASE("windows are half-open") {
  auto t = *parse_iso8601("2023-05-01T00:00:00Z");
  TimeWindow w{t, t + seconds{10}};
  CHECK(w.contains(t));
  CHECK(w.contains(t + seconds{9}));
  CHECK_FALSE(w.contains(t + seconds{10}));
  CHECK(TimeWindow{t, t}.valid());
  CHECK_FALSE(TimeWindow{t, t}.contains(t));
  CHECK_FALSE(TimeWindow{t + seconds{1}, t}.valid());
  CHECK(TimeWindow::everything().contains(t));
}

TEST_CASE("csv reader handles quoting and line breaks") {
  std::istringstream in("a,\"b,c\",\"say \"\"hi\"\"\"\r\n\"multi\nline\",x,\n\nlast");
  csv::Reader r(in);
  std::vector<std::string> f;
  std::string err;
  REQUIRE(r.next(f, err) == csv::Reader::Status::Ok);
  CHECK(f == std::vector<std::string>{"a", "b,c", "say \"hi\""});
  REQUIRE(r.next(f, err) == csv::Reader::Status::Ok);
  CHECK(f == std::vector<std::string>{"multi\nline", "x", ""});
  CHECK(r.record_line() == 2);
  REQUIRE(r.next(f, err) == csv::Reader::Status::Ok);  // blank line skipped
  CHECK(f == std::vector<std::string>{"last"});
  CHECK(r.record_line() == 5);
  CHECK(r.next(f, err) == csv::Reader::Status::End);
}

TEST_CASE("csv reader resyncs after a malformed record") {
  std::istringstream in("ok,1\nbad\"quote,2\nok,3\n");
  csv::Reader r(in);
  std::vector<std::string> f;
  std::string err;
  CHECK(r.next(f, err) == csv::Reader::Status::Ok);
  CHECK(r.next(f, err) == csv::Reader::Status::Malformed);
  CHECK_FALSE(err.empty());
  REQUIRE(r.next(f, err) == csv::Reader::Status::Ok);
  CHECK(f == std::vector<std::string>{"ok", "3"});
}

TEST_CASE("csv writer output parses back") {
  std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", "new\nline", "", " padded "};
  std::ostringstream out;
  csv::write_record(out, fields);
  std::vector<std::string> back;
  std::string err;
  std::string text = out.str();
  REQUIRE(text.back() == '\n');
  text.pop_back();
  REQUIRE(csv::split_record(text, back, err));
  CHECK(back == fields);
}
