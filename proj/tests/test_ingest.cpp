#include <doctest.h>

#include <sstream>

#include "txtopo/error.hpp"
#include "txtopo/ingest.hpp"
#include "txtopo/time.hpp"

using namespace txtopo;

namespace {

TransactionParseResult parse(const std::string& body, ParseMode mode = ParseMode::lenient) {
  std::istringstream in("timestamp,sender,receiver,amount\n" + body);
  TransactionFormat format;
  format.mode = mode;
  return parse_transactions(in, format);
}

TransactionRecord rec(const char* ts, const char* from, const char* to, double amount) {
  return {parse_rfc3339(ts), from, to, amount};
}

}  // namespace

TEST_CASE("timestamps parse in UTC with offsets and fractions") {
  CHECK(format_rfc3339(parse_rfc3339("2020-01-06T00:00:00Z")) == "2020-01-06T00:00:00Z");
  CHECK(parse_rfc3339("2020-01-06T02:00:00+02:00") == parse_rfc3339("2020-01-06T00:00:00Z"));
  CHECK(format_rfc3339(parse_rfc3339("2020-01-06T00:00:00.250Z")) == "2020-01-06T00:00:00.250Z");
  CHECK_THROWS_AS(parse_rfc3339("2020-13-06T00:00:00Z"), ParseError);
  CHECK_THROWS_AS(parse_rfc3339("yesterday"), ParseError);
  CHECK(format_rfc3339(monday_on_or_before(parse_rfc3339("2020-01-12T23:59:59Z"))) == "2020-01-06T00:00:00Z");
}

TEST_CASE("a well-formed line becomes one record") {
  const auto r = parse("2020-01-06T00:00:00Z,A,B,5.0\n");
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0] == rec("2020-01-06T00:00:00Z", "A", "B", 5.0));
  CHECK(r.issues.empty());
}

TEST_CASE("self-transfers and non-positive amounts are record-level errors") {
  const auto r = parse("2020-01-06T00:00:00Z,A,A,5.0\n2020-01-06T00:00:00Z,A,B,-1\n2020-01-06T00:00:00Z,A,B,0\n");
  CHECK(r.records.empty());
  REQUIRE(r.issues.size() == 3);
  CHECK(r.issues[0].line == 2);
  CHECK(r.self_transfers_skipped == 1);
  CHECK_THROWS_AS(parse("2020-01-06T00:00:00Z,A,A,5.0\n", ParseMode::strict), ParseError);
  CHECK_THROWS_AS(parse("2020-01-06T00:00:00Z,A,B,-1\n", ParseMode::strict), ParseError);
}

TEST_CASE("malformed lines are reported in lenient mode") {
  const auto r = parse("bad,A,B,1\n2020-01-06T00:00:00Z,A,B\n2020-01-06T00:00:00Z,A,B,x\n2020-01-06T00:00:00Z,A,B,2\n");
  CHECK(r.records.size() == 1);
  CHECK(r.issues.size() == 3);
}

TEST_CASE("a missing header is rejected") {
  std::istringstream in("2020-01-06T00:00:00Z,A,B,5.0\n");
  CHECK_THROWS_AS(parse_transactions(in), ParseError);
}

TEST_CASE("records come out in timestamp order, stable for ties") {
  const auto r = parse("2020-01-07T00:00:00Z,C,D,1\n2020-01-06T00:00:00Z,A,B,1\n2020-01-07T00:00:00Z,E,F,1\n");
  REQUIRE(r.records.size() == 3);
  CHECK(r.records[0].sender == "A");
  CHECK(r.records[1].sender == "C");
  CHECK(r.records[2].sender == "E");
}

TEST_CASE("write then parse round-trips records exactly") {
  const std::vector<TransactionRecord> records{rec("2020-01-06T00:00:00Z", "A", "B", 0.1),
                                               rec("2020-01-06T00:00:01.5Z", "B", "C", 1e-7),
                                               rec("2020-01-07T00:00:00Z", "C", "A", 123456789.123)};
  std::ostringstream out;
  write_transactions(out, records);
  std::istringstream in(out.str());
  CHECK(parse_transactions(in).records == records);
}

TEST_CASE("weekly partition uses half-open windows from the anchor") {
  const Timestamp anchor = parse_rfc3339("2020-01-06T00:00:00Z");
  SUBCASE("days 0, 3, 8") {
    const std::vector<TransactionRecord> r{rec("2020-01-06T00:00:00Z", "A", "B", 1),
                                           rec("2020-01-09T00:00:00Z", "A", "B", 1),
                                           rec("2020-01-14T00:00:00Z", "A", "B", 1)};
    const auto w = partition_weeks(r, anchor);
    REQUIRE(w.size() == 2);
    CHECK(w[0].records.size() == 2);
    CHECK(w[1].records.size() == 1);
    CHECK(w[1].start == anchor + kWeek);
  }
  SUBCASE("empty input") { CHECK(partition_weeks({}, anchor).empty()); }
  SUBCASE("boundary instant goes to the later window") {
    const std::vector<TransactionRecord> r{rec("2020-01-06T00:00:00Z", "A", "B", 1),
                                           rec("2020-01-13T00:00:00Z", "A", "B", 1)};
    const auto w = partition_weeks(r, anchor);
    REQUIRE(w.size() == 2);
    CHECK(w[0].records.size() == 1);
    CHECK(w[1].records.size() == 1);
  }
  SUBCASE("quiet weeks in between are kept empty") {
    const std::vector<TransactionRecord> r{rec("2020-01-06T00:00:00Z", "A", "B", 1),
                                           rec("2020-01-27T00:00:00Z", "A", "B", 1)};
    const auto w = partition_weeks(r, anchor);
    REQUIRE(w.size() == 4);
    CHECK(w[1].records.empty());
    CHECK(w[2].records.empty());
  }
  SUBCASE("records before the anchor") {
    const std::vector<TransactionRecord> r{rec("2020-01-05T00:00:00Z", "A", "B", 1)};
    CHECK_THROWS_AS(partition_weeks(r, anchor), DataError);
  }
}

TEST_CASE("series files parse, sort and align to weeks") {
  std::istringstream price("date,price\n2020-01-19,2.0\n2020-01-12,1.0\n");
  const auto p = parse_price_csv(price);
  REQUIRE(p.points.size() == 2);
  CHECK(format_date(p.points[0].first) == "2020-01-12");
  const Timestamp anchor = parse_rfc3339("2020-01-06T00:00:00Z");
  const auto weekly = align_weekly(p, anchor, 3);
  CHECK(weekly[0] == 1.0);
  CHECK(weekly[1] == 2.0);
  CHECK_FALSE(weekly[2].has_value());
  CHECK(format_date(week_end_date(anchor, 0)) == "2020-01-12");
  CHECK(week_of(parse_date("2020-01-13"), anchor) == 1);

  std::istringstream dup("date,price\n2020-01-12,1.0\n2020-01-12,2.0\n");
  CHECK_THROWS_AS(parse_price_csv(dup), ParseError);
  std::istringstream wrong("day,price\n2020-01-12,1.0\n");
  CHECK_THROWS_AS(parse_price_csv(wrong), ParseError);

  std::istringstream trends("date,term,frequency\n2020-01-12,democrats,40\n2020-01-12,republicans,35\n");
  const auto t = parse_trends_csv(trends);
  CHECK(t.size() == 2);
  CHECK(t.at("republicans").points[0].second == 35.0);
}
