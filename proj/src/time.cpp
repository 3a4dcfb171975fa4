#include "txtopo/time.hpp"

#include <cstdio>

#include "txtopo/error.hpp"

namespace txtopo {

namespace {

using namespace std::chrono;

bool is_digit(char c) { return c >= '0' && c <= '9'; }

int read_digits(std::string_view text, std::size_t pos, std::size_t count, std::string_view whole) {
  if (pos + count > text.size()) throw ParseError("truncated timestamp: " + std::string(whole));
  int value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = text[pos + i];
    if (!is_digit(c)) throw ParseError("expected digit in timestamp: " + std::string(whole));
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c, std::string_view whole) {
  if (pos >= text.size() || text[pos] != c) {
    throw ParseError("malformed timestamp: " + std::string(whole));
  }
}

Date make_date(int y, int m, int d, std::string_view whole) {
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParseError("invalid calendar date: " + std::string(whole));
  return sys_days{ymd};
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10) throw ParseError("expected YYYY-MM-DD date: " + std::string(text));
  const int y = read_digits(text, 0, 4, text);
  expect(text, 4, '-', text);
  const int m = read_digits(text, 5, 2, text);
  expect(text, 7, '-', text);
  const int d = read_digits(text, 8, 2, text);
  return make_date(y, m, d, text);
}

Timestamp parse_rfc3339(std::string_view text) {
  if (text.size() < 20) throw ParseError("timestamp too short: " + std::string(text));
  const Date date = parse_date(text.substr(0, 10));
  if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') {
    throw ParseError("malformed timestamp: " + std::string(text));
  }
  const int hh = read_digits(text, 11, 2, text);
  expect(text, 13, ':', text);
  const int mm = read_digits(text, 14, 2, text);
  expect(text, 16, ':', text);
  const int ss = read_digits(text, 17, 2, text);
  if (hh > 23 || mm > 59 || ss > 60) throw ParseError("time of day out of range: " + std::string(text));

  std::size_t pos = 19;
  long long millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < text.size() && is_digit(text[pos])) {
      if (digits < 3) millis = millis * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) throw ParseError("empty fractional seconds: " + std::string(text));
    for (std::size_t i = digits; i < 3; ++i) millis *= 10;
  }

  if (pos >= text.size()) throw ParseError("missing UTC offset: " + std::string(text));
  long long offset_minutes = 0;
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '-' ? -1 : 1;
    const int oh = read_digits(text, pos + 1, 2, text);
    expect(text, pos + 3, ':', text);
    const int om = read_digits(text, pos + 4, 2, text);
    offset_minutes = sign * (oh * 60 + om);
    pos += 6;
  } else {
    throw ParseError("malformed UTC offset: " + std::string(text));
  }
  if (pos != text.size()) throw ParseError("trailing characters in timestamp: " + std::string(text));

  const auto local = sys_time<milliseconds>{date} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{millis};
  return local - minutes{offset_minutes};
}

std::string format_date(Date d) {
  const year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_rfc3339(Timestamp ts) {
  const Date d = floor<days>(ts);
  const auto ms = (ts - d).count();
  const long long h = ms / 3'600'000;
  const long long m = (ms / 60'000) % 60;
  const long long s = (ms / 1000) % 60;
  const long long frac = ms % 1000;
  char buf[48];
  if (frac != 0) {
    std::snprintf(buf, sizeof buf, "%sT%02lld:%02lld:%02lld.%03lldZ", format_date(d).c_str(), h, m, s, frac);
  } else {
    std::snprintf(buf, sizeof buf, "%sT%02lld:%02lld:%02lldZ", format_date(d).c_str(), h, m, s);
  }
  return buf;
}

Timestamp monday_on_or_before(Timestamp ts) {
  const Date d = floor<days>(ts);
  const weekday wd{d};
  const auto back = days{(wd.c_encoding() + 6) % 7};
  return Timestamp{d - back};
}

}  // namespace txtopo
