#include "txtopo/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <tuple>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "txtopo/error.hpp"

namespace txtopo {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

std::optional<double> parse_double(std::string_view s) {
  double value = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

// Reads a CSV with a fixed header and hands each data row to `row`.
template <typename RowFn>
void for_each_row(std::istream& in, std::string_view expected_header, std::size_t columns, RowFn&& row) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (view != expected_header) {
        throw ParseError("expected header '" + std::string(expected_header) + "' but found '" + std::string(view) + "'");
      }
      continue;
    }
    const auto fields = split(view, ',');
    if (fields.size() != columns) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " fields");
    }
    row(fields, line_no);
  }
}

TimeSeries finish_series(SeriesKind kind, std::vector<std::pair<Date, double>> points) {
  std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].first == points[i - 1].first) {
      throw ParseError("duplicate date " + format_date(points[i].first));
    }
  }
  return TimeSeries{kind, std::move(points)};
}

TimeSeries parse_two_column(std::istream& in, std::string_view header, SeriesKind kind) {
  std::vector<std::pair<Date, double>> points;
  for_each_row(in, header, 2, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    const auto value = parse_double(f[1]);
    if (!value || !std::isfinite(*value)) {
      throw ParseError("line " + std::to_string(line_no) + ": bad number '" + std::string(f[1]) + "'");
    }
    points.emplace_back(parse_date(f[0]), *value);
  });
  return finish_series(kind, std::move(points));
}

void write_series(std::ostream& out, std::string_view header, const TimeSeries& series) {
  out << header << '\n';
  for (const auto& [date, value] : series.points) out << format_date(date) << ',' << format_number(value) << '\n';
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

TransactionParseResult parse_transactions(std::istream& in, const TransactionFormat& format) {
  TransactionParseResult result;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = format.has_header;

  const auto report = [&](std::string message) {
    if (format.mode == ParseMode::strict) {
      throw ParseError("line " + std::to_string(line_no) + ": " + message);
    }
    result.issues.push_back({line_no, std::move(message)});
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split(view, format.delimiter);
    if (header_pending) {
      header_pending = false;
      if (fields.size() != 4 || fields[0] != "timestamp" || fields[1] != "sender" || fields[2] != "receiver" ||
          fields[3] != "amount") {
        throw ParseError("expected header timestamp,sender,receiver,amount");
      }
      continue;
    }
    if (fields.size() != 4) {
      report("expected 4 fields, found " + std::to_string(fields.size()));
      continue;
    }
    TransactionRecord rec;
    try {
      rec.timestamp = parse_rfc3339(fields[0]);
    } catch (const ParseError& e) {
      report(std::string("unparseable timestamp: ") + e.what());
      continue;
    }
    if (fields[1].empty() || fields[2].empty()) {
      report("empty wallet identifier");
      continue;
    }
    const auto amount = parse_double(fields[3]);
    if (!amount || !std::isfinite(*amount)) {
      report("unparseable amount '" + std::string(fields[3]) + "'");
      continue;
    }
    if (*amount <= 0.0) {
      report("non-positive amount " + std::string(fields[3]));
      continue;
    }
    if (fields[1] == fields[2]) {
      report("self-transfer by " + std::string(fields[1]));
      ++result.self_transfers_skipped;
      continue;
    }
    rec.sender = std::string(fields[1]);
    rec.receiver = std::string(fields[2]);
    rec.amount = *amount;
    result.records.push_back(std::move(rec));
  }
  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return result;
}

TransactionParseResult read_transactions_file(const std::filesystem::path& path, const TransactionFormat& format) {
  auto in = open_input(path);
  return parse_transactions(in, format);
}

void write_transactions(std::ostream& out, std::span<const TransactionRecord> records) {
  out << "timestamp,sender,receiver,amount\n";
  for (const auto& r : records) {
    out << format_rfc3339(r.timestamp) << ',' << r.sender << ',' << r.receiver << ',' << format_number(r.amount)
        << '\n';
  }
}

Timestamp default_anchor(std::span<const TransactionRecord> records) {
  if (records.empty()) throw DataError("cannot derive a week anchor from an empty record set");
  const auto earliest = std::min_element(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return a.timestamp < b.timestamp;
  });
  return monday_on_or_before(earliest->timestamp);
}

std::vector<WeekWindow> partition_weeks(std::span<const TransactionRecord> records, Timestamp anchor) {
  std::vector<WeekWindow> windows;
  if (records.empty()) return windows;
  if (!std::is_sorted(records.begin(), records.end(),
                      [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; })) {
    throw PreconditionError("partition_weeks requires timestamp-sorted records");
  }
  if (records.front().timestamp < anchor) {
    throw DataError("record at " + format_rfc3339(records.front().timestamp) + " precedes anchor " +
                    format_rfc3339(anchor));
  }
  const auto week_index = [&](Timestamp ts) { return static_cast<int>((ts - anchor) / kWeek); };
  const int n_weeks = week_index(records.back().timestamp) + 1;
  windows.resize(static_cast<std::size_t>(n_weeks));
  for (int t = 0; t < n_weeks; ++t) {
    windows[t].index = t;
    windows[t].start = anchor + t * kWeek;
    windows[t].end = anchor + (t + 1) * kWeek;
  }
  for (const auto& r : records) windows[static_cast<std::size_t>(week_index(r.timestamp))].records.push_back(r);
  return windows;
}

void write_week_windows(const std::filesystem::path& dir, std::span<const WeekWindow> windows) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["weeks"] = nlohmann::json::array();
  for (const auto& w : windows) {
    char name[32];
    std::snprintf(name, sizeof name, "week_%04d.csv", w.index);
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    write_transactions(out, w.records);
    manifest["weeks"].push_back({{"index", w.index},
                                 {"start", format_rfc3339(w.start)},
                                 {"end", format_rfc3339(w.end)},
                                 {"records", w.records.size()},
                                 {"file", name}});
  }
  if (!windows.empty()) manifest["anchor"] = format_rfc3339(windows.front().start);
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

std::optional<double> TimeSeries::at(Date d) const {
  const auto it = std::lower_bound(points.begin(), points.end(), d,
                                   [](const auto& p, Date key) { return p.first < key; });
  if (it == points.end() || it->first != d) return std::nullopt;
  return it->second;
}

TimeSeries parse_price_csv(std::istream& in) { return parse_two_column(in, "date,price", SeriesKind::price); }

TimeSeries parse_issuance_csv(std::istream& in) {
  return parse_two_column(in, "date,issuance_usd", SeriesKind::issuance);
}

std::map<std::string, TimeSeries> parse_trends_csv(std::istream& in) {
  std::map<std::string, std::vector<std::pair<Date, double>>> raw;
  for_each_row(in, "date,term,frequency", 3, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    const auto value = parse_double(f[2]);
    if (!value || !std::isfinite(*value)) {
      throw ParseError("line " + std::to_string(line_no) + ": bad frequency '" + std::string(f[2]) + "'");
    }
    raw[std::string(f[1])].emplace_back(parse_date(f[0]), *value);
  });
  std::map<std::string, TimeSeries> out;
  for (auto& [term, points] : raw) out.emplace(term, finish_series(SeriesKind::search_frequency, std::move(points)));
  return out;
}

TimeSeries read_price_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_price_csv(in);
}

TimeSeries read_issuance_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_issuance_csv(in);
}

std::map<std::string, TimeSeries> read_trends_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_trends_csv(in);
}

void write_price_csv(std::ostream& out, const TimeSeries& series) { write_series(out, "date,price", series); }

void write_issuance_csv(std::ostream& out, const TimeSeries& series) {
  write_series(out, "date,issuance_usd", series);
}

void write_trends_csv(std::ostream& out, const std::map<std::string, TimeSeries>& by_term) {
  std::vector<std::tuple<Date, std::string, double>> rows;
  for (const auto& [term, series] : by_term) {
    for (const auto& [date, value] : series.points) rows.emplace_back(date, term, value);
  }
  std::stable_sort(rows.begin(), rows.end());
  out << "date,term,frequency\n";
  for (const auto& [date, term, value] : rows) out << format_date(date) << ',' << term << ',' << format_number(value) << '\n';
}

int week_of(Date d, Timestamp anchor) {
  const Timestamp ts{d};
  if (ts < anchor) return -1;
  return static_cast<int>((ts - anchor) / kWeek);
}

Date week_end_date(Timestamp anchor, int t) {
  return std::chrono::floor<std::chrono::days>(anchor + (t + 1) * kWeek - std::chrono::milliseconds{1});
}

std::vector<std::optional<double>> align_weekly(const TimeSeries& series, Timestamp anchor, int n_weeks) {
  std::vector<std::optional<double>> out(static_cast<std::size_t>(std::max(n_weeks, 0)));
  for (const auto& [date, value] : series.points) {
    const int t = week_of(date, anchor);
    if (t >= 0 && t < n_weeks) out[static_cast<std::size_t>(t)] = value;  // later dates overwrite
  }
  return out;
}

}  // namespace txtopo
