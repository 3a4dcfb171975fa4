#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "txtopo/time.hpp"

namespace txtopo {

/// One ledger transfer. Amount is positive and sender differs from receiver.
struct TransactionRecord {
  Timestamp timestamp;
  std::string sender;
  std::string receiver;
  double amount = 0.0;

  bool operator==(const TransactionRecord&) const = default;
};

enum class ParseMode {
  lenient,  ///< bad lines are reported and skipped
  strict,   ///< the first bad line throws ParseError
};

/// How a transactions stream is laid out. Columns are always
/// `timestamp,sender,receiver,amount`.
struct TransactionFormat {
  char delimiter = ',';
  bool has_header = true;
  ParseMode mode = ParseMode::lenient;
};

struct RecordIssue {
  std::size_t line = 0;  // 1-based, counting the header
  std::string message;
};

struct TransactionParseResult {
  std::vector<TransactionRecord> records;  // timestamp order (stable)
  std::vector<RecordIssue> issues;
  std::size_t self_transfers_skipped = 0;
};

TransactionParseResult parse_transactions(std::istream& in, const TransactionFormat& format = {});
TransactionParseResult read_transactions_file(const std::filesystem::path& path,
                                              const TransactionFormat& format = {});

/// Writes the header and one line per record. Amounts use the shortest
/// representation that parses back to the same double.
void write_transactions(std::ostream& out, std::span<const TransactionRecord> records);

/// Half-open week [start, end) with its records.
struct WeekWindow {
  int index = 0;
  Timestamp start;
  Timestamp end;
  std::vector<TransactionRecord> records;
};

/// First Monday 00:00 UTC at or before the earliest record.
Timestamp default_anchor(std::span<const TransactionRecord> records);

/// Splits timestamp-sorted records into consecutive 7-day windows starting at
/// `anchor`. Empty weeks are kept. Throws DataError for records before the
/// anchor and PreconditionError for unsorted input.
std::vector<WeekWindow> partition_weeks(std::span<const TransactionRecord> records, Timestamp anchor);

/// Window files `week_NNNN.csv` plus `manifest.json` in `dir`.
void write_week_windows(const std::filesystem::path& dir, std::span<const WeekWindow> windows);

enum class SeriesKind { price, issuance, search_frequency };

/// Dated values with strictly increasing dates.
struct TimeSeries {
  SeriesKind kind = SeriesKind::price;
  std::vector<std::pair<Date, double>> points;

  /// Value on exactly `d`, if present.
  std::optional<double> at(Date d) const;
};

/// `date,price` (weekly, end of week).
TimeSeries parse_price_csv(std::istream& in);
/// `date,issuance_usd` (daily).
TimeSeries parse_issuance_csv(std::istream& in);
/// `date,term,frequency`; one series per term.
std::map<std::string, TimeSeries> parse_trends_csv(std::istream& in);

TimeSeries read_price_file(const std::filesystem::path& path);
TimeSeries read_issuance_file(const std::filesystem::path& path);
std::map<std::string, TimeSeries> read_trends_file(const std::filesystem::path& path);

void write_price_csv(std::ostream& out, const TimeSeries& series);
void write_issuance_csv(std::ostream& out, const TimeSeries& series);
void write_trends_csv(std::ostream& out, const std::map<std::string, TimeSeries>& by_term);

/// Week index of a calendar date relative to `anchor`, or -1 before it.
int week_of(Date d, Timestamp anchor);

/// Last value dated inside each week, for weeks [0, n_weeks).
std::vector<std::optional<double>> align_weekly(const TimeSeries& series, Timestamp anchor, int n_weeks);

/// Last calendar day of week `t`.
Date week_end_date(Timestamp anchor, int t);

/// Shortest round-trip text for a double.
std::string format_number(double value);

}  // namespace txtopo
