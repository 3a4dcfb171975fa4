#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "txtopo/ingest.hpp"

namespace txtopo {

inline constexpr std::size_t kFeatureCount = 9;

/// Column names of the weekly feature matrix, in model order.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "price",      "price_inc",      "trade_volume", "trade_volume_1%", "puell_mult",
    "puell_mult_inc", "sent_inc", "motif_2_inc",  "delta_beta0"};

/// Predictors for week t plus the next-week price increment.
struct FeatureRow {
  int week = 0;
  std::array<double, kFeatureCount> values{};
  std::optional<double> target;  // price_{t+1} - price_t

  double& operator[](std::string_view name);
  double operator[](std::string_view name) const;
  bool operator==(const FeatureRow&) const = default;
};

/// Index of a feature name, or throws PreconditionError.
std::size_t feature_index(std::string_view name);

struct PriceFeatures {
  double price = 0.0;
  double price_inc = 0.0;
};

/// Week-end price and its change from the previous week. Throws DataError for
/// missing weeks and PreconditionError for t = 0.
PriceFeatures price_features(std::span<const std::optional<double>> weekly_prices, int t);

/// Sum of raw transfer amounts.
double trade_volume(std::span<const TransactionRecord> records);

/// Weekly traded amount per wallet (sent plus received), stored sparsely.
class WalletVolumes {
 public:
  void add_week(int week, std::span<const TransactionRecord> records);
  const std::map<std::string, std::vector<std::pair<int, double>>>& by_wallet() const { return volumes_; }

 private:
  std::map<std::string, std::vector<std::pair<int, double>>> volumes_;
};

struct TraderRankingOptions {
  double fraction = 0.01;
  int min_history = 8;
  int min_active_weeks = 3;
};

struct TraderRanking {
  int week = 0;
  std::vector<std::pair<std::string, double>> scores;  // eligible wallets, best first
  std::vector<std::string> selected;                   // sorted

  bool contains(const std::string& wallet) const;
};

/// Scores each wallet by the Pearson correlation of its weekly volume in week s
/// with the price increment of week s+1, over s < t. Only volumes of weeks
/// before t and increments up to week t are read, whatever the inputs hold.
/// `increments[s]` is price_s - price_{s-1}.
TraderRanking rank_top_traders(const WalletVolumes& volumes, std::span<const std::optional<double>> increments, int t,
                               const TraderRankingOptions& options = {});

/// Amount of transfers touching a selected wallet; each transfer counted once.
double top_trader_volume(std::span<const TransactionRecord> records, const TraderRanking& ranking);

/// Issuance on `day` over its 365-day trailing mean (inclusive). Requires all
/// 365 daily points; throws DataError otherwise.
double puell_multiple(const TimeSeries& daily_issuance, Date day);

/// Change of the summed search frequency of the tracked terms between weeks
/// t-1 and t.
double sentiment_increment(std::span<const std::vector<std::optional<double>>> weekly_term_frequencies, int t);

/// Per-week feature columns before auditing. Entry [f][t] is feature f of week t.
struct WeeklyFeatureColumns {
  int n_weeks = 0;
  std::array<std::vector<std::optional<double>>, kFeatureCount> columns;
  std::vector<std::optional<double>> prices;  // for the target; may extend past n_weeks
};

/// Rows for weeks [first_week, n_weeks) in order. A missing feature in that
/// range throws DataError naming every (week, feature) gap. A week without a
/// next-week price gets no target.
std::vector<FeatureRow> assemble_features(const WeeklyFeatureColumns& inputs, int first_week);

}  // namespace txtopo
