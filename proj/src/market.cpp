#include "txtopo/market.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "txtopo/error.hpp"

namespace txtopo {

std::size_t feature_index(std::string_view name) {
  const auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), name);
  if (it == kFeatureNames.end()) throw PreconditionError("unknown feature '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - kFeatureNames.begin());
}

double& FeatureRow::operator[](std::string_view name) { return values[feature_index(name)]; }
double FeatureRow::operator[](std::string_view name) const { return values[feature_index(name)]; }

PriceFeatures price_features(std::span<const std::optional<double>> weekly_prices, int t) {
  if (t < 1) throw PreconditionError("price increment undefined for week 0");
  if (static_cast<std::size_t>(t) >= weekly_prices.size() || !weekly_prices[t] || !weekly_prices[t - 1]) {
    throw DataError("missing price for week " + std::to_string(t) + " or " + std::to_string(t - 1));
  }
  return {*weekly_prices[t], *weekly_prices[t] - *weekly_prices[t - 1]};
}

double trade_volume(std::span<const TransactionRecord> records) {
  double total = 0.0;
  for (const auto& r : records) total += r.amount;
  return total;
}

void WalletVolumes::add_week(int week, std::span<const TransactionRecord> records) {
  std::map<std::string, double> totals;
  for (const auto& r : records) {
    totals[r.sender] += r.amount;
    totals[r.receiver] += r.amount;
  }
  for (const auto& [wallet, amount] : totals) {
    auto& history = volumes_[wallet];
    if (!history.empty() && history.back().first >= week) {
      throw PreconditionError("wallet volumes must be added in increasing week order");
    }
    history.emplace_back(week, amount);
  }
}

bool TraderRanking::contains(const std::string& wallet) const {
  return std::binary_search(selected.begin(), selected.end(), wallet);
}

TraderRanking rank_top_traders(const WalletVolumes& volumes, std::span<const std::optional<double>> increments, int t,
                               const TraderRankingOptions& options) {
  if (!(options.fraction > 0.0 && options.fraction <= 1.0)) throw PreconditionError("fraction must lie in (0, 1]");
  if (t < options.min_history) {
    throw PreconditionError("trader ranking for week " + std::to_string(t) + " needs " +
                            std::to_string(options.min_history) + " weeks of history");
  }
  // History weeks s < t whose following increment (week s+1 <= t) is known.
  std::vector<char> usable(static_cast<std::size_t>(t), 0);
  double n = 0.0, sy = 0.0, syy = 0.0;
  for (int s = 0; s < t; ++s) {
    const auto idx = static_cast<std::size_t>(s + 1);
    if (idx < increments.size() && increments[idx]) {
      usable[static_cast<std::size_t>(s)] = 1;
      const double y = *increments[idx];
      n += 1.0;
      sy += y;
      syy += y * y;
    }
  }
  TraderRanking ranking;
  ranking.week = t;
  const double var_y = syy - sy * sy / std::max(n, 1.0);
  if (n < 3.0 || !(var_y > 1e-12 * std::max(syy, 1e-300))) return ranking;

  for (const auto& [wallet, history] : volumes.by_wallet()) {
    double sv = 0.0, svv = 0.0, svy = 0.0;
    int active = 0;
    for (const auto& [week, volume] : history) {
      if (week >= t) break;
      if (!usable[static_cast<std::size_t>(week)]) continue;
      const double y = *increments[static_cast<std::size_t>(week + 1)];
      sv += volume;
      svv += volume * volume;
      svy += volume * y;
      ++active;
    }
    if (active < options.min_active_weeks) continue;
    const double var_v = svv - sv * sv / n;
    if (!(var_v > 1e-12 * svv)) continue;
    const double cov = svy - sv * sy / n;
    ranking.scores.emplace_back(wallet, cov / std::sqrt(var_v * var_y));
  }
  std::stable_sort(ranking.scores.begin(), ranking.scores.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const auto keep = static_cast<std::size_t>(
      std::ceil(options.fraction * static_cast<double>(ranking.scores.size()) - 1e-9));
  for (std::size_t i = 0; i < std::min(keep, ranking.scores.size()); ++i) ranking.selected.push_back(ranking.scores[i].first);
  std::sort(ranking.selected.begin(), ranking.selected.end());
  return ranking;
}

double top_trader_volume(std::span<const TransactionRecord> records, const TraderRanking& ranking) {
  double total = 0.0;
  for (const auto& r : records) {
    if (ranking.contains(r.sender) || ranking.contains(r.receiver)) total += r.amount;
  }
  return total;
}

double puell_multiple(const TimeSeries& daily_issuance, Date day) {
  const auto& pts = daily_issuance.points;
  const auto it = std::lower_bound(pts.begin(), pts.end(), day, [](const auto& p, Date d) { return p.first < d; });
  if (it == pts.end() || it->first != day) throw DataError("no issuance value on " + format_date(day));
  const auto idx = static_cast<std::size_t>(it - pts.begin());
  if (idx < 364 || pts[idx - 364].first != day - std::chrono::days{364}) {
    throw DataError("Puell multiple on " + format_date(day) + " needs 365 consecutive daily issuance values");
  }
  // Mean taken as current value plus mean deviation: a constant series gives exactly 1.
  const double current = it->second;
  double deviation = 0.0;
  for (std::size_t i = idx - 364; i <= idx; ++i) deviation += pts[i].second - current;
  const double mean = current + deviation / 365.0;
  if (!(mean > 0.0)) throw DataError("non-positive issuance average on " + format_date(day));
  return current / mean;
}

double sentiment_increment(std::span<const std::vector<std::optional<double>>> weekly_term_frequencies, int t) {
  if (t < 1) throw PreconditionError("sentiment increment undefined for week 0");
  if (weekly_term_frequencies.empty()) throw DataError("no search-frequency terms supplied");
  double now = 0.0, before = 0.0;
  for (const auto& term : weekly_term_frequencies) {
    const auto idx = static_cast<std::size_t>(t);
    if (idx >= term.size() || !term[idx] || !term[idx - 1]) {
      throw DataError("missing search frequency for week " + std::to_string(t) + " or " + std::to_string(t - 1));
    }
    now += *term[idx];
    before += *term[idx - 1];
  }
  return now - before;
}

std::vector<FeatureRow> assemble_features(const WeeklyFeatureColumns& inputs, int first_week) {
  std::vector<FeatureRow> rows;
  std::vector<std::string> gaps;
  for (int t = std::max(first_week, 0); t < inputs.n_weeks; ++t) {
    FeatureRow row;
    row.week = t;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const auto& col = inputs.columns[f];
      const auto idx = static_cast<std::size_t>(t);
      if (idx >= col.size() || !col[idx] || !std::isfinite(*col[idx])) {
        gaps.push_back("(week " + std::to_string(t) + ", " + std::string(kFeatureNames[f]) + ")");
        continue;
      }
      row.values[f] = *col[idx];
    }
    const auto next = static_cast<std::size_t>(t + 1);
    if (next < inputs.prices.size() && inputs.prices[next] && inputs.prices[next - 1]) {
      row.target = *inputs.prices[next] - *inputs.prices[next - 1];
    }
    rows.push_back(row);
  }
  if (!gaps.empty()) {
    std::string msg = "feature alignment gaps:";
    for (std::size_t i = 0; i < gaps.size() && i < 50; ++i) msg += ' ' + gaps[i];
    if (gaps.size() > 50) msg += " ... (" + std::to_string(gaps.size()) + " total)";
    throw DataError(msg);
  }
  return rows;
}

}  // namespace txtopo
