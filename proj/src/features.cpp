#include "txtopo/features.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>

#include "txtopo/error.hpp"
#include "txtopo/topo_features.hpp"

namespace txtopo {

WeeklyTopology compute_topology(std::span<const WeekWindow> windows, const FeatureConfig& config) {
  const std::size_t n = windows.size();
  std::vector<DirectedGraph> digraphs(n);
  std::vector<DirectedGraph> filtered(n);
  std::vector<UndirectedGraph> undirected(n);
  WeeklyTopology topo;
  topo.scales.resize(n);

  const auto prepare = [&](std::size_t t) {
    digraphs[t] = build_digraph(windows[t]);
    undirected[t] = to_undirected(digraphs[t]);
    if (config.top_edge_mode == TopEdgeMode::aggregated) {
      filtered[t] = filter_top_edges(digraphs[t], config.top_edge_fraction);
    } else {
      filtered[t] = filter_top_transactions(windows[t].records, config.top_edge_fraction);
    }
    if (windows[t].records.empty()) return;
    if (config.thresholds == ThresholdSource::edge_weights) {
      topo.scales[t] = compute_thresholds(undirected[t].weights());
    } else {
      std::vector<double> amounts;
      amounts.reserve(windows[t].records.size());
      for (const auto& r : windows[t].records) amounts.push_back(r.amount);
      topo.scales[t] = compute_thresholds(amounts);
    }
  };
  const auto count = static_cast<long>(n);
  if (config.exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long t = 0; t < count; ++t) prepare(static_cast<std::size_t>(t));
  } else {
    for (long t = 0; t < count; ++t) prepare(static_cast<std::size_t>(t));
  }
  topo.betti = weekly_betti(undirected, topo.scales, config.exec);
  topo.motifs = weekly_census(filtered, config.motif_semantics, config.exec);
  return topo;
}

std::map<int, MotifIncrement> motif_increments(const WeeklyTopology& topology) {
  std::map<int, MotifIncrement> out;
  for (std::size_t t = 1; t < topology.motifs.size(); ++t) {
    out[static_cast<int>(t)] = motif_increment(topology.motifs[t], topology.motifs[t - 1]);
  }
  return out;
}

std::vector<FeatureRow> build_feature_rows(std::span<const WeekWindow> windows, const MarketData& market,
                                           const FeatureConfig& config, WeeklyTopology* topology_out) {
  if (windows.empty()) throw DataError("no weekly windows");
  for (std::size_t t = 0; t < windows.size(); ++t) {
    if (windows[t].index != static_cast<int>(t)) throw PreconditionError("windows must be consecutive from week 0");
  }
  const int n_weeks = static_cast<int>(windows.size());
  const Timestamp anchor = windows.front().start;
  WeeklyTopology topo = compute_topology(windows, config);

  WeeklyFeatureColumns cols;
  cols.n_weeks = n_weeks;
  for (auto& c : cols.columns) c.assign(static_cast<std::size_t>(n_weeks), std::nullopt);
  cols.prices = align_weekly(market.price, anchor, n_weeks + 1);

  const auto col = [&](std::string_view name) -> std::vector<std::optional<double>>& {
    return cols.columns[feature_index(name)];
  };

  // Price increments y_s = price_s - price_{s-1}, used by the trader ranking.
  std::vector<std::optional<double>> increments(static_cast<std::size_t>(n_weeks), std::nullopt);
  for (int t = 1; t < n_weeks; ++t) {
    if (cols.prices[t] && cols.prices[t - 1]) increments[t] = *cols.prices[t] - *cols.prices[t - 1];
  }

  std::vector<std::vector<std::optional<double>>> terms;
  for (const auto& term : config.sentiment_terms) {
    const auto it = market.trends.find(term);
    terms.push_back(it == market.trends.end() ? std::vector<std::optional<double>>(static_cast<std::size_t>(n_weeks))
                                              : align_weekly(it->second, anchor, n_weeks));
  }

  // One week for increments, then the trader-ranking history.
  const int first_week = 1 + std::max(0, config.traders.min_history);
  WalletVolumes volumes;
  for (int t = 0; t < n_weeks; ++t) {
    const auto& window = windows[static_cast<std::size_t>(t)];
    col("trade_volume")[t] = trade_volume(window.records);
    if (cols.prices[t]) col("price")[t] = *cols.prices[t];
    if (t >= 1 && cols.prices[t] && cols.prices[t - 1]) col("price_inc")[t] = price_features(cols.prices, t).price_inc;

    if (t >= config.traders.min_history) {
      const TraderRanking ranking = rank_top_traders(volumes, increments, t, config.traders);
      col("trade_volume_1%")[t] = top_trader_volume(window.records, ranking);
    }
    volumes.add_week(t, window.records);

    try {
      const double now = puell_multiple(market.issuance, week_end_date(anchor, t));
      col("puell_mult")[t] = now;
      if (t >= 1) {
        const double before = puell_multiple(market.issuance, week_end_date(anchor, t - 1));
        col("puell_mult_inc")[t] = now - before;
      }
    } catch (const DataError&) {
      // Left missing; the alignment audit reports it if the week is used.
    }

    if (t >= 1) {
      try {
        col("sent_inc")[t] = sentiment_increment(terms, t);
      } catch (const DataError&) {
      }
      const auto& cur = topo.motifs[static_cast<std::size_t>(t)];
      const auto& prev = topo.motifs[static_cast<std::size_t>(t - 1)];
      col("motif_2_inc")[t] = static_cast<double>(motif_increment(cur, prev).deltas[1]);
      if (topo.betti.computed[static_cast<std::size_t>(t)] && topo.betti.computed[static_cast<std::size_t>(t - 1)]) {
        const BettiIncrement inc = left_increment(topo.betti.pairs[static_cast<std::size_t>(t)].beta0,
                                                  topo.betti.pairs[static_cast<std::size_t>(t - 1)].beta0);
        col("delta_beta0")[t] = static_cast<double>(select_betti_feature(inc, config.betti_level, 0));
      }
    }
  }
  auto rows = assemble_features(cols, first_week);
  if (topology_out) *topology_out = std::move(topo);
  return rows;
}

void write_feature_csv(std::ostream& out, std::span<const FeatureRow> rows) {
  out << "week";
  for (const auto name : kFeatureNames) out << ',' << name;
  out << ",target\n";
  for (const auto& row : rows) {
    out << row.week;
    for (const double v : row.values) out << ',' << format_number(v);
    out << ',';
    if (row.target) out << format_number(*row.target);
    out << '\n';
  }
}

std::vector<FeatureRow> read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty feature file");
  std::string expected = "week";
  for (const auto name : kFeatureNames) expected += "," + std::string(name);
  expected += ",target";
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) throw ParseError("feature file header must be: " + expected);
  std::vector<FeatureRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view view(line);
    std::size_t start = 0;
    while (true) {
      const auto pos = view.find(',', start);
      fields.push_back(view.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    if (fields.size() != kFeatureCount + 2) throw ParseError("line " + std::to_string(line_no) + ": wrong field count");
    const auto number = [&](std::string_view s) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
      }
      return v;
    };
    FeatureRow row;
    int week = 0;
    const auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), week);
    if (ec != std::errc{} || ptr != fields[0].data() + fields[0].size()) {
      throw ParseError("line " + std::to_string(line_no) + ": bad week");
    }
    row.week = week;
    for (std::size_t f = 0; f < kFeatureCount; ++f) row.values[f] = number(fields[f + 1]);
    if (!fields.back().empty()) row.target = number(fields.back());
    rows.push_back(row);
  }
  return rows;
}

void write_topo_csv(std::ostream& out, const WeeklyTopology& topology) {
  out << "week,p";
  for (const int level : kDecileLevels) out << ",beta_e" << level;
  out << '\n';
  for (std::size_t t = 0; t < topology.betti.pairs.size(); ++t) {
    if (!topology.betti.computed[t]) continue;
    for (const auto* seq : {&topology.betti.pairs[t].beta0, &topology.betti.pairs[t].beta1}) {
      out << t << ',' << seq->p;
      for (const long v : seq->values) out << ',' << v;
      out << '\n';
    }
  }
}

void write_motif_csv(std::ostream& out, const WeeklyTopology& topology) {
  out << "week,motif_1,motif_2,motif_3,motif_1_inc,motif_2_inc,motif_3_inc\n";
  for (std::size_t t = 0; t < topology.motifs.size(); ++t) {
    const auto& c = topology.motifs[t];
    out << t << ',' << c.counts[0] << ',' << c.counts[1] << ',' << c.counts[2];
    if (t == 0) {
      out << ",,,\n";
      continue;
    }
    const auto inc = motif_increment(c, topology.motifs[t - 1]);
    out << ',' << inc.deltas[0] << ',' << inc.deltas[1] << ',' << inc.deltas[2] << '\n';
  }
}

}  // namespace txtopo
