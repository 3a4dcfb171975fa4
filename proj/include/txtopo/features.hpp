#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "txtopo/execution.hpp"
#include "txtopo/graph.hpp"
#include "txtopo/homology.hpp"
#include "txtopo/ingest.hpp"
#include "txtopo/market.hpp"
#include "txtopo/motifs.hpp"

namespace txtopo {

/// Which multiset the percentile thresholds come from.
enum class ThresholdSource {
  edge_weights,         ///< undirected weekly edge weights (every edge enters by the last level)
  transaction_amounts,  ///< raw transfer amounts of the week
};

struct FeatureConfig {
  double top_edge_fraction = 0.01;
  TopEdgeMode top_edge_mode = TopEdgeMode::aggregated;
  ThresholdSource thresholds = ThresholdSource::edge_weights;
  int betti_level = 40;
  MotifSemantics motif_semantics = MotifSemantics::induced;
  TraderRankingOptions traders;
  std::vector<std::string> sentiment_terms{"democrats", "republicans"};
  Execution exec = Execution::parallel;
};

struct MarketData {
  TimeSeries price;
  TimeSeries issuance;
  std::map<std::string, TimeSeries> trends;
};

/// Weekly graph kernels' outputs.
struct WeeklyTopology {
  std::vector<std::vector<FiltrationScale>> scales;  // empty for weeks without transfers
  WeeklyBetti betti;
  std::vector<MotifCensus> motifs;
};

WeeklyTopology compute_topology(std::span<const WeekWindow> windows, const FeatureConfig& config = {});

/// Feature rows for all weeks after the warm-up (1 + traders.min_history).
/// Weeks are those of `windows`, which must start at week 0.
std::vector<FeatureRow> build_feature_rows(std::span<const WeekWindow> windows, const MarketData& market,
                                           const FeatureConfig& config = {}, WeeklyTopology* topology = nullptr);

/// `week,price,...,delta_beta0,target`; the target is blank when unknown.
void write_feature_csv(std::ostream& out, std::span<const FeatureRow> rows);
std::vector<FeatureRow> read_feature_csv(std::istream& in);

/// `week,p,beta_e10,...,beta_e100`
void write_topo_csv(std::ostream& out, const WeeklyTopology& topology);
/// `week,motif_1,motif_2,motif_3,motif_1_inc,motif_2_inc,motif_3_inc`
void write_motif_csv(std::ostream& out, const WeeklyTopology& topology);

/// Motif increments per week (absent for week 0): [week] -> deltas.
std::map<int, MotifIncrement> motif_increments(const WeeklyTopology& topology);

}  // namespace txtopo
