#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "txtopo/ingest.hpp"
#include "txtopo/time.hpp"

namespace txtopo {

/// Parameters of the planted-signal generator.
///
/// Each week holds exactly `edges_per_week` undirected pairs. The lightest
/// ceil(0.4 * edges) of them form a forest with `components[t]` trees, so
/// beta_0 at the 40th percentile equals that count. Mutual-dyad bursts plant
/// motif-2 triads inside the top 1% of arcs. The increment after week t is
///   coupling * (jump + motif_coupling * triad change
///               + market_coupling * mean of standardized sentiment and Puell
///               + autoregression * previous increment) + noise * N(0, 1),
/// so coupling 0 gives a pure-noise target.
struct SyntheticScenario {
  std::uint64_t seed = 1;
  int weeks = 200;
  double coupling = 0.9;
  double noise = 0.1;
  double motif_coupling = 0.3;
  double market_coupling = 1.6;
  double autoregression = 0.2;
  double event_rate = 0.08;  // fraction of weeks 1..weeks-1 with a component jump
  int jump_min = 3;  // component count change of one event, drawn uniformly
  int jump_max = 5;
  int base_components = 20;
  int edges_per_week = 800;
  int wallet_pool = 3000;
  Date anchor = Date{std::chrono::year{2019} / 1 / 7};  // a Monday
  int issuance_lead_days = 400;

  /// Throws PreconditionError for inconsistent settings.
  void validate() const;
};

/// Planted quantities, indexed by week.
struct SyntheticTruth {
  std::vector<int> components;    // beta_0 at the 40th percentile
  std::vector<int> jumps;         // components[t] - components[t-1] (0 for week 0)
  std::vector<int> motif_triads;  // planted motif-2 triads
  std::vector<double> increments; // price_{t+1} - price_t, t = 0..weeks-1
};

struct SyntheticData {
  std::vector<TransactionRecord> transactions;  // timestamp order
  TimeSeries price;                             // one point per week end, weeks 0..weeks
  TimeSeries issuance;                          // daily
  std::map<std::string, TimeSeries> trends;     // weekly, per term
  SyntheticTruth truth;
  Timestamp anchor;
};

/// Deterministic per scenario: equal scenarios give identical data.
SyntheticData synth_generate(const SyntheticScenario& scenario);

/// Copy holding only what is known by the end of week `week`: transfers
/// before the next window and series points up to that week's last day.
SyntheticData truncate_after_week(const SyntheticData& data, int week);

/// Writes transactions.csv, price.csv, issuance.csv and trends.csv into `dir`.
void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data);

}  // namespace txtopo
