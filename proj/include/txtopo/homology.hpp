#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "txtopo/execution.hpp"
#include "txtopo/graph.hpp"
#include "txtopo/triangles.hpp"

namespace txtopo {

inline constexpr std::size_t kScaleCount = 10;
inline constexpr std::array<int, kScaleCount> kDecileLevels{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};

/// One filtration level: `level` is the percentile (10..100), `epsilon` its threshold.
struct FiltrationScale {
  int level = 0;
  double epsilon = 0.0;
};

/// Nearest-rank percentile thresholds: level l maps to the ceil(l*n/100)-th
/// smallest weight. Throws DataError on an empty multiset.
std::vector<FiltrationScale> compute_thresholds(std::span<const double> weights,
                                                std::span<const int> levels = kDecileLevels);

/// Edges with weight <= epsilon and the vertices they touch. Vertices without
/// a qualifying edge are not part of the level.
struct ThresholdSubgraph {
  FiltrationScale scale;
  std::vector<VertexId> vertices;  // sorted
  std::vector<Edge> edges;
};

ThresholdSubgraph threshold_subgraph(const UndirectedGraph& g, double epsilon);

/// Connected components (rank of H0).
std::size_t betti0(const ThresholdSubgraph& level);

/// Rank of H1 of the flag complex truncated at triangles, over GF(2).
std::size_t betti1(const ThresholdSubgraph& level);

/// Rank over GF(2) of the boundary map from triangles to edges. Each column is
/// the sorted edge indices of one triangle. Columns are reduced left to right;
/// `nonzero` (if given) receives, per column, whether it survived reduction.
std::size_t gf2_column_rank(std::vector<std::vector<std::uint32_t>> columns, std::vector<char>* nonzero = nullptr);

struct BettiSequence {
  int p = 0;
  int week = 0;
  std::array<long, kScaleCount> values{};

  bool operator==(const BettiSequence&) const = default;
};

/// Betti numbers of dimension p (0 or 1) at each scale, one level at a time.
/// This is the reference path: every level is rebuilt from scratch.
BettiSequence betti_sequence(const UndirectedGraph& g, std::span<const FiltrationScale> scales, int p, int week = 0);

struct BettiPair {
  BettiSequence beta0;
  BettiSequence beta1;

  bool operator==(const BettiPair&) const = default;
};

/// Both sequences in one sweep: edges enter in weight order into a union-find,
/// triangles enter in diameter order into one GF(2) reduction, and ranks are
/// read off at each threshold.
BettiPair betti_sweep(const UndirectedGraph& g, std::span<const FiltrationScale> scales, int week = 0);

/// Per-week Betti pairs. `scales[t]` holds week t's thresholds; a week with an
/// empty scale list (degenerate week) is skipped and has `computed[t] == 0`.
struct WeeklyBetti {
  std::vector<BettiPair> pairs;
  std::vector<char> computed;
};

WeeklyBetti weekly_betti(std::span<const UndirectedGraph> graphs,
                         std::span<const std::vector<FiltrationScale>> scales,
                         Execution exec = Execution::parallel);

/// Serial reference for weekly_betti built on betti_sequence.
WeeklyBetti weekly_betti_reference(std::span<const UndirectedGraph> graphs,
                                   std::span<const std::vector<FiltrationScale>> scales);

}  // namespace txtopo
