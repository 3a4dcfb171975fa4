#pragma once

#include <array>

#include "txtopo/homology.hpp"

namespace txtopo {

/// Week-over-week difference of Betti sequences at matching percentile
/// levels (not matching raw thresholds; each week has its own).
struct BettiIncrement {
  int p = 0;
  int week = 0;
  std::array<long, kScaleCount> values{};

  bool operator==(const BettiIncrement&) const = default;
};

/// current - previous. Throws PreconditionError for a dimension mismatch,
/// non-consecutive weeks, or week 0.
BettiIncrement left_increment(const BettiSequence& current, const BettiSequence& previous);

/// Component of `increment` at percentile `level` (default the 40th, dimension 0).
long select_betti_feature(const BettiIncrement& increment, int level = 40, int p = 0);

}  // namespace txtopo
