#include "txtopo/topo_features.hpp"

#include <algorithm>
#include <string>

#include "txtopo/error.hpp"

namespace txtopo {

BettiIncrement left_increment(const BettiSequence& current, const BettiSequence& previous) {
  if (current.p != previous.p) throw PreconditionError("Betti increment across different dimensions");
  if (current.week < 1) throw PreconditionError("week 0 has no predecessor");
  if (current.week != previous.week + 1) {
    throw PreconditionError("Betti increment needs consecutive weeks, got " + std::to_string(previous.week) +
                            " and " + std::to_string(current.week));
  }
  BettiIncrement inc;
  inc.p = current.p;
  inc.week = current.week;
  for (std::size_t k = 0; k < kScaleCount; ++k) inc.values[k] = current.values[k] - previous.values[k];
  return inc;
}

long select_betti_feature(const BettiIncrement& increment, int level, int p) {
  if (increment.p != p) {
    throw PreconditionError("expected a dimension-" + std::to_string(p) + " increment, got dimension " +
                            std::to_string(increment.p));
  }
  const auto it = std::find(kDecileLevels.begin(), kDecileLevels.end(), level);
  if (it == kDecileLevels.end()) throw PreconditionError("level " + std::to_string(level) + " is not on the decile grid");
  return increment.values[static_cast<std::size_t>(it - kDecileLevels.begin())];
}

}  // namespace txtopo
