#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "txtopo/execution.hpp"
#include "txtopo/graph.hpp"

namespace txtopo {

// Directed 3-node motifs counted on the filtered weekly digraph:
//   motif 1: a<->b, b<->c, a and c not adjacent
//   motif 2: a<->b, b->c, c->a
//   motif 3: a<->b, b<->c, a<->c
inline constexpr std::size_t kMotifCount = 3;

enum class MotifSemantics {
  induced,      ///< the triple's arc set is exactly the motif (up to relabeling)
  non_induced,  ///< the triple's arc set contains the motif
};

struct MotifCensus {
  int week = 0;
  std::array<long long, kMotifCount> counts{};

  bool operator==(const MotifCensus&) const = default;
};

struct MotifIncrement {
  int week = 0;
  std::array<long long, kMotifCount> deltas{};

  bool operator==(const MotifIncrement&) const = default;
};

/// Arc pattern of an ordered vertex triple (x, y, z): bit 0 x->y, 1 y->x,
/// 2 x->z, 3 z->x, 4 y->z, 5 z->y.
using TriadPattern = std::uint8_t;

/// Motif id (1..3) of a pattern under induced semantics, or 0.
int motif_class(TriadPattern pattern);

/// Whether the pattern contains motif `id` (1..3) under some relabeling.
bool motif_contained(TriadPattern pattern, int id);

/// One count per unordered triple. Open triads are counted from mutual
/// degrees, closed ones by triangle enumeration.
MotifCensus census_triads(const DirectedGraph& g, MotifSemantics semantics = MotifSemantics::induced,
                          int week = 0);

/// current - previous; throws PreconditionError unless the weeks are consecutive.
MotifIncrement motif_increment(const MotifCensus& current, const MotifCensus& previous);

std::vector<MotifCensus> weekly_census(std::span<const DirectedGraph> graphs,
                                       MotifSemantics semantics = MotifSemantics::induced,
                                       Execution exec = Execution::parallel);

}  // namespace txtopo
