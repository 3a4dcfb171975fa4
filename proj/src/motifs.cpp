#include "txtopo/motifs.hpp"

#include <algorithm>
#include <string>

#include "txtopo/error.hpp"
#include "txtopo/triangles.hpp"

namespace txtopo {

namespace {

constexpr bool has_arc(TriadPattern code, int i, int j) {
  // (i, j) -> bit for the ordered triple (0, 1, 2)
  constexpr int bit[3][3] = {{-1, 0, 2}, {1, -1, 4}, {3, 5, -1}};
  return (code >> bit[i][j]) & 1;
}

constexpr TriadPattern permute(TriadPattern code, const std::array<int, 3>& perm) {
  TriadPattern out = 0;
  constexpr int bit[3][3] = {{-1, 0, 2}, {1, -1, 4}, {3, 5, -1}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j && has_arc(code, i, j)) out |= static_cast<TriadPattern>(1u << bit[perm[i]][perm[j]]);
    }
  }
  return out;
}

// Representatives on (a, b, c) = (0, 1, 2).
constexpr std::array<TriadPattern, kMotifCount> kRepresentatives{
    0b110011,  // a->b, b->a, b->c, c->b
    0b011011,  // a->b, b->a, c->a, b->c
    0b111111,
};

struct PatternTable {
  std::array<std::uint8_t, 64> induced{};
  std::array<std::uint8_t, 64> contains{};  // bitmask over motif ids

  constexpr PatternTable() {
    std::array<int, 3> perm{0, 1, 2};
    do {
      for (std::size_t m = 0; m < kMotifCount; ++m) {
        induced[permute(kRepresentatives[m], perm)] = static_cast<std::uint8_t>(m + 1);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (int code = 0; code < 64; ++code) {
      for (std::size_t m = 0; m < kMotifCount; ++m) {
        std::array<int, 3> p{0, 1, 2};
        do {
          const TriadPattern rep = permute(kRepresentatives[m], p);
          if ((code & rep) == rep) contains[code] |= static_cast<std::uint8_t>(1u << m);
        } while (std::next_permutation(p.begin(), p.end()));
      }
    }
  }
};

constexpr PatternTable kTable{};

// Sorted neighbor list with dyad flags: bit 0 = v -> neighbor, bit 1 = neighbor -> v.
struct DyadAdjacency {
  std::vector<std::vector<std::uint32_t>> neighbors;
  std::vector<std::vector<std::uint8_t>> flags;

  std::uint8_t dyad(std::uint32_t u, std::uint32_t v) const {
    const auto& n = neighbors[u];
    const auto it = std::lower_bound(n.begin(), n.end(), v);
    return (it != n.end() && *it == v) ? flags[u][static_cast<std::size_t>(it - n.begin())] : 0;
  }
};

DyadAdjacency build_dyads(const DirectedGraph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<std::vector<std::pair<std::uint32_t, std::uint8_t>>> raw(n);
  for (const auto& a : g.arcs) {
    raw[a.from].emplace_back(a.to, 1);
    raw[a.to].emplace_back(a.from, 2);
  }
  DyadAdjacency adj;
  adj.neighbors.resize(n);
  adj.flags.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto& list = raw[v];
    std::sort(list.begin(), list.end());
    for (const auto& [w, f] : list) {
      if (!adj.neighbors[v].empty() && adj.neighbors[v].back() == w) {
        adj.flags[v].back() |= f;
      } else {
        adj.neighbors[v].push_back(w);
        adj.flags[v].push_back(f);
      }
    }
  }
  return adj;
}

}  // namespace

int motif_class(TriadPattern pattern) { return kTable.induced[pattern & 63]; }

bool motif_contained(TriadPattern pattern, int id) {
  if (id < 1 || id > static_cast<int>(kMotifCount)) return false;
  return (kTable.contains[pattern & 63] >> (id - 1)) & 1;
}

MotifCensus census_triads(const DirectedGraph& g, MotifSemantics semantics, int week) {
  MotifCensus census;
  census.week = week;
  if (g.vertex_count() < 3) return census;
  const DyadAdjacency adj = build_dyads(g);

  // Pairs of mutual neighbors around each center; the adjacent ones are
  // removed again while walking triangles.
  long long open_mutual_pairs = 0;
  for (const auto& f : adj.flags) {
    const long long m = std::count(f.begin(), f.end(), std::uint8_t{3});
    open_mutual_pairs += m * (m - 1) / 2;
  }

  for_each_triangle(adj.neighbors, [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    const std::uint8_t ab = adj.dyad(a, b);
    const std::uint8_t ac = adj.dyad(a, c);
    const std::uint8_t bc = adj.dyad(b, c);
    const auto code = static_cast<TriadPattern>(ab | (ac << 2) | (bc << 4));
    // Centers whose two dyads are both mutual were counted in open_mutual_pairs.
    open_mutual_pairs -= (ab == 3 && ac == 3) + (ab == 3 && bc == 3) + (ac == 3 && bc == 3);
    if (semantics == MotifSemantics::induced) {
      if (const int id = kTable.induced[code]; id > 0) ++census.counts[static_cast<std::size_t>(id - 1)];
    } else {
      for (std::size_t m = 0; m < kMotifCount; ++m) census.counts[m] += (kTable.contains[code] >> m) & 1;
    }
  });
  census.counts[0] += open_mutual_pairs;
  return census;
}

MotifIncrement motif_increment(const MotifCensus& current, const MotifCensus& previous) {
  if (current.week < 1) throw PreconditionError("week 0 has no predecessor");
  if (current.week != previous.week + 1) {
    throw PreconditionError("motif increment needs consecutive weeks, got " + std::to_string(previous.week) +
                            " and " + std::to_string(current.week));
  }
  MotifIncrement inc;
  inc.week = current.week;
  for (std::size_t m = 0; m < kMotifCount; ++m) inc.deltas[m] = current.counts[m] - previous.counts[m];
  return inc;
}

std::vector<MotifCensus> weekly_census(std::span<const DirectedGraph> graphs, MotifSemantics semantics,
                                       Execution exec) {
  std::vector<MotifCensus> out(graphs.size());
  const auto n = static_cast<long>(graphs.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long t = 0; t < n; ++t) out[t] = census_triads(graphs[t], semantics, static_cast<int>(t));
  } else {
    for (long t = 0; t < n; ++t) out[t] = census_triads(graphs[t], semantics, static_cast<int>(t));
  }
  return out;
}

}  // namespace txtopo
