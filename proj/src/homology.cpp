#include "txtopo/homology.hpp"

#include <algorithm>
#include <unordered_map>

#include "txtopo/error.hpp"
#include "txtopo/union_find.hpp"

namespace txtopo {

namespace {

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
}

// Local, contiguous relabeling of a level's vertices plus sorted adjacency.
struct LocalGraph {
  std::vector<std::vector<std::uint32_t>> adjacency;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};

LocalGraph localize(const ThresholdSubgraph& level) {
  LocalGraph lg;
  lg.adjacency.resize(level.vertices.size());
  const auto local = [&](VertexId v) {
    return static_cast<std::uint32_t>(std::lower_bound(level.vertices.begin(), level.vertices.end(), v) -
                                      level.vertices.begin());
  };
  lg.edges.reserve(level.edges.size());
  for (const auto& e : level.edges) {
    const auto a = local(e.u);
    const auto b = local(e.v);
    lg.edges.emplace_back(a, b);
    lg.adjacency[a].push_back(b);
    lg.adjacency[b].push_back(a);
  }
  for (auto& n : lg.adjacency) std::sort(n.begin(), n.end());
  return lg;
}

void xor_into(std::vector<std::uint32_t>& target, const std::vector<std::uint32_t>& source,
              std::vector<std::uint32_t>& scratch) {
  scratch.clear();
  std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(),
                                std::back_inserter(scratch));
  target.swap(scratch);
}

}  // namespace

std::vector<FiltrationScale> compute_thresholds(std::span<const double> weights, std::span<const int> levels) {
  if (weights.empty()) throw DataError("degenerate week: no weights to take percentiles of");
  std::vector<double> sorted(weights.begin(), weights.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<long long>(sorted.size());
  std::vector<FiltrationScale> scales;
  scales.reserve(levels.size());
  for (const int level : levels) {
    if (level <= 0 || level > 100) throw PreconditionError("percentile level must lie in (0, 100]");
    const long long rank = std::max(1LL, (level * n + 99) / 100);
    scales.push_back({level, sorted[static_cast<std::size_t>(rank - 1)]});
  }
  return scales;
}

ThresholdSubgraph threshold_subgraph(const UndirectedGraph& g, double epsilon) {
  ThresholdSubgraph level;
  level.scale.epsilon = epsilon;
  for (const auto& e : g.edges) {
    if (e.weight <= epsilon) {
      level.edges.push_back(e);
      level.vertices.push_back(e.u);
      level.vertices.push_back(e.v);
    }
  }
  std::sort(level.vertices.begin(), level.vertices.end());
  level.vertices.erase(std::unique(level.vertices.begin(), level.vertices.end()), level.vertices.end());
  return level;
}

std::size_t betti0(const ThresholdSubgraph& level) {
  const LocalGraph lg = localize(level);
  UnionFind uf(level.vertices.size());
  std::size_t merges = 0;
  for (const auto& [a, b] : lg.edges) merges += uf.unite(a, b) ? 1 : 0;
  return level.vertices.size() - merges;
}

std::size_t gf2_column_rank(std::vector<std::vector<std::uint32_t>> columns, std::vector<char>* nonzero) {
  std::unordered_map<std::uint32_t, std::size_t> pivot_of_low;
  pivot_of_low.reserve(columns.size());
  std::vector<std::uint32_t> scratch;
  std::size_t rank = 0;
  if (nonzero) nonzero->assign(columns.size(), 0);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    auto& col = columns[j];
    while (!col.empty()) {
      const auto it = pivot_of_low.find(col.back());
      if (it == pivot_of_low.end()) break;
      xor_into(col, columns[it->second], scratch);
    }
    if (!col.empty()) {
      pivot_of_low.emplace(col.back(), j);
      ++rank;
      if (nonzero) (*nonzero)[j] = 1;
    }
  }
  return rank;
}

std::size_t betti1(const ThresholdSubgraph& level) {
  const LocalGraph lg = localize(level);
  std::unordered_map<std::uint64_t, std::uint32_t> edge_index;
  edge_index.reserve(lg.edges.size());
  for (std::uint32_t i = 0; i < lg.edges.size(); ++i) edge_index.emplace(pair_key(lg.edges[i].first, lg.edges[i].second), i);

  std::vector<std::vector<std::uint32_t>> columns;
  for_each_triangle(lg.adjacency, [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    std::vector<std::uint32_t> col{edge_index.at(pair_key(a, b)), edge_index.at(pair_key(a, c)),
                                   edge_index.at(pair_key(b, c))};
    std::sort(col.begin(), col.end());
    columns.push_back(std::move(col));
  });
  const std::size_t b0 = betti0(level);
  const std::size_t rank_d1 = level.vertices.size() - b0;
  const std::size_t rank_d2 = gf2_column_rank(std::move(columns));
  return level.edges.size() - rank_d1 - rank_d2;
}

BettiSequence betti_sequence(const UndirectedGraph& g, std::span<const FiltrationScale> scales, int p, int week) {
  if (p != 0 && p != 1) throw PreconditionError("only Betti dimensions 0 and 1 are supported");
  if (scales.size() != kScaleCount) throw PreconditionError("a Betti sequence needs exactly 10 scales");
  BettiSequence seq;
  seq.p = p;
  seq.week = week;
  for (std::size_t k = 0; k < kScaleCount; ++k) {
    ThresholdSubgraph level = threshold_subgraph(g, scales[k].epsilon);
    level.scale = scales[k];
    seq.values[k] = static_cast<long>(p == 0 ? betti0(level) : betti1(level));
  }
  return seq;
}

BettiPair betti_sweep(const UndirectedGraph& g, std::span<const FiltrationScale> scales, int week) {
  if (scales.size() != kScaleCount) throw PreconditionError("a Betti sequence needs exactly 10 scales");
  const std::size_t n_vertices = g.vertex_count();
  const std::size_t n_edges = g.edges.size();

  // Filtration order of edges: by weight, ties by endpoints.
  std::vector<std::uint32_t> order(n_edges);
  for (std::uint32_t i = 0; i < n_edges; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto& ea = g.edges[a];
    const auto& eb = g.edges[b];
    if (ea.weight != eb.weight) return ea.weight < eb.weight;
    return std::tie(ea.u, ea.v) < std::tie(eb.u, eb.v);
  });
  std::vector<std::uint32_t> position(n_edges);
  for (std::uint32_t r = 0; r < n_edges; ++r) position[order[r]] = r;

  std::vector<double> edge_weight(n_edges);
  std::vector<std::size_t> merges_upto(n_edges + 1, 0);
  std::vector<double> vertex_entry(n_vertices, std::numeric_limits<double>::infinity());
  UnionFind uf(n_vertices);
  for (std::uint32_t r = 0; r < n_edges; ++r) {
    const auto& e = g.edges[order[r]];
    edge_weight[r] = e.weight;
    merges_upto[r + 1] = merges_upto[r] + (uf.unite(e.u, e.v) ? 1 : 0);
    vertex_entry[e.u] = std::min(vertex_entry[e.u], e.weight);
    vertex_entry[e.v] = std::min(vertex_entry[e.v], e.weight);
  }
  std::sort(vertex_entry.begin(), vertex_entry.end());

  std::vector<std::vector<std::uint32_t>> adjacency(n_vertices);
  std::unordered_map<std::uint64_t, std::uint32_t> rank_of_pair;
  rank_of_pair.reserve(n_edges);
  for (std::uint32_t i = 0; i < n_edges; ++i) {
    const auto& e = g.edges[i];
    adjacency[e.u].push_back(e.v);
    adjacency[e.v].push_back(e.u);
    rank_of_pair.emplace(pair_key(e.u, e.v), position[i]);
  }
  for (auto& n : adjacency) std::sort(n.begin(), n.end());

  struct Triangle {
    std::array<std::uint32_t, 3> rows;  // ascending filtration ranks
  };
  std::vector<Triangle> triangles;
  for_each_triangle(adjacency, [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    Triangle t{{rank_of_pair.at(pair_key(a, b)), rank_of_pair.at(pair_key(a, c)), rank_of_pair.at(pair_key(b, c))}};
    std::sort(t.rows.begin(), t.rows.end());
    triangles.push_back(t);
  });
  // A triangle enters with its heaviest edge; order by that edge's rank.
  std::sort(triangles.begin(), triangles.end(), [](const Triangle& x, const Triangle& y) {
    return std::lexicographical_compare(x.rows.rbegin(), x.rows.rend(), y.rows.rbegin(), y.rows.rend());
  });
  std::vector<std::vector<std::uint32_t>> columns;
  columns.reserve(triangles.size());
  for (const auto& t : triangles) columns.emplace_back(t.rows.begin(), t.rows.end());
  std::vector<char> nonzero;
  gf2_column_rank(std::move(columns), &nonzero);
  std::vector<std::size_t> rank_upto(triangles.size() + 1, 0);
  for (std::size_t j = 0; j < triangles.size(); ++j) rank_upto[j + 1] = rank_upto[j] + (nonzero[j] ? 1 : 0);

  BettiPair out;
  out.beta0.p = 0;
  out.beta1.p = 1;
  out.beta0.week = out.beta1.week = week;
  for (std::size_t k = 0; k < kScaleCount; ++k) {
    const double eps = scales[k].epsilon;
    const auto edges_in =
        static_cast<std::size_t>(std::upper_bound(edge_weight.begin(), edge_weight.end(), eps) - edge_weight.begin());
    const auto vertices_in = static_cast<std::size_t>(
        std::upper_bound(vertex_entry.begin(), vertex_entry.end(), eps) - vertex_entry.begin());
    // Triangles with heaviest-edge rank < edges_in are exactly those present.
    const auto triangles_in = static_cast<std::size_t>(
        std::partition_point(triangles.begin(), triangles.end(),
                             [&](const Triangle& t) { return t.rows[2] < edges_in; }) -
        triangles.begin());
    const std::size_t merges = merges_upto[edges_in];
    const std::size_t b0 = vertices_in - merges;
    const std::size_t rank_d1 = merges;
    out.beta0.values[k] = static_cast<long>(b0);
    out.beta1.values[k] = static_cast<long>(edges_in - rank_d1 - rank_upto[triangles_in]);
  }
  return out;
}

WeeklyBetti weekly_betti(std::span<const UndirectedGraph> graphs, std::span<const std::vector<FiltrationScale>> scales,
                         Execution exec) {
  if (graphs.size() != scales.size()) throw PreconditionError("one scale list per week is required");
  const auto n = static_cast<long>(graphs.size());
  WeeklyBetti out;
  out.pairs.resize(graphs.size());
  out.computed.assign(graphs.size(), 0);
  const auto one = [&](long t) {
    if (scales[t].empty()) return;
    out.pairs[t] = betti_sweep(graphs[t], scales[t], static_cast<int>(t));
    out.computed[t] = 1;
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long t = 0; t < n; ++t) one(t);
  } else {
    for (long t = 0; t < n; ++t) one(t);
  }
  return out;
}

WeeklyBetti weekly_betti_reference(std::span<const UndirectedGraph> graphs,
                                   std::span<const std::vector<FiltrationScale>> scales) {
  if (graphs.size() != scales.size()) throw PreconditionError("one scale list per week is required");
  WeeklyBetti out;
  out.pairs.resize(graphs.size());
  out.computed.assign(graphs.size(), 0);
  for (std::size_t t = 0; t < graphs.size(); ++t) {
    if (scales[t].empty()) continue;
    const int week = static_cast<int>(t);
    out.pairs[t] = {betti_sequence(graphs[t], scales[t], 0, week), betti_sequence(graphs[t], scales[t], 1, week)};
    out.computed[t] = 1;
  }
  return out;
}

}  // namespace txtopo
