#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "txtopo/ingest.hpp"

namespace txtopo {

/// Dense per-week vertex id. Ids follow the lexicographic order of wallet names,
/// so a week's graph does not depend on record order.
using VertexId = std::uint32_t;

struct Arc {
  VertexId from = 0;
  VertexId to = 0;
  double weight = 0.0;

  bool operator==(const Arc&) const = default;
};

/// Undirected edge with `u < v`.
struct Edge {
  VertexId u = 0;
  VertexId v = 0;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

/// Weekly weighted digraph: one arc per ordered pair, arcs sorted by (from, to).
struct DirectedGraph {
  std::vector<std::string> names;  // id -> wallet
  std::vector<Arc> arcs;

  std::size_t vertex_count() const { return names.size(); }
  double total_weight() const;
};

/// Undirected projection: one edge per unordered pair, edges sorted by (u, v).
struct UndirectedGraph {
  std::vector<std::string> names;
  std::vector<Edge> edges;

  std::size_t vertex_count() const { return names.size(); }
  double total_weight() const;
  std::vector<double> weights() const;
};

/// Sums same-direction transfers into one arc per ordered pair.
DirectedGraph build_digraph(std::span<const TransactionRecord> records);
inline DirectedGraph build_digraph(const WeekWindow& window) { return build_digraph(window.records); }

/// Edge weight is W(u,v) + W(v,u), a missing direction contributing zero.
UndirectedGraph to_undirected(const DirectedGraph& g);

/// Which multiset the top-q cut is taken over.
enum class TopEdgeMode {
  aggregated,   ///< weekly arc totals
  transaction,  ///< raw per-transaction amounts, aggregated after the cut
};

/// Keeps arcs at or above the weight of the ceil(q*|A|)-th heaviest arc. Ties
/// at the cut are kept; vertices shrink to endpoints of retained arcs.
DirectedGraph filter_top_edges(const DirectedGraph& g, double fraction);

/// Transaction-level variant: keeps transfers at or above the ceil(q*n)-th
/// largest amount, then aggregates.
DirectedGraph filter_top_transactions(std::span<const TransactionRecord> records, double fraction);

/// Value of the ceil(q*n)-th largest element; `fraction` in (0, 1]. Elements
/// >= the result make up the top fraction (ties included).
double top_fraction_threshold(std::vector<double> values, double fraction);

/// Writes `edges.txt` (`u v w`) and `ids.txt` (`id wallet`) for oracle cross-checks.
void dump_edge_list(const std::filesystem::path& dir, const UndirectedGraph& g);

}  // namespace txtopo
