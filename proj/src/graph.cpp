#include "txtopo/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "txtopo/error.hpp"

namespace txtopo {

namespace {

std::vector<std::string> sorted_wallets(std::span<const TransactionRecord> records) {
  std::vector<std::string> names;
  names.reserve(records.size() * 2);
  for (const auto& r : records) {
    names.push_back(r.sender);
    names.push_back(r.receiver);
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

VertexId lookup(const std::vector<std::string>& names, const std::string& wallet) {
  const auto it = std::lower_bound(names.begin(), names.end(), wallet);
  return static_cast<VertexId>(it - names.begin());
}

// Restricts `g` to the given arcs and renumbers the surviving vertices.
DirectedGraph compact(const DirectedGraph& g, std::vector<Arc> arcs) {
  std::vector<char> used(g.vertex_count(), 0);
  for (const auto& a : arcs) used[a.from] = used[a.to] = 1;
  std::vector<VertexId> remap(g.vertex_count(), 0);
  DirectedGraph out;
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (!used[i]) continue;
    remap[i] = static_cast<VertexId>(out.names.size());
    out.names.push_back(g.names[i]);
  }
  for (auto& a : arcs) {
    a.from = remap[a.from];
    a.to = remap[a.to];
  }
  out.arcs = std::move(arcs);
  return out;
}

}  // namespace

double DirectedGraph::total_weight() const {
  return std::accumulate(arcs.begin(), arcs.end(), 0.0, [](double s, const Arc& a) { return s + a.weight; });
}

double UndirectedGraph::total_weight() const {
  return std::accumulate(edges.begin(), edges.end(), 0.0, [](double s, const Edge& e) { return s + e.weight; });
}

std::vector<double> UndirectedGraph::weights() const {
  std::vector<double> w;
  w.reserve(edges.size());
  for (const auto& e : edges) w.push_back(e.weight);
  return w;
}

DirectedGraph build_digraph(std::span<const TransactionRecord> records) {
  DirectedGraph g;
  g.names = sorted_wallets(records);
  std::vector<Arc> raw;
  raw.reserve(records.size());
  for (const auto& r : records) {
    raw.push_back({lookup(g.names, r.sender), lookup(g.names, r.receiver), r.amount});
  }
  // Sorting by amount inside a pair fixes the summation order, so the arc
  // weight does not depend on record order.
  std::sort(raw.begin(), raw.end(), [](const Arc& a, const Arc& b) {
    if (a.from != b.from) return a.from < b.from;
    if (a.to != b.to) return a.to < b.to;
    return a.weight < b.weight;
  });
  for (const auto& a : raw) {
    if (!g.arcs.empty() && g.arcs.back().from == a.from && g.arcs.back().to == a.to) {
      g.arcs.back().weight += a.weight;
    } else {
      g.arcs.push_back(a);
    }
  }
  return g;
}

UndirectedGraph to_undirected(const DirectedGraph& g) {
  UndirectedGraph u;
  u.names = g.names;
  std::vector<Edge> raw;
  raw.reserve(g.arcs.size());
  for (const auto& a : g.arcs) raw.push_back({std::min(a.from, a.to), std::max(a.from, a.to), a.weight});
  std::sort(raw.begin(), raw.end(), [](const Edge& a, const Edge& b) {
    if (a.u != b.u) return a.u < b.u;
    if (a.v != b.v) return a.v < b.v;
    return a.weight < b.weight;
  });
  for (const auto& e : raw) {
    if (!u.edges.empty() && u.edges.back().u == e.u && u.edges.back().v == e.v) {
      u.edges.back().weight += e.weight;
    } else {
      u.edges.push_back(e);
    }
  }
  return u;
}

double top_fraction_threshold(std::vector<double> values, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw PreconditionError("top fraction must lie in (0, 1]");
  if (values.empty()) throw PreconditionError("top fraction of an empty set");
  const auto n = values.size();
  auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  keep = std::clamp<std::size_t>(keep, 1, n);
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(keep - 1);
  std::nth_element(values.begin(), nth, values.end(), std::greater<>{});
  return *nth;
}

DirectedGraph filter_top_edges(const DirectedGraph& g, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw PreconditionError("top fraction must lie in (0, 1]");
  if (g.arcs.empty()) return {};
  std::vector<double> weights;
  weights.reserve(g.arcs.size());
  for (const auto& a : g.arcs) weights.push_back(a.weight);
  const double cut = top_fraction_threshold(std::move(weights), fraction);
  std::vector<Arc> kept;
  std::copy_if(g.arcs.begin(), g.arcs.end(), std::back_inserter(kept), [cut](const Arc& a) { return a.weight >= cut; });
  return compact(g, std::move(kept));
}

DirectedGraph filter_top_transactions(std::span<const TransactionRecord> records, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw PreconditionError("top fraction must lie in (0, 1]");
  if (records.empty()) return {};
  std::vector<double> amounts;
  amounts.reserve(records.size());
  for (const auto& r : records) amounts.push_back(r.amount);
  const double cut = top_fraction_threshold(std::move(amounts), fraction);
  std::vector<TransactionRecord> kept;
  std::copy_if(records.begin(), records.end(), std::back_inserter(kept),
               [cut](const TransactionRecord& r) { return r.amount >= cut; });
  return build_digraph(kept);
}

void dump_edge_list(const std::filesystem::path& dir, const UndirectedGraph& g) {
  std::filesystem::create_directories(dir);
  std::ofstream edges(dir / "edges.txt");
  for (const auto& e : g.edges) edges << e.u << ' ' << e.v << ' ' << format_number(e.weight) << '\n';
  std::ofstream ids(dir / "ids.txt");
  for (std::size_t i = 0; i < g.names.size(); ++i) ids << i << ' ' << g.names[i] << '\n';
}

}  // namespace txtopo
