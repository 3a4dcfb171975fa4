#pragma once

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "txtopo/graph.hpp"
#include "txtopo/ingest.hpp"
#include "txtopo/time.hpp"

namespace testutil {

/// Records at a fixed instant from (sender, receiver, amount) triples.
inline std::vector<txtopo::TransactionRecord> records(
    const std::vector<std::tuple<std::string, std::string, double>>& arcs,
    const char* when = "2020-01-06T00:00:00Z") {
  std::vector<txtopo::TransactionRecord> out;
  for (const auto& [from, to, amount] : arcs) out.push_back({txtopo::parse_rfc3339(when), from, to, amount});
  return out;
}

inline txtopo::DirectedGraph digraph(const std::vector<std::tuple<std::string, std::string, double>>& arcs) {
  return txtopo::build_digraph(records(arcs));
}

/// Undirected graph on vertices 0..n-1 named v00, v01, ...
inline txtopo::UndirectedGraph undirected(int n, const std::vector<std::tuple<int, int, double>>& edges) {
  txtopo::UndirectedGraph g;
  for (int i = 0; i < n; ++i) g.names.push_back((i < 10 ? "v0" : "v") + std::to_string(i));
  for (auto [u, v, w] : edges) {
    if (u > v) std::swap(u, v);
    g.edges.push_back({static_cast<txtopo::VertexId>(u), static_cast<txtopo::VertexId>(v), w});
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const auto& a, const auto& b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  return g;
}

}  // namespace testutil
