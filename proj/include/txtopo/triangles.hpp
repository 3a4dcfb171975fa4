#pragma once

#include <cstdint>
#include <vector>

namespace txtopo {

/// Triangles of an undirected simple graph given as sorted adjacency lists.
/// Each triangle is reported once as (a, b, c) with a < b < c.
template <typename Visit>
void for_each_triangle(const std::vector<std::vector<std::uint32_t>>& adjacency, Visit&& visit) {
  for (std::uint32_t a = 0; a < adjacency.size(); ++a) {
    const auto& na = adjacency[a];
    for (const std::uint32_t b : na) {
      if (b <= a) continue;
      const auto& nb = adjacency[b];
      auto ia = na.begin();
      auto ib = nb.begin();
      while (ia != na.end() && ib != nb.end()) {
        if (*ia < *ib) {
          ++ia;
        } else if (*ib < *ia) {
          ++ib;
        } else {
          if (*ia > b) visit(a, b, *ia);
          ++ia;
          ++ib;
        }
      }
    }
  }
}

}  // namespace txtopo
