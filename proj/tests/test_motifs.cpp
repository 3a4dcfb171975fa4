#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "txtopo/error.hpp"
#include "txtopo/motifs.hpp"

using namespace txtopo;
using testutil::digraph;

namespace {

DirectedGraph random_digraph(std::mt19937_64& gen, int n, double p_pair, double p_mutual) {
  std::vector<std::tuple<std::string, std::string, double>> arcs;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (u(gen) >= p_pair) continue;
      const std::string x = "w" + std::to_string(a), y = "w" + std::to_string(b);
      if (u(gen) < p_mutual) {
        arcs.emplace_back(x, y, 1.0);
        arcs.emplace_back(y, x, 1.0);
      } else if (u(gen) < 0.5) {
        arcs.emplace_back(x, y, 1.0);
      } else {
        arcs.emplace_back(y, x, 1.0);
      }
    }
  }
  // Isolated vertices still count toward the vertex set.
  for (int a = 0; a < n; ++a) arcs.emplace_back("w" + std::to_string(a), "sink", 1e-9);
  return digraph(arcs);
}

}  // namespace

TEST_CASE("single-triad censuses") {
  CHECK(census_triads(digraph({{"A", "B", 1}, {"B", "A", 1}, {"B", "C", 1}, {"C", "B", 1}})).counts ==
        std::array<long long, 3>{1, 0, 0});
  CHECK(census_triads(digraph({{"A", "B", 1}, {"B", "A", 1}, {"B", "C", 1}, {"C", "B", 1}, {"A", "C", 1},
                               {"C", "A", 1}}))
            .counts == std::array<long long, 3>{0, 0, 1});
  CHECK(census_triads(digraph({{"A", "B", 1}, {"B", "A", 1}, {"B", "C", 1}, {"C", "A", 1}})).counts ==
        std::array<long long, 3>{0, 1, 0});
  CHECK(census_triads(DirectedGraph{}).counts == std::array<long long, 3>{});
}

TEST_CASE("non-induced counting includes supersets") {
  const auto full = digraph({{"A", "B", 1}, {"B", "A", 1}, {"B", "C", 1}, {"C", "B", 1}, {"A", "C", 1}, {"C", "A", 1}});
  const auto c = census_triads(full, MotifSemantics::non_induced);
  CHECK(c.counts == oracle::brute_motifs(full, false));
  CHECK(c.counts[0] == 1);
  CHECK(c.counts[2] == 1);
  CHECK(c.counts[1] == 1);
}

TEST_CASE("pattern classes are disjoint and invariant under relabeling") {
  int classified = 0;
  for (int p = 0; p < 64; ++p) {
    const int cls = motif_class(static_cast<TriadPattern>(p));
    if (cls) {
      ++classified;
      CHECK(motif_contained(static_cast<TriadPattern>(p), cls));
    }
  }
  // 3 relabelings of motif 1, 6 of motif 2, 1 of motif 3.
  CHECK(classified == 10);
}

TEST_CASE("census matches the brute-force triple oracle") {
  std::mt19937_64 gen(21);
  for (int round = 0; round < 150; ++round) {
    const int n = 3 + static_cast<int>(gen() % 28);
    const auto g = random_digraph(gen, n, 0.15 + 0.5 * (round % 3) / 2.0, 0.5);
    for (const bool induced : {true, false}) {
      const auto c = census_triads(g, induced ? MotifSemantics::induced : MotifSemantics::non_induced);
      CHECK(c.counts == oracle::brute_motifs(g, induced));
    }
  }
}

TEST_CASE("motif increments") {
  MotifCensus a{3, {1, 5, 2}}, b{4, {1, 9, 2}};
  CHECK(motif_increment(b, MotifCensus{3, b.counts}).deltas == std::array<long long, 3>{});
  CHECK(motif_increment(b, a).deltas[1] == 4);
  CHECK_THROWS_AS(motif_increment(MotifCensus{0, {}}, MotifCensus{0, {}}), PreconditionError);
  CHECK_THROWS_AS(motif_increment(MotifCensus{5, {}}, a), PreconditionError);
}

TEST_CASE("weekly census is the same on both paths") {
  std::mt19937_64 gen(8);
  std::vector<DirectedGraph> graphs;
  for (int t = 0; t < 10; ++t) graphs.push_back(random_digraph(gen, 40, 0.2, 0.4));
  const auto par = weekly_census(graphs, MotifSemantics::induced, Execution::parallel);
  const auto ser = weekly_census(graphs, MotifSemantics::induced, Execution::serial);
  CHECK(par == ser);
  CHECK(par[6].week == 6);
}
