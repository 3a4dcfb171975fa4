#pragma once

// Brute-force reference computations used to check the library kernels.
// None of them share code with the kernels they check.

#include <array>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "txtopo/graph.hpp"
#include "txtopo/lstm.hpp"

namespace oracle {

/// Rank over GF(2) of a dense 0/1 matrix by Gaussian elimination.
std::size_t dense_gf2_rank(std::vector<std::vector<char>> rows);

/// beta_0 and beta_1 of the flag complex (up to triangles) spanned by `edges`
/// over vertices 0..n-1; only vertices touched by an edge are included.
/// Builds both boundary matrices densely.
std::pair<long, long> simplicial_betti(int n, const std::vector<std::pair<int, int>>& edges);

/// Motif counts (1..3) by testing every vertex triple against every
/// relabeling of each motif's arc set.
std::array<long long, 3> brute_motifs(const txtopo::DirectedGraph& g, bool induced);

/// LSTM output per batch column computed with scalar loops from the flat
/// parameter layout (per layer W, U, b in gate order i, f, g, o; then head).
std::vector<double> scalar_lstm(const txtopo::LstmParameters& params, const std::vector<Eigen::MatrixXd>& steps);

/// Shapley values as the average marginal contribution over all orderings.
std::vector<double> permutation_shapley(int players, const std::function<double(std::uint32_t)>& value);

/// Two-sided p-value of a Pearson coefficient from the Student t density,
/// integrated numerically.
double t_test_p_value(double r, std::size_t n);

}  // namespace oracle
