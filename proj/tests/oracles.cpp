#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace oracle {

std::size_t dense_gf2_rank(std::vector<std::vector<char>> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && !rows[pivot][c]) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[rank]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != rank && rows[r][c]) {
        for (std::size_t k = 0; k < cols; ++k) rows[r][k] ^= rows[rank][k];
      }
    }
    ++rank;
  }
  return rank;
}

std::pair<long, long> simplicial_betti(int n, const std::vector<std::pair<int, int>>& edge_list) {
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  std::set<std::pair<int, int>> edges;
  for (auto [a, b] : edge_list) {
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    edges.insert({a, b});
    adj[a][b] = adj[b][a] = 1;
  }
  std::vector<int> vertices;
  for (int v = 0; v < n; ++v) {
    if (std::any_of(adj[v].begin(), adj[v].end(), [](char x) { return x != 0; })) vertices.push_back(v);
  }
  const std::vector<std::pair<int, int>> e(edges.begin(), edges.end());
  std::vector<std::array<int, 3>> triangles;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        if (adj[a][b] && adj[b][c] && adj[a][c]) triangles.push_back({a, b, c});

  // d1: vertices x edges
  std::vector<std::vector<char>> d1(vertices.size(), std::vector<char>(e.size(), 0));
  for (std::size_t j = 0; j < e.size(); ++j) {
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if (vertices[i] == e[j].first || vertices[i] == e[j].second) d1[i][j] = 1;
    }
  }
  // d2: edges x triangles
  std::vector<std::vector<char>> d2(e.size(), std::vector<char>(triangles.size(), 0));
  for (std::size_t j = 0; j < triangles.size(); ++j) {
    const auto& t = triangles[j];
    const std::pair<int, int> faces[3] = {{t[0], t[1]}, {t[0], t[2]}, {t[1], t[2]}};
    for (const auto& f : faces) {
      const auto idx = std::find(e.begin(), e.end(), f) - e.begin();
      d2[static_cast<std::size_t>(idx)][j] = 1;
    }
  }
  const long r1 = static_cast<long>(dense_gf2_rank(d1));
  const long r2 = triangles.empty() ? 0 : static_cast<long>(dense_gf2_rank(d2));
  const long b0 = static_cast<long>(vertices.size()) - r1;
  const long b1 = static_cast<long>(e.size()) - r1 - r2;
  return {b0, b1};
}

namespace {

using ArcSet = std::set<std::pair<int, int>>;

// Motif arc sets on labels 0, 1, 2.
const ArcSet kMotifs[3] = {
    {{0, 1}, {1, 0}, {1, 2}, {2, 1}},                  // a<->b, b<->c
    {{0, 1}, {1, 0}, {1, 2}, {2, 0}},                  // a<->b, b->c, c->a
    {{0, 1}, {1, 0}, {1, 2}, {2, 1}, {0, 2}, {2, 0}},  // all mutual
};

}  // namespace

std::array<long long, 3> brute_motifs(const txtopo::DirectedGraph& g, bool induced) {
  const int n = static_cast<int>(g.vertex_count());
  std::set<std::pair<int, int>> arcs;
  for (const auto& a : g.arcs) arcs.insert({static_cast<int>(a.from), static_cast<int>(a.to)});
  std::array<long long, 3> counts{};
  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) {
      for (int z = y + 1; z < n; ++z) {
        const int triple[3] = {x, y, z};
        ArcSet present;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            if (i != j && arcs.count({triple[i], triple[j]})) present.insert({i, j});
        for (int m = 0; m < 3; ++m) {
          std::array<int, 3> perm{0, 1, 2};
          bool hit = false;
          do {
            ArcSet mapped;
            for (const auto& [u, v] : kMotifs[m]) mapped.insert({perm[u], perm[v]});
            if (induced) {
              hit = mapped == present;
            } else {
              hit = std::includes(present.begin(), present.end(), mapped.begin(), mapped.end());
            }
          } while (!hit && std::next_permutation(perm.begin(), perm.end()));
          if (hit) ++counts[m];
        }
      }
    }
  }
  return counts;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<double> scalar_lstm(const txtopo::LstmParameters& params, const std::vector<Eigen::MatrixXd>& steps) {
  const auto& shape = params.shape();
  const int H = shape.hidden;
  const auto& flat = params.flat();
  const long batch = steps.front().cols();
  std::vector<double> out(static_cast<std::size_t>(batch));
  for (long col = 0; col < batch; ++col) {
    std::vector<std::vector<double>> inputs;
    for (const auto& s : steps) inputs.emplace_back(s.col(col).data(), s.col(col).data() + s.rows());
    long offset = 0;
    for (int layer = 0; layer < shape.layers; ++layer) {
      const int in = layer == 0 ? shape.input : H;
      // Column-major blocks: W is 4H x in, U is 4H x H.
      const auto W = [&](int r, int c) { return flat[offset + c * 4 * H + r]; };
      const long u_off = offset + 4L * H * in;
      const auto U = [&](int r, int c) { return flat[u_off + c * 4 * H + r]; };
      const long b_off = u_off + 4L * H * H;
      std::vector<double> h(H, 0.0), c(H, 0.0);
      std::vector<std::vector<double>> outputs;
      for (const auto& x : inputs) {
        std::vector<double> z(4 * H);
        for (int r = 0; r < 4 * H; ++r) {
          double acc = flat[b_off + r];
          for (int k = 0; k < in; ++k) acc += W(r, k) * x[k];
          for (int k = 0; k < H; ++k) acc += U(r, k) * h[k];
          z[r] = acc;
        }
        for (int k = 0; k < H; ++k) {
          const double i = sigmoid(z[k]);
          const double f = sigmoid(z[H + k]);
          const double g = std::tanh(z[2 * H + k]);
          const double o = sigmoid(z[3 * H + k]);
          c[k] = f * c[k] + i * g;
          h[k] = o * std::tanh(c[k]);
        }
        outputs.push_back(h);
      }
      inputs = std::move(outputs);
      offset = b_off + 4L * H;
    }
    double y = flat[offset + H];
    for (int k = 0; k < H; ++k) y += flat[offset + k] * inputs.back()[k];
    out[static_cast<std::size_t>(col)] = y;
  }
  return out;
}

std::vector<double> permutation_shapley(int players, const std::function<double(std::uint32_t)>& value) {
  std::vector<int> order(players);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(players, 0.0);
  double count = 0.0;
  do {
    std::uint32_t mask = 0;
    double before = value(0);
    for (const int p : order) {
      mask |= 1u << p;
      const double after = value(mask);
      phi[p] += after - before;
      before = after;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& v : phi) v /= count;
  return phi;
}

double t_test_p_value(double r, std::size_t n) {
  const double df = static_cast<double>(n) - 2.0;
  const double t = std::abs(r) * std::sqrt(df / (1.0 - r * r));
  const double norm = std::exp(std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0)) / std::sqrt(df * M_PI);
  const auto pdf = [&](double x) { return norm * std::pow(1.0 + x * x / df, -(df + 1.0) / 2.0); };
  // P(|T| > t) = 1 - 2 * integral_0^t pdf, composite Simpson.
  const int steps = 20000;
  const double h = t / steps;
  double sum = pdf(0.0) + pdf(t);
  for (int i = 1; i < steps; ++i) sum += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
  return 1.0 - 2.0 * (sum * h / 3.0);
}

}  // namespace oracle
