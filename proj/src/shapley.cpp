#include "txtopo/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include "txtopo/error.hpp"
#include "txtopo/graph.hpp"

namespace txtopo {

double ShapleyReport::efficiency_residual() const {
  return std::abs(std::accumulate(phi.begin(), phi.end(), 0.0) + base - output);
}

std::vector<double> shapley_from_coalitions(int players, std::span<const double> values) {
  if (players < 1 || players > 20) throw PreconditionError("exact Shapley values need 1 to 20 players");
  const std::size_t n_masks = std::size_t{1} << players;
  if (values.size() != n_masks) throw PreconditionError("one value per coalition is required");
  // weight[s] = s! (n - s - 1)! / n!
  std::vector<double> weight(static_cast<std::size_t>(players));
  for (int s = 0; s < players; ++s) {
    double w = 1.0 / players;
    for (int k = 1; k <= s; ++k) w *= static_cast<double>(k) / static_cast<double>(players - k);
    weight[static_cast<std::size_t>(s)] = w;
  }
  std::vector<double> phi(static_cast<std::size_t>(players), 0.0);
  for (int i = 0; i < players; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    double acc = 0.0;
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
      if (mask & bit) continue;
      const int size = std::popcount(mask);
      acc += weight[static_cast<std::size_t>(size)] * (values[mask | bit] - values[mask]);
    }
    phi[static_cast<std::size_t>(i)] = acc;
  }
  return phi;
}

ShapleyReport shapley_exact(const TrainedModel& model, const Eigen::MatrixXd& instance,
                            std::span<const Eigen::MatrixXd> background, Execution exec) {
  if (background.empty()) throw PreconditionError("Shapley values need a non-empty background set");
  const int players = model.norm.kept_count();
  const int L = model.config.window;
  if (instance.rows() != L || instance.cols() != players) throw PreconditionError("instance window has the wrong shape");
  for (const auto& b : background) {
    if (b.rows() != L || b.cols() != players) throw PreconditionError("background window has the wrong shape");
  }
  const std::size_t n_masks = std::size_t{1} << players;
  const auto B = static_cast<Eigen::Index>(background.size());

  // Coalitions are evaluated in fixed-size chunks so the result does not
  // depend on the thread count.
  constexpr std::size_t kChunk = 32;
  const std::size_t n_chunks = (n_masks + kChunk - 1) / kChunk;
  std::vector<double> values(n_masks, 0.0);
  const auto eval_chunk = [&](std::size_t chunk) {
    const std::size_t lo = chunk * kChunk;
    const std::size_t hi = std::min(n_masks, lo + kChunk);
    const auto cols = static_cast<Eigen::Index>(hi - lo) * B;
    SequenceBatch steps(static_cast<std::size_t>(L), Eigen::MatrixXd(players, cols));
    for (std::size_t mask = lo; mask < hi; ++mask) {
      for (Eigen::Index b = 0; b < B; ++b) {
        const Eigen::Index col = static_cast<Eigen::Index>(mask - lo) * B + b;
        for (int t = 0; t < L; ++t) {
          auto dst = steps[static_cast<std::size_t>(t)].col(col);
          for (int f = 0; f < players; ++f) {
            dst[f] = (mask >> f) & 1 ? instance(t, f) : background[static_cast<std::size_t>(b)](t, f);
          }
        }
      }
    }
    const Eigen::RowVectorXd out = lstm_forward(model.params, steps);
    for (std::size_t mask = lo; mask < hi; ++mask) {
      double sum = 0.0;
      for (Eigen::Index b = 0; b < B; ++b) sum += out[static_cast<Eigen::Index>(mask - lo) * B + b];
      values[mask] = (sum / static_cast<double>(B)) * model.norm.target_scale + model.norm.target_mean;
    }
  };
  const auto n = static_cast<long>(n_chunks);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long c = 0; c < n; ++c) eval_chunk(static_cast<std::size_t>(c));
  } else {
    for (long c = 0; c < n; ++c) eval_chunk(static_cast<std::size_t>(c));
  }

  const std::vector<double> phi_kept = shapley_from_coalitions(players, values);
  ShapleyReport report;
  report.features = model.features;
  report.phi.assign(model.features.size(), 0.0);
  std::size_t k = 0;
  for (std::size_t f = 0; f < model.features.size(); ++f) {
    if (model.norm.kept[f]) report.phi[f] = phi_kept[k++];
  }
  report.base = values.front();
  report.output = lstm_predict(model, instance);
  report.seed = model.config.seed;
  return report;
}

std::vector<Eigen::MatrixXd> background_windows(const TrainedModel& model, const Dataset& data, std::size_t train_end,
                                                std::size_t count) {
  const auto L = static_cast<std::size_t>(model.config.window);
  std::vector<std::size_t> rows;
  for (std::size_t i = L - 1; i < std::min(train_end, data.rows()); ++i) rows.push_back(i);
  if (rows.empty() || count == 0) throw PreconditionError("no training windows for the background set");
  std::vector<Eigen::MatrixXd> out;
  if (count >= rows.size()) {
    for (const auto r : rows) out.push_back(normalized_window(model, data, r));
    return out;
  }
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t pick = (j * (rows.size() - 1)) / std::max<std::size_t>(count - 1, 1);
    out.push_back(normalized_window(model, data, rows[pick]));
  }
  return out;
}

std::vector<double> descending_ranks(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<double> ranks(scores.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

RankTable rank_features(std::span<const std::vector<ShapleyReport>> reports, std::span<const int> weeks,
                        RankStatistic statistic) {
  if (reports.empty()) throw DataError("no retrains to rank");
  if (weeks.empty()) throw DataError("empty week set");
  RankTable table;
  table.retrains = reports.size();
  for (std::size_t r = 0; r < reports.size(); ++r) {
    std::map<int, const ShapleyReport*> by_week;
    for (const auto& rep : reports[r]) by_week[rep.week] = &rep;
    std::vector<double> importance;
    for (const int w : weeks) {
      const auto it = by_week.find(w);
      if (it == by_week.end()) {
        throw DataError("retrain " + std::to_string(r) + " has no report for week " + std::to_string(w));
      }
      const auto& rep = *it->second;
      if (table.features.empty()) table.features = rep.features;
      if (rep.features != table.features) throw DataError("reports disagree on the feature list");
      if (importance.empty()) importance.assign(rep.phi.size(), 0.0);
      for (std::size_t f = 0; f < rep.phi.size(); ++f) {
        importance[f] += statistic == RankStatistic::mean_absolute ? std::abs(rep.phi[f]) : rep.phi[f];
      }
    }
    for (auto& v : importance) v /= static_cast<double>(weeks.size());
    const auto ranks = descending_ranks(importance);
    if (table.average_rank.empty()) table.average_rank.assign(ranks.size(), 0.0);
    for (std::size_t f = 0; f < ranks.size(); ++f) table.average_rank[f] += ranks[f];
  }
  for (auto& v : table.average_rank) v /= static_cast<double>(reports.size());
  return table;
}

AnomalySelection detect_anomalous_weeks(std::span<const int> weeks, std::span<const double> y, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw PreconditionError("anomaly fraction must lie in (0, 1]");
  if (weeks.size() != y.size()) throw PreconditionError("weeks and increments must align");
  AnomalySelection sel;
  if (y.empty()) return sel;
  std::vector<double> magnitude;
  magnitude.reserve(y.size());
  for (const double v : y) magnitude.push_back(std::abs(v));
  const auto [lo, hi] = std::minmax_element(magnitude.begin(), magnitude.end());
  if (*lo == *hi) {
    sel.warning = true;
    if (*hi == 0.0) {
      sel.message = "increments are all zero; no anomalous weeks";
      return sel;
    }
    sel.message = "all increments have equal magnitude; every week ties at the threshold";
  }
  const double cut = top_fraction_threshold(magnitude, q);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (magnitude[i] >= cut) sel.weeks.push_back(weeks[i]);
  }
  return sel;
}

}  // namespace txtopo
