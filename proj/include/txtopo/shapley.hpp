#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "txtopo/execution.hpp"
#include "txtopo/forecaster.hpp"

namespace txtopo {

struct ShapleyReport {
  int week = 0;
  std::vector<std::string> features;
  std::vector<double> phi;  // one per feature, 0 for features the model dropped
  double base = 0.0;        // mean output over the background
  double output = 0.0;      // model output on the instance
  std::uint64_t seed = 0;   // training seed of the explained model

  /// |sum(phi) + base - output|
  double efficiency_residual() const;
};

/// Shapley values of an n-player game given every coalition value:
/// `values[mask]` is v(S) for the players whose bits are set in `mask`.
std::vector<double> shapley_from_coalitions(int players, std::span<const double> values);

/// Exact interventional Shapley values of the model output. A coalition's
/// value is the mean output over background windows where the coalition's
/// features are replaced, in every row of the window, by the instance's.
/// `instance` and each background entry are normalized windows
/// (window x kept features).
ShapleyReport shapley_exact(const TrainedModel& model, const Eigen::MatrixXd& instance,
                            std::span<const Eigen::MatrixXd> background, Execution exec = Execution::parallel);

/// Up to `count` training windows of `model`, evenly spaced over rows
/// [window - 1, train_end) of `data`.
std::vector<Eigen::MatrixXd> background_windows(const TrainedModel& model, const Dataset& data, std::size_t train_end,
                                                std::size_t count);

enum class RankStatistic {
  mean_absolute,  ///< importance = mean |phi| over the week set
  signed_mean,    ///< importance = mean phi
};

/// Average rank of each feature (1 = most important; ties share the mean rank).
struct RankTable {
  std::vector<std::string> features;
  std::vector<double> average_rank;
  std::size_t retrains = 0;
};

/// Ranks (1..n, ties averaged) of `scores`, largest first.
std::vector<double> descending_ranks(std::span<const double> scores);

/// `reports[r]` holds retrain r's reports; every retrain must cover every
/// week in `weeks`. Throws DataError otherwise.
RankTable rank_features(std::span<const std::vector<ShapleyReport>> reports, std::span<const int> weeks,
                        RankStatistic statistic = RankStatistic::mean_absolute);

struct AnomalySelection {
  std::vector<int> weeks;
  bool warning = false;
  std::string message;
};

/// Weeks whose |y| is at least the ceil(q*n)-th largest |y|; ties at the cut
/// are kept. When every |y| is equal the warning is set, and nothing is
/// selected if that common value is zero.
AnomalySelection detect_anomalous_weeks(std::span<const int> weeks, std::span<const double> y, double q = 0.2);

}  // namespace txtopo
