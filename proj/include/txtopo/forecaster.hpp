#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "txtopo/lstm.hpp"
#include "txtopo/market.hpp"

namespace txtopo {

struct ModelConfig {
  int hidden = 16;
  int layers = 2;
  int window = 8;  // weeks per input sequence
  double learning_rate = 1e-2;
  int epochs = 300;
  int patience = 60;
  double clip_norm = 1.0;
  std::uint64_t seed = 1;

  /// Throws PreconditionError for non-positive settings.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Feature table in model form: `x` is rows x features, `y[i]` the target of row i.
struct Dataset {
  std::vector<std::string> features;
  std::vector<int> weeks;
  Eigen::MatrixXd x;
  std::vector<std::optional<double>> y;

  std::size_t rows() const { return weeks.size(); }
  /// First `n` rows only.
  Dataset head(std::size_t n) const;
};

/// Selects feature columns (all nine when `features` is empty).
Dataset make_dataset(std::span<const FeatureRow> rows, std::span<const std::string> features = {});

/// Chronological split of row indices: train [0, train_end), validation
/// [train_end, val_end), test [val_end, end).
struct SplitPlan {
  std::size_t train_end = 0;
  std::size_t val_end = 0;
  std::size_t end = 0;

  static SplitPlan fractions(std::size_t n, double train = 0.6, double validation = 0.2);
  std::size_t validation_size() const { return val_end - train_end; }
};

/// z-score transform fitted on training rows. Features with zero training
/// variance are dropped (`kept[f] == 0`). The target is standardized too.
struct Normalization {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<char> kept;
  double target_mean = 0.0;
  double target_scale = 1.0;

  int kept_count() const;
};

struct TrainedModel {
  ModelConfig config;
  std::vector<std::string> features;
  Normalization norm;
  LstmParameters params;
  double best_validation_loss = 0.0;
  int epochs_run = 0;
};

Normalization fit_normalization(const Dataset& data, std::size_t train_end);

/// Normalized input window (window x kept features) ending at `row`.
Eigen::MatrixXd normalized_window(const TrainedModel& model, const Dataset& data, std::size_t row);

/// Forecast in target units from a normalized window of exactly
/// `config.window` rows and `kept_count()` columns.
double lstm_predict(const TrainedModel& model, const Eigen::MatrixXd& window);

/// Batched version: each window becomes one batch column.
Eigen::RowVectorXd lstm_predict_batch(const TrainedModel& model, std::span<const Eigen::MatrixXd> windows);

/// Full-batch Adam on training windows, early stopping on validation MSE,
/// returning the best-validation parameters.
TrainedModel train(const Dataset& data, const SplitPlan& plan, const ModelConfig& config);

struct Prediction {
  int week = 0;
  std::optional<double> actual;
  double predicted = 0.0;
  std::size_t row = 0;
  std::size_t model = 0;  // index into WalkForwardResult::models
};

struct WalkForwardResult {
  std::vector<Prediction> predictions;
  std::vector<TrainedModel> models;
  std::vector<std::size_t> model_train_end;  // training rows used by each model
  std::vector<std::string> notices;
};

/// Predicts every test row [val_end, end) with a model trained only on
/// earlier rows. The model is refit every `stride` rows (0 = fit once at the
/// start of the test period); each refit trains on all earlier rows, holding
/// the most recent validation_size() rows out for early stopping.
WalkForwardResult walk_forward_predict(const Dataset& data, const SplitPlan& plan, const ModelConfig& config,
                                       std::size_t stride = 1);

/// Largest relative difference between analytic and central-difference
/// gradients of a randomly initialized model on a random batch. The
/// relative error of one entry is |a - n| / max(|a|, |n|, 1e-6).
/// `h` must lie in [1e-6, 1e-4].
double gradient_check(const ModelConfig& config, int input_width, int batch, std::uint64_t seed, double h = 1e-5,
                      bool zero_inputs = false);

/// Analytic gradient used by gradient_check, exposed for tests.
Eigen::VectorXd gradient_for_batch(const LstmParameters& params, std::span<const Eigen::MatrixXd> steps,
                                   const Eigen::RowVectorXd& targets);

void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace txtopo
