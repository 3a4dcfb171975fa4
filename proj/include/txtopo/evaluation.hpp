#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "txtopo/execution.hpp"
#include "txtopo/forecaster.hpp"
#include "txtopo/market.hpp"
#include "txtopo/shapley.hpp"

namespace txtopo {

struct FeatureSet {
  std::string name;
  std::vector<std::string> features;
};

/// basic (market features only), basic+delta_beta0, basic+motif_2_inc and basic+both.
std::vector<FeatureSet> default_feature_sets();

struct EvaluationConfig {
  ModelConfig model;
  int retrains = 20;
  std::uint64_t master_seed = 1;
  std::size_t stride = 1;   // walk-forward refit stride (0 = one fit)
  double anomaly_q = 0.2;
  double train_fraction = 0.6;
  double validation_fraction = 0.2;
  std::size_t background = 24;
  RankStatistic statistic = RankStatistic::mean_absolute;
  Execution exec = Execution::parallel;

  void validate() const;
};

/// Rows with a known target, as a dataset over `features`.
Dataset target_dataset(std::span<const FeatureRow> rows, std::span<const std::string> features);

/// Seed of retrain `index`.
std::uint64_t retrain_seed(std::uint64_t master, int index);

struct SetResult {
  FeatureSet set;
  double rmse_all = 0.0;        // mean over successful retrains
  double rmse_anomalous = 0.0;
  double gain_all = 0.0;        // (basic - set) / basic on the mean RMSEs
  double gain_anomalous = 0.0;
  std::vector<std::uint64_t> seeds;  // successful retrains
  std::vector<double> seed_rmse_all;
  std::vector<double> seed_rmse_anomalous;
  std::vector<double> seed_gain_all;  // against basic with the same seed; NaN if basic failed
  std::vector<std::string> failures;
};

struct AblationReport {
  std::vector<SetResult> sets;  // first is the baseline
  std::vector<int> test_weeks;
  AnomalySelection anomalies;
  int retrains = 0;
};

/// Walk-forward RMSE of every feature set over `config.retrains` seeds. The
/// first set is the baseline for the gains. A retrain that throws is
/// reported and left out.
AblationReport run_ablation(std::span<const FeatureRow> rows, std::span<const FeatureSet> sets,
                            const EvaluationConfig& config);

struct ShapAnalysis {
  std::vector<std::string> features;
  std::vector<int> test_weeks;
  AnomalySelection anomalies;
  std::vector<std::vector<ShapleyReport>> reports;  // [retrain][test week]
  std::vector<Prediction> predictions;              // of the first retrain
  RankTable anomalous;
  RankTable all_weeks;
};

/// Explains every walk-forward test prediction of each retrain with exact
/// Shapley values and ranks the features over anomalous and all test weeks.
ShapAnalysis run_shap_analysis(std::span<const FeatureRow> rows, std::span<const std::string> features,
                               const EvaluationConfig& config);

/// Shapley reports for every prediction of one walk-forward run.
std::vector<ShapleyReport> explain_predictions(const Dataset& data, const WalkForwardResult& run,
                                               std::size_t background, Execution exec);

struct CorrelationRow {
  std::string feature;
  std::size_t n = 0;
  double pearson = 0.0;
  double pearson_p = 1.0;
  double spearman = 0.0;
  double spearman_p = 1.0;
};

/// Correlation of each column with the target over rows that have one.
std::vector<CorrelationRow> correlation_table(std::span<const FeatureRow> rows);
/// Same for arbitrary aligned columns.
std::vector<CorrelationRow> correlation_table(const std::map<std::string, std::vector<double>>& columns,
                                              std::span<const double> target);

void write_correlation_table(std::ostream& out, std::span<const CorrelationRow> table, double alpha = 0.05);
void write_rank_table(std::ostream& out, const ShapAnalysis& analysis);
void write_ablation_table(std::ostream& out, const AblationReport& report);
void write_shap_csv(std::ostream& out, const ShapAnalysis& analysis);
void write_predictions_csv(std::ostream& out, std::span<const Prediction> predictions);

/// Plain-text tables: correlations, average attribution ranks, and RMSE gains.
void write_summary(std::ostream& out, std::span<const CorrelationRow> correlations, const AblationReport& ablation,
                   const ShapAnalysis& analysis, double alpha = 0.05);

}  // namespace txtopo
