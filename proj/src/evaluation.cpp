#include "txtopo/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <ostream>

#include "txtopo/error.hpp"
#include "txtopo/rng.hpp"
#include "txtopo/stats.hpp"

namespace txtopo {

namespace {

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<double> actuals(std::span<const Prediction> predictions) {
  std::vector<double> out;
  out.reserve(predictions.size());
  for (const auto& p : predictions) {
    if (!p.actual) throw PreconditionError("test rows must carry targets");
    out.push_back(*p.actual);
  }
  return out;
}

std::vector<int> weeks_of(std::span<const Prediction> predictions) {
  std::vector<int> out;
  out.reserve(predictions.size());
  for (const auto& p : predictions) out.push_back(p.week);
  return out;
}

}  // namespace

std::vector<FeatureSet> default_feature_sets() {
  std::vector<std::string> basic;
  for (const auto name : kFeatureNames) {
    if (name != "delta_beta0" && name != "motif_2_inc") basic.emplace_back(name);
  }
  auto with = [&](std::initializer_list<const char*> extra) {
    auto f = basic;
    for (const auto* e : extra) f.emplace_back(e);
    return f;
  };
  return {{"basic", basic},
          {"basic+delta_beta0", with({"delta_beta0"})},
          {"basic+motif_2_inc", with({"motif_2_inc"})},
          {"basic+delta_beta0+motif_2_inc", with({"motif_2_inc", "delta_beta0"})}};
}

void EvaluationConfig::validate() const {
  model.validate();
  if (retrains < 1) throw PreconditionError("retrains must be positive");
  if (!(anomaly_q > 0.0 && anomaly_q <= 1.0)) throw PreconditionError("anomaly fraction must lie in (0, 1]");
  if (!(train_fraction > 0.0 && validation_fraction > 0.0 && train_fraction + validation_fraction < 1.0)) {
    throw PreconditionError("train and validation fractions must be positive and sum below 1");
  }
  if (background == 0) throw PreconditionError("background size must be positive");
}

Dataset target_dataset(std::span<const FeatureRow> rows, std::span<const std::string> features) {
  std::vector<FeatureRow> kept;
  kept.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.target) kept.push_back(r);
  }
  return make_dataset(kept, features);
}

std::uint64_t retrain_seed(std::uint64_t master, int index) {
  return derive_seed(master, static_cast<std::uint64_t>(index));
}

AblationReport run_ablation(std::span<const FeatureRow> rows, std::span<const FeatureSet> sets,
                            const EvaluationConfig& config) {
  config.validate();
  if (sets.empty()) throw PreconditionError("no feature sets to compare");
  std::vector<Dataset> data;
  for (const auto& s : sets) data.push_back(target_dataset(rows, s.features));
  const SplitPlan plan = SplitPlan::fractions(data.front().rows(), config.train_fraction, config.validation_fraction);

  AblationReport report;
  report.retrains = config.retrains;
  std::vector<int> test_rows_weeks;
  std::vector<double> test_y;
  for (std::size_t r = plan.val_end; r < plan.end; ++r) {
    test_rows_weeks.push_back(data.front().weeks[r]);
    test_y.push_back(*data.front().y[r]);
  }
  report.test_weeks = test_rows_weeks;
  report.anomalies = detect_anomalous_weeks(test_rows_weeks, test_y, config.anomaly_q);
  std::vector<char> anomalous_mask(test_rows_weeks.size(), 0);
  for (std::size_t i = 0; i < test_rows_weeks.size(); ++i) {
    anomalous_mask[i] = std::find(report.anomalies.weeks.begin(), report.anomalies.weeks.end(), test_rows_weeks[i]) !=
                        report.anomalies.weeks.end();
  }

  const std::size_t n_sets = sets.size();
  const auto n_seeds = static_cast<std::size_t>(config.retrains);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> rmse_all(n_sets * n_seeds, nan), rmse_anom(n_sets * n_seeds, nan);
  std::vector<std::string> errors(n_sets * n_seeds);
  const auto tasks = static_cast<long>(n_sets * n_seeds);

  const auto run_task = [&](long task) {
    const auto s = static_cast<std::size_t>(task) / n_seeds;
    const auto i = static_cast<std::size_t>(task) % n_seeds;
    try {
      ModelConfig model = config.model;
      model.seed = retrain_seed(config.master_seed, static_cast<int>(i));
      const auto run = walk_forward_predict(data[s], plan, model, config.stride);
      std::vector<double> pred;
      for (const auto& p : run.predictions) pred.push_back(p.predicted);
      const auto y = actuals(run.predictions);
      rmse_all[task] = rmse(pred, y);
      if (!report.anomalies.weeks.empty()) rmse_anom[task] = rmse(pred, y, anomalous_mask);
    } catch (const std::exception& e) {
      errors[task] = e.what();
    }
  };
  if (config.exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long task = 0; task < tasks; ++task) run_task(task);
  } else {
    for (long task = 0; task < tasks; ++task) run_task(task);
  }

  for (std::size_t s = 0; s < n_sets; ++s) {
    SetResult res;
    res.set = sets[s];
    double sum_all = 0.0, sum_anom = 0.0;
    for (std::size_t i = 0; i < n_seeds; ++i) {
      const std::size_t task = s * n_seeds + i;
      const auto seed = retrain_seed(config.master_seed, static_cast<int>(i));
      if (!errors[task].empty()) {
        res.failures.push_back("seed " + std::to_string(seed) + ": " + errors[task]);
        continue;
      }
      res.seeds.push_back(seed);
      res.seed_rmse_all.push_back(rmse_all[task]);
      res.seed_rmse_anomalous.push_back(rmse_anom[task]);
      sum_all += rmse_all[task];
      sum_anom += rmse_anom[task];
      const double base = rmse_all[i];
      res.seed_gain_all.push_back(errors[i].empty() && base > 0.0 ? (base - rmse_all[task]) / base : nan);
    }
    const auto k = static_cast<double>(res.seeds.size());
    res.rmse_all = res.seeds.empty() ? nan : sum_all / k;
    res.rmse_anomalous = res.seeds.empty() ? nan : sum_anom / k;
    report.sets.push_back(std::move(res));
  }
  const auto& basic = report.sets.front();
  for (auto& res : report.sets) {
    res.gain_all = basic.rmse_all > 0.0 ? (basic.rmse_all - res.rmse_all) / basic.rmse_all : nan;
    res.gain_anomalous =
        basic.rmse_anomalous > 0.0 ? (basic.rmse_anomalous - res.rmse_anomalous) / basic.rmse_anomalous : nan;
  }
  return report;
}

std::vector<ShapleyReport> explain_predictions(const Dataset& data, const WalkForwardResult& run,
                                               std::size_t background, Execution exec) {
  std::map<std::size_t, std::vector<Eigen::MatrixXd>> backgrounds;
  std::vector<ShapleyReport> out;
  out.reserve(run.predictions.size());
  for (const auto& p : run.predictions) {
    const auto& model = run.models[p.model];
    auto it = backgrounds.find(p.model);
    if (it == backgrounds.end()) {
      it = backgrounds.emplace(p.model, background_windows(model, data, run.model_train_end[p.model], background)).first;
    }
    auto rep = shapley_exact(model, normalized_window(model, data, p.row), it->second, exec);
    rep.week = p.week;
    out.push_back(std::move(rep));
  }
  return out;
}

ShapAnalysis run_shap_analysis(std::span<const FeatureRow> rows, std::span<const std::string> features,
                               const EvaluationConfig& config) {
  config.validate();
  const Dataset data = target_dataset(rows, features);
  const SplitPlan plan = SplitPlan::fractions(data.rows(), config.train_fraction, config.validation_fraction);
  ShapAnalysis out;
  out.features = data.features;
  out.reports.resize(static_cast<std::size_t>(config.retrains));
  for (int i = 0; i < config.retrains; ++i) {
    ModelConfig model = config.model;
    model.seed = retrain_seed(config.master_seed, i);
    const auto run = walk_forward_predict(data, plan, model, config.stride);
    if (i == 0) {
      out.predictions = run.predictions;
      out.test_weeks = weeks_of(run.predictions);
      out.anomalies = detect_anomalous_weeks(out.test_weeks, actuals(run.predictions), config.anomaly_q);
    }
    out.reports[static_cast<std::size_t>(i)] = explain_predictions(data, run, config.background, config.exec);
  }
  out.all_weeks = rank_features(out.reports, out.test_weeks, config.statistic);
  if (!out.anomalies.weeks.empty()) out.anomalous = rank_features(out.reports, out.anomalies.weeks, config.statistic);
  return out;
}

std::vector<CorrelationRow> correlation_table(const std::map<std::string, std::vector<double>>& columns,
                                              std::span<const double> target) {
  std::vector<CorrelationRow> out;
  for (const auto& [name, values] : columns) {
    if (values.size() != target.size()) throw PreconditionError("column " + name + " does not align with the target");
    CorrelationRow row;
    row.feature = name;
    row.n = values.size();
    row.pearson = pearson(values, target);
    row.pearson_p = correlation_p_value(row.pearson, row.n);
    row.spearman = spearman(values, target);
    row.spearman_p = correlation_p_value(row.spearman, row.n);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<CorrelationRow> correlation_table(std::span<const FeatureRow> rows) {
  std::vector<double> target;
  std::array<std::vector<double>, kFeatureCount> cols;
  for (const auto& r : rows) {
    if (!r.target) continue;
    target.push_back(*r.target);
    for (std::size_t f = 0; f < kFeatureCount; ++f) cols[f].push_back(r.values[f]);
  }
  std::vector<CorrelationRow> out;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    auto part = correlation_table({{std::string(kFeatureNames[f]), cols[f]}}, target);
    out.push_back(std::move(part.front()));
  }
  return out;
}

void write_correlation_table(std::ostream& out, std::span<const CorrelationRow> table, double alpha) {
  out << "feature,n,pearson,pearson_p,spearman,spearman_p\n";
  for (const auto& r : table) {
    const auto mark = [&](double p) { return p < alpha ? "*" : ""; };
    out << r.feature << ',' << r.n << ',' << fixed(r.pearson, 4) << mark(r.pearson_p) << ',' << fixed(r.pearson_p, 4)
        << ',' << fixed(r.spearman, 4) << mark(r.spearman_p) << ',' << fixed(r.spearman_p, 4) << '\n';
  }
}

void write_rank_table(std::ostream& out, const ShapAnalysis& analysis) {
  out << "feature,anomalous_weeks_rank,all_weeks_rank\n";
  for (std::size_t f = 0; f < analysis.all_weeks.features.size(); ++f) {
    out << analysis.all_weeks.features[f] << ',';
    if (f < analysis.anomalous.average_rank.size()) {
      out << fixed(analysis.anomalous.average_rank[f], 2);
    } else {
      out << "nan";
    }
    out << ',' << fixed(analysis.all_weeks.average_rank[f], 2) << '\n';
  }
}

void write_ablation_table(std::ostream& out, const AblationReport& report) {
  out << "features,rmse_all,rmse_anomalous,gain_all_pct,gain_anomalous_pct,retrains,failed\n";
  for (const auto& s : report.sets) {
    out << s.set.name << ',' << fixed(s.rmse_all, 6) << ',' << fixed(s.rmse_anomalous, 6) << ','
        << fixed(100.0 * s.gain_all, 2) << ',' << fixed(100.0 * s.gain_anomalous, 2) << ',' << s.seeds.size() << ','
        << s.failures.size() << '\n';
  }
}

void write_shap_csv(std::ostream& out, const ShapAnalysis& analysis) {
  out << "retrain,seed,week,base,output";
  for (const auto& f : analysis.features) out << ',' << f;
  out << '\n';
  for (std::size_t r = 0; r < analysis.reports.size(); ++r) {
    for (const auto& rep : analysis.reports[r]) {
      out << r << ',' << rep.seed << ',' << rep.week << ',' << format_number(rep.base) << ','
          << format_number(rep.output);
      for (const double v : rep.phi) out << ',' << format_number(v);
      out << '\n';
    }
  }
}

void write_predictions_csv(std::ostream& out, std::span<const Prediction> predictions) {
  out << "week,actual,predicted\n";
  for (const auto& p : predictions) {
    out << p.week << ',';
    if (p.actual) out << format_number(*p.actual);
    out << ',' << format_number(p.predicted) << '\n';
  }
}

void write_summary(std::ostream& out, std::span<const CorrelationRow> correlations, const AblationReport& ablation,
                   const ShapAnalysis& analysis, double alpha) {
  char line[160];
  const auto mark = [&](double p) { return p < alpha ? '*' : ' '; };
  out << "Correlation with the target (* p < " << alpha << ")\n";
  std::snprintf(line, sizeof line, "  %-24s %6s %10s %10s\n", "feature", "n", "pearson", "spearman");
  out << line;
  for (const auto& r : correlations) {
    std::snprintf(line, sizeof line, "  %-24s %6zu %9.4f%c %9.4f%c\n", r.feature.c_str(), r.n, r.pearson,
                  mark(r.pearson_p), r.spearman, mark(r.spearman_p));
    out << line;
  }

  out << "\nAverage attribution rank (" << analysis.all_weeks.retrains << " retrains, "
      << analysis.anomalies.weeks.size() << " anomalous of " << analysis.test_weeks.size() << " test weeks)\n";
  std::snprintf(line, sizeof line, "  %-24s %10s %10s\n", "feature", "anomalous", "all weeks");
  out << line;
  for (std::size_t f = 0; f < analysis.all_weeks.features.size(); ++f) {
    const double anomalous =
        f < analysis.anomalous.average_rank.size() ? analysis.anomalous.average_rank[f] : std::nan("");
    std::snprintf(line, sizeof line, "  %-24s %10.2f %10.2f\n", analysis.all_weeks.features[f].c_str(), anomalous,
                  analysis.all_weeks.average_rank[f]);
    out << line;
  }

  out << "\nTest RMSE by feature set (" << ablation.retrains << " retrains; gain relative to "
      << (ablation.sets.empty() ? std::string("-") : ablation.sets.front().set.name) << ")\n";
  std::snprintf(line, sizeof line, "  %-32s %10s %10s %9s %9s\n", "features", "rmse all", "rmse anom", "gain all",
                "gain anom");
  out << line;
  for (const auto& s : ablation.sets) {
    std::snprintf(line, sizeof line, "  %-32s %10.4f %10.4f %8.2f%% %8.2f%%\n", s.set.name.c_str(), s.rmse_all,
                  s.rmse_anomalous, 100.0 * s.gain_all, 100.0 * s.gain_anomalous);
    out << line;
  }
}

}  // namespace txtopo
