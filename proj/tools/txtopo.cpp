// Command-line front end: ingest, feature extraction, training, attribution,
// ablation, synthetic data and reports.

#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "txtopo/config.hpp"
#include "txtopo/error.hpp"
#include "txtopo/evaluation.hpp"
#include "txtopo/features.hpp"
#include "txtopo/forecaster.hpp"
#include "txtopo/ingest.hpp"
#include "txtopo/synth.hpp"

namespace fs = std::filesystem;
using namespace txtopo;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::vector<FeatureRow> read_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_feature_csv(in);
}

struct InputPaths {
  fs::path tx, price, issuance, trends;
  std::string anchor;
  bool strict = false;
};

std::vector<WeekWindow> load_windows(const InputPaths& in) {
  TransactionFormat format;
  format.mode = in.strict ? ParseMode::strict : ParseMode::lenient;
  const auto parsed = read_transactions_file(in.tx, format);
  for (const auto& issue : parsed.issues) std::cerr << "line " << issue.line << ": " << issue.message << '\n';
  const Timestamp anchor =
      in.anchor.empty() ? default_anchor(parsed.records) : Timestamp{parse_date(in.anchor)};
  return partition_weeks(parsed.records, anchor);
}

// Resolves --set NAME or --columns a,b into a feature list.
std::vector<std::string> resolve_features(const std::string& set, const std::string& columns) {
  if (!columns.empty()) {
    std::vector<std::string> out;
    std::stringstream ss(columns);
    for (std::string item; std::getline(ss, item, ',');) {
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }
  for (const auto& s : default_feature_sets()) {
    if (s.name == set) return s.features;
  }
  if (set == "all") return {};
  throw PreconditionError("unknown feature set '" + set + "'");
}

}  // namespace

int main(int argc, char** argv) {
  Settings settings;
  // A config file is applied first so that flags override it.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        load_settings(argv[i + 1], settings);
      } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
      }
    }
  }

  CLI::App app{"Weekly transaction-graph topology features and price-increment forecasting"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  int threads = 0;
  bool serial = false;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value settings file");
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");
  app.add_flag("--serial", serial, "run kernels on the serial path");
  app.add_option("--setting", overrides, "override one setting, key=value (repeatable)");

  auto& model = settings.evaluation.model;
  auto& eval = settings.evaluation;
  auto& scenario = settings.scenario;

  // ingest
  InputPaths inputs;
  fs::path out_dir;
  auto* ingest = app.add_subcommand("ingest", "split a transaction CSV into weekly windows");
  ingest->add_option("--tx", inputs.tx, "transactions CSV")->required();
  ingest->add_option("--anchor", inputs.anchor, "Monday of week 0 (YYYY-MM-DD)");
  ingest->add_flag("--strict", inputs.strict, "fail on the first malformed line");
  ingest->add_option("--out", out_dir, "output directory")->required();

  // features
  std::string kind = "all";
  auto* features = app.add_subcommand("features", "compute topology, motif and market features");
  features->add_option("kind", kind, "topo | motifs | market | all")
      ->check(CLI::IsMember({"topo", "motifs", "market", "all"}));
  features->add_option("--tx", inputs.tx, "transactions CSV")->required();
  features->add_option("--price", inputs.price, "price CSV");
  features->add_option("--issuance", inputs.issuance, "issuance CSV");
  features->add_option("--trends", inputs.trends, "search-frequency CSV");
  features->add_option("--anchor", inputs.anchor, "Monday of week 0 (YYYY-MM-DD)");
  features->add_flag("--strict", inputs.strict, "fail on the first malformed line");
  features->add_option("--out", out_dir, "output directory")->required();
  features->add_option("--top-fraction", settings.features.top_edge_fraction, "edge fraction kept for motifs")
      ->capture_default_str();
  features->add_option("--betti-level", settings.features.betti_level, "percentile of the beta_0 feature")
      ->capture_default_str();

  // shared by the model subcommands
  fs::path feature_csv, model_path, out_path;
  std::string set_name = "basic+delta_beta0+motif_2_inc";
  std::string columns;
  const auto model_options = [&](CLI::App* sub) {
    sub->add_option("--features", feature_csv, "feature CSV")->required();
    sub->add_option("--set", set_name, "feature set: basic, basic+delta_beta0, basic+motif_2_inc, "
                                       "basic+delta_beta0+motif_2_inc or all")
        ->capture_default_str();
    sub->add_option("--columns", columns, "explicit comma-separated feature list");
    sub->add_option("--hidden", model.hidden)->capture_default_str();
    sub->add_option("--layers", model.layers)->capture_default_str();
    sub->add_option("--window", model.window)->capture_default_str();
    sub->add_option("--lr", model.learning_rate)->capture_default_str();
    sub->add_option("--epochs", model.epochs)->capture_default_str();
    sub->add_option("--patience", model.patience)->capture_default_str();
    sub->add_option("--seed", model.seed, "training seed")->capture_default_str();
    sub->add_option("--train-fraction", eval.train_fraction)->capture_default_str();
    sub->add_option("--validation-fraction", eval.validation_fraction)->capture_default_str();
  };
  const auto eval_options = [&](CLI::App* sub) {
    sub->add_option("--retrains", eval.retrains)->capture_default_str();
    sub->add_option("--master-seed", eval.master_seed)->capture_default_str();
    sub->add_option("--stride", eval.stride, "walk-forward refit stride (0 = one fit)")->capture_default_str();
    sub->add_option("--anomaly-q", eval.anomaly_q)->capture_default_str();
  };

  auto* train_cmd = app.add_subcommand("train", "fit one model on the training split");
  model_options(train_cmd);
  train_cmd->add_option("--model", model_path, "output model file")->required();

  auto* predict = app.add_subcommand("predict", "walk-forward predictions, or a saved model on the test rows");
  model_options(predict);
  predict->add_option("--model", model_path, "saved model (skips walk-forward refits)");
  predict->add_option("--stride", eval.stride, "walk-forward refit stride (0 = one fit)")->capture_default_str();
  predict->add_option("--out", out_path, "predictions CSV")->required();

  auto* shap = app.add_subcommand("shap", "exact Shapley attributions and rank tables");
  model_options(shap);
  eval_options(shap);
  shap->add_option("--background", eval.background)->capture_default_str();
  shap->add_option("--out", out_dir, "output directory")->required();

  auto* ablate = app.add_subcommand("ablate", "RMSE of the default feature sets");
  model_options(ablate);
  eval_options(ablate);
  ablate->add_option("--out", out_path, "ablation CSV")->required();

  auto* correlate = app.add_subcommand("correlate", "feature-target correlations");
  correlate->add_option("--features", feature_csv, "feature CSV")->required();
  correlate->add_option("--out", out_path, "correlation CSV (stdout if omitted)");

  auto* synth = app.add_subcommand("synth", "write a planted-signal synthetic dataset");
  synth->add_option("--seed", scenario.seed)->capture_default_str();
  synth->add_option("--weeks", scenario.weeks)->capture_default_str();
  synth->add_option("--coupling", scenario.coupling)->capture_default_str();
  synth->add_option("--noise", scenario.noise)->capture_default_str();
  synth->add_option("--market-coupling", scenario.market_coupling)->capture_default_str();
  synth->add_option("--out", out_dir, "output directory")->required();

  auto* report = app.add_subcommand("report", "correlations, ablation and attribution in one run");
  model_options(report);
  eval_options(report);
  report->add_option("--background", eval.background)->capture_default_str();
  report->add_option("--out", out_dir, "output directory")->required();

  auto* show = app.add_subcommand("settings", "print the effective settings");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ParseError("--setting expects key=value, got '" + o + "'");
      apply_setting(settings, o.substr(0, eq), o.substr(eq + 1));
    }
    if (threads > 0) omp_set_num_threads(threads);
    const Execution exec = serial ? Execution::serial : Execution::parallel;
    settings.features.exec = exec;
    eval.exec = exec;

    if (*show) {
      write_settings(std::cout, settings);
    } else if (*ingest) {
      const auto windows = load_windows(inputs);
      write_week_windows(out_dir, windows);
      std::cout << windows.size() << " weeks written to " << out_dir.string() << '\n';
    } else if (*features) {
      const auto windows = load_windows(inputs);
      fs::create_directories(out_dir);
      if (kind == "topo" || kind == "motifs") {
        const auto topo = compute_topology(windows, settings.features);
        auto out = open_out(out_dir / (kind + ".csv"));
        kind == "topo" ? write_topo_csv(out, topo) : write_motif_csv(out, topo);
      } else {
        if (inputs.price.empty() || inputs.issuance.empty() || inputs.trends.empty()) {
          throw PreconditionError("market features need --price, --issuance and --trends");
        }
        MarketData market{read_price_file(inputs.price), read_issuance_file(inputs.issuance),
                          read_trends_file(inputs.trends)};
        WeeklyTopology topo;
        const auto rows = build_feature_rows(windows, market, settings.features, &topo);
        auto out = open_out(out_dir / "features.csv");
        write_feature_csv(out, rows);
        if (kind == "all") {
          auto t = open_out(out_dir / "topo.csv");
          write_topo_csv(t, topo);
          auto m = open_out(out_dir / "motifs.csv");
          write_motif_csv(m, topo);
        }
      }
    } else if (*train_cmd) {
      const auto rows = read_rows(feature_csv);
      const auto data = target_dataset(rows, resolve_features(set_name, columns));
      const auto plan = SplitPlan::fractions(data.rows(), eval.train_fraction, eval.validation_fraction);
      const auto trained = train(data, plan, model);
      save_model(model_path, trained);
      std::cout << "epochs " << trained.epochs_run << ", best validation loss "
                << format_number(trained.best_validation_loss) << '\n';
    } else if (*predict) {
      const auto rows = read_rows(feature_csv);
      std::vector<Prediction> predictions;
      if (!model_path.empty()) {
        const auto trained = load_model(model_path);
        const auto data = target_dataset(rows, trained.features);
        const auto plan = SplitPlan::fractions(data.rows(), eval.train_fraction, eval.validation_fraction);
        for (std::size_t r = plan.val_end; r < plan.end; ++r) {
          predictions.push_back({data.weeks[r], data.y[r], lstm_predict(trained, normalized_window(trained, data, r)),
                                 r, 0});
        }
      } else {
        const auto data = target_dataset(rows, resolve_features(set_name, columns));
        const auto plan = SplitPlan::fractions(data.rows(), eval.train_fraction, eval.validation_fraction);
        auto run = walk_forward_predict(data, plan, model, eval.stride);
        for (const auto& n : run.notices) std::cerr << n << '\n';
        predictions = std::move(run.predictions);
      }
      auto out = open_out(out_path);
      write_predictions_csv(out, predictions);
    } else if (*shap) {
      const auto rows = read_rows(feature_csv);
      const auto analysis = run_shap_analysis(rows, resolve_features(set_name, columns), eval);
      fs::create_directories(out_dir);
      auto s = open_out(out_dir / "shap.csv");
      write_shap_csv(s, analysis);
      auto r = open_out(out_dir / "ranks.csv");
      write_rank_table(r, analysis);
      if (analysis.anomalies.warning) std::cerr << "warning: " << analysis.anomalies.message << '\n';
      write_rank_table(std::cout, analysis);
    } else if (*ablate) {
      const auto rows = read_rows(feature_csv);
      const auto sets = default_feature_sets();
      const auto result = run_ablation(rows, sets, eval);
      for (const auto& s : result.sets) {
        for (const auto& f : s.failures) std::cerr << s.set.name << ": " << f << '\n';
      }
      auto out = open_out(out_path);
      write_ablation_table(out, result);
      write_ablation_table(std::cout, result);
    } else if (*correlate) {
      const auto table = correlation_table(read_rows(feature_csv));
      if (out_path.empty()) {
        write_correlation_table(std::cout, table);
      } else {
        auto out = open_out(out_path);
        write_correlation_table(out, table);
      }
    } else if (*synth) {
      const auto data = synth_generate(scenario);
      write_synthetic(out_dir, data);
      std::cout << data.transactions.size() << " transfers over " << scenario.weeks << " weeks written to "
                << out_dir.string() << '\n';
    } else if (*report) {
      const auto rows = read_rows(feature_csv);
      fs::create_directories(out_dir);
      const auto correlations = correlation_table(rows);
      {
        auto out = open_out(out_dir / "correlations.csv");
        write_correlation_table(out, correlations);
      }
      const auto result = run_ablation(rows, default_feature_sets(), eval);
      {
        auto out = open_out(out_dir / "ablation.csv");
        write_ablation_table(out, result);
      }
      const auto analysis = run_shap_analysis(rows, resolve_features(set_name, columns), eval);
      {
        auto out = open_out(out_dir / "ranks.csv");
        write_rank_table(out, analysis);
        auto s = open_out(out_dir / "shap.csv");
        write_shap_csv(s, analysis);
        auto p = open_out(out_dir / "predictions.csv");
        write_predictions_csv(p, analysis.predictions);
        auto cfg = open_out(out_dir / "settings.txt");
        write_settings(cfg, settings);
        auto summary = open_out(out_dir / "summary.txt");
        write_summary(summary, correlations, result, analysis);
      }
      std::cout << "report written to " << out_dir.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
