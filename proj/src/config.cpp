#include "txtopo/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <utility>
#include <vector>

#include "txtopo/error.hpp"

namespace txtopo {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ParseError("setting " + key + ": bad value '" + value + "'");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto pos = value.find(',', start);
    auto item = trim(std::string_view(value).substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Field {
  const char* key;
  std::function<void(Settings&, const std::string&)> set;
  std::function<std::string(const Settings&)> get;
};

#define TXTOPO_NUMBER(KEY, TYPE, EXPR)                                                                   \
  Field {                                                                                                \
    KEY, [](Settings& s, const std::string& v) { s.EXPR = parse_number<TYPE>(KEY, v); },                 \
        [](const Settings& s) { return format_value(s.EXPR); }                                           \
  }

std::string format_value(double v) { return format_number(v); }
std::string format_value(int v) { return std::to_string(v); }
std::string format_value(unsigned long v) { return std::to_string(v); }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      TXTOPO_NUMBER("features.top_edge_fraction", double, features.top_edge_fraction),
      {"features.top_edge_mode",
       [](Settings& s, const std::string& v) {
         if (v == "aggregated") {
           s.features.top_edge_mode = TopEdgeMode::aggregated;
         } else if (v == "transactions") {
           s.features.top_edge_mode = TopEdgeMode::transaction;
         } else {
           throw ParseError("setting features.top_edge_mode: expected aggregated or transactions");
         }
       },
       [](const Settings& s) {
         return std::string(s.features.top_edge_mode == TopEdgeMode::aggregated ? "aggregated" : "transactions");
       }},
      {"features.thresholds",
       [](Settings& s, const std::string& v) {
         if (v == "edge_weights") {
           s.features.thresholds = ThresholdSource::edge_weights;
         } else if (v == "transaction_amounts") {
           s.features.thresholds = ThresholdSource::transaction_amounts;
         } else {
           throw ParseError("setting features.thresholds: expected edge_weights or transaction_amounts");
         }
       },
       [](const Settings& s) {
         return std::string(s.features.thresholds == ThresholdSource::edge_weights ? "edge_weights"
                                                                                   : "transaction_amounts");
       }},
      TXTOPO_NUMBER("features.betti_level", int, features.betti_level),
      {"features.motif_semantics",
       [](Settings& s, const std::string& v) {
         if (v == "induced") {
           s.features.motif_semantics = MotifSemantics::induced;
         } else if (v == "non_induced") {
           s.features.motif_semantics = MotifSemantics::non_induced;
         } else {
           throw ParseError("setting features.motif_semantics: expected induced or non_induced");
         }
       },
       [](const Settings& s) {
         return std::string(s.features.motif_semantics == MotifSemantics::induced ? "induced" : "non_induced");
       }},
      TXTOPO_NUMBER("traders.fraction", double, features.traders.fraction),
      TXTOPO_NUMBER("traders.min_history", int, features.traders.min_history),
      TXTOPO_NUMBER("traders.min_active_weeks", int, features.traders.min_active_weeks),
      {"sentiment.terms",
       [](Settings& s, const std::string& v) {
         auto terms = split_list(v);
         if (terms.empty()) throw ParseError("setting sentiment.terms: at least one term is required");
         s.features.sentiment_terms = std::move(terms);
       },
       [](const Settings& s) {
         std::string out;
         for (const auto& t : s.features.sentiment_terms) out += (out.empty() ? "" : ",") + t;
         return out;
       }},
      TXTOPO_NUMBER("model.hidden", int, evaluation.model.hidden),
      TXTOPO_NUMBER("model.layers", int, evaluation.model.layers),
      TXTOPO_NUMBER("model.window", int, evaluation.model.window),
      TXTOPO_NUMBER("model.learning_rate", double, evaluation.model.learning_rate),
      TXTOPO_NUMBER("model.epochs", int, evaluation.model.epochs),
      TXTOPO_NUMBER("model.patience", int, evaluation.model.patience),
      TXTOPO_NUMBER("model.clip_norm", double, evaluation.model.clip_norm),
      TXTOPO_NUMBER("model.seed", std::uint64_t, evaluation.model.seed),
      TXTOPO_NUMBER("eval.retrains", int, evaluation.retrains),
      TXTOPO_NUMBER("eval.master_seed", std::uint64_t, evaluation.master_seed),
      TXTOPO_NUMBER("eval.stride", std::size_t, evaluation.stride),
      TXTOPO_NUMBER("eval.anomaly_q", double, evaluation.anomaly_q),
      TXTOPO_NUMBER("eval.train_fraction", double, evaluation.train_fraction),
      TXTOPO_NUMBER("eval.validation_fraction", double, evaluation.validation_fraction),
      TXTOPO_NUMBER("eval.background", std::size_t, evaluation.background),
      {"eval.statistic",
       [](Settings& s, const std::string& v) {
         if (v == "mean_absolute") {
           s.evaluation.statistic = RankStatistic::mean_absolute;
         } else if (v == "signed_mean") {
           s.evaluation.statistic = RankStatistic::signed_mean;
         } else {
           throw ParseError("setting eval.statistic: expected mean_absolute or signed_mean");
         }
       },
       [](const Settings& s) {
         return std::string(s.evaluation.statistic == RankStatistic::mean_absolute ? "mean_absolute" : "signed_mean");
       }},
      TXTOPO_NUMBER("synth.seed", std::uint64_t, scenario.seed),
      TXTOPO_NUMBER("synth.weeks", int, scenario.weeks),
      TXTOPO_NUMBER("synth.coupling", double, scenario.coupling),
      TXTOPO_NUMBER("synth.noise", double, scenario.noise),
      TXTOPO_NUMBER("synth.motif_coupling", double, scenario.motif_coupling),
      TXTOPO_NUMBER("synth.market_coupling", double, scenario.market_coupling),
      TXTOPO_NUMBER("synth.autoregression", double, scenario.autoregression),
      TXTOPO_NUMBER("synth.event_rate", double, scenario.event_rate),
      TXTOPO_NUMBER("synth.jump_min", int, scenario.jump_min),
      TXTOPO_NUMBER("synth.jump_max", int, scenario.jump_max),
      TXTOPO_NUMBER("synth.base_components", int, scenario.base_components),
      TXTOPO_NUMBER("synth.edges_per_week", int, scenario.edges_per_week),
      TXTOPO_NUMBER("synth.wallet_pool", int, scenario.wallet_pool),
      {"synth.anchor", [](Settings& s, const std::string& v) { s.scenario.anchor = parse_date(v); },
       [](const Settings& s) { return format_date(s.scenario.anchor); }},
  };
  return table;
}

}  // namespace

void apply_setting(Settings& settings, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(settings, value);
      return;
    }
  }
  throw ParseError("unknown setting '" + key + "'");
}

void apply_settings(std::istream& in, Settings& settings) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(line_no) + ": expected key = value");
    try {
      apply_setting(settings, trim(std::string_view(text).substr(0, eq)), trim(std::string_view(text).substr(eq + 1)));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void load_settings(const std::filesystem::path& path, Settings& settings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  apply_settings(in, settings);
}

void write_settings(std::ostream& out, const Settings& settings) {
  for (const auto& f : fields()) out << f.key << " = " << f.get(settings) << '\n';
}

}  // namespace txtopo
