#include "txtopo/forecaster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "txtopo/error.hpp"
#include "txtopo/rng.hpp"

namespace txtopo {

namespace {

static_assert(std::endian::native == std::endian::little, "model files are written in host byte order");

constexpr char kModelMagic[8] = {'T', 'X', 'L', 'S', 'T', 'M', '\0', '\0'};
constexpr std::uint32_t kModelVersion = 1;

// Normalized design matrix over kept columns.
Eigen::MatrixXd normalized_matrix(const Normalization& norm, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), norm.kept_count());
  Eigen::Index c = 0;
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    if (!norm.kept[static_cast<std::size_t>(f)]) continue;
    out.col(c++) = (x.col(f).array() - norm.mean[static_cast<std::size_t>(f)]) / norm.scale[static_cast<std::size_t>(f)];
  }
  return out;
}

// Windows ending at each of `rows`, laid out as one batch column per row.
SequenceBatch batch_windows(const Eigen::MatrixXd& xn, std::span<const std::size_t> rows, int window) {
  SequenceBatch steps(static_cast<std::size_t>(window), Eigen::MatrixXd(xn.cols(), static_cast<Eigen::Index>(rows.size())));
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const std::size_t first = rows[b] + 1 - static_cast<std::size_t>(window);
    for (int t = 0; t < window; ++t) {
      steps[static_cast<std::size_t>(t)].col(static_cast<Eigen::Index>(b)) =
          xn.row(static_cast<Eigen::Index>(first + static_cast<std::size_t>(t))).transpose();
    }
  }
  return steps;
}

SequenceBatch batch_from_windows(std::span<const Eigen::MatrixXd> windows) {
  const auto L = windows.front().rows();
  const auto F = windows.front().cols();
  SequenceBatch steps(static_cast<std::size_t>(L), Eigen::MatrixXd(F, static_cast<Eigen::Index>(windows.size())));
  for (std::size_t b = 0; b < windows.size(); ++b) {
    for (Eigen::Index t = 0; t < L; ++t) steps[static_cast<std::size_t>(t)].col(static_cast<Eigen::Index>(b)) = windows[b].row(t).transpose();
  }
  return steps;
}

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) throw ParseError("truncated model file");
  return value;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  if (n > (1u << 20)) throw ParseError("corrupt model file (string length)");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw ParseError("truncated model file");
  return s;
}

}  // namespace

void ModelConfig::validate() const {
  if (hidden <= 0 || layers <= 0 || window < 1 || epochs <= 0 || patience <= 0) {
    throw PreconditionError("model sizes, window, epochs and patience must be positive");
  }
  if (!(learning_rate > 0.0) || !(clip_norm > 0.0)) throw PreconditionError("learning rate and clip norm must be positive");
}

Dataset Dataset::head(std::size_t n) const {
  n = std::min(n, rows());
  Dataset d;
  d.features = features;
  d.weeks.assign(weeks.begin(), weeks.begin() + static_cast<std::ptrdiff_t>(n));
  d.y.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
  d.x = x.topRows(static_cast<Eigen::Index>(n));
  return d;
}

Dataset make_dataset(std::span<const FeatureRow> rows, std::span<const std::string> features) {
  Dataset d;
  if (features.empty()) {
    for (const auto name : kFeatureNames) d.features.emplace_back(name);
  } else {
    d.features.assign(features.begin(), features.end());
  }
  std::vector<std::size_t> idx;
  for (const auto& name : d.features) idx.push_back(feature_index(name));
  d.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].week <= rows[i - 1].week) throw PreconditionError("feature rows must be chronological");
    d.weeks.push_back(rows[i].week);
    d.y.push_back(rows[i].target);
    for (std::size_t f = 0; f < idx.size(); ++f) {
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = rows[i].values[idx[f]];
    }
  }
  return d;
}

SplitPlan SplitPlan::fractions(std::size_t n, double train, double validation) {
  if (!(train > 0.0) || validation < 0.0 || train + validation > 1.0) throw PreconditionError("invalid split fractions");
  SplitPlan p;
  p.train_end = static_cast<std::size_t>(std::llround(train * static_cast<double>(n)));
  p.val_end = std::min(n, static_cast<std::size_t>(std::llround((train + validation) * static_cast<double>(n))));
  p.end = n;
  return p;
}

int Normalization::kept_count() const {
  return static_cast<int>(std::count(kept.begin(), kept.end(), char{1}));
}

Normalization fit_normalization(const Dataset& data, std::size_t train_end) {
  if (train_end == 0 || train_end > data.rows()) throw PreconditionError("normalization needs training rows");
  Normalization norm;
  const auto F = static_cast<std::size_t>(data.x.cols());
  norm.mean.resize(F);
  norm.scale.resize(F);
  norm.kept.resize(F);
  // Plain loops: Eigen's vectorized reductions sum in an order that depends on
  // the column's alignment, so appending rows could change the statistics.
  const auto rows = static_cast<Eigen::Index>(train_end);
  for (std::size_t f = 0; f < F; ++f) {
    const auto j = static_cast<Eigen::Index>(f);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) sum += data.x(i, j);
    const double mean = sum / static_cast<double>(rows);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) ss += (data.x(i, j) - mean) * (data.x(i, j) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(rows));
    norm.mean[f] = mean;
    norm.scale[f] = sd > 0.0 ? sd : 1.0;
    norm.kept[f] = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? 1 : 0;
  }
  double n = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < train_end; ++i) {
    if (data.y[i]) {
      sum += *data.y[i];
      n += 1.0;
    }
  }
  if (n > 0.0) {
    norm.target_mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < train_end; ++i) {
      if (data.y[i]) ss += (*data.y[i] - norm.target_mean) * (*data.y[i] - norm.target_mean);
    }
    const double sd = std::sqrt(ss / n);
    norm.target_scale = sd > 0.0 ? sd : 1.0;
  }
  return norm;
}

Eigen::MatrixXd normalized_window(const TrainedModel& model, const Dataset& data, std::size_t row) {
  const int L = model.config.window;
  if (row + 1 < static_cast<std::size_t>(L) || row >= data.rows()) throw PreconditionError("window exceeds the data");
  const auto block = data.x.middleRows(static_cast<Eigen::Index>(row + 1 - static_cast<std::size_t>(L)), L);
  return normalized_matrix(model.norm, block);
}

Eigen::RowVectorXd lstm_predict_batch(const TrainedModel& model, std::span<const Eigen::MatrixXd> windows) {
  if (windows.empty()) return {};
  for (const auto& w : windows) {
    if (w.rows() != model.config.window) throw PreconditionError("input window has the wrong length");
    if (w.cols() != model.params.shape().input) throw PreconditionError("input window has the wrong feature count");
  }
  const auto steps = batch_from_windows(windows);
  Eigen::RowVectorXd out = lstm_forward(model.params, steps);
  return (out.array() * model.norm.target_scale + model.norm.target_mean).matrix();
}

double lstm_predict(const TrainedModel& model, const Eigen::MatrixXd& window) {
  return lstm_predict_batch(model, std::span<const Eigen::MatrixXd>(&window, 1))[0];
}

TrainedModel train(const Dataset& data, const SplitPlan& plan, const ModelConfig& config) {
  config.validate();
  if (!(plan.train_end <= plan.val_end && plan.val_end <= plan.end && plan.end <= data.rows())) {
    throw PreconditionError("split plan does not fit the data");
  }
  const auto L = static_cast<std::size_t>(config.window);
  if (plan.train_end < L + 1) throw PreconditionError("training needs at least window + 1 rows");

  TrainedModel model;
  model.config = config;
  model.features = data.features;
  model.norm = fit_normalization(data, plan.train_end);
  if (model.norm.kept_count() == 0) throw DataError("every feature is constant over the training rows");

  const Eigen::MatrixXd xn = normalized_matrix(model.norm, data.x);
  const auto collect = [&](std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> rows;
    for (std::size_t i = std::max(lo, L - 1); i < hi; ++i) {
      if (data.y[i]) rows.push_back(i);
    }
    return rows;
  };
  const auto targets_of = [&](const std::vector<std::size_t>& rows) {
    Eigen::RowVectorXd t(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t b = 0; b < rows.size(); ++b) {
      t[static_cast<Eigen::Index>(b)] = (*data.y[rows[b]] - model.norm.target_mean) / model.norm.target_scale;
    }
    return t;
  };
  const auto train_rows = collect(0, plan.train_end);
  const auto val_rows = collect(plan.train_end, plan.val_end);
  if (train_rows.empty()) throw DataError("no training windows with targets");
  const SequenceBatch train_x = batch_windows(xn, train_rows, config.window);
  const Eigen::RowVectorXd train_y = targets_of(train_rows);
  const SequenceBatch val_x = val_rows.empty() ? SequenceBatch{} : batch_windows(xn, val_rows, config.window);
  const Eigen::RowVectorXd val_y = targets_of(val_rows);

  model.params = LstmParameters({model.norm.kept_count(), config.hidden, config.layers});
  model.params.initialize(config.seed);

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(model.params.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(model.params.size());
  Eigen::VectorXd grad;
  Eigen::VectorXd best = model.params.flat();
  double best_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;
  double b1t = 1.0, b2t = 1.0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double loss = lstm_loss_and_gradient(model.params, train_x, train_y, grad);
    if (!std::isfinite(loss) || !grad.allFinite()) {
      throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) + " (learning rate " +
                         std::to_string(config.learning_rate) + "); lower the learning rate or check feature scales");
    }
    const double norm = grad.norm();
    if (norm > config.clip_norm) grad *= config.clip_norm / norm;
    b1t *= beta1;
    b2t *= beta2;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double lr_t = config.learning_rate * std::sqrt(1.0 - b2t) / (1.0 - b1t);
    model.params.flat().array() -= lr_t * m.array() / (v.array().sqrt() + eps);

    const double monitored = val_rows.empty() ? lstm_loss(model.params, train_x, train_y) : lstm_loss(model.params, val_x, val_y);
    model.epochs_run = epoch;
    if (monitored < best_loss) {
      best_loss = monitored;
      best = model.params.flat();
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  model.params.flat() = best;
  model.best_validation_loss = best_loss;
  return model;
}

WalkForwardResult walk_forward_predict(const Dataset& data, const SplitPlan& plan, const ModelConfig& config,
                                       std::size_t stride) {
  config.validate();
  const std::size_t end = std::min(plan.end, data.rows());
  if (plan.val_end > end) throw PreconditionError("split plan does not fit the data");
  const std::size_t holdout = plan.validation_size();
  const auto L = static_cast<std::size_t>(config.window);
  WalkForwardResult result;
  std::optional<std::size_t> current;

  for (std::size_t r = plan.val_end; r < end; ++r) {
    const bool refit_due = (r == plan.val_end) || (stride > 0 && (r - plan.val_end) % stride == 0) || !current;
    if (refit_due) {
      if (r >= holdout + L + 1) {
        SplitPlan sub{r - holdout, r, end};
        result.models.push_back(train(data, sub, config));
        result.model_train_end.push_back(sub.train_end);
        current = result.models.size() - 1;
      } else {
        result.notices.push_back("week " + std::to_string(data.weeks[r]) + ": not enough history to fit a model");
      }
    }
    if (!current) continue;
    if (r + 1 < L) {
      result.notices.push_back("week " + std::to_string(data.weeks[r]) + ": window reaches before the first row");
      continue;
    }
    const auto& model = result.models[*current];
    Prediction p;
    p.week = data.weeks[r];
    p.actual = data.y[r];
    p.row = r;
    p.model = *current;
    p.predicted = lstm_predict(model, normalized_window(model, data, r));
    result.predictions.push_back(p);
  }
  return result;
}

Eigen::VectorXd gradient_for_batch(const LstmParameters& params, std::span<const Eigen::MatrixXd> steps,
                                   const Eigen::RowVectorXd& targets) {
  Eigen::VectorXd grad;
  lstm_loss_and_gradient(params, steps, targets, grad);
  return grad;
}

double gradient_check(const ModelConfig& config, int input_width, int batch, std::uint64_t seed, double h,
                      bool zero_inputs) {
  if (!(h >= 1e-6 && h <= 1e-4)) throw PreconditionError("finite-difference step must lie in [1e-6, 1e-4]");
  if (input_width <= 0 || batch <= 0) throw PreconditionError("input width and batch must be positive");
  LstmParameters params({input_width, config.hidden, config.layers});
  Rng rng(seed);
  for (Eigen::Index i = 0; i < params.size(); ++i) params.flat()[i] = rng.uniform(-0.5, 0.5);
  SequenceBatch steps(static_cast<std::size_t>(config.window), Eigen::MatrixXd(input_width, batch));
  for (auto& s : steps) {
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = zero_inputs ? 0.0 : rng.normal();
  }
  Eigen::RowVectorXd targets(batch);
  for (Eigen::Index i = 0; i < batch; ++i) targets[i] = rng.normal();

  const Eigen::VectorXd analytic = gradient_for_batch(params, steps, targets);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double saved = params.flat()[i];
    params.flat()[i] = saved + h;
    const double up = lstm_loss(params, steps, targets);
    params.flat()[i] = saved - h;
    const double down = lstm_loss(params, steps, targets);
    params.flat()[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kModelMagic, sizeof kModelMagic);
  put(out, kModelVersion);
  const auto& c = model.config;
  put<std::int32_t>(out, c.hidden);
  put<std::int32_t>(out, c.layers);
  put<std::int32_t>(out, c.window);
  put(out, c.learning_rate);
  put<std::int32_t>(out, c.epochs);
  put<std::int32_t>(out, c.patience);
  put(out, c.clip_norm);
  put(out, c.seed);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.features.size()));
  for (std::size_t f = 0; f < model.features.size(); ++f) {
    put_string(out, model.features[f]);
    put(out, model.norm.mean[f]);
    put(out, model.norm.scale[f]);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(model.norm.kept[f]));
  }
  put(out, model.norm.target_mean);
  put(out, model.norm.target_scale);
  put(out, model.best_validation_loss);
  put<std::int32_t>(out, model.epochs_run);
  put<std::int32_t>(out, model.params.shape().input);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(model.params.size()));
  out.write(reinterpret_cast<const char*>(model.params.flat().data()),
            static_cast<std::streamsize>(model.params.size() * sizeof(double)));
  if (!out) throw DataError("failed writing " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[sizeof kModelMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kModelMagic, sizeof magic) != 0) throw ParseError(path.string() + " is not a model file");
  if (const auto version = get<std::uint32_t>(in); version != kModelVersion) {
    throw ParseError("unsupported model file version " + std::to_string(version));
  }
  TrainedModel model;
  auto& c = model.config;
  c.hidden = get<std::int32_t>(in);
  c.layers = get<std::int32_t>(in);
  c.window = get<std::int32_t>(in);
  c.learning_rate = get<double>(in);
  c.epochs = get<std::int32_t>(in);
  c.patience = get<std::int32_t>(in);
  c.clip_norm = get<double>(in);
  c.seed = get<std::uint64_t>(in);
  c.validate();
  const auto n_features = get<std::uint32_t>(in);
  if (n_features > 1024) throw ParseError("corrupt model file (feature count)");
  for (std::uint32_t f = 0; f < n_features; ++f) {
    model.features.push_back(get_string(in));
    model.norm.mean.push_back(get<double>(in));
    model.norm.scale.push_back(get<double>(in));
    model.norm.kept.push_back(static_cast<char>(get<std::uint8_t>(in)));
  }
  model.norm.target_mean = get<double>(in);
  model.norm.target_scale = get<double>(in);
  model.best_validation_loss = get<double>(in);
  model.epochs_run = get<std::int32_t>(in);
  const int input = get<std::int32_t>(in);
  if (input != model.norm.kept_count()) throw ParseError("model input width does not match its feature mask");
  model.params = LstmParameters({input, c.hidden, c.layers});
  if (get<std::uint64_t>(in) != static_cast<std::uint64_t>(model.params.size())) {
    throw ParseError("model parameter count does not match its configuration");
  }
  in.read(reinterpret_cast<char*>(model.params.flat().data()),
          static_cast<std::streamsize>(model.params.size() * sizeof(double)));
  if (!in) throw ParseError("truncated model file");
  return model;
}

}  // namespace txtopo
