#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "txtopo/error.hpp"
#include "txtopo/forecaster.hpp"
#include "txtopo/rng.hpp"

using namespace txtopo;

namespace {

std::vector<Eigen::MatrixXd> random_steps(Rng& rng, int width, int batch, int length) {
  std::vector<Eigen::MatrixXd> steps(static_cast<std::size_t>(length), Eigen::MatrixXd(width, batch));
  for (auto& s : steps)
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = rng.normal();
  return steps;
}

LstmParameters random_params(Rng& rng, LstmShape shape) {
  LstmParameters p(shape);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.flat()[i] = rng.uniform(-0.6, 0.6);
  return p;
}

double oracle_loss(const LstmParameters& p, const std::vector<Eigen::MatrixXd>& steps, const Eigen::RowVectorXd& y) {
  const auto out = oracle::scalar_lstm(p, steps);
  double s = 0.0;
  for (std::size_t b = 0; b < out.size(); ++b) s += (out[b] - y[static_cast<Eigen::Index>(b)]) * (out[b] - y[static_cast<Eigen::Index>(b)]);
  return s / static_cast<double>(out.size());
}

// Rows whose target is a fixed multiple of a sparse jump feature.
std::vector<FeatureRow> planted_rows(std::uint64_t seed, int n, double coupling, double noise) {
  Rng rng(seed);
  std::vector<FeatureRow> rows;
  for (int t = 0; t < n; ++t) {
    FeatureRow r;
    r.week = t + 9;
    for (auto& v : r.values) v = rng.normal();
    r["delta_beta0"] = rng.bernoulli(0.2) ? (rng.bernoulli(0.5) ? 1.0 : -1.0) * (2.0 + rng.below(3)) : 0.0;
    r.target = coupling * r["delta_beta0"] + noise * rng.normal();
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("vectorized forward pass matches the scalar oracle") {
  Rng rng(4);
  for (const LstmShape shape : {LstmShape{3, 4, 1}, LstmShape{5, 3, 2}, LstmShape{2, 6, 3}}) {
    const auto p = random_params(rng, shape);
    const auto steps = random_steps(rng, shape.input, 5, 4);
    const auto out = lstm_forward(p, steps);
    const auto expected = oracle::scalar_lstm(p, steps);
    for (Eigen::Index b = 0; b < out.size(); ++b) CHECK(out[b] == doctest::Approx(expected[b]).epsilon(1e-12));
  }
}

TEST_CASE("zero parameters give zero output and the forward pass is deterministic") {
  Rng rng(2);
  LstmParameters zero({3, 4, 2});
  const auto steps = random_steps(rng, 3, 6, 5);
  CHECK(lstm_forward(zero, steps).cwiseAbs().maxCoeff() == 0.0);
  const auto p = random_params(rng, {3, 4, 2});
  const auto a = lstm_forward(p, steps);
  const auto b = lstm_forward(p, steps);
  CHECK((a.array() == b.array()).all());
}

TEST_CASE("analytic gradients match central differences of the scalar oracle") {
  Rng rng(99);
  double worst = 0.0;
  for (const LstmShape shape : {LstmShape{3, 4, 1}, LstmShape{2, 4, 2}}) {
    auto p = random_params(rng, shape);
    const auto steps = random_steps(rng, shape.input, 3, 3);
    Eigen::RowVectorXd y(3);
    y << 0.3, -1.2, 0.7;
    const Eigen::VectorXd g = gradient_for_batch(p, steps, y);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double saved = p.flat()[i];
      p.flat()[i] = saved + h;
      const double up = oracle_loss(p, steps, y);
      p.flat()[i] = saved - h;
      const double down = oracle_loss(p, steps, y);
      p.flat()[i] = saved;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(g[i] - numeric) / std::max({std::abs(g[i]), std::abs(numeric), 1e-6}));
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("gradient check harness") {
  ModelConfig c;
  c.hidden = 4;
  c.layers = 2;
  c.window = 3;
  CHECK(gradient_check(c, 3, 4, 17) < 1e-4);
  CHECK_THROWS_AS(gradient_check(c, 3, 4, 17, 1.0), PreconditionError);

  // Zero inputs: input-to-hidden weights get no gradient.
  LstmParameters p({3, 4, 2});
  Rng rng(5);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.flat()[i] = rng.uniform(-0.5, 0.5);
  std::vector<Eigen::MatrixXd> zeros(3, Eigen::MatrixXd::Zero(3, 4));
  Eigen::RowVectorXd y = Eigen::RowVectorXd::Constant(4, 0.5);
  const Eigen::VectorXd g = gradient_for_batch(p, zeros, y);
  const auto& w0 = p.blocks()[0];
  CHECK(g.segment(w0.offset, w0.rows * w0.cols).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.norm() > 0.0);
}

TEST_CASE("normalization statistics come from training rows") {
  std::vector<FeatureRow> rows = planted_rows(3, 40, 1.0, 0.1);
  for (auto& r : rows) r["price"] = 5.0;  // constant: dropped
  const auto data = make_dataset(rows);
  const auto norm = fit_normalization(data, 30);
  CHECK(norm.kept[feature_index("price")] == 0);
  CHECK(norm.kept_count() == 8);
  for (Eigen::Index f = 0; f < data.x.cols(); ++f) {
    if (!norm.kept[f]) continue;
    double m = 0.0, ss = 0.0;
    for (Eigen::Index i = 0; i < 30; ++i) m += (data.x(i, f) - norm.mean[f]) / norm.scale[f];
    for (Eigen::Index i = 0; i < 30; ++i) ss += std::pow((data.x(i, f) - norm.mean[f]) / norm.scale[f], 2);
    CHECK(std::abs(m / 30) < 1e-9);
    CHECK(std::abs(ss / 30 - 1.0) < 1e-9);
  }
}

TEST_CASE("prediction input checks") {
  const auto rows = planted_rows(5, 60, 0.9, 0.05);
  const auto data = make_dataset(rows);
  ModelConfig c;
  c.epochs = 5;
  c.window = 4;
  const auto model = train(data, SplitPlan::fractions(data.rows()), c);
  Eigen::MatrixXd short_window = normalized_window(model, data, 20).topRows(3);
  CHECK_THROWS_AS(lstm_predict(model, short_window), PreconditionError);
  const auto w = normalized_window(model, data, 20);
  CHECK(lstm_predict(model, w) == lstm_predict(model, w));
  CHECK_THROWS_AS(normalized_window(model, data, 2), PreconditionError);
}

TEST_CASE("training") {
  SUBCASE("a zero target is fitted to zero") {
    auto rows = planted_rows(6, 60, 0.0, 0.0);
    const auto data = make_dataset(rows);
    ModelConfig c;
    c.epochs = 300;
    const auto plan = SplitPlan::fractions(data.rows());
    const auto model = train(data, plan, c);
    for (std::size_t r = static_cast<std::size_t>(c.window) - 1; r < plan.train_end; ++r) {
      CHECK(std::abs(lstm_predict(model, normalized_window(model, data, r))) < 1e-3);
    }
  }
  SUBCASE("same seed, same parameters") {
    const auto data = make_dataset(planted_rows(7, 60, 0.9, 0.1));
    ModelConfig c;
    c.epochs = 20;
    const auto plan = SplitPlan::fractions(data.rows());
    const auto a = train(data, plan, c);
    const auto b = train(data, plan, c);
    CHECK((a.params.flat().array() == b.params.flat().array()).all());
    c.seed = 2;
    const auto d = train(data, plan, c);
    CHECK_FALSE((a.params.flat().array() == d.params.flat().array()).all());
  }
  SUBCASE("a planted jump signal is learned") {
    const auto data = make_dataset(planted_rows(8, 200, 0.9, 0.1));
    const auto plan = SplitPlan::fractions(data.rows());
    // Nine pure-noise inputs over a long window overfit 120 rows; a short window keeps the signal visible.
    ModelConfig c;
    c.window = 2;
    const auto run = walk_forward_predict(data, plan, c, 0);
    double mse = 0.0, mean = 0.0, var = 0.0;
    for (const auto& p : run.predictions) mean += *p.actual;
    mean /= static_cast<double>(run.predictions.size());
    for (const auto& p : run.predictions) {
      mse += std::pow(p.predicted - *p.actual, 2);
      var += std::pow(*p.actual - mean, 2);
    }
    CHECK(mse < var / 4.0);
  }
  SUBCASE("too few rows") {
    const auto data = make_dataset(planted_rows(9, 12, 0.9, 0.1));
    CHECK_THROWS_AS(train(data, SplitPlan::fractions(data.rows()), ModelConfig{}), PreconditionError);
  }
}

TEST_CASE("walk-forward prediction") {
  const auto rows = planted_rows(10, 80, 0.9, 0.1);
  const auto data = make_dataset(rows);
  const auto plan = SplitPlan::fractions(data.rows());
  ModelConfig c;
  c.epochs = 15;
  SUBCASE("a single fit covers the test period") {
    const auto run = walk_forward_predict(data, plan, c, 0);
    CHECK(run.models.size() == 1);
    CHECK(run.predictions.size() == plan.end - plan.val_end);
    CHECK(run.model_train_end[0] == plan.train_end);
  }
  SUBCASE("stride refits train on strictly earlier rows") {
    const auto run = walk_forward_predict(data, plan, c, 5);
    CHECK(run.models.size() == (plan.end - plan.val_end + 4) / 5);
    for (const auto& p : run.predictions) CHECK(run.model_train_end[p.model] + plan.validation_size() <= p.row);
  }
  SUBCASE("truncating later rows leaves earlier predictions unchanged") {
    const auto full = walk_forward_predict(data, plan, c, 4);
    for (const std::size_t cut : {plan.val_end, plan.val_end + 3, plan.end - 1}) {
      const auto part = walk_forward_predict(data.head(cut + 1), plan, c, 4);
      REQUIRE(part.predictions.size() == cut + 1 - plan.val_end);
      for (std::size_t i = 0; i < part.predictions.size(); ++i) {
        CHECK(part.predictions[i].predicted == full.predictions[i].predicted);
      }
    }
  }
}

TEST_CASE("model files round-trip") {
  const auto data = make_dataset(planted_rows(11, 60, 0.9, 0.1));
  ModelConfig c;
  c.epochs = 10;
  const auto model = train(data, SplitPlan::fractions(data.rows()), c);
  const auto path = std::filesystem::temp_directory_path() / "txtopo_model_roundtrip.bin";
  save_model(path, model);
  const auto back = load_model(path);
  CHECK(back.config == model.config);
  CHECK(back.features == model.features);
  CHECK((back.params.flat().array() == model.params.flat().array()).all());
  const auto w = normalized_window(model, data, 30);
  CHECK(lstm_predict(back, normalized_window(back, data, 30)) == lstm_predict(model, w));
  {
    std::ofstream junk(path, std::ios::binary | std::ios::trunc);
    junk << "not a model";
  }
  CHECK_THROWS(load_model(path));
  std::filesystem::remove(path);
}

TEST_CASE("normalization statistics do not depend on rows after the training range") {
  const auto rows = planted_rows(12, 191, 0.9, 0.1);
  const auto full = make_dataset(rows);
  for (const std::size_t n : {std::size_t{150}, std::size_t{153}, std::size_t{160}, std::size_t{190}}) {
    const auto a = fit_normalization(full, 114);
    const auto b = fit_normalization(full.head(n), 114);
    CHECK(a.mean == b.mean);
    CHECK(a.scale == b.scale);
    CHECK(a.target_mean == b.target_mean);
  }
}
