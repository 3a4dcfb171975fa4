#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "txtopo/error.hpp"
#include "txtopo/rng.hpp"
#include "txtopo/shapley.hpp"

using namespace txtopo;

namespace {

TrainedModel random_model(std::uint64_t seed, int features, int hidden = 4, int layers = 1, int window = 3) {
  TrainedModel m;
  m.config.hidden = hidden;
  m.config.layers = layers;
  m.config.window = window;
  m.config.seed = seed;
  for (int f = 0; f < features; ++f) m.features.push_back("f" + std::to_string(f));
  m.norm.kept.assign(static_cast<std::size_t>(features), 1);
  m.norm.mean.assign(static_cast<std::size_t>(features), 0.0);
  m.norm.scale.assign(static_cast<std::size_t>(features), 1.0);
  m.norm.target_mean = 0.3;
  m.norm.target_scale = 2.0;
  m.params = LstmParameters({features, hidden, layers});
  Rng rng(seed);
  for (Eigen::Index i = 0; i < m.params.size(); ++i) m.params.flat()[i] = rng.uniform(-0.8, 0.8);
  return m;
}

Eigen::MatrixXd random_window(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd w(rows, cols);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
  return w;
}

}  // namespace

TEST_CASE("subset weights agree with the permutation definition") {
  Rng rng(1);
  for (const int n : {1, 2, 3, 5, 6}) {
    std::vector<double> values(std::size_t{1} << n);
    for (auto& v : values) v = rng.normal();
    const auto phi = shapley_from_coalitions(n, values);
    const auto expected = oracle::permutation_shapley(n, [&](std::uint32_t m) { return values[m]; });
    for (int i = 0; i < n; ++i) CHECK(phi[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(shapley_from_coalitions(2, std::vector<double>(3)), PreconditionError);
}

TEST_CASE("efficiency on random models") {
  Rng rng(2);
  for (int round = 0; round < 10; ++round) {
    const int F = 2 + round % 5;
    const auto model = random_model(100 + round, F, 3 + round % 3, 1 + round % 2);
    std::vector<Eigen::MatrixXd> background;
    for (int b = 0; b < 6; ++b) background.push_back(random_window(rng, 3, F));
    const auto rep = shapley_exact(model, random_window(rng, 3, F), background);
    CHECK(rep.efficiency_residual() < 1e-6);
    CHECK(rep.seed == model.config.seed);
  }
}

TEST_CASE("symmetric features receive equal attributions") {
  auto model = random_model(7, 4);
  auto W = model.params.input_weights(0);
  W.col(2) = W.col(1);
  Rng rng(3);
  std::vector<Eigen::MatrixXd> background;
  for (int b = 0; b < 5; ++b) {
    auto w = random_window(rng, 3, 4);
    w.col(2) = w.col(1);
    background.push_back(w);
  }
  auto instance = random_window(rng, 3, 4);
  instance.col(2) = instance.col(1);
  const auto rep = shapley_exact(model, instance, background);
  CHECK(std::abs(rep.phi[1] - rep.phi[2]) < 1e-9);
  CHECK(std::abs(rep.phi[1]) > 1e-6);
}

TEST_CASE("a feature the model ignores gets exactly zero") {
  auto model = random_model(8, 4);
  model.params.input_weights(0).col(3).setZero();
  Rng rng(4);
  std::vector<Eigen::MatrixXd> background;
  for (int b = 0; b < 5; ++b) background.push_back(random_window(rng, 3, 4));
  const auto rep = shapley_exact(model, random_window(rng, 3, 4), background);
  CHECK(rep.phi[3] == 0.0);
}

TEST_CASE("an instance equal to the background has no attribution") {
  const auto model = random_model(9, 3);
  Rng rng(5);
  const auto w = random_window(rng, 3, 3);
  const std::vector<Eigen::MatrixXd> background{w};
  const auto rep = shapley_exact(model, w, background);
  for (const double v : rep.phi) CHECK(v == 0.0);
}

TEST_CASE("dropped features are reported with zero attribution") {
  auto model = random_model(10, 3);
  model.features.push_back("constant");
  model.norm.kept.push_back(0);
  model.norm.mean.push_back(1.0);
  model.norm.scale.push_back(1.0);
  Rng rng(6);
  const std::vector<Eigen::MatrixXd> background{random_window(rng, 3, 3), random_window(rng, 3, 3)};
  const auto rep = shapley_exact(model, random_window(rng, 3, 3), background);
  REQUIRE(rep.phi.size() == 4);
  CHECK(rep.phi[3] == 0.0);
  CHECK(rep.efficiency_residual() < 1e-6);
}

TEST_CASE("parallel and serial attributions are identical") {
  const auto model = random_model(11, 7, 5, 2, 4);
  Rng rng(7);
  std::vector<Eigen::MatrixXd> background;
  for (int b = 0; b < 8; ++b) background.push_back(random_window(rng, 4, 7));
  const auto instance = random_window(rng, 4, 7);
  const auto a = shapley_exact(model, instance, background, Execution::parallel);
  const auto b = shapley_exact(model, instance, background, Execution::serial);
  CHECK(a.phi == b.phi);
  CHECK(a.base == b.base);
}

TEST_CASE("ranks") {
  CHECK(descending_ranks(std::vector<double>{0.1, 0.5, 0.3}) == std::vector<double>{3, 1, 2});
  CHECK(descending_ranks(std::vector<double>{0.5, 0.5, 0.1}) == std::vector<double>{1.5, 1.5, 3});

  const auto report = [](int week, std::vector<double> phi) {
    ShapleyReport r;
    r.week = week;
    r.features = {"a", "b", "c"};
    r.phi = std::move(phi);
    return r;
  };
  SUBCASE("single retrain and week") {
    const std::vector<std::vector<ShapleyReport>> reps{{report(4, {-0.2, 0.9, 0.1})}};
    const auto t = rank_features(reps, std::vector<int>{4});
    CHECK(t.average_rank == std::vector<double>{2, 1, 3});
    CHECK(rank_features(reps, std::vector<int>{4}, RankStatistic::signed_mean).average_rank ==
          std::vector<double>{3, 1, 2});
  }
  SUBCASE("every retrain ranks the same feature first") {
    std::vector<std::vector<ShapleyReport>> reps;
    for (int r = 0; r < 20; ++r) reps.push_back({report(1, {0.01 * r, 5.0, 0.02}), report(2, {0.1, 3.0, 0.2})});
    const auto t = rank_features(reps, std::vector<int>{1, 2});
    CHECK(t.average_rank[1] == 1.0);
    CHECK(t.retrains == 20);
  }
  SUBCASE("rescaling one retrain does not change its ranks") {
    const std::vector<std::vector<ShapleyReport>> a{{report(1, {0.3, 0.1, 0.2})}};
    const std::vector<std::vector<ShapleyReport>> b{{report(1, {3.0, 1.0, 2.0})}};
    CHECK(rank_features(a, std::vector<int>{1}).average_rank == rank_features(b, std::vector<int>{1}).average_rank);
  }
  SUBCASE("a missing week is an error") {
    const std::vector<std::vector<ShapleyReport>> reps{{report(1, {1, 2, 3})}};
    CHECK_THROWS_AS(rank_features(reps, std::vector<int>{1, 2}), DataError);
  }
}

TEST_CASE("anomalous weeks") {
  const std::vector<int> weeks{10, 11, 12, 13};
  auto s = detect_anomalous_weeks(weeks, std::vector<double>{0, 0, 0, 10}, 0.25);
  CHECK(s.weeks == std::vector<int>{13});
  CHECK_FALSE(s.warning);
  s = detect_anomalous_weeks(weeks, std::vector<double>{2, -2, 2, -2}, 0.25);
  CHECK(s.weeks == weeks);
  CHECK(s.warning);
  s = detect_anomalous_weeks(weeks, std::vector<double>{0, 0, 0, 0}, 0.25);
  CHECK(s.weeks.empty());
  CHECK(s.warning);
  CHECK(detect_anomalous_weeks(weeks, std::vector<double>{1, -5, 3, 2}, 1.0).weeks == weeks);
  CHECK(detect_anomalous_weeks(weeks, std::vector<double>{1, -5, 3, 2}, 0.5).weeks == std::vector<int>{11, 12});
  CHECK_THROWS_AS(detect_anomalous_weeks(weeks, std::vector<double>{1, 2, 3, 4}, 0.0), PreconditionError);
}
