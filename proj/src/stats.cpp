#include "txtopo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "txtopo/error.hpp"

namespace txtopo {

double mean(std::span<const double> v) {
  if (v.empty()) throw DataError("mean of an empty series");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  if (v.size() < 2) throw DataError("standard deviation needs two values");
  const double m = mean(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("correlation of series with different lengths");
  if (x.size() < 3) throw DataError("correlation needs at least 3 observations");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DataError("correlation undefined for a zero-variance series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double correlation_p_value(double coefficient, std::size_t n) {
  if (n < 4) throw PreconditionError("significance needs at least 4 observations");
  const double r = std::clamp(coefficient, -1.0, 1.0);
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = r * std::sqrt(df / (1.0 - r * r));
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

bool significance(double coefficient, std::size_t n, double alpha) {
  return correlation_p_value(coefficient, n) < alpha;
}

double rmse(std::span<const double> predicted, std::span<const double> actual, std::span<const char> mask) {
  if (predicted.size() != actual.size()) throw DataError("RMSE of series with different lengths");
  if (!mask.empty() && mask.size() != actual.size()) throw DataError("RMSE mask has the wrong length");
  double ss = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    ss += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
    ++n;
  }
  if (n == 0) throw DataError("RMSE over an empty week set");
  return std::sqrt(ss / static_cast<double>(n));
}

}  // namespace txtopo
