#pragma once

#include <span>
#include <vector>

namespace txtopo {

/// Sample Pearson correlation. Needs equal lengths >= 3 and positive variance
/// in both series; throws DataError otherwise.
double pearson(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of average ranks (ties share the mean rank).
double spearman(std::span<const double> x, std::span<const double> y);

/// Ascending average ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

/// Two-sided t-test of a correlation coefficient with n - 2 degrees of
/// freedom: t = r sqrt((n - 2) / (1 - r^2)). True when p < alpha. n >= 4.
bool significance(double coefficient, std::size_t n, double alpha = 0.05);

/// Two-sided p-value of the test above.
double correlation_p_value(double coefficient, std::size_t n);

/// Root mean squared error over entries where `mask` is set (all entries when
/// `mask` is empty). Throws DataError when nothing is selected.
double rmse(std::span<const double> predicted, std::span<const double> actual, std::span<const char> mask = {});

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1).
double stddev(std::span<const double> v);

}  // namespace txtopo
