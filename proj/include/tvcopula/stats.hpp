#pragma once

#include <span>
#include <vector>

namespace tvc {

/// Biased (1/n) sample moments. `kurtosis` is raw (normal = 3).
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

Moments sample_moments(std::span<const double> x);

/// Sample autocorrelation at lags 1..max_lag, mean-corrected, denominator
/// the full-sample sum of squares.
std::vector<double> autocorrelations(std::span<const double> x, std::size_t max_lag);

double pearson(std::span<const double> x, std::span<const double> y);

/// Kendall's tau-a, O(n log n) (Knight's merge-sort algorithm).
double kendall_tau(std::span<const double> x, std::span<const double> y);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

/// One-sample KS against Uniform(0,1), asymptotic p-value with the
/// Stephens small-sample correction.
KsResult ks_uniform(std::span<const double> u);

/// Two-sample KS with asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// rank(x_i) / (n + 1).
std::vector<double> empirical_pit(std::span<const double> x);

}  // namespace tvc
