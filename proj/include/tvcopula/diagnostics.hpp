#pragma once

#include <cstddef>
#include <span>

namespace tvc {

inline constexpr std::size_t kDefaultDiagnosticLags = 30;

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t lags = 0;  // 0 for tests without a lag parameter
};

/// Descriptive statistics plus the residual test battery.
struct DiagnosticReport {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  TestResult jarque_bera;
  TestResult ljung_box;          // on x
  TestResult ljung_box_squared;  // on x^2
  TestResult arch_lm;
};

/// JB = n/6 (S^2 + (K-3)^2/4) with biased moments; chi2(2) p-value.
/// Throws on n < 4 or zero variance.
TestResult jarque_bera(std::span<const double> x);

/// Q = n(n+2) sum_k rho_k^2/(n-k); chi2(lags) p-value. Throws if lags >= n
/// or lags == 0.
TestResult ljung_box(std::span<const double> x, std::size_t lags);

/// Engle's test on e_t = x_t - mean(x): n' R^2 from regressing e_t^2 on an
/// intercept and `lags` of its own lags, with n' = n - lags usable
/// observations; chi2(lags) p-value. Constant e^2 yields statistic 0.
/// Throws on a singular design.
TestResult arch_lm(std::span<const double> x, std::size_t lags);

DiagnosticReport diagnose(std::span<const double> x, std::size_t lags = kDefaultDiagnosticLags);

}  // namespace tvc
