#include "tvcopula/diagnostics.hpp"

#include "tvcopula/distributions.hpp"
#include "tvcopula/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tvc {

TestResult jarque_bera(std::span<const double> x) {
  if (x.size() < 4) throw std::invalid_argument("jarque_bera: need at least 4 observations");
  const Moments m = sample_moments(x);
  if (!(m.variance > 0.0)) throw std::invalid_argument("jarque_bera: zero-variance input");
  const double n = static_cast<double>(x.size());
  const double excess = m.kurtosis - 3.0;
  const double jb = n / 6.0 * (m.skewness * m.skewness + 0.25 * excess * excess);
  return {jb, chi2_sf(jb, 2.0), 0};
}

TestResult ljung_box(std::span<const double> x, std::size_t lags) {
  const std::size_t n = x.size();
  if (lags == 0) throw std::invalid_argument("ljung_box: lags must be positive");
  if (lags >= n) throw std::invalid_argument("ljung_box: lags must be < n");
  const auto rho = autocorrelations(x, lags);
  const double nd = static_cast<double>(n);
  double q = 0.0;
  for (std::size_t k = 1; k <= lags; ++k) {
    q += rho[k - 1] * rho[k - 1] / (nd - static_cast<double>(k));
  }
  q *= nd * (nd + 2.0);
  return {q, chi2_sf(q, static_cast<double>(lags)), lags};
}

TestResult arch_lm(std::span<const double> x, std::size_t lags) {
  const std::size_t n = x.size();
  if (lags == 0) throw std::invalid_argument("arch_lm: lags must be positive");
  if (lags + 1 >= n) throw std::invalid_argument("arch_lm: lags must be < n - 1");
  const std::size_t rows = n - lags;
  const auto cols = static_cast<Eigen::Index>(lags + 1);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t t = 0; t < n; ++t) sq[t] = (x[t] - mean) * (x[t] - mean);

  Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
  Eigen::MatrixXd design(static_cast<Eigen::Index>(rows), cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r + lags;
    const auto ri = static_cast<Eigen::Index>(r);
    y(ri) = sq[t];
    design(ri, 0) = 1.0;
    for (std::size_t k = 1; k <= lags; ++k) {
      design(ri, static_cast<Eigen::Index>(k)) = sq[t - k];
    }
  }
  const double tss = (y.array() - y.mean()).square().sum();
  // Constant squares: nothing to explain.
  if (tss <= 1e-300 * static_cast<double>(rows) || tss <= 1e-24 * y.squaredNorm()) {
    return {0.0, 1.0, lags};
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols) throw std::runtime_error("arch_lm: singular auxiliary regression");
  const Eigen::VectorXd beta = qr.solve(y);
  const double ssr = (y - design * beta).squaredNorm();
  const double r2 = std::max(0.0, 1.0 - ssr / tss);
  const double stat = static_cast<double>(rows) * r2;
  return {stat, chi2_sf(stat, static_cast<double>(lags)), lags};
}

DiagnosticReport diagnose(std::span<const double> x, std::size_t lags) {
  DiagnosticReport report;
  report.n = x.size();
  const Moments m = sample_moments(x);
  report.mean = m.mean;
  report.variance = m.variance;
  report.skewness = m.skewness;
  report.excess_kurtosis = m.kurtosis - 3.0;
  report.jarque_bera = jarque_bera(x);
  report.ljung_box = ljung_box(x, lags);
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
  report.ljung_box_squared = ljung_box(sq, lags);
  report.arch_lm = arch_lm(x, lags);
  return report;
}

}  // namespace tvc
