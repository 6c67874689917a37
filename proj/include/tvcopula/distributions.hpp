#pragma once

// Univariate and bivariate reference distributions used by the copula,
// marginal and diagnostic layers. Thin wrappers over Boost.Math where a
// routine exists; bivariate CDFs are computed by one-dimensional quadrature.

#include <array>
#include <cstddef>

namespace tvc {

double norm_cdf(double x);
double norm_quantile(double p);
double norm_logpdf(double x);

/// Student-t with `nu` > 0 degrees of freedom (unit scale).
double t_cdf(double x, double nu);
double t_quantile(double p, double nu);
double t_logpdf(double x, double nu);

/// t_quantile(p, nu) for one fixed p as a function of nu. On [2, 200] it is
/// a Chebyshev interpolant of log(T^{-1}_nu(p) / Phi^{-1}(p)) in 1/nu
/// (error below 1e-11 * max(1, |T^{-1}|)); outside that range the exact
/// quantile.
class TQuantileCurve {
 public:
  static constexpr std::size_t kNodes = 32;
  static constexpr double kMinDof = 2.0;
  static constexpr double kMaxDof = 200.0;

  TQuantileCurve() = default;
  explicit TQuantileCurve(double p);
  double operator()(double nu) const;

 private:
  double p_ = 0.5;
  double z_ = 0.0;
  std::array<double, kNodes> c_{};
};

/// Upper tail P(X > x) of a chi-square with `dof` degrees of freedom.
/// Returns 1 for x <= 0.
double chi2_sf(double x, double dof);

/// P(X <= a, Y <= b) for a standard bivariate normal with correlation rho.
double bivariate_norm_cdf(double a, double b, double rho);

/// P(X <= a, Y <= b) for a standard bivariate Student-t (correlation rho).
double bivariate_t_cdf(double a, double b, double rho, double nu);

}  // namespace tvc
