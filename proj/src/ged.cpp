#include "tvcopula/marginal.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tvc {

namespace {

using FastPolicy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

void check_shape(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw std::domain_error("GED shape nu must be positive and finite");
  }
}

}  // namespace

double ged_lambda(double nu) {
  check_shape(nu);
  return std::exp(0.5 * (-(2.0 / nu) * std::numbers::ln2 + std::lgamma(1.0 / nu) -
                         std::lgamma(3.0 / nu)));
}

double ged_logpdf(double z, double nu) {
  const double lambda = ged_lambda(nu);
  return std::log(nu) - std::log(lambda) - (1.0 + 1.0 / nu) * std::numbers::ln2 -
         std::lgamma(1.0 / nu) - 0.5 * std::pow(std::abs(z / lambda), nu);
}

double ged_cdf(double z, double nu) {
  const double lambda = ged_lambda(nu);
  if (z == 0.0) return 0.5;
  const double g = 0.5 * std::pow(std::abs(z / lambda), nu);
  const double tail = 0.5 * boost::math::gamma_q(1.0 / nu, g, FastPolicy());
  return z < 0.0 ? tail : 1.0 - tail;
}

double ged_quantile(double p, double nu) {
  const double lambda = ged_lambda(nu);
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("ged_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  const double tail = p < 0.5 ? p : 1.0 - p;
  const double g = boost::math::gamma_q_inv(1.0 / nu, 2.0 * tail, FastPolicy());
  const double z = lambda * std::pow(2.0 * g, 1.0 / nu);
  return p < 0.5 ? -z : z;
}

}  // namespace tvc
