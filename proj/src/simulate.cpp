#include "tvcopula/simulate.hpp"

#include "tvcopula/distributions.hpp"

#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace tvc {

namespace {

double open_unit(double x) {
  return std::clamp(x, std::numeric_limits<double>::min(), 1.0 - 0x1p-53);
}

double std_normal(Xoshiro256& rng) {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

double std_exponential(Xoshiro256& rng) {
  boost::random::exponential_distribution<double> dist(1.0);
  return dist(rng);
}

std::pair<double, double> draw_normal(const NormalParams& p, Xoshiro256& rng) {
  const double z1 = std_normal(rng);
  const double z2 = p.rho * z1 + std::sqrt(1.0 - p.rho * p.rho) * std_normal(rng);
  return {norm_cdf(z1), norm_cdf(z2)};
}

std::pair<double, double> draw_student_t(const StudentTParams& p, Xoshiro256& rng) {
  const double z1 = std_normal(rng);
  const double z2 = p.rho * z1 + std::sqrt(1.0 - p.rho * p.rho) * std_normal(rng);
  boost::random::chi_squared_distribution<double> chi2(p.nu);
  const double scale = std::sqrt(p.nu / chi2(rng));
  return {t_cdf(z1 * scale, p.nu), t_cdf(z2 * scale, p.nu)};
}

std::pair<double, double> draw_clayton(const ClaytonParams& p, Xoshiro256& rng) {
  const double d = p.delta;
  if (d > 0.0) {
    boost::random::gamma_distribution<double> frailty(1.0 / d, 1.0);
    const double V = frailty(rng);
    const double e1 = std_exponential(rng);
    const double e2 = std_exponential(rng);
    return {std::exp(-std::log1p(e1 / V) / d), std::exp(-std::log1p(e2 / V) / d)};
  }
  const double u = rng.uniform_open();
  const double w = rng.uniform_open();
  const double base = std::pow(u, -d) * (std::pow(w, -d / (1.0 + d)) - 1.0) + 1.0;
  return {u, std::pow(base, -1.0 / d)};
}

std::pair<double, double> draw_gumbel(const GumbelParams& p, Xoshiro256& rng) {
  const double a = 1.0 / p.theta;
  const double angle = std::numbers::pi * rng.uniform_open();
  const double e = std_exponential(rng);
  const double s = std::sin(a * angle) / std::pow(std::sin(angle), 1.0 / a) *
                   std::pow(std::sin((1.0 - a) * angle) / e, (1.0 - a) / a);
  const double e1 = std_exponential(rng);
  const double e2 = std_exponential(rng);
  return {std::exp(-std::pow(e1 / s, a)), std::exp(-std::pow(e2 / s, a))};
}

std::pair<double, double> draw_sjc(const SjcParams& p, Xoshiro256& rng) {
  const double u = rng.uniform_open();
  const double w = rng.uniform_open();
  const StaticCopulaParams params = p;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > kInversionTol) {
    const double mid = 0.5 * (lo + hi);
    if (conditional_cdf(params, u, mid) < w) lo = mid;
    else hi = mid;
  }
  return {u, 0.5 * (lo + hi)};
}

}  // namespace

std::pair<double, double> draw_pair(const StaticCopulaParams& params, Xoshiro256& rng) {
  const auto [u, v] = std::visit(
      [&](const auto& p) -> std::pair<double, double> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NormalParams>) return draw_normal(p, rng);
        else if constexpr (std::is_same_v<P, StudentTParams>) return draw_student_t(p, rng);
        else if constexpr (std::is_same_v<P, GumbelParams>) return draw_gumbel(p, rng);
        else if constexpr (std::is_same_v<P, ClaytonParams>) return draw_clayton(p, rng);
        else return draw_sjc(p, rng);
      },
      params);
  return {open_unit(u), open_unit(v)};
}

PairSample sample_copula(const StaticCopulaParams& params, std::size_t n, Seed seed) {
  validate(params);
  Xoshiro256 rng(seed);
  PairSample out;
  out.u.reserve(n);
  out.v.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [u, v] = draw_pair(params, rng);
    out.u.push_back(u);
    out.v.push_back(v);
  }
  return out;
}

DynamicSample sample_dynamic(const EvolutionParams& evo, std::size_t n, Seed seed) {
  DynamicRecursion rec(evo);
  Xoshiro256 rng(seed);
  const bool two = parameter_count(evo.family) == 2;
  DynamicSample out;
  out.path.family = evo.family;
  double ll = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& params = rec.next();
    if (!rec.finite() || !is_valid(params)) {
      throw std::domain_error("sample_dynamic: recursion left the admissible region");
    }
    const auto [u, v] = draw_pair(params, rng);
    const auto values = to_vector(params);
    out.path.first.push_back(values[0]);
    if (two) out.path.second.push_back(values[1]);
    out.path.tail.push_back(tail_dependence(params));
    ll += copula_logpdf(params, u, v);
    out.data.u.push_back(u);
    out.data.v.push_back(v);
    rec.observe(u, v);
  }
  out.path.loglik = ll;
  return out;
}

namespace {

template <class Uniform>
std::vector<double> egarch_path(const ArmaEgarchSpec& spec, const MarginalParams& params,
                                std::size_t total, std::size_t burn_in, Uniform&& uniform) {
  spec.validate();
  if (params.ar.size() != spec.m || params.ma.size() != spec.n || params.kappa.size() != spec.p ||
      params.gamma_asym.size() != spec.p || params.beta_pers.size() != spec.q) {
    throw std::invalid_argument("simulate_egarch: parameter lengths do not match the spec");
  }
  if (!params.admissible()) {
    throw std::domain_error("simulate_egarch: explosive or invalid parameters");
  }

  const double ar_sum = std::accumulate(params.ar.begin(), params.ar.end(), 0.0);
  const double beta_sum = std::accumulate(params.beta_pers.begin(), params.beta_pers.end(), 0.0);
  const double y_pre = std::abs(ar_sum) < 1.0 ? params.a0 / (1.0 - ar_sum) : params.a0;
  const double log_h_pre = params.w / (1.0 - beta_sum);

  std::vector<double> y(total), eps(total), log_h(total), h(total);
  for (std::size_t t = 0; t < total; ++t) {
    double mean = params.a0;
    for (std::size_t i = 1; i <= spec.m; ++i) mean += params.ar[i - 1] * (t >= i ? y[t - i] : y_pre);
    for (std::size_t j = 1; j <= spec.n; ++j) mean += params.ma[j - 1] * (t >= j ? eps[t - j] : 0.0);

    double lh = params.w;
    for (std::size_t i = 1; i <= spec.p; ++i) {
      const double e = t >= i ? eps[t - i] : 0.0;
      const double hv = t >= i ? h[t - i] : std::exp(log_h_pre);
      lh += params.kappa[i - 1] * (std::abs(e) + params.gamma_asym[i - 1] * e) / std::sqrt(hv);
    }
    for (std::size_t j = 1; j <= spec.q; ++j) {
      lh += params.beta_pers[j - 1] * (t >= j ? log_h[t - j] : log_h_pre);
    }
    const double z = ged_quantile(uniform(t), params.nu);
    log_h[t] = lh;
    h[t] = std::exp(lh);
    eps[t] = std::sqrt(h[t]) * z;
    y[t] = mean + eps[t];
    if (!std::isfinite(y[t]) || !(h[t] > 0.0)) {
      throw std::domain_error("simulate_egarch: path overflowed");
    }
  }
  return {y.begin() + static_cast<std::ptrdiff_t>(burn_in), y.end()};
}

}  // namespace

std::vector<double> simulate_egarch(const ArmaEgarchSpec& spec, const MarginalParams& params,
                                    std::size_t n, Seed seed, std::size_t burn_in) {
  Xoshiro256 rng(seed);
  return egarch_path(spec, params, burn_in + n, burn_in,
                     [&](std::size_t) { return rng.uniform_open(); });
}

std::vector<double> egarch_from_uniforms(const ArmaEgarchSpec& spec, const MarginalParams& params,
                                         std::span<const double> uniforms, std::size_t burn_in) {
  if (burn_in > uniforms.size()) throw std::invalid_argument("egarch_from_uniforms: burn-in too long");
  for (double u : uniforms) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("egarch_from_uniforms: draws must lie in (0, 1)");
  }
  return egarch_path(spec, params, uniforms.size(), burn_in,
                     [&](std::size_t t) { return uniforms[t]; });
}

}  // namespace tvc
