#include "tvcopula/marginal.hpp"

#include "tvcopula/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace tvc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Soft penalty applied when the log-variance recursion is non-stationary.
constexpr double kStationarityPenalty = 1e6;
// Admissible GED shapes for the optimiser.
constexpr double kMinShape = 0.05;
constexpr double kMaxShape = 50.0;

double ar_residual_variance(std::span<const double> y, std::size_t m) {
  const std::size_t n = y.size();
  if (m == 0 || n <= 2 * m + 2) return sample_moments(y).variance;
  const auto rows = static_cast<Eigen::Index>(n - m);
  Eigen::MatrixXd design(rows, static_cast<Eigen::Index>(m + 1));
  Eigen::VectorXd target(rows);
  for (std::size_t t = m; t < n; ++t) {
    const auto r = static_cast<Eigen::Index>(t - m);
    target(r) = y[t];
    design(r, 0) = 1.0;
    for (std::size_t i = 1; i <= m; ++i) design(r, static_cast<Eigen::Index>(i)) = y[t - i];
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(target);
  return (target - design * coef).squaredNorm() / static_cast<double>(rows);
}

double sum_abs(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0,
                         [](double acc, double x) { return acc + std::abs(x); });
}

}  // namespace

void ArmaEgarchSpec::validate() const {
  if (p == 0 && q > 0) throw std::invalid_argument("EGARCH spec: p must be >= 1 when q >= 1");
}

std::string ArmaEgarchSpec::label() const {
  return "ARMA(" + std::to_string(m) + "," + std::to_string(n) + ")-EGARCH(" +
         std::to_string(p) + "," + std::to_string(q) + ")";
}

MarginalParams MarginalParams::zeros(const ArmaEgarchSpec& spec) {
  MarginalParams out;
  out.ar.assign(spec.m, 0.0);
  out.ma.assign(spec.n, 0.0);
  out.kappa.assign(spec.p, 0.0);
  out.gamma_asym.assign(spec.p, 0.0);
  out.beta_pers.assign(spec.q, 0.0);
  return out;
}

std::vector<double> MarginalParams::to_vector() const {
  std::vector<double> x;
  x.push_back(a0);
  x.insert(x.end(), ar.begin(), ar.end());
  x.insert(x.end(), ma.begin(), ma.end());
  x.push_back(w);
  x.insert(x.end(), kappa.begin(), kappa.end());
  x.insert(x.end(), gamma_asym.begin(), gamma_asym.end());
  x.insert(x.end(), beta_pers.begin(), beta_pers.end());
  x.push_back(nu);
  return x;
}

MarginalParams MarginalParams::from_vector(const ArmaEgarchSpec& spec, std::span<const double> x) {
  if (x.size() != spec.parameter_count()) {
    throw std::invalid_argument("MarginalParams::from_vector: wrong length");
  }
  MarginalParams out;
  auto it = x.begin();
  auto take = [&](std::size_t count) {
    std::vector<double> v(it, it + static_cast<std::ptrdiff_t>(count));
    it += static_cast<std::ptrdiff_t>(count);
    return v;
  };
  out.a0 = *it++;
  out.ar = take(spec.m);
  out.ma = take(spec.n);
  out.w = *it++;
  out.kappa = take(spec.p);
  out.gamma_asym = take(spec.p);
  out.beta_pers = take(spec.q);
  out.nu = *it;
  return out;
}

std::vector<std::string> MarginalParams::names() const {
  std::vector<std::string> out{"a0"};
  for (std::size_t i = 1; i <= ar.size(); ++i) out.push_back("ar" + std::to_string(i));
  for (std::size_t i = 1; i <= ma.size(); ++i) out.push_back("ma" + std::to_string(i));
  out.push_back("w");
  for (std::size_t i = 1; i <= kappa.size(); ++i) out.push_back("kappa" + std::to_string(i));
  for (std::size_t i = 1; i <= gamma_asym.size(); ++i) out.push_back("gamma" + std::to_string(i));
  for (std::size_t i = 1; i <= beta_pers.size(); ++i) out.push_back("beta" + std::to_string(i));
  out.push_back("nu");
  return out;
}

bool MarginalParams::admissible() const {
  const auto x = to_vector();
  if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) return false;
  return nu > 0.0 && sum_abs(beta_pers) < 1.0;
}

EgarchFilterResult egarch_filter(std::span<const double> y, const ArmaEgarchSpec& spec,
                                 const MarginalParams& params, const Presample& presample) {
  spec.validate();
  if (params.ar.size() != spec.m || params.ma.size() != spec.n || params.kappa.size() != spec.p ||
      params.gamma_asym.size() != spec.p || params.beta_pers.size() != spec.q) {
    throw std::invalid_argument("egarch_filter: parameter lengths do not match the spec");
  }
  if (!(params.nu > 0.0)) throw std::domain_error("egarch_filter: nu must be positive");

  const std::size_t n = y.size();
  EgarchFilterResult out;
  out.residuals.assign(n, kNaN);
  out.cond_variance.assign(n, kNaN);
  out.loglik.assign(n, kNaN);
  if (n == 0) return out;

  const double y_pre =
      presample.y.value_or(std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n));
  const double eps_pre = presample.eps.value_or(0.0);
  const double log_h_pre = presample.log_h ? *presample.log_h
                                           : std::log(ar_residual_variance(y, spec.m));
  const double h_pre = std::exp(log_h_pre);

  const double nu = params.nu;
  const double lambda = ged_lambda(nu);
  const double log_const = std::log(nu) - std::log(lambda) - (1.0 + 1.0 / nu) * std::numbers::ln2 -
                           std::lgamma(1.0 / nu);

  std::vector<double> log_h(n);
  auto eps_at = [&](std::size_t t, std::size_t lag) {
    return t >= lag ? out.residuals[t - lag] : eps_pre;
  };
  auto h_at = [&](std::size_t t, std::size_t lag) {
    return t >= lag ? out.cond_variance[t - lag] : h_pre;
  };

  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double mean = params.a0;
    for (std::size_t i = 1; i <= spec.m; ++i) mean += params.ar[i - 1] * (t >= i ? y[t - i] : y_pre);
    for (std::size_t j = 1; j <= spec.n; ++j) mean += params.ma[j - 1] * eps_at(t, j);
    const double eps = y[t] - mean;

    double lh = params.w;
    for (std::size_t i = 1; i <= spec.p; ++i) {
      const double e = eps_at(t, i);
      lh += params.kappa[i - 1] * (std::abs(e) + params.gamma_asym[i - 1] * e) /
            std::sqrt(h_at(t, i));
    }
    for (std::size_t j = 1; j <= spec.q; ++j) {
      lh += params.beta_pers[j - 1] * (t >= j ? log_h[t - j] : log_h_pre);
    }
    const double h = std::exp(lh);
    if (!std::isfinite(lh) || !(h > 0.0) || !std::isfinite(h) || !std::isfinite(eps)) {
      out.finite = false;
      out.total_loglik = -std::numeric_limits<double>::infinity();
      return out;
    }
    log_h[t] = lh;
    out.residuals[t] = eps;
    out.cond_variance[t] = h;
    const double z = eps / std::sqrt(h);
    const double ll = log_const - 0.5 * std::pow(std::abs(z) / lambda, nu) - 0.5 * lh;
    out.loglik[t] = ll;
    total += ll;
  }
  out.total_loglik = total;
  out.finite = std::isfinite(total);
  return out;
}

PitMode parse_pit_mode(std::string_view name) {
  if (name == "parametric") return PitMode::Parametric;
  if (name == "empirical") return PitMode::Empirical;
  throw std::invalid_argument("unknown pit mode '" + std::string(name) + "'");
}

std::string_view to_string(PitMode m) {
  return m == PitMode::Parametric ? "parametric" : "empirical";
}

MarginalFit fit_marginal(std::span<const double> y, const ArmaEgarchSpec& spec,
                         const MarginalFitOptions& options) {
  spec.validate();
  const std::size_t n = y.size();
  const std::size_t k = spec.parameter_count();
  if (n < k + 10) throw std::invalid_argument("fit_marginal: series too short for " + spec.label());
  const Moments mom = sample_moments(y);
  if (!(mom.variance > 0.0)) throw std::invalid_argument("fit_marginal: constant series");

  // Optimise on y / s so the simplex geometry does not depend on the data's
  // units; a0 scales with s and w shifts by 2 log(s) (1 - sum beta).
  const double s = std::sqrt(mom.variance);
  const double log_s2 = 2.0 * std::log(s);
  std::vector<double> scaled(y.begin(), y.end());
  for (double& v : scaled) v /= s;

  auto to_scaled = [&](MarginalParams p) {
    p.w -= log_s2 * (1.0 - std::accumulate(p.beta_pers.begin(), p.beta_pers.end(), 0.0));
    p.a0 /= s;
    return p;
  };
  auto from_scaled = [&](MarginalParams p) {
    p.w += log_s2 * (1.0 - std::accumulate(p.beta_pers.begin(), p.beta_pers.end(), 0.0));
    p.a0 *= s;
    return p;
  };

  MarginalParams start;
  if (options.start) {
    start = to_scaled(*options.start);
  } else {
    start = MarginalParams::zeros(spec);
    start.a0 = mom.mean / s;
    if (spec.p > 0) start.kappa[0] = 0.1;
    if (spec.q > 0) start.beta_pers[0] = 0.9;
    start.nu = 2.0;
    // Unit-variance start: stationary log h = 0 with E|z| ~ 0.8.
    start.w = spec.p > 0 ? -0.1 * 0.8 : 0.0;
  }

  Presample presample;
  presample.log_h = std::log(ar_residual_variance(scaled, spec.m));

  auto scaled_loglik = [&](std::span<const double> x, bool soft_penalty) {
    const MarginalParams p = MarginalParams::from_vector(spec, x);
    if (!(p.nu > kMinShape && p.nu < kMaxShape)) return kNaN;
    const auto filt = egarch_filter(scaled, spec, p, presample);
    if (!filt.finite) return kNaN;
    double value = filt.total_loglik;
    if (soft_penalty && sum_abs(p.beta_pers) >= 1.0) value -= kStationarityPenalty;
    return value;
  };

  OptimOptions optim = options.optim;
  if (optim.initial_step.empty()) {
    const auto names = start.names();
    optim.initial_step.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      const auto& nm = names[i];
      if (nm == "a0") optim.initial_step[i] = 0.1;
      else if (nm == "w") optim.initial_step[i] = 0.1;
      else if (nm == "nu") optim.initial_step[i] = 0.3;
      else optim.initial_step[i] = 0.05;
    }
  }
  const auto start_vec = start.to_vector();
  const OptimResult res = maximize(
      [&](std::span<const double> x) { return scaled_loglik(x, true); }, start_vec, optim);

  MarginalFit fit;
  fit.spec = spec;
  fit.optim = res;
  fit.params = from_scaled(MarginalParams::from_vector(spec, res.argmax));
  if (!fit.params.admissible()) {
    throw std::runtime_error("fit_marginal: no admissible optimum for " + spec.label());
  }
  if (!res.converged) fit.warnings.push_back("optimizer did not converge within budget");
  if (n < 50 * k) fit.warnings.push_back("fewer than 50 observations per parameter");

  // Everything below is on the original scale.
  Presample original;
  original.log_h = *presample.log_h + log_s2;
  const auto filt = egarch_filter(y, spec, fit.params, original);
  if (!filt.finite) throw std::runtime_error("fit_marginal: non-finite filter at the optimum");
  fit.loglik = filt.total_loglik;
  fit.aic = aic(fit.loglik, k);
  fit.bic = bic(fit.loglik, k, n);
  fit.cond_variance = filt.cond_variance;
  fit.std_residuals.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    fit.std_residuals[t] = filt.residuals[t] / std::sqrt(filt.cond_variance[t]);
  }

  const auto se = std_errors(
      [&](std::span<const double> x) {
        const MarginalParams p = MarginalParams::from_vector(spec, x);
        if (!(p.nu > kMinShape && p.nu < kMaxShape)) return kNaN;
        const auto f = egarch_filter(y, spec, p, original);
        return f.finite ? f.total_loglik : kNaN;
      },
      fit.params.to_vector());
  if (se.ok) {
    fit.std_errors = se.std_errors;
  } else {
    fit.warnings.push_back("standard errors unavailable: " + se.note);
  }

  if (options.pit == PitMode::Parametric) {
    fit.pit.resize(n);
    constexpr double lo = std::numeric_limits<double>::min();
    const double hi = std::nextafter(1.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      fit.pit[t] = std::clamp(ged_cdf(fit.std_residuals[t], fit.params.nu), lo, hi);
    }
  } else {
    fit.pit = empirical_pit(fit.std_residuals);
  }
  return fit;
}

MarginalFit select_marginal_order(std::span<const double> y, std::size_t max_order,
                                  const MarginalFitOptions& options) {
  std::optional<MarginalFit> best;
  std::string last_error;
  for (std::size_t m = 0; m <= max_order; ++m) {
    for (std::size_t n = 0; n <= max_order; ++n) {
      for (std::size_t p = 0; p <= max_order; ++p) {
        for (std::size_t q = 0; q <= max_order; ++q) {
          const ArmaEgarchSpec spec{m, n, p, q};
          if (p == 0 && q > 0) continue;
          try {
            MarginalFit fit = fit_marginal(y, spec, options);
            if (!best || fit.aic < best->aic) best = std::move(fit);
          } catch (const std::exception& e) {
            last_error = spec.label() + ": " + e.what();
          }
        }
      }
    }
  }
  if (!best) throw std::runtime_error("select_marginal_order: every order failed (" + last_error + ")");
  return *std::move(best);
}

KsResult pit_uniformity_check(std::span<const double> pit) {
  if (pit.empty()) throw std::invalid_argument("pit_uniformity_check: empty input");
  for (double u : pit) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("pit_uniformity_check: value outside (0, 1)");
  }
  return ks_uniform(pit);
}

}  // namespace tvc
