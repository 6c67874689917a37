#include "tvcopula/fit.hpp"

#include "tvcopula/distributions.hpp"
#include "tvcopula/stats.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tvc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Raw-state starting values are kept inside this box.
constexpr double kMaxRawStart = 30.0;
constexpr double kDofWarning = 199.0;

void check_data(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("copula fit: u and v differ in length");
  if (u.size() < 3) throw std::invalid_argument("copula fit: need at least 3 observations");
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0 && u[i] < 1.0 && v[i] > 0.0 && v[i] < 1.0)) {
      throw std::domain_error("copula fit: pseudo-observations must lie in (0, 1)");
    }
  }
}

double softplus(double x) { return x > 35.0 ? x : std::log1p(std::exp(x)); }

double safe_loglik(const StaticCopulaParams& p, std::span<const double> u,
                   std::span<const double> v) {
  if (!is_valid(p)) return kNegInf;
  try {
    const double ll = static_loglik(p, u, v);
    return std::isfinite(ll) ? ll : kNegInf;
  } catch (const std::exception&) {
    return kNegInf;
  }
}

// Unconstrained coordinates for the one- and two-parameter families other
// than Student-t.
StaticCopulaParams from_raw(Family f, std::span<const double> x) {
  switch (f) {
    case Family::Normal:
      return NormalParams{link_transform(LinkRole::Correlation, x[0])};
    case Family::Gumbel:
      return GumbelParams{link_transform(LinkRole::GumbelTheta, x[0])};
    case Family::Clayton:
      return ClaytonParams{softplus(x[0]) - 1.0};
    case Family::SJC:
      return SjcParams{link_transform(LinkRole::TailProbability, x[0]),
                       link_transform(LinkRole::TailProbability, x[1])};
    case Family::StudentT:
      break;
  }
  throw std::logic_error("from_raw: Student-t is fitted by profiling");
}

std::vector<double> start_raw(Family f, double tau) {
  tau = std::clamp(tau, -0.9, 0.9);
  switch (f) {
    case Family::Normal:
      return {link_inverse(LinkRole::Correlation, std::sin(std::numbers::pi * tau / 2.0))};
    case Family::Gumbel:
      return {link_inverse(LinkRole::GumbelTheta, std::max(1.0 / (1.0 - tau), 1.05))};
    case Family::Clayton: {
      double delta = 2.0 * tau / (1.0 - tau);
      if (std::abs(delta) < 0.1) delta = 0.1;
      return {std::log(std::expm1(delta + 1.0))};
    }
    case Family::SJC: {
      const double lambda = std::clamp(tau, 0.05, 0.8);
      const double x = link_inverse(LinkRole::TailProbability, lambda);
      return {x, x};
    }
    case Family::StudentT:
      break;
  }
  throw std::logic_error("start_raw: Student-t is fitted by profiling");
}

struct TProfile {
  double rho = 0.0;
  double nu = 0.0;
  double loglik = kNegInf;
  std::size_t evaluations = 0;
};

class StudentTProfiler {
 public:
  StudentTProfiler(std::span<const double> u, std::span<const double> v)
      : u_(u), v_(v), x_(u.size()), y_(u.size()) {}

  // Maximises over rho at fixed nu.
  TProfile at(double nu) {
    for (std::size_t i = 0; i < u_.size(); ++i) {
      x_[i] = t_quantile(std::clamp(u_[i], kUvClamp, 1.0 - kUvClamp), nu);
      y_[i] = t_quantile(std::clamp(v_[i], kUvClamp, 1.0 - kUvClamp), nu);
    }
    auto neg = [&](double r) {
      ++evaluations_;
      const double rho = std::tanh(r);
      double ll = 0.0;
      for (std::size_t i = 0; i < x_.size(); ++i) ll += kernel::student_t_logpdf(rho, nu, x_[i], y_[i]);
      return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
    };
    std::uintmax_t iters = 200;
    const auto [r, f] = boost::math::tools::brent_find_minima(neg, -6.0, 6.0, 40, iters);
    return {std::tanh(r), nu, -f, evaluations_};
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  std::span<const double> u_, v_;
  std::vector<double> x_, y_;
  std::size_t evaluations_ = 0;
};

TProfile profile_student_t(std::span<const double> u, std::span<const double> v) {
  StudentTProfiler profiler(u, v);
  constexpr std::array<double, 13> grid = {2.1, 2.5, 3.0, 4.0, 5.0, 7.0, 10.0,
                                           15.0, 25.0, 40.0, 70.0, 120.0, kMaxDof};
  std::array<double, grid.size()> values{};
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = profiler.at(grid[i]).loglik;
    if (values[i] > values[best]) best = i;
  }
  // Refine on s = log(nu - 2) between the grid neighbours of the best node.
  const double lo = std::log(grid[best == 0 ? 0 : best - 1] - kMinDof);
  const double hi = std::log(grid[std::min(best + 1, grid.size() - 1)] - kMinDof);
  auto neg = [&](double s) {
    const double ll = profiler.at(kMinDof + std::exp(s)).loglik;
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
  };
  std::uintmax_t iters = 100;
  const auto [s, f] = boost::math::tools::brent_find_minima(neg, lo, hi, 30, iters);
  TProfile out = profiler.at(std::min(kMinDof + std::exp(s), kMaxDof));
  if (values[best] > out.loglik) out = profiler.at(grid[best]);
  out.evaluations = profiler.evaluations();
  return out;
}

void attach_estimates(FitReport& report, const std::vector<std::string>& names,
                      std::span<const double> values, const StdErrorResult& se) {
  report.estimates.clear();
  for (std::size_t i = 0; i < names.size(); ++i) {
    Estimate e{names[i], values[i], std::nullopt};
    if (se.ok) e.std_error = se.std_errors[i];
    report.estimates.push_back(std::move(e));
  }
  if (!se.ok) report.warnings.push_back("standard errors unavailable: " + se.note);
}

double clamp_raw(double x) {
  if (std::isnan(x)) return 0.0;
  return std::clamp(x, -kMaxRawStart, kMaxRawStart);
}

// link_inverse with the value nudged inside the open range first.
double raw_start(LinkRole role, double value) {
  switch (role) {
    case LinkRole::Correlation:
      value = std::clamp(value, -0.999, 0.999);
      break;
    case LinkRole::DegreesOfFreedom:
      value = std::clamp(value, kMinDof + 1e-3, kMaxDof - 0.1);
      break;
    case LinkRole::GumbelTheta:
      value = std::max(value, 1.0 + 1e-4);
      break;
    case LinkRole::ClaytonDelta:
      value = std::max(value, 1e-4);
      break;
    case LinkRole::TailProbability:
      value = std::clamp(value, 1e-4, 1.0 - 1e-4);
      break;
  }
  return clamp_raw(link_inverse(role, value));
}

}  // namespace

StaticFit fit_static(Family f, std::span<const double> u, std::span<const double> v,
                     const CopulaFitOptions& options) {
  check_data(u, v);
  StaticFit out;
  out.report.family = f;
  out.report.mode = Mode::Static;
  out.report.n = u.size();

  const Objective natural = [&](std::span<const double> x) {
    const auto p = from_vector(f, x);
    return safe_loglik(p, u, v);
  };

  if (f == Family::StudentT) {
    const TProfile prof = profile_student_t(u, v);
    out.params = StudentTParams{prof.rho, prof.nu};
    out.optim.argmax = {prof.rho, prof.nu};
    out.optim.value = prof.loglik;
    out.optim.evaluations = prof.evaluations;
    out.optim.converged = std::isfinite(prof.loglik);
    if (prof.nu >= kDofWarning) {
      out.report.warnings.push_back("nu at the upper bound; fit is close to the Normal copula");
    }
  } else {
    const Objective raw = [&](std::span<const double> x) { return safe_loglik(from_raw(f, x), u, v); };
    auto start = start_raw(f, kendall_tau(u, v));
    if (!std::isfinite(raw(start))) {
      // Clayton with negative delta can exclude observed points.
      std::fill(start.begin(), start.end(), f == Family::Clayton ? 1.0 : 0.0);
    }
    OptimOptions opt = options.optim;
    if (opt.initial_step.empty()) opt.initial_step.assign(start.size(), 0.3);
    out.optim = maximize(raw, start, opt);
    out.params = from_raw(f, out.optim.argmax);
  }

  const auto values = to_vector(out.params);
  out.report.loglik = natural(values);
  out.report.converged = out.optim.converged && std::isfinite(out.report.loglik);
  if (!out.optim.converged) out.report.warnings.push_back("optimiser did not converge");

  StdErrorResult se = std_errors(natural, values, options.se_step);
  if (!se.ok && f == Family::StudentT) {
    // Boundary nu: report the rho error conditional on nu.
    const double nu = values[1];
    const Objective rho_only = [&](std::span<const double> x) {
      const double xv[2] = {x[0], nu};
      return natural(xv);
    };
    const StdErrorResult rho_se = std_errors(rho_only, std::span(values).first(1), options.se_step);
    attach_estimates(out.report, parameter_names(f), values, se);
    if (rho_se.ok) {
      out.report.estimates[0].std_error = rho_se.std_errors[0];
      out.report.warnings.push_back("rho standard error conditional on nu");
    }
  } else {
    attach_estimates(out.report, parameter_names(f), values, se);
  }
  finalize_criteria(out.report);
  return out;
}

DynamicFit fit_dynamic(Family f, std::span<const double> u, std::span<const double> v,
                       const StaticFit& start, const CopulaFitOptions& options) {
  check_data(u, v);
  if (family_of(start.params) != f) throw std::invalid_argument("fit_dynamic: start family mismatch");

  const TForcingCache cache = f == Family::StudentT ? make_t_forcing_cache(u, v) : TForcingCache{};
  const TForcingCache* cache_ptr = f == Family::StudentT ? &cache : nullptr;
  const Objective objective = [&](std::span<const double> x) {
    try {
      return dynamic_loglik(EvolutionParams::from_vector(f, x), u, v, cache_ptr);
    } catch (const std::exception&) {
      return kNegInf;
    }
  };

  const auto roles = link_roles(f);
  const auto theta = to_vector(start.params);
  std::vector<std::vector<double>> candidates(3);
  for (std::size_t i = 0; i < roles.size(); ++i) {
    const double c = raw_start(roles[i], theta[i]);
    candidates[0].insert(candidates[0].end(), {c, 0.05, 0.8});
    candidates[1].insert(candidates[1].end(), {c, 0.0, 0.0});
    candidates[2].insert(candidates[2].end(), {clamp_raw(c - 0.8 * theta[i]), 0.05, 0.8});
  }
  std::size_t best = 1;
  double best_value = kNegInf;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double value = objective(candidates[i]);
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  if (!std::isfinite(best_value)) {
    throw std::runtime_error("fit_dynamic: no finite starting point");
  }

  OptimOptions opt = options.optim;
  if (opt.initial_step.empty()) {
    for (std::size_t i = 0; i < roles.size(); ++i) opt.initial_step.insert(opt.initial_step.end(), {0.3, 0.1, 0.1});
  }

  DynamicFit out;
  out.optim = maximize(objective, candidates[best], opt);
  out.evo = EvolutionParams::from_vector(f, out.optim.argmax);
  out.path = filter_dynamic(out.evo, u, v, cache_ptr);

  out.report.family = f;
  out.report.mode = Mode::Dynamic;
  out.report.n = u.size();
  out.report.loglik = out.path.loglik;
  out.report.converged = out.optim.converged && std::isfinite(out.report.loglik);
  if (!out.optim.converged) out.report.warnings.push_back("optimiser did not converge");
  const StdErrorResult se = std_errors(objective, out.optim.argmax, options.se_step);
  attach_estimates(out.report, EvolutionParams::names(f), out.optim.argmax, se);
  finalize_criteria(out.report);
  return out;
}

DynamicFit fit_dynamic(Family f, std::span<const double> u, std::span<const double> v,
                       const CopulaFitOptions& options) {
  return fit_dynamic(f, u, v, fit_static(f, u, v, options), options);
}

}  // namespace tvc
