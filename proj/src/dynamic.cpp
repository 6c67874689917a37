#include "tvcopula/dynamic.hpp"

#include "tvcopula/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tvc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double softplus(double x) {
  if (x > 35.0) return x;
  return std::log1p(std::exp(x));
}

// Inverse of softplus on (0, inf).
double softplus_inverse(double y) {
  if (y > 35.0) return y + std::log1p(-std::exp(-y));
  return std::log(std::expm1(y));
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double clamp_uv(double u) { return std::clamp(u, kUvClamp, 1.0 - kUvClamp); }

double forcing_summand(Family f, double u, double v, double nu) {
  switch (f) {
    case Family::Normal:
      return norm_quantile(u) * norm_quantile(v);
    case Family::StudentT:
      return t_quantile(u, nu) * t_quantile(v, nu);
    default:
      return std::abs(u - v);
  }
}

StaticCopulaParams make_params(Family f, double a, double b) {
  switch (f) {
    case Family::Normal:
      return NormalParams{a};
    case Family::StudentT:
      return StudentTParams{a, b};
    case Family::Gumbel:
      return GumbelParams{a};
    case Family::Clayton:
      return ClaytonParams{a};
    case Family::SJC:
      return SjcParams{a, b};
  }
  throw std::invalid_argument("unknown family");
}

double step_logpdf(const StaticCopulaParams& params, double u, double v) {
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NormalParams>) {
          return kernel::normal_logpdf(p.rho, norm_quantile(u), norm_quantile(v));
        } else if constexpr (std::is_same_v<P, StudentTParams>) {
          return kernel::student_t_logpdf(p.rho, p.nu, t_quantile(u, p.nu), t_quantile(v, p.nu));
        } else if constexpr (std::is_same_v<P, GumbelParams>) {
          return kernel::gumbel_logpdf(p.theta, u, v);
        } else if constexpr (std::is_same_v<P, ClaytonParams>) {
          return kernel::clayton_logpdf(p.delta, u, v);
        } else {
          return kernel::sjc_logpdf(p.lambda_u, p.lambda_l, u, v);
        }
      },
      params);
}

void check_inputs(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("dynamic filter: u and v differ in length");
  if (u.empty()) throw std::invalid_argument("dynamic filter: empty input");
}

}  // namespace

double link_transform(LinkRole role, double x) {
  constexpr double below_one = 1.0 - 0x1p-53;
  switch (role) {
    case LinkRole::Correlation:
      // (1 - e^{-x}) / (1 + e^{-x}) == tanh(x / 2)
      return std::clamp(std::tanh(0.5 * x), -below_one, below_one);
    case LinkRole::DegreesOfFreedom:
      return std::max(kMinDof + (kMaxDof - kMinDof) * logistic(x), std::nextafter(kMinDof, kMaxDof));
    case LinkRole::GumbelTheta:
      return std::max(1.0 + softplus(x), std::nextafter(1.0, 2.0));
    case LinkRole::ClaytonDelta:
      return std::max(softplus(x), std::numeric_limits<double>::min());
    case LinkRole::TailProbability:
      return std::clamp(logistic(x), std::numeric_limits<double>::min(), below_one);
  }
  throw std::invalid_argument("unknown link role");
}

double link_inverse(LinkRole role, double y) {
  auto require = [](bool ok) {
    if (!ok) throw std::domain_error("link_inverse: value outside the link range");
  };
  switch (role) {
    case LinkRole::Correlation:
      require(y > -1.0 && y < 1.0);
      return 2.0 * std::atanh(y);
    case LinkRole::DegreesOfFreedom: {
      require(y > kMinDof && y <= kMaxDof);
      const double p = (y - kMinDof) / (kMaxDof - kMinDof);
      return std::log(p) - std::log1p(-p);
    }
    case LinkRole::GumbelTheta:
      require(y > 1.0);
      return softplus_inverse(y - 1.0);
    case LinkRole::ClaytonDelta:
      require(y > 0.0);
      return softplus_inverse(y);
    case LinkRole::TailProbability:
      require(y > 0.0 && y < 1.0);
      return std::log(y) - std::log1p(-y);
  }
  throw std::invalid_argument("unknown link role");
}

std::vector<LinkRole> link_roles(Family f) {
  switch (f) {
    case Family::Normal:
      return {LinkRole::Correlation};
    case Family::StudentT:
      return {LinkRole::Correlation, LinkRole::DegreesOfFreedom};
    case Family::Gumbel:
      return {LinkRole::GumbelTheta};
    case Family::Clayton:
      return {LinkRole::ClaytonDelta};
    case Family::SJC:
      return {LinkRole::TailProbability, LinkRole::TailProbability};
  }
  throw std::invalid_argument("unknown family");
}

std::vector<double> EvolutionParams::to_vector() const {
  std::vector<double> out;
  out.reserve(3 * triples.size());
  for (const auto& t : triples) {
    out.push_back(t.omega);
    out.push_back(t.alpha);
    out.push_back(t.beta);
  }
  return out;
}

EvolutionParams EvolutionParams::from_vector(Family f, std::span<const double> x) {
  if (x.size() != size(f)) throw std::invalid_argument("EvolutionParams: wrong vector length");
  EvolutionParams out;
  out.family = f;
  for (std::size_t i = 0; i < x.size(); i += 3) out.triples.push_back({x[i], x[i + 1], x[i + 2]});
  return out;
}

std::vector<std::string> EvolutionParams::names(Family f) {
  std::vector<std::string> suffixes;
  if (f == Family::StudentT) suffixes = {"_rho", "_nu"};
  else if (f == Family::SJC) suffixes = {"_U", "_L"};
  else suffixes = {""};
  std::vector<std::string> out;
  for (const auto& s : suffixes) {
    for (const char* base : {"omega", "alpha", "beta"}) out.push_back(base + s);
  }
  return out;
}

void EvolutionParams::validate() const {
  if (triples.size() != parameter_count(family)) {
    throw std::invalid_argument("EvolutionParams: wrong number of triples for " +
                                std::string(to_string(family)));
  }
  for (const auto& t : triples) {
    if (!std::isfinite(t.omega) || !std::isfinite(t.alpha) || !std::isfinite(t.beta)) {
      throw std::invalid_argument("EvolutionParams: coefficients must be finite");
    }
  }
}

StaticCopulaParams ParamPath::at(std::size_t t) const {
  return make_params(family, first.at(t), second.empty() ? 0.0 : second.at(t));
}

double forcing_term(Family f, std::span<const double> u, std::span<const double> v, std::size_t t,
                    double nu) {
  if (u.size() != v.size()) throw std::invalid_argument("forcing_term: u and v differ in length");
  if (t > u.size()) throw std::out_of_range("forcing_term: index beyond the data");
  if (f == Family::StudentT && !(nu > 0.0)) {
    throw std::invalid_argument("forcing_term: Student-t forcing needs nu > 0");
  }
  const std::size_t k = std::min(kForcingWindow, t);
  if (k == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t j = t - k; j < t; ++j) {
    const double a = clamp_uv(u[j]), b = clamp_uv(v[j]);
    sum += f == Family::StudentT ? TQuantileCurve(a)(nu) * TQuantileCurve(b)(nu) : forcing_summand(f, a, b, nu);
  }
  return sum / static_cast<double>(k);
}

DynamicRecursion::DynamicRecursion(const EvolutionParams& evo) : evo_(evo), roles_(link_roles(evo.family)) {
  evo_.validate();
  for (std::size_t i = 0; i < roles_.size(); ++i) {
    const auto& tr = evo_.triples[i];
    const double x0 = std::abs(tr.beta) < 1.0 ? tr.omega / (1.0 - tr.beta) : tr.omega;
    previous_[i] = link_transform(roles_[i], x0);
    if (!std::isfinite(x0)) finite_ = false;
  }
  current_ = make_params(evo_.family, previous_[0], previous_[1]);
}

double DynamicRecursion::forcing() const {
  const std::size_t k = std::min(count_, kForcingWindow);
  if (k == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t slot = (head_ + kForcingWindow - k + j) % kForcingWindow;
    if (evo_.family == Family::StudentT) {
      sum += hist_cu_[slot](previous_[1]) * hist_cv_[slot](previous_[1]);
    } else {
      sum += hist_term_[slot];
    }
  }
  return sum / static_cast<double>(k);
}

const StaticCopulaParams& DynamicRecursion::next() {
  const double f = forcing();
  std::array<double, 2> updated = previous_;
  for (std::size_t i = 0; i < roles_.size(); ++i) {
    const auto& tr = evo_.triples[i];
    const double x = tr.omega + tr.beta * previous_[i] + tr.alpha * f;
    if (!std::isfinite(x)) finite_ = false;
    updated[i] = link_transform(roles_[i], x);
    if (!std::isfinite(updated[i])) finite_ = false;
  }
  previous_ = updated;
  current_ = make_params(evo_.family, previous_[0], previous_[1]);
  return current_;
}

void DynamicRecursion::observe(double u, double v) {
  u = clamp_uv(u);
  v = clamp_uv(v);
  if (evo_.family == Family::StudentT) {
    observe(u, v, TQuantileCurve(u), TQuantileCurve(v));
    return;
  }
  hist_term_[head_] = forcing_summand(evo_.family, u, v, 0.0);
  head_ = (head_ + 1) % kForcingWindow;
  ++count_;
}

void DynamicRecursion::observe(double, double, const TQuantileCurve& cu, const TQuantileCurve& cv) {
  if (evo_.family != Family::StudentT) throw std::logic_error("observe: quantile curves are Student-t only");
  hist_cu_[head_] = cu;
  hist_cv_[head_] = cv;
  head_ = (head_ + 1) % kForcingWindow;
  ++count_;
}

TForcingCache make_t_forcing_cache(std::span<const double> u, std::span<const double> v) {
  check_inputs(u, v);
  TForcingCache cache;
  cache.u.reserve(u.size());
  cache.v.reserve(v.size());
  for (std::size_t t = 0; t < u.size(); ++t) {
    cache.u.emplace_back(clamp_uv(u[t]));
    cache.v.emplace_back(clamp_uv(v[t]));
  }
  return cache;
}

namespace {

// Builds a cache for Student-t when none is supplied; checks a supplied one.
const TForcingCache* resolve_cache(const EvolutionParams& evo, std::span<const double> u,
                                   std::span<const double> v, const TForcingCache* cache,
                                   TForcingCache& local) {
  if (evo.family != Family::StudentT) return nullptr;
  if (cache) {
    if (cache->u.size() != u.size() || cache->v.size() != v.size()) {
      throw std::invalid_argument("forcing cache does not match the data");
    }
    return cache;
  }
  local = make_t_forcing_cache(u, v);
  return &local;
}

void observe_at(DynamicRecursion& rec, const TForcingCache* cache, std::span<const double> u,
                std::span<const double> v, std::size_t t) {
  if (cache) {
    rec.observe(u[t], v[t], cache->u[t], cache->v[t]);
  } else {
    rec.observe(u[t], v[t]);
  }
}

}  // namespace

ParamPath filter_dynamic(const EvolutionParams& evo, std::span<const double> u,
                         std::span<const double> v, const TForcingCache* cache) {
  check_inputs(u, v);
  TForcingCache local;
  cache = resolve_cache(evo, u, v, cache, local);
  DynamicRecursion rec(evo);
  const bool two = parameter_count(evo.family) == 2;
  ParamPath path;
  path.family = evo.family;
  path.first.reserve(u.size());
  if (two) path.second.reserve(u.size());
  path.tail.reserve(u.size());
  double ll = 0.0;
  for (std::size_t t = 0; t < u.size(); ++t) {
    const auto& params = rec.next();
    const auto values = to_vector(params);
    path.first.push_back(values[0]);
    if (two) path.second.push_back(values[1]);
    if (rec.finite()) {
      path.tail.push_back(tail_dependence(params));
      ll += step_logpdf(params, clamp_uv(u[t]), clamp_uv(v[t]));
    } else {
      path.tail.push_back({std::nan(""), std::nan("")});
      ll = kNegInf;
    }
    observe_at(rec, cache, u, v, t);
  }
  path.loglik = std::isfinite(ll) ? ll : kNegInf;
  return path;
}

double dynamic_loglik(const EvolutionParams& evo, std::span<const double> u,
                      std::span<const double> v, const TForcingCache* cache) {
  check_inputs(u, v);
  TForcingCache local;
  cache = resolve_cache(evo, u, v, cache, local);
  DynamicRecursion rec(evo);
  double ll = 0.0;
  for (std::size_t t = 0; t < u.size(); ++t) {
    const auto& params = rec.next();
    if (!rec.finite()) return kNegInf;
    ll += step_logpdf(params, clamp_uv(u[t]), clamp_uv(v[t]));
    if (!std::isfinite(ll)) return kNegInf;
    observe_at(rec, cache, u, v, t);
  }
  return ll;
}

}  // namespace tvc
