#include "tvcopula/copula.hpp"

#include "tvcopula/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tvc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double clamp_uv(double x) { return std::clamp(x, kUvClamp, 1.0 - kUvClamp); }

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// log(e^a + e^b - 1); -inf when the sum is not positive.
double log_sum_minus_one(double a, double b) {
  const double m = std::max(a, b);
  if (m > 0.5) {
    const double inner = std::exp(a - m) + std::exp(b - m) - std::exp(-m);
    return inner > 0.0 ? m + std::log(inner) : kNegInf;
  }
  const double s = std::expm1(a) + std::expm1(b);
  return s > -1.0 ? std::log1p(s) : kNegInf;
}

double check_density(double logc) {
  if (std::isnan(logc) || logc == std::numeric_limits<double>::infinity()) {
    throw std::overflow_error("copula density overflow");
  }
  return logc;
}

// ---- Joe-Clayton on log-complements ---------------------------------------
// The JC copula only depends on (1-u, 1-v); callers pass log(1-u), log(1-v)
// so that the survival term of the SJC keeps full precision near 0.

struct JcShape {
  double a;  // from the upper tail: 1 / log2(2 - lambda_u)
  double b;  // from the lower tail: -1 / log2(lambda_l)
};

JcShape jc_shape(double lambda_u, double lambda_l) {
  return {1.0 / std::log2(2.0 - lambda_u), -1.0 / std::log2(lambda_l)};
}

struct JcCore {
  double log_a_term;  // log A = log(1 - (1-u)^a)
  double log_b_term;  // log B
  double log_s;       // log(A^-b + B^-b - 1)
  double log_one_minus_d;
  double d;
};

// log(1 - e^x) for x < 0.
double log1mexp(double x) {
  return x > -std::numbers::ln2 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

JcCore jc_core(double log_ubar, double log_vbar, JcShape s) {
  JcCore c{};
  c.log_a_term = log1mexp(s.a * log_ubar);
  c.log_b_term = log1mexp(s.a * log_vbar);
  c.log_s = log_sum_minus_one(-s.b * c.log_a_term, -s.b * c.log_b_term);
  const double log_d = -c.log_s / s.b;
  c.d = std::exp(log_d);
  c.log_one_minus_d = std::log(-std::expm1(log_d));
  return c;
}

double jc_cdf(double log_ubar, double log_vbar, JcShape s) {
  const JcCore c = jc_core(log_ubar, log_vbar, s);
  return -std::expm1(c.log_one_minus_d / s.a);
}

double jc_h(double log_ubar, double log_vbar, JcShape s) {
  const JcCore c = jc_core(log_ubar, log_vbar, s);
  return std::exp((1.0 / s.a - 1.0) * c.log_one_minus_d - (s.b + 1.0) * c.log_a_term -
                  (1.0 / s.b + 1.0) * c.log_s + (s.a - 1.0) * log_ubar);
}

double jc_logpdf(double log_ubar, double log_vbar, JcShape s) {
  const JcCore c = jc_core(log_ubar, log_vbar, s);
  const double bracket = (1.0 - 1.0 / s.a) * c.d + (1.0 + s.b) * (-std::expm1(-c.log_s / s.b));
  return std::log(s.a) + (s.a - 1.0) * (log_ubar + log_vbar) -
         (s.b + 1.0) * (c.log_a_term + c.log_b_term) - (1.0 / s.b + 2.0) * c.log_s +
         (1.0 / s.a - 2.0) * c.log_one_minus_d + std::log(bracket);
}

// ---- Archimedean pieces ---------------------------------------------------

double gumbel_log_s(double theta, double lx, double ly) {
  return log_add_exp(theta * lx, theta * ly);
}

double gumbel_cdf(double theta, double u, double v) {
  const double lx = std::log(-std::log(u));
  const double ly = std::log(-std::log(v));
  return std::exp(-std::exp(gumbel_log_s(theta, lx, ly) / theta));
}

double gumbel_h(double theta, double u, double v) {
  const double lu = std::log(u);
  const double lx = std::log(-lu);
  const double ly = std::log(-std::log(v));
  const double log_s = gumbel_log_s(theta, lx, ly);
  const double w = std::exp(log_s / theta);
  return std::exp(-w - lu + (theta - 1.0) * lx + (1.0 / theta - 1.0) * log_s);
}

double clayton_log_s(double delta, double lu, double lv) {
  return log_sum_minus_one(-delta * lu, -delta * lv);
}

double clayton_cdf(double delta, double u, double v) {
  if (delta == 0.0) return u * v;
  const double log_s = clayton_log_s(delta, std::log(u), std::log(v));
  if (log_s == kNegInf) return 0.0;
  return std::exp(-log_s / delta);
}

double clayton_h(double delta, double u, double v) {
  if (delta == 0.0) return v;
  const double lu = std::log(u);
  const double log_s = clayton_log_s(delta, lu, std::log(v));
  if (log_s == kNegInf) return 0.0;
  return std::exp((-delta - 1.0) * lu + (-1.0 / delta - 1.0) * log_s);
}

}  // namespace

// ---- kernels ----------------------------------------------------------------

namespace kernel {

double normal_logpdf(double rho, double x, double y) {
  const double one_m = 1.0 - rho * rho;
  return -0.5 * std::log(one_m) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * one_m);
}

double student_t_logpdf(double rho, double nu, double x, double y) {
  const double one_m = 1.0 - rho * rho;
  const double q = (x * x - 2.0 * rho * x * y + y * y) / (nu * one_m);
  const double log_joint =
      -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(one_m) - 0.5 * (nu + 2.0) * std::log1p(q);
  const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                          0.5 * std::log(nu * std::numbers::pi);
  const double log_margins = 2.0 * log_norm - 0.5 * (nu + 1.0) *
                                                  (std::log1p(x * x / nu) + std::log1p(y * y / nu));
  return log_joint - log_margins;
}

double gumbel_logpdf(double theta, double u, double v) {
  const double lu = std::log(u), lv = std::log(v);
  const double lx = std::log(-lu), ly = std::log(-lv);
  const double log_s = gumbel_log_s(theta, lx, ly);
  const double w = std::exp(log_s / theta);
  return -w - lu - lv + (theta - 1.0) * (lx + ly) + (1.0 / theta - 2.0) * log_s +
         std::log(w + theta - 1.0);
}

double clayton_logpdf(double delta, double u, double v) {
  if (delta == 0.0) return 0.0;
  const double lu = std::log(u), lv = std::log(v);
  const double log_s = clayton_log_s(delta, lu, lv);
  if (log_s == kNegInf) return kNegInf;
  return std::log1p(delta) - (1.0 + delta) * (lu + lv) - (1.0 / delta + 2.0) * log_s;
}

double sjc_logpdf(double lambda_u, double lambda_l, double u, double v) {
  const double first = jc_logpdf(std::log1p(-u), std::log1p(-v), jc_shape(lambda_u, lambda_l));
  const double survival = jc_logpdf(std::log(u), std::log(v), jc_shape(lambda_l, lambda_u));
  return log_add_exp(first, survival) - std::numbers::ln2;
}

}  // namespace kernel

// ---- family metadata ---------------------------------------------------------

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Normal: return "normal";
    case Family::StudentT: return "student_t";
    case Family::Gumbel: return "gumbel";
    case Family::Clayton: return "clayton";
    case Family::SJC: return "sjc";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : kAllFamilies) {
    if (name == to_string(f)) return f;
  }
  if (name == "t" || name == "student-t" || name == "studentt") return Family::StudentT;
  throw std::invalid_argument("unknown copula family '" + std::string(name) + "'");
}

Family family_of(const StaticCopulaParams& p) { return static_cast<Family>(p.index()); }

std::size_t parameter_count(Family f) {
  return (f == Family::StudentT || f == Family::SJC) ? 2 : 1;
}

std::vector<std::string> parameter_names(Family f) {
  switch (f) {
    case Family::Normal: return {"rho"};
    case Family::StudentT: return {"rho", "nu"};
    case Family::Gumbel: return {"theta"};
    case Family::Clayton: return {"delta"};
    case Family::SJC: return {"lambda_U", "lambda_L"};
  }
  return {};
}

std::vector<double> to_vector(const StaticCopulaParams& p) {
  return std::visit(overloaded{
                        [](const NormalParams& q) { return std::vector<double>{q.rho}; },
                        [](const StudentTParams& q) { return std::vector<double>{q.rho, q.nu}; },
                        [](const GumbelParams& q) { return std::vector<double>{q.theta}; },
                        [](const ClaytonParams& q) { return std::vector<double>{q.delta}; },
                        [](const SjcParams& q) {
                          return std::vector<double>{q.lambda_u, q.lambda_l};
                        },
                    },
                    p);
}

StaticCopulaParams from_vector(Family f, std::span<const double> values) {
  if (values.size() != parameter_count(f)) {
    throw std::invalid_argument("from_vector: wrong parameter count for " +
                                std::string(to_string(f)));
  }
  switch (f) {
    case Family::Normal: return NormalParams{values[0]};
    case Family::StudentT: return StudentTParams{values[0], values[1]};
    case Family::Gumbel: return GumbelParams{values[0]};
    case Family::Clayton: return ClaytonParams{values[0]};
    case Family::SJC: return SjcParams{values[0], values[1]};
  }
  throw std::logic_error("from_vector: unreachable");
}

void validate(const StaticCopulaParams& p) {
  auto fail = [](const std::string& what) { throw std::domain_error(what); };
  auto check_rho = [&](double rho) {
    if (!(rho > -1.0 && rho < 1.0)) fail("rho must lie in (-1, 1), got " + std::to_string(rho));
  };
  std::visit(overloaded{
                 [&](const NormalParams& q) { check_rho(q.rho); },
                 [&](const StudentTParams& q) {
                   check_rho(q.rho);
                   if (!(q.nu > kMinDof && q.nu <= kMaxDof)) {
                     fail("nu must lie in (2, 200], got " + std::to_string(q.nu));
                   }
                 },
                 [&](const GumbelParams& q) {
                   if (!(q.theta >= 1.0 && std::isfinite(q.theta))) {
                     fail("theta must lie in [1, inf), got " + std::to_string(q.theta));
                   }
                 },
                 [&](const ClaytonParams& q) {
                   if (!(q.delta > -1.0 && std::isfinite(q.delta)) || q.delta == 0.0) {
                     fail("delta must lie in (-1, inf) \\ {0}, got " + std::to_string(q.delta));
                   }
                 },
                 [&](const SjcParams& q) {
                   if (!(q.lambda_u > 0.0 && q.lambda_u < 1.0)) {
                     fail("lambda_U must lie in (0, 1), got " + std::to_string(q.lambda_u));
                   }
                   if (!(q.lambda_l > 0.0 && q.lambda_l < 1.0)) {
                     fail("lambda_L must lie in (0, 1), got " + std::to_string(q.lambda_l));
                   }
                 },
             },
             p);
}

bool is_valid(const StaticCopulaParams& p) noexcept {
  try {
    validate(p);
    return true;
  } catch (const std::domain_error&) {
    return false;
  }
}

// ---- public evaluation -------------------------------------------------------

double joe_clayton_cdf(double u, double v, double lambda_u, double lambda_l) {
  validate(SjcParams{lambda_u, lambda_l});
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return std::min(v, 1.0);
  if (v >= 1.0) return u;
  return jc_cdf(std::log1p(-u), std::log1p(-v), jc_shape(lambda_u, lambda_l));
}

double sjc_cdf(double u, double v, double lambda_u, double lambda_l) {
  validate(SjcParams{lambda_u, lambda_l});
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return std::min(v, 1.0);
  if (v >= 1.0) return u;
  const double first = jc_cdf(std::log1p(-u), std::log1p(-v), jc_shape(lambda_u, lambda_l));
  const double survival = jc_cdf(std::log(u), std::log(v), jc_shape(lambda_l, lambda_u));
  return std::clamp(0.5 * (first + survival + u + v - 1.0), 0.0, std::min(u, v));
}

double copula_cdf(const StaticCopulaParams& p, double u, double v) {
  validate(p);
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("copula_cdf: arguments must lie in [0, 1]");
  }
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;
  return std::visit(
      overloaded{
          [&](const NormalParams& q) {
            return bivariate_norm_cdf(norm_quantile(u), norm_quantile(v), q.rho);
          },
          [&](const StudentTParams& q) {
            return bivariate_t_cdf(t_quantile(u, q.nu), t_quantile(v, q.nu), q.rho, q.nu);
          },
          [&](const GumbelParams& q) { return gumbel_cdf(q.theta, u, v); },
          [&](const ClaytonParams& q) { return clayton_cdf(q.delta, u, v); },
          [&](const SjcParams& q) { return sjc_cdf(u, v, q.lambda_u, q.lambda_l); },
      },
      p);
}

double copula_logpdf(const StaticCopulaParams& p, double u, double v) {
  validate(p);
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("copula_logpdf: arguments must lie in [0, 1]");
  }
  u = clamp_uv(u);
  v = clamp_uv(v);
  const double logc = std::visit(
      overloaded{
          [&](const NormalParams& q) {
            return kernel::normal_logpdf(q.rho, norm_quantile(u), norm_quantile(v));
          },
          [&](const StudentTParams& q) {
            return kernel::student_t_logpdf(q.rho, q.nu, t_quantile(u, q.nu), t_quantile(v, q.nu));
          },
          [&](const GumbelParams& q) { return kernel::gumbel_logpdf(q.theta, u, v); },
          [&](const ClaytonParams& q) { return kernel::clayton_logpdf(q.delta, u, v); },
          [&](const SjcParams& q) { return kernel::sjc_logpdf(q.lambda_u, q.lambda_l, u, v); },
      },
      p);
  return check_density(logc);
}

double conditional_cdf(const StaticCopulaParams& p, double u, double v) {
  validate(p);
  u = clamp_uv(u);
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  const double h = std::visit(
      overloaded{
          [&](const NormalParams& q) {
            return norm_cdf((norm_quantile(v) - q.rho * norm_quantile(u)) /
                            std::sqrt(1.0 - q.rho * q.rho));
          },
          [&](const StudentTParams& q) {
            const double x = t_quantile(u, q.nu), y = t_quantile(v, q.nu);
            const double scale =
                std::sqrt((q.nu + x * x) * (1.0 - q.rho * q.rho) / (q.nu + 1.0));
            return t_cdf((y - q.rho * x) / scale, q.nu + 1.0);
          },
          [&](const GumbelParams& q) { return gumbel_h(q.theta, u, v); },
          [&](const ClaytonParams& q) { return clayton_h(q.delta, u, v); },
          [&](const SjcParams& q) {
            const double first =
                jc_h(std::log1p(-u), std::log1p(-v), jc_shape(q.lambda_u, q.lambda_l));
            const double survival =
                jc_h(std::log(u), std::log(v), jc_shape(q.lambda_l, q.lambda_u));
            return 0.5 * (first - survival + 1.0);
          },
      },
      p);
  return std::clamp(h, 0.0, 1.0);
}

double t_tail_dependence(double rho, double nu) {
  if (!(nu > 0.0)) throw std::domain_error("t_tail_dependence: nu must be positive");
  if (!(rho > -1.0 && rho < 1.0)) throw std::domain_error("t_tail_dependence: |rho| >= 1");
  return 2.0 * t_cdf(-std::sqrt((nu + 1.0) * (1.0 - rho) / (1.0 + rho)), nu + 1.0);
}

TailDep tail_dependence(const StaticCopulaParams& p) {
  validate(p);
  return std::visit(overloaded{
                        [](const NormalParams&) { return TailDep{0.0, 0.0}; },
                        [](const StudentTParams& q) {
                          const double lam = t_tail_dependence(q.rho, q.nu);
                          return TailDep{lam, lam};
                        },
                        [](const GumbelParams& q) {
                          return TailDep{2.0 - std::pow(2.0, 1.0 / q.theta), 0.0};
                        },
                        [](const ClaytonParams& q) {
                          return TailDep{0.0, q.delta > 0.0 ? std::pow(2.0, -1.0 / q.delta) : 0.0};
                        },
                        [](const SjcParams& q) { return TailDep{q.lambda_u, q.lambda_l}; },
                    },
                    p);
}

double static_loglik(const StaticCopulaParams& p, std::span<const double> u,
                     std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("static_loglik: length mismatch");
  validate(p);
  double total = 0.0;
  for (std::size_t t = 0; t < u.size(); ++t) {
    if (!(u[t] > 0.0 && u[t] < 1.0 && v[t] > 0.0 && v[t] < 1.0)) {
      throw std::domain_error("static_loglik: observation " + std::to_string(t) +
                              " outside (0, 1)");
    }
    total += copula_logpdf(p, u[t], v[t]);
  }
  return total;
}

}  // namespace tvc
