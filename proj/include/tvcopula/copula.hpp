#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tvc {

enum class Family { Normal, StudentT, Gumbel, Clayton, SJC };

/// Enumeration order; also the final tie-break in model selection.
inline constexpr std::array<Family, 5> kAllFamilies = {Family::Normal, Family::StudentT,
                                                       Family::Gumbel, Family::Clayton,
                                                       Family::SJC};

std::string_view to_string(Family f);
Family parse_family(std::string_view name);

// Parameter ranges of the static families.
inline constexpr double kMinDof = 2.0;
inline constexpr double kMaxDof = 200.0;

struct NormalParams {
  double rho = 0.0;  // (-1, 1)
};
struct StudentTParams {
  double rho = 0.0;   // (-1, 1)
  double nu = 10.0;   // (2, 200]
};
struct GumbelParams {
  double theta = 1.0;  // [1, inf)
};
struct ClaytonParams {
  double delta = 1.0;  // (-1, inf) \ {0}; tail dependence only for delta > 0
};
struct SjcParams {
  double lambda_u = 0.25;  // (0, 1)
  double lambda_l = 0.25;  // (0, 1)
};

using StaticCopulaParams =
    std::variant<NormalParams, StudentTParams, GumbelParams, ClaytonParams, SjcParams>;

Family family_of(const StaticCopulaParams& p);

/// Number of free parameters of a static family.
std::size_t parameter_count(Family f);
std::vector<std::string> parameter_names(Family f);

/// Flat parameter vector in the order of `parameter_names`.
std::vector<double> to_vector(const StaticCopulaParams& p);
StaticCopulaParams from_vector(Family f, std::span<const double> values);

/// Throws std::domain_error naming the offending parameter.
void validate(const StaticCopulaParams& p);
bool is_valid(const StaticCopulaParams& p) noexcept;

struct TailDep {
  double lambda_u = 0.0;
  double lambda_l = 0.0;
};

/// Arguments to the densities are clamped to [kUvClamp, 1 - kUvClamp].
inline constexpr double kUvClamp = 1e-10;

/// C(u, v). Accepts u, v in [0, 1].
double copula_cdf(const StaticCopulaParams& p, double u, double v);

/// log c(u, v). Returns -inf outside the support (Clayton with delta < 0);
/// throws std::overflow_error if the density overflows.
double copula_logpdf(const StaticCopulaParams& p, double u, double v);

/// h(v | u) = dC(u, v)/du, the conditional CDF of V given U = u.
double conditional_cdf(const StaticCopulaParams& p, double u, double v);

TailDep tail_dependence(const StaticCopulaParams& p);

/// 2 T_{nu+1}(-sqrt((nu+1)(1-rho)/(1+rho))), defined for any nu > 0.
double t_tail_dependence(double rho, double nu);

double static_loglik(const StaticCopulaParams& p, std::span<const double> u,
                     std::span<const double> v);

/// Joe-Clayton copula parameterised by its tail coefficients.
double joe_clayton_cdf(double u, double v, double lambda_u, double lambda_l);

/// Symmetrised Joe-Clayton:
/// 1/2 [C_JC(u,v | lu, ll) + C_JC(1-u, 1-v | ll, lu) + u + v - 1].
double sjc_cdf(double u, double v, double lambda_u, double lambda_l);

/// Kernels on quantile-transformed arguments, shared with the dynamic
/// filter so it can cache the transforms.
namespace kernel {

/// x = Phi^{-1}(u), y = Phi^{-1}(v).
double normal_logpdf(double rho, double x, double y);
/// x = T_nu^{-1}(u), y = T_nu^{-1}(v).
double student_t_logpdf(double rho, double nu, double x, double y);
double gumbel_logpdf(double theta, double u, double v);
double clayton_logpdf(double delta, double u, double v);
double sjc_logpdf(double lambda_u, double lambda_l, double u, double v);

}  // namespace kernel

}  // namespace tvc
