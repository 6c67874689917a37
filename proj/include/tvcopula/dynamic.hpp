#pragma once

#include "tvcopula/copula.hpp"
#include "tvcopula/distributions.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tvc {

/// Number of past observations averaged in the forcing variable.
inline constexpr std::size_t kForcingWindow = 10;

/// Which constrained quantity a link maps onto.
enum class LinkRole {
  Correlation,      // (-1, 1):   (1 - e^{-x}) / (1 + e^{-x})
  DegreesOfFreedom, // (2, 200):  2 + 198 / (1 + e^{-x})
  GumbelTheta,      // (1, inf):  1 + log(1 + e^x)
  ClaytonDelta,     // (0, inf):  log(1 + e^x)
  TailProbability,  // (0, 1):    1 / (1 + e^{-x})
};

/// Strictly increasing map from the real line into the role's range. Results
/// are kept strictly inside the open range even where the formula rounds to
/// an endpoint (except the dof cap, which the static family admits).
double link_transform(LinkRole role, double x);
double link_inverse(LinkRole role, double y);

/// Link roles of the evolving parameters, in parameter order.
std::vector<LinkRole> link_roles(Family f);

/// omega + beta * previous + alpha * forcing, one per evolving parameter.
struct EvolutionTriple {
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

struct EvolutionParams {
  Family family = Family::Normal;
  /// One triple (Normal, Gumbel, Clayton) or two (Student-t: rho then nu;
  /// SJC: lambda_U then lambda_L).
  std::vector<EvolutionTriple> triples;

  std::vector<double> to_vector() const;
  static EvolutionParams from_vector(Family f, std::span<const double> x);
  static std::size_t size(Family f) { return 3 * parameter_count(f); }
  static std::vector<std::string> names(Family f);
  void validate() const;
};

/// Filtered path: per-observation copula parameters and tail coefficients.
struct ParamPath {
  Family family = Family::Normal;
  std::vector<double> first;   // rho, theta, delta or lambda_U
  std::vector<double> second;  // nu (Student-t) or lambda_L (SJC); empty otherwise
  std::vector<TailDep> tail;
  double loglik = 0.0;

  std::size_t size() const { return first.size(); }
  StaticCopulaParams at(std::size_t t) const;
};

/// Forcing variable for observation index t (0-based): the mean over the
/// min(10, t) previous observations; 0 at t = 0. Normal averages
/// Phi^{-1}(u) Phi^{-1}(v), Student-t averages T_nu^{-1}(u) T_nu^{-1}(v)
/// at `nu` (the previous step's dof), the others average |u - v|.
/// Student-t quantiles are taken from TQuantileCurve.
double forcing_term(Family f, std::span<const double> u, std::span<const double> v,
                    std::size_t t, double nu = 0.0);

/// The observation-driven recursion, one step at a time. Used by the filter
/// and the dynamic sampler so both follow the same arithmetic.
class DynamicRecursion {
 public:
  explicit DynamicRecursion(const EvolutionParams& evo);

  /// Parameters for the next observation, computed from the previous
  /// parameters and the stored history. Call `observe` before the next call.
  const StaticCopulaParams& next();
  void observe(double u, double v);
  /// Student-t only: observe with precomputed quantile curves of the
  /// clamped u and v.
  void observe(double u, double v, const TQuantileCurve& cu, const TQuantileCurve& cv);
  /// False once a non-finite state has been produced.
  bool finite() const { return finite_; }

 private:
  double forcing() const;

  EvolutionParams evo_;
  std::vector<LinkRole> roles_;
  std::array<double, 2> previous_{};
  StaticCopulaParams current_;
  // Ring buffer of the last kForcingWindow observations.
  std::array<double, kForcingWindow> hist_term_{};
  std::array<TQuantileCurve, kForcingWindow> hist_cu_{}, hist_cv_{};
  std::size_t count_ = 0;
  std::size_t head_ = 0;
  bool finite_ = true;
};

/// Student-t quantile curves of every (clamped) observation. Building them
/// once lets repeated Student-t filtering of the same data skip the per-step
/// quantile inversions.
struct TForcingCache {
  std::vector<TQuantileCurve> u;
  std::vector<TQuantileCurve> v;
};
TForcingCache make_t_forcing_cache(std::span<const double> u, std::span<const double> v);

/// Runs the recursion over (u, v) and accumulates log c(u_t, v_t | param_t).
/// Entries are clamped to [1e-10, 1 - 1e-10]. A non-finite state or density
/// yields loglik = -inf. `cache` (Student-t only) must come from the same data.
ParamPath filter_dynamic(const EvolutionParams& evo, std::span<const double> u,
                         std::span<const double> v, const TForcingCache* cache = nullptr);

/// Same recursion, log-likelihood only (no path storage).
double dynamic_loglik(const EvolutionParams& evo, std::span<const double> u,
                      std::span<const double> v, const TForcingCache* cache = nullptr);

}  // namespace tvc
