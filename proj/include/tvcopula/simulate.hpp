#pragma once

#include "tvcopula/copula.hpp"
#include "tvcopula/dynamic.hpp"
#include "tvcopula/marginal.hpp"
#include "tvcopula/rng.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace tvc {

struct PairSample {
  std::vector<double> u;
  std::vector<double> v;
  std::size_t size() const { return u.size(); }
};

/// Tolerance of the conditional-CDF inversion used for SJC.
inline constexpr double kInversionTol = 1e-10;

/// One draw from a static copula.
///   Normal, Student-t: correlated Gaussian / t pairs through their CDFs.
///   Clayton: Marshall-Olkin gamma frailty (delta > 0), conditional
///            inversion (delta < 0).
///   Gumbel:  positive-stable frailty (Kanter's representation).
///   SJC:     bisection on h(v | u) = w.
std::pair<double, double> draw_pair(const StaticCopulaParams& params, Xoshiro256& rng);

/// n independent pairs. Throws std::domain_error on invalid parameters.
PairSample sample_copula(const StaticCopulaParams& params, std::size_t n, Seed seed);

struct DynamicSample {
  PairSample data;
  ParamPath path;  // the parameters each pair was drawn from
};

/// Draws pair t from the copula at the current recursion state, then feeds
/// the pair back into the recursion.
DynamicSample sample_dynamic(const EvolutionParams& evo, std::size_t n, Seed seed);

/// ARMA-EGARCH path with GED innovations (inverse-CDF draws). The first
/// `burn_in` values are discarded. Throws std::domain_error when the
/// log-variance recursion is explosive (sum |beta_pers| >= 1) or overflows.
std::vector<double> simulate_egarch(const ArmaEgarchSpec& spec, const MarginalParams& params,
                                    std::size_t n, Seed seed, std::size_t burn_in = 500);

/// The same recursion driven by given innovation probabilities: z_t is the
/// GED quantile of uniforms[t]. Returns uniforms.size() - burn_in values.
std::vector<double> egarch_from_uniforms(const ArmaEgarchSpec& spec, const MarginalParams& params,
                                         std::span<const double> uniforms, std::size_t burn_in = 0);

}  // namespace tvc
