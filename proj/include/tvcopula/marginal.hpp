#pragma once

#include "tvcopula/estimation.hpp"
#include "tvcopula/stats.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tvc {

// ---- generalised error distribution (unit variance) -------------------------

/// log f(z) = log nu - log lambda - (1 + 1/nu) log 2 - log Gamma(1/nu)
///            - |z/lambda|^nu / 2,
/// lambda = sqrt(2^{-2/nu} Gamma(1/nu) / Gamma(3/nu)). nu = 2 is N(0,1).
double ged_logpdf(double z, double nu);
double ged_cdf(double z, double nu);
double ged_quantile(double p, double nu);
/// Scale lambda of the unit-variance parameterisation.
double ged_lambda(double nu);

// ---- ARMA(m,n)-EGARCH(p,q) -----------------------------------------------------

struct ArmaEgarchSpec {
  std::size_t m = 0;  // AR order
  std::size_t n = 0;  // MA order
  std::size_t p = 1;  // magnitude / asymmetry terms
  std::size_t q = 1;  // log-variance persistence terms

  /// Throws std::invalid_argument when p == 0 while q > 0.
  void validate() const;
  /// a0, a[m], b[n], w, kappa[p], gamma[p], beta[q], nu.
  std::size_t parameter_count() const { return 3 + m + n + 2 * p + q; }
  std::string label() const;
};

struct MarginalParams {
  double a0 = 0.0;
  std::vector<double> ar;          // a_1..a_m
  std::vector<double> ma;          // b_1..b_n
  double w = 0.0;
  std::vector<double> kappa;       // magnitude coefficients, length p
  std::vector<double> gamma_asym;  // asymmetry coefficients, length p
  std::vector<double> beta_pers;   // log h persistence, length q
  double nu = 2.0;                 // GED shape

  static MarginalParams zeros(const ArmaEgarchSpec& spec);
  std::vector<double> to_vector() const;
  static MarginalParams from_vector(const ArmaEgarchSpec& spec, std::span<const double> x);
  std::vector<std::string> names() const;
  /// nu > 0, all finite, sum |beta_pers| < 1.
  bool admissible() const;
};

/// Pre-sample state. Unset fields take their defaults: eps = 0, y = sample
/// mean of y, log h = log of the residual variance of an OLS AR(m) fit.
struct Presample {
  std::optional<double> log_h;
  std::optional<double> eps;
  std::optional<double> y;
};

struct EgarchFilterResult {
  std::vector<double> residuals;      // eps_t
  std::vector<double> cond_variance;  // h_t
  std::vector<double> loglik;         // per-observation contributions
  double total_loglik = 0.0;
  bool finite = true;  // false when a non-finite h or density was met
};

/// Runs the ARMA mean and EGARCH variance recursions over y.
EgarchFilterResult egarch_filter(std::span<const double> y, const ArmaEgarchSpec& spec,
                                 const MarginalParams& params, const Presample& presample = {});

enum class PitMode { Parametric, Empirical };

PitMode parse_pit_mode(std::string_view name);
std::string_view to_string(PitMode m);

struct MarginalFitOptions {
  PitMode pit = PitMode::Parametric;
  OptimOptions optim{};
  /// Start point; defaults derived from the sample moments.
  std::optional<MarginalParams> start;
};

struct MarginalFit {
  ArmaEgarchSpec spec;
  MarginalParams params;
  std::vector<double> std_errors;  // empty when the Hessian was unusable
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::vector<double> std_residuals;
  std::vector<double> cond_variance;
  std::vector<double> pit;
  OptimResult optim;
  std::vector<std::string> warnings;
};

/// Maximum likelihood fit. Throws std::invalid_argument on degenerate input
/// (constant y, too short) and std::runtime_error when no admissible
/// optimum was found.
MarginalFit fit_marginal(std::span<const double> y, const ArmaEgarchSpec& spec,
                         const MarginalFitOptions& options = {});

/// Fits every order with m, n, p, q <= max_order (p >= 1 when q >= 1) and
/// returns the lowest-AIC fit.
MarginalFit select_marginal_order(std::span<const double> y, std::size_t max_order = 2,
                                  const MarginalFitOptions& options = {});

/// One-sample KS of the PIT series against Uniform(0, 1).
KsResult pit_uniformity_check(std::span<const double> pit);

}  // namespace tvc
