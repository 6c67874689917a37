#pragma once

#include "tvcopula/copula.hpp"
#include "tvcopula/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tvc {

/// Objective to be maximised. Non-finite return values mark an inadmissible
/// point and are treated as -inf.
using Objective = std::function<double(std::span<const double>)>;

struct OptimOptions {
  std::size_t max_evaluations = 20000;  // across all restarts
  std::size_t restarts = 5;
  double xtol = 1e-8;   // simplex diameter (max-norm, relative to max(1, |x|))
  double ftol = 1e-10;  // spread of objective values over the simplex
  /// Initial simplex edge per coordinate; empty means 0.1 * max(|x_i|, 1).
  std::vector<double> initial_step;
  Seed seed{0x5eed};
};

struct OptimResult {
  std::vector<double> argmax;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::size_t restarts_used = 0;
};

/// Nelder-Mead maximisation with jittered restarts around the incumbent.
/// A restart that fails to improve by more than `ftol` ends the search.
/// Throws std::invalid_argument if the objective is not finite at `start`.
OptimResult maximize(const Objective& objective, std::span<const double> start,
                     const OptimOptions& options = {});

struct StdErrorResult {
  std::vector<double> std_errors;  // empty when unavailable
  Eigen::MatrixXd hessian;
  bool ok = false;
  std::string note;  // reason when !ok
};

/// Square roots of diag((-H)^{-1}) with H the central-difference Hessian,
/// h_i = max(step, step * |x_i|).
StdErrorResult std_errors(const Objective& objective, std::span<const double> argmax,
                          double step = 1e-5);

double aic(double loglik, std::size_t k);
double bic(double loglik, std::size_t k, std::size_t n);

enum class Mode { Static, Dynamic };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view name);

struct Estimate {
  std::string name;
  double value = 0.0;
  std::optional<double> std_error;
};

/// One (family, mode) cell of the comparison matrix.
struct FitReport {
  Family family = Family::Normal;
  Mode mode = Mode::Static;
  std::vector<Estimate> estimates;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Fills k, aic and bic from the estimates, loglik and n.
void finalize_criteria(FitReport& report);

/// Minimum AIC; ties broken by smaller k, then family enumeration order,
/// then static before dynamic. Throws on an empty list or mixed n.
const FitReport& select_best(std::span<const FitReport> reports);

}  // namespace tvc
