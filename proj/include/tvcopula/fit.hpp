#pragma once

#include "tvcopula/copula.hpp"
#include "tvcopula/dynamic.hpp"
#include "tvcopula/estimation.hpp"

#include <span>

namespace tvc {

struct CopulaFitOptions {
  OptimOptions optim{};
  double se_step = 1e-5;
};

struct StaticFit {
  StaticCopulaParams params;
  FitReport report;
  OptimResult optim;
};

/// Maximum likelihood for one static family. The optimiser works on the
/// link-transformed parameters; standard errors are taken on the natural
/// scale. Student-t profiles the likelihood over nu.
StaticFit fit_static(Family f, std::span<const double> u, std::span<const double> v,
                     const CopulaFitOptions& options = {});

struct DynamicFit {
  EvolutionParams evo;
  ParamPath path;
  FitReport report;
  OptimResult optim;
};

/// Fits the evolution coefficients starting from the static estimate.
DynamicFit fit_dynamic(Family f, std::span<const double> u, std::span<const double> v,
                       const StaticFit& start, const CopulaFitOptions& options = {});

/// Fits the static family first, then the dynamic one.
DynamicFit fit_dynamic(Family f, std::span<const double> u, std::span<const double> v,
                       const CopulaFitOptions& options = {});

}  // namespace tvc
