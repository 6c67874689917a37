#include "tvcopula/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace tvc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;  // minimisation values
};

struct RunResult {
  std::vector<double> x;
  double f = kInf;
  bool converged = false;
  std::size_t iterations = 0;
};

class NelderMead {
 public:
  NelderMead(const Objective& objective, const OptimOptions& options)
      : objective_(objective), options_(options) {}

  std::size_t evaluations() const { return evaluations_; }
  bool exhausted() const { return evaluations_ >= options_.max_evaluations; }

  double eval(const std::vector<double>& x) {
    ++evaluations_;
    const double value = objective_(x);
    return std::isfinite(value) ? -value : kInf;
  }

  RunResult run(const std::vector<double>& start, double f_start, const std::vector<double>& step) {
    const std::size_t n = start.size();
    Simplex s;
    s.x.assign(n + 1, start);
    s.f.assign(n + 1, f_start);
    for (std::size_t k = 0; k < n; ++k) {
      s.x[k + 1][k] += step[k];
      s.f[k + 1] = eval(s.x[k + 1]);
    }

    RunResult out;
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    while (true) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });
      Simplex sorted;
      for (std::size_t i : order) {
        sorted.x.push_back(std::move(s.x[i]));
        sorted.f.push_back(s.f[i]);
      }
      s = std::move(sorted);

      if (converged(s)) {
        out.converged = true;
        break;
      }
      if (exhausted()) break;
      ++out.iterations;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) centroid[k] += s.x[i][k];
      }
      for (double& c : centroid) c /= static_cast<double>(n);

      const auto& worst = s.x[n];
      auto along = [&](double coeff, std::vector<double>& dst) {
        for (std::size_t k = 0; k < n; ++k) dst[k] = centroid[k] + coeff * (worst[k] - centroid[k]);
      };

      along(-1.0, trial);
      const double fr = eval(trial);
      if (fr < s.f[0]) {
        along(-2.0, trial2);
        const double fe = eval(trial2);
        if (fe < fr) {
          s.x[n] = trial2;
          s.f[n] = fe;
        } else {
          s.x[n] = trial;
          s.f[n] = fr;
        }
        continue;
      }
      if (fr < s.f[n - 1]) {
        s.x[n] = trial;
        s.f[n] = fr;
        continue;
      }
      bool accepted = false;
      if (fr < s.f[n]) {
        along(-0.5, trial2);
        const double fc = eval(trial2);
        if (fc <= fr) {
          s.x[n] = trial2;
          s.f[n] = fc;
          accepted = true;
        }
      } else {
        along(0.5, trial2);
        const double fc = eval(trial2);
        if (fc < s.f[n]) {
          s.x[n] = trial2;
          s.f[n] = fc;
          accepted = true;
        }
      }
      if (!accepted) {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t k = 0; k < n; ++k) s.x[i][k] = s.x[0][k] + 0.5 * (s.x[i][k] - s.x[0][k]);
          s.f[i] = eval(s.x[i]);
        }
      }
    }
    out.x = s.x[0];
    out.f = s.f[0];
    return out;
  }

 private:
  bool converged(const Simplex& s) const {
    const std::size_t n = s.x[0].size();
    if (!std::isfinite(s.f.back())) return false;
    if (s.f.back() - s.f.front() > options_.ftol) return false;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        const double scale = std::max(1.0, std::abs(s.x[0][k]));
        if (std::abs(s.x[i][k] - s.x[0][k]) > options_.xtol * scale) return false;
      }
    }
    return true;
  }

  const Objective& objective_;
  const OptimOptions& options_;
  std::size_t evaluations_ = 0;
};

}  // namespace

OptimResult maximize(const Objective& objective, std::span<const double> start,
                     const OptimOptions& options) {
  const std::size_t n = start.size();
  if (n == 0) throw std::invalid_argument("maximize: empty start vector");
  std::vector<double> step = options.initial_step;
  if (step.empty()) {
    step.resize(n);
    for (std::size_t k = 0; k < n; ++k) step[k] = 0.1 * std::max(std::abs(start[k]), 1.0);
  }
  if (step.size() != n) throw std::invalid_argument("maximize: initial_step has wrong size");

  NelderMead nm(objective, options);
  std::vector<double> x(start.begin(), start.end());
  const double f0 = nm.eval(x);
  if (!std::isfinite(f0)) throw std::invalid_argument("maximize: objective not finite at start");

  RunResult best = nm.run(x, f0, step);
  OptimResult result;
  result.iterations = best.iterations;
  bool last_converged = best.converged;

  Xoshiro256 rng(options.seed);
  for (std::size_t r = 0; r < options.restarts && !nm.exhausted(); ++r) {
    std::vector<double> jittered(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double scale = 0.5 + rng.uniform_open();
      jittered[k] = (rng.uniform_open() < 0.5 ? -1.0 : 1.0) * step[k] * scale;
    }
    RunResult next = nm.run(best.x, best.f, jittered);
    ++result.restarts_used;
    result.iterations += next.iterations;
    last_converged = next.converged;
    const bool improved = best.f - next.f > options.ftol;
    if (next.f < best.f) best = std::move(next);
    if (!improved) break;
  }

  result.argmax = best.x;
  result.value = -best.f;
  result.evaluations = nm.evaluations();
  result.converged = last_converged && std::isfinite(result.value);
  return result;
}

StdErrorResult std_errors(const Objective& objective, std::span<const double> argmax,
                          double step) {
  const std::size_t n = argmax.size();
  StdErrorResult out;
  out.hessian = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = std::max(step, step * std::abs(argmax[i]));

  std::vector<double> x(argmax.begin(), argmax.end());
  bool penalty_hit = false;
  auto f = [&](double di, std::size_t i, double dj, std::size_t j) {
    x[i] += di;
    x[j] += dj;
    const double value = objective(x);
    x[i] -= di;
    x[j] -= dj;
    if (!std::isfinite(value)) penalty_hit = true;
    return value;
  };
  const double f0 = objective(x);
  if (!std::isfinite(f0)) {
    out.note = "objective not finite at the estimate";
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out.hessian(ii, ii) = (f(h[i], i, 0.0, i) - 2.0 * f0 + f(-h[i], i, 0.0, i)) / (h[i] * h[i]);
    for (std::size_t j = 0; j < i; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double value = (f(h[i], i, h[j], j) - f(h[i], i, -h[j], j) - f(-h[i], i, h[j], j) +
                            f(-h[i], i, -h[j], j)) /
                           (4.0 * h[i] * h[j]);
      out.hessian(ii, jj) = value;
      out.hessian(jj, ii) = value;
    }
  }
  if (penalty_hit) {
    out.note = "finite-difference stencil hits the inadmissible region";
    return out;
  }

  const Eigen::MatrixXd info = -out.hessian;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
  const double max_ev = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 1e-12 * max_ev) ||
      !(max_ev > 0.0)) {
    out.note = "Hessian not invertible or not negative definite";
    return out;
  }
  const Eigen::MatrixXd cov = eig.eigenvectors() *
                              eig.eigenvalues().cwiseInverse().asDiagonal() *
                              eig.eigenvectors().transpose();
  out.std_errors.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.std_errors[i] = std::sqrt(cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
  }
  out.ok = true;
  return out;
}

double aic(double loglik, std::size_t k) { return 2.0 * static_cast<double>(k) - 2.0 * loglik; }

double bic(double loglik, std::size_t k, std::size_t n) {
  if (n == 0) throw std::invalid_argument("bic: n must be positive");
  return static_cast<double>(k) * std::log(static_cast<double>(n)) - 2.0 * loglik;
}

std::string_view to_string(Mode m) { return m == Mode::Static ? "static" : "dynamic"; }

Mode parse_mode(std::string_view name) {
  if (name == "static") return Mode::Static;
  if (name == "dynamic" || name == "time-varying") return Mode::Dynamic;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

void finalize_criteria(FitReport& report) {
  report.k = report.estimates.size();
  report.aic = aic(report.loglik, report.k);
  report.bic = bic(report.loglik, report.k, report.n);
}

const FitReport& select_best(std::span<const FitReport> reports) {
  if (reports.empty()) throw std::invalid_argument("select_best: no reports");
  for (const auto& r : reports) {
    if (r.n != reports.front().n) throw std::invalid_argument("select_best: reports differ in n");
  }
  const auto key = [](const FitReport& r) {
    return std::tuple(r.aic, r.k, static_cast<int>(r.family), static_cast<int>(r.mode));
  };
  return *std::min_element(reports.begin(), reports.end(),
                           [&](const FitReport& a, const FitReport& b) { return key(a) < key(b); });
}

}  // namespace tvc
