// Acceptance suite: one PASS/FAIL line per criterion.

#include "tvcopula/diagnostics.hpp"
#include "tvcopula/fit.hpp"
#include "tvcopula/marginal.hpp"
#include "tvcopula/pipeline.hpp"
#include "tvcopula/simulate.hpp"
#include "tvcopula/stats.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <CLI11.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace tvc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Tail coefficients against conditional exceedance counts.
Outcome tail_counts() {
  bool pass = true;
  std::string detail;
  const double q = 0.999;
  std::uint64_t k = 0;
  for (double theta : {1.5, 2.0, 3.0}) {
    const auto s = sample_copula(GumbelParams{theta}, 1000000, derive_seed(Seed{1001}, k++));
    const double mc = oracle::upper_tail_fraction(s.u, s.v, q);
    const double exact = tail_dependence(GumbelParams{theta}).lambda_u;
    pass = pass && std::abs(mc - exact) <= 0.03;
    detail += fmt("gumbel(%.1f) %.4f vs %.4f; ", theta, mc, exact);
  }
  for (double delta : {0.5, 1.0, 2.0}) {
    const auto s = sample_copula(ClaytonParams{delta}, 1000000, derive_seed(Seed{1001}, k++));
    const double mc = oracle::lower_tail_fraction(s.u, s.v, 1.0 - q);
    const double exact = tail_dependence(ClaytonParams{delta}).lambda_l;
    pass = pass && std::abs(mc - exact) <= 0.03;
    detail += fmt("clayton(%.1f) %.4f vs %.4f; ", delta, mc, exact);
  }
  return {pass, detail};
}

// 2. Density integrates to one.
Outcome density_mass() {
  const std::vector<StaticCopulaParams> settings{
      NormalParams{-0.7},  NormalParams{0.3},         NormalParams{0.9},
      StudentTParams{0.5, 4.0}, StudentTParams{-0.3, 10.0}, StudentTParams{0.8, 2.5},
      GumbelParams{1.5},   GumbelParams{2.0},         GumbelParams{3.0},
      ClaytonParams{0.5},  ClaytonParams{1.0},        ClaytonParams{2.0},
      SjcParams{0.3, 0.6}, SjcParams{0.7, 0.1},       SjcParams{0.05, 0.05}};
  double worst = 0.0;
  for (const auto& p : settings) worst = std::max(worst, std::abs(oracle::density_mass(p) - 1.0));
  return {worst <= 1e-3, fmt("max |mass - 1| = %.2e over %zu settings", worst, settings.size())};
}

// 3. Static parameter recovery within three standard errors.
Outcome static_recovery() {
  const std::vector<StaticCopulaParams> truths{NormalParams{0.5}, StudentTParams{0.5, 6.0}, GumbelParams{2.0},
                                               ClaytonParams{2.0}, SjcParams{0.5, 0.3}};
  const int reps = 50;
  bool pass = true;
  std::string detail;
  std::uint64_t k = 0;
  for (const auto& truth : truths) {
    const Family f = family_of(truth);
    const auto values = to_vector(truth);
    std::vector<int> hits(values.size(), 0);
    for (int r = 0; r < reps; ++r) {
      const auto s = sample_copula(truth, 5000, derive_seed(Seed{3003}, k++));
      const auto fit = fit_static(f, s.u, s.v);
      for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& e = fit.report.estimates[i];
        hits[i] += e.std_error && std::abs(e.value - values[i]) <= 3.0 * *e.std_error;
      }
    }
    detail += std::string(to_string(f));
    for (std::size_t i = 0; i < values.size(); ++i) {
      pass = pass && hits[i] >= 45;
      detail += fmt(" %d/%d", hits[i], reps);
    }
    detail += "; ";
  }
  return {pass, detail};
}

// 4. AIC picks the generating family from the static menu.
Outcome aic_selection() {
  const std::vector<StaticCopulaParams> generators{GumbelParams{2.0}, ClaytonParams{2.0}, NormalParams{0.5}};
  const std::vector<Family> menu{Family::Normal, Family::StudentT, Family::Gumbel, Family::Clayton, Family::SJC};
  bool pass = true;
  std::string detail;
  std::uint64_t k = 0;
  for (const auto& g : generators) {
    int correct = 0;
    for (int r = 0; r < 50; ++r) {
      const auto s = sample_copula(g, 2000, derive_seed(Seed{4004}, k++));
      std::vector<FitReport> reports;
      for (Family f : menu) reports.push_back(fit_static(f, s.u, s.v).report);
      correct += select_best(reports).family == family_of(g);
    }
    pass = pass && correct >= 45;
    detail += fmt("%s %d/50; ", std::string(to_string(family_of(g))).c_str(), correct);
  }
  return {pass, detail};
}

// 5. Dynamic recursion without dynamics equals the static likelihood.
Outcome collapse_identity() {
  const auto u = testutil::uniforms(500, 5005), v = testutil::uniforms(500, 5006);
  const std::vector<EvolutionParams> cases{{Family::Normal, {{0.7, 0, 0}}},
                                           {Family::StudentT, {{0.8, 0, 0}, {-1.5, 0, 0}}},
                                           {Family::Gumbel, {{0.7, 0, 0}}},
                                           {Family::Clayton, {{0.7, 0, 0}}},
                                           {Family::SJC, {{-1.0, 0, 0}, {0.4, 0, 0}}}};
  double worst = 0.0;
  for (const auto& evo : cases) {
    const auto roles = link_roles(evo.family);
    std::vector<double> values;
    for (std::size_t i = 0; i < roles.size(); ++i) values.push_back(link_transform(roles[i], evo.triples[i].omega));
    const double stat = static_loglik(from_vector(evo.family, values), u, v);
    worst = std::max(worst, std::abs(dynamic_loglik(evo, u, v) - stat));
  }
  return {worst <= 1e-10, fmt("max |dynamic - static| = %.2e", worst)};
}

// 6. The filtered Gumbel tail path follows a sine-varying truth.
Outcome dynamic_tracking() {
  const std::size_t n = 4000;
  int good = 0;
  std::string rs;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Xoshiro256 rng(derive_seed(Seed{6006}, seed));
    std::vector<double> u(n), v(n), truth(n);
    for (std::size_t t = 0; t < n; ++t) {
      const double theta = 1.85 + 0.65 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 1000.0);
      truth[t] = 2.0 - std::pow(2.0, 1.0 / theta);
      std::tie(u[t], v[t]) = draw_pair(GumbelParams{theta}, rng);
    }
    const auto fit = fit_dynamic(Family::Gumbel, u, v);
    std::vector<double> filtered(n);
    for (std::size_t t = 0; t < n; ++t) filtered[t] = fit.path.tail[t].lambda_u;
    const double r = oracle::pearson(filtered, truth);
    good += r >= 0.5;
    rs += fmt(" %.2f", r);
  }
  return {good >= 16, fmt("%d/20 with r >= 0.5; r:%s", good, rs.c_str())};
}

// 7. EGARCH-GED recovery and PIT uniformity of correctly specified fits.
Outcome marginal_validity() {
  const ArmaEgarchSpec spec{0, 0, 1, 1};
  auto truth = MarginalParams::zeros(spec);
  truth.w = -0.1;
  truth.kappa = {0.15};
  truth.gamma_asym = {-0.05};
  truth.beta_pers = {0.95};
  truth.nu = 1.5;
  const auto values = truth.to_vector();
  const auto names = truth.names();
  std::vector<int> hits(values.size(), 0);
  int pit_ok = 0;
  const int reps = 50;
  for (int r = 0; r < reps; ++r) {
    const auto y = simulate_egarch(spec, truth, 20000, derive_seed(Seed{7007}, static_cast<std::uint64_t>(r)));
    const auto fit = fit_marginal(y, spec);
    for (std::size_t i = 0; i < values.size(); ++i) {
      hits[i] += !fit.std_errors.empty() && std::abs(fit.params.to_vector()[i] - values[i]) <= 3.0 * fit.std_errors[i];
    }
    pit_ok += pit_uniformity_check(fit.pit).p_value > 0.05;
  }
  bool pass = pit_ok >= 45;
  std::string detail = "within 3 SE:";
  for (std::size_t i = 0; i < values.size(); ++i) {
    pass = pass && hits[i] >= 45;
    detail += fmt(" %s %d/%d", names[i].c_str(), hits[i], reps);
  }
  detail += fmt("; PIT KS p > 0.05 in %d/%d", pit_ok, reps);
  return {pass, detail};
}

std::vector<double> garch11(std::size_t n, double omega, double alpha, double beta, Seed seed) {
  Xoshiro256 rng(seed);
  std::normal_distribution<double> z;
  double h = omega / (1.0 - alpha - beta), e = 0.0;
  std::vector<double> out;
  for (std::size_t t = 0; t < n + 500; ++t) {
    h = omega + alpha * e * e + beta * h;
    e = std::sqrt(h) * z(rng);
    if (t >= 500) out.push_back(e);
  }
  return out;
}

// 8. Size of Ljung-Box and ARCH-LM on white noise, power of ARCH-LM on GARCH.
Outcome diagnostic_calibration() {
  const std::size_t lags = kDefaultDiagnosticLags;
  int lb = 0, arch = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Xoshiro256 rng(derive_seed(Seed{8008}, s));
    std::normal_distribution<double> z;
    std::vector<double> x(10000);
    for (auto& e : x) e = z(rng);
    lb += ljung_box(x, lags).p_value < 0.05;
    arch += arch_lm(x, lags).p_value < 0.05;
  }
  int power = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    power += arch_lm(garch11(5000, 0.05, 0.1, 0.85, derive_seed(Seed{8009}, s)), lags).p_value < 0.05;
  }
  const double lb_size = lb / 200.0, arch_size = arch / 200.0, arch_power = power / 100.0;
  const bool pass = lb_size >= 0.03 && lb_size <= 0.07 && arch_size >= 0.03 && arch_size <= 0.07 && arch_power >= 0.95;
  return {pass, fmt("LB size %.3f, ARCH-LM size %.3f, ARCH-LM power %.2f (lags %zu)", lb_size, arch_size,
                    arch_power, lags)};
}

// 9. Student-t at nu = 200 against the Normal copula at 100 random points.
Outcome large_nu_limit() {
  Xoshiro256 rng(Seed{9009});
  std::uniform_real_distribution<double> rho_d(-0.95, 0.95);
  double worst = 0.0;
  double worst_rho = 0.0, worst_u = 0.0, worst_v = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double rho = rho_d(rng), u = rng.uniform_open(), v = rng.uniform_open();
    const double gap = std::abs(copula_logpdf(StudentTParams{rho, 200.0}, u, v) - copula_logpdf(NormalParams{rho}, u, v));
    if (gap > worst) {
      worst = gap;
      worst_rho = rho;
      worst_u = u;
      worst_v = v;
    }
  }
  return {worst <= 5e-3, fmt("sup |t - normal| = %.3e at rho %.3f, (u, v) = (%.4f, %.4f)", worst, worst_rho,
                             worst_u, worst_v)};
}

int run_command(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 10. Two runs of `fit` produce byte-identical artifacts.
Outcome determinism(const std::string& cli) {
  const auto dir = testutil::scratch_dir("acceptance_determinism");
  const std::size_t n = 750, burn = 200;
  const auto pairs = sample_copula(ClaytonParams{1.2}, n + burn, Seed{10010});
  const ArmaEgarchSpec spec{1, 0, 1, 1};
  auto p = MarginalParams::zeros(spec);
  p.ar = {0.05};
  p.w = -0.2;
  p.kappa = {0.1};
  p.gamma_asym = {-0.05};
  p.beta_pers = {0.95};
  p.nu = 1.4;
  const auto x = egarch_from_uniforms(spec, p, pairs.u, burn);
  const auto y = egarch_from_uniforms(spec, p, pairs.v, burn);
  std::ostringstream csv;
  csv << "date,X,Y\n";
  auto day = std::chrono::sys_days(Date{std::chrono::year{2012}, std::chrono::month{1}, std::chrono::day{2}});
  double a = 10.0, b = 20.0;
  for (std::size_t t = 0; t <= n; ++t) {
    if (t > 0) {
      a *= std::exp(0.01 * x[t - 1]);
      b *= std::exp(0.01 * y[t - 1]);
    }
    csv << format_date(Date{day + std::chrono::days(static_cast<long>(t))}) << fmt(",%.12g,%.12g\n", a, b);
  }
  testutil::write_file(dir / "prices.csv", csv.str());
  testutil::write_file(dir / "run.json", R"({
  "series": [{"name": "X", "path": "prices.csv", "column": "X"},
             {"name": "Y", "path": "prices.csv", "column": "Y"}],
  "marginal": {"m": 1, "n": 0, "p": 1, "q": 1},
  "menu": "all",
  "seed": 99
})");
  const auto out1 = dir / "run1", out2 = dir / "run2";
  const int c1 = run_command(cli + " fit " + (dir / "run.json").string() + " -q -o " + out1.string());
  const int c2 = run_command(cli + " fit " + (dir / "run.json").string() + " -q -o " + out2.string());
  std::set<std::string> names1, names2;
  for (const auto& e : std::filesystem::directory_iterator(out1)) names1.insert(e.path().filename().string());
  for (const auto& e : std::filesystem::directory_iterator(out2)) names2.insert(e.path().filename().string());
  std::size_t same = 0;
  for (const auto& name : names1) {
    same += names2.contains(name) && testutil::read_file(out1 / name) == testutil::read_file(out2 / name);
  }
  const bool pass = c1 == 0 && c2 == 0 && !names1.empty() && names1 == names2 && same == names1.size();
  return {pass, fmt("exit codes %d/%d, %zu of %zu files identical", c1, c2, same, names1.size())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::vector<int> only;
  std::string cli = TVCOPULA_CLI_PATH;
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 10));
  app.add_option("--cli", cli, "Path to the tvcopula executable");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form tail dependence", tail_counts},
      {"density normalization", density_mass},
      {"static parameter recovery", static_recovery},
      {"AIC family selection", aic_selection},
      {"dynamic collapse identity", collapse_identity},
      {"dynamic tracking", dynamic_tracking},
      {"marginal-stage validity", marginal_validity},
      {"diagnostic calibration", diagnostic_calibration},
      {"large-nu limit", large_nu_limit},
      {"end-to-end determinism", [&] { return determinism(cli); }}};

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s  %s [%.1f s]: %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                secs, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
