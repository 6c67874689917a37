// tvcopula: fit / simulate / diagnose front end.

#include "tvcopula/data.hpp"
#include "tvcopula/diagnostics.hpp"
#include "tvcopula/pipeline.hpp"
#include "tvcopula/simulate.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitHard = 1;
constexpr int kExitPartial = 2;

std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_summary(const tvc::RunArtifacts& art) {
  for (const auto& s : art.series) {
    if (s.marginal) {
      std::printf("%-12s %-26s LL %12.3f  AIC %12.3f  PIT KS p %.3f\n", s.name.c_str(),
                  s.marginal->spec.label().c_str(), s.marginal->loglik, s.marginal->aic,
                  s.pit_uniformity ? s.pit_uniformity->p_value : 0.0);
    } else {
      std::printf("%-12s marginal failed: %s\n", s.name.c_str(), s.error.c_str());
    }
  }
  for (const auto& p : art.pairs) {
    std::printf("\n%s / %s  (n = %zu)\n", p.first.c_str(), p.second.c_str(), p.dates.size());
    std::printf("  %-10s %-8s %3s %12s %12s\n", "family", "mode", "k", "loglik", "aic");
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
      const auto& c = p.cells[i];
      const auto family = std::string(tvc::to_string(c.entry.family));
      const auto mode = std::string(tvc::to_string(c.entry.mode));
      if (c.report) {
        std::printf("%s %-10s %-8s %3zu %12.4f %12.4f\n", p.best && *p.best == i ? "*" : " ",
                    family.c_str(), mode.c_str(), c.report->k, c.report->loglik, c.report->aic);
      } else {
        std::printf("  %-10s %-8s failed: %s\n", family.c_str(), mode.c_str(), c.error.c_str());
      }
    }
  }
}

int run_fit(const std::string& config_file, const std::string& output, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> threads, bool quiet) {
  tvc::RunConfig config = tvc::load_run_config(config_file);
  if (const char* env = std::getenv(tvc::kOutputDirEnv); env && *env) config.output_dir = env;
  if (!output.empty()) config.output_dir = output;
  if (seed) config.seed.value = *seed;
  if (threads) config.threads = *threads;

  tvc::RunArtifacts art = tvc::run_pipeline(config);
  tvc::write_artifacts(config, art);
  if (!quiet) {
    print_summary(art);
    std::printf("\nwrote %zu files to %s\n", art.files.size(), config.output_dir.string().c_str());
  }
  return art.failed_cells > 0 ? kExitPartial : kExitOk;
}

tvc::StaticCopulaParams params_from_json(tvc::Family f, const json& j) {
  const auto values = j.get<std::vector<double>>();
  const auto params = tvc::from_vector(f, values);
  tvc::validate(params);
  return params;
}

int run_simulate(const std::string& config_file, const std::string& output) {
  const json j = json::parse(slurp(config_file));
  const std::size_t n = j.at("n").get<std::size_t>();
  const tvc::Seed seed{j.value("seed", std::uint64_t{1})};
  const std::size_t burn_in = j.value("burn_in", std::size_t{500});
  const auto& cj = j.at("copula");
  const tvc::Family family = tvc::parse_family(cj.at("family").get<std::string>());
  const bool with_marginals = j.contains("marginals");
  const std::size_t draws = with_marginals ? burn_in + n : n;

  tvc::PairSample pairs;
  std::optional<tvc::ParamPath> path;
  if (cj.contains("evolution")) {
    const auto coeffs = cj.at("evolution").get<std::vector<double>>();
    auto sample = tvc::sample_dynamic(tvc::EvolutionParams::from_vector(family, coeffs), draws, seed);
    pairs = std::move(sample.data);
    path = std::move(sample.path);
  } else {
    pairs = tvc::sample_copula(params_from_json(family, cj.at("params")), draws, seed);
  }

  std::vector<std::vector<double>> series;
  if (with_marginals) {
    const auto& mj = j.at("marginals");
    if (mj.size() != 2) throw std::invalid_argument("simulate: exactly two marginals are required");
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& o = mj.at(k).at("orders");
      const tvc::ArmaEgarchSpec spec{o.value("m", std::size_t{0}), o.value("n", std::size_t{0}),
                                     o.value("p", std::size_t{1}), o.value("q", std::size_t{1})};
      const auto values = mj.at(k).at("params").get<std::vector<double>>();
      const auto params = tvc::MarginalParams::from_vector(spec, values);
      series.push_back(tvc::egarch_from_uniforms(spec, params, k == 0 ? pairs.u : pairs.v, burn_in));
    }
  }

  const std::size_t offset = draws - n;
  const tvc::Date start = tvc::parse_date(j.value("start_date", std::string("2000-01-01")));
  std::vector<tvc::Date> dates;
  for (std::size_t t = 0; t < n; ++t) {
    dates.emplace_back(std::chrono::sys_days(start) + std::chrono::days(static_cast<long>(t)));
  }

  const std::filesystem::path out_file = output.empty() ? j.value("output", std::string("simulated.csv")) : output;
  std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + out_file.string());
  out << "date,u,v" << (with_marginals ? ",x,y" : "") << "\n";
  char buf[160];
  for (std::size_t t = 0; t < n; ++t) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g", pairs.u[offset + t], pairs.v[offset + t]);
    out << tvc::format_date(dates[t]) << buf;
    if (with_marginals) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", series[0][t], series[1][t]);
      out << buf;
    }
    out << "\n";
  }
  if (path && j.contains("path_output")) {
    tvc::ParamPath tail;
    tail.family = path->family;
    tail.first.assign(path->first.begin() + static_cast<std::ptrdiff_t>(offset), path->first.end());
    if (!path->second.empty()) {
      tail.second.assign(path->second.begin() + static_cast<std::ptrdiff_t>(offset), path->second.end());
    }
    tail.tail.assign(path->tail.begin() + static_cast<std::ptrdiff_t>(offset), path->tail.end());
    tvc::export_path_csv(tail, dates, j.at("path_output").get<std::string>());
  }
  return kExitOk;
}

json test_json(const tvc::TestResult& t) {
  json j{{"statistic", t.statistic}, {"p_value", t.p_value}};
  if (t.lags > 0) j["lags"] = t.lags;
  return j;
}

int run_diagnose(const std::string& csv, const std::string& column, const std::string& transform,
                 std::size_t lags) {
  const auto raw = tvc::load_csv(csv, column);
  const auto series = tvc::apply_transform(raw, tvc::parse_transform(transform));
  const auto d = tvc::diagnose(series.returns, lags);
  const json j{{"n", d.n},
               {"mean", d.mean},
               {"variance", d.variance},
               {"skewness", d.skewness},
               {"excess_kurtosis", d.excess_kurtosis},
               {"jarque_bera", test_json(d.jarque_bera)},
               {"ljung_box", test_json(d.ljung_box)},
               {"ljung_box_squared", test_json(d.ljung_box_squared)},
               {"arch_lm", test_json(d.arch_lm)}};
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static and time-varying copula estimation for pairs of series"};
  app.require_subcommand(1);

  auto* fit = app.add_subcommand("fit", "Run the full estimation pipeline from a JSON config");
  std::string fit_config, fit_output;
  std::optional<std::uint64_t> fit_seed;
  std::optional<std::size_t> fit_threads;
  bool quiet = false;
  fit->add_option("config", fit_config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  fit->add_option("-o,--output", fit_output, "Output directory (overrides config and environment)");
  fit->add_option("--seed", fit_seed, "Seed override");
  fit->add_option("--threads", fit_threads, "Worker threads for the copula cells");
  fit->add_flag("-q,--quiet", quiet, "Do not print the summary");

  auto* sim = app.add_subcommand("simulate", "Draw copula (and optional EGARCH) samples from a JSON config");
  std::string sim_config, sim_output;
  sim->add_option("config", sim_config, "Simulation configuration (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("-o,--output", sim_output, "Output CSV (overrides config)");

  auto* diag = app.add_subcommand("diagnose", "Descriptive statistics and residual tests for one column");
  std::string diag_csv, diag_column, diag_transform = "log-return";
  std::size_t diag_lags = tvc::kDefaultDiagnosticLags;
  diag->add_option("csv", diag_csv, "Input CSV")->required()->check(CLI::ExistingFile);
  diag->add_option("--column", diag_column, "Value column")->required();
  diag->add_option("--transform", diag_transform, "level, log-return or log-level");
  diag->add_option("--lags", diag_lags, "Lags for Ljung-Box and ARCH-LM");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) return run_fit(fit_config, fit_output, fit_seed, fit_threads, quiet);
    if (*sim) return run_simulate(sim_config, sim_output);
    if (*diag) return run_diagnose(diag_csv, diag_column, diag_transform, diag_lags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitHard;
  }
  return kExitHard;
}
