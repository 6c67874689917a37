#include "tvcopula/pipeline.hpp"

#include "tvcopula/fit.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tvc {

using nlohmann::json;

namespace {

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

MenuEntry parse_menu_entry(const json& j) {
  if (j.is_string()) {
    const auto text = j.get<std::string>();
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("menu entry '" + text + "' must look like family:mode");
    }
    return {parse_family(text.substr(0, colon)), parse_mode(text.substr(colon + 1))};
  }
  return {parse_family(j.at("family").get<std::string>()),
          parse_mode(j.value("mode", std::string("static")))};
}

ArmaEgarchSpec parse_spec(const json& j) {
  ArmaEgarchSpec spec;
  spec.m = j.value("m", spec.m);
  spec.n = j.value("n", spec.n);
  spec.p = j.value("p", spec.p);
  spec.q = j.value("q", spec.q);
  spec.validate();
  return spec;
}

std::string cell_label(const MenuEntry& e) {
  return std::string(to_string(e.family)) + "_" + std::string(to_string(e.mode));
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return s;
}

json test_json(const TestResult& t) {
  json j{{"statistic", t.statistic}, {"p_value", t.p_value}};
  if (t.lags > 0) j["lags"] = t.lags;
  return j;
}

json diagnostics_json(const DiagnosticReport& d) {
  return {{"n", d.n},
          {"mean", d.mean},
          {"variance", d.variance},
          {"skewness", d.skewness},
          {"excess_kurtosis", d.excess_kurtosis},
          {"jarque_bera", test_json(d.jarque_bera)},
          {"ljung_box", test_json(d.ljung_box)},
          {"ljung_box_squared", test_json(d.ljung_box_squared)},
          {"arch_lm", test_json(d.arch_lm)}};
}

json marginal_json(const MarginalFit& fit) {
  const auto names = fit.params.names();
  const auto values = fit.params.to_vector();
  json params = json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    json e{{"name", names[i]}, {"value", values[i]}};
    e["std_error"] = fit.std_errors.empty() ? json(nullptr) : json(fit.std_errors[i]);
    params.push_back(std::move(e));
  }
  return {{"model", fit.spec.label()},
          {"orders", {{"m", fit.spec.m}, {"n", fit.spec.n}, {"p", fit.spec.p}, {"q", fit.spec.q}}},
          {"parameters", params},
          {"loglik", fit.loglik},
          {"aic", fit.aic},
          {"bic", fit.bic},
          {"converged", fit.optim.converged},
          {"warnings", fit.warnings}};
}

json report_to_json(const FitReport& r) {
  json estimates = json::array();
  for (const auto& e : r.estimates) {
    estimates.push_back({{"name", e.name},
                         {"value", e.value},
                         {"std_error", e.std_error ? json(*e.std_error) : json(nullptr)}});
  }
  return {{"estimates", estimates}, {"loglik", r.loglik}, {"aic", r.aic}, {"bic", r.bic},
          {"k", r.k},             {"n", r.n},           {"converged", r.converged},
          {"warnings", r.warnings}};
}

std::vector<std::size_t> run_cells(const RunConfig& config, std::span<const double> u,
                                   std::span<const double> v, std::vector<CellResult>& cells,
                                   Seed pair_seed) {
  // One task per family: the dynamic cell starts from the static estimate.
  std::vector<Family> families;
  for (const auto& e : config.menu) {
    if (std::find(families.begin(), families.end(), e.family) == families.end()) {
      families.push_back(e.family);
    }
  }
  cells.clear();
  for (const auto& e : config.menu) cells.push_back({e, std::nullopt, std::nullopt, {}});

  auto task = [&](Family f) {
    CopulaFitOptions options;
    options.optim.max_evaluations = config.max_evaluations;
    options.optim.restarts = config.restarts;
    options.optim.seed = derive_seed(pair_seed, static_cast<std::uint64_t>(f));
    std::optional<StaticFit> stat;
    std::string static_error;
    try {
      stat = fit_static(f, u, v, options);
    } catch (const std::exception& e) {
      static_error = e.what();
    }
    for (auto& cell : cells) {
      if (cell.entry.family != f) continue;
      if (!stat) {
        cell.error = "static fit failed: " + static_error;
        continue;
      }
      if (cell.entry.mode == Mode::Static) {
        cell.report = stat->report;
        cell.path = constant_path(stat->params, u.size(), stat->report.loglik);
        continue;
      }
      try {
        DynamicFit dyn = fit_dynamic(f, u, v, *stat, options);
        cell.report = std::move(dyn.report);
        cell.path = std::move(dyn.path);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };

  std::size_t workers = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  workers = std::clamp<std::size_t>(workers, 1, families.size());
  if (workers == 1) {
    for (Family f : families) task(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < families.size(); i = next++) task(families[i]);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].report && std::isfinite(cells[i].report->loglik)) {
      ok.push_back(i);
    } else if (cells[i].report) {
      cells[i].error = "non-finite log-likelihood";
      cells[i].report.reset();
      cells[i].path.reset();
    }
  }
  return ok;
}

}  // namespace

std::vector<MenuEntry> full_menu() {
  std::vector<MenuEntry> out;
  for (Mode m : {Mode::Static, Mode::Dynamic}) {
    for (Family f : kAllFamilies) out.push_back({f, m});
  }
  return out;
}

void RunConfig::validate() const {
  if (series.size() < 2) throw std::invalid_argument("config: at least two series are required");
  if (menu.empty()) throw std::invalid_argument("config: the copula menu is empty");
  for (std::size_t i = 0; i < menu.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (menu[i] == menu[j]) throw std::invalid_argument("config: duplicate menu entry " + cell_label(menu[i]));
    }
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].name.empty()) throw std::invalid_argument("config: series without a name");
    for (std::size_t j = 0; j < i; ++j) {
      if (series[i].name == series[j].name) {
        throw std::invalid_argument("config: duplicate series name " + series[i].name);
      }
    }
  }
  for (const auto& [a, b] : pairs) {
    if (a >= series.size() || b >= series.size() || a == b) {
      throw std::invalid_argument("config: invalid pair");
    }
  }
  if (max_evaluations == 0) throw std::invalid_argument("config: max_evaluations must be positive");
  if (!marginal.auto_select) marginal.spec.validate();
}

std::vector<std::pair<std::size_t, std::size_t>> RunConfig::resolved_pairs() const {
  if (!pairs.empty()) return pairs;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 1; i < series.size(); ++i) out.emplace_back(0, i);
  return out;
}

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  RunConfig c;
  try {
    for (const auto& s : j.at("series")) {
      SeriesConfig sc;
      sc.path = s.at("path").get<std::string>();
      if (sc.path.is_relative() && !base_dir.empty()) sc.path = base_dir / sc.path;
      sc.column = s.at("column").get<std::string>();
      sc.name = s.value("name", sc.column);
      sc.transform = parse_transform(s.value("transform", std::string("log-return")));
      c.series.push_back(std::move(sc));
    }
    if (j.contains("pairs")) {
      auto index_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < c.series.size(); ++i) {
          if (c.series[i].name == name) return i;
        }
        throw std::invalid_argument("config: pair refers to unknown series " + name);
      };
      for (const auto& p : j.at("pairs")) {
        c.pairs.emplace_back(index_of(p.at(0).get<std::string>()), index_of(p.at(1).get<std::string>()));
      }
    }
    if (j.contains("marginal")) {
      const auto& m = j.at("marginal");
      if (m.is_string()) {
        if (m.get<std::string>() != "auto") throw std::invalid_argument("config: marginal must be 'auto' or an object");
        c.marginal.auto_select = true;
      } else if (m.value("auto", false)) {
        c.marginal.auto_select = true;
        c.marginal.max_order = m.value("max_order", c.marginal.max_order);
      } else {
        c.marginal.spec = parse_spec(m);
      }
    }
    if (j.contains("menu")) {
      const auto& m = j.at("menu");
      if (m.is_string()) {
        if (m.get<std::string>() != "all") throw std::invalid_argument("config: menu must be 'all' or a list");
      } else {
        c.menu.clear();
        for (const auto& e : m) c.menu.push_back(parse_menu_entry(e));
      }
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (c.output_dir.is_relative() && !base_dir.empty()) c.output_dir = base_dir / c.output_dir;
    c.seed.value = j.value("seed", c.seed.value);
    if (j.contains("pit")) c.pit = parse_pit_mode(j.at("pit").get<std::string>());
    c.diagnostic_lags = j.value("diagnostic_lags", c.diagnostic_lags);
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      c.max_evaluations = o.value("max_evaluations", c.max_evaluations);
      c.restarts = o.value("restarts", c.restarts);
    }
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  return parse_run_config(read_text(file), file.parent_path());
}

ParamPath constant_path(const StaticCopulaParams& params, std::size_t n, double loglik) {
  ParamPath path;
  path.family = family_of(params);
  const auto values = to_vector(params);
  path.first.assign(n, values[0]);
  if (values.size() > 1) path.second.assign(n, values[1]);
  path.tail.assign(n, tail_dependence(params));
  path.loglik = loglik;
  return path;
}

RunArtifacts run_pipeline(const RunConfig& config) {
  config.validate();
  RunArtifacts art;

  std::vector<ReturnSeries> inputs;
  for (const auto& sc : config.series) {
    const RawSeries raw = load_csv(sc.path, sc.column);
    inputs.push_back(apply_transform(raw, sc.transform));
  }

  std::map<std::size_t, std::vector<double>> pits;
  for (std::size_t i = 0; i < config.series.size(); ++i) {
    SeriesResult sr;
    sr.name = config.series[i].name;
    sr.dates = inputs[i].dates;
    try {
      sr.input_diagnostics = diagnose(inputs[i].returns, config.diagnostic_lags);
      MarginalFitOptions mo;
      mo.pit = config.pit;
      mo.optim.max_evaluations = config.max_evaluations;
      mo.optim.restarts = config.restarts;
      mo.optim.seed = derive_seed(config.seed, 1000 + i);
      MarginalFit fit = config.marginal.auto_select
                            ? select_marginal_order(inputs[i].returns, config.marginal.max_order, mo)
                            : fit_marginal(inputs[i].returns, config.marginal.spec, mo);
      sr.residual_diagnostics = diagnose(fit.std_residuals, config.diagnostic_lags);
      sr.pit_uniformity = pit_uniformity_check(fit.pit);
      pits[i] = fit.pit;
      sr.marginal = std::move(fit);
    } catch (const std::exception& e) {
      sr.error = e.what();
    }
    art.series.push_back(std::move(sr));
  }

  const auto pairs = config.resolved_pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [a, b] = pairs[k];
    PairResult pr;
    pr.first = config.series[a].name;
    pr.second = config.series[b].name;
    for (const auto& e : config.menu) pr.cells.push_back({e, std::nullopt, std::nullopt, {}});
    if (!pits.contains(a) || !pits.contains(b)) {
      pr.error = "marginal stage failed for " + (pits.contains(a) ? pr.second : pr.first);
      for (auto& c : pr.cells) c.error = pr.error;
      art.failed_cells += pr.cells.size();
      art.pairs.push_back(std::move(pr));
      continue;
    }
    const AlignedPair aligned = align(ReturnSeries{art.series[a].dates, pits[a]},
                                      ReturnSeries{art.series[b].dates, pits[b]});
    pr.dates = aligned.dates;
    for (std::size_t t = 0; t < aligned.first.size(); ++t) {
      for (double x : {aligned.first[t], aligned.second[t]}) {
        if (x < kUvClamp || x > 1.0 - kUvClamp) ++pr.clamped;
      }
    }
    try {
      const auto ok = run_cells(config, aligned.first, aligned.second, pr.cells,
                                derive_seed(config.seed, k));
      if (!ok.empty()) {
        std::vector<FitReport> reports;
        for (std::size_t i : ok) reports.push_back(*pr.cells[i].report);
        const FitReport& best = select_best(reports);
        pr.best = ok[static_cast<std::size_t>(&best - reports.data())];
      }
    } catch (const std::exception& e) {
      pr.error = e.what();
      for (auto& c : pr.cells) {
        if (!c.report && c.error.empty()) c.error = pr.error;
      }
    }
    for (const auto& c : pr.cells) {
      if (!c.report) ++art.failed_cells;
    }
    art.pairs.push_back(std::move(pr));
  }
  return art;
}

std::string report_json(const RunConfig& config, const RunArtifacts& art) {
  json root;
  root["seed"] = config.seed.value;
  root["pit"] = std::string(to_string(config.pit));
  json series = json::array();
  for (const auto& s : art.series) {
    json js{{"name", s.name}, {"n", s.dates.size()}};
    if (s.input_diagnostics.n > 0) js["diagnostics"] = diagnostics_json(s.input_diagnostics);
    if (s.marginal) js["marginal"] = marginal_json(*s.marginal);
    if (s.residual_diagnostics) js["residual_diagnostics"] = diagnostics_json(*s.residual_diagnostics);
    if (s.pit_uniformity) {
      js["pit_ks"] = {{"statistic", s.pit_uniformity->statistic},
                      {"p_value", s.pit_uniformity->p_value}};
    }
    if (!s.error.empty()) js["error"] = s.error;
    series.push_back(std::move(js));
  }
  root["series"] = std::move(series);

  json pairs = json::array();
  for (const auto& p : art.pairs) {
    json jp{{"first", p.first}, {"second", p.second}, {"n", p.dates.size()}};
    if (p.clamped > 0) {
      jp["warnings"] = json::array(
          {std::to_string(p.clamped) + " PIT values clamped to [1e-10, 1 - 1e-10]"});
    }
    json cells = json::array();
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
      const auto& c = p.cells[i];
      json jc{{"family", std::string(to_string(c.entry.family))},
              {"mode", std::string(to_string(c.entry.mode))},
              {"selected", p.best && *p.best == i}};
      if (c.report) jc.update(report_to_json(*c.report));
      if (!c.error.empty()) jc["error"] = c.error;
      cells.push_back(std::move(jc));
    }
    jp["matrix"] = std::move(cells);
    if (p.best) {
      const auto& e = p.cells[*p.best].entry;
      jp["best"] = {{"family", std::string(to_string(e.family))},
                    {"mode", std::string(to_string(e.mode))}};
    }
    if (!p.error.empty()) jp["error"] = p.error;
    pairs.push_back(std::move(jp));
  }
  root["pairs"] = std::move(pairs);
  root["failed_cells"] = art.failed_cells;
  return root.dump(2) + "\n";
}

std::string path_csv(const ParamPath& path, std::span<const Date> dates) {
  if (path.size() != dates.size() || path.tail.size() != dates.size()) {
    throw std::invalid_argument("path_csv: path and dates differ in length");
  }
  std::string out = "date,param,lambda_U,lambda_L\n";
  char buf[128];
  for (std::size_t t = 0; t < dates.size(); ++t) {
    std::snprintf(buf, sizeof buf, ",%.10g,%.10g,%.10g\n", path.first[t], path.tail[t].lambda_u,
                  path.tail[t].lambda_l);
    out += format_date(dates[t]);
    out += buf;
  }
  return out;
}

void export_path_csv(const ParamPath& path, std::span<const Date> dates,
                     const std::filesystem::path& file) {
  write_text(file, path_csv(path, dates));
}

void write_artifacts(const RunConfig& config, RunArtifacts& art) {
  std::filesystem::create_directories(config.output_dir);
  art.files.clear();
  for (const auto& p : art.pairs) {
    const std::string stem = sanitize(p.first) + "_" + sanitize(p.second);
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
      const auto& c = p.cells[i];
      if (!c.path) continue;
      if (c.entry.mode == Mode::Dynamic) {
        const auto file = config.output_dir / ("path_" + stem + "_" + cell_label(c.entry) + ".csv");
        export_path_csv(*c.path, p.dates, file);
        art.files.push_back(file);
      }
      if (p.best && *p.best == i) {
        const auto file = config.output_dir / ("best_path_" + stem + ".csv");
        export_path_csv(*c.path, p.dates, file);
        art.files.push_back(file);
      }
    }
  }
  const auto report = config.output_dir / "report.json";
  write_text(report, report_json(config, art));
  art.files.push_back(report);
}

}  // namespace tvc
