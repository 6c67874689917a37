#pragma once

#include "tvcopula/data.hpp"
#include "tvcopula/diagnostics.hpp"
#include "tvcopula/dynamic.hpp"
#include "tvcopula/estimation.hpp"
#include "tvcopula/marginal.hpp"
#include "tvcopula/rng.hpp"
#include "tvcopula/stats.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tvc {

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "TVCOPULA_OUTPUT_DIR";

struct SeriesConfig {
  std::string name;
  std::filesystem::path path;
  std::string column;
  Transform transform = Transform::LogReturn;
};

struct MarginalChoice {
  bool auto_select = false;  // AIC grid over orders <= max_order
  ArmaEgarchSpec spec{};
  std::size_t max_order = 2;
};

struct MenuEntry {
  Family family = Family::Normal;
  Mode mode = Mode::Static;
  bool operator==(const MenuEntry&) const = default;
};

/// Every family in both modes.
std::vector<MenuEntry> full_menu();

struct RunConfig {
  std::vector<SeriesConfig> series;
  /// Index pairs into `series`; empty means the first series against each
  /// of the others.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  MarginalChoice marginal;
  std::vector<MenuEntry> menu = full_menu();
  std::filesystem::path output_dir = "tvcopula_out";
  Seed seed{20240101};
  PitMode pit = PitMode::Parametric;
  std::size_t diagnostic_lags = kDefaultDiagnosticLags;
  std::size_t max_evaluations = 20000;
  std::size_t restarts = 5;
  /// Worker threads for the copula cells; 0 means hardware concurrency.
  std::size_t threads = 0;

  /// Throws std::invalid_argument naming the first problem.
  void validate() const;
  std::vector<std::pair<std::size_t, std::size_t>> resolved_pairs() const;
};

/// Parses the JSON configuration. Relative series paths are resolved
/// against `base_dir`.
RunConfig parse_run_config(const std::string& json_text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& file);

struct SeriesResult {
  std::string name;
  std::vector<Date> dates;
  DiagnosticReport input_diagnostics;
  std::optional<MarginalFit> marginal;
  std::optional<DiagnosticReport> residual_diagnostics;
  std::optional<KsResult> pit_uniformity;
  std::string error;
};

struct CellResult {
  MenuEntry entry;
  std::optional<FitReport> report;
  std::optional<ParamPath> path;
  std::string error;
};

struct PairResult {
  std::string first;
  std::string second;
  std::vector<Date> dates;
  std::vector<CellResult> cells;
  std::optional<std::size_t> best;  // index into cells
  std::size_t clamped = 0;          // PIT values moved onto [1e-10, 1 - 1e-10]
  std::string error;
};

struct RunArtifacts {
  std::vector<SeriesResult> series;
  std::vector<PairResult> pairs;
  std::vector<std::filesystem::path> files;
  std::size_t failed_cells = 0;
};

/// ingest -> diagnostics -> marginals -> PIT -> copula cells -> selection.
/// Throws only when an input cannot be loaded; other failures are recorded
/// on the affected series, pair or cell. Does not write files.
RunArtifacts run_pipeline(const RunConfig& config);

/// Writes report.json and the path CSVs into config.output_dir and records
/// the written files in `artifacts.files`.
void write_artifacts(const RunConfig& config, RunArtifacts& artifacts);

/// Machine-readable report (JSON text).
std::string report_json(const RunConfig& config, const RunArtifacts& artifacts);

/// Header `date,param,lambda_U,lambda_L`, one row per observation, values
/// with 10 significant digits. `param` is the first parameter of the family.
/// Throws std::invalid_argument on a length mismatch.
std::string path_csv(const ParamPath& path, std::span<const Date> dates);
void export_path_csv(const ParamPath& path, std::span<const Date> dates,
                     const std::filesystem::path& file);

/// Constant path of a static fit, for export alongside the dynamic ones.
ParamPath constant_path(const StaticCopulaParams& params, std::size_t n, double loglik);

}  // namespace tvc
