#pragma once

#include <filesystem>
#include <limits>
#include <span>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bdflow/core.hpp"
#include "bdflow/diagnostics.hpp"
#include "bdflow/initdata.hpp"
#include "bdflow/manufactured.hpp"
#include "bdflow/solver.hpp"

namespace bdflow {

inline constexpr int kCsvSchemaVersion = 1;

struct StudyConfig {
  std::vector<std::size_t> dx_refinement;  // cell counts, strictly increasing
  std::vector<RegIndex> n_sequence;
  bool couple_tau = true;               // finite n uses tau = 1/n
  bool n_affects_viscosity = true;      // finite n adds (1/n) rho^theta to mu
};

struct RunConfig {
  std::string preset;  // empty when the scenario is described field by field
  ScenarioSpec scenario;
  bool manufactured = false;
  ManufacturedSolution mms;
  Grid1D grid;
  SchemeConfig scheme;
  double t_end = 0.02;
  double record_every = 0.005;
  std::string output_dir;
  std::size_t snapshot_points = 1024;  // max samples per field in snapshots.json
  StudyConfig study;
  DiagnosticsOptions diagnostics;
  double entropy_tol = 0.01;
  double gronwall_tol = 0.05;
};

/// Preset names accepted by scenario.preset: the scenario presets plus "mms".
std::vector<std::string> run_preset_names();

/// Parses the key = value format ('#' starts a comment). Keys are applied in
/// order after scenario.preset. Throws ValidationError listing every problem.
RunConfig parse_config(std::string_view text);
/// Same, starting from already collected key/value pairs.
RunConfig config_from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs);
std::vector<std::pair<std::string, std::string>> parse_pairs(std::string_view text);

/// Every key accepted by the config format.
const std::vector<std::string>& config_keys();

struct Verdicts {
  EntropyReport entropy;
  GronwallReport gronwall;
  MassBalance mass;
  bool mass_ok = true;
  std::string probe;  // "regularized", "persistent" or "inconclusive"
  double probe_ratio = 0.0;
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 3 solver failure
  Trajectory trajectory;
  BuiltScenario built;
  Verdicts verdicts;
  std::vector<std::string> warnings;
};

/// Builds the initial data, integrates, evaluates the verdicts and, when
/// cfg.output_dir is set, writes diagnostics.csv, snapshots.json, summary.json.
RunResult run_scenario(const RunConfig& cfg);

/// Ratio h1_phi1(state) / h1_phi1(state restricted to the grid twice as
/// coarse): about 1 for a resolved profile and about sqrt(2) for a jump.
double regularization_ratio(const State& s, const Grid1D& g, const Params& p);
std::string classify_regularization(double ratio);

/// L1 distance between a coarse density, linearly interpolated to the fine
/// centres, and a fine density on the same interval.
double l1_distance(std::span<const double> coarse, const Grid1D& gc, std::span<const double> fine,
                   const Grid1D& gf);

struct StudyRow {
  std::string key;          // cell count or regularization index
  std::size_t cells = 0;
  RegIndex n;
  int exit_code = 0;
  double l1_to_next = std::numeric_limits<double>::quiet_NaN();
  double order = std::numeric_limits<double>::quiet_NaN();
  double l1_to_reference = std::numeric_limits<double>::quiet_NaN();  // exact or n = inf
  double reference_order = std::numeric_limits<double>::quiet_NaN();
  double h1_final = 0.0;
  Verdicts verdicts;
  State final_state;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  int exit_code = 0;
};

/// Runs every cell count concurrently; rows sorted by cell count.
StudyResult refinement_study(const RunConfig& cfg);
/// Runs every regularization index concurrently at fixed grid; rows sorted
/// by n with infinity last. l1_to_reference is the distance to the n = inf row.
StudyResult n_sequence_study(const RunConfig& cfg);

void write_study_csv(const StudyResult& study, const std::filesystem::path& path);

}  // namespace bdflow
