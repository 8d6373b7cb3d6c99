#pragma once

#include "pcnls/domain_core.hpp"
#include "pcnls/grid.hpp"
#include "pcnls/integrator.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pcnls
{

// ---------------------------------------------------------------- initial data

struct InitialDataSpec
{
  /// power_decay: c <x>^{-n}
  /// perturbed:   c <x>^{-n} + phi, |phi| <= amplitude (|c| - epsilon) <x>^{-n}
  /// gaussian:    c exp(-|x|^2 / (2 width^2)), linear oracles only
  std::string family = "power_decay";
  double c_re = 1.0;
  double c_im = 0.0;
  /// decay power; 0 means "use indices.n"
  int power = 0;
  double epsilon = 0.5;
  double amplitude = 1.0;
  int modes = 4;
  /// largest wavenumber of the perturbation
  double max_wavenumber = 2.0;
  double width = 1.0;
};

struct InitialData
{
  Field field;
  double x_norm = 0.0;
  double inf_weighted = 0.0;
  /// ||v0||_X + (inf <x>^n |v0|)^{-1}; infinite when the infimum vanishes.
  double K = 0.0;
};

/// Throws pcnls::Error for unknown families, Gaussian data in theorem mode,
/// or perturbations that break the lower bound (amplitude outside [0, 1] or
/// epsilon outside (0, |c|]).
InitialData make_initial_data(const InitialDataSpec& spec, const Grid& g, const IndexSet& idx,
                              bool theorem_mode, std::uint64_t seed);

// ---------------------------------------------------------------- config

struct GridSpec
{
  double half_width = 20.0;
  int points = 2048;
};

struct RunSpec
{
  Equation equation = Equation::nonautonomous;
  double dt = 1e-4;
  /// nonautonomous runs stop at 1 - b t_end = stop_distance
  double stop_distance = 1e-3;
  /// end time of autonomous runs (and of b = 0 runs)
  double t_end = 1.0;
  bool adapt = true;
  double adapt_c = 0.05;
  int snapshot_stride = 1;
  /// a checkpoint is written every this many snapshots and at the end
  int checkpoint_every = 50;
};

struct ExperimentConfig
{
  ModelParams model;
  /// false when the config leaves K to be computed from the data
  bool K_given = false;
  IndexSet indices;
  GridSpec grid;
  RunSpec plan;
  InitialDataSpec initial;
  std::string output_dir;
  std::uint64_t seed = 0;
  bool theorem_mode = true;
  std::vector<std::string> checks;
};

/// Names accepted in ExperimentConfig::checks.
const std::vector<std::string>& known_checks();

YAML::Node load_config_node(const std::filesystem::path& path);

/// Applies "a.b.c=value" to a config tree; the value is parsed as YAML.
void apply_override(YAML::Node& root, const std::string& assignment);

/// Builds and validates a config.  Unknown keys and unknown checks are
/// rejected.
ExperimentConfig parse_config(const YAML::Node& root);

/// Canonical form used for hashing and for the summary (no output path).
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Effective config as YAML (re-loadable by parse_config).
std::string config_to_yaml(const ExperimentConfig& cfg);

/// 16 hex digits of FNV-1a over the canonical JSON.
std::string config_hash(const ExperimentConfig& cfg);

Grid make_grid(const ExperimentConfig& cfg);
StepPlan make_plan(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- runs

struct CheckResult
{
  std::string name;
  bool passed = false;
  /// measured quantity and the bound it was held to
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct RunRecord
{
  std::string config_hash;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json fits = nlohmann::json::object();
  std::vector<CheckResult> checks;
  /// set when a module error stopped the run
  std::optional<std::string> failure;
  double data_K = 0.0;
  std::size_t steps = 0;
  /// final profile fields (empty when profiles could not be built)
  std::optional<Field> omega0;
  std::optional<Field> f0;
  /// checkpoint the run started from, if resumed
  std::string resumed_from;

  bool all_passed() const;
};

/// Runs one experiment.  When cfg.output_dir is set, checkpoints are written
/// there while stepping.  Module errors become a failure record.
RunRecord run_experiment(const ExperimentConfig& cfg);

/// Continues the run from a checkpoint field (time stamped in the field).
/// Checks that need the history from t = 0 are evaluated relative to the
/// checkpoint instead.
RunRecord resume_experiment(const ExperimentConfig& cfg, const Field& start,
                            const std::string& source);

/// Writes config.yaml, rows.csv, summary.json and the profile fields.
/// Refuses to overwrite an existing rows file.
void write_run(const RunRecord& rec, const ExperimentConfig& cfg, const std::filesystem::path& dir);

/// Serialises the rows exactly as written to rows.csv.
std::string rows_csv(const RunRecord& rec);

nlohmann::json summary_json(const RunRecord& rec, const ExperimentConfig& cfg);

/// Worker slots from PCNLS_WORKERS (default 1).
int worker_slots();

/// Runs independent experiments on worker_slots() threads; results keep the
/// input order.
std::vector<RunRecord> run_batch(const std::vector<ExperimentConfig>& cfgs);

} // namespace pcnls
