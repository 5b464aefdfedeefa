#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xorlab/boundary.hpp"
#include "xorlab/diagnostics.hpp"
#include "xorlab/distribution.hpp"
#include "xorlab/trainer.hpp"

namespace xorlab {

/// Serializable distribution parameters; per-seed specs are derived from
/// these (random means draw from the seed's stream).
struct DistributionParams {
  int d = 2;
  double sigma = 0.1;
  double eta = 0.0;
  MeanMode mean_mode = MeanMode::canonical;
  NoiseMode noise_mode = NoiseMode::uniform_flip;
};

struct OutputOptions {
  std::filesystem::path dir;
  bool trace_csv = true;
  bool diagnostics_json = true;
  bool dataset_csv = false;
  bool checkpoints = false;
  bool svg = false;
  bool grid_csv = false;
  int grid_res = 200;
  GridBounds grid_bounds;
};

struct ExperimentConfig {
  std::string preset_name;  // provenance only
  DistributionParams distribution;
  std::size_t n_train = 100;
  std::size_t n_test = 10000;
  std::size_t n_val = 0;  // fresh noisy-label validation set, 0 disables
  int val_stride = 0;     // evaluate validation accuracy every k iterations
  int m = 16;
  TrainConfig train;      // per-run seed is taken from `seeds`
  DiagnosticsConfig diagnostics;
  std::vector<int> diag_iterations{0};
  OutputOptions outputs;
  std::vector<std::uint64_t> seeds{1};
  int jobs = 0;  // parallel seeds; 0 = hardware default
};

void validate(const ExperimentConfig& config);

/// fig1, fig2_lowdim, fig2_highdim, theorem. Output directory and seeds are
/// left for the caller.
ExperimentConfig preset(const std::string& name);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Applies a dotted-path override like "train.alpha=0.2" or "seeds=1,2,3" on
/// top of the JSON form of the config.
void apply_override(nlohmann::json& j, const std::string& key_eq_value);

struct RunArtifacts {
  std::filesystem::path out_dir;
  std::filesystem::path manifest_path;
  std::filesystem::path summary_path;
  nlohmann::json summary;
  bool predicates_pass = false;
};

/// Full pipeline: per seed, sample, train, evaluate diagnostics at the
/// configured iterations, and write trace CSV / diagnostics JSON / summary
/// JSON under <dir>/seed_<s>/. Multi-seed aggregates land in the run-level
/// summary.json, accuracy_curves.csv, and manifest.json.
RunArtifacts run(const ExperimentConfig& config);

/// Re-evaluates the preset's acceptance predicates from a finished run
/// directory without recomputing anything.
bool check(const std::filesystem::path& out_dir, nlohmann::json* detail = nullptr);

/// Fraction of samples whose observed label is predicted with strictly
/// positive margin.
double dataset_accuracy(const NetworkParams& params, const Dataset& dataset);

/// Per-iteration mean and standard deviation of train/validation accuracy
/// across seeds: t,train_mean,train_sd,val_mean,val_sd. Traces must carry
/// val_accuracy series on identical iteration grids.
std::string accuracy_curves_csv(const std::vector<TrainTrace>& traces);

/// Trace CSV per the schema t,empirical_risk,clean_acc,noisy_acc,frob_norm,
/// max_neuron_norm.
void write_trace_csv(const TrainTrace& trace, std::ostream& out);

nlohmann::json diagnostics_to_json(const std::vector<IterationDiagnostics>& diags);

/// Per-assumption bound on the constant that would make the analysis
/// assumptions hold at the given configuration; emitted in the manifest.
nlohmann::json assumption_proxies(const ExperimentConfig& config, double delta);

}  // namespace xorlab
