#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stgf/graph.hpp"
#include "stgf/ingest.hpp"
#include "stgf/metrics.hpp"
#include "stgf/panel.hpp"
#include "stgf/stgnn.hpp"

namespace stgf {

const char* to_string(WindowingMode m);
const char* to_string(BackboneCriterion c);
WindowingMode parse_windowing(const std::string& name);
BackboneCriterion parse_criterion(const std::string& name);

struct BackboneSettings {
  bool enabled = false;
  double alpha = 0.01;
  int min_keep = 5;
  BackboneCriterion criterion = BackboneCriterion::Smallest;
};

/// Everything one run needs: the dataset (files or a synthetic spec), the
/// model and task, the windowing geometry, backbone settings and the
/// training budget. Serializes to a single editable JSON file.
struct ExperimentConfig {
  bool use_synth = true;
  SynthSpec synth;
  std::string edges_path;
  std::string panel_path;
  std::string population_path;

  CellKind model = CellKind::Gcrn;
  Task task = Task::Regression;
  Eigen::Index window = 14;
  Eigen::Index horizon = 1;
  WindowingMode windowing = WindowingMode::Sliding;
  double train_fraction = 0.8;
  BackboneSettings backbone;
  TrainConfig train;
  double alert_threshold = 10.0;
  std::string output_dir = "out";
};

std::string experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const std::string& text);

/// Reads either a plain config file or a reproducibility manifest (the
/// manifest embeds the config it was produced from).
ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const std::string& path, const ExperimentConfig& config);

/// FNV-1a over the canonical JSON form; stamped into manifests so reruns can
/// be matched to their configuration.
std::uint64_t config_hash(const ExperimentConfig& config);

/// grid_only relaxes nothing; it additionally caps window and horizon at 14.
void validate_config(const ExperimentConfig& config, bool grid_only = false);

/// Dataset after the load, align, optional backbone and standardization
/// stages; immutable and shared read-only by grid workers.
struct PreparedData {
  MobilityGraph graph;
  PanelSeries panel_raw;
  PanelSeries panel_std;
  StandardizationParams zscore;
  PropagationMatrix prop;
  Eigen::MatrixXi labels;  // classification only, else 0x0
  AlignmentReport alignment;
  Eigen::Index edges_before_backbone = 0;
};

PreparedData prepare_experiment_data(const ExperimentConfig& config);

struct ExperimentResult {
  std::vector<double> scores;  // per test timestamp: RMSE or F1
  SummaryStats summary;
  std::vector<double> loss_history;
  std::size_t train_snapshots = 0;
  std::size_t test_snapshots = 0;
  std::string scenario;  // windowing plus backbone tag, e.g. "sliding+backbone"
};

/// Snapshot generation, split, training and evaluation on prepared data.
/// Stage failures surface as errors prefixed with the stage name.
ExperimentResult run_prepared(const PreparedData& data, const ExperimentConfig& config);

/// Full pipeline: prepare, run, then write metrics.csv, predictions.csv,
/// model.ckpt and manifest.json into config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Test-split evaluation of a saved checkpoint, no training.
ExperimentResult evaluate_checkpoint(const ExperimentConfig& config,
                                     const std::string& checkpoint_path);

/// Baseline that repeats the last observed raw value across the horizon.
std::vector<Eigen::MatrixXd> persistence_predictions(const PanelSeries& raw_panel,
                                                     const std::vector<Snapshot>& snapshots);

/// Raw-unit horizon targets for scoring.
std::vector<Eigen::MatrixXd> natural_targets(const PanelSeries& raw_panel,
                                             const std::vector<Snapshot>& snapshots);

struct GridSpec {
  Eigen::Index window_min = 1;
  Eigen::Index window_max = 14;
  Eigen::Index horizon_min = 1;
  Eigen::Index horizon_max = 14;
  int workers = 1;
};

struct GridCell {
  Eigen::Index window = 0;
  Eigen::Index horizon = 0;
  bool ok = false;
  double mean_metric = 0.0;
  std::uint64_t seed = 0;
  std::string error;
};

struct GridResult {
  std::vector<GridCell> cells;  // ascending (window, horizon)
  std::string heatmap_csv;
};

/// One grid cell, trained with the seed derived from (base seed, l, F).
GridCell run_grid_cell(const PreparedData& data, const ExperimentConfig& base, Eigen::Index window,
                       Eigen::Index horizon);

/// Sweeps the whole window x horizon rectangle with a worker pool. Each cell
/// is written atomically to <output_dir>/cells/ as its own JSON file; failed
/// cells record their stage error and the sweep continues. The heatmap CSV
/// merges every matching cell file present, so partial sweeps combine.
GridResult grid_sweep(const ExperimentConfig& base, const GridSpec& grid);

}  // namespace stgf
