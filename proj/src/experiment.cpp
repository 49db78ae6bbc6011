#include "stgf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "stgf/rng.hpp"

namespace fs = std::filesystem;

namespace stgf {

const char* to_string(WindowingMode m) {
  return m == WindowingMode::Sliding ? "sliding" : "segmented";
}

const char* to_string(BackboneCriterion c) {
  return c == BackboneCriterion::Smallest ? "smallest" : "largest";
}

WindowingMode parse_windowing(const std::string& name) {
  if (name == "sliding") return WindowingMode::Sliding;
  if (name == "segmented") return WindowingMode::Segmented;
  throw std::invalid_argument("unknown windowing mode: " + name);
}

BackboneCriterion parse_criterion(const std::string& name) {
  if (name == "smallest") return BackboneCriterion::Smallest;
  if (name == "largest") return BackboneCriterion::Largest;
  throw std::invalid_argument("unknown backbone criterion: " + name);
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (const unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& err) {
    throw std::runtime_error(std::string("stage ") + name + ": " + err.what());
  }
}

nlohmann::json config_to_json_tree(const ExperimentConfig& c) {
  nlohmann::json j;
  if (c.use_synth) {
    j["dataset"]["synthetic"] = {{"nodes", c.synth.nodes},
                                 {"days", c.synth.days},
                                 {"seed", c.synth.seed},
                                 {"graph_style", to_string(c.synth.graph_style)},
                                 {"series_style", to_string(c.synth.series_style)},
                                 {"noise", c.synth.noise}};
  } else {
    j["dataset"]["edges"] = c.edges_path;
    j["dataset"]["panel"] = c.panel_path;
    if (!c.population_path.empty()) j["dataset"]["population"] = c.population_path;
  }
  j["model"] = to_string(c.model);
  j["task"] = to_string(c.task);
  j["window"] = c.window;
  j["horizon"] = c.horizon;
  j["windowing"] = to_string(c.windowing);
  j["train_fraction"] = c.train_fraction;
  j["backbone"] = {{"enabled", c.backbone.enabled},
                   {"alpha", c.backbone.alpha},
                   {"min_keep", c.backbone.min_keep},
                   {"criterion", to_string(c.backbone.criterion)}};
  j["train"] = {{"learning_rate", c.train.learning_rate}, {"epochs", c.train.epochs},
                {"seed", c.train.seed},                   {"hidden", c.train.hidden},
                {"optimizer", to_string(c.train.optimizer)},
                {"precision", to_string(c.train.precision)}};
  j["alert_threshold"] = c.alert_threshold;
  j["output_dir"] = c.output_dir;
  return j;
}

ExperimentConfig config_from_json_tree(const nlohmann::json& j) {
  ExperimentConfig c;
  const auto& dataset = j.at("dataset");
  if (dataset.contains("synthetic")) {
    c.use_synth = true;
    const auto& s = dataset.at("synthetic");
    c.synth.nodes = s.value("nodes", c.synth.nodes);
    c.synth.days = s.value("days", c.synth.days);
    c.synth.seed = s.value("seed", c.synth.seed);
    c.synth.graph_style = parse_graph_style(s.value("graph_style", std::string("community")));
    c.synth.series_style = parse_series_style(s.value("series_style", std::string("seasonal")));
    c.synth.noise = s.value("noise", c.synth.noise);
  } else {
    c.use_synth = false;
    c.edges_path = dataset.at("edges").get<std::string>();
    c.panel_path = dataset.at("panel").get<std::string>();
    c.population_path = dataset.value("population", std::string());
  }
  c.model = parse_cell(j.value("model", std::string("gcrn")));
  c.task = parse_task(j.value("task", std::string("regression")));
  c.window = j.value("window", c.window);
  c.horizon = j.value("horizon", c.horizon);
  c.windowing = parse_windowing(j.value("windowing", std::string("sliding")));
  c.train_fraction = j.value("train_fraction", c.train_fraction);
  if (j.contains("backbone")) {
    const auto& b = j.at("backbone");
    c.backbone.enabled = b.value("enabled", c.backbone.enabled);
    c.backbone.alpha = b.value("alpha", c.backbone.alpha);
    c.backbone.min_keep = b.value("min_keep", c.backbone.min_keep);
    c.backbone.criterion = parse_criterion(b.value("criterion", std::string("smallest")));
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
    c.train.epochs = t.value("epochs", c.train.epochs);
    c.train.seed = t.value("seed", c.train.seed);
    c.train.hidden = t.value("hidden", c.train.hidden);
    c.train.optimizer = parse_optimizer(t.value("optimizer", std::string("adam")));
    c.train.precision = parse_precision(t.value("precision", std::string("f64")));
  }
  c.train.task = c.task;
  c.alert_threshold = j.value("alert_threshold", c.alert_threshold);
  c.output_dir = j.value("output_dir", c.output_dir);
  return c;
}

std::string scenario_string(const ExperimentConfig& c) {
  std::string s = to_string(c.windowing);
  if (c.backbone.enabled) s += "+backbone";
  return s;
}

std::string relative_to_cwd(const std::string& path) {
  if (path.empty() || !fs::path(path).is_absolute()) return path;
  return fs::proximate(path, fs::current_path()).string();
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for file: " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& config) {
  return config_to_json_tree(config).dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  return config_from_json_tree(nlohmann::json::parse(text));
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.contains("config")) j = j.at("config");
  return config_from_json_tree(j);
}

void save_experiment_config(const std::string& path, const ExperimentConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write config: " + path);
  out << experiment_config_to_json(config);
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  return fnv1a(config_to_json_tree(config).dump());
}

void validate_config(const ExperimentConfig& config, bool grid_only) {
  if (config.window < 1 || config.horizon < 1) {
    throw std::invalid_argument("window and horizon must be at least 1");
  }
  if (grid_only && (config.window > 14 || config.horizon > 14)) {
    throw std::invalid_argument("grid runs cap window and horizon at 14");
  }
  if (!(config.train_fraction > 0.0) || !(config.train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie strictly between 0 and 1");
  }
  if (!(config.backbone.alpha > 0.0) || !(config.backbone.alpha < 1.0)) {
    throw std::invalid_argument("backbone alpha must lie strictly between 0 and 1");
  }
  if (config.backbone.min_keep < 0) {
    throw std::invalid_argument("backbone min_keep must be non-negative");
  }
  if (config.train.learning_rate < 0.0) {
    throw std::invalid_argument("learning rate must be non-negative");
  }
  if (config.train.epochs < 1) throw std::invalid_argument("epoch count must be at least 1");
  if (config.train.hidden < 1) throw std::invalid_argument("hidden size must be at least 1");
  if (!std::isfinite(config.alert_threshold)) {
    throw std::invalid_argument("alert threshold must be finite");
  }
  if (!config.use_synth) {
    if (!fs::exists(config.edges_path)) {
      throw std::invalid_argument("edge list not found: " + config.edges_path);
    }
    if (!fs::exists(config.panel_path)) {
      throw std::invalid_argument("panel not found: " + config.panel_path);
    }
    if (config.task == Task::Classification) {
      if (config.population_path.empty()) {
        throw std::invalid_argument("classification requires a population table");
      }
      if (!fs::exists(config.population_path)) {
        throw std::invalid_argument("population table not found: " + config.population_path);
      }
    }
  }
}

PreparedData prepare_experiment_data(const ExperimentConfig& config) {
  validate_config(config);
  PreparedData data;
  PopulationTable populations;

  stage("load", [&] {
    if (config.use_synth) {
      SyntheticData synth = generate_synthetic(config.synth);
      data.graph = std::move(synth.graph);
      data.panel_raw = std::move(synth.panel);
      populations = std::move(synth.populations);
    } else {
      data.graph = load_edge_list(config.edges_path);
      data.panel_raw = load_panel(config.panel_path);
      if (config.task == Task::Classification) {
        populations = load_population(config.population_path);
      }
    }
    return 0;
  });

  stage("align", [&] {
    AlignedData aligned = align(data.graph, data.panel_raw);
    data.graph = std::move(aligned.graph);
    data.panel_raw = std::move(aligned.panel);
    data.alignment = std::move(aligned.report);
    return 0;
  });

  data.edges_before_backbone = static_cast<Eigen::Index>(data.graph.edges().size());
  if (config.backbone.enabled) {
    stage("backbone", [&] {
      data.graph = extract_backbone(data.graph, config.backbone.alpha,
                                    config.backbone.min_keep, config.backbone.criterion);
      return 0;
    });
  }

  stage("standardize", [&] {
    const auto [train_days, test_days] = split_days(data.panel_raw.days(), config.train_fraction);
    (void)test_days;
    data.zscore = fit_zscore(data.panel_raw, 0, train_days);
    data.panel_std = apply_zscore(data.panel_raw, data.zscore);
    return 0;
  });

  if (config.task == Task::Classification) {
    stage("labels", [&] {
      data.labels = classification_targets(data.panel_raw, populations, config.alert_threshold);
      return 0;
    });
  }

  stage("propagation", [&] {
    data.prop = propagation_matrix(data.graph);
    return 0;
  });
  return data;
}

std::vector<Eigen::MatrixXd> natural_targets(const PanelSeries& raw_panel,
                                             const std::vector<Snapshot>& snapshots) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(snapshots.size());
  for (const Snapshot& snap : snapshots) out.push_back(target_of(raw_panel, snap));
  return out;
}

std::vector<Eigen::MatrixXd> persistence_predictions(const PanelSeries& raw_panel,
                                                     const std::vector<Snapshot>& snapshots) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(snapshots.size());
  for (const Snapshot& snap : snapshots) {
    Eigen::MatrixXd pred(raw_panel.nodes(), snap.horizon);
    pred.colwise() = raw_panel.values.col(snap.anchor);
    out.push_back(std::move(pred));
  }
  return out;
}

namespace {

template <typename Scalar>
std::vector<double> score_test_split(const PreparedData& data, const ExperimentConfig& config,
                                     const Model<Scalar>& model,
                                     const std::vector<Snapshot>& test_snaps,
                                     Predictions* out_predictions) {
  const SparseMat<Scalar> prop = cast_propagation<Scalar>(data.prop);
  const auto batch = make_batch<Scalar>(data.panel_std, test_snaps, config.task,
                                        config.task == Task::Classification ? &data.labels
                                                                            : nullptr);
  Predictions preds = predict_batch(model, batch, prop, data.zscore);
  std::vector<double> scores;
  scores.reserve(test_snaps.size());
  if (config.task == Task::Regression) {
    const auto truths = natural_targets(data.panel_raw, test_snaps);
    const Eigen::VectorXd rmse = rmse_per_timestamp(preds.values, truths);
    scores.assign(rmse.data(), rmse.data() + rmse.size());
  } else {
    for (std::size_t i = 0; i < test_snaps.size(); ++i) {
      const Eigen::VectorXi truth = label_target_of(data.labels, test_snaps[i]);
      scores.push_back(classification_scores(preds.labels[i], truth).f1);
    }
  }
  if (out_predictions != nullptr) *out_predictions = std::move(preds);
  return scores;
}

template <typename Scalar>
ExperimentResult run_impl(const PreparedData& data, const ExperimentConfig& config,
                          const std::string* checkpoint_path, Predictions* out_predictions,
                          std::vector<Snapshot>* out_test_snaps) {
  ExperimentResult result;
  result.scenario = scenario_string(config);

  std::vector<Snapshot> train_snaps, test_snaps;
  stage("snapshots", [&] {
    auto snaps = make_snapshots(data.panel_std, config.window, config.horizon, config.windowing);
    std::tie(train_snaps, test_snaps) = split_chronological(snaps, config.train_fraction);
    return 0;
  });
  result.train_snapshots = train_snaps.size();
  result.test_snapshots = test_snaps.size();

  TrainConfig tc = config.train;
  tc.task = config.task;
  Model<Scalar> model = make_model<Scalar>(config.model, config.task, 1, tc.hidden,
                                           config.horizon, tc.seed);
  stage("train", [&] {
    const SparseMat<Scalar> prop = cast_propagation<Scalar>(data.prop);
    const auto batch = make_batch<Scalar>(data.panel_std, train_snaps, config.task,
                                          config.task == Task::Classification ? &data.labels
                                                                              : nullptr);
    result.loss_history = train(model, batch, prop, tc);
    return 0;
  });

  stage("evaluate", [&] {
    result.scores = score_test_split(data, config, model, test_snaps, out_predictions);
    result.summary = summarize(result.scores);
    return 0;
  });

  if (checkpoint_path != nullptr) {
    stage("write", [&] {
      save_checkpoint(*checkpoint_path, model, tc);
      return 0;
    });
  }
  if (out_test_snaps != nullptr) *out_test_snaps = std::move(test_snaps);
  return result;
}

nlohmann::json manifest_tree(const ExperimentConfig& config, const ExperimentResult& result) {
  ExperimentConfig portable = config;
  portable.edges_path = relative_to_cwd(portable.edges_path);
  portable.panel_path = relative_to_cwd(portable.panel_path);
  portable.population_path = relative_to_cwd(portable.population_path);
  portable.output_dir = relative_to_cwd(portable.output_dir);
  nlohmann::json j;
  j["kind"] = "manifest";
  j["config"] = config_to_json_tree(portable);
  j["config_hash"] = hex64(config_hash(portable));
  j["seed"] = config.train.seed;
  j["scenario"] = result.scenario;
  j["train_snapshots"] = result.train_snapshots;
  j["test_snapshots"] = result.test_snapshots;
  j["versions"] = {
      {"artifact", "0.1.0"},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION)},
      {"compiler", __VERSION__}};
  return j;
}

std::string predictions_csv(const ExperimentConfig& config, const PreparedData& data,
                            const Predictions& preds) {
  std::string out;
  char buf[48];
  const auto& ids = data.panel_raw.node_ids;
  if (config.task == Task::Regression) {
    out = "snapshot,node";
    for (Eigen::Index f = 1; f <= config.horizon; ++f) {
      out += ",horizon_" + std::to_string(f);
    }
    out += '\n';
    for (std::size_t s = 0; s < preds.values.size(); ++s) {
      const auto& m = preds.values[s];
      for (Eigen::Index n = 0; n < m.rows(); ++n) {
        out += std::to_string(s);
        out += ',';
        out += ids[static_cast<std::size_t>(n)];
        for (Eigen::Index f = 0; f < m.cols(); ++f) {
          std::snprintf(buf, sizeof(buf), "%.17g", m(n, f));
          out += ',';
          out += buf;
        }
        out += '\n';
      }
    }
  } else {
    out = "snapshot,node,label\n";
    for (std::size_t s = 0; s < preds.labels.size(); ++s) {
      const auto& v = preds.labels[s];
      for (Eigen::Index n = 0; n < v.size(); ++n) {
        out += std::to_string(s) + ',' + ids[static_cast<std::size_t>(n)] + ',' +
               std::to_string(v[n]) + '\n';
      }
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_prepared(const PreparedData& data, const ExperimentConfig& config) {
  if (config.train.precision == Precision::Float32) {
    return run_impl<float>(data, config, nullptr, nullptr, nullptr);
  }
  return run_impl<double>(data, config, nullptr, nullptr, nullptr);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const PreparedData data = prepare_experiment_data(config);

  const fs::path dir(config.output_dir);
  stage("write", [&] {
    fs::create_directories(dir);
    return 0;
  });

  const std::string checkpoint_path = (dir / "model.ckpt").string();
  Predictions preds;
  std::vector<Snapshot> test_snaps;
  ExperimentResult result;
  if (config.train.precision == Precision::Float32) {
    result = run_impl<float>(data, config, &checkpoint_path, &preds, &test_snaps);
  } else {
    result = run_impl<double>(data, config, &checkpoint_path, &preds, &test_snaps);
  }

  stage("write", [&] {
    MetricsTable table;
    table.add(to_string(config.model), result.scenario, result.summary);
    write_text_atomic(dir / "metrics.csv", table.to_csv());
    write_text_atomic(dir / "predictions.csv", predictions_csv(config, data, preds));
    write_text_atomic(dir / "manifest.json", manifest_tree(config, result).dump(2) + "\n");
    return 0;
  });
  return result;
}

ExperimentResult evaluate_checkpoint(const ExperimentConfig& config,
                                     const std::string& checkpoint_path) {
  const PreparedData data = prepare_experiment_data(config);

  ExperimentResult result;
  result.scenario = scenario_string(config);
  std::vector<Snapshot> train_snaps, test_snaps;
  stage("snapshots", [&] {
    auto snaps = make_snapshots(data.panel_std, config.window, config.horizon, config.windowing);
    std::tie(train_snaps, test_snaps) = split_chronological(snaps, config.train_fraction);
    return 0;
  });
  result.train_snapshots = train_snaps.size();
  result.test_snapshots = test_snaps.size();

  stage("evaluate", [&] {
    const Precision precision = checkpoint_precision(checkpoint_path);
    auto check = [&](CellKind cell, Task task, Eigen::Index horizon) {
      if (cell != config.model || task != config.task ||
          (task == Task::Regression && horizon != config.horizon)) {
        throw std::runtime_error("checkpoint architecture does not match the configuration");
      }
    };
    if (precision == Precision::Float32) {
      const auto model = load_checkpoint<float>(checkpoint_path);
      check(model.cell, model.task, model.horizon);
      result.scores = score_test_split(data, config, model, test_snaps, nullptr);
    } else {
      const auto model = load_checkpoint<double>(checkpoint_path);
      check(model.cell, model.task, model.horizon);
      result.scores = score_test_split(data, config, model, test_snaps, nullptr);
    }
    result.summary = summarize(result.scores);
    return 0;
  });
  return result;
}

GridCell run_grid_cell(const PreparedData& data, const ExperimentConfig& base, Eigen::Index window,
                       Eigen::Index horizon) {
  GridCell cell;
  cell.window = window;
  cell.horizon = horizon;
  cell.seed = derive_seed(base.train.seed, static_cast<std::uint64_t>(window),
                          static_cast<std::uint64_t>(horizon));
  ExperimentConfig config = base;
  config.window = window;
  config.horizon = horizon;
  config.train.seed = cell.seed;
  try {
    const ExperimentResult result = run_prepared(data, config);
    cell.mean_metric = result.summary.mean;
    cell.ok = true;
  } catch (const std::exception& err) {
    cell.ok = false;
    cell.error = err.what();
  }
  return cell;
}

namespace {

std::string cell_file_name(const ExperimentConfig& base, Eigen::Index window,
                           Eigen::Index horizon) {
  return std::string("cell_") + to_string(base.model) + "_" + to_string(base.task) + "_w" +
         std::to_string(window) + "_h" + std::to_string(horizon) + ".json";
}

void write_cell_file(const fs::path& cells_dir, const ExperimentConfig& base,
                     const GridCell& cell) {
  nlohmann::json j = {{"model", to_string(base.model)},
                      {"task", to_string(base.task)},
                      {"window", cell.window},
                      {"horizon", cell.horizon},
                      {"seed", cell.seed},
                      {"status", cell.ok ? "ok" : "failed"}};
  if (cell.ok) {
    j["metric_mean"] = cell.mean_metric;
  } else {
    j["error"] = cell.error;
  }
  write_text_atomic(cells_dir / cell_file_name(base, cell.window, cell.horizon),
                    j.dump(2) + "\n");
}

}  // namespace

GridResult grid_sweep(const ExperimentConfig& base, const GridSpec& grid) {
  if (grid.window_min < 1 || grid.horizon_min < 1 || grid.window_max > 14 ||
      grid.horizon_max > 14 || grid.window_min > grid.window_max ||
      grid.horizon_min > grid.horizon_max) {
    throw std::invalid_argument("grid ranges must satisfy 1 <= min <= max <= 14");
  }
  {
    ExperimentConfig probe = base;
    probe.window = grid.window_max;
    probe.horizon = grid.horizon_max;
    validate_config(probe, true);
  }
  const PreparedData data = prepare_experiment_data(base);

  const fs::path cells_dir = fs::path(base.output_dir) / "cells";
  fs::create_directories(cells_dir);

  std::vector<std::pair<Eigen::Index, Eigen::Index>> tasks;
  for (Eigen::Index l = grid.window_min; l <= grid.window_max; ++l) {
    for (Eigen::Index f = grid.horizon_min; f <= grid.horizon_max; ++f) {
      tasks.emplace_back(l, f);
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  std::vector<std::string> io_errors;
  auto worker = [&] {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= tasks.size()) break;
      const auto [l, f] = tasks[idx];
      const GridCell cell = run_grid_cell(data, base, l, f);
      try {
        write_cell_file(cells_dir, base, cell);
      } catch (const std::exception& err) {
        const std::lock_guard<std::mutex> lock(io_mutex);
        io_errors.push_back(err.what());
      }
    }
  };

  const int width = std::max(1, std::min<int>(grid.workers, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(width) - 1);
  for (int w = 1; w < width; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (!io_errors.empty()) {
    throw std::runtime_error("stage write: " + io_errors.front());
  }

  // Merge every matching cell file, including ones from earlier partial runs.
  GridResult result;
  std::map<std::pair<Eigen::Index, Eigen::Index>, GridCell> merged;
  const std::string prefix = std::string("cell_") + to_string(base.model) + "_" +
                             to_string(base.task) + "_";
  for (const auto& entry : fs::directory_iterator(cells_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) != 0 || entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception&) {
      continue;
    }
    GridCell cell;
    cell.window = j.value("window", Eigen::Index(0));
    cell.horizon = j.value("horizon", Eigen::Index(0));
    cell.seed = j.value("seed", std::uint64_t(0));
    cell.ok = j.value("status", std::string()) == "ok";
    cell.mean_metric = j.value("metric_mean", 0.0);
    cell.error = j.value("error", std::string());
    if (cell.window >= grid.window_min && cell.window <= grid.window_max &&
        cell.horizon >= grid.horizon_min && cell.horizon <= grid.horizon_max) {
      merged[{cell.window, cell.horizon}] = std::move(cell);
    }
  }
  for (auto& [key, cell] : merged) result.cells.push_back(std::move(cell));

  std::string csv = "window";
  for (Eigen::Index f = grid.horizon_min; f <= grid.horizon_max; ++f) {
    csv += ",horizon_" + std::to_string(f);
  }
  csv += '\n';
  char buf[48];
  for (Eigen::Index l = grid.window_min; l <= grid.window_max; ++l) {
    csv += std::to_string(l);
    for (Eigen::Index f = grid.horizon_min; f <= grid.horizon_max; ++f) {
      csv += ',';
      const auto it = merged.find({l, f});
      if (it != merged.end() && it->second.ok) {
        std::snprintf(buf, sizeof(buf), "%.17g", it->second.mean_metric);
        csv += buf;
      }
    }
    csv += '\n';
  }
  result.heatmap_csv = csv;
  const std::string heatmap_name = std::string("heatmap_") + to_string(base.model) + "_" +
                                   to_string(base.task) + ".csv";
  write_text_atomic(fs::path(base.output_dir) / heatmap_name, csv);
  return result;
}

}  // namespace stgf
