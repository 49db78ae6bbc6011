// Command line front end for the forecasting engine. Every subcommand reads
// an optional JSON config file; individual flags override config values.
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "stgf/experiment.hpp"

namespace fs = std::filesystem;
using namespace stgf;

namespace {

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> edges, panel, population;
  std::optional<std::string> model, task, windowing;
  std::optional<int> window, horizon;
  std::optional<double> train_fraction;
  std::optional<bool> backbone;
  std::optional<double> alpha;
  std::optional<int> min_keep;
  std::optional<std::string> criterion;
  std::optional<double> learning_rate;
  std::optional<int> epochs, hidden;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> optimizer, precision;
  std::optional<double> alert_threshold;
  std::optional<std::string> output_dir;
  std::optional<int> synth_nodes, synth_days;
  std::optional<std::uint64_t> synth_seed;
  std::optional<std::string> graph_style, series_style;
  std::optional<double> noise;
};

void add_common_options(CLI::App* sub, Overrides& ov) {
  sub->add_option("--config", ov.config_path, "JSON config file (or a manifest embedding one)");
  sub->add_option("--edges", ov.edges, "edge list CSV; implies a file-backed dataset");
  sub->add_option("--panel", ov.panel, "daily panel CSV; implies a file-backed dataset");
  sub->add_option("--population", ov.population, "population CSV (classification)");
  sub->add_option("--model", ov.model, "gcrn or gclstm");
  sub->add_option("--task", ov.task, "regression or classification");
  sub->add_option("--window", ov.window, "input window length in days");
  sub->add_option("--horizon", ov.horizon, "forecast horizon in days");
  sub->add_option("--windowing", ov.windowing, "sliding or segmented");
  sub->add_option("--train-fraction", ov.train_fraction, "chronological train share");
  sub->add_flag("--backbone{true},--no-backbone{false}", ov.backbone,
                "toggle backbone filtering before training");
  sub->add_option("--alpha", ov.alpha, "backbone significance level");
  sub->add_option("--min-keep", ov.min_keep, "heaviest outgoing edges kept per node");
  sub->add_option("--criterion", ov.criterion, "backbone endpoint rule: smallest or largest");
  sub->add_option("--lr", ov.learning_rate, "learning rate");
  sub->add_option("--epochs", ov.epochs, "training epochs");
  sub->add_option("--hidden", ov.hidden, "hidden state size");
  sub->add_option("--seed", ov.seed, "training seed");
  sub->add_option("--optimizer", ov.optimizer, "adam or sgd");
  sub->add_option("--precision", ov.precision, "f32 or f64");
  sub->add_option("--alert-threshold", ov.alert_threshold, "alert metric cutoff");
  sub->add_option("--output-dir", ov.output_dir, "directory for run outputs");
  sub->add_option("--synth-nodes", ov.synth_nodes, "synthetic dataset node count");
  sub->add_option("--synth-days", ov.synth_days, "synthetic dataset day count");
  sub->add_option("--synth-seed", ov.synth_seed, "synthetic dataset seed");
  sub->add_option("--graph-style", ov.graph_style, "ring, community or random");
  sub->add_option("--series-style", ov.series_style, "seasonal, linear or separable-two-class");
  sub->add_option("--noise", ov.noise, "synthetic noise scale");
}

ExperimentConfig make_config(const Overrides& ov) {
  ExperimentConfig c;
  if (ov.config_path) c = load_experiment_config(*ov.config_path);
  if (ov.edges) {
    c.edges_path = *ov.edges;
    c.use_synth = false;
  }
  if (ov.panel) {
    c.panel_path = *ov.panel;
    c.use_synth = false;
  }
  if (ov.population) c.population_path = *ov.population;
  if (ov.model) c.model = parse_cell(*ov.model);
  if (ov.task) c.task = parse_task(*ov.task);
  if (ov.window) c.window = *ov.window;
  if (ov.horizon) c.horizon = *ov.horizon;
  if (ov.windowing) c.windowing = parse_windowing(*ov.windowing);
  if (ov.train_fraction) c.train_fraction = *ov.train_fraction;
  if (ov.backbone) c.backbone.enabled = *ov.backbone;
  if (ov.alpha) c.backbone.alpha = *ov.alpha;
  if (ov.min_keep) c.backbone.min_keep = *ov.min_keep;
  if (ov.criterion) c.backbone.criterion = parse_criterion(*ov.criterion);
  if (ov.learning_rate) c.train.learning_rate = *ov.learning_rate;
  if (ov.epochs) c.train.epochs = *ov.epochs;
  if (ov.hidden) c.train.hidden = *ov.hidden;
  if (ov.seed) c.train.seed = *ov.seed;
  if (ov.optimizer) c.train.optimizer = parse_optimizer(*ov.optimizer);
  if (ov.precision) c.train.precision = parse_precision(*ov.precision);
  if (ov.alert_threshold) c.alert_threshold = *ov.alert_threshold;
  if (ov.output_dir) c.output_dir = *ov.output_dir;
  if (ov.synth_nodes) c.synth.nodes = *ov.synth_nodes;
  if (ov.synth_days) c.synth.days = *ov.synth_days;
  if (ov.synth_seed) c.synth.seed = *ov.synth_seed;
  if (ov.graph_style) c.synth.graph_style = parse_graph_style(*ov.graph_style);
  if (ov.series_style) c.synth.series_style = parse_series_style(*ov.series_style);
  if (ov.noise) c.synth.noise = *ov.noise;
  c.train.task = c.task;
  return c;
}

void print_summary(const ExperimentConfig& c, const ExperimentResult& r) {
  std::printf("model=%s scenario=%s train_snapshots=%zu test_snapshots=%zu\n", to_string(c.model),
              r.scenario.c_str(), r.train_snapshots, r.test_snapshots);
  const char* metric = c.task == Task::Regression ? "rmse" : "f1";
  std::printf("%s mean=%.6g std=%.6g min=%.6g median=%.6g max=%.6g\n", metric, r.summary.mean,
              r.summary.stddev, r.summary.min, r.summary.median, r.summary.max);
  if (!r.loss_history.empty()) {
    std::printf("final_train_loss=%.6g epochs=%zu\n", r.loss_history.back(),
                r.loss_history.size());
  }
}

int cmd_backbone(const Overrides& ov, const std::string& out_path) {
  const ExperimentConfig c = make_config(ov);
  MobilityGraph graph = c.use_synth ? generate_synthetic(c.synth).graph
                                    : load_edge_list(c.edges_path);
  const std::size_t edges_in = graph.edges().size();
  const MobilityGraph filtered =
      extract_backbone(graph, c.backbone.alpha, c.backbone.min_keep, c.backbone.criterion);
  std::string out = out_path;
  if (out.empty()) {
    fs::create_directories(c.output_dir);
    out = (fs::path(c.output_dir) / "backbone_edges.csv").string();
  }
  save_edge_list(out, filtered);
  std::printf("edges_in=%zu,edges_out=%zu,alpha=%g,min_keep=%d\n", edges_in,
              filtered.edges().size(), c.backbone.alpha, c.backbone.min_keep);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_preprocess(const Overrides& ov, const std::string& out_dir) {
  const ExperimentConfig c = make_config(ov);
  const PreparedData data = prepare_experiment_data(c);
  const auto snaps = make_snapshots(data.panel_std, c.window, c.horizon, c.windowing);
  const auto [train_snaps, test_snaps] = split_chronological(snaps, c.train_fraction);
  const auto [train_days, test_days] = split_days(data.panel_raw.days(), c.train_fraction);
  std::printf("nodes=%td days=%td edges=%zu edges_before_backbone=%td\n",
              static_cast<std::ptrdiff_t>(data.panel_raw.nodes()),
              static_cast<std::ptrdiff_t>(data.panel_raw.days()), data.graph.edges().size(),
              static_cast<std::ptrdiff_t>(data.edges_before_backbone));
  std::printf("dropped_graph_only=%zu isolated_panel_only=%zu\n",
              data.alignment.dropped_graph_only.size(),
              data.alignment.isolated_panel_only.size());
  std::printf("train_days=%td test_days=%td snapshots=%zu train=%zu test=%zu\n",
              static_cast<std::ptrdiff_t>(train_days), static_cast<std::ptrdiff_t>(test_days),
              snaps.size(), train_snaps.size(), test_snaps.size());
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    save_panel((fs::path(out_dir) / "panel_standardized.csv").string(), data.panel_std);
    if (c.task == Task::Classification) {
      PanelSeries labels;
      labels.node_ids = data.panel_raw.node_ids;
      labels.start_day = data.panel_raw.start_day;
      labels.values = data.labels.cast<double>();
      save_panel((fs::path(out_dir) / "labels.csv").string(), labels);
    }
    std::printf("wrote %s\n", out_dir.c_str());
  }
  return 0;
}

int cmd_train(const Overrides& ov) {
  const ExperimentConfig c = make_config(ov);
  const ExperimentResult r = run_experiment(c);
  print_summary(c, r);
  std::printf("wrote %s\n", c.output_dir.c_str());
  return 0;
}

int cmd_evaluate(const Overrides& ov, const std::string& checkpoint) {
  const ExperimentConfig c = make_config(ov);
  const ExperimentResult r = evaluate_checkpoint(c, checkpoint);
  print_summary(c, r);
  return 0;
}

int cmd_grid(const Overrides& ov, const GridSpec& spec) {
  const ExperimentConfig c = make_config(ov);
  const GridResult r = grid_sweep(c, spec);
  std::size_t ok = 0;
  for (const GridCell& cell : r.cells) ok += cell.ok ? 1 : 0;
  std::printf("cells=%zu ok=%zu failed=%zu\n", r.cells.size(), ok, r.cells.size() - ok);
  for (const GridCell& cell : r.cells) {
    if (!cell.ok) {
      std::fprintf(stderr, "cell w=%td h=%td failed: %s\n",
                   static_cast<std::ptrdiff_t>(cell.window),
                   static_cast<std::ptrdiff_t>(cell.horizon), cell.error.c_str());
    }
  }
  std::printf("wrote %s\n", c.output_dir.c_str());
  return ok == r.cells.size() ? 0 : 1;
}

int cmd_synth(const Overrides& ov, const std::string& out_dir) {
  const ExperimentConfig c = make_config(ov);
  const SyntheticData data = generate_synthetic(c.synth);
  const std::string dir = out_dir.empty() ? c.output_dir : out_dir;
  fs::create_directories(dir);
  save_edge_list((fs::path(dir) / "edges.csv").string(), data.graph);
  save_panel((fs::path(dir) / "panel.csv").string(), data.panel);
  save_population((fs::path(dir) / "population.csv").string(), data.populations);
  std::printf("nodes=%td days=%td edges=%zu\n", static_cast<std::ptrdiff_t>(data.panel.nodes()),
              static_cast<std::ptrdiff_t>(data.panel.days()), data.graph.edges().size());
  std::printf("wrote %s\n", dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal graph forecasting over mobility networks"};
  app.require_subcommand(1);

  Overrides ov;
  std::string out_path;
  std::string checkpoint;
  GridSpec grid;

  CLI::App* backbone = app.add_subcommand("backbone", "filter an edge list to its backbone");
  add_common_options(backbone, ov);
  backbone->add_option("--out", out_path, "output edge list path");

  CLI::App* preprocess =
      app.add_subcommand("preprocess", "align, standardize and count snapshots");
  add_common_options(preprocess, ov);
  preprocess->add_option("--out", out_path, "directory for standardized panel and labels");

  CLI::App* train = app.add_subcommand("train", "train a model and write run outputs");
  add_common_options(train, ov);

  CLI::App* evaluate = app.add_subcommand("evaluate", "score a saved checkpoint on the test split");
  add_common_options(evaluate, ov);
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint file")->required();

  CLI::App* gridcmd = app.add_subcommand("grid", "sweep window x horizon and write a heatmap");
  add_common_options(gridcmd, ov);
  gridcmd->add_option("--window-min", grid.window_min, "smallest window");
  gridcmd->add_option("--window-max", grid.window_max, "largest window");
  gridcmd->add_option("--horizon-min", grid.horizon_min, "smallest horizon");
  gridcmd->add_option("--horizon-max", grid.horizon_max, "largest horizon");
  gridcmd->add_option("--workers", grid.workers, "parallel cell workers");

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common_options(synth, ov);
  synth->add_option("--out", out_path, "directory for the generated CSV files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (backbone->parsed()) return cmd_backbone(ov, out_path);
    if (preprocess->parsed()) return cmd_preprocess(ov, out_path);
    if (train->parsed()) return cmd_train(ov);
    if (evaluate->parsed()) return cmd_evaluate(ov, checkpoint);
    if (gridcmd->parsed()) return cmd_grid(ov, grid);
    if (synth->parsed()) return cmd_synth(ov, out_path);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
