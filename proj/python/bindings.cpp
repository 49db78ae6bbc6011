// Python bindings for the forecasting core. Graphs, panels and metrics map
// to small classes; experiment configs cross the boundary as JSON text so the
// schema matches the CLI's config files exactly.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "stgf/experiment.hpp"

namespace py = pybind11;
using namespace stgf;

namespace {

std::vector<Edge> edges_from_tuples(const std::vector<std::tuple<int, int, double>>& tuples) {
  std::vector<Edge> edges;
  edges.reserve(tuples.size());
  for (const auto& [source, target, weight] : tuples) {
    edges.push_back({source, target, weight});
  }
  return edges;
}

std::vector<std::tuple<int, int, double>> edges_to_tuples(const MobilityGraph& graph) {
  std::vector<std::tuple<int, int, double>> tuples;
  tuples.reserve(graph.edge_count());
  for (const Edge& e : graph.edges()) {
    tuples.emplace_back(e.source, e.target, e.weight);
  }
  return tuples;
}

py::dict summary_dict(const SummaryStats& s) {
  py::dict d;
  d["mean"] = s.mean;
  d["std"] = s.stddev;
  d["min"] = s.min;
  d["max"] = s.max;
  d["q1"] = s.q1;
  d["median"] = s.median;
  d["q3"] = s.q3;
  return d;
}

py::dict result_dict(const ExperimentResult& r) {
  py::dict d;
  d["scores"] = r.scores;
  d["summary"] = summary_dict(r.summary);
  d["loss_history"] = r.loss_history;
  d["train_snapshots"] = r.train_snapshots;
  d["test_snapshots"] = r.test_snapshots;
  d["scenario"] = r.scenario;
  return d;
}

}  // namespace

PYBIND11_MODULE(_stgf, m) {
  m.doc() = "Forecasting on mobility graphs: disparity backbones, windowed "
            "panels, recurrent graph models and their evaluation";

  py::class_<MobilityGraph>(m, "MobilityGraph")
      .def(py::init([](std::vector<std::string> node_ids,
                       const std::vector<std::tuple<int, int, double>>& edges, bool directed) {
             return MobilityGraph(std::move(node_ids), edges_from_tuples(edges), directed);
           }),
           py::arg("node_ids"), py::arg("edges"), py::arg("directed") = true)
      .def_property_readonly("node_count", &MobilityGraph::node_count)
      .def_property_readonly("edge_count", &MobilityGraph::edge_count)
      .def_property_readonly("node_ids",
                             [](const MobilityGraph& g) { return g.node_ids(); })
      .def_property_readonly("edges", &edges_to_tuples)
      .def_property_readonly("directed", &MobilityGraph::directed)
      .def("__repr__", [](const MobilityGraph& g) {
        return "MobilityGraph(nodes=" + std::to_string(g.node_count()) +
               ", edges=" + std::to_string(g.edge_count()) + ")";
      });

  py::class_<PanelSeries>(m, "PanelSeries")
      .def(py::init([](Eigen::MatrixXd values, std::vector<std::string> node_ids,
                       std::string start_day) {
             PanelSeries p;
             p.values = std::move(values);
             p.node_ids = std::move(node_ids);
             p.start_day = std::move(start_day);
             return p;
           }),
           py::arg("values"), py::arg("node_ids"), py::arg("start_day") = "2020-01-01")
      .def_readwrite("values", &PanelSeries::values)
      .def_readwrite("node_ids", &PanelSeries::node_ids)
      .def_readwrite("start_day", &PanelSeries::start_day)
      .def_property_readonly("nodes", &PanelSeries::nodes)
      .def_property_readonly("days", &PanelSeries::days)
      .def("__repr__", [](const PanelSeries& p) {
        return "PanelSeries(nodes=" + std::to_string(p.nodes()) +
               ", days=" + std::to_string(p.days()) + ", start_day='" + p.start_day + "')";
      });

  py::class_<PopulationTable>(m, "PopulationTable")
      .def(py::init([](std::vector<std::string> node_ids, std::vector<double> population) {
             PopulationTable t;
             t.node_ids = std::move(node_ids);
             t.population = std::move(population);
             return t;
           }),
           py::arg("node_ids"), py::arg("population"))
      .def_readwrite("node_ids", &PopulationTable::node_ids)
      .def_readwrite("population", &PopulationTable::population)
      .def("aligned", &PopulationTable::aligned, py::arg("order"));

  py::class_<StandardizationParams>(m, "StandardizationParams")
      .def_readonly("mu", &StandardizationParams::mu)
      .def_readonly("sigma", &StandardizationParams::sigma)
      .def_readonly("fit_begin", &StandardizationParams::fit_begin)
      .def_readonly("fit_end", &StandardizationParams::fit_end);

  py::class_<Snapshot>(m, "Snapshot")
      .def_readonly("anchor", &Snapshot::anchor)
      .def_readonly("window", &Snapshot::window)
      .def_readonly("horizon", &Snapshot::horizon)
      .def("__repr__", [](const Snapshot& s) {
        return "Snapshot(anchor=" + std::to_string(s.anchor) +
               ", window=" + std::to_string(s.window) +
               ", horizon=" + std::to_string(s.horizon) + ")";
      });

  py::class_<ClassificationScores>(m, "ClassificationScores")
      .def_readonly("true_positives", &ClassificationScores::true_positives)
      .def_readonly("false_positives", &ClassificationScores::false_positives)
      .def_readonly("false_negatives", &ClassificationScores::false_negatives)
      .def_readonly("true_negatives", &ClassificationScores::true_negatives)
      .def_readonly("precision", &ClassificationScores::precision)
      .def_readonly("recall", &ClassificationScores::recall)
      .def_readonly("f1", &ClassificationScores::f1)
      .def_readonly("accuracy", &ClassificationScores::accuracy);

  // Graph operations.
  m.def("node_stats", [](const MobilityGraph& graph) {
    py::list out;
    for (const NodeStats& s : node_stats(graph)) {
      py::dict d;
      d["out_degree"] = s.out_degree;
      d["out_strength"] = s.out_strength;
      d["in_degree"] = s.in_degree;
      d["in_strength"] = s.in_strength;
      out.append(d);
    }
    return out;
  }, py::arg("graph"), "Per-node degree and strength counts, in node order.");
  m.def("disparity_pvalue", &disparity_pvalue, py::arg("weight"), py::arg("degree"),
        py::arg("strength"),
        "Probability that an edge of the given weight arises from a uniform "
        "spread of the node's strength across its degree.");
  m.def("extract_backbone",
        [](const MobilityGraph& graph, double alpha, std::size_t min_keep,
           const std::string& criterion) {
          return extract_backbone(graph, alpha, min_keep, parse_criterion(criterion));
        },
        py::arg("graph"), py::arg("alpha"), py::arg("min_keep") = 5,
        py::arg("criterion") = "smallest",
        "Disparity-filter backbone; keeps edges whose combined endpoint "
        "p-value beats alpha, then restores each node's min_keep heaviest "
        "outgoing edges.");
  m.def("propagation_matrix",
        [](const MobilityGraph& graph) { return propagation_matrix(graph).values; },
        py::arg("graph"),
        "Symmetrically normalized adjacency with self-loops, as a scipy "
        "sparse matrix.");

  // Panel operations.
  m.def("fit_zscore", &fit_zscore, py::arg("panel"), py::arg("fit_begin"), py::arg("fit_end"));
  m.def("apply_zscore", &apply_zscore, py::arg("panel"), py::arg("params"));
  m.def("invert_zscore", &invert_zscore, py::arg("panel"), py::arg("params"));
  m.def("make_snapshots",
        [](const PanelSeries& panel, Eigen::Index window, Eigen::Index horizon,
           const std::string& mode) {
          return make_snapshots(panel, window, horizon, parse_windowing(mode));
        },
        py::arg("panel"), py::arg("window"), py::arg("horizon"), py::arg("mode") = "sliding");
  m.def("window_of", &window_of, py::arg("panel"), py::arg("snapshot"));
  m.def("target_of", &target_of, py::arg("panel"), py::arg("snapshot"));
  m.def("split_chronological", &split_chronological, py::arg("snapshots"),
        py::arg("train_fraction"));
  m.def("moving_average", &moving_average, py::arg("panel"), py::arg("width") = 7);
  m.def("classification_targets", &classification_targets, py::arg("panel"),
        py::arg("populations"), py::arg("threshold") = 10.0,
        "Binary Stable/Alert labels per (node, day) from the trailing 7-day "
        "per-100k average times its trend slope.");

  // Loaders and the synthetic generator.
  m.def("load_edge_list", &load_edge_list, py::arg("path"), py::arg("directed") = true);
  m.def("save_edge_list", &save_edge_list, py::arg("path"), py::arg("graph"));
  m.def("load_panel", &load_panel, py::arg("path"));
  m.def("save_panel", &save_panel, py::arg("path"), py::arg("panel"));
  m.def("load_population", &load_population, py::arg("path"));
  m.def("generate_synthetic",
        [](Eigen::Index nodes, Eigen::Index days, std::uint64_t seed,
           const std::string& graph_style, const std::string& series_style, double noise) {
          SynthSpec spec{nodes, days, seed, parse_graph_style(graph_style),
                         parse_series_style(series_style), noise};
          SyntheticData data = generate_synthetic(spec);
          return py::make_tuple(std::move(data.graph), std::move(data.panel),
                                std::move(data.populations));
        },
        py::arg("nodes") = 20, py::arg("days") = 400, py::arg("seed") = 1,
        py::arg("graph_style") = "community", py::arg("series_style") = "seasonal",
        py::arg("noise") = 0.1,
        "Deterministic synthetic (graph, panel, populations) triple; equal "
        "arguments give byte-identical output on any platform.");

  // Metrics.
  m.def("rmse", &rmse, py::arg("prediction"), py::arg("truth"));
  m.def("quantile",
        [](const std::vector<double>& values, double p) {
          return quantile(std::span<const double>(values), p);
        },
        py::arg("values"), py::arg("p"));
  m.def("summarize",
        [](const std::vector<double>& values) {
          return summary_dict(summarize(std::span<const double>(values)));
        },
        py::arg("values"));
  m.def("classification_scores",
        [](const std::vector<int>& predicted, const std::vector<int>& actual) {
          return classification_scores(std::span<const int>(predicted),
                                       std::span<const int>(actual));
        },
        py::arg("predicted"), py::arg("actual"));

  // Experiments; configs are JSON text in the CLI's config schema.
  m.def("default_config_json",
        [] { return experiment_config_to_json(ExperimentConfig{}); },
        "Canonical JSON form of the default experiment configuration.");
  m.def("load_experiment_config",
        [](const std::string& path) {
          return experiment_config_to_json(load_experiment_config(path));
        },
        py::arg("path"),
        "Reads a config file or a manifest embedding one; returns canonical "
        "JSON text.");
  m.def("config_hash",
        [](const std::string& text) { return config_hash(experiment_config_from_json(text)); },
        py::arg("config_json"));
  m.def("validate_config",
        [](const std::string& text) { validate_config(experiment_config_from_json(text)); },
        py::arg("config_json"));
  m.def("run_experiment",
        [](const std::string& text) {
          const ExperimentConfig config = experiment_config_from_json(text);
          ExperimentResult result;
          {
            py::gil_scoped_release release;
            result = run_experiment(config);
          }
          return result_dict(result);
        },
        py::arg("config_json"),
        "Full pipeline: prepare, train, evaluate, then write metrics.csv, "
        "predictions.csv, model.ckpt and manifest.json into output_dir.");
  m.def("evaluate_checkpoint",
        [](const std::string& text, const std::string& checkpoint_path) {
          const ExperimentConfig config = experiment_config_from_json(text);
          ExperimentResult result;
          {
            py::gil_scoped_release release;
            result = evaluate_checkpoint(config, checkpoint_path);
          }
          return result_dict(result);
        },
        py::arg("config_json"), py::arg("checkpoint_path"),
        "Test-split evaluation of a saved checkpoint, no training.");
}
