#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

#include "stgf/graph.hpp"
#include "stgf/panel.hpp"

namespace stgf {

/// Calendar helpers for ISO dates (YYYY-MM-DD, proleptic Gregorian).
bool is_iso_date(const std::string& text);
std::int64_t iso_to_days(const std::string& text);  // days since 1970-01-01
std::string days_to_iso(std::int64_t days);

/// Edge-list CSV with header `source,target,weight`; node identifiers are
/// arbitrary strings mapped to indices in first-appearance order.
MobilityGraph load_edge_list(const std::string& path, bool directed = true);
void save_edge_list(const std::string& path, const MobilityGraph& graph);

/// Panel CSV: first column the node identifier, remaining header cells
/// consecutive ISO dates, cells daily new case counts.
PanelSeries load_panel(const std::string& path);
void save_panel(const std::string& path, const PanelSeries& panel);

/// Population CSV with header `node,population`.
PopulationTable load_population(const std::string& path);
void save_population(const std::string& path, const PopulationTable& table);

/// Node-universe reconciliation: the output order is the graph's order
/// restricted to nodes that have a series, followed by series-only nodes,
/// which stay as isolated vertices. Graph nodes without a series are dropped
/// and reported.
struct AlignmentReport {
  std::vector<std::string> dropped_graph_only;
  std::vector<std::string> isolated_panel_only;
};

struct AlignedData {
  MobilityGraph graph;
  PanelSeries panel;
  AlignmentReport report;
};

AlignedData align(const MobilityGraph& graph, const PanelSeries& panel);

/// Daily origin-destination inflow rates: one sparse matrix per day with
/// rate(destination, origin) in [0,1], at most 100 nonzero origins per
/// destination, per-destination row sums at most 1.
struct RawInflowSeries {
  std::vector<std::string> node_ids;
  std::vector<std::string> days;  // ISO dates, strictly increasing
  std::vector<Eigen::SparseMatrix<double>> daily;
};

/// Loads every `YYYY-MM-DD.csv` matrix inside a directory. Each file: header
/// row of origin identifiers (first cell ignored), one row per destination.
RawInflowSeries load_raw_inflows(const std::string& directory);

/// Static mobility graph whose edge weight is the arithmetic mean of the
/// daily inflow rate over [first_day, last_day], days with no flow counting
/// as zero. Zero-mean edges are dropped. When keep_nodes is given the graph
/// is restricted to those nodes, in that order.
MobilityGraph aggregate_inflows(const RawInflowSeries& daily, const std::string& first_day,
                                const std::string& last_day,
                                const std::vector<std::string>* keep_nodes = nullptr);

enum class GraphStyle { Ring, Community, Random };
enum class SeriesStyle { Seasonal, Linear, SeparableTwoClass };

const char* to_string(GraphStyle s);
const char* to_string(SeriesStyle s);
GraphStyle parse_graph_style(const std::string& name);
SeriesStyle parse_series_style(const std::string& name);

struct SynthSpec {
  Eigen::Index nodes = 20;
  Eigen::Index days = 400;
  std::uint64_t seed = 1;
  GraphStyle graph_style = GraphStyle::Community;
  SeriesStyle series_style = SeriesStyle::Seasonal;
  double noise = 0.1;
};

struct SyntheticData {
  MobilityGraph graph;
  PanelSeries panel;
  PopulationTable populations;
};

/// Deterministic desk-scale dataset generator; every draw comes from the
/// portable generator seeded by spec.seed, so equal specs give byte-identical
/// output on any platform.
SyntheticData generate_synthetic(const SynthSpec& spec);

}  // namespace stgf
