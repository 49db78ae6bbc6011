#include "stgf/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace stgf {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line_no, const std::string& message) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + message);
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& text, const std::string& path, std::size_t line_no) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end) {
    fail(path, line_no, "not a number: '" + text + "'");
  }
  return value;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t year = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = year + (m <= 2);
}

bool parse_iso_parts(const std::string& text, int& year, unsigned& month, unsigned& day) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  year = (text[0] - '0') * 1000 + (text[1] - '0') * 100 + (text[2] - '0') * 10 + (text[3] - '0');
  month = static_cast<unsigned>((text[5] - '0') * 10 + (text[6] - '0'));
  day = static_cast<unsigned>((text[8] - '0') * 10 + (text[9] - '0'));
  if (month < 1 || month > 12 || day < 1) return false;
  static constexpr unsigned lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  unsigned max_day = lengths[month - 1];
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  if (month == 2 && leap) max_day = 29;
  return day <= max_day;
}

}  // namespace

bool is_iso_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  return parse_iso_parts(text, y, m, d);
}

std::int64_t iso_to_days(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (!parse_iso_parts(text, y, m, d)) {
    throw std::invalid_argument("not an ISO date (YYYY-MM-DD): '" + text + "'");
  }
  return days_from_civil(y, m, d);
}

std::string days_to_iso(std::int64_t days) {
  std::int64_t y = 0;
  unsigned m = 0, d = 0;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02u", static_cast<long long>(y), m, d);
  return buf;
}

MobilityGraph load_edge_list(const std::string& path, bool directed) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "source,target,weight") {
    fail(path, 1, "expected header 'source,target,weight'");
  }

  std::vector<std::string> ids;
  std::unordered_map<std::string, std::int32_t> index;
  auto intern = [&](const std::string& id) {
    auto [it, inserted] = index.emplace(id, static_cast<std::int32_t>(ids.size()));
    if (inserted) ids.push_back(id);
    return it->second;
  };

  std::vector<Edge> edges;
  std::unordered_set<std::int64_t> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3) {
      fail(path, line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    }
    const std::int32_t source = intern(fields[0]);
    const std::int32_t target = intern(fields[1]);
    const double weight = parse_double(fields[2], path, line_no);
    if (!std::isfinite(weight) || weight < 0.0) {
      fail(path, line_no, "negative or non-finite weight for edge " + fields[0] + " -> " + fields[1]);
    }
    if (source == target) {
      fail(path, line_no, "self-loop at node " + fields[0]);
    }
    const std::int64_t a = directed ? source : std::min(source, target);
    const std::int64_t b = directed ? target : std::max(source, target);
    if (!seen.insert(a * (1LL << 32) + b).second) {
      fail(path, line_no, "duplicate edge " + fields[0] + " -> " + fields[1]);
    }
    if (weight == 0.0) continue;
    edges.push_back({source, target, weight});
  }
  if (ids.empty()) fail(path, line_no, "edge list declares no nodes");
  return MobilityGraph(std::move(ids), std::move(edges), directed);
}

void save_edge_list(const std::string& path, const MobilityGraph& graph) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "source,target,weight\n";
  char buf[48];
  for (const Edge& e : graph.edges()) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.weight);
    out << graph.node_ids()[static_cast<std::size_t>(e.source)] << ','
        << graph.node_ids()[static_cast<std::size_t>(e.target)] << ',' << buf << '\n';
  }
  if (!out) throw std::runtime_error("write failed for file: " + path);
}

PanelSeries load_panel(const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) fail(path, 1, "empty file");
  const auto header = split_csv(strip_cr(line));
  if (header.size() < 2) fail(path, 1, "header needs a node column and at least one date");
  std::int64_t prev_day = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (!is_iso_date(header[c])) fail(path, 1, "column " + std::to_string(c + 1) +
                                                   " is not an ISO date: '" + header[c] + "'");
    const std::int64_t day = iso_to_days(header[c]);
    if (c > 1 && day != prev_day + 1) {
      fail(path, 1, "dates must be consecutive days (gap before " + header[c] + ")");
    }
    prev_day = day;
  }
  const auto days = static_cast<Eigen::Index>(header.size() - 1);

  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      fail(path, line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                              std::to_string(fields.size()));
    }
    if (!seen.insert(fields[0]).second) {
      fail(path, line_no, "duplicate node " + fields[0]);
    }
    ids.push_back(fields[0]);
    std::vector<double> row(static_cast<std::size_t>(days));
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const double v = parse_double(fields[c], path, line_no);
      if (!std::isfinite(v)) fail(path, line_no, "non-finite value in column " + std::to_string(c + 1));
      row[c - 1] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(path, line_no, "panel has no node rows");

  PanelSeries panel;
  panel.node_ids = std::move(ids);
  panel.start_day = header[1];
  panel.values.resize(static_cast<Eigen::Index>(rows.size()), days);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index t = 0; t < days; ++t) {
      panel.values(static_cast<Eigen::Index>(i), t) = rows[i][static_cast<std::size_t>(t)];
    }
  }
  return panel;
}

void save_panel(const std::string& path, const PanelSeries& panel) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "node";
  const std::int64_t start = iso_to_days(panel.start_day);
  for (Eigen::Index t = 0; t < panel.days(); ++t) out << ',' << days_to_iso(start + t);
  out << '\n';
  char buf[48];
  for (Eigen::Index i = 0; i < panel.nodes(); ++i) {
    out << panel.node_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < panel.days(); ++t) {
      std::snprintf(buf, sizeof(buf), "%.17g", panel.values(i, t));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for file: " + path);
}

PopulationTable load_population(const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "node,population") {
    fail(path, 1, "expected header 'node,population'");
  }
  PopulationTable table;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2) {
      fail(path, line_no, "expected 2 fields, got " + std::to_string(fields.size()));
    }
    if (!seen.insert(fields[0]).second) fail(path, line_no, "duplicate node " + fields[0]);
    const double population = parse_double(fields[1], path, line_no);
    if (!std::isfinite(population) || population <= 0.0) {
      fail(path, line_no, "population must be positive for node " + fields[0]);
    }
    table.node_ids.push_back(fields[0]);
    table.population.push_back(population);
  }
  if (table.node_ids.empty()) fail(path, line_no, "population table has no rows");
  return table;
}

void save_population(const std::string& path, const PopulationTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "node,population\n";
  char buf[48];
  for (std::size_t i = 0; i < table.node_ids.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", table.population[i]);
    out << table.node_ids[i] << ',' << buf << '\n';
  }
  if (!out) throw std::runtime_error("write failed for file: " + path);
}

AlignedData align(const MobilityGraph& graph, const PanelSeries& panel) {
  std::unordered_map<std::string, Eigen::Index> panel_index;
  for (std::size_t i = 0; i < panel.node_ids.size(); ++i) {
    panel_index.emplace(panel.node_ids[i], static_cast<Eigen::Index>(i));
  }
  std::unordered_set<std::string> graph_ids(graph.node_ids().begin(), graph.node_ids().end());

  AlignedData out;
  std::vector<std::string> final_ids;
  std::vector<std::int32_t> old_to_new(graph.node_ids().size(), -1);
  for (std::size_t i = 0; i < graph.node_ids().size(); ++i) {
    const std::string& id = graph.node_ids()[i];
    if (panel_index.count(id) != 0) {
      old_to_new[i] = static_cast<std::int32_t>(final_ids.size());
      final_ids.push_back(id);
    } else {
      out.report.dropped_graph_only.push_back(id);
    }
  }
  for (const std::string& id : panel.node_ids) {
    if (graph_ids.count(id) == 0) {
      out.report.isolated_panel_only.push_back(id);
      final_ids.push_back(id);
    }
  }

  std::vector<Edge> edges;
  for (const Edge& e : graph.edges()) {
    const std::int32_t s = old_to_new[static_cast<std::size_t>(e.source)];
    const std::int32_t t = old_to_new[static_cast<std::size_t>(e.target)];
    if (s >= 0 && t >= 0) edges.push_back({s, t, e.weight});
  }

  PanelSeries reordered;
  reordered.node_ids = final_ids;
  reordered.start_day = panel.start_day;
  reordered.values.resize(static_cast<Eigen::Index>(final_ids.size()), panel.days());
  for (std::size_t i = 0; i < final_ids.size(); ++i) {
    reordered.values.row(static_cast<Eigen::Index>(i)) =
        panel.values.row(panel_index.at(final_ids[i]));
  }

  out.graph = MobilityGraph(std::move(final_ids), std::move(edges), graph.directed());
  out.panel = std::move(reordered);
  return out;
}

RawInflowSeries load_raw_inflows(const std::string& directory) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.path().extension() == ".csv" && is_iso_date(entry.path().stem().string())) {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    throw std::runtime_error("no inflow matrices (YYYY-MM-DD.csv) in " + directory);
  }
  std::sort(files.begin(), files.end());

  RawInflowSeries series;
  for (const auto& file : files) {
    const std::string path = file.string();
    auto in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) fail(path, 1, "empty file");
    auto header = split_csv(strip_cr(line));
    if (header.size() < 2) fail(path, 1, "header needs at least one origin column");
    std::vector<std::string> origins(header.begin() + 1, header.end());

    if (series.node_ids.empty()) {
      series.node_ids = origins;
    } else if (series.node_ids != origins) {
      fail(path, 1, "origin columns differ from the first day's matrix");
    }
    const auto n = static_cast<Eigen::Index>(series.node_ids.size());
    std::unordered_map<std::string, Eigen::Index> index;
    for (std::size_t i = 0; i < series.node_ids.size(); ++i) {
      index.emplace(series.node_ids[i], static_cast<Eigen::Index>(i));
    }

    std::vector<Eigen::Triplet<double>> triplets;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      line = strip_cr(line);
      if (line.empty()) continue;
      const auto fields = split_csv(line);
      if (fields.size() != header.size()) {
        fail(path, line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                std::to_string(fields.size()));
      }
      const auto it = index.find(fields[0]);
      if (it == index.end()) fail(path, line_no, "unknown destination " + fields[0]);
      if (!seen.insert(fields[0]).second) fail(path, line_no, "duplicate destination " + fields[0]);
      const Eigen::Index dest = it->second;
      double row_sum = 0.0;
      int nonzero = 0;
      for (std::size_t c = 1; c < fields.size(); ++c) {
        const double rate = parse_double(fields[c], path, line_no);
        if (rate == 0.0) continue;
        if (!(rate > 0.0) || rate > 1.0) {
          fail(path, line_no, "inflow rate outside [0,1] in column " + std::to_string(c + 1));
        }
        row_sum += rate;
        ++nonzero;
        triplets.emplace_back(dest, static_cast<Eigen::Index>(c - 1), rate);
      }
      if (nonzero > 100) {
        fail(path, line_no, "destination " + fields[0] + " has " + std::to_string(nonzero) +
                                " origins, at most 100 allowed");
      }
      if (row_sum > 1.0 + 1e-9) {
        fail(path, line_no, "inflow rates for " + fields[0] + " sum above 1");
      }
    }

    Eigen::SparseMatrix<double> day(n, n);
    day.setFromTriplets(triplets.begin(), triplets.end());
    series.days.push_back(file.stem().string());
    series.daily.push_back(std::move(day));
  }
  return series;
}

MobilityGraph aggregate_inflows(const RawInflowSeries& daily, const std::string& first_day,
                                const std::string& last_day,
                                const std::vector<std::string>* keep_nodes) {
  iso_to_days(first_day);
  iso_to_days(last_day);
  if (last_day < first_day) throw std::invalid_argument("empty date range: last day before first");

  std::vector<std::size_t> selected;
  for (std::size_t d = 0; d < daily.days.size(); ++d) {
    if (daily.days[d] >= first_day && daily.days[d] <= last_day) selected.push_back(d);
  }
  if (selected.empty()) {
    throw std::invalid_argument("empty date range: no inflow days in [" + first_day + ", " +
                                last_day + "]");
  }

  struct Flow {
    Eigen::Index origin;
    Eigen::Index dest;
    double rate;
  };
  std::vector<Flow> flows;
  for (std::size_t d : selected) {
    const auto& m = daily.daily[d];
    for (int outer = 0; outer < m.outerSize(); ++outer) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(m, outer); it; ++it) {
        flows.push_back({it.col(), it.row(), it.value()});
      }
    }
  }
  std::sort(flows.begin(), flows.end(), [](const Flow& a, const Flow& b) {
    return a.origin != b.origin ? a.origin < b.origin : a.dest < b.dest;
  });

  std::vector<std::string> ids = keep_nodes != nullptr ? *keep_nodes : daily.node_ids;
  std::vector<std::int32_t> remap(daily.node_ids.size(), -1);
  if (keep_nodes != nullptr) {
    std::unordered_map<std::string, std::int32_t> keep_index;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      keep_index.emplace(ids[i], static_cast<std::int32_t>(i));
    }
    for (std::size_t i = 0; i < daily.node_ids.size(); ++i) {
      const auto it = keep_index.find(daily.node_ids[i]);
      if (it != keep_index.end()) remap[i] = it->second;
    }
  } else {
    for (std::size_t i = 0; i < remap.size(); ++i) remap[i] = static_cast<std::int32_t>(i);
  }

  const auto day_count = static_cast<double>(selected.size());
  std::vector<Edge> edges;
  std::size_t k = 0;
  while (k < flows.size()) {
    std::size_t j = k;
    double total = 0.0;
    while (j < flows.size() && flows[j].origin == flows[k].origin && flows[j].dest == flows[k].dest) {
      total += flows[j].rate;
      ++j;
    }
    const std::int32_t source = remap[static_cast<std::size_t>(flows[k].origin)];
    const std::int32_t target = remap[static_cast<std::size_t>(flows[k].dest)];
    const double mean = total / day_count;
    if (source >= 0 && target >= 0 && source != target && mean > 0.0) {
      edges.push_back({source, target, mean});
    }
    k = j;
  }
  return MobilityGraph(std::move(ids), std::move(edges), true);
}

}  // namespace stgf
