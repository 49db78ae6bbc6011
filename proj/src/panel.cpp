#include "stgf/panel.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace stgf {

namespace {

Eigen::Index checked_count(double fraction, Eigen::Index total) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie strictly between 0 and 1");
  }
  // The tiny slack keeps an exact product like 0.8 * 1095 from being pushed
  // over the next integer by floating-point noise.
  auto count = static_cast<Eigen::Index>(std::ceil(fraction * static_cast<double>(total) - 1e-9));
  if (count < 0) count = 0;
  if (count > total) count = total;
  return count;
}

void check_params(const PanelSeries& panel, const StandardizationParams& params) {
  if (params.mu.size() != panel.nodes() || params.sigma.size() != panel.nodes()) {
    throw std::invalid_argument("standardization parameters sized for a different node set");
  }
}

}  // namespace

Eigen::VectorXd PopulationTable::aligned(const std::vector<std::string>& order) const {
  if (node_ids.size() != population.size()) {
    throw std::invalid_argument("population table ids and values differ in length");
  }
  std::unordered_map<std::string, double> by_id;
  by_id.reserve(node_ids.size());
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    by_id[node_ids[i]] = population[i];
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto it = by_id.find(order[i]);
    if (it == by_id.end()) {
      throw std::invalid_argument("population missing for node " + order[i]);
    }
    if (!(it->second > 0.0)) {
      throw std::invalid_argument("population must be positive for node " + order[i]);
    }
    out[static_cast<Eigen::Index>(i)] = it->second;
  }
  return out;
}

StandardizationParams fit_zscore(const PanelSeries& panel, Eigen::Index fit_begin,
                                 Eigen::Index fit_end) {
  if (fit_begin < 0 || fit_end > panel.days() || fit_end - fit_begin < 2) {
    throw std::invalid_argument("z-score fit range needs at least 2 days within the panel");
  }
  const auto n = static_cast<double>(fit_end - fit_begin);
  StandardizationParams params;
  params.fit_begin = fit_begin;
  params.fit_end = fit_end;
  auto block = panel.values.middleCols(fit_begin, fit_end - fit_begin);
  params.mu = block.rowwise().mean();
  Eigen::VectorXd var = (block.colwise() - params.mu).array().square().rowwise().sum() / n;
  params.sigma = var.array().sqrt();
  for (Eigen::Index i = 0; i < params.sigma.size(); ++i) {
    if (params.sigma[i] == 0.0) params.sigma[i] = 1.0;
  }
  return params;
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& values, const StandardizationParams& params) {
  if (values.rows() != params.mu.size()) {
    throw std::invalid_argument("standardization parameters sized for a different node set");
  }
  return ((values.colwise() - params.mu).array().colwise() / params.sigma.array()).matrix();
}

Eigen::MatrixXd destandardize(const Eigen::MatrixXd& values, const StandardizationParams& params) {
  if (values.rows() != params.mu.size()) {
    throw std::invalid_argument("standardization parameters sized for a different node set");
  }
  return ((values.array().colwise() * params.sigma.array()).matrix().colwise() + params.mu);
}

PanelSeries apply_zscore(const PanelSeries& panel, const StandardizationParams& params) {
  check_params(panel, params);
  PanelSeries out = panel;
  out.values = standardize(panel.values, params);
  return out;
}

PanelSeries invert_zscore(const PanelSeries& panel, const StandardizationParams& params) {
  check_params(panel, params);
  PanelSeries out = panel;
  out.values = destandardize(panel.values, params);
  return out;
}

std::vector<Snapshot> make_snapshots(const PanelSeries& panel, Eigen::Index window,
                                     Eigen::Index horizon, WindowingMode mode) {
  if (window < 1 || horizon < 1) {
    throw std::invalid_argument("window and horizon must be at least 1");
  }
  const Eigen::Index days = panel.days();
  const Eigen::Index block = window + horizon;
  if (days < block) {
    throw std::invalid_argument("panel has fewer days than window + horizon");
  }
  std::vector<Snapshot> snaps;
  if (mode == WindowingMode::Sliding) {
    snaps.reserve(static_cast<std::size_t>(days - block + 1));
    for (Eigen::Index anchor = window - 1; anchor + horizon < days; ++anchor) {
      snaps.push_back({anchor, window, horizon});
    }
  } else {
    const Eigen::Index blocks = days / block;
    snaps.reserve(static_cast<std::size_t>(blocks));
    for (Eigen::Index k = 0; k < blocks; ++k) {
      snaps.push_back({k * block + window - 1, window, horizon});
    }
  }
  return snaps;
}

Eigen::MatrixXd window_of(const PanelSeries& panel, const Snapshot& snap) {
  if (snap.first_input_day() < 0 || snap.anchor >= panel.days()) {
    throw std::out_of_range("snapshot window out of panel bounds");
  }
  return panel.values.middleCols(snap.first_input_day(), snap.window);
}

Eigen::MatrixXd target_of(const PanelSeries& panel, const Snapshot& snap) {
  if (snap.first_input_day() < 0 || snap.last_target_day() >= panel.days()) {
    throw std::out_of_range("snapshot target out of panel bounds");
  }
  return panel.values.middleCols(snap.anchor + 1, snap.horizon);
}

std::pair<std::vector<Snapshot>, std::vector<Snapshot>> split_chronological(
    const std::vector<Snapshot>& snapshots, double train_fraction) {
  if (snapshots.empty()) {
    throw std::invalid_argument("cannot split an empty snapshot list");
  }
  const auto total = static_cast<Eigen::Index>(snapshots.size());
  const auto train_count = checked_count(train_fraction, total);
  std::vector<Snapshot> train(snapshots.begin(), snapshots.begin() + train_count);
  std::vector<Snapshot> test(snapshots.begin() + train_count, snapshots.end());
  return {std::move(train), std::move(test)};
}

std::pair<Eigen::Index, Eigen::Index> split_days(Eigen::Index days, double train_fraction) {
  const auto train_days = checked_count(train_fraction, days);
  return {train_days, days - train_days};
}

PanelSeries moving_average(const PanelSeries& panel, int width) {
  if (width < 1) {
    throw std::invalid_argument("moving average width must be at least 1");
  }
  PanelSeries out = panel;
  const Eigen::Index days = panel.days();
  for (Eigen::Index t = 0; t < days; ++t) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - width + 1);
    const Eigen::Index span = t - lo + 1;
    out.values.col(t) = panel.values.middleCols(lo, span).rowwise().mean();
  }
  return out;
}

double trend_slope(std::span<const double> series) {
  const auto n = static_cast<Eigen::Index>(series.size());
  if (n < 2) return 0.0;
  const double x_mean = static_cast<double>(n - 1) / 2.0;
  double y_mean = 0.0;
  for (double y : series) y_mean += y;
  y_mean /= static_cast<double>(n);
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    num += dx * (series[static_cast<std::size_t>(i)] - y_mean);
    den += dx * dx;
  }
  return num / den;
}

Eigen::MatrixXi classification_targets(const PanelSeries& panel,
                                       const PopulationTable& populations,
                                       double threshold) {
  const Eigen::VectorXd pop = populations.aligned(panel.node_ids);
  const PanelSeries ma = moving_average(panel, 7);
  const Eigen::Index nodes = panel.nodes();
  const Eigen::Index days = panel.days();

  Eigen::MatrixXd per100k(nodes, days);
  for (Eigen::Index i = 0; i < nodes; ++i) {
    per100k.row(i) = ma.values.row(i) / (pop[i] / 1e5);
  }

  Eigen::MatrixXi labels(nodes, days);
  std::vector<double> slice;
  slice.reserve(7);
  for (Eigen::Index i = 0; i < nodes; ++i) {
    for (Eigen::Index t = 0; t < days; ++t) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, t - 6);
      slice.clear();
      for (Eigen::Index u = lo; u <= t; ++u) slice.push_back(per100k(i, u));
      const double metric = per100k(i, t) * trend_slope(slice);
      labels(i, t) = metric > threshold ? kAlertLabel : kStableLabel;
    }
  }
  return labels;
}

Eigen::VectorXi label_target_of(const Eigen::MatrixXi& labels, const Snapshot& snap) {
  const Eigen::Index day = snap.last_target_day();
  if (day < 0 || day >= labels.cols()) {
    throw std::out_of_range("snapshot target out of label bounds");
  }
  return labels.col(day);
}

}  // namespace stgf
