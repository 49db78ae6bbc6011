#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stgf {

/// Per-node daily time series: values(i, t) is the count reported by node i
/// on day t. Row order must match the graph's node order once aligned.
struct PanelSeries {
  Eigen::MatrixXd values;  // N x T
  std::vector<std::string> node_ids;
  std::string start_day;  // ISO date of column 0

  Eigen::Index nodes() const { return values.rows(); }
  Eigen::Index days() const { return values.cols(); }
};

struct PopulationTable {
  std::vector<std::string> node_ids;
  std::vector<double> population;  // > 0, same length as node_ids

  /// Populations reordered to the given node order; throws on a missing or
  /// non-positive entry.
  Eigen::VectorXd aligned(const std::vector<std::string>& order) const;
};

/// Per-node z-score parameters fitted on a day range [fit_begin, fit_end).
/// Constant series get sigma = 1 so they standardize to zero.
struct StandardizationParams {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
  Eigen::Index fit_begin = 0;
  Eigen::Index fit_end = 0;
};

StandardizationParams fit_zscore(const PanelSeries& panel, Eigen::Index fit_begin,
                                 Eigen::Index fit_end);

PanelSeries apply_zscore(const PanelSeries& panel, const StandardizationParams& params);
PanelSeries invert_zscore(const PanelSeries& panel, const StandardizationParams& params);

/// Columnwise transforms for arbitrary per-node matrices (predictions etc.).
Eigen::MatrixXd standardize(const Eigen::MatrixXd& values, const StandardizationParams& params);
Eigen::MatrixXd destandardize(const Eigen::MatrixXd& values, const StandardizationParams& params);

/// One supervised example: the window covers days [anchor-window+1, anchor],
/// the target days [anchor+1, anchor+horizon]. Stored as indices into the
/// panel; snapshots are views, never copies.
struct Snapshot {
  Eigen::Index anchor = 0;
  Eigen::Index window = 1;
  Eigen::Index horizon = 1;

  Eigen::Index first_input_day() const { return anchor - window + 1; }
  Eigen::Index last_target_day() const { return anchor + horizon; }
};

enum class WindowingMode { Sliding, Segmented };

/// Sliding mode yields T-l-F+1 snapshots with stride 1; segmented mode tiles
/// the panel into floor(T/(l+F)) non-overlapping blocks of length l+F.
std::vector<Snapshot> make_snapshots(const PanelSeries& panel, Eigen::Index window,
                                     Eigen::Index horizon, WindowingMode mode);

Eigen::MatrixXd window_of(const PanelSeries& panel, const Snapshot& snap);
Eigen::MatrixXd target_of(const PanelSeries& panel, const Snapshot& snap);

/// First ceil(train_fraction * count) snapshots train, the rest test. Order
/// preserved, no shuffling.
std::pair<std::vector<Snapshot>, std::vector<Snapshot>> split_chronological(
    const std::vector<Snapshot>& snapshots, double train_fraction);

/// Day-count split used for the standardization fit range:
/// ceil(train_fraction * T) training days.
std::pair<Eigen::Index, Eigen::Index> split_days(Eigen::Index days, double train_fraction);

/// Trailing moving average; days earlier than width use the available prefix.
PanelSeries moving_average(const PanelSeries& panel, int width = 7);

/// Ordinary least squares slope of y against day indices 0..n-1. The alert
/// metric feeds it trailing 7-day slices.
double trend_slope(std::span<const double> series);

inline constexpr int kStableLabel = 0;
inline constexpr int kAlertLabel = 1;

/// Binary Stable/Alert labels per (node, day). The metric is the trailing
/// 7-day moving average per 100k inhabitants multiplied by the OLS trend
/// slope of that same per-100k series over the trailing 7 days; Alert iff
/// metric > threshold. Labels come from raw counts, never standardized ones.
Eigen::MatrixXi classification_targets(const PanelSeries& panel,
                                       const PopulationTable& populations,
                                       double threshold = 10.0);

/// Label slice for a classification snapshot: the per-node label on the
/// final horizon day.
Eigen::VectorXi label_target_of(const Eigen::MatrixXi& labels, const Snapshot& snap);

}  // namespace stgf
