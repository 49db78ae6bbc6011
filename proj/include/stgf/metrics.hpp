#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

namespace stgf {

/// Root mean squared error pooled over every entry of the two matrices
/// (all nodes, all horizon days of one snapshot).
double rmse(const Eigen::MatrixXd& prediction, const Eigen::MatrixXd& truth);

/// One RMSE per snapshot, in input order. The distribution of these values
/// over a test split is what the summary statistics describe.
Eigen::VectorXd rmse_per_timestamp(const std::vector<Eigen::MatrixXd>& predictions,
                                   const std::vector<Eigen::MatrixXd>& truths);

struct SummaryStats {
  double mean = 0.0;
  double stddev = 0.0;  // population form, divisor n
  double min = 0.0;
  double max = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Quantile with linear interpolation between order statistics,
/// h = (n - 1) * p. Input need not be sorted.
double quantile(std::span<const double> values, double p);

SummaryStats summarize(std::span<const double> values);
SummaryStats summarize(const Eigen::VectorXd& values);

struct ClassificationScores {
  long true_positives = 0;
  long false_positives = 0;
  long false_negatives = 0;
  long true_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};

/// Binary scores with the Alert label (1) as the positive class. Ratios with
/// a zero denominator are reported as 0.
ClassificationScores classification_scores(const Eigen::VectorXi& predicted,
                                           const Eigen::VectorXi& actual);
ClassificationScores classification_scores(std::span<const int> predicted,
                                           std::span<const int> actual);

struct MetricsRow {
  std::string model;
  std::string scenario;
  SummaryStats stats;
};

/// Accumulates rows and renders them as CSV with the column order
/// model,scenario,mean,std,min,max,q1,median,q3.
class MetricsTable {
 public:
  void add(std::string model, std::string scenario, const SummaryStats& stats);
  const std::vector<MetricsRow>& rows() const { return rows_; }
  std::string to_csv() const;

 private:
  std::vector<MetricsRow> rows_;
};

}  // namespace stgf
