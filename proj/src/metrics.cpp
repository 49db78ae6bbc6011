#include "stgf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace stgf {

double rmse(const Eigen::MatrixXd& prediction, const Eigen::MatrixXd& truth) {
  if (prediction.rows() != truth.rows() || prediction.cols() != truth.cols()) {
    throw std::invalid_argument("prediction and truth shapes differ");
  }
  if (prediction.size() == 0) {
    throw std::invalid_argument("cannot score empty matrices");
  }
  const double mse = (prediction - truth).array().square().mean();
  return std::sqrt(mse);
}

Eigen::VectorXd rmse_per_timestamp(const std::vector<Eigen::MatrixXd>& predictions,
                                   const std::vector<Eigen::MatrixXd>& truths) {
  if (predictions.size() != truths.size()) {
    throw std::invalid_argument("prediction and truth counts differ");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(predictions.size()));
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = rmse(predictions[i], truths[i]);
  }
  return out;
}

double quantile(std::span<const double> values, double p) {
  if (values.empty()) {
    throw std::invalid_argument("quantile of an empty sample");
  }
  if (!(p >= 0.0) || !(p <= 1.0)) {
    throw std::invalid_argument("quantile probability must lie in [0, 1]");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("cannot summarize an empty sample");
  }
  SummaryStats s;
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  s.min = values[0];
  s.max = values[0];
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / n);
  s.q1 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q3 = quantile(values, 0.75);
  return s;
}

SummaryStats summarize(const Eigen::VectorXd& values) {
  return summarize(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

namespace {

ClassificationScores score_counts(long tp, long fp, long fn, long tn) {
  ClassificationScores s;
  s.true_positives = tp;
  s.false_positives = fp;
  s.false_negatives = fn;
  s.true_negatives = tn;
  const auto ratio = [](long num, long den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  s.precision = ratio(tp, tp + fp);
  s.recall = ratio(tp, tp + fn);
  const double pr = s.precision + s.recall;
  s.f1 = pr == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / pr;
  s.accuracy = ratio(tp + tn, tp + fp + fn + tn);
  return s;
}

}  // namespace

ClassificationScores classification_scores(std::span<const int> predicted,
                                           std::span<const int> actual) {
  if (predicted.size() != actual.size()) {
    throw std::invalid_argument("prediction and label counts differ");
  }
  long tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if ((predicted[i] != 0 && predicted[i] != 1) || (actual[i] != 0 && actual[i] != 1)) {
      throw std::invalid_argument("labels must be 0 (Stable) or 1 (Alert)");
    }
    const bool pred_alert = predicted[i] == 1;
    const bool true_alert = actual[i] == 1;
    if (pred_alert && true_alert) ++tp;
    else if (pred_alert && !true_alert) ++fp;
    else if (!pred_alert && true_alert) ++fn;
    else ++tn;
  }
  return score_counts(tp, fp, fn, tn);
}

ClassificationScores classification_scores(const Eigen::VectorXi& predicted,
                                           const Eigen::VectorXi& actual) {
  return classification_scores(
      std::span<const int>(predicted.data(), static_cast<std::size_t>(predicted.size())),
      std::span<const int>(actual.data(), static_cast<std::size_t>(actual.size())));
}

void MetricsTable::add(std::string model, std::string scenario, const SummaryStats& stats) {
  rows_.push_back({std::move(model), std::move(scenario), stats});
}

std::string MetricsTable::to_csv() const {
  std::string out = "model,scenario,mean,std,min,max,q1,median,q3\n";
  char buf[64];
  const auto cell = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += ',';
    out += buf;
  };
  for (const auto& row : rows_) {
    out += row.model;
    out += ',';
    out += row.scenario;
    cell(row.stats.mean);
    cell(row.stats.stddev);
    cell(row.stats.min);
    cell(row.stats.max);
    cell(row.stats.q1);
    cell(row.stats.median);
    cell(row.stats.q3);
    out += '\n';
  }
  return out;
}

}  // namespace stgf
