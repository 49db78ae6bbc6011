#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "stgf/metrics.hpp"
#include "stgf/rng.hpp"

using namespace stgf;

TEST_CASE("rmse pools every entry of a snapshot") {
  Eigen::MatrixXd pred(2, 2), truth(2, 2);
  pred << 1, 2, 3, 4;
  truth << 4, 6, 6, 0;
  // squared errors 9, 16, 9, 16 -> mean 12.5
  CHECK(rmse(pred, truth) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(rmse(pred, pred) == 0.0);
  CHECK_THROWS(rmse(pred, Eigen::MatrixXd::Zero(2, 3)));
  CHECK_THROWS(rmse(Eigen::MatrixXd(), Eigen::MatrixXd()));
}

TEST_CASE("per-timestamp rmse keeps snapshot order") {
  std::vector<Eigen::MatrixXd> preds{Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Zero(2, 1)};
  std::vector<Eigen::MatrixXd> truths{Eigen::MatrixXd::Constant(2, 1, 3.0),
                                      Eigen::MatrixXd::Constant(2, 1, 4.0)};
  const Eigen::VectorXd out = rmse_per_timestamp(preds, truths);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == doctest::Approx(3.0));
  CHECK(out[1] == doctest::Approx(4.0));
  CHECK_THROWS(rmse_per_timestamp(preds, {truths[0]}));
}

TEST_CASE("quantiles interpolate between order statistics") {
  const std::vector<double> v{4, 2, 3, 1};  // unsorted on purpose
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(quantile(v, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(quantile(v, 0.75) == doctest::Approx(3.25).epsilon(1e-15));
  CHECK(quantile(std::vector<double>{7.0}, 0.9) == 7.0);
  CHECK_THROWS(quantile(std::vector<double>{}, 0.5));
  CHECK_THROWS(quantile(v, -0.1));
  CHECK_THROWS(quantile(v, 1.1));
}

TEST_CASE("quantile is monotone in p") {
  Rng rng(11);
  std::vector<double> v;
  for (int i = 0; i < 37; ++i) v.push_back(rng.uniform(-5.0, 5.0));
  double prev = quantile(v, 0.0);
  for (double p = 0.05; p <= 1.0; p += 0.05) {
    const double q = quantile(v, p);
    CHECK(q >= prev);
    prev = q;
  }
}

TEST_CASE("summary statistics use the population standard deviation") {
  const std::vector<double> v{1, 2, 3, 4};
  const SummaryStats s = summarize(v);
  CHECK(s.mean == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(s.stddev == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
  CHECK(s.q1 == doctest::Approx(1.75));
  CHECK(s.median == doctest::Approx(2.5));
  CHECK(s.q3 == doctest::Approx(3.25));
  CHECK_THROWS(summarize(std::vector<double>{}));

  Eigen::VectorXd ev(4);
  ev << 1, 2, 3, 4;
  CHECK(summarize(ev).mean == s.mean);
}

TEST_CASE("classification scores treat Alert as the positive class") {
  // predicted: 1 1 1 0 0, actual: 1 1 0 1 0 -> tp=2 fp=1 fn=1 tn=1
  Eigen::VectorXi pred(5), actual(5);
  pred << 1, 1, 1, 0, 0;
  actual << 1, 1, 0, 1, 0;
  const ClassificationScores s = classification_scores(pred, actual);
  CHECK(s.true_positives == 2);
  CHECK(s.false_positives == 1);
  CHECK(s.false_negatives == 1);
  CHECK(s.true_negatives == 1);
  CHECK(s.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s.accuracy == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("classification ratios with empty denominators are zero") {
  Eigen::VectorXi zeros = Eigen::VectorXi::Zero(4);
  const ClassificationScores s = classification_scores(zeros, zeros);
  CHECK(s.precision == 0.0);
  CHECK(s.recall == 0.0);
  CHECK(s.f1 == 0.0);
  CHECK(s.accuracy == 1.0);
}

TEST_CASE("classification scores reject labels outside 0/1") {
  Eigen::VectorXi pred(2), actual(2);
  pred << 0, 2;
  actual << 0, 1;
  CHECK_THROWS(classification_scores(pred, actual));
  pred << 0, 1;
  actual << -1, 1;
  CHECK_THROWS(classification_scores(pred, actual));
  actual << 0, 1;
  CHECK_THROWS(classification_scores(pred, Eigen::VectorXi::Zero(3)));
}

TEST_CASE("span overload matches the vector overload") {
  const std::vector<int> pred{1, 0, 1, 1};
  const std::vector<int> actual{1, 0, 0, 1};
  const ClassificationScores a = classification_scores(std::span<const int>(pred),
                                                       std::span<const int>(actual));
  Eigen::VectorXi pv(4), av(4);
  pv << 1, 0, 1, 1;
  av << 1, 0, 0, 1;
  const ClassificationScores b = classification_scores(pv, av);
  CHECK(a.f1 == b.f1);
  CHECK(a.true_positives == b.true_positives);
}

TEST_CASE("metrics table renders the pinned CSV layout") {
  MetricsTable table;
  SummaryStats s;
  s.mean = 1.5;
  s.stddev = 0.5;
  s.min = 1.0;
  s.max = 2.0;
  s.q1 = 1.25;
  s.median = 1.5;
  s.q3 = 1.75;
  table.add("gcrn", "sliding", s);
  const std::string csv = table.to_csv();
  CHECK(csv.rfind("model,scenario,mean,std,min,max,q1,median,q3\n", 0) == 0);
  CHECK(csv.find("gcrn,sliding,1.5,0.5,1,2,1.25,1.5,1.75") != std::string::npos);
  CHECK(table.rows().size() == 1);
}
