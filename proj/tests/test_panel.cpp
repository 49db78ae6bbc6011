#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "stgf/panel.hpp"
#include "stgf/rng.hpp"

using namespace stgf;

namespace {

PanelSeries make_panel(const Eigen::MatrixXd& values) {
  PanelSeries p;
  p.values = values;
  for (Eigen::Index i = 0; i < values.rows(); ++i) p.node_ids.push_back("n" + std::to_string(i));
  p.start_day = "2020-01-01";
  return p;
}

PanelSeries ramp_panel(Eigen::Index nodes, Eigen::Index days) {
  Eigen::MatrixXd v(nodes, days);
  for (Eigen::Index i = 0; i < nodes; ++i) {
    for (Eigen::Index t = 0; t < days; ++t) v(i, t) = static_cast<double>(t + 10 * i);
  }
  return make_panel(v);
}

PopulationTable uniform_population(const std::vector<std::string>& ids, double pop) {
  PopulationTable table;
  table.node_ids = ids;
  table.population.assign(ids.size(), pop);
  return table;
}

}  // namespace

TEST_CASE("z-score parameters use the population variance") {
  Eigen::MatrixXd v(2, 3);
  v << 1, 2, 3, 5, 5, 5;
  const PanelSeries p = make_panel(v);
  const StandardizationParams params = fit_zscore(p, 0, 3);

  CHECK(params.mu[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(params.sigma[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
  CHECK(params.mu[1] == 5.0);
  CHECK(params.sigma[1] == 1.0);  // constant series fall back to sigma 1

  const PanelSeries z = apply_zscore(p, params);
  CHECK(z.values(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(z.values(0, 1) == doctest::Approx(0.0));
  CHECK(z.values(0, 2) == doctest::Approx(1.224744871391589).epsilon(1e-12));
  CHECK(z.values(1, 0) == 0.0);
  CHECK(z.values(1, 2) == 0.0);
}

TEST_CASE("z-score fit range excludes later days") {
  PanelSeries p = ramp_panel(2, 10);
  const StandardizationParams params = fit_zscore(p, 0, 8);
  p.values(0, 9) = 1e9;  // corrupt a test-range day
  const StandardizationParams again = fit_zscore(p, 0, 8);
  CHECK(params.mu == again.mu);
  CHECK(params.sigma == again.sigma);
}

TEST_CASE("z-score fit range must hold at least two days") {
  const PanelSeries p = ramp_panel(1, 5);
  CHECK_THROWS(fit_zscore(p, 0, 1));
  CHECK_THROWS(fit_zscore(p, 3, 3));
  CHECK_THROWS(fit_zscore(p, 0, 6));
}

TEST_CASE("standardize and destandardize are inverses") {
  const PanelSeries p = ramp_panel(3, 20);
  const StandardizationParams params = fit_zscore(p, 0, 16);
  const PanelSeries z = apply_zscore(p, params);
  const PanelSeries back = invert_zscore(z, params);
  CHECK((back.values - p.values).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd one(1, 1);
  one << 1.224744871391589;
  StandardizationParams single;
  single.mu = Eigen::VectorXd::Constant(1, 2.0);
  single.sigma = Eigen::VectorXd::Constant(1, std::sqrt(2.0 / 3.0));
  CHECK(destandardize(one, single)(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("day split takes the ceiling for training") {
  CHECK(split_days(1095, 0.8) == std::pair<Eigen::Index, Eigen::Index>{876, 219});
  CHECK(split_days(10, 0.8) == std::pair<Eigen::Index, Eigen::Index>{8, 2});
  CHECK(split_days(5, 0.5) == std::pair<Eigen::Index, Eigen::Index>{3, 2});
  CHECK(split_days(1, 0.8) == std::pair<Eigen::Index, Eigen::Index>{1, 0});
  CHECK_THROWS(split_days(10, 0.0));
  CHECK_THROWS(split_days(10, 1.0));
  CHECK_THROWS(split_days(10, -0.2));
}

TEST_CASE("sliding snapshots cover every stride-1 anchor") {
  const PanelSeries p = ramp_panel(1, 30);
  const auto snaps = make_snapshots(p, 14, 1, WindowingMode::Sliding);
  REQUIRE(snaps.size() == 16);
  CHECK(snaps.front().anchor == 13);
  CHECK(snaps.back().anchor == 28);
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    CHECK(snaps[i].first_input_day() >= 0);
    CHECK(snaps[i].last_target_day() < 30);
    if (i > 0) CHECK(snaps[i].anchor == snaps[i - 1].anchor + 1);
  }
}

TEST_CASE("segmented snapshots tile the panel into disjoint blocks") {
  const PanelSeries p = ramp_panel(1, 32);
  const auto snaps = make_snapshots(p, 4, 2, WindowingMode::Segmented);
  REQUIRE(snaps.size() == 5);  // floor(32 / 6)
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    CHECK(snaps[k].anchor == static_cast<Eigen::Index>(k) * 6 + 3);
  }
}

TEST_CASE("snapshot generation rejects panels shorter than window + horizon") {
  const PanelSeries p = ramp_panel(1, 10);
  CHECK_THROWS(make_snapshots(p, 8, 3, WindowingMode::Sliding));
  CHECK_THROWS(make_snapshots(p, 8, 3, WindowingMode::Segmented));
  CHECK(make_snapshots(p, 8, 2, WindowingMode::Sliding).size() == 1);
}

TEST_CASE("snapshot counts match the closed forms on random geometry") {
  Rng rng(555);
  for (int it = 0; it < 300; ++it) {
    const auto window = static_cast<Eigen::Index>(1 + rng.uniform_index(20));
    const auto horizon = static_cast<Eigen::Index>(1 + rng.uniform_index(20));
    const auto days = window + horizon + static_cast<Eigen::Index>(rng.uniform_index(60));
    const PanelSeries p = ramp_panel(1, days);

    const auto sliding = make_snapshots(p, window, horizon, WindowingMode::Sliding);
    CHECK(static_cast<Eigen::Index>(sliding.size()) == days - window - horizon + 1);

    const auto segmented = make_snapshots(p, window, horizon, WindowingMode::Segmented);
    CHECK(static_cast<Eigen::Index>(segmented.size()) == days / (window + horizon));

    for (const auto& list : {sliding, segmented}) {
      for (const Snapshot& s : list) {
        CHECK(s.first_input_day() >= 0);
        CHECK(s.last_target_day() < days);
        CHECK(s.window == window);
        CHECK(s.horizon == horizon);
      }
    }
  }
}

TEST_CASE("window and target views slice the expected days") {
  const PanelSeries p = ramp_panel(2, 30);
  const Snapshot snap{13, 14, 2, };
  const Eigen::MatrixXd w = window_of(p, snap);
  const Eigen::MatrixXd t = target_of(p, snap);
  REQUIRE(w.rows() == 2);
  REQUIRE(w.cols() == 14);
  REQUIRE(t.cols() == 2);
  CHECK(w(0, 0) == 0.0);
  CHECK(w(0, 13) == 13.0);
  CHECK(w(1, 0) == 10.0);
  CHECK(t(0, 0) == 14.0);
  CHECK(t(0, 1) == 15.0);

  CHECK_THROWS(window_of(p, Snapshot{12, 14, 1}));  // would start before day 0
  CHECK_THROWS(target_of(p, Snapshot{28, 14, 2}));  // would end past the panel
}

TEST_CASE("chronological split puts the earliest snapshots in training") {
  const PanelSeries p = ramp_panel(1, 1095);
  const auto snaps = make_snapshots(p, 14, 1, WindowingMode::Sliding);
  REQUIRE(snaps.size() == 1081);
  const auto [train, test] = split_chronological(snaps, 0.8);
  CHECK(train.size() == 865);
  CHECK(test.size() == 216);
  CHECK(train.back().anchor < test.front().anchor);
  CHECK(train.front().anchor == snaps.front().anchor);
  CHECK(test.back().anchor == snaps.back().anchor);

  CHECK_THROWS(split_chronological({}, 0.8));
  const auto [one, none] = split_chronological({snaps[0]}, 0.8);
  CHECK(one.size() == 1);
  CHECK(none.empty());
}

TEST_CASE("moving average uses the available prefix") {
  Eigen::MatrixXd v(1, 7);
  v << 0, 1, 2, 3, 4, 5, 6;
  const PanelSeries ma = moving_average(make_panel(v), 7);
  CHECK(ma.values(0, 0) == 0.0);
  CHECK(ma.values(0, 1) == 0.5);
  CHECK(ma.values(0, 3) == 1.5);
  CHECK(ma.values(0, 6) == 3.0);

  Eigen::MatrixXd longer(1, 10);
  longer << 0, 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const PanelSeries ma2 = moving_average(make_panel(longer), 7);
  CHECK(ma2.values(0, 9) == 6.0);  // mean of days 3..9
  CHECK_THROWS(moving_average(make_panel(v), 0));
}

TEST_CASE("trend slope closed-form cases") {
  const std::vector<double> ramp{0, 1, 2, 3, 4, 5, 6};
  CHECK(trend_slope(ramp) == doctest::Approx(1.0).epsilon(1e-15));

  const std::vector<double> digits{3, 1, 4, 1, 5, 9, 2};
  CHECK(trend_slope(digits) == doctest::Approx(0.5).epsilon(1e-12));

  const std::vector<double> pair{1, 3};
  CHECK(trend_slope(pair) == doctest::Approx(2.0).epsilon(1e-15));

  const std::vector<double> single{42};
  CHECK(trend_slope(single) == 0.0);
  CHECK(trend_slope(std::vector<double>{}) == 0.0);
}

TEST_CASE("alert labels fire on rising per-capita averages") {
  // Population 100k makes the per-100k series equal the moving average.
  Eigen::MatrixXd v(3, 20);
  for (Eigen::Index t = 0; t < 20; ++t) {
    v(0, t) = 2.0 * static_cast<double>(t);  // rising: slope 2 once warmed up
    v(1, t) = 5.0;                           // flat: slope 0
    v(2, t) = 40.0 - 2.0 * static_cast<double>(t);  // falling: negative metric
  }
  const PanelSeries p = make_panel(v);
  const PopulationTable pops = uniform_population(p.node_ids, 1e5);
  const Eigen::MatrixXi labels = classification_targets(p, pops, 10.0);

  // Node 0 at day 12: average is 2*12-6 = 18, slope 2, metric 36.
  CHECK(labels(0, 12) == kAlertLabel);
  CHECK(labels(0, 19) == kAlertLabel);
  CHECK(labels(0, 0) == kStableLabel);  // no trend estimable from one day
  for (Eigen::Index t = 0; t < 20; ++t) {
    CHECK(labels(1, t) == kStableLabel);
    CHECK(labels(2, t) == kStableLabel);
  }
}

TEST_CASE("alert threshold comparison is strict") {
  // Constant slope 1 with average a gives metric a; pick a == threshold.
  Eigen::MatrixXd v(1, 30);
  for (Eigen::Index t = 0; t < 30; ++t) v(0, t) = static_cast<double>(t);
  const PanelSeries p = make_panel(v);
  const PopulationTable pops = uniform_population(p.node_ids, 1e5);
  // At day t >= 12 the average is t-3 and the slope is 1, so metric == t-3.
  const Eigen::MatrixXi at = classification_targets(p, pops, 12.0);
  CHECK(at(0, 15) == kStableLabel);  // metric 12 is not > 12
  CHECK(at(0, 16) == kAlertLabel);   // metric 13
}

TEST_CASE("labels are invariant to joint count and population scaling") {
  Rng rng(808);
  Eigen::MatrixXd v(4, 40);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index t = 0; t < 40; ++t) v(i, t) = rng.uniform(0.0, 50.0);
  }
  const PanelSeries p = make_panel(v);
  const PopulationTable pops = uniform_population(p.node_ids, 2.5e5);

  PanelSeries scaled = p;
  scaled.values *= 17.0;
  PopulationTable scaled_pops = pops;
  for (double& x : scaled_pops.population) x *= 17.0;

  CHECK(classification_targets(p, pops, 10.0) == classification_targets(scaled, scaled_pops, 10.0));
}

TEST_CASE("label slices line up with snapshot targets") {
  Eigen::MatrixXi labels(2, 10);
  labels.setZero();
  labels(0, 7) = 1;
  const Snapshot snap{5, 3, 2};
  const Eigen::VectorXi slice = label_target_of(labels, snap);
  CHECK(slice[0] == 1);
  CHECK(slice[1] == 0);
  CHECK_THROWS(label_target_of(labels, Snapshot{8, 3, 2}));
}

TEST_CASE("population table alignment validates entries") {
  PopulationTable table;
  table.node_ids = {"a", "b"};
  table.population = {100.0, 200.0};
  const Eigen::VectorXd ordered = table.aligned({"b", "a"});
  CHECK(ordered[0] == 200.0);
  CHECK(ordered[1] == 100.0);
  CHECK_THROWS(table.aligned({"a", "c"}));

  PopulationTable bad;
  bad.node_ids = {"a"};
  bad.population = {0.0};
  CHECK_THROWS(bad.aligned({"a"}));
}
