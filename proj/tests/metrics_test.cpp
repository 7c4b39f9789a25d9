#include <gtest/gtest.h>

#include <cmath>

#include "stunet/errors.hpp"
#include "stunet/metrics.hpp"

using namespace stunet;

namespace {

TimeSeriesDataset series(std::vector<double> values) {
  TimeSeriesDataset ds;
  ds.nodes = 1;
  ds.features = 1;
  ds.steps = values.size();
  ds.values = std::move(values);
  ds.graph = Graph(Eigen::MatrixXd::Zero(1, 1));
  return ds;
}

}  // namespace

TEST(Metrics, HandExample) {
  const std::vector<double> p{1, 2}, t{2, 4};
  EXPECT_DOUBLE_EQ(mae(p, t), 1.5);
  EXPECT_DOUBLE_EQ(mse(p, t), 2.5);
  EXPECT_DOUBLE_EQ(rmse(p, t), std::sqrt(2.5));
  EXPECT_DOUBLE_EQ(mape(p, t).percent, 50.0);
}

TEST(Metrics, PerfectForecastIsZero) {
  const std::vector<double> v{3, -1, 0.5};
  EXPECT_EQ(mae(v, v), 0.0);
  EXPECT_EQ(rmse(v, v), 0.0);
  EXPECT_EQ(mape(v, v).percent, 0.0);
}

TEST(Metrics, RmseDominatesMae) {
  const std::vector<double> p{0, 0, 0, 4}, t{1, -1, 2, 0};
  EXPECT_GE(rmse(p, t), mae(p, t));
}

TEST(Metrics, MapeMasksSmallTargets) {
  const std::vector<double> p{1, 5, 3}, t{2, 0.0, 1e-4};
  const auto r = mape(p, t);
  EXPECT_EQ(r.used, 1u);
  EXPECT_EQ(r.masked, 2u);
  EXPECT_DOUBLE_EQ(r.percent, 50.0);
}

TEST(Metrics, AllMaskedThrowsAndReportsNan) {
  const std::vector<double> p{1, 2}, t{0, 0};
  EXPECT_THROW(mape(p, t), MetricError);
  const auto v = compute_metrics(p, t);
  EXPECT_TRUE(std::isnan(v.mape));
  EXPECT_EQ(v.mape_masked, 2u);
  EXPECT_DOUBLE_EQ(v.mae, 1.5);
}

TEST(Metrics, SizeMismatch) {
  const std::vector<double> p{1, 2}, t{1};
  EXPECT_THROW(mae(p, t), DimensionError);
  EXPECT_THROW(mae({}, {}), MetricError);
}

TEST(Evaluate, PerHorizonRows) {
  // Two windows, H = 2, one node. Step 1 exact, step 2 off by 1 and 3.
  std::vector<Tensor> pred{Tensor({2, 1, 1}, {1, 2}), Tensor({2, 1, 1}, {1, 2})};
  std::vector<Tensor> tgt{Tensor({2, 1, 1}, {1, 3}), Tensor({2, 1, 1}, {1, 5})};
  const auto r = evaluate_forecasts(pred, tgt, {}, 5.0);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].label, "5 min");
  EXPECT_EQ(r.rows[0].values.mae, 0.0);
  EXPECT_DOUBLE_EQ(r.rows[1].values.mae, 2.0);
  EXPECT_EQ(r.rows[1].values.count, 2u);
  const auto one = evaluate_forecasts(pred, tgt, {2}, 0.0);
  ASSERT_EQ(one.rows.size(), 1u);
  EXPECT_EQ(one.rows[0].label, "step 2");
  EXPECT_THROW(evaluate_forecasts(pred, tgt, {3}, 0.0), UsageError);
}

TEST(Report, CarriesProvenance) {
  std::vector<Tensor> pred{Tensor({1, 1, 1}, {1})}, tgt{Tensor({1, 1, 1}, {2})};
  const auto r = evaluate_forecasts(pred, tgt, {}, 0.0);
  const Provenance prov{hash_text("x"), {1, 2}, "abc"};
  for (const auto& s : {format_report_text(r, prov), format_report_csv(r, prov)}) {
    EXPECT_NE(s.find("config_hash: " + prov.config_hash), std::string::npos);
    EXPECT_NE(s.find("seeds: 1 2"), std::string::npos);
    EXPECT_NE(s.find("commit: abc"), std::string::npos);
  }
  EXPECT_EQ(hash_text("x").size(), 16u);
  EXPECT_NE(hash_text("x"), hash_text("y"));
}

TEST(HistoricalAverage, ConstantSeries) {
  auto ds = series(std::vector<double>(40, 7.0));
  const WindowConfig wc{3, 2};
  for (std::size_t period : {0u, 4u}) {
    for (const auto& p : ha_baseline(ds, wc, Split::test, period))
      for (double v : p.values()) EXPECT_EQ(v, 7.0);
  }
}

TEST(HistoricalAverage, PeriodTwoAlternating) {
  std::vector<double> v(40);
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = t % 2 ? 3.0 : 1.0;
  auto ds = series(v);
  const WindowConfig wc{3, 2};
  const auto windows = make_windows(ds, wc, Split::test);
  const auto preds = ha_baseline(ds, wc, Split::test, 2);
  ASSERT_EQ(preds.size(), windows.size());
  for (std::size_t w = 0; w < preds.size(); ++w)
    for (std::size_t h = 0; h < 2; ++h) EXPECT_EQ(preds[w][h], windows[w].target[h]);
}

TEST(HistoricalAverage, WindowMeanFallback) {
  std::vector<double> v(40, 0.0);
  auto ds = series(v);
  const WindowConfig wc{3, 1};
  auto windows = make_windows(ds, wc, Split::train);
  // Replace the first window's history by 1, 2, 3.
  ds.values[0] = 1;
  ds.values[1] = 2;
  ds.values[2] = 3;
  const auto preds = ha_baseline(ds, wc, Split::train, 0);
  EXPECT_DOUBLE_EQ(preds[0][0], 2.0);
}

TEST(HistoricalAverage, DefaultPeriod) {
  auto ds = series({1, 2, 3});
  EXPECT_EQ(default_ha_period(ds), 0u);
  ds.interval_minutes = 5;
  EXPECT_EQ(default_ha_period(ds), 288u);
}
