#include <gtest/gtest.h>

#include <cmath>

#include "qsampler/benchmark.hpp"

using namespace qs::bench;

namespace {
CostModel model(double hz = 1e9) {
  CostModel m;
  m.clock_hz = hz;
  return m;
}
}  // namespace

TEST(CostModel, OpsPerState) {
  EXPECT_EQ(ops_per_state(2, 20), 208u);
  EXPECT_DOUBLE_EQ(model_seconds(2, 20, 1, model()), 208e-9);
  for (int n : {2, 4, 8})
    for (int m : {20, 100, 200}) EXPECT_EQ(ops_per_state(n, m), static_cast<std::uint64_t>(2 * (2 * n) * m + 2 * (2 * n + m)));
  EXPECT_NEAR(model_seconds(4, 200000, 1, model()) / model_seconds(4, 100000, 1, model()), 2.0, 1e-3);
  CostModel unset;
  EXPECT_THROW(model_seconds(2, 20, 1, unset), std::invalid_argument);
}

TEST(CostModel, Hardware) {
  EXPECT_DOUBLE_EQ(hardware_seconds(2, 20, 1000000, model()), 5.0);
  EXPECT_DOUBLE_EQ(hardware_seconds(2, 20, 1, model()), 5e-6);
  EXPECT_THROW(hardware_seconds(10, 240, 1, model()), std::length_error);
}

TEST(CostModel, Crossover) {
  const auto small = crossover(2, model(), 1000000);
  const auto large = crossover(8, model(), 1000000);
  ASSERT_TRUE(large.has_value());
  if (small) EXPECT_LT(*large, *small);
  EXPECT_FALSE(crossover(8, model(1e18), 1000000).has_value());
}

TEST(Fit, Line) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{3, 5, 7, 9, 11};
  const auto f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(Throughput, MeasuredAboveModel) {
  const auto r = measure_throughput(2, 20, 20000, 1, model());
  EXPECT_GT(r.measured_seconds, 0.0);
  EXPECT_GE(r.measured_seconds, r.modeled_seconds);
  EXPECT_THROW(measure_throughput(2, 20, 10, 1, model()), std::invalid_argument);
}
