#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "rjbma/errors.hpp"
#include "rjbma/simulator.hpp"

namespace rjbma {
namespace {

TEST(Simulator, ColumnsAndDeterminism) {
  SimConfig cfg;
  cfg.n = 100;
  cfg.seed = 3;
  const Table a = simulate(cfg);
  EXPECT_EQ(a.names, (std::vector<std::string>{"Y", "trt", "X_1", "Z_1", "Z_2", "Z_3", "Z_4", "Z_5"}));
  EXPECT_EQ(a.rows(), 100u);
  EXPECT_EQ(simulate(cfg).columns, a.columns);
  cfg.seed = 4;
  EXPECT_NE(simulate(cfg).columns, a.columns);
}

TEST(Simulator, NoiselessRowsFollowTheFormula) {
  SimConfig cfg;
  cfg.n = 500;
  cfg.noise_sd = 0.0;
  const Table t = simulate(cfg);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const double x = t.column("X_1")[i], z = t.column("Z_1")[i], a = t.column("trt")[i];
    EXPECT_NEAR(t.column("Y")[i], 2 * z + 2 * x + 2 * z * a + std::cos(2 * std::numbers::pi * x) * a,
                1e-12);
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(Simulator, MomentsAtLargeN) {
  SimConfig cfg;
  cfg.n = 1000000;
  cfg.seed = 12;
  const Table t = simulate(cfg);
  double mean = 0.0;
  for (double y : t.column("Y")) mean += y;
  mean /= static_cast<double>(cfg.n);
  EXPECT_NEAR(mean / 2.05, 1.0, 0.01);
}

TEST(Simulator, BernoulliProportions) {
  SimConfig cfg;
  cfg.n = 1000;
  const Table t = simulate(cfg);
  const std::vector<std::string> names{"Z_1", "Z_2", "Z_3", "Z_4", "Z_5"};
  for (std::size_t j = 0; j < 5; ++j) {
    double p = 0.0;
    for (double v : t.column(names[j])) p += v;
    p /= 1000.0;
    const double q = cfg.bernoulli_probs[j];
    EXPECT_LT(std::fabs(p - q), 3.0 * std::sqrt(q * (1 - q) / 1000.0)) << names[j];
  }
}

TEST(Simulator, RejectsBadConfig) {
  SimConfig cfg;
  cfg.n = 0;
  EXPECT_THROW(validate(cfg), ValidationError);
  cfg = SimConfig{};
  cfg.bernoulli_probs[2] = 1.0;
  EXPECT_THROW(validate(cfg), ValidationError);
  cfg = SimConfig{};
  cfg.noise_sd = -1.0;
  EXPECT_THROW(validate(cfg), ValidationError);
}

}  // namespace
}  // namespace rjbma
