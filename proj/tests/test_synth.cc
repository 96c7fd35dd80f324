#include <gtest/gtest.h>

#include <cmath>

#include "atca/synth.hpp"

namespace atca {
namespace {

UserParams OneDirection(double kappa, double rho, double displacement) {
  DirectionParams dp;
  dp.start_x = 300;
  dp.start_y = 900;
  dp.start_sd_x = 15;
  dp.start_sd_y = 15;
  dp.displacement_mean = displacement;
  dp.displacement_sd = 20;
  dp.lateral_sd = 5;
  dp.kappa = kappa;
  dp.rho = rho;
  dp.speed_mean = 1.5;
  dp.speed_sd = 0.1;
  dp.jitter_sd = 1.0;
  UserParams u;
  for (TypeParams& tp : u.types) {
    tp.positive = dp;
    tp.negative = dp;
    tp.positive_fraction = 1.0;
  }
  u.types[1].positive.start_x = 500;
  u.types[1].positive.start_y = 500;
  return u;
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments RawDisplacement(const UserParams& u, ScreenSetting s, std::uint64_t seed, int n = 1000) {
  Rng rng(seed);
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const RawStroke st = GenerateStroke(u, s, StrokeType::kHorizontal, rng);
    const double d = st.points.back().x - st.points.front().x;
    sum += d;
    sq += d * d;
  }
  const double mean = sum / n;
  return {mean, std::sqrt((sq / n - mean * mean) / n)};
}

PopulationConfig Small() {
  PopulationConfig c;
  c.user_count = 5;
  c.horizontal_per_cell = 12;
  c.vertical_per_cell = 10;
  return c;
}

TEST(GenerateStroke, FullCompensationDisplacement) {
  const Moments m = RawDisplacement(OneDirection(1.0, 0.5, 200), {Axis::kX, 0.8}, 1);
  EXPECT_NEAR(m.mean, 250.0, 3 * m.se);
}

TEST(GenerateStroke, NoCompensationDisplacement) {
  for (double f : {0.8, 1.2}) {
    const Moments m = RawDisplacement(OneDirection(0.0, 0.5, 200), {Axis::kX, f}, 2);
    EXPECT_NEAR(m.mean, 200.0, 3 * m.se);
  }
}

TEST(GenerateStroke, IdentitySettingDisplacement) {
  for (double kappa : {0.0, 0.4, 1.0}) {
    const Moments m = RawDisplacement(OneDirection(kappa, 0.5, 200), {Axis::kX, 1.0}, 3);
    EXPECT_NEAR(m.mean, 200.0, 3 * m.se);
  }
}

TEST(GenerateStroke, PerStrokeKappaNoiseKeepsMean) {
  UserParams u = OneDirection(1.0, 0.5, 200);
  for (TypeParams& tp : u.types) tp.positive.kappa_sd = 0.3;
  const Moments m = RawDisplacement(u, {Axis::kX, 0.8}, 4, 4000);
  EXPECT_NEAR(m.mean, 250.0, 3 * m.se);
}

TEST(GenerateStroke, OffAxisSettingLeavesDisplacement) {
  const Moments m = RawDisplacement(OneDirection(1.0, 0.5, 200), {Axis::kY, 0.8}, 5);
  EXPECT_NEAR(m.mean, 200.0, 3 * m.se);
}

TEST(GenerateStroke, StopCoordinateDecreasesWithFactor) {
  // Right-moving strokes with the whole compensation on the stop point.
  const UserParams u = OneDirection(0.7, 1.0, 300);
  double previous = std::numeric_limits<double>::infinity();
  for (double f : {0.8, 0.9, 1.0, 1.1, 1.2}) {
    Rng rng(6);
    double sum = 0.0;
    for (int i = 0; i < 1000; ++i) sum += GenerateStroke(u, {Axis::kX, f}, StrokeType::kHorizontal, rng).points.back().x;
    EXPECT_LT(sum / 1000, previous) << f;
    previous = sum / 1000;
  }
}

TEST(GenerateStroke, StartCompensationMovesStart) {
  const UserParams u = OneDirection(1.0, 0.0, 300);
  Rng rng(7);
  double start = 0.0;
  for (int i = 0; i < 500; ++i) start += GenerateStroke(u, {Axis::kX, 0.8}, StrokeType::kHorizontal, rng).points[0].x;
  EXPECT_NEAR(start / 500, 300.0 - 75.0, 3.0);
}

TEST(GenerateStroke, ValidAndTyped) {
  const PopulationConfig c = Small();
  for (std::size_t u = 0; u < c.user_count; ++u) {
    const UserParams p = SampleUserParams(c, u);
    Rng rng(u);
    for (StrokeType t : kStrokeTypes) {
      for (double f : {0.5, 0.8, 1.0, 1.2, 2.0}) {
        for (int i = 0; i < 50; ++i) {
          const RawStroke s = GenerateStroke(p, {PrimaryAxis(t), f}, t, rng);
          EXPECT_EQ(s.stroke_type, t);
          EXPECT_NO_THROW(ValidateStroke(s.points, s.user, s.setting));
        }
      }
    }
  }
}

TEST(SampleUserParams, DeterministicAndDistinct) {
  const PopulationConfig c = Small();
  EXPECT_EQ(SampleUserParams(c, 3), SampleUserParams(c, 3));
  EXPECT_NE(SampleUserParams(c, 3), SampleUserParams(c, 4));
  EXPECT_NE(UserSeed(c, 3), UserSeed(c, 4));
}

HyperParams Degenerate() {
  HyperParams h;
  for (NormalSpec* s : {&h.horizontal_start_x_right, &h.horizontal_start_x_left, &h.horizontal_start_y,
                        &h.vertical_start_x, &h.vertical_start_y_up, &h.vertical_start_y_down, &h.start_sd,
                        &h.horizontal_displacement, &h.vertical_displacement, &h.displacement_sd, &h.lateral,
                        &h.lateral_sd, &h.bow, &h.positive_fraction, &h.kappa, &h.rho, &h.kappa_noise, &h.speed,
                        &h.speed_cv, &h.jitter, &h.pressure, &h.pressure_sd, &h.area, &h.area_sd, &h.points}) {
    s->sd = 0.0;
  }
  return h;
}

TEST(SampleUserParams, ZeroVarianceGivesIdenticalUsers) {
  PopulationConfig c = Small();
  c.hyper = Degenerate();
  UserParams a = SampleUserParams(c, 0);
  UserParams b = SampleUserParams(c, 4);
  b.user = a.user;
  EXPECT_EQ(a, b);
}

TEST(GeneratePopulation, CellCountsAndOrder) {
  PopulationConfig c = Small();
  c.vertical_per_cell = 13;
  const StrokeCorpus corpus = GeneratePopulation(c);
  EXPECT_EQ(corpus.size(), 5u * 5u * (12u + 13u));
  for (const CellKey& key : corpus.Keys()) {
    EXPECT_EQ(corpus.Cell(key).size(), c.PerCell(key.type));
    EXPECT_EQ(key.setting.axis, PrimaryAxis(key.type));
  }
  for (std::size_t i = 1; i < corpus.size(); ++i) EXPECT_LT(corpus.at(i - 1).stroke_id, corpus.at(i).stroke_id);
}

TEST(GeneratePopulation, IndependentOfThreadCount) {
  const PopulationConfig c = Small();
  const StrokeCorpus one = GeneratePopulation(c, 1);
  EXPECT_EQ(one, GeneratePopulation(c, 8));
  EXPECT_EQ(one, GeneratePopulation(c, 3));
  PopulationConfig other = c;
  other.master_seed = 2;
  EXPECT_FALSE(one == GeneratePopulation(other, 1));
}

TEST(GeneratePopulation, InvalidConfig) {
  PopulationConfig c = Small();
  c.user_count = 1;
  EXPECT_THROW(GeneratePopulation(c), Error);
  c = Small();
  c.horizontal_per_cell = 9;
  EXPECT_THROW(GeneratePopulation(c), Error);
  c = Small();
  c.factors = {1.0, 0.0};
  EXPECT_THROW(GeneratePopulation(c), Error);
}

TEST(ValidatePopulation, IdenticalUsersHaveNoStabilityMargin) {
  PopulationConfig c = Small();
  c.hyper = Degenerate();
  c.hyper.kappa.mean = 0.0;
  c.hyper.kappa_noise.mean = 0.0;
  c.horizontal_per_cell = 60;
  c.vertical_per_cell = 60;
  const PopulationReport r = ValidatePopulation(GeneratePopulation(c));
  // Centroid sampling noise alone is about 0.1 scale at 60 strokes per cell.
  EXPECT_LT(std::abs(r.stability_margin), 0.2 * r.feature_scale);
}

TEST(ValidatePopulation, NoAdaptationIsChanceLevel) {
  PopulationConfig c = Small();
  c.user_count = 8;
  c.hyper.kappa = {0.0, 0.0};
  c.hyper.kappa_noise = {0.0, 0.0};
  c.horizontal_per_cell = 60;
  c.vertical_per_cell = 60;
  const PopulationReport r = ValidatePopulation(GeneratePopulation(c));
  EXPECT_NEAR(r.sensitivity_score, 0.5, 0.05);
}

TEST(ValidatePopulation, DefaultConfigMeetsTargets) {
  const PopulationReport r = ValidatePopulation(GeneratePopulation(PopulationConfig{}));
  EXPECT_GT(r.stability_margin, 0.0);
  EXPECT_GE(r.sensitivity_score, 0.7);
}

TEST(ValidatePopulation, NeedsTwoUsersAndSettings) {
  PopulationConfig c = Small();
  c.factors = {1.0};
  EXPECT_THROW(ValidatePopulation(GeneratePopulation(c)), Error);
}

}  // namespace
}  // namespace atca
