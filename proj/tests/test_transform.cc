#include <gtest/gtest.h>

#include "atca/random.hpp"
#include "atca/transform.hpp"

namespace atca {
namespace {

RawStroke Diagonal() {
  RawStroke s;
  for (int i = 0; i <= 4; ++i) {
    const double v = 10.0 + 25.0 * i;
    s.points.push_back({10.0 * i, v, v, 0.4, 0.1});
  }
  return s;
}

RawStroke RandomStroke(Rng& rng) {
  std::uniform_real_distribution<double> coord(-500, 1500);
  std::uniform_int_distribution<int> count(3, 30);
  RawStroke s;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) s.points.push_back({5.0 * i, coord(rng), coord(rng), 0.3, 0.2});
  return s;
}

TEST(ApplySetting, WorkedExamples) {
  const RawStroke y = ApplySetting(Diagonal(), {Axis::kY, 0.8});
  EXPECT_EQ(y.points.front().x, 10.0);
  EXPECT_EQ(y.points.front().y, 10.0);
  EXPECT_EQ(y.points.back().x, 110.0);
  EXPECT_EQ(y.points.back().y, 90.0);

  const RawStroke x = ApplySetting(Diagonal(), {Axis::kX, 1.2});
  EXPECT_EQ(x.points.back().x, 130.0);
  EXPECT_EQ(x.points.back().y, 110.0);
}

TEST(ApplySetting, UnitFactorIsIdentity) {
  EXPECT_EQ(ApplySetting(Diagonal(), {Axis::kX, 1.0}), Diagonal());
  EXPECT_EQ(InvertSetting(Diagonal(), {Axis::kY, 1.0}), Diagonal());
}

TEST(ApplySetting, NonPositiveFactorRejected) {
  for (double f : {0.0, -1.0}) {
    EXPECT_THROW(ApplySetting(Diagonal(), {Axis::kX, f}), Error);
    EXPECT_THROW(InvertSetting(Diagonal(), {Axis::kX, f}), Error);
  }
}

TEST(InvertSetting, UndoesWorkedExample) {
  const RawStroke back = InvertSetting(ApplySetting(Diagonal(), {Axis::kY, 0.8}), {Axis::kY, 0.8});
  EXPECT_NEAR(back.points.back().y, 110.0, 1e-12);
  EXPECT_EQ(back.points.back().x, 110.0);
}

TEST(TransformProperties, RandomStrokes) {
  Rng rng(17);
  std::uniform_real_distribution<double> factor(0.2, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const RawStroke s = RandomStroke(rng);
    const Axis axis = trial % 2 ? Axis::kX : Axis::kY;
    const double f1 = factor(rng);
    const double f2 = factor(rng);
    const RawStroke a = ApplySetting(s, {axis, f1});

    EXPECT_EQ(a.points.front(), s.points.front());
    const RawStroke round = InvertSetting(a, {axis, f1});
    const RawStroke twice = ApplySetting(a, {axis, f2});
    const RawStroke product = ApplySetting(s, {axis, f1 * f2});
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const TouchPoint& p = s.points[i];
      const TouchPoint& q = a.points[i];
      EXPECT_EQ(q.t, p.t);
      EXPECT_EQ(q.p, p.p);
      EXPECT_EQ(q.a, p.a);
      if (axis == Axis::kY) {
        EXPECT_EQ(q.x, p.x);
      } else {
        EXPECT_EQ(q.y, p.y);
      }
      EXPECT_NEAR(round.points[i].x, p.x, 1e-9);
      EXPECT_NEAR(round.points[i].y, p.y, 1e-9);
      EXPECT_NEAR(twice.points[i].x, product.points[i].x, 1e-9);
      EXPECT_NEAR(twice.points[i].y, product.points[i].y, 1e-9);
    }
  }
}

}  // namespace
}  // namespace atca
