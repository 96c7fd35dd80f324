#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "atca/error.hpp"
#include "atca/random.hpp"
#include "atca/svm.hpp"
#include "svm_oracle.hpp"

namespace atca {
namespace {

FeatureVector Point(double a, double b = 0.0) {
  FeatureVector v{};
  v[0] = a;
  v[1] = b;
  return v;
}

struct Problem {
  std::vector<FeatureVector> x;
  std::vector<int> y;
};

Problem SixPoint() {
  return {{Point(0, 0), Point(1, 0.5), Point(0.2, 1), Point(2, 2), Point(2.5, 1), Point(1.2, 1.6)},
          {-1, -1, -1, 1, 1, 1}};
}

Problem RandomProblem(Rng& rng, std::size_t n, std::size_t dims) {
  std::normal_distribution<double> g(0, 1);
  Problem p;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 ? 1 : -1;
    FeatureVector v{};
    for (std::size_t d = 0; d < dims; ++d) v[d] = g(rng) + 0.6 * label;
    p.x.push_back(v);
    p.y.push_back(label);
  }
  std::shuffle(p.y.begin(), p.y.end(), rng);
  return p;
}

SvmParams Tight(double c, double gamma) {
  SvmParams params;
  params.c = c;
  params.gamma = gamma;
  params.tolerance = 1e-9;
  return params;
}

TEST(RbfKernel, Examples) {
  const FeatureVector a = Point(1, 2);
  EXPECT_EQ(RbfKernel(a, a, 3.0), 1.0);
  EXPECT_NEAR(RbfKernel(Point(0), Point(1), std::log(2.0)), 0.5, 1e-15);
  EXPECT_LT(RbfKernel(Point(0), Point(1), 1e3), 1e-12);
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> z{1, 2};
  EXPECT_THROW(RbfKernel(x, z, 1.0), Error);
}

TEST(Train, TwoPointSymmetric) {
  const std::vector<FeatureVector> x{Point(-1), Point(1)};
  const std::vector<int> y{-1, 1};
  const SvmModel m = Train(x, y, Tight(1e3, 0.5));
  ASSERT_EQ(m.coef.size(), 2u);
  EXPECT_NEAR(std::abs(m.coef[0]), std::abs(m.coef[1]), 1e-9);
  EXPECT_NEAR(m.bias, 0.0, 1e-9);
  EXPECT_NEAR(DecisionValue(m, Point(0)), 0.0, 1e-9);
  EXPECT_LT(DecisionValue(m, Point(-1)), 0.0);
  EXPECT_GT(DecisionValue(m, Point(1)), 0.0);
}

TEST(Train, SixPointFixtureMatchesOracle) {
  const Problem p = SixPoint();
  const auto sol = oracle::SolveDual(p.x, p.y, 10.0, 1.0, 1.0, 0.5);
  ASSERT_TRUE(sol.has_value());
  // Frozen from an independent SLSQP solve of the same dual.
  EXPECT_NEAR(sol->objective, 2.851985331250423, 1e-7);
  const SvmModel m = Train(p.x, p.y, Tight(10.0, 0.5));
  EXPECT_NEAR(m.dual_objective, sol->objective, 1e-6);
  for (double a = -0.5; a <= 3.0; a += 0.25) {
    for (double b = -0.5; b <= 3.0; b += 0.25) {
      EXPECT_NEAR(DecisionValue(m, Point(a, b)), oracle::Decision(*sol, p.x, p.y, Point(a, b), 0.5), 1e-4);
    }
  }
}

TEST(Train, SmallProblemsMatchOracle) {
  Rng rng(31);
  const double cs[] = {0.5, 2.0, 16.0};
  const double gammas[] = {0.1, 0.5, 2.0};
  int compared = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Problem p = RandomProblem(rng, 3 + trial % 6, 2 + trial % 3);
    for (WorkingSetRule rule : {WorkingSetRule::kMaxViolatingPair, WorkingSetRule::kSecondOrder}) {
      SvmParams params = Tight(cs[trial % 3], gammas[(trial / 3) % 3]);
      params.weight_pos = trial % 4 == 0 ? 2.0 : 1.0;
      params.rule = rule;
      const auto sol = oracle::SolveDual(p.x, p.y, params.c, params.weight_pos, 1.0, params.gamma);
      if (!sol) continue;
      ++compared;
      const SvmModel m = Train(p.x, p.y, params);
      EXPECT_NEAR(m.dual_objective, sol->objective, 1e-6);
      std::normal_distribution<double> g(0, 1.5);
      for (int k = 0; k < 25; ++k) {
        FeatureVector probe{};
        for (std::size_t d = 0; d < 4; ++d) probe[d] = g(rng);
        EXPECT_NEAR(DecisionValue(m, probe), oracle::Decision(*sol, p.x, p.y, probe, params.gamma), 1e-4)
            << "trial " << trial;
      }
    }
  }
  EXPECT_GE(compared, 60);
}

TEST(Train, KktOnRandomProblems) {
  Rng rng(77);
  std::uniform_int_distribution<int> pick(0, 5);
  const double cs[] = {0.125, 0.5, 2.0, 8.0, 32.0, 128.0};
  const double gammas[] = {1.0 / 512, 1.0 / 128, 1.0 / 32, 1.0 / 8, 0.5, 2.0};
  for (int trial = 0; trial < 100; ++trial) {
    const Problem p = RandomProblem(rng, 20, 28);
    SvmParams params;
    params.c = cs[pick(rng)];
    params.gamma = gammas[pick(rng)];
    params.weight_pos = 1.0 + trial % 3;
    const SvmModel m = Train(p.x, p.y, params);
    const oracle::KktReport r = oracle::CheckKkt(m, p.x, p.y);
    EXPECT_LE(r.max_violation, 1e-3) << "trial " << trial;
    EXPECT_LE(r.equality_residual, 1e-6);
    EXPECT_TRUE(r.box_ok);
    for (double c : m.coef) EXPECT_NE(c, 0.0);
    EXPECT_LE(m.kkt_gap, params.tolerance);
  }
}

TEST(Train, FreeSupportVectorsSitOnMargin) {
  const Problem p = SixPoint();
  SvmParams params;
  params.c = 10.0;
  params.gamma = 0.5;
  const SvmModel m = Train(p.x, p.y, params);
  for (std::size_t k = 0; k < m.coef.size(); ++k) {
    if (std::abs(m.coef[k]) < params.c * (1 - 1e-9)) {
      const int label = m.coef[k] > 0 ? 1 : -1;
      EXPECT_LE(std::abs(DecisionValue(m, m.support_vectors[k]) - label), params.tolerance);
    }
  }
}

TEST(Train, Deterministic) {
  Rng rng(5);
  const Problem p = RandomProblem(rng, 60, 6);
  SvmParams params;
  params.c = 4.0;
  params.gamma = 0.2;
  EXPECT_EQ(Train(p.x, p.y, params), Train(p.x, p.y, params));
}

TEST(Train, ErrorCodes) {
  const std::vector<FeatureVector> x{Point(0), Point(1)};
  const std::vector<int> same{1, 1};
  try {
    Train(x, same, SvmParams{});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingleClass);
  }
  std::vector<FeatureVector> bad = x;
  bad[1][3] = std::numeric_limits<double>::infinity();
  const std::vector<int> y{-1, 1};
  try {
    Train(bad, y, SvmParams{});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
  Rng rng(12);
  const Problem p = RandomProblem(rng, 200, 28);
  SvmParams tiny;
  tiny.c = 100.0;
  tiny.gamma = 0.05;
  tiny.max_iterations = 2;
  try {
    Train(p.x, p.y, tiny);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConvergenceFailure);
  }
}

TEST(Train, ScoreOrderInvariantUnderShiftWithRefitScaler) {
  Rng rng(19);
  const Problem p = RandomProblem(rng, 40, 28);
  Problem test = RandomProblem(rng, 15, 28);
  FeatureMatrix shifted = p.x;
  FeatureMatrix test_shifted = test.x;
  for (auto* m : {&shifted, &test_shifted}) {
    for (auto& row : *m) {
      for (double& v : row) v += 250.0;
    }
  }
  SvmParams params;
  params.c = 2.0;
  params.gamma = 0.1;
  const Scaler s0 = FitScaler(p.x);
  const Scaler s1 = FitScaler(shifted);
  const SvmModel m0 = Train(ApplyScaler(s0, p.x), p.y, params);
  const SvmModel m1 = Train(ApplyScaler(s1, shifted), p.y, params);
  const std::vector<double> d0 = DecisionValues(m0, ApplyScaler(s0, test.x));
  const std::vector<double> d1 = DecisionValues(m1, ApplyScaler(s1, test_shifted));
  std::vector<std::size_t> o0(d0.size());
  std::vector<std::size_t> o1(d1.size());
  std::iota(o0.begin(), o0.end(), 0);
  std::iota(o1.begin(), o1.end(), 0);
  std::sort(o0.begin(), o0.end(), [&](auto a, auto b) { return d0[a] < d0[b]; });
  std::sort(o1.begin(), o1.end(), [&](auto a, auto b) { return d1[a] < d1[b]; });
  EXPECT_EQ(o0, o1);
}

TEST(BalancedPositiveWeight, Examples) {
  EXPECT_EQ(BalancedPositiveWeight(10, 140), 14.0);
  EXPECT_EQ(BalancedPositiveWeight(10, 5000), 100.0);
  EXPECT_EQ(BalancedPositiveWeight(0, 5), 1.0);
}

TEST(GridSearch, SingletonGrid) {
  Rng rng(3);
  const Problem p = RandomProblem(rng, 30, 4);
  TrainConfig config;
  config.c_grid = {4.0};
  config.gamma_grid = {0.25};
  const GridChoice g = GridSearch(p.x, p.y, config, 9);
  EXPECT_EQ(g.c, 4.0);
  EXPECT_EQ(g.gamma, 0.25);
}

TEST(GridSearch, SeparableReachesUnitAuc) {
  std::vector<FeatureVector> x;
  std::vector<int> y;
  Rng rng(6);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int i = 0; i < 40; ++i) {
    const int label = i % 2 ? 1 : -1;
    x.push_back(Point(label * u(rng), u(rng)));
    y.push_back(label);
  }
  const GridChoice g = GridSearch(x, y, TrainConfig{}, 4);
  EXPECT_EQ(g.auc, 1.0);
}

TEST(GridSearch, DeterministicAndTieBreak) {
  Rng rng(8);
  const Problem p = RandomProblem(rng, 50, 5);
  const TrainConfig config;
  const GridChoice a = GridSearch(p.x, p.y, config, 1234);
  const GridChoice b = GridSearch(p.x, p.y, config, 1234);
  EXPECT_EQ(a.c, b.c);
  EXPECT_EQ(a.gamma, b.gamma);
  EXPECT_EQ(a.auc, b.auc);

  // Perfectly separable on every cell: the first grid point wins.
  std::vector<FeatureVector> x;
  std::vector<int> y;
  for (int i = 0; i < 12; ++i) {
    x.push_back(Point(i % 2 ? 5.0 + 0.01 * i : -5.0 - 0.01 * i));
    y.push_back(i % 2 ? 1 : -1);
  }
  TrainConfig coarse;
  coarse.c_grid = {8.0, 0.5};
  coarse.gamma_grid = {0.5, 0.125};
  const GridChoice t = GridSearch(x, y, coarse, 2);
  EXPECT_EQ(t.c, 0.5);
  EXPECT_EQ(t.gamma, 0.125);
}

TEST(GridSearch, TooFewPerClass) {
  const std::vector<FeatureVector> x{Point(0), Point(1), Point(2), Point(3)};
  const std::vector<int> y{-1, -1, -1, 1};
  EXPECT_THROW(GridSearch(x, y, TrainConfig{}, 1), Error);
}

TEST(TrainConfig, Validate) {
  TrainConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.c_grid.clear();
  EXPECT_THROW(c.Validate(), Error);
  c = TrainConfig{};
  c.tolerance = 0.0;
  EXPECT_THROW(c.Validate(), Error);
}

}  // namespace
}  // namespace atca
