#include <gtest/gtest.h>

#include <cmath>

#include "nnablate/analysis/feature_matrix.hpp"
#include "nnablate/core/random.hpp"

using namespace nnablate;
using namespace nnablate::analysis;
using ablation::AblationDelta;

namespace {

std::vector<AblationDelta> synthetic(std::size_t trials, std::size_t groups, std::size_t images, std::uint64_t seed,
                                     double scale = 1.0) {
  Rng rng(seed);
  std::vector<AblationDelta> out;
  for (std::size_t t = 0; t < trials; ++t)
    for (std::size_t g = 0; g < groups; ++g) {
      AblationDelta d;
      d.trial_id = t;
      d.group_id = g;
      for (std::size_t i = 0; i < images; ++i) {
        nn::Action b{rng.uniform(), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        nn::Action a = b;
        for (std::size_t c = 0; c < 3; ++c) a[c] += scale * rng.normal(0.0, 0.1);
        d.baseline.push_back(b);
        d.ablated.push_back(a);
      }
      out.push_back(d);
    }
  return out;
}

}  // namespace

TEST(FeatureMatrix, FiveTrialsTenGroupsGiveFiftyByFortyEight) {
  const auto deltas = synthetic(5, 10, 24, 1);
  const auto fm = build_feature_matrix(deltas);
  EXPECT_EQ(fm.points.rows(), 50u);
  EXPECT_EQ(fm.points.cols(), 48u);
  EXPECT_EQ(fm.columns.size(), 48u);
  for (std::size_t r = 0; r < 50; ++r) {
    EXPECT_EQ(fm.rows[r].trial, r / 10);
    EXPECT_EQ(fm.rows[r].group, r % 10);
    for (std::size_t i = 0; i < 24; ++i) {
      EXPECT_EQ(fm.points(r, 2 * i), deltas[r].delta(i).lateral);
      EXPECT_EQ(fm.points(r, 2 * i + 1), deltas[r].delta(i).rotational);
    }
  }
  for (std::size_t col = 0; col < 48; ++col) {
    EXPECT_EQ(fm.columns[col].image, col / 2);
    EXPECT_EQ(nn::kComponentNames[fm.columns[col].component], col % 2 ? "rotational" : "lateral");
  }
}

TEST(FeatureMatrix, ZeroDeltasGiveZeroMatrix) {
  auto deltas = synthetic(2, 3, 24, 2, 0.0);
  const auto fm = build_feature_matrix(deltas);
  for (double v : fm.points.values()) EXPECT_EQ(v, 0.0);
}

TEST(FeatureMatrix, NestedInputMatchesFlat) {
  const auto flat = synthetic(3, 4, 24, 3);
  std::vector<std::vector<AblationDelta>> nested(3);
  for (const auto& d : flat) nested[d.trial_id].push_back(d);
  EXPECT_EQ(build_feature_matrix(nested).points, build_feature_matrix(flat).points);
}

TEST(FeatureMatrix, MismatchedTrialsAreRejected) {
  auto deltas = synthetic(2, 3, 24, 4);
  deltas.pop_back();
  EXPECT_THROW(build_feature_matrix(deltas), PreconditionError);
  deltas = synthetic(2, 3, 24, 4);
  deltas.back().baseline.pop_back();
  deltas.back().ablated.pop_back();
  EXPECT_THROW(build_feature_matrix(deltas), PreconditionError);
}

TEST(Normalize, OneToTenBecomesStandardized) {
  FeatureMatrix fm;
  fm.points = Matrix(10, 2);
  for (std::size_t r = 0; r < 10; ++r) {
    fm.rows.push_back({0, r});
    fm.points(r, 0) = static_cast<double>(r + 1);
    fm.points(r, 1) = 4.0;
  }
  fm.columns = {{0, 1}, {0, 2}};
  const auto out = normalize_per_trial(fm);
  double mean = 0, ss = 0;
  for (std::size_t r = 0; r < 10; ++r) mean += out.points(r, 0) / 10.0;
  for (std::size_t r = 0; r < 10; ++r) ss += (out.points(r, 0) - mean) * (out.points(r, 0) - mean);
  EXPECT_NEAR(mean, 0.0, 1e-15);
  EXPECT_NEAR(std::sqrt(ss / 9.0), 1.0, 1e-14);
  // (1 - 5.5) / sqrt(55/6)
  EXPECT_NEAR(out.points(0, 0), -4.5 / std::sqrt(55.0 / 6.0), 1e-14);
  for (std::size_t r = 0; r < 10; ++r) EXPECT_EQ(out.points(r, 1), 0.0);
}

TEST(Normalize, NearConstantColumnIsZeroed) {
  FeatureMatrix fm;
  fm.points = Matrix(3, 1, std::vector<double>{1.0, 1.0 + 1e-14, 1.0});
  fm.rows = {{0, 0}, {0, 1}, {0, 2}};
  fm.columns = {{0, 1}};
  const auto out = normalize_per_trial(fm);
  for (double v : out.points.values()) EXPECT_EQ(v, 0.0);
}

TEST(Normalize, IdenticalTrialBlocksStayIdentical) {
  auto deltas = synthetic(1, 10, 24, 5);
  auto copy = deltas;
  for (auto& d : copy) d.trial_id = 1;
  deltas.insert(deltas.end(), copy.begin(), copy.end());
  const auto out = normalize_per_trial(build_feature_matrix(deltas));
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 48; ++c) EXPECT_EQ(out.points(r, c), out.points(r + 10, c));
}

TEST(Normalize, TrialsAreScaledIndependently) {
  auto a = synthetic(1, 10, 24, 6);
  auto b = a;
  for (auto& d : b) {
    d.trial_id = 1;
    for (auto& x : d.ablated)
      for (std::size_t c = 0; c < 3; ++c) x[c] = 0.0;
    for (std::size_t i = 0; i < d.baseline.size(); ++i) {
      // Trial 1 deltas are trial 0 deltas times 7.
      const auto delta = a[d.group_id].delta(i);
      for (std::size_t c = 0; c < 3; ++c) d.ablated[i][c] = d.baseline[i][c] + 7.0 * delta[c];
    }
  }
  a.insert(a.end(), b.begin(), b.end());
  const auto out = normalize_per_trial(build_feature_matrix(a));
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 48; ++c) EXPECT_NEAR(out.points(r, c), out.points(r + 10, c), 1e-9);
}

TEST(Normalize, SingleRowTrialIsRejected) {
  EXPECT_THROW(normalize_per_trial(build_feature_matrix(synthetic(2, 1, 24, 7))), PreconditionError);
}
