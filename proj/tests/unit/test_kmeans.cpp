#include <gtest/gtest.h>

#include <cmath>

#include "nnablate/analysis/kmeans.hpp"
#include "oracles.hpp"

using namespace nnablate;
using namespace nnablate::analysis;

namespace {

Matrix to_matrix(const oracle::Points& pts) {
  Matrix m(pts.size(), pts[0].size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts[i].size(); ++j) m(i, j) = pts[i][j];
  return m;
}

oracle::Points random_points(Rng& rng, std::size_t n, std::size_t d) {
  oracle::Points pts(n, std::vector<double>(d));
  for (auto& p : pts)
    for (double& v : p) v = rng.normal();
  return pts;
}

}  // namespace

TEST(KMeans, TwoPairsOnALine) {
  const Matrix pts(4, 1, std::vector<double>{0.0, 0.1, 10.0, 10.1});
  const auto r = kmeans(pts, 2, 1);
  EXPECT_NEAR(r.inertia, 0.01, 1e-12);
  EXPECT_NEAR(r.inertia, oracle::exhaustive_two_means({{0.0}, {0.1}, {10.0}, {10.1}}), 1e-12);
  std::vector<double> c = {r.centroids(0, 0), r.centroids(1, 0)};
  std::sort(c.begin(), c.end());
  EXPECT_NEAR(c[0], 0.05, 1e-12);
  EXPECT_NEAR(c[1], 10.05, 1e-12);
  EXPECT_EQ(r.labels[0], r.labels[1]);
  EXPECT_EQ(r.labels[2], r.labels[3]);
  EXPECT_NE(r.labels[0], r.labels[2]);
}

TEST(KMeans, KEqualsNGivesZeroInertia) {
  Rng rng(2);
  const Matrix pts = to_matrix(random_points(rng, 9, 3));
  EXPECT_EQ(kmeans(pts, 9, 4).inertia, 0.0);
}

TEST(KMeans, IdenticalPointsRepairEmptyCluster) {
  const Matrix pts(6, 2, 3.5);
  KMeansResult r;
  ASSERT_NO_THROW(r = kmeans(pts, 2, 1));
  EXPECT_EQ(r.inertia, 0.0);
  EXPECT_GT(r.repairs, 0u);
  for (auto l : r.labels) EXPECT_LT(l, 2u);
}

TEST(KMeans, PreconditionsAreChecked) {
  const Matrix pts(3, 1, std::vector<double>{1, 2, 3});
  EXPECT_THROW(kmeans(pts, 4, 1), PreconditionError);
  EXPECT_THROW(kmeans(pts, 0, 1), PreconditionError);
  EXPECT_THROW(kmeans(pts, 2, 1, 0), PreconditionError);
}

TEST(KMeans, LabelsAreVoronoiWithLowestIndexTies) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix pts = to_matrix(random_points(rng, 40, 4));
    const std::size_t k = 2 + rng.below(6);
    const auto r = kmeans(pts, k, trial);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(pts.row(i), r.centroids.row(0));
      for (std::size_t c = 1; c < k; ++c) {
        const double d = squared_distance(pts.row(i), r.centroids.row(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      EXPECT_EQ(r.labels[i], best);
    }
  }
  // A point equidistant from two centroids goes to the lower index.
  const Matrix c(2, 1, std::vector<double>{-1.0, 1.0});
  const double origin[] = {0.0};
  EXPECT_EQ(nearest_centroid(origin, c), 0u);
}

TEST(KMeans, InertiaNeverIncreasesAcrossIterations) {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix pts = to_matrix(random_points(rng, 60, 3));
    Rng init(trial);
    const auto r = lloyd(pts, kmeanspp_init(pts, 5, init));
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i)
      EXPECT_LE(r.inertia_history[i], r.inertia_history[i - 1] * (1 + 1e-12));
    if (!r.inertia_history.empty()) EXPECT_LE(r.inertia, r.inertia_history.back() * (1 + 1e-12));
  }
}

TEST(KMeans, MatchesExhaustiveOptimumOnSmallInstances) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.below(6), d = 1 + rng.below(3);
    const auto pts = random_points(rng, n, d);
    const double best = oracle::exhaustive_two_means(pts);
    const double got = kmeans(to_matrix(pts), 2, 100 + trial, 20).inertia;
    EXPECT_LE(std::abs(got - best), 1e-9 * std::max(best, 1e-300)) << "instance " << trial;
  }
}

TEST(KMeans, DeterministicForSeed) {
  Rng rng(6);
  const Matrix pts = to_matrix(random_points(rng, 50, 5));
  const auto a = kmeans(pts, 4, 9), b = kmeans(pts, 4, 9);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.centroids, b.centroids);
}
