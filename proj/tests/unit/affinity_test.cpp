#include <gtest/gtest.h>

#include <set>

#include "support/oracles.hpp"
#include "webcent/classify.hpp"
#include "webcent/error.hpp"

namespace webcent::classify {
namespace {

using testing::kSeed;
using testing::Rng;

void expect_recovers(const std::vector<Point2>& pts, int k, double threshold) {
  auto result = affinity_propagation(pts);
  EXPECT_TRUE(result.converged);
  EXPECT_EQ(result.exemplars.size(), static_cast<std::size_t>(k));
  auto labels = testing::canonical_labels(result.labels);
  EXPECT_EQ(labels, testing::threshold_partition(pts, threshold));
  EXPECT_EQ(labels, testing::kmeans(pts, k));
  for (std::size_t e : result.exemplars) EXPECT_EQ(result.labels[e], e);
}

TEST(AffinityPropagation, TwoSeparatedClusters) {
  Rng rng(kSeed);
  std::vector<Point2> centers{{0, 0}, {10, 10}};
  auto pts = testing::gaussian_blobs(rng, centers, 10, 0.1);
  expect_recovers(pts, 2, 3.0);
}

TEST(AffinityPropagation, ThreeGaussianBlobs) {
  Rng rng(kSeed + 1);
  std::vector<Point2> centers{{0, 0}, {10, 0}, {5, 9}};
  auto pts = testing::gaussian_blobs(rng, centers, 15, 0.3);
  expect_recovers(pts, 3, 3.0);
}

TEST(AffinityPropagation, IdenticalPointsWithZeroPreference) {
  std::vector<Point2> pts(6, Point2{1, 1});
  AffinityParams p;
  p.preference = 0.0;
  auto r = affinity_propagation(pts, p);
  EXPECT_EQ(r.exemplars.size(), 1u);
  for (std::size_t l : r.labels) EXPECT_EQ(l, r.exemplars[0]);
}

TEST(AffinityPropagation, Deterministic) {
  Rng rng(kSeed + 2);
  std::vector<Point2> centers{{0, 0}, {4, 1}, {1, 5}, {6, 6}};
  auto pts = testing::gaussian_blobs(rng, centers, 12, 0.8);
  auto a = affinity_propagation(pts);
  for (int i = 0; i < 3; ++i) {
    auto b = affinity_propagation(pts);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.exemplars, b.exemplars);
    EXPECT_EQ(a.iterations_run, b.iterations_run);
    EXPECT_EQ(a.converged, b.converged);
  }
}

TEST(AffinityPropagation, LabelsPointAtExemplars) {
  Rng rng(kSeed + 3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 20; ++t) {
    std::vector<Point2> pts(3 + rng() % 40);
    for (auto& p : pts) p = {u(rng), u(rng)};
    auto r = affinity_propagation(pts);
    ASSERT_EQ(r.labels.size(), pts.size());
    std::set<std::size_t> ex(r.exemplars.begin(), r.exemplars.end());
    EXPECT_TRUE(std::is_sorted(r.exemplars.begin(), r.exemplars.end()));
    for (std::size_t l : r.labels) EXPECT_TRUE(ex.count(l));
    EXPECT_GT(r.iterations_run, 0);
  }
}

TEST(AffinityPropagation, NonConvergenceIsReported) {
  Rng rng(kSeed + 4);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Point2> pts(30);
  for (auto& p : pts) p = {u(rng), u(rng)};
  AffinityParams p;
  p.max_iter = 3;
  p.convergence_iter = 50;
  auto r = affinity_propagation(pts, p);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations_run, 3);
  EXPECT_EQ(r.labels.size(), pts.size());
}

TEST(AffinityPropagation, Errors) {
  std::vector<Point2> pts{{0, 0}, {1, 1}};
  AffinityParams bad;
  bad.damping = 0.4;
  EXPECT_THROW(affinity_propagation(pts, bad), InvalidArgument);
  bad.damping = 1.0;
  EXPECT_THROW(affinity_propagation(pts, bad), InvalidArgument);
  std::vector<Point2> one{{0, 0}};
  EXPECT_THROW(affinity_propagation(one), InvalidArgument);
}

}  // namespace
}  // namespace webcent::classify
