#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "support/synth.hpp"
#include "textseam/error.hpp"
#include "textseam/kernels.hpp"
#include "textseam/reference.hpp"
#include "textseam/tda.hpp"

using namespace textseam;

namespace {

// Kruskal over every pair with a union-find; independent of the Prim code.
double kruskal_mst(const PointCloud& c, double alpha) {
  struct Edge {
    double w;
    std::size_t a, b;
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < c.dim(); ++k) s += (c.point(i)[k] - c.point(j)[k]) * (c.point(i)[k] - c.point(j)[k]);
      edges.push_back({std::sqrt(s), i, j});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.w < y.w; });
  std::vector<std::size_t> parent(c.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  double total = 0.0;
  for (const auto& e : edges) {
    const auto ra = find(e.a), rb = find(e.b);
    if (ra == rb) continue;
    parent[ra] = rb;
    total += std::pow(e.w, alpha);
  }
  return total;
}

PointCloud transform(const PointCloud& c, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const std::size_t d = c.dim();
  // Random rotation by Gram-Schmidt.
  std::vector<std::vector<double>> q;
  while (q.size() < d) {
    std::vector<double> v(d);
    for (double& x : v) x = normal(rng);
    for (const auto& u : q) {
      const double dot = std::inner_product(v.begin(), v.end(), u.begin(), 0.0);
      for (std::size_t k = 0; k < d; ++k) v[k] -= dot * u[k];
    }
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    for (double& x : v) x /= norm;
    q.push_back(v);
  }
  std::vector<double> shift(d);
  for (double& x : shift) x = normal(rng);
  std::vector<double> coords;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t r = 0; r < d; ++r) {
      coords.push_back(scale * std::inner_product(q[r].begin(), q[r].end(), c.point(i).begin(), 0.0) + shift[r]);
    }
  }
  return PointCloud(c.size(), d, std::move(coords));
}

}  // namespace

TEST(PointCloud, Invariants) {
  EXPECT_THROW(PointCloud(1, 2, {0.0, 0.0}), ValidationError);
  EXPECT_THROW(PointCloud(2, 0, {}), ValidationError);
  EXPECT_THROW(PointCloud(2, 1, {0.0, NAN}), ValidationError);
  EXPECT_THROW(PointCloud(2, 2, {0.0, 1.0, 2.0}), ValidationError);
}

TEST(PointCloud, CollapseDuplicatesKeepsFirst) {
  const PointCloud c(4, 1, {1.0, 2.0, 1.0, 3.0});
  const PointCloud d = collapse_duplicates(c);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.coords(), (std::vector<double>{1.0, 2.0, 3.0}));
  EXPECT_THROW(collapse_duplicates(PointCloud(3, 1, {5.0, 5.0, 5.0})), NumericError);
}

TEST(Mst, HandExamples) {
  EXPECT_DOUBLE_EQ(euclidean_mst_length(PointCloud(3, 1, {0.0, 1.0, 3.0})), 3.0);
  EXPECT_DOUBLE_EQ(euclidean_mst_length(PointCloud(4, 2, {0, 0, 1, 0, 0, 1, 1, 1})), 3.0);
  EXPECT_EQ(euclidean_mst_length(PointCloud(3, 2, {1, 1, 1, 1, 1, 1})), 0.0);
  EXPECT_DOUBLE_EQ(euclidean_mst_length(PointCloud(3, 1, {0.0, 1.0, 3.0}), 2.0), 5.0);
}

TEST(Mst, MatchesKruskalOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 11, d = 1 + rng() % 4;
    const auto cloud = synth::gaussian_cloud(n, d, rng());
    for (double alpha : {1.0, 0.5, 2.0}) {
      const double oracle = kruskal_mst(cloud, alpha);
      EXPECT_NEAR(euclidean_mst_length(cloud, alpha), oracle, 1e-9 * oracle);
    }
  }
}

TEST(Mst, RigidMotionAndScaling) {
  const auto cloud = synth::gaussian_cloud(60, 5, 3);
  const double base = euclidean_mst_length(cloud);
  EXPECT_NEAR(euclidean_mst_length(transform(cloud, 1.0, 4)), base, 1e-9 * base);
  EXPECT_NEAR(euclidean_mst_length(transform(cloud, 3.5, 5)), 3.5 * base, 1e-9 * base);
}

TEST(Mst, ParallelMatchesSerialExactly) {
  for (std::size_t n : {5u, 300u, 700u}) {
    const auto cloud = synth::gaussian_cloud(n, 16, n);
    EXPECT_EQ(kernels::prim_mst_length(cloud, 1.0), reference::prim_mst_length(cloud, 1.0));
    EXPECT_EQ(kernels::prim_mst_length(cloud, 0.7), reference::prim_mst_length(cloud, 0.7));
  }
}

TEST(Phd, DefaultSchedule) {
  const auto s = default_phd_schedule(1000);
  ASSERT_EQ(s.size(), 8u);
  EXPECT_EQ(s.front(), 100u);
  EXPECT_EQ(s.back(), 1000u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  const auto small = default_phd_schedule(20);
  EXPECT_EQ(small.front(), 8u);
  EXPECT_EQ(small.back(), 20u);
  const auto tiny = default_phd_schedule(6);
  EXPECT_GE(tiny.size(), 2u);
  EXPECT_EQ(tiny.back(), 6u);
  EXPECT_THROW(default_phd_schedule(4), ValidationError);
}

TEST(Phd, RecoversSegmentAndSquare) {
  const double d1 = phd(synth::cube_manifold(1000, 1, 8, 21), {.seed = 1});
  EXPECT_GE(d1, 0.7);
  EXPECT_LE(d1, 1.4);
  const double d2 = phd(synth::cube_manifold(1000, 2, 8, 22), {.seed = 1});
  EXPECT_GE(d2, 1.5);
  EXPECT_LE(d2, 2.6);
}

TEST(Phd, ScaleLeavesSlopeUnchanged) {
  const auto cloud = synth::cube_manifold(400, 3, 8, 5);
  const PhdFit a = phd_fit(cloud, {.seed = 9});
  std::vector<double> scaled(cloud.coords());
  for (double& v : scaled) v *= 7.25;
  const PhdFit b = phd_fit(PointCloud(cloud.size(), cloud.dim(), scaled), {.seed = 9});
  EXPECT_NEAR(a.slope, b.slope, 1e-6);
  for (std::size_t i = 0; i < a.mass.size(); ++i) EXPECT_NEAR(std::log(b.mass[i]) - std::log(a.mass[i]), std::log(7.25), 1e-9);
}

TEST(Phd, DegenerateAndDeterministic) {
  const PointCloud same(50, 2, std::vector<double>(100, 1.0));
  try {
    phd(same);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_STREQ(e.what(), "degenerate cloud");
  }
  const auto cloud = synth::gaussian_cloud(200, 4, 8);
  EXPECT_EQ(phd(cloud, {.seed = 3}), phd(cloud, {.seed = 3}));
}

TEST(Tle, RecoversSegmentAndDisk) {
  const double d1 = tle(synth::cube_manifold(500, 1, 10, 31));
  EXPECT_GE(d1, 0.7);
  EXPECT_LE(d1, 1.4);
  const double d2 = tle(synth::cube_manifold(500, 2, 10, 32));
  EXPECT_GE(d2, 1.5);
  EXPECT_LE(d2, 2.7);
}

TEST(Tle, Preconditions) {
  EXPECT_THROW(tle(synth::gaussian_cloud(21, 3, 1), {.k = 20}), ValidationError);
  EXPECT_THROW(tle(synth::gaussian_cloud(30, 3, 1), {.k = 1}), ValidationError);
  EXPECT_NO_THROW(tle(synth::gaussian_cloud(22, 3, 1), {.k = 20}));
}

TEST(Tle, PermutationAndScaleInvariant) {
  const auto cloud = synth::cube_manifold(200, 3, 8, 41);
  const double base = tle(cloud, {.k = 10});
  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(2);
  std::shuffle(order.begin(), order.end(), rng);
  EXPECT_NEAR(tle(cloud.subset(order), {.k = 10}), base, 1e-9 * base);
  std::vector<double> scaled(cloud.coords());
  for (double& v : scaled) v *= 0.01;
  EXPECT_NEAR(tle(PointCloud(cloud.size(), cloud.dim(), scaled), {.k = 10}), base, 1e-6 * base);
}

TEST(Tle, CenterFlagChangesTheNeighborhood) {
  const auto cloud = synth::cube_manifold(300, 2, 8, 43);
  const double with = tle(cloud, {.k = 15, .include_center = true});
  const double without = tle(cloud, {.k = 15, .include_center = false});
  EXPECT_NE(with, without);
  EXPECT_GT(without, 1.0);
  EXPECT_LT(without, 3.0);
}

TEST(Kernels, TleAndDistancesMatchReference) {
  const auto cloud = synth::gaussian_cloud(150, 6, 12);
  EXPECT_EQ(kernels::pairwise_sq_distances(cloud), reference::pairwise_sq_distances(cloud));
  EXPECT_EQ(kernels::tle_point_estimates(cloud, {.k = 12}), reference::tle_point_estimates(cloud, {.k = 12}));
}
