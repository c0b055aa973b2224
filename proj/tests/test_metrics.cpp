#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "robocooklab/error.hpp"
#include "robocooklab/metrics.hpp"
#include "robocooklab/rng.hpp"

using namespace rcl;

namespace {

PointCloud random_cloud(std::size_t n, Rng& rng, double extent = 1.0) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i)
    c.positions.push_back({rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                           rng.uniform(-extent, extent)});
  return c;
}

double brute_chamfer(const PointCloud& a, const PointCloud& b) {
  double total = 0.0;
  for (const Vec3& x : a.positions) {
    double best = 1e300;
    for (const Vec3& y : b.positions) best = std::min(best, norm2(x - y));
    total += best;
  }
  for (const Vec3& y : b.positions) {
    double best = 1e300;
    for (const Vec3& x : a.positions) best = std::min(best, norm2(x - y));
    total += best;
  }
  return total;
}

double brute_emd(const PointCloud& a, const PointCloud& b) {
  std::vector<int> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      cost += norm(a.positions[i] - b.positions[std::size_t(perm[i])]);
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double brute_assignment(const std::vector<double>& cost, int n) {
  std::vector<int> perm(static_cast<std::size_t>(n), 0);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += cost[std::size_t(i) * n + perm[std::size_t(i)]];
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("chamfer: identity, singleton pair, empty-cloud error") {
  Rng rng(1);
  PointCloud c = random_cloud(30, rng);
  CHECK(chamfer(c, c) == 0.0);

  PointCloud a, b;
  a.positions = {{0, 0, 0}};
  b.positions = {{1, 0, 0}};
  CHECK(chamfer(a, b) == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(chamfer(PointCloud{}, a), Error);
}

TEST_CASE("chamfer: equals brute force on random pairs") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    PointCloud a = random_cloud(64, rng);
    PointCloud b = random_cloud(64, rng);
    CHECK(std::abs(chamfer(a, b) - brute_chamfer(a, b)) < 1e-9);
  }
}

TEST_CASE("chamfer: exact symmetry") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    PointCloud a = random_cloud(40, rng);
    PointCloud b = random_cloud(53, rng);
    CHECK(chamfer(a, b) == chamfer(b, a));
  }
}

TEST_CASE("emd_exact: identity and mirrored pair") {
  Rng rng(4);
  PointCloud c = random_cloud(12, rng);
  EmdResult r = emd_exact(c, c);
  CHECK(r.cost == doctest::Approx(0.0).epsilon(1e-12));

  PointCloud a, b;
  a.positions = {{0, 0, 0}, {0, 0, 0}};
  b.positions = {{1, 0, 0}, {-1, 0, 0}};
  CHECK(emd_exact(a, b).cost == doctest::Approx(2.0).epsilon(1e-12));

  PointCloud odd = random_cloud(3, rng);
  CHECK_THROWS_AS(emd_exact(c, odd), Error);
}

TEST_CASE("emd_exact: equals factorial brute force for n <= 7") {
  Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t n = 1 + trial % 7;
    PointCloud a = random_cloud(n, rng);
    PointCloud b = random_cloud(n, rng);
    EmdResult r = emd_exact(a, b);
    CHECK(r.cost == brute_emd(a, b));

    // Assignment is a permutation and recomputes to the same cost.
    std::vector<char> seen(n, 0);
    double recomputed = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE(r.assignment[i] >= 0);
      REQUIRE(r.assignment[i] < int(n));
      seen[std::size_t(r.assignment[i])] = 1;
      recomputed += norm(a.positions[i] - b.positions[std::size_t(r.assignment[i])]);
    }
    CHECK(std::count(seen.begin(), seen.end(), 1) == int(n));
    CHECK(std::abs(recomputed - r.cost) < 1e-9);
  }
}

TEST_CASE("assignment_solve: integer matrices up to 8x8 match brute force exactly") {
  Rng rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 2 + int(trial % 7);
    std::vector<double> cost(std::size_t(n) * n);
    for (double& v : cost) v = double(rng.uniform_index(50));
    std::vector<int> perm = assignment_solve(cost, n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost[std::size_t(i) * n + perm[std::size_t(i)]];
    CHECK(total == brute_assignment(cost, n));
  }
}

TEST_CASE("emd_exact: invariant under a common rigid transform") {
  Rng rng(7);
  PointCloud a = random_cloud(24, rng, 0.05);
  PointCloud b = random_cloud(24, rng, 0.05);
  double base = emd_exact(a, b).cost;

  Mat3 rot = rot_axis_angle({0.4, -0.2, 0.7});
  Vec3 t{0.3, -0.1, 0.25};
  PointCloud ar = a, br = b;
  for (Vec3& p : ar.positions) p = rot * p + t;
  for (Vec3& p : br.positions) p = rot * p + t;
  CHECK(std::abs(emd_exact(ar, br).cost - base) < 1e-7);
}

TEST_CASE("emd_exact: centroid transport lower bound") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t n = 5 + rng.uniform_index(20);
    PointCloud a = random_cloud(n, rng);
    PointCloud b = random_cloud(n, rng);
    double lower = norm(a.centroid() - b.centroid()) * double(n);
    CHECK(emd_exact(a, b).cost >= lower - 1e-9);
  }
}

TEST_CASE("combined_loss: composition and weight degeneracies") {
  Rng rng(9);
  PointCloud c = random_cloud(16, rng);
  CHECK(combined_loss(c, c, {0.3, 0.7}) == doctest::Approx(0.0).epsilon(1e-12));

  PointCloud a = random_cloud(16, rng);
  PointCloud b = random_cloud(16, rng);
  CHECK(combined_loss(a, b, {1.0, 0.0}) == doctest::Approx(chamfer(a, b)).epsilon(1e-12));

  PointCloud s1, s2;
  s1.positions = {{0, 0, 0}};
  s2.positions = {{1, 0, 0}};
  // 0.5 * chamfer(2.0) + 0.5 * emd(1.0)
  CHECK(combined_loss(s1, s2, {0.5, 0.5}) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("normal_chamfer: identical zero, flipped normals closed form, random oracle") {
  Rng rng(10);
  PointCloud a = random_cloud(32, rng);
  a.normals.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    a.normals[i] = normalized(Vec3{rng.gaussian(), rng.gaussian(), rng.gaussian()});

  CHECK(normal_chamfer(a, a) == doctest::Approx(0.0).epsilon(1e-12));

  PointCloud flipped = a;
  for (Vec3& v : flipped.normals) v = -v;
  // Each direction contributes |n - (-n)|^2 = 4 per point.
  CHECK(normal_chamfer(a, flipped) == doctest::Approx(8.0 * double(a.size())).epsilon(1e-9));

  PointCloud b = random_cloud(64, rng);
  b.normals.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i)
    b.normals[i] = normalized(Vec3{rng.gaussian(), rng.gaussian(), rng.gaussian()});
  PointCloud a64 = random_cloud(64, rng);
  a64.normals.resize(a64.size());
  for (std::size_t i = 0; i < a64.size(); ++i)
    a64.normals[i] = normalized(Vec3{rng.gaussian(), rng.gaussian(), rng.gaussian()});

  // Independent oracle.
  double expect = 0.0;
  for (std::size_t i = 0; i < a64.size(); ++i) {
    double best = 1e300;
    std::size_t bj = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      double d = norm2(a64.positions[i] - b.positions[j]);
      if (d < best) { best = d; bj = j; }
    }
    expect += norm2(a64.normals[i] - b.normals[bj]);
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    double best = 1e300;
    std::size_t bi = 0;
    for (std::size_t i = 0; i < a64.size(); ++i) {
      double d = norm2(a64.positions[i] - b.positions[j]);
      if (d < best) { best = d; bi = i; }
    }
    expect += norm2(a64.normals[bi] - b.normals[j]);
  }
  CHECK(std::abs(normal_chamfer(a64, b) - expect) < 1e-9);

  PointCloud no_normals = random_cloud(8, rng);
  CHECK_THROWS_AS(normal_chamfer(no_normals, a), Error);
}

TEST_SUITE_END();
