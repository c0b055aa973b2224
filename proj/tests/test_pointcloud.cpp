#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "robocooklab/error.hpp"
#include "robocooklab/pointcloud.hpp"
#include "robocooklab/rng.hpp"
#include "robocooklab/sdf.hpp"

using namespace rcl;

namespace {

PointCloud random_cloud(std::size_t n, Rng& rng, double extent = 1.0) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i)
    c.positions.push_back({rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                           rng.uniform(-extent, extent)});
  return c;
}

double min_pairwise_dist(const PointCloud& c) {
  double best = 1e300;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      best = std::min(best, norm(c.positions[i] - c.positions[j]));
  return best;
}

}  // namespace

TEST_SUITE_BEGIN("pointcloud");

TEST_CASE("voxel_downsample: corners of a small cube collapse to the center") {
  PointCloud c;
  for (int x = 0; x <= 1; ++x)
    for (int y = 0; y <= 1; ++y)
      for (int z = 0; z <= 1; ++z)
        c.positions.push_back({0.01 * x, 0.01 * y, 0.01 * z});
  PointCloud out = voxel_downsample(c, 0.10);
  REQUIRE(out.size() == 1);
  CHECK(norm(out.positions[0] - Vec3{0.005, 0.005, 0.005}) < 1e-12);
}

TEST_CASE("voxel_downsample: separate voxels stay separate") {
  PointCloud c;
  c.positions = {{0.001, 0.001, 0.001}, {0.051, 0.001, 0.001}};
  PointCloud out = voxel_downsample(c, 0.01);
  REQUIRE(out.size() == 2);
  CHECK(norm(out.positions[0] - c.positions[0]) < 1e-12);
  CHECK(norm(out.positions[1] - c.positions[1]) < 1e-12);
}

TEST_CASE("voxel_downsample: output count equals occupied voxel count") {
  Rng rng(7);
  PointCloud c;
  for (int i = 0; i < 1000; ++i)
    c.positions.push_back({rng.uniform(), rng.uniform(), rng.uniform()});

  // Independent occupancy count with a direct set of integer voxel keys.
  const double voxel = 0.25;
  std::set<std::array<long, 3>> occupied;
  for (const Vec3& p : c.positions)
    occupied.insert({long(std::floor(p.x / voxel)), long(std::floor(p.y / voxel)),
                     long(std::floor(p.z / voxel))});

  PointCloud out = voxel_downsample(c, voxel);
  CHECK(out.size() == occupied.size());
  CHECK(out.size() <= 64);
}

TEST_CASE("voxel_downsample: empty input, idempotence, group majority") {
  CHECK(voxel_downsample(PointCloud{}, 0.1).empty());

  Rng rng(3);
  PointCloud c = random_cloud(200, rng);
  PointCloud once = voxel_downsample(c, 0.3);
  PointCloud twice = voxel_downsample(once, 0.3);
  REQUIRE(once.size() == twice.size());
  for (std::size_t i = 0; i < once.size(); ++i)
    CHECK(norm(once.positions[i] - twice.positions[i]) < 1e-12);

  PointCloud g;
  g.positions = {{0, 0, 0}, {0.001, 0, 0}, {0.002, 0, 0}};
  g.groups = {1, 1, 0};
  PointCloud gout = voxel_downsample(g, 0.1);
  REQUIRE(gout.size() == 1);
  CHECK(gout.groups[0] == 1);
}

TEST_CASE("surface_resample: two extremes of a collinear run, any seed") {
  PointCloud c;
  for (int i = 0; i < 4; ++i) c.positions.push_back({double(i), 0, 0});

  // Brute-force oracle: the 2-subset maximizing the pairwise distance.
  double best = -1.0;
  std::pair<int, int> best_pair{0, 0};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      double d = norm(c.positions[i] - c.positions[j]);
      if (d > best) { best = d; best_pair = {i, j}; }
    }

  for (std::uint64_t seed : {0ull, 1ull, 42ull, 12345ull}) {
    ResampleResult r = surface_resample(c, 2, seed);
    REQUIRE(r.cloud.size() == 2);
    CHECK_FALSE(r.repeated);
    std::set<double> got{r.cloud.positions[0].x, r.cloud.positions[1].x};
    std::set<double> want{c.positions[best_pair.first].x, c.positions[best_pair.second].x};
    CHECK(got == want);
  }
}

TEST_CASE("surface_resample: k = n is a permutation of the input") {
  Rng rng(11);
  PointCloud c = random_cloud(40, rng);
  ResampleResult r = surface_resample(c, 40, 5);
  REQUIRE(r.cloud.size() == 40);
  CHECK_FALSE(r.repeated);
  std::set<std::array<double, 3>> in, out;
  for (const Vec3& p : c.positions) in.insert({p.x, p.y, p.z});
  for (const Vec3& p : r.cloud.positions) out.insert({p.x, p.y, p.z});
  CHECK(in == out);
}

TEST_CASE("surface_resample: deterministic; repeats flagged when k > n") {
  Rng rng(2);
  PointCloud c = random_cloud(50, rng);
  ResampleResult a = surface_resample(c, 20, 9);
  ResampleResult b = surface_resample(c, 20, 9);
  REQUIRE(a.cloud.size() == b.cloud.size());
  for (std::size_t i = 0; i < a.cloud.size(); ++i)
    CHECK(norm(a.cloud.positions[i] - b.cloud.positions[i]) == 0.0);

  ResampleResult padded = surface_resample(c, 60, 9);
  CHECK(padded.repeated);
  CHECK(padded.cloud.size() == 60);
}

TEST_CASE("surface_resample: blue-noise spacing beats random subsets") {
  Rng rng(21);
  PointCloud sphere;
  for (int i = 0; i < 10000; ++i) {
    Vec3 v{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    sphere.positions.push_back(normalized(v));
  }

  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    double fps_min = min_pairwise_dist(surface_resample(sphere, 300, seed).cloud);

    Rng pick(seed * 977 + 13);
    PointCloud random_subset;
    std::vector<int> order(sphere.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    pick.shuffle(order);
    for (int i = 0; i < 300; ++i) random_subset.positions.push_back(sphere.positions[order[i]]);
    double rand_min = min_pairwise_dist(random_subset);
    ratios.push_back(fps_min / rand_min);
  }
  std::sort(ratios.begin(), ratios.end());
  double median = ratios[ratios.size() / 2];
  CHECK(median >= 0.5);  // in practice far above 1
}

TEST_CASE("radius_neighbors: small line example and empty-radius case") {
  PointCloud c;
  c.positions = {{0, 0, 0}, {0.05, 0, 0}, {0.2, 0, 0}};
  auto adj = radius_neighbors(c, 0.1);
  CHECK(adj[0] == std::vector<int>{1});
  CHECK(adj[1] == std::vector<int>{0});
  CHECK(adj[2].empty());

  auto none = radius_neighbors(c, 0.04);
  for (const auto& a : none) CHECK(a.empty());
}

TEST_CASE("radius_neighbors: matches exhaustive pairwise search") {
  Rng rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    PointCloud c = random_cloud(512, rng, 0.5);
    const double radius = 0.1;
    auto adj = radius_neighbors(c, radius);

    for (std::size_t i = 0; i < c.size(); ++i) {
      std::vector<int> brute;
      for (std::size_t j = 0; j < c.size(); ++j) {
        if (i == j) continue;
        if (norm(c.positions[i] - c.positions[j]) <= radius) brute.push_back(int(j));
      }
      REQUIRE(adj[i] == brute);
    }
  }
}

TEST_CASE("sdf_eval: sphere and box reference values") {
  SdfShape sphere = SdfShape::sphere(1.0);
  CHECK(sphere.eval({2, 0, 0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sphere.eval({0, 0, 0}) == doctest::Approx(-1.0).epsilon(1e-12));

  SdfShape box = SdfShape::box({1, 1, 1});
  CHECK(box.eval({2, 2, 0}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  // Cross-check the corner distance against dense surface sampling.
  PointCloud surf = box.sample_surface(4000, 3);
  REQUIRE(surf.size() > 1000);
  double best = 1e300;
  for (const Vec3& p : surf.positions) best = std::min(best, norm(p - Vec3{2, 2, 0}));
  CHECK(best == doctest::Approx(std::sqrt(2.0)).epsilon(2e-2));
}

TEST_CASE("sdf_eval: every primitive is 1-Lipschitz on random pairs") {
  std::vector<SdfShape> shapes;
  shapes.push_back(SdfShape::sphere(0.7));
  shapes.push_back(SdfShape::box({0.5, 0.3, 0.8}));
  shapes.push_back(SdfShape::cylinder(0.4, 0.6));
  shapes.push_back(SdfShape::capsule({0, 0, -0.5}, {0, 0, 0.5}, 0.3));
  shapes.push_back(SdfShape::halfspace({0, 0, 1}, {0, 0, 0.1}));
  Pose tilted{rot_axis_angle({0.3, 0.2, 0.9}), {0.1, -0.2, 0.3}};
  shapes.push_back(SdfShape::box({0.4, 0.2, 0.1}, tilted));
  shapes.push_back(SdfShape::union_of({SdfShape::sphere(0.5), SdfShape::box({0.2, 0.9, 0.2})}));

  Rng rng(17);
  for (const SdfShape& s : shapes) {
    for (int i = 0; i < 10000; ++i) {
      Vec3 p{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
      Vec3 q{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
      REQUIRE(std::abs(s.eval(p) - s.eval(q)) <= norm(p - q) + 1e-9);
    }
  }
}

TEST_CASE("remove_penetrating: all-outside identity, all-inside empty, halfspace sign oracle") {
  SdfShape sphere = SdfShape::sphere(0.5);
  Rng rng(23);

  PointCloud outside;
  for (int i = 0; i < 50; ++i)
    outside.positions.push_back(normalized(Vec3{rng.gaussian(), rng.gaussian(), rng.gaussian()}) * 2.0);
  CHECK(remove_penetrating(outside, sphere).size() == outside.size());

  PointCloud inside;
  for (int i = 0; i < 50; ++i)
    inside.positions.push_back(normalized(Vec3{rng.gaussian(), rng.gaussian(), rng.gaussian()}) * 0.2);
  CHECK(remove_penetrating(inside, sphere).empty());

  // Solid halfspace below z=0: sdf(p) = p.z, so the retained set is {p_z >= 0}
  // up to the boundary tolerance.
  SdfShape lower = SdfShape::halfspace({0, 0, 1}, {0, 0, 0});
  PointCloud mixed = random_cloud(100, rng, 1.0);
  PointCloud kept = remove_penetrating(mixed, lower);
  std::size_t expect = 0;
  for (const Vec3& p : mixed.positions)
    if (p.z >= -1e-6) ++expect;
  CHECK(kept.size() == expect);
  for (const Vec3& p : kept.positions) CHECK(p.z >= -1e-6);
}

TEST_CASE("estimate_normals: plane, sphere, and degenerate fallback") {
  Rng rng(31);

  PointCloud plane;
  for (int i = 0; i < 200; ++i)
    plane.positions.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0});
  auto n = estimate_normals(plane, 8);
  for (const Vec3& v : n) {
    CHECK(std::abs(norm(v) - 1.0) < 1e-9);
    CHECK(std::abs(std::abs(v.z) - 1.0) < 1e-9);
  }

  PointCloud sphere;
  for (int i = 0; i < 500; ++i)
    sphere.positions.push_back(normalized(Vec3{rng.gaussian(), rng.gaussian(), rng.gaussian()}));
  auto sn = estimate_normals(sphere, 12);
  int good = 0;
  for (std::size_t i = 0; i < sphere.size(); ++i)
    if (dot(sn[i], normalized(sphere.positions[i])) > 0.9) ++good;
  CHECK(double(good) / double(sphere.size()) >= 0.95);

  PointCloud degenerate;
  for (int i = 0; i < 6; ++i) degenerate.positions.push_back({0.3, 0.0, 0.0});
  degenerate.positions.push_back({-0.3, 0, 0});  // shift centroid off the repeated point
  auto dn = estimate_normals(degenerate, 4);
  CHECK(std::abs(norm(dn[0]) - 1.0) < 1e-9);
  CHECK(dot(dn[0], Vec3{1, 0, 0}) > 0.99);  // radial away from centroid
}

TEST_SUITE_END();
