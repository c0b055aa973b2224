#include "robocooklab/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <unordered_map>

#include "robocooklab/error.hpp"
#include "robocooklab/rng.hpp"

namespace rcl {

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= std::uint64_t(v);
      h *= 0x100000001b3ull;
    }
    return std::size_t(h);
  }
};

VoxelKey voxel_of(const Vec3& p, double voxel) {
  return {std::int64_t(std::floor(p.x / voxel)),
          std::int64_t(std::floor(p.y / voxel)),
          std::int64_t(std::floor(p.z / voxel))};
}

}  // namespace

Vec3 PointCloud::centroid() const {
  Vec3 c;
  for (const Vec3& p : positions) c += p;
  return positions.empty() ? c : c / double(positions.size());
}

Aabb PointCloud::bounds() const {
  Aabb b;
  for (const Vec3& p : positions) b.grow(p);
  return b;
}

PointCloud PointCloud::concat(const PointCloud& a, const PointCloud& b) {
  PointCloud out;
  out.positions = a.positions;
  out.positions.insert(out.positions.end(), b.positions.begin(), b.positions.end());
  if (a.has_normals() && b.has_normals()) {
    out.normals = a.normals;
    out.normals.insert(out.normals.end(), b.normals.begin(), b.normals.end());
  }
  if (a.has_groups() && b.has_groups()) {
    out.groups = a.groups;
    out.groups.insert(out.groups.end(), b.groups.begin(), b.groups.end());
  }
  return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (voxel <= 0.0) throw Error(ErrorCode::BAD_RANGE, "voxel size must be positive");
  PointCloud out;
  if (cloud.empty()) return out;

  struct Cell {
    Vec3 pos_sum;
    Vec3 normal_sum;
    std::map<GroupId, int> group_votes;
    int count = 0;
    std::size_t first_index = 0;
  };
  std::unordered_map<VoxelKey, Cell, VoxelKeyHash> cells;
  cells.reserve(cloud.size());

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    VoxelKey key = voxel_of(cloud.positions[i], voxel);
    auto [it, inserted] = cells.try_emplace(key);
    Cell& c = it->second;
    if (inserted) c.first_index = i;
    c.pos_sum += cloud.positions[i];
    if (cloud.has_normals()) c.normal_sum += cloud.normals[i];
    if (cloud.has_groups()) c.group_votes[cloud.groups[i]]++;
    c.count++;
  }

  // Hash-map order is not deterministic across platforms; order output by
  // the first input index that touched each voxel.
  std::vector<const Cell*> ordered;
  ordered.reserve(cells.size());
  for (const auto& [key, cell] : cells) ordered.push_back(&cell);
  std::sort(ordered.begin(), ordered.end(),
            [](const Cell* a, const Cell* b) { return a->first_index < b->first_index; });

  for (const Cell* c : ordered) {
    out.positions.push_back(c->pos_sum / double(c->count));
    if (cloud.has_normals()) out.normals.push_back(normalized(c->normal_sum));
    if (cloud.has_groups()) {
      GroupId best = 0;
      int best_votes = -1;
      for (const auto& [g, votes] : c->group_votes) {
        if (votes > best_votes) { best = g; best_votes = votes; }
      }
      out.groups.push_back(best);
    }
  }
  return out;
}

ResampleResult surface_resample(const PointCloud& cloud, std::size_t k,
                                std::uint64_t seed) {
  if (cloud.empty()) throw Error(ErrorCode::EMPTY_CLOUD, "surface_resample");
  if (k == 0) throw Error(ErrorCode::BAD_RANGE, "k must be >= 1");

  const std::size_t n = cloud.size();
  Rng rng(seed);
  std::size_t anchor = std::size_t(rng.uniform_index(n));

  // The anchor is not kept: the first selected point is the one farthest
  // from it, which pins down extremes independent of the seed.
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);
  std::vector<std::size_t> selected;
  selected.reserve(std::min(k, n));

  std::size_t first = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = norm2(cloud.positions[i] - cloud.positions[anchor]);
    if (d2 > best) { best = d2; first = i; }
  }
  selected.push_back(first);
  taken[first] = 1;

  while (selected.size() < std::min(k, n)) {
    const Vec3& last = cloud.positions[selected.back()];
    std::size_t far_idx = n;
    double far_d2 = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d2 = norm2(cloud.positions[i] - last);
      if (d2 < min_d2[i]) min_d2[i] = d2;
      if (!taken[i] && min_d2[i] > far_d2) { far_d2 = min_d2[i]; far_idx = i; }
    }
    selected.push_back(far_idx);
    taken[far_idx] = 1;
  }

  ResampleResult result;
  result.repeated = k > n;
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t idx = selected[j % selected.size()];
    result.cloud.positions.push_back(cloud.positions[idx]);
    if (cloud.has_normals()) result.cloud.normals.push_back(cloud.normals[idx]);
    if (cloud.has_groups()) result.cloud.groups.push_back(cloud.groups[idx]);
  }
  return result;
}

std::vector<std::vector<int>> radius_neighbors(const PointCloud& cloud,
                                               double radius) {
  if (radius <= 0.0) throw Error(ErrorCode::BAD_RANGE, "radius must be positive");
  const std::size_t n = cloud.size();
  std::vector<std::vector<int>> adjacency(n);
  if (n < 2) return adjacency;

  std::unordered_map<VoxelKey, std::vector<int>, VoxelKeyHash> grid;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    grid[voxel_of(cloud.positions[i], radius)].push_back(int(i));

  const double r2 = radius * radius;
  for (std::size_t i = 0; i < n; ++i) {
    VoxelKey base = voxel_of(cloud.positions[i], radius);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = grid.find({base.x + dx, base.y + dy, base.z + dz});
          if (it == grid.end()) continue;
          for (int j : it->second) {
            if (j == int(i)) continue;
            if (norm2(cloud.positions[i] - cloud.positions[j]) <= r2)
              adjacency[i].push_back(j);
          }
        }
    std::sort(adjacency[i].begin(), adjacency[i].end());
  }
  return adjacency;
}

double mean_spacing(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      best = std::min(best, norm2(cloud.positions[i] - cloud.positions[j]));
    }
    sum += std::sqrt(best);
  }
  return sum / double(n);
}

std::vector<Vec3> estimate_normals(const PointCloud& cloud, std::size_t k) {
  const std::size_t n = cloud.size();
  if (k < 3) throw Error(ErrorCode::BAD_RANGE, "k must be >= 3");
  if (n < k) throw Error(ErrorCode::SIZE_MISMATCH, "cloud smaller than k");

  Vec3 centroid = cloud.centroid();
  std::vector<Vec3> normals(n);
  std::vector<std::pair<double, int>> dist(n);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      dist[j] = {norm2(cloud.positions[j] - cloud.positions[i]), int(j)};
    std::nth_element(dist.begin(), dist.begin() + k - 1, dist.end());

    Vec3 mean;
    for (std::size_t j = 0; j < k; ++j) mean += cloud.positions[dist[j].second];
    mean = mean / double(k);

    Mat3 cov;
    cov.m.fill(0.0);
    for (std::size_t j = 0; j < k; ++j) {
      Vec3 d = cloud.positions[dist[j].second] - mean;
      cov(0, 0) += d.x * d.x; cov(0, 1) += d.x * d.y; cov(0, 2) += d.x * d.z;
      cov(1, 1) += d.y * d.y; cov(1, 2) += d.y * d.z;
      cov(2, 2) += d.z * d.z;
    }
    cov(1, 0) = cov(0, 1); cov(2, 0) = cov(0, 2); cov(2, 1) = cov(1, 2);

    std::array<double, 3> eig;
    Mat3 vecs;
    eigen_sym3(cov, eig, vecs);

    Vec3 outward = cloud.positions[i] - centroid;
    // Rank < 2 means no plane is defined; fall back to the radial direction.
    if (eig[1] <= 1e-18 * std::max(1.0, eig[2])) {
      Vec3 radial = normalized(outward);
      normals[i] = norm2(radial) > 0.0 ? radial : Vec3{0, 0, 1};
      continue;
    }
    Vec3 normal{vecs(0, 0), vecs(1, 0), vecs(2, 0)};
    normal = normalized(normal);
    if (dot(normal, outward) < 0.0) normal = -normal;
    normals[i] = normal;
  }
  return normals;
}

}  // namespace rcl
