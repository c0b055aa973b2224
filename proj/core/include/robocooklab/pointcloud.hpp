#pragma once

#include <cstdint>
#include <vector>

#include "robocooklab/geom.hpp"

namespace rcl {

/// Group label per point. 0 is the dough; tools use 1 + tool body index.
using GroupId = std::uint8_t;
constexpr GroupId kGroupDough = 0;

/// Positions in meters, workspace-local frame. Normals and groups are
/// optional; when present they run parallel to positions.
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;   // empty or same size as positions
  std::vector<GroupId> groups; // empty or same size as positions

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  bool has_normals() const { return !normals.empty(); }
  bool has_groups() const { return !groups.empty(); }

  Vec3 centroid() const;
  Aabb bounds() const;

  /// Concatenate, keeping whichever optional channels both sides carry.
  static PointCloud concat(const PointCloud& a, const PointCloud& b);
};

/// Result of fixed-count resampling. `repeated` is set when the input had
/// fewer points than requested and selections had to repeat.
struct ResampleResult {
  PointCloud cloud;
  bool repeated = false;
};

/// Voxel-grid filter: one point per occupied voxel at the member centroid.
/// Normals average (renormalized), groups resolve by majority (ties to the
/// lower label). Output voxels are ordered by first member index.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

/// Farthest-point (blue noise) selection of exactly k points from the input.
/// The seed picks a throwaway anchor; the first kept point is the one
/// farthest from it, so extremes are found regardless of seed. Deterministic.
ResampleResult surface_resample(const PointCloud& cloud, std::size_t k,
                                std::uint64_t seed);

/// Symmetric radius adjacency via a uniform hash grid with cell = radius.
/// adjacency[i] holds ascending j with |x_i - x_j| <= radius, j != i.
std::vector<std::vector<int>> radius_neighbors(const PointCloud& cloud,
                                               double radius);

/// Unit normals from the smallest eigenvector of the k-NN covariance,
/// oriented away from the cloud centroid. Degenerate neighborhoods fall
/// back to the radial direction.
std::vector<Vec3> estimate_normals(const PointCloud& cloud, std::size_t k);

/// Mean distance to the nearest neighbor; the length scale used for
/// default graph radii. Zero for clouds of fewer than two points.
double mean_spacing(const PointCloud& cloud);

}  // namespace rcl
