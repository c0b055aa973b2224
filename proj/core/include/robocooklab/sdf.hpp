#pragma once

#include <memory>
#include <vector>

#include "robocooklab/geom.hpp"
#include "robocooklab/pointcloud.hpp"

namespace rcl {

/// Signed distance shape: analytic primitives plus unions, each with its own
/// pose. Distances are exact (1-Lipschitz) for every primitive.
class SdfShape {
 public:
  enum class Kind { Box, Cylinder, Capsule, Halfspace, Sphere, Union };

  /// Axis-aligned box of given half extents, then posed.
  static SdfShape box(const Vec3& half_extents, const Pose& pose = {});
  /// Cylinder with axis +z, given radius and half height, then posed.
  static SdfShape cylinder(double radius, double half_height, const Pose& pose = {});
  /// Capsule from a to b (local frame) with radius, then posed.
  static SdfShape capsule(const Vec3& a, const Vec3& b, double radius, const Pose& pose = {});
  /// Solid halfspace: inside is where dot(normal, p - point) < 0.
  static SdfShape halfspace(const Vec3& outward_normal, const Vec3& point_on_plane);
  static SdfShape sphere(double radius, const Pose& pose = {});
  static SdfShape union_of(std::vector<SdfShape> parts);

  Kind kind() const { return kind_; }
  const Pose& pose() const { return pose_; }
  void set_pose(const Pose& p) { pose_ = p; }

  /// Signed distance: negative inside, positive outside, zero on boundary.
  double eval(const Vec3& p) const;

  /// Outward gradient by central differences (unit length away from the
  /// surface; zero vector only at singular interior points).
  Vec3 gradient(const Vec3& p, double h = 1e-7) const;

  /// Deterministic surface sample of roughly n points with outward normals.
  PointCloud sample_surface(std::size_t n, std::uint64_t seed) const;

  const std::vector<SdfShape>& parts() const { return parts_; }
  const Vec3& dims() const { return dims_; }
  const Vec3& seg_a() const { return seg_a_; }
  const Vec3& seg_b() const { return seg_b_; }

 private:
  SdfShape() = default;
  double eval_local(const Vec3& p) const;

  Kind kind_ = Kind::Sphere;
  Pose pose_;
  Vec3 dims_;          // box: half extents; cylinder: (r, half_h, _); sphere: (r, _, _)
  Vec3 seg_a_, seg_b_; // capsule endpoints (local)
  std::vector<SdfShape> parts_;
};

/// Keeps exactly the points with sdf >= -1e-6 (boundary-tolerant).
PointCloud remove_penetrating(const PointCloud& cloud, const SdfShape& tool);

}  // namespace rcl
