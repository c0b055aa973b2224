#include "robocooklab/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robocooklab/rng.hpp"

namespace rcl {

SdfShape SdfShape::box(const Vec3& half_extents, const Pose& pose) {
  SdfShape s;
  s.kind_ = Kind::Box;
  s.dims_ = half_extents;
  s.pose_ = pose;
  return s;
}

SdfShape SdfShape::cylinder(double radius, double half_height, const Pose& pose) {
  SdfShape s;
  s.kind_ = Kind::Cylinder;
  s.dims_ = {radius, half_height, 0.0};
  s.pose_ = pose;
  return s;
}

SdfShape SdfShape::capsule(const Vec3& a, const Vec3& b, double radius, const Pose& pose) {
  SdfShape s;
  s.kind_ = Kind::Capsule;
  s.seg_a_ = a;
  s.seg_b_ = b;
  s.dims_ = {radius, 0.0, 0.0};
  s.pose_ = pose;
  return s;
}

SdfShape SdfShape::halfspace(const Vec3& outward_normal, const Vec3& point_on_plane) {
  SdfShape s;
  s.kind_ = Kind::Halfspace;
  s.dims_ = normalized(outward_normal);
  s.seg_a_ = point_on_plane;
  return s;
}

SdfShape SdfShape::sphere(double radius, const Pose& pose) {
  SdfShape s;
  s.kind_ = Kind::Sphere;
  s.dims_ = {radius, 0.0, 0.0};
  s.pose_ = pose;
  return s;
}

SdfShape SdfShape::union_of(std::vector<SdfShape> parts) {
  SdfShape s;
  s.kind_ = Kind::Union;
  s.parts_ = std::move(parts);
  return s;
}

double SdfShape::eval_local(const Vec3& p) const {
  switch (kind_) {
    case Kind::Sphere:
      return norm(p) - dims_.x;
    case Kind::Box: {
      Vec3 q{std::abs(p.x) - dims_.x, std::abs(p.y) - dims_.y, std::abs(p.z) - dims_.z};
      Vec3 outside = cwise_max(q, Vec3{0, 0, 0});
      double inside = std::min(std::max(q.x, std::max(q.y, q.z)), 0.0);
      return norm(outside) + inside;
    }
    case Kind::Cylinder: {
      double dr = std::sqrt(p.x * p.x + p.y * p.y) - dims_.x;
      double dz = std::abs(p.z) - dims_.y;
      double outside = std::sqrt(std::max(dr, 0.0) * std::max(dr, 0.0) +
                                 std::max(dz, 0.0) * std::max(dz, 0.0));
      return outside + std::min(std::max(dr, dz), 0.0);
    }
    case Kind::Capsule: {
      Vec3 pa = p - seg_a_;
      Vec3 ba = seg_b_ - seg_a_;
      double h = norm2(ba) > 0.0 ? std::clamp(dot(pa, ba) / norm2(ba), 0.0, 1.0) : 0.0;
      return norm(pa - ba * h) - dims_.x;
    }
    case Kind::Halfspace:
      return dot(dims_, p - seg_a_);
    case Kind::Union: {
      double d = std::numeric_limits<double>::infinity();
      for (const SdfShape& part : parts_) d = std::min(d, part.eval(p));
      return d;
    }
  }
  return std::numeric_limits<double>::infinity();
}

double SdfShape::eval(const Vec3& p) const {
  if (kind_ == Kind::Union || kind_ == Kind::Halfspace) return eval_local(p);
  return eval_local(pose_.apply_inverse(p));
}

Vec3 SdfShape::gradient(const Vec3& p, double h) const {
  Vec3 g{(eval({p.x + h, p.y, p.z}) - eval({p.x - h, p.y, p.z})) / (2 * h),
         (eval({p.x, p.y + h, p.z}) - eval({p.x, p.y - h, p.z})) / (2 * h),
         (eval({p.x, p.y, p.z + h}) - eval({p.x, p.y, p.z - h})) / (2 * h)};
  double n = norm(g);
  return n > 1e-12 ? g / n : Vec3{0, 0, 1};
}

namespace {

// Conservative world-space AABB; invalid (lo > hi) for halfspaces.
Aabb conservative_bounds(const SdfShape& s) {
  Aabb box;
  if (s.kind() == SdfShape::Kind::Union) {
    for (const SdfShape& part : s.parts()) {
      Aabb sub = conservative_bounds(part);
      if (sub.lo.x > sub.hi.x) continue;
      box.grow(sub.lo);
      box.grow(sub.hi);
    }
    return box;
  }
  if (s.kind() == SdfShape::Kind::Halfspace) return box;
  double r = 2.0 * std::max({std::abs(s.dims().x), std::abs(s.dims().y),
                             std::abs(s.dims().z), norm(s.seg_a()), norm(s.seg_b())});
  for (int sx = -1; sx <= 1; sx += 2)
    for (int sy = -1; sy <= 1; sy += 2)
      for (int sz = -1; sz <= 1; sz += 2)
        box.grow(s.pose().apply(Vec3{r * sx, r * sy, r * sz}));
  return box;
}

}  // namespace

PointCloud SdfShape::sample_surface(std::size_t n, std::uint64_t seed) const {
  // Rejection-sample a shell around the surface, project onto it, then
  // thin to n points with farthest-point selection.
  Aabb box = conservative_bounds(*this);
  if (box.lo.x > box.hi.x) return {};

  Rng rng(seed);
  PointCloud dense;
  const std::size_t want = std::max<std::size_t>(n * 8, 256);
  std::size_t attempts = 0;
  while (dense.size() < want && attempts < want * 400) {
    ++attempts;
    Vec3 p{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y),
           rng.uniform(box.lo.z, box.hi.z)};
    double d = eval(p);
    if (std::abs(d) > 0.2 * norm(box.hi - box.lo)) continue;
    // Sphere-trace onto the surface along the outward gradient.
    for (int it = 0; it < 8; ++it) {
      Vec3 g = gradient(p);
      p -= g * d;
      d = eval(p);
      if (std::abs(d) < 1e-9) break;
    }
    if (std::abs(d) < 1e-6) dense.positions.push_back(p);
  }
  if (dense.empty()) return dense;

  ResampleResult thinned = surface_resample(dense, std::min(n, dense.size()), seed);
  PointCloud out = std::move(thinned.cloud);
  out.normals.reserve(out.size());
  for (const Vec3& p : out.positions) out.normals.push_back(gradient(p));
  return out;
}

PointCloud remove_penetrating(const PointCloud& cloud, const SdfShape& tool) {
  PointCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (tool.eval(cloud.positions[i]) >= -1e-6) {
      out.positions.push_back(cloud.positions[i]);
      if (cloud.has_normals()) out.normals.push_back(cloud.normals[i]);
      if (cloud.has_groups()) out.groups.push_back(cloud.groups[i]);
    }
  }
  return out;
}

}  // namespace rcl
