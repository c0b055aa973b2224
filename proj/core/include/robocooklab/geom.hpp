#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace rcl {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(const Vec3& v) {
  double n = norm(v);
  return n > 0.0 ? v / n : Vec3{0.0, 0.0, 0.0};
}
inline Vec3 cwise_min(const Vec3& a, const Vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 cwise_max(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}
inline bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Column-major-free 3x3 matrix, row-major storage.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }

  double& operator()(int r, int c) { return m[3 * r + c]; }
  double operator()(int r, int c) const { return m[3 * r + c]; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }
  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }
  /// Apply the transpose without materializing it.
  Vec3 t_mul(const Vec3& v) const {
    return {m[0] * v.x + m[3] * v.y + m[6] * v.z,
            m[1] * v.x + m[4] * v.y + m[7] * v.z,
            m[2] * v.x + m[5] * v.y + m[8] * v.z};
  }
};

/// Rotation about +z by angle (radians).
inline Mat3 rot_z(double a) {
  Mat3 r;
  double c = std::cos(a), s = std::sin(a);
  r(0, 0) = c; r(0, 1) = -s; r(0, 2) = 0;
  r(1, 0) = s; r(1, 1) = c;  r(1, 2) = 0;
  r(2, 0) = 0; r(2, 1) = 0;  r(2, 2) = 1;
  return r;
}

/// Rodrigues rotation from an axis-angle 3-vector.
inline Mat3 rot_axis_angle(const Vec3& w) {
  double theta = norm(w);
  Mat3 r = Mat3::identity();
  if (theta < 1e-12) {
    r(0, 1) = -w.z; r(0, 2) = w.y;
    r(1, 0) = w.z;  r(1, 2) = -w.x;
    r(2, 0) = -w.y; r(2, 1) = w.x;
    return r;
  }
  Vec3 k = w / theta;
  double c = std::cos(theta), s = std::sin(theta), v = 1.0 - c;
  r(0, 0) = c + k.x * k.x * v;       r(0, 1) = k.x * k.y * v - k.z * s; r(0, 2) = k.x * k.z * v + k.y * s;
  r(1, 0) = k.y * k.x * v + k.z * s; r(1, 1) = c + k.y * k.y * v;       r(1, 2) = k.y * k.z * v - k.x * s;
  r(2, 0) = k.z * k.x * v - k.y * s; r(2, 1) = k.z * k.y * v + k.x * s; r(2, 2) = c + k.z * k.z * v;
  return r;
}

/// Rigid transform: p -> R p + t.
struct Pose {
  Mat3 rot;
  Vec3 trans;

  Vec3 apply(const Vec3& p) const { return rot * p + trans; }
  /// Inverse map: world -> local.
  Vec3 apply_inverse(const Vec3& p) const { return rot.t_mul(p - trans); }
};

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi sweeps.
/// Eigenvalues ascending; eigenvectors as matrix columns, unit length.
void eigen_sym3(const Mat3& a, std::array<double, 3>& values, Mat3& vectors);

struct Aabb {
  Vec3 lo{1e300, 1e300, 1e300};
  Vec3 hi{-1e300, -1e300, -1e300};
  void grow(const Vec3& p) { lo = cwise_min(lo, p); hi = cwise_max(hi, p); }
  bool contains(const Vec3& p, double pad = 0.0) const {
    return p.x >= lo.x - pad && p.x <= hi.x + pad && p.y >= lo.y - pad &&
           p.y <= hi.y + pad && p.z >= lo.z - pad && p.z <= hi.z + pad;
  }
};

}  // namespace rcl
