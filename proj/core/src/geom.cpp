#include "robocooklab/geom.hpp"

#include <algorithm>
#include <cmath>

namespace rcl {

void eigen_sym3(const Mat3& a, std::array<double, 3>& values, Mat3& vectors) {
  Mat3 d = a;
  Mat3 v = Mat3::identity();
  // Cyclic Jacobi; 16 sweeps are far beyond convergence for 3x3.
  for (int sweep = 0; sweep < 16; ++sweep) {
    double off = d(0, 1) * d(0, 1) + d(0, 2) * d(0, 2) + d(1, 2) * d(1, 2);
    if (off < 1e-30) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        double apq = d(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = (d(q, q) - d(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        Mat3 r = Mat3::identity();
        r(p, p) = c; r(q, q) = c; r(p, q) = s; r(q, p) = -s;
        d = r.transposed() * d * r;
        v = v * r;
      }
    }
  }
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return d(i, i) < d(j, j); });
  Mat3 sorted_v;
  for (int c = 0; c < 3; ++c) {
    values[c] = d(order[c], order[c]);
    for (int r = 0; r < 3; ++r) sorted_v(r, c) = v(r, order[c]);
  }
  vectors = sorted_v;
}

}  // namespace rcl
