#include "robocooklab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robocooklab/error.hpp"

namespace rcl {

std::vector<int> assignment_solve(const std::vector<double>& cost, int n) {
  if (int(cost.size()) != n * n)
    throw Error(ErrorCode::SHAPE, "cost matrix must be n x n");

  // Successive shortest augmenting paths with row/column dual potentials
  // (Jonker-Volgenant). row_of[j] is the row matched to column j; index n
  // is a virtual root column holding the row being inserted.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n, 0.0), v(n + 1, 0.0);
  std::vector<int> row_of(n + 1, -1);
  std::vector<int> way(n + 1, 0);
  std::vector<double> min_to(n + 1);
  std::vector<char> used(n + 1);

  for (int r = 0; r < n; ++r) {
    row_of[n] = r;
    int j0 = n;
    std::fill(min_to.begin(), min_to.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = row_of[j0];
      const double* row = &cost[std::size_t(i0) * n];
      int j1 = -1;
      double delta = kInf;
      for (int j = 0; j < n; ++j) {
        if (used[j]) continue;
        double cur = row[j] - u[i0] - v[j];
        if (cur < min_to[j]) {
          min_to[j] = cur;
          way[j] = j0;
        }
        if (min_to[j] < delta) {
          delta = min_to[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          min_to[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != -1);
    // Augment along the alternating path back to the root.
    do {
      int j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != n);
  }

  std::vector<int> col_of_row(n, -1);
  for (int j = 0; j < n; ++j)
    if (row_of[j] >= 0) col_of_row[row_of[j]] = j;
  return col_of_row;
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EMPTY_CLOUD, "chamfer");
  double forward = 0.0;
  for (const Vec3& x : a.positions) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& y : b.positions) best = std::min(best, norm2(x - y));
    forward += best;
  }
  double backward = 0.0;
  for (const Vec3& y : b.positions) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& x : a.positions) best = std::min(best, norm2(x - y));
    backward += best;
  }
  return forward + backward;
}

EmdResult emd_exact(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EMPTY_CLOUD, "emd_exact");
  if (a.size() != b.size())
    throw Error(ErrorCode::SIZE_MISMATCH, "emd_exact needs equal-size clouds");

  const int n = int(a.size());
  std::vector<double> cost(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost[std::size_t(i) * n + j] = norm(a.positions[i] - b.positions[j]);

  EmdResult result;
  result.assignment = assignment_solve(cost, n);
  for (int i = 0; i < n; ++i)
    result.cost += cost[std::size_t(i) * n + result.assignment[i]];
  return result;
}

double combined_loss(const PointCloud& a, const PointCloud& b,
                     const LossWeights& w) {
  return w.w1 * chamfer(a, b) + w.w2 * emd_exact(a, b).cost;
}

double normal_chamfer(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EMPTY_CLOUD, "normal_chamfer");
  if (!a.has_normals() || !b.has_normals())
    throw Error(ErrorCode::NO_NORMALS, "normal_chamfer needs normals on both clouds");

  double forward = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      double d = norm2(a.positions[i] - b.positions[j]);
      if (d < best) { best = d; best_j = j; }
    }
    forward += norm2(a.normals[i] - b.normals[best_j]);
  }
  double backward = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double d = norm2(a.positions[i] - b.positions[j]);
      if (d < best) { best = d; best_i = i; }
    }
    backward += norm2(a.normals[best_i] - b.normals[j]);
  }
  return forward + backward;
}

MetricReport metric_report(const PointCloud& a, const PointCloud& b) {
  MetricReport r;
  r.chamfer_sum = chamfer(a, b);
  r.chamfer_mean = r.chamfer_sum / double(a.size() + b.size());
  if (a.size() == b.size()) {
    r.emd_sum = emd_exact(a, b).cost;
    r.emd_mean = r.emd_sum / double(a.size());
  } else {
    ResampleResult ra = surface_resample(a, std::min(a.size(), b.size()), 0);
    ResampleResult rb = surface_resample(b, std::min(a.size(), b.size()), 0);
    r.emd_sum = emd_exact(ra.cloud, rb.cloud).cost;
    r.emd_mean = r.emd_sum / double(std::min(a.size(), b.size()));
  }
  r.has_normals = a.has_normals() && b.has_normals();
  if (r.has_normals) {
    r.normal_chamfer_sum = normal_chamfer(a, b);
    r.normal_chamfer_mean = r.normal_chamfer_sum / double(a.size() + b.size());
  }
  return r;
}

}  // namespace rcl
