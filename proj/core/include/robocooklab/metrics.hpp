#pragma once

#include <vector>

#include "robocooklab/pointcloud.hpp"

namespace rcl {

/// Minimal-cost bijection between two equal-size clouds.
struct EmdResult {
  double cost = 0.0;               // sum of |x_i - y_{assignment[i]}|
  std::vector<int> assignment;     // permutation of 0..n-1
};

struct LossWeights {
  double w1 = 0.5;  // chamfer weight
  double w2 = 0.5;  // earth mover weight
};

/// Dense linear assignment (Jonker-Volgenant shortest augmenting paths).
/// cost is row-major n x n; returns the minimizing column per row.
/// Exact optimum in O(n^3).
std::vector<int> assignment_solve(const std::vector<double>& cost, int n);

/// Sum over both clouds of squared distance to the nearest point in the
/// other. Symmetric, nonnegative, zero only for mutually covering clouds.
double chamfer(const PointCloud& a, const PointCloud& b);

/// Exact earth mover distance with unsquared Euclidean ground cost. Sizes
/// must match. The reported cost is recomputed from the assignment in index
/// order, so equal assignments always produce bit-equal costs.
EmdResult emd_exact(const PointCloud& a, const PointCloud& b);

/// w1 * chamfer + w2 * emd cost.
double combined_loss(const PointCloud& a, const PointCloud& b,
                     const LossWeights& w = {});

/// Chamfer over surface normals: each point pairs with the nearest point by
/// position, the cost is the squared distance between their normals.
double normal_chamfer(const PointCloud& a, const PointCloud& b);

/// Sum and per-point mean of each metric on one pair, as reported by eval.
struct MetricReport {
  double chamfer_sum = 0.0;
  double chamfer_mean = 0.0;
  double emd_sum = 0.0;
  double emd_mean = 0.0;
  double normal_chamfer_sum = 0.0;
  double normal_chamfer_mean = 0.0;
  bool has_normals = false;
};

MetricReport metric_report(const PointCloud& a, const PointCloud& b);

}  // namespace rcl
