#pragma once

#include <vector>

#include "robocooklab/nn/tensor.hpp"

namespace rcl::nn {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Define-by-run reverse-mode tape. Forward values are computed eagerly as
/// ops are recorded; backward() walks the nodes once in reverse creation
/// order (creation order is topological by construction).
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  /// When set, every op asserts its output is finite.
  bool check_finite = false;

  Var input(Tensor value, bool requires_grad = false);
  Var constant(Tensor value) { return input(std::move(value), false); }

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;

  // --- elementwise / linear algebra ---
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);          // hadamard
  Var vmax(Var a, Var b);         // elementwise max; ties route grad to a
  Var add_bias(Var x, Var bias);  // bias [1,n] broadcast over rows
  Var scale(Var a, float c);
  Var add_scalar(Var a, float c);
  Var relu(Var x);
  Var sin(Var x);
  Var cos(Var x);

  // --- structure ---
  Var gather_rows(Var x, std::vector<int> idx);
  Var scatter_add_rows(Var x, std::vector<int> idx, int out_rows);
  Var concat_cols(Var a, Var b);
  Var concat_rows(Var a, Var b);
  Var slice_cols(Var x, int start, int len);
  Var stack_scalars(Var a, Var b, Var c);  // three [1,1] -> [1,3]
  Var mean_rows(Var x);                    // [m,n] -> [1,n]
  Var max_rows(Var x);                     // [m,n] -> [1,n], argmax backward
  Var row_norm(Var x);                     // [m,n] -> [m,1] euclidean
  Var sum_all(Var x);                      // -> [1,1]

  /// Rodrigues rotation + translation of points about the origin:
  /// y_i = R(omega) x_i + t. omega, t are [1,3]; points [n,3].
  Var apply_rigid(Var points, Var omega, Var t);

  // --- losses (target/mask are constants) ---
  /// Two-sided sum of squared nearest-neighbor distances. Nearest pairs are
  /// fixed at forward time and treated as constant in backward.
  Var chamfer_loss(Var pred, const Tensor& target);
  /// Exact assignment transport cost (sum of unsquared distances); the
  /// matching is fixed at forward time.
  Var emd_loss(Var pred, const Tensor& target);
  /// Mean over rows of cross-entropy between softmax(logits) and target
  /// probability rows.
  Var softmax_ce(Var logits, const Tensor& target_probs);
  /// Smooth-L1 (beta = 1) averaged over entries with mask != 0.
  Var masked_smooth_l1(Var pred, const Tensor& target, const Tensor& mask);
  /// -cos(pred - target) averaged over entries with mask != 0.
  Var masked_neg_cosine(Var pred, const Tensor& target, const Tensor& mask);
  Var mse(Var pred, const Tensor& target);

  /// Seeds d(loss)/d(loss) = 1 and accumulates gradients for every node.
  /// loss must be [1,1].
  void backward(Var loss);

  std::size_t size() const;

 private:
  struct Node;
  int push(Node n);
  Node& at(Var v);
  const Node& at(Var v) const;

  std::vector<Node> nodes_;
};

}  // namespace rcl::nn
