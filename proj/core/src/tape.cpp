#include "robocooklab/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robocooklab/error.hpp"
#include "robocooklab/geom.hpp"
#include "robocooklab/metrics.hpp"

namespace rcl::nn {

namespace {

enum class Op {
  Input, MatMul, Add, Sub, Mul, VMax, AddBias, Scale, AddScalar, Relu,
  Sin, Cos, GatherRows, ScatterAddRows, ConcatCols, ConcatRows, SliceCols,
  StackScalars, MeanRows, MaxRows, RowNorm, SumAll, ApplyRigid,
  ChamferLoss, EmdLoss, SoftmaxCE, MaskedSmoothL1, MaskedNegCosine, Mse,
};

void gemm(const float* a, const float* b, float* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const float* ai = a + std::size_t(i) * k;
    float* ci = c + std::size_t(i) * n;
    for (int p = 0; p < k; ++p) {
      const float av = ai[p];
      if (av == 0.0f) continue;
      const float* bp = b + std::size_t(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

}  // namespace

struct Tape::Node {
  Op op = Op::Input;
  std::vector<int> parents;
  Tensor value;
  Tensor grad;
  bool requires_grad = false;

  // Op-specific state.
  std::vector<int> idx;  // gather/scatter rows, argmax, nn pairs, assignment
  Tensor aux;            // loss target
  Tensor aux2;           // loss mask / softmax cache / rigid rotation cache
  float c0 = 0.0f;
  int i0 = 0, i1 = 0;
};

Tape::Tape() = default;
Tape::~Tape() = default;

std::size_t Tape::size() const { return nodes_.size(); }

int Tape::push(Node n) {
  for (int p : n.parents) n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
  if (check_finite && !n.value.all_finite())
    throw Error(ErrorCode::SHAPE, "non-finite value produced on tape");
  nodes_.push_back(std::move(n));
  return int(nodes_.size()) - 1;
}

Tape::Node& Tape::at(Var v) { return nodes_.at(std::size_t(v.id)); }
const Tape::Node& Tape::at(Var v) const { return nodes_.at(std::size_t(v.id)); }

Var Tape::input(Tensor value, bool requires_grad) {
  Node n;
  n.op = Op::Input;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (check_finite && !n.value.all_finite())
    throw Error(ErrorCode::SHAPE, "non-finite input");
  nodes_.push_back(std::move(n));
  return {int(nodes_.size()) - 1};
}

const Tensor& Tape::value(Var v) const { return at(v).value; }
const Tensor& Tape::grad(Var v) const { return at(v).grad; }

Var Tape::matmul(Var a, Var b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  if (ta.cols() != tb.rows())
    throw Error(ErrorCode::SHAPE, "matmul " + ta.shape_str() + " x " + tb.shape_str());
  Node n;
  n.op = Op::MatMul;
  n.parents = {a.id, b.id};
  n.value = Tensor({ta.rows(), tb.cols()});
  gemm(ta.data.data(), tb.data.data(), n.value.data.data(), ta.rows(), ta.cols(), tb.cols());
  return {push(std::move(n))};
}

Var Tape::add(Var a, Var b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  if (!ta.same_shape(tb)) throw Error(ErrorCode::SHAPE, "add shape mismatch");
  Node n;
  n.op = Op::Add;
  n.parents = {a.id, b.id};
  n.value = ta;
  for (std::size_t i = 0; i < tb.numel(); ++i) n.value.data[i] += tb.data[i];
  return {push(std::move(n))};
}

Var Tape::sub(Var a, Var b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  if (!ta.same_shape(tb)) throw Error(ErrorCode::SHAPE, "sub shape mismatch");
  Node n;
  n.op = Op::Sub;
  n.parents = {a.id, b.id};
  n.value = ta;
  for (std::size_t i = 0; i < tb.numel(); ++i) n.value.data[i] -= tb.data[i];
  return {push(std::move(n))};
}

Var Tape::mul(Var a, Var b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  if (!ta.same_shape(tb)) throw Error(ErrorCode::SHAPE, "mul shape mismatch");
  Node n;
  n.op = Op::Mul;
  n.parents = {a.id, b.id};
  n.value = ta;
  for (std::size_t i = 0; i < tb.numel(); ++i) n.value.data[i] *= tb.data[i];
  return {push(std::move(n))};
}

Var Tape::vmax(Var a, Var b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  if (!ta.same_shape(tb)) throw Error(ErrorCode::SHAPE, "vmax shape mismatch");
  Node n;
  n.op = Op::VMax;
  n.parents = {a.id, b.id};
  n.value = ta;
  for (std::size_t i = 0; i < tb.numel(); ++i)
    n.value.data[i] = std::max(ta.data[i], tb.data[i]);
  return {push(std::move(n))};
}

Var Tape::add_bias(Var x, Var bias) {
  const Tensor& tx = at(x).value;
  const Tensor& tb = at(bias).value;
  if (tb.rows() != 1 || tb.cols() != tx.cols())
    throw Error(ErrorCode::SHAPE, "add_bias wants [1," + std::to_string(tx.cols()) + "]");
  Node n;
  n.op = Op::AddBias;
  n.parents = {x.id, bias.id};
  n.value = tx;
  for (int r = 0; r < tx.rows(); ++r)
    for (int c = 0; c < tx.cols(); ++c) n.value.at(r, c) += tb.data[std::size_t(c)];
  return {push(std::move(n))};
}

Var Tape::scale(Var a, float c) {
  Node n;
  n.op = Op::Scale;
  n.parents = {a.id};
  n.c0 = c;
  n.value = at(a).value;
  for (float& v : n.value.data) v *= c;
  return {push(std::move(n))};
}

Var Tape::add_scalar(Var a, float c) {
  Node n;
  n.op = Op::AddScalar;
  n.parents = {a.id};
  n.c0 = c;
  n.value = at(a).value;
  for (float& v : n.value.data) v += c;
  return {push(std::move(n))};
}

Var Tape::relu(Var x) {
  Node n;
  n.op = Op::Relu;
  n.parents = {x.id};
  n.value = at(x).value;
  for (float& v : n.value.data) v = std::max(v, 0.0f);
  return {push(std::move(n))};
}

Var Tape::sin(Var x) {
  Node n;
  n.op = Op::Sin;
  n.parents = {x.id};
  n.value = at(x).value;
  for (float& v : n.value.data) v = std::sin(v);
  return {push(std::move(n))};
}

Var Tape::cos(Var x) {
  Node n;
  n.op = Op::Cos;
  n.parents = {x.id};
  n.value = at(x).value;
  for (float& v : n.value.data) v = std::cos(v);
  return {push(std::move(n))};
}

Var Tape::gather_rows(Var x, std::vector<int> idx) {
  const Tensor& tx = at(x).value;
  Node n;
  n.op = Op::GatherRows;
  n.parents = {x.id};
  n.value = Tensor({int(idx.size()), tx.cols()});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= tx.rows())
      throw Error(ErrorCode::SHAPE, "gather_rows index out of range");
    std::copy_n(&tx.data[std::size_t(idx[r]) * tx.cols()], tx.cols(),
                &n.value.data[r * std::size_t(tx.cols())]);
  }
  n.idx = std::move(idx);
  return {push(std::move(n))};
}

Var Tape::scatter_add_rows(Var x, std::vector<int> idx, int out_rows) {
  const Tensor& tx = at(x).value;
  if (int(idx.size()) != tx.rows())
    throw Error(ErrorCode::SHAPE, "scatter_add_rows wants one index per row");
  Node n;
  n.op = Op::ScatterAddRows;
  n.parents = {x.id};
  n.value = Tensor({out_rows, tx.cols()});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= out_rows)
      throw Error(ErrorCode::SHAPE, "scatter_add_rows index out of range");
    for (int c = 0; c < tx.cols(); ++c)
      n.value.at(idx[r], c) += tx.at(int(r), c);
  }
  n.idx = std::move(idx);
  return {push(std::move(n))};
}

Var Tape::concat_cols(Var a, Var b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  if (ta.rows() != tb.rows()) throw Error(ErrorCode::SHAPE, "concat_cols rows differ");
  Node n;
  n.op = Op::ConcatCols;
  n.parents = {a.id, b.id};
  n.i0 = ta.cols();
  n.value = Tensor({ta.rows(), ta.cols() + tb.cols()});
  for (int r = 0; r < ta.rows(); ++r) {
    std::copy_n(&ta.data[std::size_t(r) * ta.cols()], ta.cols(), &n.value.at(r, 0));
    std::copy_n(&tb.data[std::size_t(r) * tb.cols()], tb.cols(), &n.value.at(r, ta.cols()));
  }
  return {push(std::move(n))};
}

Var Tape::concat_rows(Var a, Var b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  if (ta.cols() != tb.cols()) throw Error(ErrorCode::SHAPE, "concat_rows cols differ");
  Node n;
  n.op = Op::ConcatRows;
  n.parents = {a.id, b.id};
  n.i0 = ta.rows();
  n.value = Tensor({ta.rows() + tb.rows(), ta.cols()});
  std::copy(ta.data.begin(), ta.data.end(), n.value.data.begin());
  std::copy(tb.data.begin(), tb.data.end(), n.value.data.begin() + ta.numel());
  return {push(std::move(n))};
}

Var Tape::slice_cols(Var x, int start, int len) {
  const Tensor& tx = at(x).value;
  if (start < 0 || len < 0 || start + len > tx.cols())
    throw Error(ErrorCode::SHAPE, "slice_cols out of range");
  Node n;
  n.op = Op::SliceCols;
  n.parents = {x.id};
  n.i0 = start;
  n.i1 = len;
  n.value = Tensor({tx.rows(), len});
  for (int r = 0; r < tx.rows(); ++r)
    std::copy_n(&tx.data[std::size_t(r) * tx.cols() + start], len, &n.value.at(r, 0));
  return {push(std::move(n))};
}

Var Tape::stack_scalars(Var a, Var b, Var c) {
  for (Var v : {a, b, c})
    if (at(v).value.numel() != 1)
      throw Error(ErrorCode::SHAPE, "stack_scalars wants [1,1] inputs");
  Node n;
  n.op = Op::StackScalars;
  n.parents = {a.id, b.id, c.id};
  n.value = Tensor({1, 3});
  n.value.data = {at(a).value.data[0], at(b).value.data[0], at(c).value.data[0]};
  return {push(std::move(n))};
}

Var Tape::mean_rows(Var x) {
  const Tensor& tx = at(x).value;
  if (tx.rows() == 0) throw Error(ErrorCode::SHAPE, "mean_rows of empty tensor");
  Node n;
  n.op = Op::MeanRows;
  n.parents = {x.id};
  n.value = Tensor({1, tx.cols()});
  for (int r = 0; r < tx.rows(); ++r)
    for (int c = 0; c < tx.cols(); ++c) n.value.data[std::size_t(c)] += tx.at(r, c);
  for (float& v : n.value.data) v /= float(tx.rows());
  return {push(std::move(n))};
}

Var Tape::max_rows(Var x) {
  const Tensor& tx = at(x).value;
  if (tx.rows() == 0) throw Error(ErrorCode::SHAPE, "max_rows of empty tensor");
  Node n;
  n.op = Op::MaxRows;
  n.parents = {x.id};
  n.value = Tensor({1, tx.cols()});
  n.idx.assign(std::size_t(tx.cols()), 0);
  for (int c = 0; c < tx.cols(); ++c) {
    float best = tx.at(0, c);
    int best_r = 0;
    for (int r = 1; r < tx.rows(); ++r) {
      if (tx.at(r, c) > best) { best = tx.at(r, c); best_r = r; }
    }
    n.value.data[std::size_t(c)] = best;
    n.idx[std::size_t(c)] = best_r;
  }
  return {push(std::move(n))};
}

Var Tape::row_norm(Var x) {
  const Tensor& tx = at(x).value;
  Node n;
  n.op = Op::RowNorm;
  n.parents = {x.id};
  n.value = Tensor({tx.rows(), 1});
  for (int r = 0; r < tx.rows(); ++r) {
    double s = 0.0;
    for (int c = 0; c < tx.cols(); ++c) s += double(tx.at(r, c)) * tx.at(r, c);
    n.value.data[std::size_t(r)] = float(std::sqrt(s));
  }
  return {push(std::move(n))};
}

Var Tape::sum_all(Var x) {
  Node n;
  n.op = Op::SumAll;
  n.parents = {x.id};
  double s = 0.0;
  for (float v : at(x).value.data) s += v;
  n.value = Tensor::scalar(float(s));
  return {push(std::move(n))};
}

Var Tape::apply_rigid(Var points, Var omega, Var t) {
  const Tensor& tp = at(points).value;
  const Tensor& tw = at(omega).value;
  const Tensor& tt = at(t).value;
  if (tp.cols() != 3 || tw.numel() != 3 || tt.numel() != 3)
    throw Error(ErrorCode::SHAPE, "apply_rigid wants [n,3], [1,3], [1,3]");

  Vec3 w{tw.data[0], tw.data[1], tw.data[2]};
  Mat3 rot = rot_axis_angle(w);

  Node n;
  n.op = Op::ApplyRigid;
  n.parents = {points.id, omega.id, t.id};
  n.value = Tensor({tp.rows(), 3});
  // Cache the rotation for backward.
  n.aux2 = Tensor({3, 3});
  for (int i = 0; i < 9; ++i) n.aux2.data[std::size_t(i)] = float(rot.m[std::size_t(i)]);
  for (int r = 0; r < tp.rows(); ++r) {
    Vec3 p{tp.at(r, 0), tp.at(r, 1), tp.at(r, 2)};
    Vec3 y = rot * p;
    n.value.at(r, 0) = float(y.x + tt.data[0]);
    n.value.at(r, 1) = float(y.y + tt.data[1]);
    n.value.at(r, 2) = float(y.z + tt.data[2]);
  }
  return {push(std::move(n))};
}

Var Tape::chamfer_loss(Var pred, const Tensor& target) {
  const Tensor& tp = at(pred).value;
  if (tp.cols() != 3 || target.cols() != 3)
    throw Error(ErrorCode::SHAPE, "chamfer_loss wants [n,3] clouds");
  if (tp.rows() == 0 || target.rows() == 0)
    throw Error(ErrorCode::EMPTY_CLOUD, "chamfer_loss");

  const int np = tp.rows(), nt = target.rows();
  Node n;
  n.op = Op::ChamferLoss;
  n.parents = {pred.id};
  n.aux = target;
  n.idx.assign(std::size_t(np) + nt, 0);

  double total = 0.0;
  for (int i = 0; i < np; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int bj = 0;
    for (int j = 0; j < nt; ++j) {
      double dx = double(tp.at(i, 0)) - target.at(j, 0);
      double dy = double(tp.at(i, 1)) - target.at(j, 1);
      double dz = double(tp.at(i, 2)) - target.at(j, 2);
      double d = dx * dx + dy * dy + dz * dz;
      if (d < best) { best = d; bj = j; }
    }
    n.idx[std::size_t(i)] = bj;
    total += best;
  }
  for (int j = 0; j < nt; ++j) {
    double best = std::numeric_limits<double>::infinity();
    int bi = 0;
    for (int i = 0; i < np; ++i) {
      double dx = double(tp.at(i, 0)) - target.at(j, 0);
      double dy = double(tp.at(i, 1)) - target.at(j, 1);
      double dz = double(tp.at(i, 2)) - target.at(j, 2);
      double d = dx * dx + dy * dy + dz * dz;
      if (d < best) { best = d; bi = i; }
    }
    n.idx[std::size_t(np) + j] = bi;
    total += best;
  }
  n.value = Tensor::scalar(float(total));
  return {push(std::move(n))};
}

Var Tape::emd_loss(Var pred, const Tensor& target) {
  const Tensor& tp = at(pred).value;
  if (tp.cols() != 3 || target.cols() != 3 || tp.rows() != target.rows())
    throw Error(ErrorCode::SIZE_MISMATCH, "emd_loss wants equal-size [n,3] clouds");
  const int n_pts = tp.rows();

  std::vector<double> cost(std::size_t(n_pts) * n_pts);
  for (int i = 0; i < n_pts; ++i)
    for (int j = 0; j < n_pts; ++j) {
      double dx = double(tp.at(i, 0)) - target.at(j, 0);
      double dy = double(tp.at(i, 1)) - target.at(j, 1);
      double dz = double(tp.at(i, 2)) - target.at(j, 2);
      cost[std::size_t(i) * n_pts + j] = std::sqrt(dx * dx + dy * dy + dz * dz);
    }
  Node n;
  n.op = Op::EmdLoss;
  n.parents = {pred.id};
  n.aux = target;
  n.idx = assignment_solve(cost, n_pts);
  double total = 0.0;
  for (int i = 0; i < n_pts; ++i) total += cost[std::size_t(i) * n_pts + n.idx[std::size_t(i)]];
  n.value = Tensor::scalar(float(total));
  return {push(std::move(n))};
}

Var Tape::softmax_ce(Var logits, const Tensor& target_probs) {
  const Tensor& tl = at(logits).value;
  if (!tl.same_shape(target_probs))
    throw Error(ErrorCode::SHAPE, "softmax_ce shape mismatch");
  if (tl.rows() == 0) throw Error(ErrorCode::SHAPE, "softmax_ce of empty batch");

  Node n;
  n.op = Op::SoftmaxCE;
  n.parents = {logits.id};
  n.aux = target_probs;
  n.aux2 = Tensor({tl.rows(), tl.cols()});  // cached softmax
  double total = 0.0;
  for (int r = 0; r < tl.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < tl.cols(); ++c) mx = std::max(mx, double(tl.at(r, c)));
    double z = 0.0;
    for (int c = 0; c < tl.cols(); ++c) z += std::exp(double(tl.at(r, c)) - mx);
    double lse = mx + std::log(z);
    for (int c = 0; c < tl.cols(); ++c) {
      double p = std::exp(double(tl.at(r, c)) - lse);
      n.aux2.at(r, c) = float(p);
      total += double(target_probs.at(r, c)) * (lse - double(tl.at(r, c)));
    }
  }
  n.value = Tensor::scalar(float(total / tl.rows()));
  return {push(std::move(n))};
}

Var Tape::masked_smooth_l1(Var pred, const Tensor& target, const Tensor& mask) {
  const Tensor& tp = at(pred).value;
  if (!tp.same_shape(target) || !tp.same_shape(mask))
    throw Error(ErrorCode::SHAPE, "masked_smooth_l1 shape mismatch");
  Node n;
  n.op = Op::MaskedSmoothL1;
  n.parents = {pred.id};
  n.aux = target;
  n.aux2 = mask;
  double total = 0.0, count = 0.0;
  for (std::size_t i = 0; i < tp.numel(); ++i) {
    if (mask.data[i] == 0.0f) continue;
    double d = double(tp.data[i]) - target.data[i];
    total += std::abs(d) < 1.0 ? 0.5 * d * d : std::abs(d) - 0.5;
    count += 1.0;
  }
  n.c0 = float(std::max(count, 1.0));
  n.value = Tensor::scalar(float(total / std::max(count, 1.0)));
  return {push(std::move(n))};
}

Var Tape::masked_neg_cosine(Var pred, const Tensor& target, const Tensor& mask) {
  const Tensor& tp = at(pred).value;
  if (!tp.same_shape(target) || !tp.same_shape(mask))
    throw Error(ErrorCode::SHAPE, "masked_neg_cosine shape mismatch");
  Node n;
  n.op = Op::MaskedNegCosine;
  n.parents = {pred.id};
  n.aux = target;
  n.aux2 = mask;
  double total = 0.0, count = 0.0;
  for (std::size_t i = 0; i < tp.numel(); ++i) {
    if (mask.data[i] == 0.0f) continue;
    total += -std::cos(double(tp.data[i]) - target.data[i]);
    count += 1.0;
  }
  n.c0 = float(std::max(count, 1.0));
  n.value = Tensor::scalar(float(total / std::max(count, 1.0)));
  return {push(std::move(n))};
}

Var Tape::mse(Var pred, const Tensor& target) {
  const Tensor& tp = at(pred).value;
  if (!tp.same_shape(target)) throw Error(ErrorCode::SHAPE, "mse shape mismatch");
  Node n;
  n.op = Op::Mse;
  n.parents = {pred.id};
  n.aux = target;
  double total = 0.0;
  for (std::size_t i = 0; i < tp.numel(); ++i) {
    double d = double(tp.data[i]) - target.data[i];
    total += d * d;
  }
  n.value = Tensor::scalar(float(total / double(tp.numel())));
  return {push(std::move(n))};
}

namespace {

// d(R(w) p)/dw columns via the Gallego-Yezzi closed form, with the exact
// w -> 0 limit -[Rp]x.
void rigid_omega_jacobian_accumulate(const Vec3& w, const Mat3& rot,
                                     const Vec3& rp, const Vec3& g,
                                     double out[3]) {
  double theta2 = norm2(w);
  if (theta2 < 1e-12) {
    // col_i = e_i x rp
    out[0] += dot(cross(Vec3{1, 0, 0}, rp), g);
    out[1] += dot(cross(Vec3{0, 1, 0}, rp), g);
    out[2] += dot(cross(Vec3{0, 0, 1}, rp), g);
    return;
  }
  for (int i = 0; i < 3; ++i) {
    Vec3 ei{i == 0 ? 1.0 : 0.0, i == 1 ? 1.0 : 0.0, i == 2 ? 1.0 : 0.0};
    Vec3 ci = cross(w, ei - rot * ei);
    Vec3 col = (w[i] * cross(w, rp) + cross(ci, rp)) / theta2;
    out[i] += dot(col, g);
  }
}

}  // namespace

void Tape::backward(Var loss) {
  Node& ln = at(loss);
  if (ln.value.numel() != 1)
    throw Error(ErrorCode::SCALAR_REQUIRED, "backward needs a [1,1] loss");

  for (Node& n : nodes_) {
    n.grad = Tensor(n.value.shape);
  }
  ln.grad.data[0] = 1.0f;

  for (int id = int(nodes_.size()) - 1; id >= 0; --id) {
    Node& n = nodes_[std::size_t(id)];
    if (!n.requires_grad || n.op == Op::Input) continue;
    const Tensor& g = n.grad;

    auto parent = [&](int k) -> Node& { return nodes_[std::size_t(n.parents[std::size_t(k)])]; };

    switch (n.op) {
      case Op::Input:
        break;
      case Op::MatMul: {
        Node& a = parent(0);
        Node& b = parent(1);
        const int m = a.value.rows(), k = a.value.cols(), c = b.value.cols();
        if (a.requires_grad) {
          // dA = dC * B^T
          for (int i = 0; i < m; ++i)
            for (int p = 0; p < k; ++p) {
              float s = 0.0f;
              const float* gi = &g.data[std::size_t(i) * c];
              const float* bp = &b.value.data[std::size_t(p) * c];
              for (int j = 0; j < c; ++j) s += gi[j] * bp[j];
              a.grad.data[std::size_t(i) * k + p] += s;
            }
        }
        if (b.requires_grad) {
          // dB = A^T * dC
          for (int i = 0; i < m; ++i) {
            const float* gi = &g.data[std::size_t(i) * c];
            for (int p = 0; p < k; ++p) {
              const float av = a.value.data[std::size_t(i) * k + p];
              if (av == 0.0f) continue;
              float* bp = &b.grad.data[std::size_t(p) * c];
              for (int j = 0; j < c; ++j) bp[j] += av * gi[j];
            }
          }
        }
        break;
      }
      case Op::Add:
        for (int k = 0; k < 2; ++k)
          if (parent(k).requires_grad)
            for (std::size_t i = 0; i < g.numel(); ++i) parent(k).grad.data[i] += g.data[i];
        break;
      case Op::Sub: {
        if (parent(0).requires_grad)
          for (std::size_t i = 0; i < g.numel(); ++i) parent(0).grad.data[i] += g.data[i];
        if (parent(1).requires_grad)
          for (std::size_t i = 0; i < g.numel(); ++i) parent(1).grad.data[i] -= g.data[i];
        break;
      }
      case Op::Mul: {
        Node& a = parent(0);
        Node& b = parent(1);
        if (a.requires_grad)
          for (std::size_t i = 0; i < g.numel(); ++i) a.grad.data[i] += g.data[i] * b.value.data[i];
        if (b.requires_grad)
          for (std::size_t i = 0; i < g.numel(); ++i) b.grad.data[i] += g.data[i] * a.value.data[i];
        break;
      }
      case Op::VMax: {
        Node& a = parent(0);
        Node& b = parent(1);
        for (std::size_t i = 0; i < g.numel(); ++i) {
          if (a.value.data[i] >= b.value.data[i]) {
            if (a.requires_grad) a.grad.data[i] += g.data[i];
          } else if (b.requires_grad) {
            b.grad.data[i] += g.data[i];
          }
        }
        break;
      }
      case Op::AddBias: {
        Node& x = parent(0);
        Node& bias = parent(1);
        if (x.requires_grad)
          for (std::size_t i = 0; i < g.numel(); ++i) x.grad.data[i] += g.data[i];
        if (bias.requires_grad) {
          const int cols = g.cols();
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < cols; ++c) bias.grad.data[std::size_t(c)] += g.at(r, c);
        }
        break;
      }
      case Op::Scale:
        if (parent(0).requires_grad)
          for (std::size_t i = 0; i < g.numel(); ++i) parent(0).grad.data[i] += g.data[i] * n.c0;
        break;
      case Op::AddScalar:
        if (parent(0).requires_grad)
          for (std::size_t i = 0; i < g.numel(); ++i) parent(0).grad.data[i] += g.data[i];
        break;
      case Op::Relu: {
        Node& x = parent(0);
        if (x.requires_grad)
          for (std::size_t i = 0; i < g.numel(); ++i)
            if (x.value.data[i] > 0.0f) x.grad.data[i] += g.data[i];
        break;
      }
      case Op::Sin: {
        Node& x = parent(0);
        if (x.requires_grad)
          for (std::size_t i = 0; i < g.numel(); ++i)
            x.grad.data[i] += g.data[i] * std::cos(x.value.data[i]);
        break;
      }
      case Op::Cos: {
        Node& x = parent(0);
        if (x.requires_grad)
          for (std::size_t i = 0; i < g.numel(); ++i)
            x.grad.data[i] -= g.data[i] * std::sin(x.value.data[i]);
        break;
      }
      case Op::GatherRows: {
        Node& x = parent(0);
        if (x.requires_grad) {
          const int cols = g.cols();
          for (std::size_t r = 0; r < n.idx.size(); ++r)
            for (int c = 0; c < cols; ++c)
              x.grad.at(n.idx[r], c) += g.at(int(r), c);
        }
        break;
      }
      case Op::ScatterAddRows: {
        Node& x = parent(0);
        if (x.requires_grad) {
          const int cols = g.cols();
          for (std::size_t r = 0; r < n.idx.size(); ++r)
            for (int c = 0; c < cols; ++c)
              x.grad.at(int(r), c) += g.at(n.idx[r], c);
        }
        break;
      }
      case Op::ConcatCols: {
        Node& a = parent(0);
        Node& b = parent(1);
        const int ca = n.i0, cb = g.cols() - n.i0;
        for (int r = 0; r < g.rows(); ++r) {
          if (a.requires_grad)
            for (int c = 0; c < ca; ++c) a.grad.at(r, c) += g.at(r, c);
          if (b.requires_grad)
            for (int c = 0; c < cb; ++c) b.grad.at(r, c) += g.at(r, ca + c);
        }
        break;
      }
      case Op::ConcatRows: {
        Node& a = parent(0);
        Node& b = parent(1);
        if (a.requires_grad)
          for (std::size_t i = 0; i < a.value.numel(); ++i) a.grad.data[i] += g.data[i];
        if (b.requires_grad)
          for (std::size_t i = 0; i < b.value.numel(); ++i)
            b.grad.data[i] += g.data[a.value.numel() + i];
        break;
      }
      case Op::SliceCols: {
        Node& x = parent(0);
        if (x.requires_grad)
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < n.i1; ++c) x.grad.at(r, n.i0 + c) += g.at(r, c);
        break;
      }
      case Op::StackScalars:
        for (int k = 0; k < 3; ++k)
          if (parent(k).requires_grad) parent(k).grad.data[0] += g.data[std::size_t(k)];
        break;
      case Op::MeanRows: {
        Node& x = parent(0);
        if (x.requires_grad) {
          const float inv = 1.0f / float(x.value.rows());
          for (int r = 0; r < x.value.rows(); ++r)
            for (int c = 0; c < x.value.cols(); ++c)
              x.grad.at(r, c) += g.data[std::size_t(c)] * inv;
        }
        break;
      }
      case Op::MaxRows: {
        Node& x = parent(0);
        if (x.requires_grad)
          for (int c = 0; c < x.value.cols(); ++c)
            x.grad.at(n.idx[std::size_t(c)], c) += g.data[std::size_t(c)];
        break;
      }
      case Op::RowNorm: {
        Node& x = parent(0);
        if (x.requires_grad) {
          for (int r = 0; r < x.value.rows(); ++r) {
            float nv = n.value.data[std::size_t(r)];
            if (nv < 1e-12f) continue;
            float gr = g.data[std::size_t(r)] / nv;
            for (int c = 0; c < x.value.cols(); ++c)
              x.grad.at(r, c) += gr * x.value.at(r, c);
          }
        }
        break;
      }
      case Op::SumAll: {
        Node& x = parent(0);
        if (x.requires_grad)
          for (std::size_t i = 0; i < x.value.numel(); ++i) x.grad.data[i] += g.data[0];
        break;
      }
      case Op::ApplyRigid: {
        Node& pts = parent(0);
        Node& omega = parent(1);
        Node& trans = parent(2);
        Mat3 rot;
        for (int i = 0; i < 9; ++i) rot.m[std::size_t(i)] = n.aux2.data[std::size_t(i)];
        Vec3 w{omega.value.data[0], omega.value.data[1], omega.value.data[2]};
        double wgrad[3] = {0, 0, 0};
        for (int r = 0; r < n.value.rows(); ++r) {
          Vec3 gr{g.at(r, 0), g.at(r, 1), g.at(r, 2)};
          if (trans.requires_grad) {
            trans.grad.data[0] += float(gr.x);
            trans.grad.data[1] += float(gr.y);
            trans.grad.data[2] += float(gr.z);
          }
          if (pts.requires_grad) {
            Vec3 back = rot.t_mul(gr);
            pts.grad.at(r, 0) += float(back.x);
            pts.grad.at(r, 1) += float(back.y);
            pts.grad.at(r, 2) += float(back.z);
          }
          if (omega.requires_grad) {
            Vec3 rp{double(n.value.at(r, 0)) - trans.value.data[0],
                    double(n.value.at(r, 1)) - trans.value.data[1],
                    double(n.value.at(r, 2)) - trans.value.data[2]};
            rigid_omega_jacobian_accumulate(w, rot, rp, gr, wgrad);
          }
        }
        if (omega.requires_grad)
          for (int i = 0; i < 3; ++i) omega.grad.data[std::size_t(i)] += float(wgrad[i]);
        break;
      }
      case Op::ChamferLoss: {
        Node& pred = parent(0);
        if (!pred.requires_grad) break;
        const float gs = g.data[0];
        const int np = pred.value.rows(), nt = n.aux.rows();
        for (int i = 0; i < np; ++i) {
          int j = n.idx[std::size_t(i)];
          for (int c = 0; c < 3; ++c)
            pred.grad.at(i, c) += gs * 2.0f * (pred.value.at(i, c) - n.aux.at(j, c));
        }
        for (int j = 0; j < nt; ++j) {
          int i = n.idx[std::size_t(np) + j];
          for (int c = 0; c < 3; ++c)
            pred.grad.at(i, c) += gs * 2.0f * (pred.value.at(i, c) - n.aux.at(j, c));
        }
        break;
      }
      case Op::EmdLoss: {
        Node& pred = parent(0);
        if (!pred.requires_grad) break;
        const float gs = g.data[0];
        for (int i = 0; i < pred.value.rows(); ++i) {
          int j = n.idx[std::size_t(i)];
          double dx = double(pred.value.at(i, 0)) - n.aux.at(j, 0);
          double dy = double(pred.value.at(i, 1)) - n.aux.at(j, 1);
          double dz = double(pred.value.at(i, 2)) - n.aux.at(j, 2);
          double d = std::sqrt(dx * dx + dy * dy + dz * dz);
          if (d < 1e-12) continue;
          pred.grad.at(i, 0) += gs * float(dx / d);
          pred.grad.at(i, 1) += gs * float(dy / d);
          pred.grad.at(i, 2) += gs * float(dz / d);
        }
        break;
      }
      case Op::SoftmaxCE: {
        Node& logits = parent(0);
        if (!logits.requires_grad) break;
        const float gs = g.data[0] / float(logits.value.rows());
        for (int r = 0; r < logits.value.rows(); ++r) {
          float trow = 0.0f;
          for (int c = 0; c < logits.value.cols(); ++c) trow += n.aux.at(r, c);
          for (int c = 0; c < logits.value.cols(); ++c)
            logits.grad.at(r, c) += gs * (n.aux2.at(r, c) * trow - n.aux.at(r, c));
        }
        break;
      }
      case Op::MaskedSmoothL1: {
        Node& pred = parent(0);
        if (!pred.requires_grad) break;
        const float gs = g.data[0] / n.c0;
        for (std::size_t i = 0; i < pred.value.numel(); ++i) {
          if (n.aux2.data[i] == 0.0f) continue;
          float d = pred.value.data[i] - n.aux.data[i];
          float dd = std::abs(d) < 1.0f ? d : (d > 0.0f ? 1.0f : -1.0f);
          pred.grad.data[i] += gs * dd;
        }
        break;
      }
      case Op::MaskedNegCosine: {
        Node& pred = parent(0);
        if (!pred.requires_grad) break;
        const float gs = g.data[0] / n.c0;
        for (std::size_t i = 0; i < pred.value.numel(); ++i) {
          if (n.aux2.data[i] == 0.0f) continue;
          pred.grad.data[i] += gs * std::sin(pred.value.data[i] - n.aux.data[i]);
        }
        break;
      }
      case Op::Mse: {
        Node& pred = parent(0);
        if (!pred.requires_grad) break;
        const float gs = g.data[0] * 2.0f / float(pred.value.numel());
        for (std::size_t i = 0; i < pred.value.numel(); ++i)
          pred.grad.data[i] += gs * (pred.value.data[i] - n.aux.data[i]);
        break;
      }
    }
  }
}

}  // namespace rcl::nn
