#pragma once

#include <string>
#include <vector>

#include "robocooklab/nn/tape.hpp"
#include "robocooklab/nn/tensor.hpp"
#include "robocooklab/rng.hpp"

namespace rcl::nn {

/// Ordered, named parameter set. Registration order defines the flat
/// serialization layout and the Adam update order, so training stays
/// deterministic.
class ParamStore {
 public:
  int add(const std::string& name, Tensor value);
  int find(const std::string& name) const;  // -1 if absent

  std::size_t count() const { return values_.size(); }
  Tensor& value(int i) { return values_[std::size_t(i)]; }
  const Tensor& value(int i) const { return values_[std::size_t(i)]; }
  const std::string& name(int i) const { return names_[std::size_t(i)]; }
  std::size_t total_scalars() const;

  /// Register every parameter on a tape (requires_grad = trainable).
  std::vector<Var> register_on(Tape& tape, bool trainable = true) const;
  /// Read back d(loss)/d(param) after backward; order matches the store.
  std::vector<Tensor> collect_grads(const Tape& tape, const std::vector<Var>& vars) const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

/// Dense multi-layer perceptron; relu between layers, linear output.
struct Mlp {
  std::vector<int> weights;  // ParamStore indices, one per layer
  std::vector<int> biases;

  /// Glorot-uniform init; `zero_last` zeroes the final layer so fresh heads
  /// start as the identity contribution.
  static Mlp create(ParamStore& store, const std::string& prefix, int in,
                    const std::vector<int>& layer_sizes, Rng& rng,
                    bool zero_last = false);

  Var forward(Tape& tape, const std::vector<Var>& params, Var x) const;
  int in_features(const ParamStore& store) const;
  int out_features(const ParamStore& store) const;
};

struct AdamConfig {
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  long step = 0;
};

/// Standard bias-corrected Adam update, in store order.
void adam_step(ParamStore& params, const std::vector<Tensor>& grads,
               AdamState& state, const AdamConfig& cfg);

/// Standalone loss evaluation (mirrors the tape ops) for inference-side
/// checks and reports.
enum class LossKind { SoftmaxCe, SmoothL1, NegCosine, Mse };
double loss_eval(LossKind kind, const Tensor& pred, const Tensor& target);

}  // namespace rcl::nn
