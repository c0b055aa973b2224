#include "robocooklab/nn/layers.hpp"

#include <cmath>

#include "robocooklab/error.hpp"

namespace rcl::nn {

int ParamStore::add(const std::string& name, Tensor value) {
  if (find(name) >= 0) throw Error(ErrorCode::CONFIG, "duplicate parameter " + name);
  names_.push_back(name);
  values_.push_back(std::move(value));
  return int(values_.size()) - 1;
}

int ParamStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return int(i);
  return -1;
}

std::size_t ParamStore::total_scalars() const {
  std::size_t n = 0;
  for (const Tensor& t : values_) n += t.numel();
  return n;
}

std::vector<Var> ParamStore::register_on(Tape& tape, bool trainable) const {
  std::vector<Var> vars;
  vars.reserve(values_.size());
  for (const Tensor& t : values_) vars.push_back(tape.input(t, trainable));
  return vars;
}

std::vector<Tensor> ParamStore::collect_grads(const Tape& tape,
                                              const std::vector<Var>& vars) const {
  std::vector<Tensor> grads;
  grads.reserve(vars.size());
  for (Var v : vars) grads.push_back(tape.grad(v));
  return grads;
}

Mlp Mlp::create(ParamStore& store, const std::string& prefix, int in,
                const std::vector<int>& layer_sizes, Rng& rng, bool zero_last) {
  Mlp mlp;
  int fan_in = in;
  for (std::size_t l = 0; l < layer_sizes.size(); ++l) {
    const int fan_out = layer_sizes[l];
    Tensor w({fan_in, fan_out});
    const bool zero = zero_last && l + 1 == layer_sizes.size();
    if (!zero) {
      const double s = std::sqrt(6.0 / double(fan_in + fan_out));
      for (float& v : w.data) v = float(rng.uniform(-s, s));
    }
    mlp.weights.push_back(store.add(prefix + ".w" + std::to_string(l), std::move(w)));
    mlp.biases.push_back(store.add(prefix + ".b" + std::to_string(l), Tensor({1, fan_out})));
    fan_in = fan_out;
  }
  return mlp;
}

Var Mlp::forward(Tape& tape, const std::vector<Var>& params, Var x) const {
  Var h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = tape.matmul(h, params[std::size_t(weights[l])]);
    h = tape.add_bias(h, params[std::size_t(biases[l])]);
    if (l + 1 < weights.size()) h = tape.relu(h);
  }
  return h;
}

int Mlp::in_features(const ParamStore& store) const {
  return store.value(weights.front()).rows();
}

int Mlp::out_features(const ParamStore& store) const {
  return store.value(weights.back()).cols();
}

void adam_step(ParamStore& params, const std::vector<Tensor>& grads,
               AdamState& state, const AdamConfig& cfg) {
  if (grads.size() != params.count())
    throw Error(ErrorCode::SHAPE, "adam_step gradient count mismatch");
  if (state.m.empty()) {
    for (std::size_t i = 0; i < params.count(); ++i) {
      state.m.emplace_back(params.value(int(i)).shape);
      state.v.emplace_back(params.value(int(i)).shape);
    }
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(double(cfg.beta1), double(state.step));
  const double bc2 = 1.0 - std::pow(double(cfg.beta2), double(state.step));
  for (std::size_t i = 0; i < params.count(); ++i) {
    Tensor& w = params.value(int(i));
    const Tensor& g = grads[i];
    if (!w.same_shape(g)) throw Error(ErrorCode::SHAPE, "adam_step shape mismatch");
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (std::size_t j = 0; j < w.numel(); ++j) {
      m.data[j] = cfg.beta1 * m.data[j] + (1.0f - cfg.beta1) * g.data[j];
      v.data[j] = cfg.beta2 * v.data[j] + (1.0f - cfg.beta2) * g.data[j] * g.data[j];
      const double mhat = m.data[j] / bc1;
      const double vhat = v.data[j] / bc2;
      w.data[j] -= float(cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
  }
}

double loss_eval(LossKind kind, const Tensor& pred, const Tensor& target) {
  Tape tape;
  Var p = tape.input(pred, false);
  Var loss;
  switch (kind) {
    case LossKind::SoftmaxCe:
      loss = tape.softmax_ce(p, target);
      break;
    case LossKind::SmoothL1: {
      Tensor mask(pred.shape);
      for (float& v : mask.data) v = 1.0f;
      loss = tape.masked_smooth_l1(p, target, mask);
      break;
    }
    case LossKind::NegCosine: {
      Tensor mask(pred.shape);
      for (float& v : mask.data) v = 1.0f;
      loss = tape.masked_neg_cosine(p, target, mask);
      break;
    }
    case LossKind::Mse:
      loss = tape.mse(p, target);
      break;
  }
  return double(tape.value(loss).data[0]);
}

}  // namespace rcl::nn
