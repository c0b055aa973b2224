#include "robocooklab/nn/tensor.hpp"

#include <cmath>

#include "robocooklab/error.hpp"

namespace rcl::nn {

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw Error(ErrorCode::SHAPE, "negative dimension");
    n *= std::size_t(d);
  }
  data.assign(n, 0.0f);
}

Tensor Tensor::scalar(float v) {
  Tensor t({1, 1});
  t.data[0] = v;
  return t;
}

Tensor Tensor::row(const std::vector<float>& v) {
  Tensor t({1, int(v.size())});
  t.data = v;
  return t;
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

bool Tensor::all_finite() const {
  for (float v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace rcl::nn
