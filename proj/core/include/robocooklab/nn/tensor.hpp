#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace rcl::nn {

/// Dense f32 tensor, row-major. Training code treats everything as 2-D
/// (rows x cols); scalars are [1,1].
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor scalar(float v);
  static Tensor row(const std::vector<float>& v);

  std::size_t numel() const { return data.size(); }
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? (shape.empty() ? 0 : 1) : shape[1]; }

  float& at(int r, int c) { return data[std::size_t(r) * cols() + c]; }
  float at(int r, int c) const { return data[std::size_t(r) * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  std::string shape_str() const;
  bool all_finite() const;
};

}  // namespace rcl::nn
