/* Copyright 2026 The Dualguard Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DUALGUARD_TENSOR_HPP_
#define DUALGUARD_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dualguard {

using Shape = std::vector<std::size_t>;

// Dense row-major f32 tensor with 1 to 4 dimensions, every dimension >= 1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);  // zero-filled
  Tensor(Shape shape, std::vector<float> data);

  static Tensor matrix(std::size_t rows, std::size_t cols) {
    return Tensor(Shape{rows, cols});
  }
  static Tensor vector(std::span<const float> values);
  static Tensor vector(std::span<const double> values);

  const Shape& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Matrix view; valid for 2-D tensors only.
  std::size_t rows() const;
  std::size_t cols() const;
  std::span<float> row(std::size_t r);
  std::span<const float> row(std::size_t r) const;
  float& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  float at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<float> data_;
};

std::size_t shape_element_count(const Shape& shape);
void validate_shape(const Shape& shape);

// Binary layout: "DTVT" | u32 version=1 | u32 dtype=1 (f32) | u32 ndim |
// u64 dims[ndim] | f32 data, all little-endian, row-major.
inline constexpr std::uint32_t kTensorFormatVersion = 1;
inline constexpr std::uint32_t kDtypeF32 = 1;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);
void write_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);
// Reads only the header; used to check manifests without loading payloads.
Shape read_tensor_shape(const std::filesystem::path& path);

// ---- dense kernels; accumulation is always in double ----

double dot(std::span<const float> a, std::span<const float> b);
double dot(std::span<const double> a, std::span<const double> b);
double dot(std::span<const float> a, std::span<const double> b);
double norm2(std::span<const float> v);
double norm2(std::span<const double> v);
double frobenius_norm(const Tensor& t);

// A (m x n) times x (n) -> m.
std::vector<double> matvec(const Tensor& a, std::span<const double> x);
// A (m x k) times B (k x n) -> m x n.
Tensor matmul(const Tensor& a, const Tensor& b);
// A (m x k) times B^T where B is (n x k) -> m x n.
Tensor matmul_transposed(const Tensor& a, const Tensor& b);
// Mean of the rows of a 2-D tensor.
std::vector<double> row_mean(const Tensor& t);
double cosine(std::span<const double> a, std::span<const double> b);

std::vector<float> to_float(std::span<const double> v);
std::vector<double> to_double(std::span<const float> v);

}  // namespace dualguard

#endif  // DUALGUARD_TENSOR_HPP_
