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

#include "tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "error.hpp"
#include "util.hpp"

namespace dualguard {

namespace {

constexpr char kMagic[4] = {'D', 'T', 'V', 'T'};
constexpr std::size_t kMaxDims = 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n) const {
    if (remaining() < n) fail(ErrorKind::kData, "truncated tensor data");
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

Shape parse_header(ByteReader& reader, std::span<const std::uint8_t> bytes) {
  reader.need(4);
  require(std::memcmp(bytes.data(), kMagic, 4) == 0, ErrorKind::kData,
          "bad magic: not a .dtvt tensor");
  reader.u32();  // magic
  const std::uint32_t version = reader.u32();
  require(version == kTensorFormatVersion, ErrorKind::kData,
          "unsupported tensor format version " + std::to_string(version));
  const std::uint32_t dtype = reader.u32();
  require(dtype == kDtypeF32, ErrorKind::kData,
          "unsupported tensor dtype code " + std::to_string(dtype));
  const std::uint32_t ndim = reader.u32();
  require(ndim >= 1 && ndim <= kMaxDims, ErrorKind::kData,
          "unsupported tensor rank " + std::to_string(ndim));
  Shape shape(ndim);
  for (auto& dim : shape) {
    const std::uint64_t d = reader.u64();
    require(d >= 1 && d <= (std::uint64_t{1} << 40), ErrorKind::kData,
            "invalid tensor dimension " + std::to_string(d));
    dim = static_cast<std::size_t>(d);
  }
  return shape;
}

}  // namespace

std::size_t shape_element_count(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void validate_shape(const Shape& shape) {
  require(!shape.empty() && shape.size() <= kMaxDims, ErrorKind::kData,
          "tensor rank must be 1..4, got " + std::to_string(shape.size()));
  for (std::size_t d : shape) {
    require(d >= 1, ErrorKind::kData, "tensor dimensions must be >= 1");
  }
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_element_count(shape_), 0.0f);
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  require(shape_element_count(shape_) == data_.size(), ErrorKind::kData,
          "shape/data length mismatch: shape implies " +
              std::to_string(shape_element_count(shape_)) + " elements, got " +
              std::to_string(data_.size()));
}

Tensor Tensor::vector(std::span<const float> values) {
  return Tensor(Shape{values.size()}, std::vector<float>(values.begin(), values.end()));
}

Tensor Tensor::vector(std::span<const double> values) {
  return Tensor(Shape{values.size()}, to_float(values));
}

std::size_t Tensor::rows() const {
  require(shape_.size() == 2, ErrorKind::kData, "expected a 2-D tensor");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  require(shape_.size() == 2, ErrorKind::kData, "expected a 2-D tensor");
  return shape_[1];
}

std::span<float> Tensor::row(std::size_t r) {
  const std::size_t n = cols();
  return std::span<float>(data_).subspan(r * n, n);
}

std::span<const float> Tensor::row(std::size_t r) const {
  const std::size_t n = cols();
  return std::span<const float>(data_).subspan(r * n, n);
}

bool Tensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  validate_shape(t.shape());
  require(shape_element_count(t.shape()) == t.size(), ErrorKind::kData,
          "shape/data length mismatch");
  std::vector<std::uint8_t> out;
  out.reserve(16 + 8 * t.ndim() + 4 * t.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kTensorFormatVersion);
  put_u32(out, kDtypeF32);
  put_u32(out, static_cast<std::uint32_t>(t.ndim()));
  for (std::size_t d : t.shape()) put_u64(out, d);
  for (float v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  ByteReader reader(bytes);
  Shape shape = parse_header(reader, bytes);
  const std::size_t count = shape_element_count(shape);
  reader.need(count * 4);
  require(reader.remaining() == count * 4, ErrorKind::kData,
          "trailing bytes after tensor payload");
  std::vector<float> data(count);
  for (auto& v : data) {
    v = std::bit_cast<float>(reader.u32());
    require(std::isfinite(v), ErrorKind::kData, "non-finite element in tensor");
  }
  return Tensor(std::move(shape), std::move(data));
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  write_file_bytes(path, encode_tensor(t));
}

Tensor read_tensor(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_tensor(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

Shape read_tensor_shape(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  ByteReader reader(bytes);
  return parse_header(reader, bytes);
}

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double{a[i]} * double{b[i]};
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dot(std::span<const float> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double{a[i]} * b[i];
  return s;
}

double norm2(std::span<const float> v) { return std::sqrt(dot(v, v)); }
double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }
double frobenius_norm(const Tensor& t) { return norm2(t.data()); }

std::vector<double> matvec(const Tensor& a, std::span<const double> x) {
  require(a.cols() == x.size(), ErrorKind::kData, "matvec dimension mismatch");
  std::vector<double> y(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) y[r] = dot(a.row(r), x);
  return y;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(), ErrorKind::kData, "matmul dimension mismatch");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> acc(n);
  Tensor out = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a.at(i, p);
      const auto brow = b.row(p);
      for (std::size_t j = 0; j < n; ++j) acc[j] += aip * brow[j];
    }
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = static_cast<float>(acc[j]);
  }
  return out;
}

Tensor matmul_transposed(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.cols(), ErrorKind::kData,
          "matmul_transposed dimension mismatch");
  Tensor out = Tensor::matrix(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      out.at(i, j) = static_cast<float>(dot(a.row(i), b.row(j)));
    }
  }
  return out;
}

std::vector<double> row_mean(const Tensor& t) {
  std::vector<double> mean(t.cols(), 0.0);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const auto row = t.row(r);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += row[c];
  }
  for (auto& v : mean) v /= static_cast<double>(t.rows());
  return mean;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = norm2(a), nb = norm2(b);
  if (na == 0.0 || nb == 0.0) return na == nb ? 1.0 : 0.0;
  return dot(a, b) / (na * nb);
}

std::vector<float> to_float(std::span<const double> v) {
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i]);
  return out;
}

std::vector<double> to_double(std::span<const float> v) {
  return std::vector<double>(v.begin(), v.end());
}

}  // namespace dualguard
