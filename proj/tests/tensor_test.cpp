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

#include <cmath>
#include <cstring>
#include <limits>

#include <gtest/gtest.h>

#include "error.hpp"
#include "test_support.hpp"
#include "util.hpp"

namespace dualguard {
namespace {

using testing::TempDir;

TEST(TensorIo, IdentityMatrixLayout) {
  Tensor eye = Tensor::matrix(2, 2);
  eye.at(0, 0) = 1.0f;
  eye.at(1, 1) = 1.0f;
  const auto bytes = encode_tensor(eye);
  // magic, version, dtype, ndim (4 bytes each) + two u64 dims = 32 bytes.
  ASSERT_EQ(bytes.size(), 48u);
  EXPECT_EQ(std::memcmp(bytes.data(), "DTVT", 4), 0);
  const std::uint8_t header_tail[] = {1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0,
                                      2, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_EQ(std::memcmp(bytes.data() + 4, header_tail, sizeof(header_tail)), 0);
  const std::uint8_t data[] = {0x00, 0x00, 0x80, 0x3F, 0, 0, 0, 0,
                               0,    0,    0,    0,    0x00, 0x00, 0x80, 0x3F};
  EXPECT_EQ(std::memcmp(bytes.data() + 32, data, sizeof(data)), 0);
}

TEST(TensorIo, VectorRoundTrip) {
  const float values[] = {1.0f, 2.0f, 3.0f};
  const Tensor t = Tensor::vector(std::span<const float>(values));
  TempDir dir;
  write_tensor(t, dir / "v.dtvt");
  EXPECT_EQ(read_tensor(dir / "v.dtvt"), t);
  EXPECT_EQ(read_tensor_shape(dir / "v.dtvt"), (Shape{3}));
}

TEST(TensorIo, RandomRoundTripIsBitExact) {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<std::size_t> ndim(1, 4), extent(1, 6);
  std::uniform_int_distribution<std::uint32_t> bits;
  for (int i = 0; i < 1000; ++i) {
    Shape shape(ndim(gen));
    for (auto& s : shape) s = extent(gen);
    Tensor t(shape);
    for (auto& v : t.data()) {
      float f;
      do {
        const std::uint32_t b = bits(gen);
        std::memcpy(&f, &b, 4);
      } while (!std::isfinite(f));
      v = f;
    }
    const auto bytes = encode_tensor(t);
    const Tensor back = decode_tensor(bytes);
    ASSERT_EQ(back.shape(), t.shape());
    ASSERT_EQ(std::memcmp(back.data().data(), t.data().data(), t.size() * 4), 0);
    ASSERT_EQ(encode_tensor(back), bytes);
  }
}

TEST(TensorIo, RejectsBadMagic) {
  auto bytes = encode_tensor(Tensor(Shape{2}));
  std::memcpy(bytes.data(), "XXXX", 4);
  try {
    decode_tensor(bytes);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
}

TEST(TensorIo, RejectsTruncation) {
  auto bytes = encode_tensor(Tensor(Shape{4, 4}));
  bytes.resize(bytes.size() - 3);
  try {
    decode_tensor(bytes);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("truncat"), std::string::npos);
  }
}

TEST(TensorIo, RejectsTrailingBytesVersionAndNonFinite) {
  auto bytes = encode_tensor(Tensor(Shape{2}));
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(decode_tensor(longer), Error);
  auto version = bytes;
  version[4] = 2;
  EXPECT_THROW(decode_tensor(version), Error);
  Tensor bad(Shape{2});
  bad.data()[1] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(decode_tensor(encode_tensor(bad)), Error);
}

TEST(TensorIo, MissingFileNamesPath) {
  TempDir dir;
  try {
    read_tensor(dir / "absent.dtvt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("absent.dtvt"), std::string::npos);
  }
}

TEST(TensorIo, ShapeValidation) {
  EXPECT_THROW(validate_shape({}), Error);
  EXPECT_THROW(validate_shape({1, 2, 3, 4, 5}), Error);
  EXPECT_THROW(validate_shape({3, 0}), Error);
  EXPECT_NO_THROW(validate_shape({1, 1, 1, 1}));
}

TEST(TensorMath, FrobeniusNorm) {
  Tensor t = Tensor::matrix(1, 2);
  t.at(0, 0) = 3.0f;
  t.at(0, 1) = 4.0f;
  EXPECT_DOUBLE_EQ(frobenius_norm(t), 5.0);
  EXPECT_EQ(frobenius_norm(Tensor::matrix(3, 3)), 0.0);
}

TEST(TensorMath, FrobeniusHomogeneityAndRowDecomposition) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 50; ++i) {
    Tensor x = testing::random_matrix(gen, 8, 64);
    Tensor y = x;
    for (auto& v : y.data()) v *= 4.0f;  // exact power-of-two scaling
    EXPECT_NEAR(frobenius_norm(y), 4.0 * frobenius_norm(x), 1e-12 * frobenius_norm(y));
    double rows = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) rows += std::pow(norm2(x.row(r)), 2);
    EXPECT_NEAR(rows, std::pow(frobenius_norm(x), 2), 1e-6 * rows);
  }
}

TEST(TensorMath, MatvecMatchesNaiveLoop) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor a = testing::random_matrix(gen, 64, 64);
    std::vector<double> x(64);
    std::normal_distribution<double> n;
    for (auto& v : x) v = n(gen);
    const auto y = matvec(a, x);
    for (std::size_t i = 0; i < 64; ++i) {
      double ref = 0.0;
      for (std::size_t j = 0; j < 64; ++j) ref += double{a.at(i, j)} * x[j];
      EXPECT_NEAR(y[i], ref, 1e-6 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(TensorMath, MatmulVariantsAgree) {
  std::mt19937_64 gen(5);
  const Tensor a = testing::random_matrix(gen, 5, 7);
  const Tensor b = testing::random_matrix(gen, 7, 3);
  Tensor bt = Tensor::matrix(3, 7);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 3; ++j) bt.at(j, i) = b.at(i, j);
  }
  const Tensor p = matmul(a, b);
  const Tensor q = matmul_transposed(a, bt);
  ASSERT_EQ(p.shape(), (Shape{5, 3}));
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_FLOAT_EQ(p.data()[i], q.data()[i]);
  EXPECT_THROW(matmul(a, a), Error);
}

TEST(TensorMath, RowMean) {
  const Tensor t(Shape{2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(row_mean(t), (std::vector<double>{2.0, 3.0}));
  const Tensor one(Shape{1, 3}, {5, 6, 7});
  EXPECT_EQ(row_mean(one), (std::vector<double>{5.0, 6.0, 7.0}));
}

TEST(Util, NamedSubstreamsAreStableAndDistinct) {
  EXPECT_EQ(derive_seed(1, "a"), derive_seed(1, "a"));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(2, "a"));
  // FNV-1a reference value for the empty string and "a".
  EXPECT_EQ(fnv1a(std::string_view("")), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a(std::string_view("a")), 0xaf63dc4c8601ec8cULL);
}

TEST(Util, ParallelForVisitsEachIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) ASSERT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 4,
                            [](std::size_t i) {
                              if (i == 7) fail(ErrorKind::kNumeric, "boom");
                            }),
               Error);
}

}  // namespace
}  // namespace dualguard
