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

#ifndef DUALGUARD_TESTS_TEST_SUPPORT_HPP_
#define DUALGUARD_TESTS_TEST_SUPPORT_HPP_

#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "tensor.hpp"

namespace dualguard::testing {

// Fresh per-test directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = std::string(info->test_suite_name()) + "." + info->name();
    path_ = std::filesystem::temp_directory_path() / ("dualguard_test_" + name);
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline Tensor random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols,
                            double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t = Tensor::matrix(rows, cols);
  for (auto& v : t.data()) v = static_cast<float>(n(gen));
  return t;
}

inline std::vector<float> unit(std::size_t dim, std::size_t axis) {
  std::vector<float> v(dim, 0.0f);
  v[axis] = 1.0f;
  return v;
}

}  // namespace dualguard::testing

#endif  // DUALGUARD_TESTS_TEST_SUPPORT_HPP_
