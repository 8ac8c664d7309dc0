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

#ifndef DUALGUARD_UTIL_HPP_
#define DUALGUARD_UTIL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dualguard {

// 64-bit FNV-1a. Stable across platforms, used for checksums and seed names.
std::uint64_t fnv1a(std::span<const std::uint8_t> bytes,
                    std::uint64_t state = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(std::string_view text,
                    std::uint64_t state = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

// Named substream of a base seed: the same (base, name) always yields the
// same engine regardless of call order or thread.
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t base, std::string_view stream)
      : engine_(derive_seed(base, stream)) {}

  double normal() { return normal_(engine_); }
  std::mt19937_64& engine() { return engine_; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    // Fisher-Yates with a fixed index rule; std::shuffle's draw pattern is
    // implementation-defined.
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = engine_() % i;
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware).
// Each index is handled exactly once; callers write results into
// preallocated slots so output order never depends on scheduling.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace dualguard

#endif  // DUALGUARD_UTIL_HPP_
