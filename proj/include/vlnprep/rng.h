//
// Copyright 2026 The vlnprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef VLNPREP_RNG_H_
#define VLNPREP_RNG_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace vlnprep {

// The pinned generator behind every stochastic transform. Golden files in the
// test suite depend on the exact bit stream, so the update rule, the bounded
// integer draw and the shuffle order below must not change.
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t Next();

  // Uniform integer in [0, bound). Rejection sampling, never biased.
  // bound must be positive.
  uint64_t Uniform(uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double UniformDouble();

  // In-place Fisher-Yates: for i = n-1 down to 1, swap(v[i], v[Uniform(i+1)]).
  template <typename T>
  void Shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(Uniform(i));
      using std::swap;
      swap(values[i - 1], values[j]);
    }
  }

  // Forward partial Fisher-Yates: for i < count,
  // swap(v[i], v[i + Uniform(n - i)]). Leaves a uniform random
  // count-prefix. count must not exceed values.size().
  template <typename T>
  void ShufflePrefix(std::span<T> values, std::size_t count) {
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < count && i < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(Uniform(n - i));
      using std::swap;
      swap(values[i], values[j]);
    }
  }

 private:
  uint64_t state_;
};

// splitmix64 finalizer applied to x + golden gamma.
uint64_t Mix64(uint64_t x);

// 64-bit FNV-1a over raw bytes.
uint64_t Fnv1a64(std::string_view bytes);

// Child seed for a numbered sub-stream of a master seed.
uint64_t DeriveSeed(uint64_t seed, uint64_t tag);

// Child seed keyed by a record id and a position within the record, e.g.
// (master seed, path_id, instruction index). Independent of execution order.
uint64_t DeriveSeed(uint64_t seed, std::string_view key, uint64_t index);

}  // namespace vlnprep

#endif  // VLNPREP_RNG_H_
