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

#include "vlnprep/rng.h"

#include <limits>

namespace vlnprep {
namespace {

constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

uint64_t Finalize(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

uint64_t Rng::Next() {
  state_ += kGamma;
  return Finalize(state_);
}

uint64_t Rng::Uniform(uint64_t bound) {
  // Values below (2^64 mod bound) would over-represent the low residues.
  const uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const uint64_t x = Next();
    if (x >= threshold) return x % bound;
  }
}

double Rng::UniformDouble() {
  return static_cast<double>(Next() >> 11) * 0x1.0p-53;
}

uint64_t Mix64(uint64_t x) { return Finalize(x + kGamma); }

uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

uint64_t DeriveSeed(uint64_t seed, uint64_t tag) {
  return Mix64(Mix64(seed) ^ tag);
}

uint64_t DeriveSeed(uint64_t seed, std::string_view key, uint64_t index) {
  return Mix64(Mix64(Mix64(seed) ^ Fnv1a64(key)) ^ index);
}

}  // namespace vlnprep
