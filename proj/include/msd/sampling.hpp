// Copyright 2026 The msd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "msd/errors.hpp"
#include "msd/vecspace.hpp"

namespace msd {

// (seed, stream) fully determines all downstream randomness. Parallel
// trials each take their own stream, so results do not depend on
// scheduling or thread count.
struct SeedSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// Deterministic random source. The engine and every distribution below are
// fully specified, so a given SeedSpec yields the same draw sequence on any
// platform. std::random distributions are avoided on purpose: the standard
// leaves their algorithms unspecified.
class Rng {
 public:
  explicit Rng(SeedSpec spec) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(spec.seed),
        static_cast<std::uint32_t>(spec.seed >> 32),
        static_cast<std::uint32_t>(spec.stream),
        static_cast<std::uint32_t>(spec.stream >> 32),
    };
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Unbiased uniform draw from [0, n) by rejection.
  Index uniform_index(Index n) {
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t draw;
    do {
      draw = next_u64();
    } while (draw >= limit);
    return static_cast<Index>(draw % un);
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// m i.i.d. uniform draws from [0, n).
inline SampleIndexSet sample_with_replacement(Index n, Index m, Rng& rng) {
  if (n < 1 || m < 1) {
    throw InvalidSize("sample_with_replacement: need n >= 1 and m >= 1");
  }
  std::vector<Index> indices(static_cast<size_t>(m));
  for (auto& idx : indices) {
    idx = rng.uniform_index(n);
  }
  return SampleIndexSet(std::move(indices), SampleMode::with_replacement, n);
}

inline SampleIndexSet sample_with_replacement(Index n, Index m,
                                              SeedSpec seed) {
  Rng rng(seed);
  return sample_with_replacement(n, m, rng);
}

// First m entries of a seeded Fisher-Yates shuffle of [0, n); a partial
// shuffle of m steps produces exactly that prefix.
inline SampleIndexSet sample_without_replacement(Index n, Index m, Rng& rng) {
  if (n < 1 || m < 1) {
    throw InvalidSize("sample_without_replacement: need n >= 1 and m >= 1");
  }
  if (m > n) {
    throw InvalidSize("sample_without_replacement: m=" + std::to_string(m) +
                      " exceeds n=" + std::to_string(n));
  }
  std::vector<Index> pool(static_cast<size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < m; ++i) {
    const Index j = i + rng.uniform_index(n - i);
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
  }
  pool.resize(static_cast<size_t>(m));
  return SampleIndexSet(std::move(pool), SampleMode::without_replacement, n);
}

inline SampleIndexSet sample_without_replacement(Index n, Index m,
                                                 SeedSpec seed) {
  Rng rng(seed);
  return sample_without_replacement(n, m, rng);
}

inline SampleIndexSet sample_indices(SampleMode mode, Index n, Index m,
                                     Rng& rng) {
  return mode == SampleMode::with_replacement
             ? sample_with_replacement(n, m, rng)
             : sample_without_replacement(n, m, rng);
}

inline SampleIndexSet sample_indices(SampleMode mode, Index n, Index m,
                                     SeedSpec seed) {
  Rng rng(seed);
  return sample_indices(mode, n, m, rng);
}

}  // namespace msd
