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

#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "msd/sampling.hpp"

using namespace msd;

TEST_CASE("with-replacement sampling from a singleton is constant") {
  const auto omega = sample_with_replacement(1, 5, {7, 0});
  REQUIRE(omega.size() == 5);
  for (Index i : omega.indices()) {
    REQUIRE(i == 0);
  }
  REQUIRE(omega.mode() == SampleMode::with_replacement);
}

TEST_CASE("sampling is deterministic in the seed") {
  const auto a = sample_with_replacement(50, 20, {123, 4});
  const auto b = sample_with_replacement(50, 20, {123, 4});
  REQUIRE(a.indices() == b.indices());

  const auto c = sample_without_replacement(50, 20, {123, 4});
  const auto d = sample_without_replacement(50, 20, {123, 4});
  REQUIRE(c.indices() == d.indices());

  const auto other_stream = sample_with_replacement(50, 20, {123, 5});
  REQUIRE(a.indices() != other_stream.indices());
}

TEST_CASE("with-replacement frequencies obey the law of large numbers") {
  const Index n = 10;
  const Index m = 100000;
  const auto omega = sample_with_replacement(n, m, {42, 0});
  std::vector<Index> counts(static_cast<size_t>(n), 0);
  for (Index i : omega.indices()) {
    ++counts[static_cast<size_t>(i)];
  }
  for (Index c : counts) {
    const double freq = static_cast<double>(c) / static_cast<double>(m);
    REQUIRE(freq >= 0.09);
    REQUIRE(freq <= 0.11);
  }
}

TEST_CASE("full without-replacement draw is a permutation") {
  const Index n = 40;
  const auto omega = sample_without_replacement(n, n, {9, 9});
  std::vector<Index> sorted = omega.indices();
  std::sort(sorted.begin(), sorted.end());
  std::vector<Index> expected(static_cast<size_t>(n));
  std::iota(expected.begin(), expected.end(), Index{0});
  REQUIRE(sorted == expected);
}

TEST_CASE("single without-replacement draws are uniform across seeds") {
  const Index n = 10;
  const int draws = 100000;
  std::vector<int> counts(static_cast<size_t>(n), 0);
  for (int s = 0; s < draws; ++s) {
    const auto omega =
        sample_without_replacement(n, 1, {77, static_cast<std::uint64_t>(s)});
    ++counts[static_cast<size_t>(omega.indices()[0])];
  }
  const double p = 1.0 / static_cast<double>(n);
  const double sigma = std::sqrt(draws * p * (1.0 - p));
  for (int c : counts) {
    REQUIRE(std::abs(c - draws * p) <= 3.0 * sigma);
  }
}

TEST_CASE("without-replacement outputs are distinct and in range") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Index n = 17 + static_cast<Index>(s % 5);
    const Index m = 1 + static_cast<Index>(s % 13);
    const auto omega = sample_without_replacement(n, m, {500, s});
    std::vector<Index> sorted = omega.indices();
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    REQUIRE(sorted.front() >= 0);
    REQUIRE(sorted.back() < n);
    REQUIRE(omega.mode() == SampleMode::without_replacement);
  }
}

TEST_CASE("distinct streams give distinct index sets") {
  int collisions = 0;
  for (std::uint64_t pair = 0; pair < 10000; ++pair) {
    const auto a = sample_without_replacement(100, 10, {1000, 2 * pair});
    const auto b = sample_without_replacement(100, 10, {1000, 2 * pair + 1});
    if (a.indices() == b.indices()) {
      ++collisions;
    }
  }
  REQUIRE(collisions <= 1);
}

TEST_CASE("size preconditions are enforced") {
  REQUIRE_THROWS_AS(sample_with_replacement(0, 5, {1, 0}), InvalidSize);
  REQUIRE_THROWS_AS(sample_with_replacement(5, 0, {1, 0}), InvalidSize);
  REQUIRE_THROWS_AS(sample_without_replacement(5, 6, {1, 0}), InvalidSize);
  REQUIRE_THROWS_AS(sample_without_replacement(0, 1, {1, 0}), InvalidSize);
}

TEST_CASE("uniform_index covers its range without bias artifacts") {
  Rng rng({3, 3});
  const Index n = 7;
  std::vector<int> seen(static_cast<size_t>(n), 0);
  for (int i = 0; i < 7000; ++i) {
    const Index idx = rng.uniform_index(n);
    REQUIRE(idx >= 0);
    REQUIRE(idx < n);
    ++seen[static_cast<size_t>(idx)];
  }
  for (int c : seen) {
    REQUIRE(c > 0);
  }
}

TEST_CASE("normal draws have plausible first and second moments") {
  Rng rng({8, 1});
  const int count = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < count; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / count;
  const double var = sum_sq / count - mean * mean;
  REQUIRE(std::abs(mean) < 0.01);
  REQUIRE(std::abs(var - 1.0) < 0.02);
}
