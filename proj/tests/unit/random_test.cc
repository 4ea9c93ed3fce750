/*
 * Copyright 2026 The hedgepred Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "hedgepred/parallel.h"
#include "hedgepred/random.h"

namespace hedgepred {
namespace {

TEST(RngTest, SameSeedSameStream) {
  Rng a(17), b(17), c(18);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.NextU64();
    EXPECT_EQ(x, b.NextU64());
    differs = differs || x != c.NextU64();
  }
  EXPECT_TRUE(differs);
}

TEST(RngTest, UniformIndexStaysInRangeAndCoversIt) {
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[rng.UniformIndex(7)];
  for (int h : hits) EXPECT_GT(h, 850);
}

TEST(RngTest, BernoulliRate) {
  Rng rng(5);
  int n = 0;
  for (int i = 0; i < 20000; ++i) n += rng.Bernoulli(0.1);
  EXPECT_NEAR(n / 20000.0, 0.1, 0.01);
}

TEST(RngTest, NormalMoments) {
  Rng rng(9);
  double s = 0, ss = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.Normal();
    s += z;
    ss += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.03);
  EXPECT_NEAR(ss / n, 1.0, 0.03);
}

TEST(RngTest, CategoricalFollowsWeights) {
  Rng rng(11);
  const std::vector<double> w = {1.0, 0.0, 3.0};
  std::vector<int> hits(3, 0);
  for (int i = 0; i < 8000; ++i) ++hits[rng.Categorical(w)];
  EXPECT_EQ(hits[1], 0);
  EXPECT_NEAR(hits[2] / 8000.0, 0.75, 0.03);
}

TEST(RngTest, ShuffleIsAPermutation) {
  Rng rng(2);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  rng.Shuffle(w.begin(), w.end());
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

TEST(DeriveSeedTest, StreamsAndIndicesAreDistinct) {
  std::set<std::uint64_t> seen;
  for (const char* stream : {"fit", "smote", "folds"}) {
    for (std::uint64_t i = 0; i < 20; ++i) seen.insert(DeriveSeed(42, stream, i));
  }
  EXPECT_EQ(seen.size(), 60u);
  EXPECT_EQ(DeriveSeed(42, "fit", 3), DeriveSeed(42, "fit", 3));
  EXPECT_NE(DeriveSeed(42, "fit", 3), DeriveSeed(43, "fit", 3));
}

TEST(ParallelForTest, ResultsIndependentOfJobs) {
  auto run = [](int jobs) {
    std::vector<std::uint64_t> out(64);
    ParallelFor(out.size(), jobs, [&](std::size_t i) {
      Rng rng(DeriveSeed(1, "x", i));
      out[i] = rng.NextU64();
    });
    return out;
  };
  EXPECT_EQ(run(1), run(4));
}

TEST(ParallelForTest, RethrowsLowestIndexError) {
  std::atomic<int> calls{0};
  try {
    ParallelFor(10, 3, [&](std::size_t i) {
      ++calls;
      if (i == 7 || i == 4) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "4");
  }
  EXPECT_EQ(calls.load(), 10);
}

}  // namespace
}  // namespace hedgepred
