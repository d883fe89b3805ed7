#include "thinset/matroid.hpp"

#include <gtest/gtest.h>

#include <random>

namespace thinset {
namespace {

// Backtracking k-coloring with independence pruning.
bool colorable(const GFVectorSet& V, std::size_t k, std::size_t i, std::vector<IndexSet>& parts) {
  if (i == V.size()) return true;
  for (std::size_t j = 0; j < k; ++j) {
    parts[j].push_back(i);
    if (gf_independent(V, parts[j]) && colorable(V, k, i + 1, parts)) return true;
    parts[j].pop_back();
    if (parts[j].empty()) break;  // empty parts are interchangeable
  }
  return false;
}

bool brute_colorable(const GFVectorSet& V, std::size_t k) {
  std::vector<IndexSet> parts(k);
  return colorable(V, k, 0, parts);
}

GFVectorSet random_instance(std::mt19937_64& rng, std::int64_t p, int N, std::size_t n) {
  GFVectorSet V(p, N);
  std::uniform_int_distribution<std::int64_t> d(0, p - 1);
  while (V.size() < n) {
    GFVector v(N);
    for (auto& x : v) x = d(rng);
    if (std::any_of(v.begin(), v.end(), [](auto x) { return x != 0; })) V.push_back(v);
  }
  return V;
}

TEST(GfRank, WorkedExamples) {
  GFVectorSet V(2, 2, {{1, 0}, {0, 1}, {1, 1}, {1, 0}});
  EXPECT_EQ(gf_rank(V, {0, 1}), 2u);
  EXPECT_EQ(gf_rank(V, {0, 3}), 1u);
  EXPECT_EQ(gf_rank(V, {0, 1, 2}), 2u);
  EXPECT_EQ(gf_rank(V, {}), 0u);
}

TEST(GfRank, PrimeFieldArithmetic) {
  GFVectorSet V(5, 3, {{1, 2, 3}, {0, 1, 1}, {1, 3, 4}});
  EXPECT_EQ(gf_rank(V, {0, 1}), 2u);
  // Row 3 = row 1 + row 2 mod 5.
  EXPECT_EQ(gf_rank(V), 2u);
  GFVectorSet W(3, 1, {{1}, {2}});
  EXPECT_EQ(gf_rank(W), 1u);
}

TEST(GfRank, RejectsInvalidInput) {
  EXPECT_THROW(GFVectorSet(4, 2), DomainError);
  EXPECT_THROW(GFVectorSet(2, 2, {{0, 0}}), DomainError);
  EXPECT_THROW(GFVectorSet(3, 2, {{3, 0}}), DomainError);
  GFVectorSet V(2, 2, {{1, 0}});
  EXPECT_THROW(gf_rank(V, {1}), DomainError);
}

TEST(HornRado, WorkedExamples) {
  GFVectorSet V(2, 2, {{1, 0}, {0, 1}, {1, 1}});
  auto r = horn_rado_partition(V, 2);
  ASSERT_TRUE(std::holds_alternative<Partition>(r));
  EXPECT_TRUE(verify_partition(V, std::get<Partition>(r), 2));

  auto one = horn_rado_partition(GFVectorSet(2, 2, {{1, 0}, {0, 1}}), 1);
  ASSERT_TRUE(std::holds_alternative<Partition>(one));
  EXPECT_EQ(std::get<Partition>(one).parts.size(), 1u);

  GFVectorSet triple(2, 2, {{1, 0}, {1, 0}, {1, 0}});
  auto w = horn_rado_partition(triple, 2);
  ASSERT_TRUE(std::holds_alternative<FailureWitness>(w));
  EXPECT_EQ(std::get<FailureWitness>(w).subset, (IndexSet{0, 1, 2}));
  EXPECT_EQ(std::get<FailureWitness>(w).rank, 1u);
}

TEST(HornRado, AgreesWithBruteForceColoring) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 150; ++trial) {
    const std::int64_t p = std::array<std::int64_t, 3>{2, 3, 5}[trial % 3];
    const int N = 2 + trial % 3;
    const std::size_t n = 3 + trial % 10;
    auto V = random_instance(rng, p, N, n);
    for (std::size_t k = 1; k <= 3; ++k) {
      auto r = horn_rado_partition(V, k);
      const bool ok = brute_colorable(V, k);
      ASSERT_EQ(std::holds_alternative<Partition>(r), ok) << "trial " << trial << " k " << k;
      if (ok) {
        EXPECT_TRUE(verify_partition(V, std::get<Partition>(r), k));
      } else {
        EXPECT_TRUE(verify_witness(V, std::get<FailureWitness>(r), k));
      }
    }
  }
}

TEST(HornRado, FailureIsMonotoneInK) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    auto V = random_instance(rng, 2, 3, 12);
    bool failed = false;
    for (std::size_t k = 6; k >= 1; --k) {
      const bool fails = std::holds_alternative<FailureWitness>(horn_rado_partition(V, k));
      if (failed) {
        EXPECT_TRUE(fails);
      }
      failed = failed || fails;
    }
  }
}

TEST(HornRado, RejectsZeroParts) {
  EXPECT_THROW(horn_rado_partition(GFVectorSet(2, 1, {{1}}), 0), DomainError);
}

TEST(IndependenceVsQuasi, WorkedExamples) {
  auto a = independence_vs_quasi(GFVectorSet(2, 2, {{1, 0}, {0, 1}}));
  EXPECT_TRUE(a.independent);
  EXPECT_TRUE(a.quasi_independent);
  auto b = independence_vs_quasi(GFVectorSet(2, 2, {{1, 0}, {0, 1}, {1, 1}}));
  EXPECT_FALSE(b.independent);
  EXPECT_FALSE(b.quasi_independent);
  auto c = independence_vs_quasi(GFVectorSet(3, 1, {{1}, {2}}));
  EXPECT_FALSE(c.independent);
  EXPECT_FALSE(c.quasi_independent);
  auto d = independence_vs_quasi(GFVectorSet(5, 1, {{1}, {1}}));
  EXPECT_FALSE(d.quasi_independent);
}

TEST(IndependenceVsQuasi, IndependenceImpliesQuasiIndependence) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t p = trial % 2 ? 3 : 5;
    auto V = random_instance(rng, p, 4, 1 + trial % 6);
    auto r = independence_vs_quasi(V);
    if (r.independent) {
      EXPECT_TRUE(r.quasi_independent);
    }
  }
}

TEST(IndependenceVsQuasi, OverTwoTheNotionsCoincide) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    auto V = random_instance(rng, 2, 5, 2 + trial % 5);
    auto r = independence_vs_quasi(V);
    EXPECT_EQ(r.independent, r.quasi_independent);
  }
}

}  // namespace
}  // namespace thinset
