#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "thinset/codes.hpp"

using namespace thinset;

namespace {

FreqSet ints(std::vector<long> v) { return FreqSet::of_integers(GroupSpec::integers(), v); }

// Independent oracle: every m-subset of [n] either lies in the family or
// meets some word in more than k points.
bool is_maximal(const CodeFamily& f) {
  for (Word w = 0; w < (Word{1} << f.n); ++w) {
    if (std::popcount(w) != f.m) continue;
    bool blocked = false;
    for (Word s : f.words) blocked = blocked || std::popcount(s & w) > f.k;
    if (!blocked) return false;
  }
  return true;
}

// Exact P(S_m > t) for a simple random walk of m steps.
double walk_tail(int m, int t) {
  double p = 0.0;
  for (int j = 0; j <= m; ++j)
    if (2 * j - m > t) p += std::exp(std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0) - m * std::log(2.0));
  return p;
}

}  // namespace

TEST(GvGreedy, WorkedExamples) {
  for (int n = 2; n <= 10; ++n) {
    auto f = gv_greedy(n, 1, 0, LexOrder{});
    EXPECT_EQ(f.words.size(), static_cast<std::size_t>(n));
    EXPECT_TRUE(f.maximal);
  }
  auto pairs = gv_greedy(4, 2, 1, LexOrder{});
  EXPECT_EQ(pairs.words.size(), 6u);
  auto fano = gv_greedy(7, 3, 1, LexOrder{});
  EXPECT_GE(fano.words.size(), 7u);
  EXPECT_TRUE(verify_family(fano));
}

TEST(GvGreedy, FamiliesAreValidMaximalAndBeatCountingBound) {
  for (int n = 2; n <= 16; ++n)
    for (int m = 1; m < n; ++m)
      for (int k = 0; k < m; ++k) {
        if (choose(n, m) > 20000) continue;
        auto f = gv_greedy(n, m, k, LexOrder{});
        ASSERT_TRUE(verify_family(f)) << n << " " << m << " " << k;
        EXPECT_GE(static_cast<double>(f.words.size()), counting_bound(n, m, k) - 1e-9)
            << n << " " << m << " " << k;
        if (n <= 10) {
          EXPECT_TRUE(is_maximal(f)) << n << " " << m << " " << k;
        }
      }
}

TEST(GvGreedy, RandomOrderIsSeededAndValid) {
  auto a = gv_greedy(10, 4, 2, RandomOrder{7});
  auto b = gv_greedy(10, 4, 2, RandomOrder{7});
  EXPECT_EQ(a.words, b.words);
  EXPECT_TRUE(a.maximal);
  EXPECT_TRUE(is_maximal(a));
  EXPECT_GE(static_cast<double>(a.words.size()), counting_bound(10, 4, 2));

  auto big = gv_greedy(40, 20, 12, RandomOrder{3, 500});
  EXPECT_TRUE(verify_family(big));
  EXPECT_FALSE(big.maximal);
  EXPECT_EQ(big.words, gv_greedy(40, 20, 12, RandomOrder{3, 500}).words);
}

TEST(GvGreedy, BudgetGivesValidPartialFamily) {
  try {
    gv_greedy(20, 10, 5, LexOrder{}, 1000);
    FAIL() << "expected PartialFamily";
  } catch (const PartialFamily& e) {
    EXPECT_TRUE(verify_family(e.family()));
    EXPECT_FALSE(e.family().maximal);
    EXPECT_EQ(e.partial_lower_bound(), static_cast<double>(e.family().words.size()));
  }
}

TEST(GvGreedy, Errors) {
  EXPECT_THROW(gv_greedy(4, 4, 1, LexOrder{}), DomainError);
  EXPECT_THROW(gv_greedy(4, 2, 2, LexOrder{}), DomainError);
  EXPECT_THROW(gv_greedy(64, 2, 1, LexOrder{}), DomainError);
}

TEST(GvGreedy, GrowthTrendRecorded) {
  double prev = -1.0;
  for (int n : {8, 16, 24}) {
    const int m = n / 2, k = 3 * n / 8;
    auto f = n <= 16 ? gv_greedy(n, m, k, LexOrder{}) : gv_greedy(n, m, k, RandomOrder{1, 1000});
    const double rate = std::log(static_cast<double>(f.words.size())) / n;
    RecordProperty("rate_n" + std::to_string(n), std::to_string(rate));
    EXPECT_GT(rate, 0.0);
    if (prev >= 0.0 && rate < prev) RecordProperty("trend", "decreasing at n=" + std::to_string(n));
    prev = rate;
  }
}

TEST(ExactN, WorkedExamples) {
  for (int n = 2; n <= 8; ++n) EXPECT_EQ(exact_N(n, 1, 0), static_cast<std::uint64_t>(n));
  EXPECT_EQ(exact_N(4, 2, 1), 6u);
  EXPECT_EQ(exact_N(7, 3, 1), 7u);
}

TEST(ExactN, KnownValuesAndGreedyBound) {
  // Disjoint words: floor(n/m).
  EXPECT_EQ(exact_N(9, 3, 0), 3u);
  EXPECT_EQ(exact_N(10, 3, 0), 3u);
  // Steiner triple system on 9 points: 12 triples.
  EXPECT_EQ(exact_N(9, 3, 1), 12u);
  // Packing pairs by triples on 6 points: 4.
  EXPECT_EQ(exact_N(6, 3, 1), 4u);
  for (int n = 3; n <= 9; ++n)
    for (int m = 1; m < n; ++m)
      for (int k = 0; k < m; ++k) {
        const auto g = gv_greedy(n, m, k, LexOrder{}).words.size();
        const auto e = exact_N(n, m, k);
        EXPECT_GE(e, g) << n << " " << m << " " << k;
        if (k == m - 1) {
          EXPECT_EQ(e, choose(n, m));
        }
      }
}

TEST(ExactN, SizeGuard) {
  EXPECT_THROW(exact_N(20, 10, 5), CapExceeded);
  try {
    exact_N(9, 4, 2, ExactOptions{5});
    FAIL() << "expected CapExceeded";
  } catch (const CapExceeded& e) {
    EXPECT_GE(e.partial_lower_bound(), 1.0);
  }
}

TEST(ExtractViaCodes, QuasiIndependentInputKeepsFirstWord) {
  auto A = ints({1, 3, 9, 27, 81, 243});
  auto f = gv_greedy(6, 3, 1, LexOrder{});
  auto r = extract_via_codes(A, f);
  ASSERT_TRUE(r.subset);
  EXPECT_EQ(*r.word, 0u);
  EXPECT_EQ(r.subset->size(), 3u);
  EXPECT_TRUE(r.supports.front().empty());
}

TEST(ExtractViaCodes, DenseIntervalAndSmallCap) {
  // No 4-subset of {1,...,6} has distinct subset sums and a nonzero
  // relation needs at least 3 terms, so every |r_t| > 2 and the injection
  // t -> r_t into R(A) is reported instead of a subset.
  auto A = ints({1, 2, 3, 4, 5, 6});
  auto f = gv_greedy(6, 4, 2, LexOrder{});
  auto r = extract_via_codes(A, f);
  EXPECT_FALSE(r.subset);
  EXPECT_TRUE(r.injection_holds);
  for (const auto& sup : r.supports) EXPECT_GE(sup.size(), 3u);
  EXPECT_LE(f.words.size() + 1, r.relation_count);

  // With k = 3 the same ground set yields a quasi-independent subset.
  auto f3 = gv_greedy(6, 4, 3, LexOrder{});
  auto r3 = extract_via_codes(A, f3);
  ASSERT_TRUE(r3.subset);
  EXPECT_GE(r3.subset->size(), 1u);
  EXPECT_TRUE(is_quasi_independent(*r3.subset).quasi_independent);

  auto B = ints({1, 2, 3, 4, 5, 6, 7, 8});
  auto g = gv_greedy(8, 4, 3, LexOrder{});
  auto s = extract_via_codes(B, g);
  ASSERT_TRUE(s.subset);
  EXPECT_GE(s.subset->size(), 1u);
  EXPECT_TRUE(is_quasi_independent(*s.subset).quasi_independent);
}

TEST(ExtractViaCodes, InjectionWhenEverySupportIsLarge) {
  // A triple carries a relation exactly when it has the form a + b = c.
  auto A = ints({1, 2, 3, 4, 5, 6});
  CodeFamily f{6, 3, 0, {word_from({0, 1, 2}), word_from({3, 4, 5})}, false};
  // {4,5,6} has no relation, so the second word is returned.
  auto r = extract_via_codes(A, f);
  ASSERT_TRUE(r.subset);
  EXPECT_EQ(*r.word, 1u);

  auto C = ints({1, 2, 3, 5, 7, 12});
  CodeFamily g{6, 3, 0, {word_from({0, 1, 2}), word_from({3, 4, 5})}, false};
  auto s = extract_via_codes(C, g);
  EXPECT_FALSE(s.subset);
  EXPECT_TRUE(s.injection_holds);
  EXPECT_EQ(s.supports.size(), 2u);
  EXPECT_GE(s.relation_count, 3u);
}

TEST(ExtractViaCodes, Errors) {
  auto A = ints({1, 2, 3});
  EXPECT_THROW(extract_via_codes(A, gv_greedy(4, 2, 1, LexOrder{})), DomainError);
  CodeFamily bad{3, 2, 0, {word_from({0, 1}), word_from({1, 2})}, false};
  EXPECT_THROW(extract_via_codes(A, bad), DomainError);
}

TEST(RandomWalkTail, ExactTailBelowGaussianBound) {
  for (int m = 1; m <= 60; ++m)
    for (int k = (m + 1) / 2; k < m; ++k) {
      const int t = 2 * k - m;
      EXPECT_LE(walk_tail(m, t), std::exp(-double(t) * t / (2.0 * m)) + 1e-15) << m << " " << k;
    }
}
