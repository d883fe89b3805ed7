#include "thinset/riesz.hpp"

#include <gtest/gtest.h>

#include <random>

namespace thinset {
namespace {

FreqSet ints(const std::vector<std::int64_t>& v) { return FreqSet::of_integers(GroupSpec::integers(), v); }

std::vector<cplx> random_phases(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<cplx> z(n);
  for (auto& c : z) c = std::polar(1.0, u(rng));
  return z;
}

TEST(RieszProduct, WorkedExamples) {
  auto empty = riesz_product(ints({}), {}, 16);
  for (std::size_t t = 0; t < empty.samples.size(); ++t) EXPECT_NEAR(empty.samples.value(t).real(), 1.0, 1e-15);

  auto single = riesz_product(ints({5}), {1.0}, 64);
  EXPECT_NEAR(std::abs(grid_coefficient(single.spectrum, 5) - 0.5), 0.0, 1e-12);
  EXPECT_NEAR(single.samples.value(0).real(), 2.0, 1e-12);

  auto pair = riesz_product(ints({1, 2}), {1.0, 1.0}, 16);
  EXPECT_NEAR(std::abs(grid_coefficient(pair.spectrum, 3) - 0.25), 0.0, 1e-12);
  EXPECT_NEAR(pair.mean, 1.0, 1e-12);
}

TEST(RieszProduct, CoefficientLawOverRandomPhases) {
  std::mt19937_64 rng(8);
  const std::vector<std::vector<std::int64_t>> sets = {
      {1, 3, 9, 27, 81}, {1, 4, 16, 64, 256, 1024}, {2, 7, 23, 71, 220, 700, 2200, 6700, 20200, 60700}};
  for (const auto& s : sets) {
    auto A = ints(s);
    ASSERT_TRUE(has_distinct_signed_sums(A));
    std::int64_t M = 1;
    std::int64_t span = 0;
    for (auto x : s) span += x;
    while (M <= 2 * span) M <<= 1;
    for (int trial = 0; trial < 20; ++trial) {
      auto F = riesz_product(A, random_phases(rng, s.size()), M);
      ASSERT_TRUE(F.law.has_value());
      EXPECT_TRUE(F.law->holds) << F.law->max_deviation;
      EXPECT_GE(F.min_value, -1e-10);
    }
  }
}

TEST(RieszProduct, LawNeedsDistinctSignedSums) {
  // {1,2} is quasi-independent but 2 - 1 = 1 collides with the frequency 1.
  auto A = ints({1, 2});
  EXPECT_FALSE(has_distinct_signed_sums(A));
  auto F = riesz_product(A, {1.0, 1.0}, 16);
  ASSERT_TRUE(F.law.has_value());
  EXPECT_FALSE(F.law->holds);
  EXPECT_NEAR(grid_coefficient(F.spectrum, 1).real(), 0.75, 1e-12);
}

TEST(RieszProduct, DampingKeepsUnitMean) {
  for (double d : {0.0, 0.3, 0.7, 1.0}) {
    auto F = riesz_product(ints({1, 3, 9, 27}), {1.0, 1.0, 1.0, 1.0}, 128, d);
    EXPECT_NEAR(F.mean, 1.0, 1e-12);
    EXPECT_NEAR(grid_coefficient(F.spectrum, 4).real(), d * d / 4.0, 1e-12);
  }
}

TEST(RieszProduct, Errors) {
  EXPECT_THROW(riesz_product(ints({1, 2, 3}), {1.0, 1.0, 1.0}, 64), PreconditionError);
  EXPECT_THROW(riesz_product(ints({1, 2}), {1.0, 1.0}, 6), AliasError);
  EXPECT_THROW(riesz_product(ints({1}), {cplx(0.5)}, 8), DomainError);
  EXPECT_THROW(riesz_product(FreqSet::of_integers(GroupSpec::cyclic(8), {1}), {1.0}, 8), DomainError);
}

TEST(RieszProduct, SubgaussianBridge) {
  // int exp(Re f / 2) <= exp(sum |x_n|^2 / 2) for f = sum x_n e^{int} over a
  // quasi-independent set, checked on the grid.
  const std::vector<std::int64_t> A = {1, 3, 7, 15, 31, 63};
  ASSERT_TRUE(is_quasi_independent(ints(A)).quasi_independent);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 1.5);
  const int M = 1024;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<cplx> x(A.size());
    double energy = 0.0;
    for (auto& c : x) {
      c = cplx(g(rng), g(rng));
      energy += std::norm(c);
    }
    double lhs = 0.0;
    for (int j = 0; j < M; ++j) {
      const double t = kTwoPi * j / M;
      double re = 0.0;
      for (std::size_t n = 0; n < A.size(); ++n) re += (x[n] * std::polar(1.0, A[n] * t)).real();
      lhs += std::exp(re / 2.0);
    }
    lhs /= M;
    EXPECT_LE(lhs, std::exp(energy / 2.0) + 1e-6);
  }
}

TEST(SidonRatio, WorkedExamples) {
  auto one = sidon_ratio(torus_characters({3}, 32), {1.0}, Deterministic{});
  EXPECT_NEAR(one.ratio, 1.0, 1e-12);

  // Rademacher system: characters at the standard basis of Z(2)^4.
  FreqSet basis(GroupSpec::prime_power(2, 4));
  for (int i = 0; i < 4; ++i) {
    std::vector<std::int64_t> e(4, 0);
    e[i] = 1;
    basis.push_back(Element(e));
  }
  auto rad = sidon_ratio(character_system(basis), std::vector<cplx>(4, 1.0), Deterministic{});
  EXPECT_NEAR(rad.ratio, 1.0, 1e-12);

  const std::vector<std::int64_t> lac = {1, 2, 4, 8, 16};
  auto S = torus_characters(lac, 1024);
  auto r = sidon_ratio(S, std::vector<cplx>(5, 1.0), Deterministic{});
  double top = 0.0;
  for (int j = 0; j < 1024; ++j) {
    cplx s{};
    for (auto k : lac) s += std::polar(1.0, kTwoPi * k * j / 1024.0);
    top = std::max(top, std::abs(s));
  }
  EXPECT_NEAR(r.ratio, 5.0 / top, 1e-12);
  EXPECT_GE(r.ratio, 1.0);
}

TEST(SidonRatio, RandomSignsIsSeeded) {
  auto S = torus_characters({1, 2, 4, 8, 16}, 256);
  std::vector<cplx> a(5, 1.0);
  auto x = sidon_ratio(S, a, RandomSigns{50, 3});
  auto y = sidon_ratio(S, a, RandomSigns{50, 3});
  EXPECT_EQ(x.ratio, y.ratio);
  EXPECT_GT(x.stderr_, 0.0);
  EXPECT_GE(x.ratio, 1.0);
  EXPECT_LE(x.denominator, 5.0 + 1e-12);
}

TEST(SidonRatio, RejectsZeroCoefficients) {
  auto S = torus_characters({1, 2}, 16);
  EXPECT_THROW(sidon_ratio(S, {0.0, 0.0}, Deterministic{}), DomainError);
  EXPECT_THROW(sidon_ratio(S, {1.0}, Deterministic{}), DomainError);
}

TEST(InterpolateL1, SingleCharacter) {
  auto L = FreqSet::of_integers(GroupSpec::cyclic(8), {3});
  auto s = interpolate_l1(L, {1.0});
  EXPECT_NEAR(s.primal_value, 1.0, 1e-8);
  EXPECT_NEAR(s.dual_value, 1.0, 1e-8);
  EXPECT_LE(s.gap, 1e-8);
  EXPECT_LE(s.certificate_sup, 1.0);
}

std::vector<Element> all_characters(int N) {
  std::vector<Element> out;
  for (int k = 0; k < N; ++k) out.push_back(Element{k});
  return out;
}

TEST(InterpolateL1, FullCharacterSetIsInverseTransform) {
  std::mt19937_64 rng(4);
  for (int N : {3, 4, 6, 8}) {
    auto z = random_phases(rng, static_cast<std::size_t>(N));
    auto s = interpolate_l1(GroupSpec::cyclic(N), all_characters(N), z);
    // The square system has the single solution u(t) = sum_k z_k e^{2 pi i k t / N}.
    double l1 = 0.0;
    for (int t = 0; t < N; ++t) {
      cplx u{};
      for (int k = 0; k < N; ++k) u += z[k] * std::polar(1.0, kTwoPi * k * t / N);
      EXPECT_NEAR(std::abs(s.density[t] - u), 0.0, 1e-8);
      l1 += std::abs(u) / N;
    }
    EXPECT_NEAR(s.primal_value, l1, 1e-9);
    EXPECT_LE(s.gap, 1e-9 * l1 + 1e-12);
  }
}

TEST(InterpolateL1, CyclicFourTwoCharacters) {
  auto L = FreqSet::of_integers(GroupSpec::cyclic(4), {1, 3});
  auto s = interpolate_l1(L, {1.0, 1.0}, {.tol = 1e-6});
  EXPECT_NEAR(s.primal_value, 1.0, 1e-6);
  EXPECT_LE(s.gap, 1e-6);
  // u = 2 cos(pi t / 2) is an explicit optimizer.
  std::vector<cplx> u = {2.0, 0.0, -2.0, 0.0};
  double l1 = 0.0;
  for (auto v : u) l1 += std::abs(v) / 4.0;
  EXPECT_NEAR(l1, 1.0, 1e-15);
}

TEST(InterpolateL1, WeakDualityOnRandomInstances) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 12; ++trial) {
    const int N = 8 + 4 * (trial % 3);
    std::vector<std::int64_t> freqs;
    for (int k = 1; k < N && freqs.size() < 3 + static_cast<std::size_t>(trial % 3); k += 1 + trial % 2)
      freqs.push_back(k);
    auto L = FreqSet::of_integers(GroupSpec::cyclic(N), freqs);
    auto s = interpolate_l1(L, random_phases(rng, freqs.size()));
    EXPECT_GE(s.gap, -1e-9);
    EXPECT_LE(s.gap, 1e-9 * s.primal_value + 1e-12);
    EXPECT_LE(s.constraint_residual, 1e-8);
    EXPECT_LE(s.certificate_sup, 1.0);
    // The primal norm dominates every target modulus.
    EXPECT_GE(s.primal_value, 1.0 - 1e-9);
  }
}

TEST(InterpolateL1, PrimePowerGroup) {
  FreqSet L(GroupSpec::prime_power(2, 3));
  L.push_back(Element{1, 0, 0});
  L.push_back(Element{0, 1, 0});
  L.push_back(Element{1, 1, 0});
  auto s = interpolate_l1(L, {1.0, 1.0, -1.0});
  EXPECT_LE(s.gap, 1e-9 * s.primal_value + 1e-12);
  EXPECT_GE(s.primal_value, 1.0);
}

TEST(InterpolateL1, Errors) {
  EXPECT_THROW(interpolate_l1(ints({1}), {1.0}), DomainError);
  auto L = FreqSet::of_integers(GroupSpec::cyclic(4), {1});
  EXPECT_THROW(interpolate_l1(L, {1.0, 1.0}), DomainError);
  EXPECT_THROW(interpolate_l1(GroupSpec::cyclic(4), {Element{1}, Element{5}}, {1.0, 1.0}), DomainError);
}

TEST(SidonSearch, WorkedExamples) {
  auto one = sidon_constant_search(FreqSet::of_integers(GroupSpec::cyclic(8), {1}), 0, 1);
  EXPECT_NEAR(one.certified_lower_bound, 1.0, 1e-8);

  auto all = sidon_constant_search(GroupSpec::cyclic(4), all_characters(4), 16, 7);
  EXPECT_GT(all.certified_lower_bound, 1.0);
  EXPECT_EQ(all.sign_patterns, 8u);

  auto lac = sidon_constant_search(FreqSet::of_integers(GroupSpec::cyclic(64), {1, 2, 4, 8}), 8, 2);
  EXPECT_GE(lac.certified_lower_bound, 1.0);
  EXPECT_LE(lac.certified_lower_bound, lac.best_primal + 1e-9);
}

TEST(SidonSearch, MonotoneInSamples) {
  auto L = FreqSet::of_integers(GroupSpec::cyclic(16), {1, 3, 5});
  double prev = 0.0;
  for (std::size_t n : {0u, 4u, 12u}) {
    auto r = sidon_constant_search(L, n, 9);
    EXPECT_GE(r.certified_lower_bound, prev);
    prev = r.certified_lower_bound;
  }
}

}  // namespace
}  // namespace thinset
