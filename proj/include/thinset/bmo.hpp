#pragma once

// BMO norms on the discretized circle, Fejer kernels, the trapezoid
// polynomials P_n and the lacunary/BMO comparison pipeline.

#include <algorithm>
#include <boost/rational.hpp>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "thinset/error.hpp"
#include "thinset/parallel.hpp"
#include "thinset/random.hpp"
#include "thinset/relations.hpp"
#include "thinset/spectrum.hpp"
#include "thinset/subgauss.hpp"

namespace thinset {

using Rational = boost::rational<std::int64_t>;

/// Grid arc: the samples start, start+1, ..., start+length-1 modulo M.
struct Arc {
  std::int64_t start = 0;
  std::int64_t length = 1;
};

enum class ArcScheme { AllGridArcs, DyadicLengths };

/// Arcs with grid endpoints. A full-length arc is listed once.
struct ArcFamily {
  std::int64_t M = 0;
  ArcScheme scheme = ArcScheme::DyadicLengths;
  std::vector<Arc> arcs;

  /// Every start with lengths 1, 2, 4, ... below M, plus the whole circle.
  static ArcFamily dyadic(std::int64_t M) {
    ArcFamily f = empty(M, ArcScheme::DyadicLengths);
    for (std::int64_t L = 1; L < M; L *= 2)
      for (std::int64_t s = 0; s < M; ++s) f.arcs.push_back({s, L});
    f.arcs.push_back({0, M});
    return f;
  }

  /// Every start with every length below M, plus the whole circle.
  static ArcFamily all(std::int64_t M) {
    ArcFamily f = empty(M, ArcScheme::AllGridArcs);
    for (std::int64_t L = 1; L < M; ++L)
      for (std::int64_t s = 0; s < M; ++s) f.arcs.push_back({s, L});
    f.arcs.push_back({0, M});
    return f;
  }

  static ArcFamily make(std::int64_t M, ArcScheme scheme) {
    return scheme == ArcScheme::AllGridArcs ? all(M) : dyadic(M);
  }

 private:
  static ArcFamily empty(std::int64_t M, ArcScheme scheme) {
    if (M < 1) throw DomainError("arc families need M >= 1");
    ArcFamily f;
    f.M = M;
    f.scheme = scheme;
    return f;
  }
};

/// ||.||_{*,1} (mean absolute oscillation) or ||.||_{*,psi_a}.
struct BmoFlavor {
  enum class Kind { Mean1, Psi } kind = Kind::Mean1;
  double a = 2.0;

  static BmoFlavor mean1() { return {Kind::Mean1, 1.0}; }
  static BmoFlavor psi(double a) { return {Kind::Psi, a}; }
};

namespace detail {

// Values f(start + i) - mean over the arc.
inline std::vector<cplx> arc_deviation(const std::vector<cplx>& v, const std::vector<cplx>& prefix,
                                       const Arc& arc) {
  const auto M = static_cast<std::int64_t>(v.size());
  const auto s = static_cast<std::size_t>(arc.start);
  const auto L = static_cast<std::size_t>(arc.length);
  const cplx mean = (prefix[s + L] - prefix[s]) / static_cast<double>(L);
  std::vector<cplx> g(L);
  for (std::size_t i = 0; i < L; ++i) g[i] = v[(s + i) % static_cast<std::size_t>(M)] - mean;
  return g;
}

}  // namespace detail

/// |mean f| + max over the arcs of ||f - f_I|| in L_1(m_I) or L_{psi_a}(m_I),
/// where m_I is the uniform measure on the samples of I. The psi_a maximum
/// is exact: arcs are visited in decreasing order of the upper bound
/// max|f - f_I| and the scan stops once no bound beats the best.
inline double bmo_norm(const SampledFunction& f, const BmoFlavor& flavor, const ArcFamily& arcs) {
  const auto M = static_cast<std::int64_t>(f.size());
  if (arcs.M != M) throw DomainError("arc family and samples use different grids");
  if (flavor.kind == BmoFlavor::Kind::Psi && !(flavor.a > 0.0)) throw DomainError("psi_a needs a > 0");
  for (const auto& arc : arcs.arcs)
    if (arc.length < 1 || arc.length > M || arc.start < 0 || arc.start >= M)
      throw DomainError("arc outside the grid");
  const auto& v = f.values();
  std::vector<cplx> prefix(2 * v.size() + 1);
  for (std::size_t i = 0; i < 2 * v.size(); ++i) prefix[i + 1] = prefix[i] + v[i % v.size()];
  const double head = std::abs(prefix[v.size()] / static_cast<double>(M));
  const std::size_t n = arcs.arcs.size();
  if (n == 0) return head;

  if (flavor.kind == BmoFlavor::Kind::Mean1) {
    std::vector<double> osc(n);
    parallel_for(n, [&](std::size_t i) {
      double acc = 0.0;
      for (const auto& x : detail::arc_deviation(v, prefix, arcs.arcs[i])) acc += std::abs(x);
      osc[i] = acc / static_cast<double>(arcs.arcs[i].length);
    });
    return head + *std::max_element(osc.begin(), osc.end());
  }

  const double a = flavor.a;
  std::vector<double> upper(n);
  parallel_for(n, [&](std::size_t i) {
    double top = 0.0;
    for (const auto& x : detail::arc_deviation(v, prefix, arcs.arcs[i])) top = std::max(top, std::abs(x));
    upper[i] = top;
  });
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return upper[x] > upper[y]; });
  double best = 0.0;
  for (std::size_t i : order) {
    if (upper[i] <= best) break;
    const auto g = detail::arc_deviation(v, prefix, arcs.arcs[i]);
    best = std::max(best, psi_norm(SampledFunction::uniform(g), a));
  }
  return head + best;
}

/// Fejer coefficient (1 - |k|/N)^+.
inline Rational fejer_coefficient(std::int64_t N, std::int64_t k) {
  if (N < 1) throw DomainError("Fejer kernels need N >= 1");
  const std::int64_t d = k < 0 ? -k : k;
  return d >= N ? Rational(0) : Rational(N - d, N);
}

inline TrigPoly fejer_kernel(std::int64_t N) {
  TrigPoly p(GroupSpec::torus_grid(2 * N + 1));
  for (std::int64_t k = -(N - 1); k <= N - 1; ++k)
    p.add(k, boost::rational_cast<double>(fejer_coefficient(N, k)));
  return p;
}

/// phi_n(k): 0 off (0, 2^{n+1} + 2^n), 1 on [2^n, 2^{n+1}], affine in between.
inline Rational trapezoid_coefficient(int n, std::int64_t k) {
  const std::int64_t lo = std::int64_t{1} << n;
  const std::int64_t hi = 2 * lo;
  const std::int64_t end = hi + lo;
  if (k <= 0 || k >= end) return Rational(0);
  if (k < lo) return Rational(k, lo);
  if (k <= hi) return Rational(1);
  return Rational(end - k, lo);
}

/// P_n = e^{ict}((3/2) F_{c} - (1/2) F_{h}) with c = 2^n + 2^{n-1}, h = 2^{n-1}.
struct FejerDecomposition {
  std::int64_t shift = 0;
  std::int64_t big_order = 0;
  std::int64_t small_order = 0;
  Rational big_weight{3, 2};
  Rational small_weight{-1, 2};
};

struct Trapezoid {
  int n = 0;
  std::vector<Rational> phi;  // phi_n(k) for k in [0, 2^{n+1} + 2^n]
  TrigPoly poly{GroupSpec::torus_grid(2)};
  FejerDecomposition fejer;
  bool identity_exact = false;  // phi matches the Fejer combination for every k
  std::int64_t grid = 0;
  double l1_norm = 0.0;  // grid L_1 norm of P_n
};

inline std::int64_t trapezoid_degree(int n) { return 3 * (std::int64_t{1} << n) - 1; }

/// Builds P_n, checks the Fejer identity in exact rational arithmetic and
/// reports the L_1 norm on `grid` samples (default 4 (2^{n+1} + 2^n)).
inline Trapezoid trapezoid_poly(int n, std::int64_t grid = 0) {
  if (n < 1 || n > 40) throw DomainError("trapezoid level must lie in [1, 40]");
  Trapezoid t;
  t.n = n;
  const std::int64_t lo = std::int64_t{1} << n;
  const std::int64_t end = 3 * lo;
  t.fejer.shift = lo + lo / 2;
  t.fejer.big_order = lo + lo / 2;
  t.fejer.small_order = lo / 2;
  t.grid = grid == 0 ? 4 * end : grid;
  t.poly = TrigPoly(GroupSpec::torus_grid(t.grid));
  t.identity_exact = true;
  t.phi.reserve(static_cast<std::size_t>(end + 1));
  // The identity is checked one step beyond each end of the support.
  for (std::int64_t k = -1; k <= end + 1; ++k) {
    const Rational phi = trapezoid_coefficient(n, k);
    const Rational combo = t.fejer.big_weight * fejer_coefficient(t.fejer.big_order, k - t.fejer.shift) +
                           t.fejer.small_weight * fejer_coefficient(t.fejer.small_order, k - t.fejer.shift);
    t.identity_exact = t.identity_exact && phi == combo;
    if (k < 0 || k > end) continue;
    t.phi.push_back(phi);
    if (phi.numerator() != 0) t.poly.add(k, boost::rational_cast<double>(phi));
  }
  t.l1_norm = lp_norm(synth_eval(t.poly, t.grid), 1.0);
  return t;
}

struct PairingResult {
  cplx lhs;  // sum_k phi_n(|n_k|) x_k / 2
  cplx rhs;  // grid integral of f Re(P_n)
};

inline constexpr double kPairingTolerance = 1e-9;

/// Both sides of the pairing int f Re(P_n) dm = sum_k phi_n(n_k) x_k / 2.
/// Re(P_n) has coefficient phi_n(|k|)/2 at k, which covers negative
/// frequencies too. Throws CertificateFailure if the sides differ by more
/// than 1e-9 (relative to sum |x_k|).
inline PairingResult pairing_identity(const TrigPoly& f, int n, std::int64_t M) {
  if (f.group().kind() != GroupKind::TorusGrid) throw DomainError("pairing needs a torus-grid polynomial");
  const Trapezoid t = trapezoid_poly(n, M);
  const auto fs = synth_eval(f, M);
  const auto ps = synth_eval(t.poly, M);
  PairingResult out;
  double mass = 0.0;
  for (const auto& [k, x] : f.coefficients()) {
    out.lhs += boost::rational_cast<double>(trapezoid_coefficient(n, k < 0 ? -k : k)) * x / 2.0;
    mass += std::abs(x);
  }
  for (std::size_t i = 0; i < fs.size(); ++i) out.rhs += fs.value(i) * ps.value(i).real();
  out.rhs /= static_cast<double>(M);
  if (std::abs(out.lhs - out.rhs) > kPairingTolerance * std::max(1.0, mass))
    throw CertificateFailure("pairing sides differ by " + std::to_string(std::abs(out.lhs - out.rhs)));
  return out;
}

/// sum of phi_n(n_k)^2 over n_k in the closed block [2^n, 2^{n+1}], i.e. the
/// number of such n_k.
inline double trapezoid_block_mass(const FreqSet& L, int n) {
  double s = 0.0;
  for (auto k : L.scalars()) {
    const auto phi = boost::rational_cast<double>(trapezoid_coefficient(n, k));
    if (k >= (std::int64_t{1} << n) && k <= (std::int64_t{2} << n)) s += phi * phi;
  }
  return s;
}

struct BmoRatioStats {
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  std::vector<double> ratios;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::int64_t grid = 0;
};

struct BmoRatioOptions {
  double a = 2.0;
  ArcScheme arcs = ArcScheme::DyadicLengths;
};

/// ||sum_k x_k e^{i n_k t}||_{*,psi_a} / ||x||_2 for random complex Gaussian
/// directions x. Trial t draws from stream (seed, t).
inline BmoRatioStats lacunary_bmo_ratio(const FreqSet& L, std::size_t trials, std::int64_t M,
                                        std::uint64_t seed, const BmoRatioOptions& opt = {}) {
  if (L.group().kind() != GroupKind::Integers) throw DomainError("lacunary ratios need integer frequencies");
  if (L.empty() || trials == 0) throw DomainError("need a nonempty set and at least one trial");
  const auto freqs = L.scalars();
  for (auto k : freqs)
    if (k <= 0) throw DomainError("frequencies must be positive");
  const auto arcs = ArcFamily::make(M, opt.arcs);
  const auto chars = torus_characters(freqs, M);
  BmoRatioStats out;
  out.trials = trials;
  out.seed = seed;
  out.grid = M;
  out.ratios.resize(trials);
  parallel_for(trials, [&](std::size_t t) {
    auto rng = make_rng(seed, t);
    std::vector<cplx> x(freqs.size());
    double norm2 = 0.0;
    for (auto& c : x) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      c = {re, im};
      norm2 += std::norm(c);
    }
    std::vector<cplx> values(static_cast<std::size_t>(M));
    for (std::size_t k = 0; k < x.size(); ++k)
      for (std::size_t j = 0; j < values.size(); ++j) values[j] += x[k] * chars[k].value(j);
    out.ratios[t] = bmo_norm(SampledFunction::uniform(std::move(values)), BmoFlavor::psi(opt.a), arcs) /
                    std::sqrt(norm2);
  });
  out.max_ratio = *std::max_element(out.ratios.begin(), out.ratios.end());
  out.mean_ratio = std::accumulate(out.ratios.begin(), out.ratios.end(), 0.0) / static_cast<double>(trials);
  return out;
}

}  // namespace thinset
