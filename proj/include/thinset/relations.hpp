#pragma once

// {-1,0,1}-relations of frequency sets, quasi-independence, extraction of
// quasi-independent subsets, mesh counts and lacunary decompositions.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "thinset/error.hpp"
#include "thinset/random.hpp"
#include "thinset/spectrum.hpp"

namespace thinset {

namespace detail {

using Key = __int128;

struct KeyHash {
  std::size_t operator()(Key k) const noexcept {
    const auto u = static_cast<unsigned __int128>(k);
    return static_cast<std::size_t>(
        mix64(static_cast<std::uint64_t>(u) ^ mix64(static_cast<std::uint64_t>(u >> 64))));
  }
};

// Packs group elements into 128-bit keys on which the group law is cheap.
// Z(p)^N uses base-2^w digits; Z(2)^N degenerates to XOR.
class GroupArith {
 public:
  explicit GroupArith(const GroupSpec& g) : g_(g) {
    if (g.kind() == GroupKind::PrimePower) {
      width_ = g.modulus() == 2 ? 1 : std::bit_width(static_cast<std::uint64_t>(g.modulus() - 1));
      if (width_ * g.dimension() > 126)
        throw DomainError("Z(p)^N too large for relation enumeration");
    }
  }

  Key encode(const Element& e) const {
    switch (g_.kind()) {
      case GroupKind::Integers:
        return static_cast<Key>(e.scalar());
      case GroupKind::Cyclic:
      case GroupKind::TorusGrid:
        return static_cast<Key>(mod_floor(e.scalar(), g_.modulus()));
      case GroupKind::PrimePower: {
        Key k = 0;
        for (std::size_t i = e.coords.size(); i-- > 0;)
          k = (k << width_) | static_cast<Key>(mod_floor(e.coords[i], g_.modulus()));
        return k;
      }
    }
    return 0;
  }

  Key add(Key a, Key b) const {
    switch (g_.kind()) {
      case GroupKind::Integers:
        return a + b;
      case GroupKind::Cyclic:
      case GroupKind::TorusGrid: {
        const Key m = g_.modulus();
        Key s = a + b;
        return s >= m ? s - m : s;
      }
      case GroupKind::PrimePower:
        return g_.modulus() == 2 ? (a ^ b) : digitwise(a, b, false);
    }
    return 0;
  }

  Key neg(Key a) const {
    switch (g_.kind()) {
      case GroupKind::Integers:
        return -a;
      case GroupKind::Cyclic:
      case GroupKind::TorusGrid:
        return a == 0 ? 0 : static_cast<Key>(g_.modulus()) - a;
      case GroupKind::PrimePower:
        return g_.modulus() == 2 ? a : digitwise(0, a, true);
    }
    return 0;
  }

 private:
  Key digitwise(Key a, Key b, bool negate_b) const {
    const Key mask = (Key{1} << width_) - 1;
    const std::int64_t p = g_.modulus();
    Key out = 0;
    for (int i = g_.dimension() - 1; i >= 0; --i) {
      const int shift = i * width_;
      const auto da = static_cast<std::int64_t>((a >> shift) & mask);
      auto db = static_cast<std::int64_t>((b >> shift) & mask);
      if (negate_b) db = (p - db) % p;
      out = (out << width_) | static_cast<Key>((da + db) % p);
    }
    return out;
  }

  GroupSpec g_;
  int width_ = 0;
};

inline void check_integer_range(const FreqSet& A) {
  if (A.group().kind() != GroupKind::Integers) return;
  long double total = 0;
  for (const auto& e : A) total += std::fabs(static_cast<long double>(e.scalar()));
  if (total > 1e36L) throw DomainError("frequencies too large for exact relation sums");
}

inline std::uint64_t pow3(std::size_t n) {
  std::uint64_t r = 1;
  while (n--) r *= 3;
  return r;
}

// All 3^|idx| signed sums over the given elements; code digit d_i (base 3)
// means sign 0, +1, -1 for d = 0, 1, 2.
inline std::vector<Key> signed_sums(const GroupArith& ar, const std::vector<Key>& keys,
                                    std::size_t first, std::size_t count) {
  std::vector<Key> sums{0};
  sums.reserve(pow3(count));
  for (std::size_t i = 0; i < count; ++i) {
    const Key x = keys[first + i];
    const Key nx = ar.neg(x);
    const std::size_t old = sums.size();
    sums.resize(3 * old);
    for (std::size_t j = 0; j < old; ++j) {
      sums[old + j] = ar.add(sums[j], x);
      sums[2 * old + j] = ar.add(sums[j], nx);
    }
  }
  return sums;
}

inline void decode_signs(std::uint64_t code, std::size_t count, std::vector<int>& out,
                         std::size_t offset) {
  for (std::size_t i = 0; i < count; ++i) {
    const auto d = code % 3;
    out[offset + i] = d == 0 ? 0 : (d == 1 ? 1 : -1);
    code /= 3;
  }
}

}  // namespace detail

/// A vector xi in {-1,0,1}^A with sum xi_n n = 0, checked on construction.
class RelationCertificate {
 public:
  RelationCertificate(FreqSet set, std::vector<int> signs)
      : set_(std::move(set)), signs_(std::move(signs)) {
    if (signs_.size() != set_.size()) throw DomainError("certificate length mismatch");
    detail::GroupArith ar(set_.group());
    detail::Key total = 0;
    for (std::size_t i = 0; i < signs_.size(); ++i) {
      const int s = signs_[i];
      if (s < -1 || s > 1) throw DomainError("relation coefficients must lie in {-1,0,1}");
      const detail::Key x = ar.encode(set_[i]);
      if (s == 1) total = ar.add(total, x);
      if (s == -1) total = ar.add(total, ar.neg(x));
    }
    if (total != 0) throw PreconditionError("signs do not sum to zero in the group");
  }

  const FreqSet& set() const { return set_; }
  const std::vector<int>& signs() const { return signs_; }

  bool nontrivial() const {
    return std::any_of(signs_.begin(), signs_.end(), [](int s) { return s != 0; });
  }

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < signs_.size(); ++i)
      if (signs_[i] != 0) out.push_back(i);
    return out;
  }

 private:
  FreqSet set_;
  std::vector<int> signs_;
};

struct RelationReport {
  std::uint64_t count = 1;  // includes the zero relation
  std::vector<RelationCertificate> certificates;
  std::uint64_t cap = 0;
  std::uint64_t work = 0;
};

struct RelationOptions {
  std::uint64_t cap = 100'000'000;
  bool keep_witnesses = false;
  std::size_t max_witnesses = 64;
};

namespace detail {

// Meet-in-the-middle over sign vectors. With stop_at_first the scan ends at
// the first nontrivial relation (count is then 2 if one was found).
inline RelationReport enumerate_relations(const FreqSet& A, const RelationOptions& opt,
                                          bool stop_at_first) {
  if (A.size() > 30) throw DomainError("relation enumeration supports |A| <= 30");
  if (opt.cap < 1) throw DomainError("enumeration cap must be >= 1");
  check_integer_range(A);
  GroupArith ar(A.group());
  std::vector<Key> keys;
  for (const auto& e : A) keys.push_back(ar.encode(e));

  const std::size_t n = A.size();
  const std::size_t left_n = n / 2;
  const std::size_t right_n = n - left_n;
  const std::uint64_t left_size = pow3(left_n);
  const std::uint64_t right_size = pow3(right_n);

  RelationReport report;
  report.cap = opt.cap;
  report.count = 0;
  if (left_size > opt.cap)
    throw CapExceeded("relation enumeration needs more than " + std::to_string(opt.cap) +
                          " steps",
                      1.0);
  std::uint64_t work = left_size;

  const auto left_sums = signed_sums(ar, keys, 0, left_n);
  std::vector<std::pair<Key, std::uint32_t>> left;
  left.reserve(left_sums.size());
  for (std::uint32_t c = 0; c < left_sums.size(); ++c) left.emplace_back(left_sums[c], c);
  std::sort(left.begin(), left.end());

  const auto right_sums = signed_sums(ar, keys, left_n, right_n);
  const bool want_witness = opt.keep_witnesses || stop_at_first;
  const std::size_t witness_limit = stop_at_first ? 1 : opt.max_witnesses;

  for (std::uint64_t rc = 0; rc < right_size; ++rc) {
    if (++work > opt.cap)
      throw CapExceeded("relation enumeration exceeded cap " + std::to_string(opt.cap),
                        static_cast<double>(std::max<std::uint64_t>(report.count, 1)));
    const Key target = ar.neg(right_sums[rc]);
    auto lo = std::lower_bound(left.begin(), left.end(), std::make_pair(target, std::uint32_t{0}));
    auto it = lo;
    for (; it != left.end() && it->first == target; ++it) {
      const bool trivial = rc == 0 && it->second == 0;
      if (!trivial && want_witness && report.certificates.size() < witness_limit) {
        std::vector<int> signs(n);
        decode_signs(it->second, left_n, signs, 0);
        decode_signs(rc, right_n, signs, left_n);
        report.certificates.emplace_back(A, std::move(signs));
      }
      if (!trivial && stop_at_first) {
        report.count = 2;
        report.work = work;
        return report;
      }
    }
    report.count += static_cast<std::uint64_t>(it - lo);
  }
  report.work = work;
  return report;
}

}  // namespace detail

/// |R(A)|: the number of xi in {-1,0,1}^A with sum xi_n n = 0 (zero relation
/// included). Sums are taken in the ambient group, so mod M on Z_M and on the
/// torus grid. Throws CapExceeded once the step budget is spent.
inline RelationReport relation_count(const FreqSet& A, const RelationOptions& opt = {}) {
  return detail::enumerate_relations(A, opt, false);
}

struct QuasiIndependence {
  bool quasi_independent = true;
  std::optional<RelationCertificate> witness;
};

/// True iff all 2^|A| subset sums are distinct, i.e. only the zero relation
/// exists. A nontrivial certificate is returned otherwise.
inline QuasiIndependence is_quasi_independent(const FreqSet& A,
                                              std::uint64_t cap = 100'000'000) {
  RelationOptions opt;
  opt.cap = cap;
  auto rep = detail::enumerate_relations(A, opt, true);
  QuasiIndependence out;
  if (!rep.certificates.empty()) {
    out.quasi_independent = false;
    out.witness = rep.certificates.front();
  }
  return out;
}

struct Greedy {};
struct RandomThinning {
  double delta = 0.5;
  std::uint64_t seed = 0;
};

struct ExtractionResult {
  FreqSet subset;
  std::size_t retained = 0;                       // |A(omega)|; |A| for greedy
  std::optional<std::uint64_t> retained_relations;  // |R(A(omega))| unless capped
  bool relations_capped = false;
};

namespace detail {

// Greedy admission: x joins iff x is not a {-1,0,1}-combination of the current
// selection (equivalently x is not in S - S for the subset-sum set S). The
// signed sums are kept as two halves H0 + H1, each tripling on admission, so a
// membership test costs |smaller half| hash lookups instead of 2^k.
inline FreqSet greedy_quasi_independent(const FreqSet& A, const std::vector<std::size_t>& order,
                                        std::size_t max_sums) {
  check_integer_range(A);
  GroupArith ar(A.group());
  std::unordered_set<Key, KeyHash> half_set[2] = {{Key{0}}, {Key{0}}};
  std::vector<Key> half_list[2] = {{Key{0}}, {Key{0}}};
  FreqSet chosen(A.group());
  for (auto i : order) {
    const Key x = ar.encode(A[i]);
    const int small = half_list[0].size() <= half_list[1].size() ? 0 : 1;
    bool clash = false;
    for (Key h : half_list[small])
      if (half_set[1 - small].count(ar.add(x, ar.neg(h)))) {
        clash = true;
        break;
      }
    if (clash) continue;
    auto& list = half_list[small];
    auto& set = half_set[small];
    if (list.size() * 3 > max_sums)
      throw CapExceeded("signed-sum table would exceed " + std::to_string(max_sums) + " entries",
                        static_cast<double>(chosen.size()));
    const Key nx = ar.neg(x);
    const std::size_t old = list.size();
    list.reserve(3 * old);
    for (std::size_t j = 0; j < old; ++j) {
      for (Key s : {ar.add(list[j], x), ar.add(list[j], nx)}) {
        if (set.insert(s).second) list.push_back(s);
      }
    }
    chosen.push_back(A[i]);
  }
  return chosen;
}

}  // namespace detail

inline ExtractionResult extract_quasi_independent(const FreqSet& A, Greedy,
                                                  std::size_t max_sums = std::size_t{1} << 24) {
  if (A.empty()) throw DomainError("extraction needs a nonempty set");
  std::vector<std::size_t> order(A.size());
  std::iota(order.begin(), order.end(), 0);
  ExtractionResult out{detail::greedy_quasi_independent(A, order, max_sums), A.size(), {}, false};
  if (!is_quasi_independent(out.subset).quasi_independent)
    throw std::logic_error("greedy extraction produced a dependent set");
  return out;
}

/// Keeps each element independently with probability delta/2 (element i uses
/// the stream (seed, i)), then runs the greedy extraction on the survivors.
inline ExtractionResult extract_quasi_independent(const FreqSet& A, RandomThinning thin,
                                                  std::uint64_t relation_cap = 10'000'000,
                                                  std::size_t max_sums = std::size_t{1} << 24) {
  if (A.empty()) throw DomainError("extraction needs a nonempty set");
  if (!(thin.delta > 0.0 && thin.delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < A.size(); ++i) {
    auto rng = make_rng(thin.seed, i);
    if (uniform01(rng) < thin.delta / 2.0) kept.push_back(i);
  }
  ExtractionResult out{detail::greedy_quasi_independent(A, kept, max_sums), kept.size(), {}, false};
  try {
    RelationOptions opt;
    opt.cap = relation_cap;
    out.retained_relations = relation_count(A.subset(kept), opt).count;
  } catch (const CapExceeded&) {
    out.relations_capped = true;
  } catch (const DomainError&) {
    out.relations_capped = true;  // too many survivors to enumerate
  }
  return out;
}

struct MeshOptions {
  std::size_t max_generators = 4;
  int max_s = 12;
  std::uint64_t budget = 50'000'000;
};

/// |L cap {sum k_i m_i : sum |m_i| <= 2^s}|, by breadth-first generation of
/// the reachable sums.
inline std::uint64_t mesh_count(const FreqSet& L, const std::vector<std::int64_t>& ks, int s,
                                const MeshOptions& opt = {}) {
  if (L.group().kind() != GroupKind::Integers) throw DomainError("mesh counts need a set in Z");
  if (s < 1) throw DomainError("mesh level s must be >= 1");
  if (ks.empty()) throw DomainError("mesh counts need at least one generator");
  if (ks.size() > opt.max_generators || s > opt.max_s)
    throw CapExceeded("mesh parameters exceed the configured budget", 0.0);
  const std::int64_t radius = std::int64_t{1} << s;
  std::unordered_set<std::int64_t> targets;
  for (const auto& e : L) targets.insert(e.scalar());
  if (targets.empty()) return 0;

  std::unordered_set<std::int64_t> seen{0};
  std::vector<std::int64_t> frontier{0};
  std::uint64_t work = 0;
  auto found = [&] {
    std::uint64_t c = 0;
    for (auto v : targets) c += seen.count(v);
    return c;
  };
  for (std::int64_t step = 0; step < radius && !frontier.empty(); ++step) {
    std::vector<std::int64_t> next;
    for (auto v : frontier)
      for (auto k : ks)
        for (auto w : {v + k, v - k}) {
          if (++work > opt.budget)
            throw CapExceeded("mesh enumeration exceeded its budget", static_cast<double>(found()));
          if (seen.insert(w).second) next.push_back(w);
        }
    frontier = std::move(next);
  }
  return found();
}

struct LacunaryDecomposition {
  std::vector<std::vector<std::int64_t>> parts;
  std::uint64_t block_bound = 0;  // sup_n |L cap (2^n, 2^{n+1}]|
};

/// Dyadic block index n with x in (2^n, 2^{n+1}]; 1 lies in block -1.
inline int dyadic_block(std::int64_t x) {
  return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(x - 1))) - 1;
}

/// First-fit partition of sorted L into parts with next/prev >= q.
inline LacunaryDecomposition lacunary_decompose(const FreqSet& L, double q) {
  if (L.group().kind() != GroupKind::Integers) throw DomainError("lacunary parts need a set in Z");
  if (!(q > 1.0)) throw DomainError("lacunarity ratio must exceed 1");
  auto values = L.scalars();
  for (auto v : values)
    if (v <= 0) throw DomainError("lacunary decomposition needs positive frequencies");
  std::sort(values.begin(), values.end());

  LacunaryDecomposition out;
  for (auto x : values) {
    bool placed = false;
    for (auto& part : out.parts)
      if (static_cast<long double>(x) >= static_cast<long double>(q) * part.back()) {
        part.push_back(x);
        placed = true;
        break;
      }
    if (!placed) out.parts.push_back({x});
  }
  for (const auto& part : out.parts)
    for (std::size_t i = 1; i < part.size(); ++i)
      if (static_cast<long double>(part[i]) < static_cast<long double>(q) * part[i - 1])
        throw std::logic_error("first-fit produced a non-lacunary part");

  std::map<int, std::uint64_t> blocks;
  for (auto x : values) out.block_bound = std::max(out.block_bound, ++blocks[dyadic_block(x)]);
  return out;
}

}  // namespace thinset
