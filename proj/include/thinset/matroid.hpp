#pragma once

// Linear algebra over GF(p) and partition of vector sets into k linearly
// independent parts by matroid-partition augmenting paths.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "thinset/error.hpp"
#include "thinset/relations.hpp"
#include "thinset/spectrum.hpp"

namespace thinset {

using GFVector = std::vector<std::int64_t>;
using IndexSet = std::vector<std::size_t>;

/// Ordered list of nonzero vectors in GF(p)^N. Duplicates are allowed.
class GFVectorSet {
 public:
  GFVectorSet(std::int64_t p, int N, std::vector<GFVector> vectors = {})
      : p_(p), n_(N) {
    if (!is_prime(p)) throw DomainError("p must be prime");
    if (N < 1) throw DomainError("dimension must be >= 1");
    for (auto& v : vectors) push_back(std::move(v));
  }

  void push_back(GFVector v) {
    if (static_cast<int>(v.size()) != n_) throw DomainError("vector has wrong dimension");
    bool zero = true;
    for (auto x : v) {
      if (x < 0 || x >= p_) throw DomainError("entries must lie in [0, p-1]");
      zero = zero && x == 0;
    }
    if (zero) throw DomainError("zero vector not allowed");
    vectors_.push_back(std::move(v));
  }

  std::int64_t p() const { return p_; }
  int dimension() const { return n_; }
  std::size_t size() const { return vectors_.size(); }
  const GFVector& operator[](std::size_t i) const { return vectors_[i]; }
  const std::vector<GFVector>& vectors() const { return vectors_; }

 private:
  std::int64_t p_;
  int n_;
  std::vector<GFVector> vectors_;
};

namespace detail {

inline std::int64_t mod_pow(std::int64_t b, std::int64_t e, std::int64_t m) {
  std::int64_t r = 1 % m;
  b %= m;
  while (e > 0) {
    if (e & 1) r = static_cast<std::int64_t>(static_cast<__int128>(r) * b % m);
    b = static_cast<std::int64_t>(static_cast<__int128>(b) * b % m);
    e >>= 1;
  }
  return r;
}

inline std::int64_t mod_inverse(std::int64_t a, std::int64_t p) { return mod_pow(a, p - 2, p); }

inline void check_indices(const GFVectorSet& V, const IndexSet& subset) {
  for (auto i : subset)
    if (i >= V.size()) throw DomainError("vector index out of range");
}

}  // namespace detail

/// Rank over GF(p) of the vectors indexed by subset (Gaussian elimination).
inline std::size_t gf_rank(const GFVectorSet& V, const IndexSet& subset) {
  detail::check_indices(V, subset);
  const std::int64_t p = V.p();
  std::vector<GFVector> rows;
  rows.reserve(subset.size());
  for (auto i : subset) rows.push_back(V[i]);
  std::size_t rank = 0;
  for (int col = 0; col < V.dimension() && rank < rows.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][col] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    const std::int64_t inv = detail::mod_inverse(rows[rank][col], p);
    for (auto& x : rows[rank]) x = x * inv % p;
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      const std::int64_t f = rows[r][col];
      if (f == 0) continue;
      for (int c = col; c < V.dimension(); ++c)
        rows[r][c] = mod_floor(rows[r][c] - f * rows[rank][c], p);
    }
    ++rank;
  }
  return rank;
}

inline std::size_t gf_rank(const GFVectorSet& V) {
  IndexSet all(V.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return gf_rank(V, all);
}

inline bool gf_independent(const GFVectorSet& V, const IndexSet& subset) {
  return gf_rank(V, subset) == subset.size();
}

struct Partition {
  std::vector<IndexSet> parts;
};

/// A subset with rank < |subset|/k, so no partition into k independent parts exists.
struct FailureWitness {
  IndexSet subset;
  std::size_t rank = 0;
};

using HornRadoResult = std::variant<Partition, FailureWitness>;

/// Checks disjointness, covering and independence of every part.
inline bool verify_partition(const GFVectorSet& V, const Partition& P, std::size_t k) {
  if (P.parts.size() > k) return false;
  std::vector<int> seen(V.size(), 0);
  for (const auto& part : P.parts) {
    for (auto i : part) {
      if (i >= V.size() || seen[i]++) return false;
    }
    if (!gf_independent(V, part)) return false;
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

inline bool verify_witness(const GFVectorSet& V, const FailureWitness& W, std::size_t k) {
  return !W.subset.empty() && gf_rank(V, W.subset) == W.rank &&
         W.rank * k < W.subset.size();
}

/// Partition into at most k independent parts, inserting vectors one at a time
/// along shortest exchange paths. When an insertion fails, the elements
/// reached by the search span themselves inside every part, which gives
/// k*rank(S) = |S| - 1; that set is returned as the witness.
inline HornRadoResult horn_rado_partition(const GFVectorSet& V, std::size_t k) {
  if (k < 1) throw DomainError("k must be >= 1");
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::set<std::size_t>> parts(k);
  std::vector<std::size_t> owner(V.size(), kNone);

  auto with = [](const std::set<std::size_t>& part, std::size_t add, std::size_t drop) {
    IndexSet out;
    for (auto i : part)
      if (i != drop) out.push_back(i);
    out.push_back(add);
    return out;
  };

  for (std::size_t y = 0; y < V.size(); ++y) {
    // parent[u] = (element that displaces u, part it enters)
    std::vector<std::pair<std::size_t, std::size_t>> parent(V.size(), {kNone, kNone});
    std::vector<char> reached(V.size(), 0);
    std::deque<std::size_t> queue{y};
    reached[y] = 1;
    std::size_t sink = kNone, sink_part = kNone;
    while (!queue.empty() && sink == kNone) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t j = 0; j < k && sink == kNone; ++j) {
        if (owner[u] == j) continue;
        if (gf_independent(V, with(parts[j], u, kNone))) {
          sink = u;
          sink_part = j;
          break;
        }
        for (auto z : parts[j]) {
          if (reached[z]) continue;
          if (gf_independent(V, with(parts[j], u, z))) {
            reached[z] = 1;
            parent[z] = {u, j};
            queue.push_back(z);
          }
        }
      }
    }
    if (sink == kNone) {
      FailureWitness w;
      for (std::size_t i = 0; i < V.size(); ++i)
        if (reached[i]) w.subset.push_back(i);
      w.rank = gf_rank(V, w.subset);
      if (!verify_witness(V, w, k))
        throw CertificateFailure("exchange search produced an invalid failure witness");
      return w;
    }
    // Walk back: sink enters sink_part; each displaced element enters the part
    // its predecessor left.
    std::size_t u = sink, target = sink_part;
    while (true) {
      const std::size_t from = owner[u];
      if (from != kNone) parts[from].erase(u);
      parts[target].insert(u);
      owner[u] = target;
      if (u == y) break;
      // u was displaced from part parent[u].second by parent[u].first.
      const auto [prev, part] = parent[u];
      u = prev;
      target = part;
    }
  }

  Partition out;
  for (auto& part : parts)
    if (!part.empty()) out.parts.emplace_back(part.begin(), part.end());
  if (!verify_partition(V, out, k))
    throw CertificateFailure("augmenting paths produced an invalid partition");
  return out;
}

struct IndependenceComparison {
  bool independent = false;
  bool quasi_independent = false;
};

/// Linear independence over GF(p) against quasi-independence in Z(p)^N.
/// Repeated vectors give the relation x - x = 0.
inline IndependenceComparison independence_vs_quasi(const GFVectorSet& V,
                                                    std::uint64_t cap = 100'000'000) {
  if (V.size() > 24) throw DomainError("quasi-independence check supports at most 24 vectors");
  IndependenceComparison out;
  out.independent = gf_rank(V) == V.size();
  std::set<GFVector> distinct(V.vectors().begin(), V.vectors().end());
  if (distinct.size() < V.size()) {
    out.quasi_independent = false;
  } else {
    FreqSet A(GroupSpec::prime_power(V.p(), V.dimension()));
    for (const auto& v : V.vectors()) A.push_back(Element{v});
    out.quasi_independent = is_quasi_independent(A, cap).quasi_independent;
  }
  if (out.independent && !out.quasi_independent)
    throw CertificateFailure("independent set found not quasi-independent");
  return out;
}

}  // namespace thinset
