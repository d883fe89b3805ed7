#pragma once

// Constant-weight code packings N(k, m, n): families of m-subsets of [n] with
// pairwise intersections of size <= k, and their use for extracting
// quasi-independent subsets.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "thinset/error.hpp"
#include "thinset/random.hpp"
#include "thinset/relations.hpp"
#include "thinset/spectrum.hpp"

namespace thinset {

/// An m-subset of [n] = {0, ..., n-1} as a bit mask.
using Word = std::uint64_t;

struct CodeFamily {
  int n = 0;
  int m = 0;
  int k = 0;
  std::vector<Word> words;
  bool maximal = false;  // no admissible word can be added
};

inline std::vector<int> word_members(Word w) {
  std::vector<int> out;
  for (int i = 0; w; ++i, w >>= 1)
    if (w & 1u) out.push_back(i);
  return out;
}

inline Word word_from(const std::vector<int>& members) {
  Word w = 0;
  for (int i : members) {
    if (i < 0 || i >= 64) throw DomainError("word members must lie in [0, 64)");
    w |= Word{1} << i;
  }
  return w;
}

/// Every word has weight m inside [n] and distinct words meet in <= k points.
inline bool verify_family(const CodeFamily& f) {
  const Word universe = f.n >= 64 ? ~Word{0} : (Word{1} << f.n) - 1;
  std::set<Word> seen;
  for (Word w : f.words) {
    if (std::popcount(w) != f.m || (w & ~universe) || !seen.insert(w).second) return false;
  }
  for (std::size_t i = 0; i < f.words.size(); ++i)
    for (std::size_t j = i + 1; j < f.words.size(); ++j)
      if (std::popcount(f.words[i] & f.words[j]) > f.k) return false;
  return true;
}

/// Exact binomial coefficient; throws when it does not fit in 64 bits.
inline std::uint64_t choose(int n, int r) {
  if (r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  unsigned __int128 c = 1;
  for (int i = 1; i <= r; ++i) {
    c = c * static_cast<unsigned>(n - r + i) / static_cast<unsigned>(i);
    if (c > std::numeric_limits<std::uint64_t>::max()) throw DomainError("binomial overflow");
  }
  return static_cast<std::uint64_t>(c);
}

/// C(n,m) / sum_{k<j<=m} C(m,j) C(n-m,m-j): every maximal family is at
/// least this large, since each word blocks at most the denominator.
inline double counting_bound(int n, int m, int k) {
  double blocked = 0.0;
  for (int j = k + 1; j <= m; ++j)
    blocked += static_cast<double>(choose(m, j)) * static_cast<double>(choose(n - m, m - j));
  return static_cast<double>(choose(n, m)) / blocked;
}

namespace detail {

inline void check_code_params(int n, int m, int k) {
  if (!(0 <= k && k < m && m < n)) throw DomainError("need 0 <= k < m < n");
  if (n > 63) throw DomainError("words are limited to n <= 63");
}

// Next mask with the same popcount in increasing order (Gosper).
inline Word next_same_weight(Word x) {
  const Word c = x & (~x + 1);
  const Word r = x + c;
  return (((r ^ x) >> 2) / c) | r;
}

inline bool admissible(const std::vector<Word>& family, Word w, int k) {
  for (Word s : family)
    if (std::popcount(s & w) > k) return false;
  return true;
}

inline std::vector<Word> all_words(int n, int m) {
  std::vector<Word> out;
  out.reserve(static_cast<std::size_t>(choose(n, m)));
  const Word end = Word{1} << n;
  for (Word w = (Word{1} << m) - 1; w < end; w = next_same_weight(w)) out.push_back(w);
  return out;
}

}  // namespace detail

/// The budget ran out; `family` is valid but not certified maximal.
class PartialFamily : public CapExceeded {
 public:
  PartialFamily(const std::string& what, CodeFamily family)
      : CapExceeded(what, static_cast<double>(family.words.size())), family_(std::move(family)) {}
  const CodeFamily& family() const noexcept { return family_; }

 private:
  CodeFamily family_;
};

/// Candidates in increasing mask order, i.e. colexicographic on subsets.
struct LexOrder {};
/// Candidates shuffled by seed when C(n,m) fits the budget; otherwise random
/// words are drawn until `attempts` consecutive rejections.
struct RandomOrder {
  std::uint64_t seed = 0;
  std::uint64_t attempts = 100'000;
};

inline constexpr std::uint64_t kCodeBudget = 5'000'000;

/// Greedy maximal packing: admit each candidate compatible with all earlier ones.
inline CodeFamily gv_greedy(int n, int m, int k, LexOrder, std::uint64_t budget = kCodeBudget) {
  detail::check_code_params(n, m, k);
  CodeFamily f{n, m, k, {}, false};
  const Word end = Word{1} << n;
  std::uint64_t seen = 0;
  for (Word w = (Word{1} << m) - 1; w < end; w = detail::next_same_weight(w)) {
    if (++seen > budget)
      throw PartialFamily("candidate budget of " + std::to_string(budget) + " words exhausted", std::move(f));
    if (detail::admissible(f.words, w, k)) f.words.push_back(w);
  }
  f.maximal = true;
  return f;
}

inline CodeFamily gv_greedy(int n, int m, int k, RandomOrder order, std::uint64_t budget = kCodeBudget) {
  detail::check_code_params(n, m, k);
  CodeFamily f{n, m, k, {}, false};
  auto rng = make_rng(order.seed, 0);
  if (choose(n, m) <= budget) {
    auto cand = detail::all_words(n, m);
    for (std::size_t i = cand.size(); i > 1; --i) std::swap(cand[i - 1], cand[rng() % i]);
    for (Word w : cand)
      if (detail::admissible(f.words, w, k)) f.words.push_back(w);
    f.maximal = true;
    return f;
  }
  // Floyd's sampling of an m-subset.
  auto draw = [&] {
    Word w = 0;
    for (int j = n - m; j < n; ++j) {
      const int t = static_cast<int>(rng() % static_cast<std::uint64_t>(j + 1));
      w |= (w >> t & 1u) ? Word{1} << j : Word{1} << t;
    }
    return w;
  };
  for (std::uint64_t misses = 0; misses < order.attempts;) {
    const Word w = draw();
    if (detail::admissible(f.words, w, k)) {
      f.words.push_back(w);
      misses = 0;
    } else {
      ++misses;
    }
  }
  return f;
}

inline constexpr std::uint64_t kExactWordLimit = 5000;

struct ExactOptions {
  std::uint64_t max_nodes = 200'000'000;
};

/// N(k, m, n) by branch and bound maximum clique on the compatibility graph
/// of m-subsets. The symmetric group acts transitively on words, so the
/// search fixes the first word and looks for a maximum clique among its
/// neighbours; greedy colouring gives the pruning bound.
inline std::uint64_t exact_N(int n, int m, int k, const ExactOptions& opt = {}) {
  detail::check_code_params(n, m, k);
  if (choose(n, m) > kExactWordLimit)
    throw CapExceeded("exact search needs C(n,m) <= " + std::to_string(kExactWordLimit),
                      static_cast<double>(gv_greedy(n, m, k, LexOrder{}).words.size()));
  const auto words = detail::all_words(n, m);
  const Word first = words.front();
  std::vector<Word> nb;
  for (std::size_t i = 1; i < words.size(); ++i)
    if (std::popcount(words[i] & first) <= k) nb.push_back(words[i]);
  const std::size_t V = nb.size();
  // Relabel by decreasing degree so the colouring sees dense vertices first.
  {
    std::vector<std::size_t> deg(V, 0);
    for (std::size_t i = 0; i < V; ++i)
      for (std::size_t j = i + 1; j < V; ++j)
        if (std::popcount(nb[i] & nb[j]) <= k) ++deg[i], ++deg[j];
    std::vector<std::size_t> perm(V);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](auto a, auto b) { return deg[a] > deg[b]; });
    std::vector<Word> sorted(V);
    for (std::size_t i = 0; i < V; ++i) sorted[i] = nb[perm[i]];
    nb.swap(sorted);
  }
  const std::size_t blocks = (V + 63) / 64;
  using Bits = std::vector<std::uint64_t>;
  std::vector<Bits> adj(V, Bits(blocks, 0));
  for (std::size_t i = 0; i < V; ++i)
    for (std::size_t j = i + 1; j < V; ++j)
      if (std::popcount(nb[i] & nb[j]) <= k) {
        adj[i][j / 64] |= std::uint64_t{1} << (j % 64);
        adj[j][i / 64] |= std::uint64_t{1} << (i % 64);
      }

  std::uint64_t best = gv_greedy(n, m, k, LexOrder{}).words.size();
  std::uint64_t nodes = 0;
  auto expand = [&](auto&& self, std::uint64_t size, Bits P) -> void {
    if (++nodes > opt.max_nodes)
      throw CapExceeded("clique search exceeded " + std::to_string(opt.max_nodes) + " nodes",
                        static_cast<double>(best));
    // Greedy colouring of P: colour classes are independent sets, so a clique
    // uses at most one vertex per class.
    std::vector<std::size_t> order;
    std::vector<std::uint64_t> colour;
    Bits uncoloured = P;
    std::uint64_t c = 0;
    auto any = [](const Bits& b) {
      return std::any_of(b.begin(), b.end(), [](std::uint64_t x) { return x != 0; });
    };
    while (any(uncoloured)) {
      ++c;
      Bits avail = uncoloured;
      for (std::size_t blk = 0; blk < blocks; ++blk)
        while (avail[blk]) {
          const std::size_t v = blk * 64 + static_cast<std::size_t>(std::countr_zero(avail[blk]));
          avail[blk] &= avail[blk] - 1;
          order.push_back(v);
          colour.push_back(c);
          uncoloured[v / 64] &= ~(std::uint64_t{1} << (v % 64));
          for (std::size_t b = 0; b < blocks; ++b) avail[b] &= ~adj[v][b];
        }
    }
    for (std::size_t i = order.size(); i-- > 0;) {
      if (size + colour[i] <= best) return;
      const std::size_t v = order[i];
      Bits next(blocks);
      bool empty = true;
      for (std::size_t b = 0; b < blocks; ++b) {
        next[b] = P[b] & adj[v][b];
        empty = empty && next[b] == 0;
      }
      if (empty) {
        best = std::max(best, size + 1);
      } else {
        self(self, size + 1, std::move(next));
      }
      P[v / 64] &= ~(std::uint64_t{1} << (v % 64));
    }
  };
  Bits all(blocks, 0);
  for (std::size_t v = 0; v < V; ++v) all[v / 64] |= std::uint64_t{1} << (v % 64);
  if (V == 0) return std::max<std::uint64_t>(best, 1);
  expand(expand, 1, all);
  return best;
}

struct CodeExtraction {
  std::optional<FreqSet> subset;                    // B = t \ r_t when found
  std::optional<std::size_t> word;                  // index of t in the family
  std::vector<std::vector<std::size_t>> supports;  // r_t for the words examined
  std::uint64_t relation_count = 0;                 // |R(A)|, when every |r_t| > k
  bool injection_holds = false;                     // |family| <= |R(A)| - 1
};

/// For each word t (indices into A) grow r_t by adding the support of a
/// relation found inside t \ r_t until none is left. The found relations
/// have disjoint supports, so r_t supports their sum, and t \ r_t is
/// quasi-independent. Returns the first B = t \ r_t with |r_t| <= k;
/// otherwise reports |R(A)| and checks that t -> r_t is injective.
inline CodeExtraction extract_via_codes(const FreqSet& A, const CodeFamily& family) {
  if (static_cast<std::size_t>(family.n) != A.size()) throw DomainError("family ground set must match |A|");
  if (family.m > 20) throw DomainError("word weight above 20 is not supported");
  if (!verify_family(family)) throw DomainError("invalid code family");
  CodeExtraction out;
  for (std::size_t wi = 0; wi < family.words.size(); ++wi) {
    const auto members = word_members(family.words[wi]);
    std::vector<char> covered(A.size(), 0);
    for (;;) {
      std::vector<std::size_t> rest;
      for (int i : members)
        if (!covered[i]) rest.push_back(static_cast<std::size_t>(i));
      if (rest.empty()) break;
      auto q = is_quasi_independent(A.subset(rest));
      if (q.quasi_independent) break;
      for (auto s : q.witness->support()) covered[rest[s]] = 1;
    }
    std::vector<std::size_t> r, b;
    for (int i : members) (covered[i] ? r : b).push_back(static_cast<std::size_t>(i));
    out.supports.push_back(r);
    if (static_cast<int>(r.size()) <= family.k) {
      FreqSet B = A.subset(b);
      if (!is_quasi_independent(B).quasi_independent || static_cast<int>(B.size()) < family.m - family.k)
        throw CertificateFailure("extracted subset failed verification");
      out.subset = std::move(B);
      out.word = wi;
      return out;
    }
  }
  out.relation_count = relation_count(A).count;
  std::set<std::vector<std::size_t>> distinct(out.supports.begin(), out.supports.end());
  out.injection_holds = distinct.size() == out.supports.size() &&
                        family.words.size() + 1 <= out.relation_count;
  if (!out.injection_holds) throw CertificateFailure("supports r_t are not injective");
  return out;
}

}  // namespace thinset
