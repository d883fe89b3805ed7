#pragma once

// Groups, characters, trigonometric polynomials and sampled functions.
//
// A finite probability space is modelled by SampledFunction: values on atoms
// with nonnegative weights summing to one. Grid samples of trigonometric
// polynomials and Monte Carlo draws share this representation, so every norm
// below acts on values only.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "thinset/error.hpp"

namespace thinset {

using cplx = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

inline bool is_prime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

inline std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

enum class GroupKind { Integers, Cyclic, PrimePower, TorusGrid };

/// An element of the dual group: one integer for Z, Z_M and the torus grid,
/// N residues mod p for Z(p)^N.
struct Element {
  std::vector<std::int64_t> coords;

  Element() = default;
  Element(std::initializer_list<std::int64_t> c) : coords(c) {}
  explicit Element(std::vector<std::int64_t> c) : coords(std::move(c)) {}

  std::int64_t scalar() const { return coords.at(0); }
  auto operator<=>(const Element&) const = default;
};

class GroupSpec {
 public:
  static GroupSpec integers() { return GroupSpec(GroupKind::Integers, 0, 1); }

  static GroupSpec cyclic(std::int64_t M) {
    if (M < 2) throw DomainError("cyclic group needs M >= 2");
    return GroupSpec(GroupKind::Cyclic, M, 1);
  }

  static GroupSpec prime_power(std::int64_t p, int N) {
    if (!is_prime(p)) throw DomainError("Z(p)^N needs p prime, got " + std::to_string(p));
    if (N < 1) throw DomainError("Z(p)^N needs N >= 1");
    return GroupSpec(GroupKind::PrimePower, p, N);
  }

  static GroupSpec torus_grid(std::int64_t M) {
    if (M < 2) throw DomainError("torus grid needs M >= 2");
    return GroupSpec(GroupKind::TorusGrid, M, 1);
  }

  /// Parses "integers", "cyclic:M", "prime:p:N" and "torus:M".
  static GroupSpec parse(const std::string& text) {
    auto fields = split(text);
    const std::string& head = fields.at(0);
    auto num = [&](std::size_t i) -> std::int64_t {
      if (i >= fields.size()) throw DomainError("group spec '" + text + "' is missing a field");
      try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(fields[i], &used);
        if (used != fields[i].size()) throw std::invalid_argument("trailing");
        return v;
      } catch (const std::exception&) {
        throw DomainError("group spec '" + text + "' has a non-integer field");
      }
    };
    if (head == "integers" || head == "Z") return integers();
    if (head == "cyclic") return cyclic(num(1));
    if (head == "torus") return torus_grid(num(1));
    if (head == "prime") return prime_power(num(1), static_cast<int>(num(2)));
    throw DomainError("unknown group spec '" + text + "'");
  }

  GroupKind kind() const { return kind_; }
  /// M for Cyclic/TorusGrid, p for PrimePower, 0 for Integers.
  std::int64_t modulus() const { return modulus_; }
  int dimension() const { return dimension_; }
  bool is_finite() const { return kind_ != GroupKind::Integers; }

  /// Number of atoms of the finite model (M, or p^N).
  std::int64_t order() const {
    switch (kind_) {
      case GroupKind::Integers:
        throw DomainError("Z has no finite model");
      case GroupKind::PrimePower: {
        std::int64_t n = 1;
        for (int i = 0; i < dimension_; ++i) {
          if (n > std::numeric_limits<std::int64_t>::max() / modulus_)
            throw DomainError("Z(p)^N too large to enumerate");
          n *= modulus_;
        }
        return n;
      }
      default:
        return modulus_;
    }
  }

  /// Canonical form: residues in [0, M-1] (or [0, p-1]) except on Z and the
  /// torus grid, whose frequencies stay signed integers.
  Element canonical(const Element& e) const {
    const std::size_t want = static_cast<std::size_t>(dimension_);
    if (e.coords.size() != want)
      throw DomainError("element has " + std::to_string(e.coords.size()) +
                        " coordinates, group " + describe() + " needs " + std::to_string(want));
    Element out = e;
    if (kind_ == GroupKind::Cyclic || kind_ == GroupKind::PrimePower)
      for (auto& c : out.coords) c = mod_floor(c, modulus_);
    return out;
  }

  bool is_zero(const Element& e) const {
    if (kind_ == GroupKind::TorusGrid) return mod_floor(e.scalar(), modulus_) == 0;
    return std::all_of(e.coords.begin(), e.coords.end(), [](auto c) { return c == 0; });
  }

  /// Key under which two elements coincide as group elements.
  Element identity_key(const Element& e) const {
    if (kind_ == GroupKind::TorusGrid) return Element{mod_floor(e.scalar(), modulus_)};
    return canonical(e);
  }

  std::string describe() const {
    switch (kind_) {
      case GroupKind::Integers:
        return "integers";
      case GroupKind::Cyclic:
        return "cyclic:" + std::to_string(modulus_);
      case GroupKind::TorusGrid:
        return "torus:" + std::to_string(modulus_);
      case GroupKind::PrimePower:
        return "prime:" + std::to_string(modulus_) + ":" + std::to_string(dimension_);
    }
    return "?";
  }

  bool operator==(const GroupSpec&) const = default;

 private:
  GroupSpec(GroupKind k, std::int64_t m, int n) : kind_(k), modulus_(m), dimension_(n) {}

  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out(1);
    for (char ch : s) {
      if (ch == ':')
        out.emplace_back();
      else
        out.back().push_back(ch);
    }
    return out;
  }

  GroupKind kind_;
  std::int64_t modulus_;
  int dimension_;
};

/// A finite set of nonzero, pairwise distinct dual-group elements, kept in
/// caller order.
class FreqSet {
 public:
  explicit FreqSet(GroupSpec group) : group_(group) {}

  FreqSet(GroupSpec group, const std::vector<Element>& elements) : group_(group) {
    for (const auto& e : elements) push_back(e);
  }

  static FreqSet of_integers(GroupSpec group, const std::vector<std::int64_t>& values) {
    FreqSet out(group);
    for (auto v : values) out.push_back(Element{v});
    return out;
  }

  void push_back(const Element& raw) {
    Element e = group_.canonical(raw);
    if (group_.is_zero(e)) throw DomainError("frequency sets may not contain the zero element");
    if (!keys_.insert(group_.identity_key(e)).second)
      throw DomainError("frequency set contains a duplicate element");
    elements_.push_back(std::move(e));
  }

  const GroupSpec& group() const { return group_; }
  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }
  const Element& operator[](std::size_t i) const { return elements_[i]; }
  const std::vector<Element>& elements() const { return elements_; }
  auto begin() const { return elements_.begin(); }
  auto end() const { return elements_.end(); }

  bool contains(const Element& e) const {
    return keys_.count(group_.identity_key(group_.canonical(e))) > 0;
  }

  /// Scalar values; valid for one-dimensional groups.
  std::vector<std::int64_t> scalars() const {
    if (group_.dimension() != 1) throw DomainError("scalars() needs a one-dimensional group");
    std::vector<std::int64_t> out;
    out.reserve(size());
    for (const auto& e : elements_) out.push_back(e.scalar());
    return out;
  }

  FreqSet subset(const std::vector<std::size_t>& indices) const {
    FreqSet out(group_);
    for (auto i : indices) out.push_back(elements_.at(i));
    return out;
  }

 private:
  GroupSpec group_;
  std::vector<Element> elements_;
  std::set<Element> keys_;
};

/// Finitely supported trigonometric polynomial on the torus grid (signed
/// integer frequencies) or on Z_M (residue frequencies).
class TrigPoly {
 public:
  explicit TrigPoly(GroupSpec group) : group_(group) {
    if (group.kind() != GroupKind::TorusGrid && group.kind() != GroupKind::Cyclic)
      throw DomainError("trigonometric polynomials live on the torus grid or Z_M");
  }

  TrigPoly(GroupSpec group, const std::map<std::int64_t, cplx>& coeffs) : TrigPoly(group) {
    for (const auto& [k, c] : coeffs) add(k, c);
  }

  void add(std::int64_t freq, cplx c) {
    if (group_.kind() == GroupKind::Cyclic) freq = mod_floor(freq, group_.modulus());
    coeffs_[freq] += c;
  }

  cplx coefficient(std::int64_t freq) const {
    if (group_.kind() == GroupKind::Cyclic) freq = mod_floor(freq, group_.modulus());
    auto it = coeffs_.find(freq);
    return it == coeffs_.end() ? cplx{} : it->second;
  }

  const GroupSpec& group() const { return group_; }
  const std::map<std::int64_t, cplx>& coefficients() const { return coeffs_; }

  std::int64_t max_abs_frequency() const {
    std::int64_t m = 0;
    for (const auto& [k, c] : coeffs_) m = std::max(m, k < 0 ? -k : k);
    return m;
  }

 private:
  GroupSpec group_;
  std::map<std::int64_t, cplx> coeffs_;
};

/// Complex values on weighted atoms of a finite probability space.
class SampledFunction {
 public:
  SampledFunction(std::vector<cplx> values, std::vector<double> weights)
      : values_(std::move(values)), weights_(std::move(weights)) {
    if (values_.empty()) throw DomainError("a sampled function needs at least one atom");
    if (values_.size() != weights_.size()) throw DomainError("values and weights differ in length");
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw DomainError("atom weights must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("atom weights must sum to 1");
  }

  static SampledFunction uniform(std::vector<cplx> values) {
    const std::size_t n = values.size();
    if (n == 0) throw DomainError("a sampled function needs at least one atom");
    return SampledFunction(std::move(values), std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static SampledFunction uniform_real(const std::vector<double>& values) {
    return uniform(std::vector<cplx>(values.begin(), values.end()));
  }

  std::size_t size() const { return values_.size(); }
  const std::vector<cplx>& values() const { return values_; }
  const std::vector<double>& weights() const { return weights_; }
  cplx value(std::size_t i) const { return values_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  cplx mean() const {
    cplx m{};
    for (std::size_t i = 0; i < size(); ++i) m += weights_[i] * values_[i];
    return m;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_real(double tol = 0.0) const {
    return std::all_of(values_.begin(), values_.end(),
                       [tol](const cplx& v) { return std::abs(v.imag()) <= tol; });
  }

  SampledFunction with_values(std::vector<cplx> values) const {
    return SampledFunction(std::move(values), weights_);
  }

  template <class F>
  SampledFunction map(F&& fn) const {
    std::vector<cplx> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), fn);
    return with_values(std::move(out));
  }

  SampledFunction real_part() const {
    return map([](const cplx& v) { return cplx(v.real(), 0.0); });
  }

  SampledFunction imag_part() const {
    return map([](const cplx& v) { return cplx(v.imag(), 0.0); });
  }

 private:
  std::vector<cplx> values_;
  std::vector<double> weights_;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Unnormalized DFT with the given FFTW sign. Planning is serialized because
// the FFTW planner is not reentrant; execution on private arrays is.
inline std::vector<cplx> fftw_transform(std::vector<cplx> data, int sign) {
  const int n = static_cast<int>(data.size());
  if (n == 0) return data;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  return data;
}

}  // namespace detail

/// f_j = sum_m a_m e^{2 pi i m j / M}.
inline std::vector<cplx> inverse_dft(std::vector<cplx> spectrum) {
  return detail::fftw_transform(std::move(spectrum), FFTW_BACKWARD);
}

/// c_k = (1/M) sum_j f_j e^{-2 pi i k j / M}; index k holds frequency k mod M.
inline std::vector<cplx> forward_dft(std::vector<cplx> samples) {
  const double scale = 1.0 / static_cast<double>(samples.size());
  auto out = detail::fftw_transform(std::move(samples), FFTW_FORWARD);
  for (auto& c : out) c *= scale;
  return out;
}

/// Fourier coefficient of grid samples at an integer frequency.
inline cplx grid_coefficient(const std::vector<cplx>& spectrum, std::int64_t freq) {
  const auto M = static_cast<std::int64_t>(spectrum.size());
  return spectrum[static_cast<std::size_t>(mod_floor(freq, M))];
}

/// Samples poly on the uniform grid of size M by FFT.
///
/// Torus-grid polynomials need M >= 2 max|k| + 1. For Z_{M0} the grid size
/// must be a multiple of M0; atom j then represents the group element j mod M0.
inline SampledFunction synth_eval(const TrigPoly& poly, std::int64_t M) {
  if (M < 1) throw DomainError("grid size must be positive");
  const GroupSpec& g = poly.group();
  std::int64_t base = M;
  if (g.kind() == GroupKind::TorusGrid) {
    const std::int64_t kmax = poly.max_abs_frequency();
    if (M < 2 * kmax + 1)
      throw AliasError("grid of size " + std::to_string(M) + " aliases frequency " +
                       std::to_string(kmax));
  } else {
    if (M % g.modulus() != 0)
      throw AliasError("grid size " + std::to_string(M) + " is not a multiple of " +
                       std::to_string(g.modulus()));
    base = g.modulus();
  }
  std::vector<cplx> spec(static_cast<std::size_t>(base));
  for (const auto& [k, c] : poly.coefficients())
    spec[static_cast<std::size_t>(mod_floor(k, base))] += c;
  auto cycle = inverse_dft(std::move(spec));
  std::vector<cplx> values(static_cast<std::size_t>(M));
  for (std::size_t j = 0; j < values.size(); ++j) values[j] = cycle[j % cycle.size()];
  return SampledFunction::uniform(std::move(values));
}

/// (sum_j w_j |f_j|^p)^{1/p}, or max |f_j| when p is infinite.
inline double lp_norm(const SampledFunction& f, double p) {
  if (std::isnan(p) || p < 1.0) throw DomainError("L_p norms need p >= 1");
  const double top = f.max_abs();
  if (std::isinf(p) || top == 0.0) return top;
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = std::abs(f.value(i)) / top;
    if (r > 0.0) acc += f.weight(i) * std::pow(r, p);
  }
  return top * std::pow(acc, 1.0 / p);
}

/// Atoms of a finite group in mixed-radix order (coordinate 0 fastest).
inline std::vector<Element> group_atoms(const GroupSpec& g) {
  const std::int64_t n = g.order();
  std::vector<Element> atoms;
  atoms.reserve(static_cast<std::size_t>(n));
  for (std::int64_t idx = 0; idx < n; ++idx) {
    Element e;
    e.coords.resize(static_cast<std::size_t>(g.dimension()));
    std::int64_t rest = idx;
    for (auto& c : e.coords) {
      c = rest % g.modulus();
      rest /= g.modulus();
    }
    atoms.push_back(std::move(e));
  }
  return atoms;
}

/// Values of the character indexed by freq on every atom of a finite group.
inline std::vector<cplx> character_samples(const GroupSpec& g, const Element& freq) {
  const Element k = g.canonical(freq);
  const auto atoms = group_atoms(g);
  const double q = static_cast<double>(g.modulus());
  std::vector<cplx> out;
  out.reserve(atoms.size());
  for (const auto& t : atoms) {
    // Reduce the phase exactly before converting to floating point.
    std::int64_t phase = 0;
    for (std::size_t i = 0; i < t.coords.size(); ++i)
      phase = mod_floor(phase + mod_floor(t.coords[i] * mod_floor(k.coords[i], g.modulus()),
                                          g.modulus()),
                        g.modulus());
    out.push_back(std::polar(1.0, kTwoPi * static_cast<double>(phase) / q));
  }
  return out;
}

/// The character system {gamma_k : k in set} sampled on the finite group.
inline std::vector<SampledFunction> character_system(const FreqSet& set) {
  std::vector<SampledFunction> out;
  for (const auto& k : set) out.push_back(SampledFunction::uniform(character_samples(set.group(), k)));
  return out;
}

/// Characters e^{ikt} of integer frequencies on the uniform grid of size M.
inline std::vector<SampledFunction> torus_characters(const std::vector<std::int64_t>& freqs,
                                                     std::int64_t M) {
  std::vector<SampledFunction> out;
  for (auto k : freqs) {
    TrigPoly p(GroupSpec::torus_grid(M));
    p.add(k, 1.0);
    out.push_back(synth_eval(p, M));
  }
  return out;
}

}  // namespace thinset
