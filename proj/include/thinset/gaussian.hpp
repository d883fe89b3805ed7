#pragma once

// Hermite expansions in the Gaussian space, the Mehler kernel, the operators
// T_delta and Theta_z, a certified tensor decomposition of sum z_n g_n (x) g_n,
// and Monte Carlo checks of Gaussian Lipschitz concentration.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thinset/error.hpp"
#include "thinset/parallel.hpp"
#include "thinset/quadrature.hpp"
#include "thinset/random.hpp"
#include "thinset/subgauss.hpp"

namespace thinset {

/// Probabilists' Hermite polynomial: h_0 = 1, h_1 = x, h_{n+1} = x h_n - n h_{n-1}.
inline double hermite_eval(int n, double x) {
  if (n < 0) throw DomainError("Hermite degree must be >= 0");
  double prev = 0.0, cur = 1.0;
  for (int k = 0; k < n; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// h_0(x), ..., h_D(x).
inline std::vector<double> hermite_table(int D, double x) {
  std::vector<double> h(static_cast<std::size_t>(D) + 1, 1.0);
  if (D >= 1) h[1] = x;
  for (int k = 1; k < D; ++k) h[k + 1] = x * h[k] - k * h[k - 1];
  return h;
}

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& a) {
  int d = 0;
  for (int x : a) d += x;
  return d;
}

/// alpha! = prod alpha_i!, the squared norm of h_alpha.
inline double multi_factorial(const MultiIndex& a) {
  double f = 1.0;
  for (int x : a) f *= factorial(x);
  return f;
}

inline constexpr std::size_t kMaxExpansionTerms = 200'000;

/// All multi-indices in N variables with |alpha| <= D, graded, and
/// lexicographically decreasing within each degree.
inline std::vector<MultiIndex> graded_indices(int N, int D) {
  if (N < 1 || D < 0) throw DomainError("need N >= 1 and D >= 0");
  std::vector<MultiIndex> out;
  MultiIndex cur(static_cast<std::size_t>(N), 0);
  auto fill = [&](auto&& self, int pos, int left) -> void {
    if (pos == N - 1) {
      cur[pos] = left;
      out.push_back(cur);
      if (out.size() > kMaxExpansionTerms) throw DomainError("Hermite basis too large");
      return;
    }
    for (int v = left; v >= 0; --v) {
      cur[pos] = v;
      self(self, pos + 1, left - v);
    }
  };
  for (int d = 0; d <= D; ++d) fill(fill, 0, d);
  return out;
}

/// Finite expansion sum_alpha c_alpha h_alpha(x) with h_alpha = prod h_{alpha_i}(x_i),
/// stored densely in graded order.
class HermiteExpansion {
 public:
  HermiteExpansion(int N, int D) : layout_(std::make_shared<Layout>(N, D)), coeffs_(layout_->indices.size(), 0.0) {}

  static HermiteExpansion basis(int N, int D, const MultiIndex& alpha) {
    HermiteExpansion f(N, D);
    f.set(alpha, 1.0);
    return f;
  }

  int variables() const { return layout_->N; }
  int max_degree() const { return layout_->D; }
  std::size_t size() const { return coeffs_.size(); }
  const std::vector<MultiIndex>& indices() const { return layout_->indices; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  std::vector<double>& coefficients() { return coeffs_; }

  std::size_t index_of(const MultiIndex& alpha) const {
    auto it = layout_->position.find(alpha);
    if (it == layout_->position.end()) throw DomainError("multi-index outside the expansion");
    return it->second;
  }
  double coefficient(const MultiIndex& alpha) const { return coeffs_[index_of(alpha)]; }
  void set(const MultiIndex& alpha, double c) { coeffs_[index_of(alpha)] = c; }

  double evaluate(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != variables()) throw DomainError("point has the wrong dimension");
    std::vector<std::vector<double>> h;
    for (double xi : x) h.push_back(hermite_table(max_degree(), xi));
    double s = 0.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      if (coeffs_[k] == 0.0) continue;
      double term = coeffs_[k];
      const auto& a = layout_->indices[k];
      for (std::size_t i = 0; i < a.size(); ++i) term *= h[i][a[i]];
      s += term;
    }
    return s;
  }

 private:
  struct Layout {
    Layout(int n, int d) : N(n), D(d), indices(graded_indices(n, d)) {
      for (std::size_t k = 0; k < indices.size(); ++k) position.emplace(indices[k], k);
    }
    int N, D;
    std::vector<MultiIndex> indices;
    std::map<MultiIndex, std::size_t> position;
  };
  std::shared_ptr<const Layout> layout_;
  std::vector<double> coeffs_;
};

/// Ornstein-Uhlenbeck operator T_delta = sum_d delta^d P_d.
struct TDelta {
  double delta = 1.0;
};
/// Theta_z = tensor product of one-variable T_{z_i}.
struct Theta {
  std::vector<double> z;
};

inline HermiteExpansion apply_operator(const HermiteExpansion& F, const TDelta& op) {
  if (!(std::abs(op.delta) <= 1.0)) throw DomainError("T_delta needs |delta| <= 1");
  HermiteExpansion out(F);
  for (std::size_t k = 0; k < out.size(); ++k)
    out.coefficients()[k] *= std::pow(op.delta, total_degree(F.indices()[k]));
  return out;
}

inline HermiteExpansion apply_operator(const HermiteExpansion& F, const Theta& op) {
  if (static_cast<int>(op.z.size()) != F.variables()) throw DomainError("Theta_z needs one z per variable");
  for (double zi : op.z)
    if (!(std::abs(zi) <= 1.0)) throw DomainError("Theta_z needs z in [-1, 1]^N");
  HermiteExpansion out(F);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& a = F.indices()[k];
    double scale = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (int e = 0; e < a[i]; ++e) scale *= op.z[i];
    out.coefficients()[k] *= scale;
  }
  return out;
}

/// E F(rho x + sqrt(1 - rho^2) g') coordinatewise, by tensor Gauss-Hermite
/// quadrature; equals Theta_rho F(x) and is exact once 2 nodes > degree.
inline double mehler_expectation(const HermiteExpansion& F, const std::vector<double>& rho,
                                 const std::vector<double>& x, int nodes = 0) {
  const int N = F.variables();
  if (static_cast<int>(rho.size()) != N || static_cast<int>(x.size()) != N)
    throw DomainError("mehler_expectation needs N parameters and an N-point");
  for (double r : rho)
    if (!(std::abs(r) <= 1.0)) throw DomainError("correlations must lie in [-1, 1]");
  if (nodes <= 0) nodes = F.max_degree() / 2 + 2;
  const auto rule = gauss_hermite(nodes);
  std::vector<int> digit(static_cast<std::size_t>(N), 0);
  std::vector<double> y(static_cast<std::size_t>(N));
  double total = 0.0;
  for (;;) {
    double w = 1.0;
    for (int i = 0; i < N; ++i) {
      y[i] = rho[i] * x[i] + std::sqrt(std::max(0.0, 1.0 - rho[i] * rho[i])) * rule.nodes[digit[i]];
      w *= rule.weights[digit[i]];
    }
    total += w * F.evaluate(y);
    int i = 0;
    while (i < N && ++digit[i] == nodes) digit[i++] = 0;
    if (i == N) break;
  }
  return total;
}

/// Mehler kernel of T_delta against the product Gaussian measure:
/// (1-d^2)^{-N/2} exp((-d^2|t|^2 + 2 d t.x - d^2|x|^2) / (2(1-d^2))).
inline double mehler_kernel(const std::vector<double>& x, const std::vector<double>& t, double delta) {
  if (x.size() != t.size()) throw DomainError("kernel arguments differ in dimension");
  if (!(std::abs(delta) < 1.0)) throw DomainError("Mehler kernel needs |delta| < 1");
  const double s = 1.0 - delta * delta;
  double xx = 0.0, tt = 0.0, xt = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx += x[i] * x[i];
    tt += t[i] * t[i];
    xt += x[i] * t[i];
  }
  const double e = (-delta * delta * tt + 2.0 * delta * xt - delta * delta * xx) / (2.0 * s);
  return std::exp(e - 0.5 * static_cast<double>(x.size()) * std::log(s));
}

/// sum_{|alpha| <= D} delta^|alpha| h_alpha(x) h_alpha(t) / alpha!.
inline double mehler_series(const std::vector<double>& x, const std::vector<double>& t, double delta, int D) {
  if (x.size() != t.size() || x.empty()) throw DomainError("kernel arguments differ in dimension");
  const int N = static_cast<int>(x.size());
  std::vector<std::vector<double>> hx, ht;
  for (int i = 0; i < N; ++i) {
    hx.push_back(hermite_table(D, x[i]));
    ht.push_back(hermite_table(D, t[i]));
  }
  double s = 0.0;
  for (const auto& a : graded_indices(N, D)) {
    double term = std::pow(delta, total_degree(a)) / multi_factorial(a);
    for (int i = 0; i < N; ++i) term *= hx[i][a[i]] * ht[i][a[i]];
    s += term;
  }
  return s;
}

/// A kernel on R^N x R^N with its norm certificates. Two representations:
///  - QuadratureGrid: values scale * (prod_i factors[i](a_i, b_i) - shift) on
///    pairs of tensor Gauss-Hermite nodes (a, b), against weights w_a w_b.
///  - HermiteDiagonal: sum_alpha diagonal[k] e_alpha (x) e_alpha in the
///    orthonormal basis e_alpha = h_alpha / sqrt(alpha!).
struct TensorKernel {
  enum class Representation { QuadratureGrid, HermiteDiagonal };
  Representation representation = Representation::QuadratureGrid;
  int variables = 1;

  GaussRule rule;
  std::vector<Eigen::MatrixXd> factors;
  double scale = 1.0;
  double shift = 0.0;

  std::vector<MultiIndex> indices;
  std::vector<double> diagonal;

  std::optional<double> l1_norm;       // integral of |kernel| under P x P
  std::optional<double> op_norm_2to2;  // as an operator on L2(P)

  /// Number of grid points on each side.
  std::size_t side() const {
    std::size_t s = 1;
    for (int i = 0; i < variables; ++i) s *= rule.nodes.size();
    return s;
  }

  double value(std::size_t a, std::size_t b) const {
    if (representation != Representation::QuadratureGrid) throw DomainError("not a grid kernel");
    const std::size_t n = rule.nodes.size();
    double prod = 1.0;
    for (int i = 0; i < variables; ++i, a /= n, b /= n) prod *= factors[i](a % n, b % n);
    return scale * (prod - shift);
  }

  /// Sum over node pairs of w_a w_b |value(a, b)|. The last two coordinates
  /// are merged through sorted pair tables with prefix sums, so the cost is
  /// about n^{2(N-1)} rather than n^{2N}. Factors must be nonnegative.
  double compute_l1() const {
    if (representation != Representation::QuadratureGrid)
      throw DomainError("l1 norms are computed on the quadrature grid");
    const std::size_t n = rule.nodes.size();
    auto sorted_pairs = [&](int i) {
      std::vector<std::pair<double, double>> t;  // (factor value, pair weight)
      t.reserve(n * n);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          if (factors[i](a, b) < 0.0) throw DomainError("grid l1 needs nonnegative factors");
          t.emplace_back(factors[i](a, b), rule.weights[a] * rule.weights[b]);
        }
      std::sort(t.begin(), t.end());
      return t;
    };
    const auto table = sorted_pairs(variables - 1);
    std::vector<double> cum_w(table.size() + 1, 0.0), cum_wv(table.size() + 1, 0.0);
    for (std::size_t k = 0; k < table.size(); ++k) {
      cum_w[k + 1] = cum_w[k] + table[k].second;
      cum_wv[k + 1] = cum_wv[k] + table[k].second * table[k].first;
    }
    const double W = cum_w.back(), WV = cum_wv.back();
    // sum_j w_j |P v_j - shift|, where table[k..] are the entries with P v >= shift.
    auto fold = [&](double P, std::size_t k) {
      return shift * cum_w[k] - P * cum_wv[k] + P * (WV - cum_wv[k]) - shift * (W - cum_w[k]);
    };
    auto split = [&](double P) {
      if (P == 0.0) return table.size();
      return static_cast<std::size_t>(
          std::lower_bound(table.begin(), table.end(), std::make_pair(shift / P, -1.0)) - table.begin());
    };
    if (variables == 1) return std::abs(scale) * fold(1.0, split(1.0));

    const auto middle = sorted_pairs(variables - 2);
    const int head = variables - 2;
    std::size_t outer = 1;
    for (int i = 0; i < head; ++i) outer *= n * n;
    std::vector<double> partial(outer, 0.0);
    parallel_for(outer, [&](std::size_t idx) {
      double w0 = 1.0, P0 = 1.0;
      std::size_t rest = idx;
      for (int i = 0; i < head; ++i, rest /= n * n) {
        const std::size_t a = rest % (n * n) / n, b = rest % n;
        if (factors[i](a, b) < 0.0) throw DomainError("grid l1 needs nonnegative factors");
        w0 *= rule.weights[a] * rule.weights[b];
        P0 *= factors[i](a, b);
      }
      // P grows along the sorted middle table, so the split point only moves down.
      double acc = 0.0;
      std::size_t k = table.size();
      bool started = false;
      for (const auto& [v, w] : middle) {
        const double P = P0 * v;
        if (P == 0.0) {
          acc += w * std::abs(shift) * W;
          continue;
        }
        if (!started) {
          k = split(P);
          started = true;
        } else {
          const double cut = shift / P;
          while (k > 0 && table[k - 1].first >= cut) --k;
        }
        acc += w * fold(P, k);
      }
      partial[idx] = w0 * acc;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return std::abs(scale) * total;
  }

  double compute_op_norm() const {
    if (representation != Representation::HermiteDiagonal)
      throw DomainError("operator norms are computed in the Hermite basis");
    double top = 0.0;
    for (double c : diagonal) top = std::max(top, std::abs(c));
    return top;
  }
};

struct TensorDecomposition {
  TensorKernel t;
  TensorKernel r;
  double delta = 0.0;
  std::vector<double> z;
  int max_degree = 0;
  Eigen::MatrixXd degree_one;  // coefficients of t + r on g_n (x) g_m
  double reconstruction_error = 0.0;
  double l1_bound = 0.0;       // 2 / delta, the realized w(delta)
  double op_bound = 0.0;       // delta * max z_n^2
};

struct DecompositionOptions {
  int nodes = 0;  // per axis; 0 grows from max(2D + 1, 24) until the moments settle
  double l1_tolerance = 1e-4;
  double reconstruction_tolerance = 1e-8;
};

/// sum z_n g_n (x) g_n = t + r with t = (Phi - 1 (x) 1)/delta, Phi the kernel
/// of Theta_z T_delta (a product of one-variable Mehler kernels with
/// parameters delta z_n), and r = -(1/delta) sum_{2 <= d <= D} delta^d Theta_z P_d.
/// The identity is exact on degree-1 x degree-1; t + r differs from the left
/// side only in degrees above D. Certificates: ||t||_1 <= 2/delta by
/// quadrature, ||r||_{2->2} = delta max z_n^2 from the diagonal.
inline TensorDecomposition tensor_decompose(int N, double delta, const std::vector<double>& z, int D,
                                            const DecompositionOptions& opt = {}) {
  if (N < 1) throw DomainError("need N >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (D < 2) throw DomainError("truncation degree must be >= 2");
  if (static_cast<int>(z.size()) != N) throw DomainError("one z per variable is required");
  for (double zi : z)
    if (!(std::abs(zi) <= 1.0)) throw DomainError("z must lie in [-1, 1]^N");
  if (opt.nodes > 0 && opt.nodes < 2 * D + 1) throw DomainError("quadrature needs at least 2D + 1 nodes per axis");

  // One-variable moments sum w_a w_b K(a, b) {1, x_b, x_a x_b} of each factor.
  struct Moments {
    std::vector<double> mass, first, second;
  };
  auto moments = [&](const GaussRule& rule) {
    Moments m{std::vector<double>(N), std::vector<double>(N), std::vector<double>(N)};
    const std::size_t q = rule.nodes.size();
    for (int i = 0; i < N; ++i)
      for (std::size_t a = 0; a < q; ++a)
        for (std::size_t b = 0; b < q; ++b) {
          const double w = rule.weights[a] * rule.weights[b] *
                           mehler_kernel({rule.nodes[a]}, {rule.nodes[b]}, delta * z[i]);
          m.mass[i] += w;
          m.first[i] += w * rule.nodes[b];
          m.second[i] += w * rule.nodes[a] * rule.nodes[b];
        }
    return m;
  };
  // Unless fixed by the caller, grow the grid until the moments settle; the
  // kernel sharpens as delta |z| approaches 1.
  int nodes = opt.nodes > 0 ? opt.nodes : std::max(2 * D + 1, 24);
  Moments mom = moments(gauss_hermite(nodes));
  if (opt.nodes <= 0) {
    for (;;) {
      const int next = nodes + 16;
      Moments m2 = moments(gauss_hermite(next));
      double change = 0.0;
      for (int i = 0; i < N; ++i)
        change = std::max({change, std::abs(m2.mass[i] - mom.mass[i]), std::abs(m2.first[i] - mom.first[i]),
                           std::abs(m2.second[i] - mom.second[i])});
      nodes = next;
      mom = std::move(m2);
      if (change < 1e-13 * delta || nodes >= 400) break;
    }
  }

  TensorDecomposition out;
  out.delta = delta;
  out.z = z;
  out.max_degree = D;
  out.l1_bound = 2.0 / delta;

  TensorKernel& t = out.t;
  t.representation = TensorKernel::Representation::QuadratureGrid;
  t.variables = N;
  t.rule = gauss_hermite(nodes);
  t.scale = 1.0 / delta;
  t.shift = 1.0;
  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXd K(nodes, nodes);
    for (int a = 0; a < nodes; ++a)
      for (int b = 0; b < nodes; ++b)
        K(a, b) = mehler_kernel({t.rule.nodes[a]}, {t.rule.nodes[b]}, delta * z[i]);
    t.factors.push_back(std::move(K));
  }
  t.l1_norm = t.compute_l1();
  if (*t.l1_norm > out.l1_bound + opt.l1_tolerance)
    throw CertificateFailure("quadrature l1 norm of t exceeds 2/delta; refine the grid");

  TensorKernel& r = out.r;
  r.representation = TensorKernel::Representation::HermiteDiagonal;
  r.variables = N;
  double zmax = 0.0;
  for (double zi : z) zmax = std::max(zmax, zi * zi);
  for (const auto& a : graded_indices(N, D)) {
    const int d = total_degree(a);
    if (d < 2) continue;
    double c = -std::pow(delta, d - 1);
    for (int i = 0; i < N; ++i)
      for (int e = 0; e < a[i]; ++e) c *= z[i];
    r.indices.push_back(a);
    r.diagonal.push_back(c);
  }
  r.op_norm_2to2 = r.compute_op_norm();
  out.op_bound = delta * zmax;
  if (*r.op_norm_2to2 > out.op_bound * (1.0 + 1e-12)) throw CertificateFailure("operator norm of r exceeds delta");

  // Degree-1 coefficients of t by quadrature. Phi factors over coordinates,
  // so only one-variable moments are needed; r contributes nothing here.
  const std::vector<double>& mass = mom.mass;
  const std::vector<double>& first = mom.first;
  const std::vector<double>& second = mom.second;
  double w_mass = 0.0, w_first = 0.0;  // moments of the 1 (x) 1 term
  for (int a = 0; a < nodes; ++a) {
    w_mass += t.rule.weights[a];
    w_first += t.rule.weights[a] * t.rule.nodes[a];
  }
  out.degree_one = Eigen::MatrixXd::Zero(N, N);
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < N; ++m) {
      double phi = 1.0, one = 1.0;
      for (int i = 0; i < N; ++i) {
        if (n == m && i == n) {
          phi *= second[i];
          one *= w_first * w_first;
        } else if (i == n || i == m) {
          phi *= first[i];
          one *= w_first * (n == m ? 1.0 : w_mass);
        } else {
          phi *= mass[i];
          one *= w_mass * w_mass;
        }
      }
      out.degree_one(n, m) = (phi - one) / delta;
    }
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < N; ++m)
      out.reconstruction_error =
          std::max(out.reconstruction_error, std::abs(out.degree_one(n, m) - (n == m ? z[n] : 0.0)));
  if (out.reconstruction_error > opt.reconstruction_tolerance)
    throw CertificateFailure("degree-1 reconstruction of t + r failed");
  return out;
}

enum class LipschitzFunctional { Constant, Coordinate, EuclideanNorm, MaxCoordinate, DistanceToPoint };

inline std::string to_string(LipschitzFunctional f) {
  switch (f) {
    case LipschitzFunctional::Constant: return "constant";
    case LipschitzFunctional::Coordinate: return "coordinate";
    case LipschitzFunctional::EuclideanNorm: return "euclidean-norm";
    case LipschitzFunctional::MaxCoordinate: return "max-coordinate";
    case LipschitzFunctional::DistanceToPoint: return "distance-to-point";
  }
  return "?";
}

inline LipschitzFunctional parse_functional(const std::string& s) {
  for (auto f : {LipschitzFunctional::Constant, LipschitzFunctional::Coordinate, LipschitzFunctional::EuclideanNorm,
                 LipschitzFunctional::MaxCoordinate, LipschitzFunctional::DistanceToPoint})
    if (to_string(f) == s) return f;
  throw DomainError("unknown functional '" + s + "'");
}

/// Built-in functionals on R^n. All are 1-Lipschitz for the Euclidean norm
/// (Constant is 0-Lipschitz); DistanceToPoint measures |g - (1, ..., 1)|.
inline double eval_functional(LipschitzFunctional f, const std::vector<double>& g) {
  switch (f) {
    case LipschitzFunctional::Constant: return 1.0;
    case LipschitzFunctional::Coordinate: return g[0];
    case LipschitzFunctional::EuclideanNorm: {
      double s = 0.0;
      for (double x : g) s += x * x;
      return std::sqrt(s);
    }
    case LipschitzFunctional::MaxCoordinate: return *std::max_element(g.begin(), g.end());
    case LipschitzFunctional::DistanceToPoint: {
      double s = 0.0;
      for (double x : g) s += (x - 1.0) * (x - 1.0);
      return std::sqrt(s);
    }
  }
  return 0.0;
}

inline double lipschitz_constant(LipschitzFunctional f) { return f == LipschitzFunctional::Constant ? 0.0 : 1.0; }

struct ConcentrationOptions {
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 0;
  LambdaGrid grid{1e-2, 8.0, 60};
  int bootstrap = 20;
};

struct ConcentrationEstimate {
  double sg = 0.0;
  double stderr_ = 0.0;  // bootstrap
  double mean = 0.0;     // of F(g), subtracted before estimating
  double lipschitz = 1.0;
  bool bound_holds = true;  // sg <= lipschitz + 3 stderr
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

/// Empirical sg of F(g) - E F(g) for g standard normal in R^n. Trial t draws
/// from stream (seed, t); bootstrap resample b from stream (seed, trials + b).
inline ConcentrationEstimate lipschitz_concentration(LipschitzFunctional F, int n,
                                                     const ConcentrationOptions& opt = {}) {
  if (n < 1) throw DomainError("dimension must be >= 1");
  if (opt.trials < 10'000) throw DomainError("concentration estimates need at least 10^4 trials");
  if (opt.bootstrap < 2) throw DomainError("bootstrap needs at least 2 resamples");
  std::vector<double> v(opt.trials);
  parallel_for(opt.trials, [&](std::size_t t) {
    auto rng = make_rng(opt.seed, t);
    std::vector<double> g(static_cast<std::size_t>(n));
    for (auto& x : g) x = standard_normal(rng);
    v[t] = eval_functional(F, g);
  });
  const auto lambdas = opt.grid.values();
  auto centered_sg = [&](std::vector<double> x) {
    double mean = 0.0;
    for (double y : x) mean += y;
    mean /= static_cast<double>(x.size());
    for (double& y : x) y -= mean;
    return sg_constant(x, std::vector<double>(x.size(), 1.0 / static_cast<double>(x.size())), lambdas);
  };
  ConcentrationEstimate out;
  out.trials = opt.trials;
  out.seed = opt.seed;
  out.lipschitz = lipschitz_constant(F);
  for (double y : v) out.mean += y;
  out.mean /= static_cast<double>(v.size());
  out.sg = centered_sg(v);
  std::vector<double> boot(static_cast<std::size_t>(opt.bootstrap));
  parallel_for(boot.size(), [&](std::size_t b) {
    auto rng = make_rng(opt.seed, opt.trials + b);
    std::vector<double> x(v.size());
    for (auto& y : x) y = v[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(v.size()))];
    boot[b] = centered_sg(std::move(x));
  });
  double bm = 0.0;
  for (double s : boot) bm += s;
  bm /= static_cast<double>(boot.size());
  double var = 0.0;
  for (double s : boot) var += (s - bm) * (s - bm);
  out.stderr_ = std::sqrt(var / static_cast<double>(boot.size() - 1));
  out.bound_holds = out.sg <= out.lipschitz + 3.0 * out.stderr_;
  return out;
}

}  // namespace thinset
