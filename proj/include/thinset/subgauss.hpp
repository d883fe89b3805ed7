#pragma once

// Orlicz psi_a norms, subgaussian constants of variables and systems, moment
// growth, iid suprema, packing nets, arithmetic lower bounds and the
// stationary entropy integral.

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "thinset/error.hpp"
#include "thinset/parallel.hpp"
#include "thinset/quadrature.hpp"
#include "thinset/random.hpp"
#include "thinset/spectrum.hpp"

namespace thinset {

/// Finite distribution: atoms with probabilities summing to 1.
using DiscreteDistribution = SampledFunction;
/// Functions over a common atom set with common weights.
using FunctionSystem = std::vector<SampledFunction>;

inline DiscreteDistribution rademacher() { return SampledFunction::uniform_real({-1.0, 1.0}); }

/// Standard normal represented by an n-point Gauss-Hermite rule.
inline DiscreteDistribution normal_quadrature(int nodes = 200) {
  auto rule = gauss_hermite(nodes);
  return SampledFunction(std::vector<cplx>(rule.nodes.begin(), rule.nodes.end()), rule.weights);
}

/// cos(theta) with theta uniform on M grid points.
inline DiscreteDistribution uniform_circle(int M = 4096) {
  if (M < 3) throw DomainError("uniform-circle needs at least 3 atoms");
  std::vector<double> v(M);
  for (int j = 0; j < M; ++j) v[j] = std::cos(kTwoPi * j / M);
  return SampledFunction::uniform_real(v);
}

/// Equal-weight empirical law of the samples, merging repeated values.
inline DiscreteDistribution empirical_distribution(std::vector<double> samples) {
  if (samples.empty()) throw DomainError("no samples");
  std::sort(samples.begin(), samples.end());
  std::vector<cplx> vals;
  std::vector<double> w;
  const double unit = 1.0 / static_cast<double>(samples.size());
  for (double s : samples) {
    if (!vals.empty() && vals.back().real() == s) {
      w.back() += unit;
    } else {
      vals.emplace_back(s, 0.0);
      w.push_back(unit);
    }
  }
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return SampledFunction(std::move(vals), std::move(w));
}

namespace detail {

// log sum_i w_i exp(c_i), stable for large exponents.
inline double log_mean_exp(const std::vector<double>& w, const std::vector<double>& c) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i)
    if (w[i] > 0) m = std::max(m, c[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (w[i] > 0) s += w[i] * std::exp(c[i] - m);
  return m + std::log(s);
}

// log E exp(lambda f), using log1p/expm1 when every exponent is small.
inline double log_mgf(const std::vector<double>& v, const std::vector<double>& w, double lambda) {
  double big = 0.0;
  for (double x : v) big = std::max(big, std::abs(lambda * x));
  if (big < 0.5) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::expm1(lambda * v[i]);
    return std::log1p(s);
  }
  std::vector<double> c(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) c[i] = lambda * v[i];
  return log_mean_exp(w, c);
}

inline std::vector<double> real_values(const SampledFunction& f) {
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = f.value(i).real();
  return v;
}

}  // namespace detail

/// Gauge norm inf{t > 0 : E exp(|f/t|^a) <= e}, by bisection in log t.
inline double psi_norm(const SampledFunction& f, double a, double rel_tol = 1e-12) {
  if (!(a > 0.0)) throw DomainError("psi_a needs a > 0");
  // Atoms of zero probability do not count.
  double top = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.weight(i) > 0.0) top = std::max(top, std::abs(f.value(i)));
  if (top == 0.0) return 0.0;
  double heaviest = 0.0;
  std::vector<double> mag(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    mag[i] = f.weight(i) > 0.0 ? std::abs(f.value(i)) / top : 0.0;
    if (mag[i] == 1.0) heaviest = std::max(heaviest, f.weight(i));
  }
  // L(t) = log E exp(|f/t|^a) - 1, decreasing in t.
  auto excess = [&](double t) {
    std::vector<double> c(mag.size());
    const double scale = top / t;
    for (std::size_t i = 0; i < mag.size(); ++i) c[i] = std::pow(mag[i] * scale, a);
    return detail::log_mean_exp(f.weights(), c) - 1.0;
  };
  double hi = top;
  double lo = top / std::pow(1.0 - std::log(heaviest), 1.0 / a);
  if (excess(hi) > 0.0) throw std::logic_error("psi_norm upper bracket failed");
  // lo is exact in real arithmetic; widen it if rounding put it on the wrong side.
  for (int widen = 0; excess(lo) < 0.0; ++widen) {
    if (widen == 200) throw std::logic_error("psi_norm lower bracket failed");
    lo *= 0.5;
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = std::sqrt(lo * hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return hi;
}

/// Log-spaced lambda grid on +-[lo, hi].
struct LambdaGrid {
  double lo = 1e-3;
  double hi = 50.0;
  int points = 400;  // per sign

  std::vector<double> values() const {
    if (!(lo > 0.0 && hi >= lo && points >= 1)) throw DomainError("invalid lambda grid");
    std::vector<double> out;
    out.reserve(2 * points);
    for (int i = 0; i < points; ++i) {
      const double s = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
      const double l = lo * std::pow(hi / lo, s);
      out.push_back(l);
      out.push_back(-l);
    }
    return out;
  }
};

inline constexpr double kMeanTolerance = 1e-10;

/// max(sqrt(Var f), max_lambda sqrt(2 ln E e^{lambda f})/|lambda|): a lower
/// bound for the subgaussian constant that is exact in the lambda -> 0 limit.
/// The best grid point is polished by Brent's method.
inline double sg_constant(const std::vector<double>& v, const std::vector<double>& w,
                          const std::vector<double>& lambdas) {
  double mean = 0.0, top = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw DomainError("atom values must be finite");
    mean += w[i] * v[i];
    top = std::max(top, std::abs(v[i]));
  }
  if (std::abs(mean) > kMeanTolerance * std::max(1.0, top))
    throw MeanNotZero("subgaussian constants need mean zero (mean = " + std::to_string(mean) + ")");
  double var = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) var += w[i] * (v[i] - mean) * (v[i] - mean);
  auto ratio = [&](double l) {
    const double L = detail::log_mgf(v, w, l);
    return L > 0.0 ? std::sqrt(2.0 * L) / std::abs(l) : 0.0;
  };
  double best = std::sqrt(var), best_lambda = 0.0;
  for (double l : lambdas) {
    const double r = ratio(l);
    if (r > best) best = r, best_lambda = l;
  }
  if (best_lambda == 0.0) return best;
  // Polish between the neighbouring grid points of the same sign.
  double lo = best_lambda, hi = best_lambda;
  for (double l : lambdas) {
    if ((l > 0) != (best_lambda > 0)) continue;
    if (std::abs(l) < std::abs(best_lambda) && (lo == best_lambda || std::abs(l) > std::abs(lo))) lo = l;
    if (std::abs(l) > std::abs(best_lambda) && (hi == best_lambda || std::abs(l) < std::abs(hi))) hi = l;
  }
  if (lo != hi) {
    const auto r = boost::math::tools::brent_find_minima([&](double l) { return -ratio(l); }, std::min(lo, hi),
                                                         std::max(lo, hi), std::numeric_limits<double>::digits / 2);
    best = std::max(best, -r.second);
  }
  return best;
}

inline double sg_constant(const DiscreteDistribution& f, const LambdaGrid& grid = {}) {
  if (!f.is_real(1e-12)) throw DomainError("sg_constant needs a real-valued variable");
  return sg_constant(detail::real_values(f), f.weights(), grid.values());
}

struct SystemOptions {
  int restarts = 8;
  std::uint64_t seed = 0;
  int passes = 3;
  LambdaGrid search_grid{1e-3, 50.0, 40};
  LambdaGrid final_grid{};
};

struct SystemEstimate {
  double value = 0.0;             // certified lower bound for sg of the system
  std::vector<double> direction;  // unit vector over the real components
  std::vector<std::string> components;  // "re k" / "im k"
  int restarts = 0;
  std::uint64_t seed = 0;
};

/// Real components of a (possibly complex) system: real parts, plus the
/// imaginary parts that are not identically zero.
inline std::vector<std::vector<double>> real_components(const FunctionSystem& S,
                                                        std::vector<std::string>* names = nullptr) {
  if (S.empty()) throw DomainError("empty function system");
  const auto& w0 = S.front().weights();
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < S.size(); ++k) {
    if (S[k].weights() != w0) throw DomainError("system functions must share atoms and weights");
    std::vector<double> re(S[k].size()), im(S[k].size());
    bool has_im = false;
    for (std::size_t i = 0; i < S[k].size(); ++i) {
      re[i] = S[k].value(i).real();
      im[i] = S[k].value(i).imag();
      has_im = has_im || im[i] != 0.0;
    }
    out.push_back(std::move(re));
    if (names) names->push_back("re " + std::to_string(k));
    if (has_im) {
      out.push_back(std::move(im));
      if (names) names->push_back("im " + std::to_string(k));
    }
  }
  return out;
}

/// Lower bound for sup over unit x of sg(sum x_n f_n): random restarts, each
/// improved by great-circle line searches toward every coordinate axis.
inline SystemEstimate sg_system_lower(const FunctionSystem& S, const SystemOptions& opt = {}) {
  if (opt.restarts < 1) throw DomainError("restarts must be >= 1");
  SystemEstimate out;
  const auto comps = real_components(S, &out.components);
  const auto& w = S.front().weights();
  const std::size_t m = comps.size(), atoms = w.size();
  const auto coarse = opt.search_grid.values();

  auto combine = [&](const std::vector<double>& x) {
    std::vector<double> g(atoms, 0.0);
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t i = 0; i < atoms; ++i) g[i] += x[k] * comps[k][i];
    return g;
  };
  auto normalize = [](std::vector<double>& x) {
    double n = 0.0;
    for (double t : x) n += t * t;
    n = std::sqrt(n);
    for (double& t : x) t /= n;
  };

  std::vector<std::pair<double, std::vector<double>>> results(opt.restarts);
  parallel_for(static_cast<std::size_t>(opt.restarts), [&](std::size_t r) {
    auto rng = make_rng(opt.seed, r);
    std::vector<double> x(m);
    double norm = 0.0;
    while (norm < 1e-12) {
      for (double& t : x) t = standard_normal(rng);
      norm = 0.0;
      for (double t : x) norm += t * t;
    }
    normalize(x);
    double best = sg_constant(combine(x), w, coarse);
    for (int pass = 0; pass < opt.passes; ++pass) {
      for (std::size_t k = 0; k < m; ++k) {
        std::vector<double> u(m, 0.0);
        u[k] = 1.0;
        for (std::size_t j = 0; j < m; ++j) u[j] -= x[k] * x[j];
        double un = 0.0;
        for (double t : u) un += t * t;
        if (un < 1e-20) continue;
        for (double& t : u) t /= std::sqrt(un);
        auto along = [&](double th) {
          std::vector<double> y(m);
          for (std::size_t j = 0; j < m; ++j) y[j] = std::cos(th) * x[j] + std::sin(th) * u[j];
          return y;
        };
        double best_th = 0.0, step = kPi / 16.0;
        for (int level = 0; level < 3; ++level) {
          const double centre = best_th;
          for (int s = -8; s <= 8; ++s) {
            if (s == 0) continue;
            const double th = centre + s * step;
            const double val = sg_constant(combine(along(th)), w, coarse);
            if (val > best) {
              best = val;
              best_th = th;
            }
          }
          step /= 8.0;
        }
        if (best_th != 0.0) {
          x = along(best_th);
          normalize(x);
        }
      }
    }
    results[r] = {sg_constant(combine(x), w, opt.final_grid.values()), x};
  });
  std::size_t arg = 0;
  for (std::size_t r = 1; r < results.size(); ++r)
    if (results[r].first > results[arg].first) arg = r;
  out.value = results[arg].first;
  out.direction = results[arg].second;
  out.restarts = opt.restarts;
  out.seed = opt.seed;
  return out;
}

/// sup over even p in [2, p_max] of p^{-1/a} ||f||_p.
inline double moment_growth(const SampledFunction& f, double a, int p_max) {
  if (!(a > 0.0)) throw DomainError("moment growth needs a > 0");
  if (p_max < 2 || p_max % 2) throw DomainError("p_max must be an even integer >= 2");
  double best = 0.0;
  for (int p = 2; p <= p_max; p += 2)
    best = std::max(best, std::pow(static_cast<double>(p), -1.0 / a) * lp_norm(f, p));
  return best;
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
};

/// Monte Carlo estimate of E sup_{n <= n_max} (log(n+1))^{-1/a} |f_n| over
/// iid copies of f. Trial t draws from stream (seed, t).
inline MonteCarloEstimate iid_sup_statistic(const DiscreteDistribution& f, double a,
                                            std::uint64_t n_max, std::uint64_t trials,
                                            std::uint64_t seed) {
  if (!(a > 0.0)) throw DomainError("iid sup needs a > 0");
  if (trials < 1 || n_max < 1) throw DomainError("trials and n_max must be >= 1");
  std::vector<double> cdf(f.size());
  std::vector<double> mag(f.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    acc += f.weight(i);
    cdf[i] = acc;
    mag[i] = std::abs(f.value(i));
  }
  std::vector<double> scale(n_max);
  for (std::uint64_t n = 1; n <= n_max; ++n)
    scale[n - 1] = std::pow(std::log(static_cast<double>(n + 1)), -1.0 / a);
  std::vector<double> sups(trials);
  parallel_for(trials, [&](std::size_t t) {
    auto rng = make_rng(seed, t);
    double best = 0.0;
    for (std::uint64_t n = 0; n < n_max; ++n) {
      const double u = uniform01(rng) * acc;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const std::size_t i = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
      best = std::max(best, scale[n] * mag[i]);
    }
    sups[t] = best;
  });
  MonteCarloEstimate out;
  out.seed = seed;
  out.trials = trials;
  for (double s : sups) out.mean += s;
  out.mean /= static_cast<double>(trials);
  if (trials > 1) {
    double var = 0.0;
    for (double s : sups) var += (s - out.mean) * (s - out.mean);
    out.stderr_ = std::sqrt(var / static_cast<double>(trials - 1) / static_cast<double>(trials));
  }
  return out;
}

struct NetReport {
  std::vector<std::size_t> points;  // atom indices
  double separation = 0.0;          // delta * sqrt(n)
  double bound = 0.0;               // n (1 - delta C)^2 / (2 s^2 C^2)
  double log_size = 0.0;
  bool bound_holds = false;
  bool maximal = false;
};

/// Greedy maximal set of atoms whose pairwise l2 distances between the
/// vectors (f_k(x))_k exceed delta*sqrt(n), compared with the lower bound on
/// its log-cardinality implied by the subgaussian constant s.
inline NetReport packing_net(const FunctionSystem& S, double delta, double s, double C) {
  if (S.empty()) throw DomainError("empty function system");
  if (!(C > 0.0) || !(delta > 0.0) || delta * C >= 1.0)
    throw DomainError("packing needs 0 < delta < 1/C");
  if (!(s > 0.0)) throw DomainError("sg bound s must be positive");
  const std::size_t n = S.size(), atoms = S.front().size();
  for (const auto& f : S) {
    if (f.weights() != S.front().weights()) throw DomainError("system functions must share atoms");
    const double l2 = lp_norm(f, 2.0);
    if (std::abs(l2 - 1.0) > 1e-8) throw DomainError("system functions must have unit L2 norm");
    if (f.max_abs() > C * (1.0 + 1e-12)) throw DomainError("system exceeds the sup-norm bound C");
  }
  NetReport rep;
  rep.separation = delta * std::sqrt(static_cast<double>(n));
  const double sep2 = rep.separation * rep.separation;
  auto dist2 = [&](std::size_t x, std::size_t y) {
    double d = 0.0;
    for (const auto& f : S) d += std::norm(f.value(x) - f.value(y));
    return d;
  };
  for (std::size_t x = 0; x < atoms; ++x) {
    bool far = true;
    for (auto y : rep.points)
      if (dist2(x, y) <= sep2) {
        far = false;
        break;
      }
    if (far) rep.points.push_back(x);
  }
  rep.maximal = true;
  for (std::size_t x = 0; x < atoms && rep.maximal; ++x) {
    bool covered = false;
    for (auto y : rep.points) covered = covered || dist2(x, y) <= sep2;
    rep.maximal = covered;
  }
  rep.bound = static_cast<double>(n) * (1.0 - delta * C) * (1.0 - delta * C) / (2.0 * s * s * C * C);
  rep.log_size = std::log(static_cast<double>(rep.points.size()));
  rep.bound_holds = rep.log_size >= rep.bound;
  return rep;
}

/// Largest value of sqrt(|L| (1-delta)^2 / (2 ln(2 pi N / delta + 1))) over
/// the delta grid: every subgaussian constant of L is at least this.
inline double arith_sg_lower_bound(const FreqSet& L, std::int64_t N, int grid_points = 999) {
  if (L.group().kind() != GroupKind::Integers) throw DomainError("frequencies must be integers");
  if (N < 1) throw DomainError("N must be >= 1");
  for (const auto& e : L)
    if (e.scalar() < 1 || e.scalar() > N) throw DomainError("frequencies must lie in [1, N]");
  if (grid_points < 1) throw DomainError("delta grid must be nonempty");
  const double size = static_cast<double>(L.size());
  double best = 0.0;
  for (int i = 1; i <= grid_points; ++i) {
    const double d = static_cast<double>(i) / (grid_points + 1);
    const double v = size * (1 - d) * (1 - d) / (2.0 * std::log(kTwoPi * N / d + 1.0));
    best = std::max(best, std::sqrt(v));
  }
  return best;
}

/// Entropy integral of the stationary process sum_k e^{iks}: with
/// d(s) = (sum_k |e^{2 pi i k s/M} - 1|^2)^{1/2} and mu(eps) = #{s : d(s) < eps}/M,
/// returns int_0^diam sqrt(ln 1/mu(eps)) d eps as an exact finite sum.
inline double entropy_integral(const FreqSet& L) {
  const auto kind = L.group().kind();
  if (kind != GroupKind::Cyclic && kind != GroupKind::TorusGrid)
    throw DomainError("entropy integral needs a set in Z_M");
  const std::int64_t M = L.group().modulus();
  if (M < 2) throw DomainError("M must be >= 2");
  std::vector<double> d(M, 0.0);
  for (std::int64_t s = 0; s < M; ++s) {
    double acc = 0.0;
    for (const auto& e : L) {
      const std::int64_t ks = mod_floor(static_cast<std::int64_t>(
                                            static_cast<__int128>(e.scalar()) * s % M),
                                        M);
      const double sn = std::sin(kPi * static_cast<double>(ks) / static_cast<double>(M));
      acc += 4.0 * sn * sn;
    }
    d[s] = std::sqrt(acc);
  }
  std::sort(d.begin(), d.end());
  // Merge distances equal up to rounding; c counts atoms with d <= current level.
  std::vector<std::pair<double, std::int64_t>> levels;
  for (std::int64_t i = 0; i < M; ++i) {
    if (!levels.empty() && d[i] - levels.back().first <= 1e-12 * std::max(1.0, d[i]))
      levels.back().second = i + 1;
    else
      levels.emplace_back(d[i], i + 1);
  }
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    const double width = levels[i + 1].first - levels[i].first;
    integral += width * std::sqrt(std::log(static_cast<double>(M) /
                                           static_cast<double>(levels[i].second)));
  }
  return integral;
}

}  // namespace thinset
