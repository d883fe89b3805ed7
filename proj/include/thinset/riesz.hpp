#pragma once

// Riesz products, Sidon ratios, and the L1 Fourier-interpolation program with
// primal-dual certificates.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "thinset/error.hpp"
#include "thinset/parallel.hpp"
#include "thinset/random.hpp"
#include "thinset/relations.hpp"
#include "thinset/spectrum.hpp"

namespace thinset {

struct CoefficientLaw {
  double max_deviation = 0.0;  // over all nonempty subsets B
  bool holds = true;           // max_deviation <= 1e-9
  std::vector<std::int64_t> worst_subset;
};

struct RieszProduct {
  FreqSet base;
  std::vector<cplx> phases;
  double damping = 1.0;
  SampledFunction samples;
  std::vector<cplx> spectrum;  // grid coefficients, index k mod M
  double mean = 0.0;
  double min_value = 0.0;
  std::optional<CoefficientLaw> law;  // evaluated when |A| <= 12
};

/// True iff the 3^|A| signed sums of A are pairwise distinct, which is what
/// makes the Riesz product coefficients factor over subsets.
inline bool has_distinct_signed_sums(const FreqSet& A, std::uint64_t cap = 50'000'000) {
  if (A.size() > 18) throw DomainError("signed-sum check supports |A| <= 18");
  detail::check_integer_range(A);
  detail::GroupArith ar(A.group());
  std::vector<detail::Key> keys;
  for (const auto& e : A) keys.push_back(ar.encode(e));
  if (detail::pow3(A.size()) > cap) throw CapExceeded("signed-sum table exceeds cap", 0.0);
  auto sums = detail::signed_sums(ar, keys, 0, keys.size());
  std::sort(sums.begin(), sums.end());
  return std::adjacent_find(sums.begin(), sums.end()) == sums.end();
}

/// prod_{n in A} (1 + damping * Re(conj(z_n) e^{int})) on the grid of size M.
/// A must be quasi-independent and M > 2 sum|n|. The product is checked for
/// nonnegativity and unit mean; the subset coefficient law is measured and
/// reported, since it also needs distinct signed sums.
inline RieszProduct riesz_product(const FreqSet& A, const std::vector<cplx>& z, std::int64_t M,
                                  double damping = 1.0) {
  const auto kind = A.group().kind();
  if (kind != GroupKind::Integers && kind != GroupKind::TorusGrid)
    throw DomainError("Riesz products are built over integer frequencies");
  if (z.size() != A.size()) throw DomainError("one phase per frequency is required");
  for (const auto& p : z)
    if (std::abs(std::abs(p) - 1.0) > 1e-12) throw DomainError("phases must be unimodular");
  if (!(damping >= 0.0 && damping <= 1.0)) throw DomainError("damping must lie in [0, 1]");
  std::int64_t span = 0;
  for (const auto& e : A) span += std::abs(e.scalar());
  if (M <= 2 * span)
    throw AliasError("grid of size " + std::to_string(M) + " aliases the full expansion (needs > " +
                     std::to_string(2 * span) + ")");
  if (!is_quasi_independent(A).quasi_independent)
    throw PreconditionError("Riesz products need a quasi-independent set");

  std::vector<cplx> vals(static_cast<std::size_t>(M), cplx(1.0));
  for (std::size_t i = 0; i < A.size(); ++i) {
    const std::int64_t n = A[i].scalar();
    for (std::int64_t j = 0; j < M; ++j) {
      const double phase = kTwoPi * static_cast<double>(mod_floor(n * j, M)) / static_cast<double>(M);
      vals[j] *= 1.0 + damping * (std::conj(z[i]) * std::polar(1.0, phase)).real();
    }
  }
  RieszProduct out{A, z, damping, SampledFunction::uniform(vals), {}, 0.0, 0.0, std::nullopt};
  out.spectrum = forward_dft(vals);
  out.mean = out.samples.mean().real();
  out.min_value = vals.empty() ? 1.0 : vals[0].real();
  for (const auto& v : vals) out.min_value = std::min(out.min_value, v.real());
  if (out.min_value < -1e-10) throw CertificateFailure("Riesz product took a negative value");
  if (std::abs(out.mean - 1.0) > 1e-10) throw CertificateFailure("Riesz product mean differs from 1");

  if (A.size() <= 12) {
    CoefficientLaw law;
    for (std::uint32_t mask = 1; mask < (1u << A.size()); ++mask) {
      std::int64_t k = 0;
      cplx expected(1.0);
      for (std::size_t i = 0; i < A.size(); ++i)
        if (mask >> i & 1u) {
          k += A[i].scalar();
          expected *= damping * std::conj(z[i]) / 2.0;
        }
      const double dev = std::abs(grid_coefficient(out.spectrum, k) - expected);
      if (dev > law.max_deviation) {
        law.max_deviation = dev;
        law.worst_subset.clear();
        for (std::size_t i = 0; i < A.size(); ++i)
          if (mask >> i & 1u) law.worst_subset.push_back(A[i].scalar());
      }
    }
    law.holds = law.max_deviation <= 1e-9;
    out.law = law;
  }
  return out;
}

struct Deterministic {};
struct RandomSigns {
  std::uint64_t trials = 100;
  std::uint64_t seed = 0;
};

struct SidonRatio {
  double ratio = 0.0;
  double numerator = 0.0;    // sum |a_n|
  double denominator = 0.0;  // sup norm, or its Monte Carlo mean
  double stderr_ = 0.0;      // of the denominator, random-sign mode only
};

namespace detail {

inline double sup_of_combination(const std::vector<SampledFunction>& S, const std::vector<cplx>& a) {
  double top = 0.0;
  for (std::size_t t = 0; t < S.front().size(); ++t) {
    cplx v{};
    for (std::size_t n = 0; n < S.size(); ++n) v += a[n] * S[n].value(t);
    top = std::max(top, std::abs(v));
  }
  return top;
}

inline double abs_sum_nonzero(const std::vector<SampledFunction>& S, const std::vector<cplx>& a) {
  if (S.empty() || S.size() != a.size()) throw DomainError("one coefficient per function is required");
  for (const auto& f : S)
    if (f.weights() != S.front().weights()) throw DomainError("system functions must share atoms");
  double s = 0.0;
  for (const auto& c : a) s += std::abs(c);
  if (s == 0.0) throw DomainError("coefficients must not all vanish");
  return s;
}

}  // namespace detail

/// sum|a_n| / ||sum a_n phi_n||_inf: a lower bound for the Sidon constant.
inline SidonRatio sidon_ratio(const std::vector<SampledFunction>& S, const std::vector<cplx>& a,
                              Deterministic) {
  SidonRatio out;
  out.numerator = detail::abs_sum_nonzero(S, a);
  out.denominator = detail::sup_of_combination(S, a);
  out.ratio = out.numerator / out.denominator;
  return out;
}

/// sum|a_n| / E||sum eps_n a_n phi_n||_inf with the mean estimated over
/// random signs; trial t uses stream (seed, t).
inline SidonRatio sidon_ratio(const std::vector<SampledFunction>& S, const std::vector<cplx>& a,
                              RandomSigns mode) {
  if (mode.trials < 1) throw DomainError("trials must be >= 1");
  SidonRatio out;
  out.numerator = detail::abs_sum_nonzero(S, a);
  std::vector<double> sups(mode.trials);
  parallel_for(mode.trials, [&](std::size_t t) {
    auto rng = make_rng(mode.seed, t);
    std::vector<cplx> signed_a(a);
    for (auto& c : signed_a)
      if (rng() >> 63) c = -c;
    sups[t] = detail::sup_of_combination(S, signed_a);
  });
  double mean = 0.0;
  for (double s : sups) mean += s;
  mean /= static_cast<double>(sups.size());
  double var = 0.0;
  for (double s : sups) var += (s - mean) * (s - mean);
  if (sups.size() > 1)
    out.stderr_ = std::sqrt(var / static_cast<double>(sups.size() - 1) / static_cast<double>(sups.size()));
  out.denominator = mean;
  out.ratio = out.numerator / mean;
  return out;
}

struct InterpolationSolution {
  std::vector<cplx> density;       // u on the group atoms
  std::vector<cplx> certificate;   // dual coefficients c_gamma
  double primal_value = 0.0;       // sum_t w_t |u(t)|
  double dual_value = 0.0;         // Re sum_gamma c_gamma conj(z_gamma)
  double gap = 0.0;
  double certificate_sup = 0.0;    // ||sum c_gamma gamma||_inf, < 1
  double constraint_residual = 0.0;
  bool unimodular_targets = true;
  int newton_steps = 0;
};

struct InterpolationOptions {
  double tol = 1e-9;       // relative gap
  double mu_start = 1.0;
  double mu_factor = 0.1;
  double mu_min = 1e-13;
  int max_newton = 60;  // per barrier stage
};

/// min sum_t w_t |u(t)| subject to u^(gamma) = z_gamma for gamma in L, on a
/// finite group. Solved through the dual max Re<c, z> s.t. |sum c_gamma gamma| <= 1
/// with a log barrier; at the barrier optimum u = 2 mu p/(1 - |p|^2) is
/// nearly primal feasible and the gap is at most mu. An exactly feasible
/// density is then recovered from the barrier moduli.
/// The trivial character may appear in L here, unlike in a FreqSet.
inline InterpolationSolution interpolate_l1(const GroupSpec& G, const std::vector<Element>& L,
                                            const std::vector<cplx>& z,
                                            const InterpolationOptions& opt = {}) {
  if (G.kind() == GroupKind::Integers || G.kind() == GroupKind::TorusGrid)
    throw DomainError("interpolation needs a finite group");
  if (z.size() != L.size()) throw DomainError("one target per character is required");
  if (L.empty()) throw DomainError("empty constraint set");
  {
    std::set<Element> seen;
    for (const auto& e : L)
      if (!seen.insert(G.identity_key(G.canonical(e))).second)
        throw DomainError("characters must be distinct");
  }
  if (!(opt.tol > 0.0)) throw DomainError("tolerance must be positive");
  for (const auto& t : z)
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) throw DomainError("targets must be finite");
  const auto atoms = static_cast<std::size_t>(G.order());
  if (L.size() > atoms) throw Infeasible("more constraints than group atoms");
  const double w = 1.0 / static_cast<double>(atoms);
  const std::size_t m = L.size(), dim = 2 * m;

  InterpolationSolution sol;
  for (const auto& t : z) sol.unimodular_targets = sol.unimodular_targets && std::abs(std::abs(t) - 1.0) < 1e-12;

  // g[j][t]: basis functions; j = 2k is gamma_k, j = 2k+1 is i*gamma_k.
  std::vector<std::vector<cplx>> chars(m);
  for (std::size_t k = 0; k < m; ++k) chars[k] = character_samples(G, L[k]);
  auto basis = [&](std::size_t j, std::size_t t) {
    const cplx c = chars[j / 2][t];
    return j % 2 ? cplx(-c.imag(), c.real()) : c;
  };
  Eigen::VectorXd lin(dim);
  for (std::size_t k = 0; k < m; ++k) {
    lin(2 * k) = z[k].real();
    lin(2 * k + 1) = z[k].imag();
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  std::vector<cplx> p(atoms, cplx{});
  auto eval_p = [&](const Eigen::VectorXd& v, std::vector<cplx>& out) {
    for (std::size_t t = 0; t < atoms; ++t) {
      cplx s{};
      for (std::size_t j = 0; j < dim; ++j) s += v(j) * basis(j, t);
      out[t] = s;
    }
  };
  auto objective = [&](const Eigen::VectorXd& v, const std::vector<cplx>& pv, double mu) {
    double b = 0.0;
    for (const auto& q : pv) {
      const double s = 1.0 - std::norm(q);
      if (s <= 0.0) return -std::numeric_limits<double>::infinity();
      b += std::log(s);
    }
    return lin.dot(v) + mu * w * b;
  };

  // Gradient (and optionally Hessian) of lin.x + mu w sum log(1 - |p|^2).
  auto assemble = [&](const std::vector<cplx>& pv, double mu, Eigen::VectorXd& grad,
                      Eigen::MatrixXd* H) {
    grad = lin;
    if (H) H->setZero(dim, dim);
    Eigen::VectorXd dr(dim);
    for (std::size_t t = 0; t < atoms; ++t) {
      const double s = 1.0 - std::norm(pv[t]);
      for (std::size_t j = 0; j < dim; ++j) dr(j) = 2.0 * (std::conj(pv[t]) * basis(j, t)).real();
      grad -= (mu * w / s) * dr;
      if (!H) continue;
      H->noalias() += (mu * w / (s * s)) * dr * dr.transpose();
      for (std::size_t j = 0; j < dim; ++j)
        for (std::size_t k = j; k < dim; ++k) {
          const double v = 2.0 * mu * w / s * (std::conj(basis(j, t)) * basis(k, t)).real();
          (*H)(j, k) += v;
          if (k != j) (*H)(k, j) += v;
        }
    }
  };

  double mu = opt.mu_start;
  std::vector<cplx> trial_p(atoms);
  Eigen::VectorXd grad(dim), trial_grad(dim);
  Eigen::MatrixXd H(dim, dim);
  for (;;) {
    for (int it = 0; it < opt.max_newton; ++it) {
      assemble(p, mu, grad, &H);
      const Eigen::VectorXd step = H.ldlt().solve(grad);
      const double decrement = grad.dot(step);
      ++sol.newton_steps;
      if (!(decrement > 1e-16 * mu)) break;
      const double base = objective(x, p, mu);
      const double gnorm = grad.norm();
      double tstep = 1.0;
      bool moved = false;
      // Armijo on the objective; once its increments fall below rounding,
      // accept steps that shrink the gradient instead.
      for (int ls = 0; ls < 60; ++ls, tstep *= 0.5) {
        const Eigen::VectorXd cand = x + tstep * step;
        eval_p(cand, trial_p);
        const double val = objective(cand, trial_p, mu);
        if (!std::isfinite(val)) continue;
        bool accept = val >= base + 0.25 * tstep * decrement;
        if (!accept && val >= base - 1e-14 * std::max(1.0, std::abs(base))) {
          assemble(trial_p, mu, trial_grad, nullptr);
          accept = trial_grad.norm() < (1.0 - 0.25 * tstep) * gnorm;
        }
        if (accept) {
          x = cand;
          p.swap(trial_p);
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    const double dual = lin.dot(x);
    if (mu <= opt.tol * std::max(std::abs(dual), 1e-12) || mu <= opt.mu_min) break;
    mu *= opt.mu_factor;
  }

  sol.certificate.resize(m);
  for (std::size_t k = 0; k < m; ++k) sol.certificate[k] = cplx(x(2 * k), x(2 * k + 1));
  sol.dual_value = lin.dot(x);
  for (const auto& q : p) sol.certificate_sup = std::max(sol.certificate_sup, std::abs(q));
  if (sol.certificate_sup > 1.0) throw CertificateFailure("dual certificate left the unit ball");

  // Complementary slackness: an optimal u is rho_t p_t/|p_t| with rho >= 0,
  // carried by atoms where |p_t| = 1. Keep the barrier's support and phases
  // and correct the moduli to satisfy the constraints (minimum-norm step).
  sol.density.resize(atoms);
  std::vector<double> rho(atoms);
  double rho_max = 0.0;
  for (std::size_t t = 0; t < atoms; ++t) {
    rho[t] = 2.0 * mu * std::abs(p[t]) / (1.0 - std::norm(p[t]));
    rho_max = std::max(rho_max, rho[t]);
  }
  auto coefficient = [&](std::size_t k) {
    cplx s{};
    for (std::size_t t = 0; t < atoms; ++t) s += w * sol.density[t] * std::conj(chars[k][t]);
    return s;
  };
  Eigen::VectorXd b(dim);
  for (std::size_t k = 0; k < m; ++k) {
    b(2 * k) = z[k].real();
    b(2 * k + 1) = z[k].imag();
  }
  // Each feasible candidate is a valid primal; the support threshold decides
  // how many nearly tight atoms take part, so try several and keep the best.
  auto recover = [&](double cutoff) -> std::optional<std::vector<cplx>> {
    std::vector<std::size_t> active;
    for (std::size_t t = 0; t < atoms; ++t)
      if (rho[t] > cutoff * rho_max && std::abs(p[t]) > 0.0) active.push_back(t);
    if (active.empty()) return std::nullopt;
    Eigen::MatrixXd A(dim, active.size());
    Eigen::VectorXd r0(active.size());
    for (std::size_t a = 0; a < active.size(); ++a) {
      const std::size_t t = active[a];
      const cplx phase = p[t] / std::abs(p[t]);
      r0(a) = rho[t];
      for (std::size_t k = 0; k < m; ++k) {
        const cplx v = w * phase * std::conj(chars[k][t]);
        A(2 * k, a) = v.real();
        A(2 * k + 1, a) = v.imag();
      }
    }
    // Atoms driven negative are dropped and the correction redone.
    std::vector<char> keep(active.size(), 1);
    Eigen::VectorXd r1;
    for (int round = 0; round < 32; ++round) {
      Eigen::MatrixXd Ak = A;
      for (std::size_t a = 0; a < active.size(); ++a)
        if (!keep[a]) Ak.col(a).setZero();
      r1 = r0;
      for (std::size_t a = 0; a < active.size(); ++a)
        if (!keep[a]) r1(a) = 0.0;
      const auto cod = Ak.completeOrthogonalDecomposition();
      for (int pass = 0; pass < 2; ++pass) r1 += cod.solve(b - Ak * r1);
      bool dropped = false;
      for (std::size_t a = 0; a < active.size(); ++a)
        if (keep[a] && r1(a) < 0.0) {
          keep[a] = 0;
          dropped = true;
        }
      if (!dropped) break;
    }
    if (r1.minCoeff() < 0.0 || (A * r1 - b).lpNorm<Eigen::Infinity>() >= 1e-12) return std::nullopt;
    std::vector<cplx> u(atoms, cplx{});
    for (std::size_t a = 0; a < active.size(); ++a)
      u[active[a]] = r1(a) * p[active[a]] / std::abs(p[active[a]]);
    return u;
  };
  auto l1 = [&](const std::vector<cplx>& u) {
    double s = 0.0;
    for (const auto& v : u) s += w * std::abs(v);
    return s;
  };
  // Iteratively reweighted least squares from the barrier moduli: each step
  // is exactly feasible and does not increase the l1 norm.
  auto reweighted = [&]() -> std::optional<std::vector<cplx>> {
    std::vector<double> r(rho);
    std::vector<cplx> u(atoms);
    Eigen::VectorXcd zc(m);
    for (std::size_t k = 0; k < m; ++k) zc(k) = z[k];
    for (int it = 0; it < 400; ++it) {
      const double floor = 1e-14 * *std::max_element(r.begin(), r.end());
      Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(m, m);
      for (std::size_t t = 0; t < atoms; ++t) {
        const double rt = std::max(r[t], floor);
        for (std::size_t k = 0; k < m; ++k)
          for (std::size_t l = 0; l < m; ++l) gram(k, l) += w * rt * std::conj(chars[k][t]) * chars[l][t];
      }
      const Eigen::VectorXcd c = gram.fullPivLu().solve(zc);
      if (!c.allFinite()) return std::nullopt;
      double change = 0.0;
      for (std::size_t t = 0; t < atoms; ++t) {
        cplx s{};
        for (std::size_t l = 0; l < m; ++l) s += c(l) * chars[l][t];
        u[t] = std::max(r[t], floor) * s;
        change = std::max(change, std::abs(std::abs(u[t]) - r[t]));
        r[t] = std::abs(u[t]);
      }
      if (change < 1e-15) break;
    }
    for (std::size_t k = 0; k < m; ++k) {
      cplx s{};
      for (std::size_t t = 0; t < atoms; ++t) s += w * u[t] * std::conj(chars[k][t]);
      if (std::abs(s - z[k]) > 1e-12) return std::nullopt;
    }
    return u;
  };
  bool slack_ok = false;
  if (auto u = reweighted()) {
    sol.density = std::move(*u);
    slack_ok = true;
  }
  for (double cutoff : {1e-9, 1e-6, 1e-4, 1e-3, 1e-2, 1e-1}) {
    auto u = recover(cutoff);
    if (!u) continue;
    if (!slack_ok || l1(*u) < l1(sol.density)) sol.density = std::move(*u);
    slack_ok = true;
  }
  if (!slack_ok) {
    // Fall back to the barrier density projected onto the constraints;
    // characters are orthonormal in L2(w).
    for (std::size_t t = 0; t < atoms; ++t) sol.density[t] = 2.0 * mu * p[t] / (1.0 - std::norm(p[t]));
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < m; ++k) {
        const cplx delta = z[k] - coefficient(k);
        for (std::size_t t = 0; t < atoms; ++t) sol.density[t] += delta * chars[k][t];
      }
  }
  for (std::size_t k = 0; k < m; ++k)
    sol.constraint_residual = std::max(sol.constraint_residual, std::abs(coefficient(k) - z[k]));
  for (const auto& u : sol.density) sol.primal_value += w * std::abs(u);
  sol.gap = sol.primal_value - sol.dual_value;
  if (sol.gap < -1e-9) throw CertificateFailure("weak duality violated");
  if (sol.gap > opt.tol * std::max(sol.primal_value, 1e-300) && sol.gap > 1e-12)
    throw ToleranceNotMet("interpolation gap " + std::to_string(sol.gap) + " above tolerance",
                          sol.primal_value, sol.dual_value);
  return sol;
}

inline InterpolationSolution interpolate_l1(const FreqSet& L, const std::vector<cplx>& z,
                                            const InterpolationOptions& opt = {}) {
  return interpolate_l1(L.group(), L.elements(), z, opt);
}

struct SidonSearch {
  double certified_lower_bound = 0.0;  // max dual value
  double best_primal = 0.0;            // max primal value
  std::vector<cplx> best_phases;
  std::size_t sign_patterns = 0;
  std::size_t phase_samples = 0;
  std::uint64_t seed = 0;
};

/// Max over sampled targets z of the interpolation norm. Sign patterns with
/// z_0 = +1 are enumerated when |L| <= 16; random phases follow, sample i
/// drawn from stream (seed, i), so a larger sample never lowers the bound.
inline SidonSearch sidon_constant_search(const GroupSpec& G, const std::vector<Element>& L,
                                         std::size_t phase_samples, std::uint64_t seed,
                                         const InterpolationOptions& opt = {}) {
  if (L.empty()) throw DomainError("empty character set");
  const std::size_t m = L.size();
  std::vector<std::vector<cplx>> targets;
  if (m <= 16) {
    for (std::uint32_t mask = 0; mask < (1u << (m - 1)); ++mask) {
      std::vector<cplx> z(m, cplx(1.0));
      for (std::size_t i = 1; i < m; ++i)
        if (mask >> (i - 1) & 1u) z[i] = -1.0;
      targets.push_back(std::move(z));
    }
  }
  const std::size_t patterns = targets.size();
  for (std::size_t s = 0; s < phase_samples; ++s) {
    auto rng = make_rng(seed, s);
    std::vector<cplx> z(m);
    for (auto& c : z) c = std::polar(1.0, kTwoPi * uniform01(rng));
    targets.push_back(std::move(z));
  }
  std::vector<InterpolationSolution> sols(targets.size());
  parallel_for(targets.size(), [&](std::size_t i) { sols[i] = interpolate_l1(G, L, targets[i], opt); });
  SidonSearch out;
  out.sign_patterns = patterns;
  out.phase_samples = phase_samples;
  out.seed = seed;
  for (std::size_t i = 0; i < sols.size(); ++i) {
    if (sols[i].dual_value > out.certified_lower_bound) {
      out.certified_lower_bound = sols[i].dual_value;
      out.best_phases = targets[i];
    }
    out.best_primal = std::max(out.best_primal, sols[i].primal_value);
  }
  return out;
}

inline SidonSearch sidon_constant_search(const FreqSet& L, std::size_t phase_samples,
                                         std::uint64_t seed, const InterpolationOptions& opt = {}) {
  return sidon_constant_search(L.group(), L.elements(), phase_samples, seed, opt);
}

}  // namespace thinset
