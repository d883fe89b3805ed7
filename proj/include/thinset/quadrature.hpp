#pragma once

// Gauss-Hermite rules for the standard normal measure.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "thinset/error.hpp"

namespace thinset {

struct GaussRule {
  std::vector<double> nodes;    // increasing
  std::vector<double> weights;  // sum to 1
};

namespace detail {

// Orthonormal Hermite polynomials h_k for N(0,1), rescaled on the fly so
// high degrees stay in range: returns (h_{n-1}(x), h_n(x)) / e^scale and scale.
struct ScaledHermite {
  double prev, cur, log_scale;
};

inline ScaledHermite scaled_hermite(int n, double x) {
  double prev = 0.0, cur = 1.0, log_scale = 0.0;
  for (int k = 0; k < n; ++k) {
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                        std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
    if (std::abs(cur) > 1e100) {
      prev *= 1e-100;
      cur *= 1e-100;
      log_scale += 100.0 * std::log(10.0);
    }
  }
  return {prev, cur, log_scale};
}

}  // namespace detail

/// n-point rule exact for polynomials of degree <= 2n-1 against the standard
/// normal density. Nodes come from the Jacobi matrix and are polished by
/// Newton steps; weights use the Christoffel formula 1/(n h_{n-1}(x)^2).
inline GaussRule gauss_hermite(int n) {
  if (n < 1) throw DomainError("quadrature needs at least one node");
  GaussRule rule;
  if (n == 1) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
    return rule;
  }
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    for (int it = 0; it < 4; ++it) {
      const auto h = detail::scaled_hermite(n, x);
      const double step = h.cur / (std::sqrt(static_cast<double>(n)) * h.prev);
      x -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    const auto h = detail::scaled_hermite(n, x);
    rule.nodes[i] = x;
    rule.weights[i] = std::exp(-2.0 * std::log(std::abs(h.prev)) - 2.0 * h.log_scale) / n;
  }
  // Symmetrize and normalize away the last rounding.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2) rule.nodes[n / 2] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

}  // namespace thinset
