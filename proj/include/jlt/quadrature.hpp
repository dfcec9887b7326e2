#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "jlt/error.hpp"
#include "jlt/special.hpp"
#include "jlt/tridiagonal.hpp"

namespace jlt {

/// Nodes and weights on [0, 1] for the weight x^beta (beta > -1).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Golub-Welsch for the monic Jacobi recurrence with weight (1-x)^alpha (1+x)^beta
// on [-1, 1]. Nodes come from Sturm bisection of the Jacobi matrix; weights
// are the Christoffel numbers 1 / sum_k p_k(x)^2 of the orthonormal family.
inline QuadratureRule gauss_jacobi_pm1(int n, double alpha, double beta) {
  std::vector<double> diag(static_cast<std::size_t>(n)), off(static_cast<std::size_t>(n - 1));
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + alpha + beta;
    diag[static_cast<std::size_t>(k)] =
        (s == 0.0 || s + 2.0 == 0.0) ? (beta - alpha) / (alpha + beta + 2.0)
                                     : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double j = k + 1.0;
      const double t = 2.0 * j + alpha + beta;
      off[static_cast<std::size_t>(k)] =
          std::sqrt(4.0 * j * (j + alpha) * (j + beta) * (j + alpha + beta) / (t * t * (t + 1.0) * (t - 1.0)));
    }
  }
  if (n == 1) diag[0] = (beta - alpha) / (alpha + beta + 2.0);
  const double mu0 = std::pow(2.0, alpha + beta + 1.0) * beta_fn(alpha + 1.0, beta + 1.0);
  QuadratureRule r;
  r.nodes = tridiagonal_eigenvalues(Tridiagonal{diag, off}, -1.0, 1.0);
  if (static_cast<int>(r.nodes.size()) != n) throw NoConvergence("Gauss-Jacobi node count");
  for (double x : r.nodes) {
    double p_prev = 0.0, p = 1.0 / std::sqrt(mu0), sum = p * p;
    for (int k = 0; k + 1 < n; ++k) {
      const double b_prev = k > 0 ? off[static_cast<std::size_t>(k - 1)] : 0.0;
      const double p_next = ((x - diag[static_cast<std::size_t>(k)]) * p - b_prev * p_prev) /
                            off[static_cast<std::size_t>(k)];
      p_prev = p;
      p = p_next;
      sum += p * p;
    }
    r.weights.push_back(1.0 / sum);
  }
  return r;
}

}  // namespace detail

/// n-point rule for integral_0^1 x^beta f(x) dx, cached per (n, beta).
inline const QuadratureRule& gauss_jacobi_rule(int n, double beta) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({n, beta});
  if (it != cache.end()) return it->second;
  // x in [0,1] from y in [-1,1]: x = (1+y)/2, so (1+y)^beta = 2^beta x^beta.
  QuadratureRule pm = detail::gauss_jacobi_pm1(n, 0.0, beta);
  QuadratureRule r;
  const double scale = std::pow(0.5, beta + 1.0);
  for (std::size_t i = 0; i < pm.nodes.size(); ++i) {
    r.nodes.push_back(0.5 * (1.0 + pm.nodes[i]));
    r.weights.push_back(pm.weights[i] * scale);
  }
  return cache.emplace(std::make_pair(n, beta), std::move(r)).first->second;
}

inline const QuadratureRule& gauss_legendre_rule(int n) { return gauss_jacobi_rule(n, 0.0); }

/// Adaptive Gauss-Legendre on [a, b]: a panel is accepted when the 20-point
/// rule agrees with the sum over its two halves.
template <typename F>
double adaptive_gauss_legendre(const F& f, double a, double b, double rel_tol, int max_depth = 40) {
  const QuadratureRule& g = gauss_legendre_rule(20);
  auto panel = [&](double lo, double hi) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(lo + (hi - lo) * g.nodes[i]);
    return s * (hi - lo);
  };
  struct Seg {
    double lo, hi, val;
    int depth;
  };
  const double whole = panel(a, b);
  std::vector<Seg> stack{{a, b, whole, 0}};
  double total = 0.0;
  const double floor = 1e-300;
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (s.lo + s.hi);
    const double left = panel(s.lo, mid);
    const double right = panel(mid, s.hi);
    const double refined = left + right;
    if (std::abs(refined - s.val) <= rel_tol * std::max(std::abs(whole), floor) || s.depth >= max_depth) {
      total += refined;
    } else {
      stack.push_back({s.lo, mid, left, s.depth + 1});
      stack.push_back({mid, s.hi, right, s.depth + 1});
    }
  }
  return total;
}

/// integral_0^h s^beta g(s) ds with g smooth, by Gauss-Jacobi; the order is
/// doubled until two successive values agree.
template <typename F>
double gauss_jacobi_endpoint(const F& g, double beta, double h, double rel_tol) {
  auto eval = [&](int n) {
    const QuadratureRule& r = gauss_jacobi_rule(n, beta);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * g(h * r.nodes[i]);
    return s * std::pow(h, beta + 1.0);
  };
  double prev = eval(16);
  for (int n = 32; n <= 256; n *= 2) {
    const double cur = eval(n);
    if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace jlt
