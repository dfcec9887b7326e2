#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "jlt/error.hpp"
#include "jlt/functional.hpp"
#include "jlt/jacobi.hpp"
#include "jlt/quadrature.hpp"
#include "jlt/special.hpp"
#include "jlt/spectrum.hpp"
#include "jlt/verify.hpp"

namespace jlt {

/// Natural cubic spline through (x_i, v_i); zero outside [x_0, x_last].
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> v) : x_(std::move(x)), v_(std::move(v)) {
    const std::size_t n = x_.size();
    if (n != v_.size() || n < 2) throw LengthMismatch("spline needs at least two matching samples");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1])) throw DomainError("spline abscissae must increase");
    // Second derivatives by the tridiagonal (Thomas) solve.
    m_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
      c[i] = h1 / diag;
      d[i] = (6.0 * ((v_[i + 1] - v_[i]) / h1 - (v_[i] - v_[i - 1]) / h0) - h0 * d[i - 1]) / diag;
    }
    for (std::size_t i = n - 1; i-- > 1;) m_[i] = d[i] - c[i] * m_[i + 1];
  }

  double operator()(double x) const {
    if (x_.empty() || x < x_.front() || x > x_.back()) return 0.0;
    const std::size_t i =
        std::min<std::size_t>(static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()),
                              x_.size() - 1);
    const std::size_t j = i - 1;
    const double h = x_[i] - x_[j];
    const double A = (x_[i] - x) / h, B = (x - x_[j]) / h;
    return A * v_[j] + B * v_[i] + ((A * A * A - A) * m_[j] + (B * B * B - B) * m_[i]) * h * h / 6.0;
  }

  const std::vector<double>& knots() const { return x_; }

 private:
  std::vector<double> x_, v_, m_;
};

enum class PotentialKind { poschl_teller, square_well, gaussian, tabulated };

/// Potential families. Non-positive for positive parameters.
///   poschl_teller(s):       -s(s+1) sech^2 x
///   square_well(depth, w):  -depth on |x| < w/2, -depth/2 on |x| = w/2
///   gaussian(depth, sigma): -depth exp(-x^2 / (2 sigma^2))
struct Potential {
  PotentialKind kind = PotentialKind::poschl_teller;
  double p1 = 1.0;
  double p2 = 1.0;
  CubicSpline table;

  static Potential poschl_teller(double s) {
    if (!(s > 0.0)) throw DomainError("poschl_teller needs s > 0");
    return {PotentialKind::poschl_teller, s, 0.0, {}};
  }
  static Potential square_well(double depth, double width) {
    if (!(width > 0.0)) throw DomainError("square_well needs width > 0");
    return {PotentialKind::square_well, depth, width, {}};
  }
  static Potential gaussian(double depth, double sigma) {
    if (!(sigma > 0.0)) throw DomainError("gaussian needs sigma > 0");
    return {PotentialKind::gaussian, depth, sigma, {}};
  }
  static Potential tabulated(std::vector<double> x, std::vector<double> v) {
    return {PotentialKind::tabulated, 0.0, 0.0, CubicSpline(std::move(x), std::move(v))};
  }

  double operator()(double x) const {
    switch (kind) {
      case PotentialKind::poschl_teller: {
        const double s = 1.0 / std::cosh(x);
        return -p1 * (p1 + 1.0) * s * s;
      }
      case PotentialKind::square_well: {
        const double ax = std::abs(x), h = 0.5 * p2;
        return ax < h ? -p1 : ax == h ? -0.5 * p1 : 0.0;
      }
      case PotentialKind::gaussian:
        return -p1 * std::exp(-x * x / (2.0 * p2 * p2));
      case PotentialKind::tabulated:
        return table(x);
    }
    return 0.0;
  }

  /// Exact bound-state energies where known (increasing).
  std::optional<std::vector<double>> exact_eigenvalues() const {
    if (kind != PotentialKind::poschl_teller) return std::nullopt;
    std::vector<double> mu;
    for (int j = 0; j < p1; ++j) mu.push_back(-(p1 - j) * (p1 - j));
    return mu;
  }

  /// integral of V_-^p over the real line; analytic for the named families.
  double negative_part_integral(double p, double domain = INFINITY) const {
    switch (kind) {
      case PotentialKind::poschl_teller:
        // integral sech^(2p) = B(p, 1/2)
        return std::pow(p1 * (p1 + 1.0), p) * beta_fn(p, 0.5);
      case PotentialKind::square_well:
        return p1 > 0.0 ? std::pow(p1, p) * p2 : 0.0;
      case PotentialKind::gaussian:
        return p1 > 0.0 ? std::pow(p1, p) * p2 * std::sqrt(2.0 * std::numbers::pi / p) : 0.0;
      case PotentialKind::tabulated: {
        auto f = [&](double x) { return std::pow(std::max(-table(x), 0.0), p); };
        const auto& kn = table.knots();
        const double lo = std::max(kn.front(), -domain), hi = std::min(kn.back(), domain);
        double s = 0.0;
        for (std::size_t i = 1; i < kn.size(); ++i) {
          const double a = std::max(kn[i - 1], lo), b = std::min(kn[i], hi);
          if (b > a) s += adaptive_gauss_legendre(f, a, b, 1e-12);
        }
        return s;
      }
    }
    return 0.0;
  }
};

struct ContinuumProblem {
  Potential potential;
  double domain = 12.0;  // grid covers [-domain, domain]
  double gamma = 1.5;
  double c = 0.5;        // d = (1 - c)/2

  double d() const { return 0.5 * (1.0 - c); }
};

/// W_k with b(n) = c k^-2 V(n/k), a(n) = -1 + d k^-2 V(n/k) on |n/k| <= domain.
/// Eigenvalues of H_k are k^2 (lambda + 2).
inline JacobiOperator discretize(const ContinuumProblem& p, Index k) {
  if (k < 1) throw DomainError("grid density k must be at least 1");
  if (!(p.c >= 0.0 && p.c <= 1.0)) throw DomainError("scheme constant c must lie in [0, 1]");
  if (!(p.domain > 0.0)) throw DomainError("domain must be positive");
  const double kd = static_cast<double>(k);
  const double inv_k2 = 1.0 / (kd * kd);
  const double d = p.d();
  const Index N = static_cast<Index>(std::floor(p.domain * kd + 1e-9));
  JacobiOperator op{-N, {}, {}};
  for (Index n = -N; n <= N; ++n) {
    const double v = p.potential(static_cast<double>(n) / kd);
    const double a = -1.0 + d * inv_k2 * v;
    if (!(a < 0.0)) {
      throw OffDiagonalSignLoss("a(" + std::to_string(n) + ") = " + std::to_string(a) + " at k = " + std::to_string(k));
    }
    op.a.push_back(a);
    op.b.push_back(p.c * inv_k2 * v);
  }
  return op;
}

constexpr double kContinuumSpectralTol = 1e-12;

/// mu approximations k^2 (lambda + 2) for the eigenvalues lambda < -2 of W_k,
/// increasing, with multiplicity.
inline std::vector<double> negative_eigenvalues(const ContinuumProblem& p, Index k) {
  const JacobiOperator op = discretize(p, k);
  const SpectrumResult s = eigenvalues_outside_band(op, kContinuumSpectralTol);
  const double k2 = static_cast<double>(k) * static_cast<double>(k);
  std::vector<double> mu;
  for (const auto& pt : s.points) {
    if (pt.lambda >= -2.0) continue;
    for (int i = 0; i < pt.multiplicity; ++i) mu.push_back(k2 * (pt.lambda + 2.0));
  }
  std::sort(mu.begin(), mu.end());
  return mu;
}

/// Constant the scheme is proved to satisfy for sum |mu|^gamma <= C int V_-^(gamma + 1/2);
/// NaN where none applies.
///   gamma = 1/2: 1/2 (sharp)
///   gamma = 3/2: (3/8)(c^2 + 4 d^2), equal to 3/16 at c = 1/2 and 3/8 at c = 1
///   gamma > 3/2, c = 1/2: the semiclassical constant
///   c = 1, or c = 1/3 with gamma < 3/2: 2 L^cl
inline double scheme_bound(double gamma, double c) {
  const double d = 0.5 * (1.0 - c);
  if (gamma == 0.5) return 0.5;
  if (gamma == 1.5) return 0.375 * (c * c + 4.0 * d * d);
  if (gamma > 1.5 && c == 0.5) return semiclassical_constant(gamma);
  if (c == 1.0 || (std::abs(c - 1.0 / 3.0) < 1e-12 && gamma > 0.5 && gamma < 1.5)) return d_gamma(gamma);
  return NAN;
}

struct ConvergenceRow {
  double gamma = 0.0;
  double c = 0.0;
  Index k = 0;
  std::vector<double> eigenvalues;  // mu, increasing
  double lhs = 0.0;                 // sum |mu|^gamma
  double rhs_integral = 0.0;        // int V_-^(gamma + 1/2)
  double ratio = 0.0;
  double bound = NAN;
  double margin = NAN;              // bound - ratio
  // (3/8) k^3 times the right-hand side of the logarithmic inequality on W_k,
  // divided by int V^2; tends to (3/8)(c^2 + 4 d^2) for smooth V.
  double scheme_constant = NAN;
  bool sign_loss = false;           // discretization failed; row carries no data
};

inline ConvergenceRow convergence_row(const ContinuumProblem& p, Index k, const std::vector<double>& mu) {
  ConvergenceRow r;
  r.gamma = p.gamma;
  r.c = p.c;
  r.k = k;
  r.eigenvalues = mu;
  for (double m : mu) r.lhs += std::pow(std::abs(m), p.gamma);
  r.rhs_integral = p.potential.negative_part_integral(p.gamma + 0.5, p.domain);
  r.ratio = r.rhs_integral > 0.0 ? r.lhs / r.rhs_integral : 0.0;
  r.bound = scheme_bound(p.gamma, p.c);
  r.margin = r.bound - r.ratio;
  return r;
}

inline double scheme_constant(const ContinuumProblem& p, Index k) {
  const JacobiOperator op = discretize(p, k);
  const double v2 = p.potential.negative_part_integral(2.0, p.domain);
  const double kd = static_cast<double>(k);
  return 0.375 * kd * kd * kd * rhs_scalar(op, InequalityName::final).total / v2;
}

/// Rows for every (gamma, k). Rows whose discretization loses the off-diagonal
/// sign are kept with sign_loss set.
inline std::vector<ConvergenceRow> constant_sweep(const ContinuumProblem& base, const std::vector<double>& gammas,
                                                  const std::vector<Index>& k_list) {
  for (std::size_t i = 1; i < k_list.size(); ++i)
    if (!(k_list[i] > k_list[i - 1])) throw DomainError("k_list must increase");
  std::vector<std::vector<double>> mus(k_list.size());
  std::vector<char> lost(k_list.size(), 0);
  std::vector<double> consts(k_list.size(), NAN);
  parallel_for(k_list.size(), [&](std::size_t i) {
    try {
      mus[i] = negative_eigenvalues(base, k_list[i]);
      if (base.potential.kind != PotentialKind::square_well) consts[i] = scheme_constant(base, k_list[i]);
    } catch (const OffDiagonalSignLoss&) {
      lost[i] = 1;
    }
  });
  std::vector<ConvergenceRow> rows;
  for (double g : gammas) {
    ContinuumProblem p = base;
    p.gamma = g;
    for (std::size_t i = 0; i < k_list.size(); ++i) {
      if (lost[i]) {
        ConvergenceRow r;
        r.gamma = g;
        r.c = p.c;
        r.k = k_list[i];
        r.sign_loss = true;
        rows.push_back(r);
        continue;
      }
      ConvergenceRow r = convergence_row(p, k_list[i], mus[i]);
      r.scheme_constant = consts[i];
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

/// Two-level Richardson extrapolation for an O(k^-2) error: values at k and 2k.
inline double richardson(double at_k, double at_2k) { return (4.0 * at_2k - at_k) / 3.0; }

}  // namespace jlt
