#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "jlt/error.hpp"
#include "jlt/jacobi.hpp"
#include "jlt/quadrature.hpp"
#include "jlt/special.hpp"
#include "jlt/tridiagonal.hpp"

namespace jlt {

enum class InequalityName { final, finalmatrix, hsmain, hs1, hs2, orderalpha, hsfree, hsfree2 };

inline const char* to_string(InequalityName n) {
  switch (n) {
    case InequalityName::final: return "final";
    case InequalityName::finalmatrix: return "finalmatrix";
    case InequalityName::hsmain: return "hsmain";
    case InequalityName::hs1: return "hs1";
    case InequalityName::hs2: return "hs2";
    case InequalityName::orderalpha: return "orderalpha";
    case InequalityName::hsfree: return "hsfree";
    case InequalityName::hsfree2: return "hsfree2";
  }
  return "?";
}

inline InequalityName inequality_from_string(const std::string& s) {
  for (auto n : {InequalityName::final, InequalityName::finalmatrix, InequalityName::hsmain,
                 InequalityName::hs1, InequalityName::hs2, InequalityName::orderalpha,
                 InequalityName::hsfree, InequalityName::hsfree2}) {
    if (s == to_string(n)) return n;
  }
  throw InputError("unknown inequality '" + s + "'");
}

inline bool needs_gamma(InequalityName n) {
  return n == InequalityName::hs1 || n == InequalityName::hs2 || n == InequalityName::orderalpha ||
         n == InequalityName::hsfree || n == InequalityName::hsfree2;
}

namespace detail {

// x - 1 - log x, accurate near x = 1.
inline double x_minus_1_minus_log(double x) {
  const double u = x - 1.0;
  if (std::abs(u) < 1e-4) {
    return u * u * (0.5 + u * (-1.0 / 3.0 + u * (0.25 + u * (-0.2 + u / 6.0))));
  }
  return u - std::log1p(u);
}

// Odd power series sum_{n >= n0} c(n) L^(2n+1); every c(n) used is positive,
// so the sum is free of cancellation.
template <typename Coef>
double odd_series(double L, int n0, const Coef& c) {
  double s = 0.0;
  double p = std::pow(L, 2 * n0 + 1);
  for (int n = n0; n < n0 + 60; ++n) {
    const double t = c(n) * p;
    s += t;
    if (std::abs(t) <= 1e-18 * std::abs(s)) break;
    p *= L * L;
  }
  return s;
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

constexpr double kSeriesSwitch = 1.5;  // in L = log|k|

}  // namespace detail

/// k^2 - 1/k^2 - log k^4 for |k| >= 1, i.e. 2(sinh 2L - 2L) with L = log|k|.
/// For small L the leading orders cancel, so the Taylor series in L is summed.
inline double k_functional(double k) {
  const double x = std::abs(k);
  if (x < 1.0) throw DomainError("|k| must be at least 1");
  const double L = std::log(x);
  if (L < detail::kSeriesSwitch) {
    return detail::odd_series(L, 1, [](int n) { return 2.0 * std::pow(2.0, 2 * n + 1) / detail::factorial(2 * n + 1); });
  }
  return x * x - 1.0 / (x * x) - 4.0 * L;
}

inline double k_functional(const SpectralPoint& p) { return k_functional(p.k); }

/// G_gamma(lambda) = int_2^lambda (E^2 - 4)^(1/2) (lambda - E)^(gamma - 3/2) dE.
///
/// With t = (E - 2)/(lambda - 2) and h = lambda - 2,
///   G = h^gamma int_0^1 t^(1/2) (1 - t)^(gamma - 3/2) sqrt(4 + h t) dt.
/// The two endpoint panels carry the algebraic weights exactly (Gauss-Jacobi);
/// the interior is adaptive Gauss-Legendre.
inline double g_gamma(double gamma, double lambda, double tol = 1e-13) {
  if (!(gamma > 0.5)) throw DomainError("G_gamma needs gamma > 1/2");
  if (lambda == 2.0) return 0.0;
  if (!(lambda > 2.0)) throw DomainError("G_gamma needs lambda > 2");
  const double h = lambda - 2.0;
  const double beta = gamma - 1.5;
  const double t1 = std::min(0.25, 4.0 / h);
  const double t2 = 0.75;
  const double left = gauss_jacobi_endpoint(
      [&](double t) { return std::pow(1.0 - t, beta) * std::sqrt(4.0 + h * t); }, 0.5, t1, tol);
  const double mid = adaptive_gauss_legendre(
      [&](double t) { return std::sqrt(t) * std::pow(1.0 - t, beta) * std::sqrt(4.0 + h * t); }, t1, t2,
      tol);
  const double right = gauss_jacobi_endpoint(
      [&](double s) { return std::sqrt(1.0 - s) * std::sqrt(4.0 + h * (1.0 - s)); }, beta, 1.0 - t2, tol);
  return std::pow(h, gamma) * (left + mid + right);
}

/// Closed forms of G_gamma in the spectral parameter for gamma = 3/2, 5/2, 7/2.
/// With L = log|k|:
///   G_{5/2} = 3 sinh L + sinh(3L)/3 - 4L cosh L
///   G_{7/2} = sinh(4L)/6 + 14 sinh(2L)/3 - 4L cosh(2L) - 6L
inline double g_gamma_closed(double gamma, double k) {
  const double x = std::abs(k);
  if (!(x > 1.0)) throw DomainError("|k| must exceed 1");
  const double L = std::log(x);
  const bool series = L < detail::kSeriesSwitch;
  using detail::factorial;
  if (gamma == 1.5) return 0.5 * k_functional(x);
  if (gamma == 2.5) {
    if (series) {
      return detail::odd_series(L, 2, [](int n) {
        return (3.0 + std::pow(3.0, 2 * n + 1) / 3.0) / factorial(2 * n + 1) - 4.0 / factorial(2 * n);
      });
    }
    return 1.5 * (x - 1.0 / x) + (x * x * x - 1.0 / (x * x * x)) / 6.0 - 2.0 * L * (x + 1.0 / x);
  }
  if (gamma == 3.5) {
    if (series) {
      return detail::odd_series(L, 3, [](int n) {
        return (std::pow(4.0, 2 * n + 1) / 6.0 + 14.0 / 3.0 * std::pow(2.0, 2 * n + 1)) / factorial(2 * n + 1) -
               4.0 * std::pow(2.0, 2 * n) / factorial(2 * n);
      });
    }
    const double x2 = x * x;
    return (x2 * x2 - 1.0 / (x2 * x2)) / 12.0 + 7.0 / 3.0 * (x2 - 1.0 / x2) - 2.0 * L * (x2 + 1.0 / x2) -
           6.0 * L;
  }
  throw UnsupportedGamma("closed form only for gamma in {3/2, 5/2, 7/2}");
}

/// The same closed forms written in |lambda| (gamma = 3/2, 5/2).
inline double g_gamma_lambda_form(double gamma, double lambda) {
  const double l = std::abs(lambda);
  if (!(l > 2.0)) throw DomainError("|lambda| must exceed 2");
  const double r = std::sqrt((l - 2.0) * (l + 2.0));
  const double lg = std::log(l + r);
  if (gamma == 1.5) return 2.0 * std::log(2.0) + 0.5 * l * r - 2.0 * lg;
  if (gamma == 2.5) {
    return 2.0 * l * std::log(2.0) + 0.5 * l * l * r - 2.0 * l * lg - r * r * r / 3.0;
  }
  throw UnsupportedGamma("lambda form only for gamma in {3/2, 5/2}");
}

/// G_1 against its two power-law lower bounds: R1 against (lambda - 2)/d_1,
/// R2 against (lambda - 2)^(3/2), both after dividing G by B(1/2, 2).
struct PowerBoundRatios {
  double G = 0.0;
  double R1 = 0.0;
  double R2 = 0.0;
};

inline PowerBoundRatios power_bound_ratios(double lambda, double tol = 1e-13) {
  if (!(lambda > 2.0)) throw DomainError("power bound ratios need lambda > 2");
  PowerBoundRatios r;
  r.G = g_gamma(1.0, lambda, tol);
  const double norm = r.G / beta_fn(0.5, 2.0);
  const double h = lambda - 2.0;
  r.R1 = norm / (h / d_gamma(1.0));
  r.R2 = norm / std::pow(h, 1.5);
  return r;
}

// ---------------------------------------------------------------------------
// Left-hand sides

inline double lhs_term(InequalityName name, const SpectralPoint& p, double gamma) {
  const double x = std::abs(p.k);
  const double dist = (x - 1.0) * (x - 1.0) / x;  // |lambda| - 2
  switch (name) {
    case InequalityName::final:
    case InequalityName::finalmatrix:
      return k_functional(x);
    case InequalityName::hsmain:
      return x - 1.0 / x;  // sqrt(lambda^2 - 4)
    case InequalityName::hs1:
    case InequalityName::hsfree:
      return std::pow(dist, gamma);
    case InequalityName::hs2:
    case InequalityName::hsfree2:
      return std::pow(dist, gamma + 0.5);
    case InequalityName::orderalpha:
      return g_gamma(gamma, std::abs(p.lambda));
  }
  return 0.0;
}

inline double lhs_sum(InequalityName name, const std::vector<SpectralPoint>& pts, double gamma) {
  double s = 0.0;
  for (const auto& p : pts) s += p.multiplicity * lhs_term(name, p, gamma);
  return s;
}

// ---------------------------------------------------------------------------
// Right-hand sides

struct RhsBreakdown {
  double potential_term = 0.0;
  double offdiag_term = 0.0;
  double total = 0.0;
};

struct RhsOptions {
  double gamma = 1.0;
  // hs1 / hs2 with a == -1: use d_gamma, drop 3^(gamma - 1/2).
  bool free_constants = false;
};

inline bool is_discrete_schroedinger(const JacobiOperator& op) {
  for (double a : op.a)
    if (a != -1.0) return false;
  return true;
}

inline bool is_discrete_schroedinger(const BlockJacobiOperator& op) {
  const Matrix I = -Matrix::Identity(op.block_dim, op.block_dim);
  for (const Matrix& a : op.A)
    if (a != I) return false;
  return true;
}

inline RhsBreakdown rhs_scalar(const JacobiOperator& op, InequalityName which, const RhsOptions& opt = {}) {
  const double g = opt.gamma;
  if (needs_gamma(which) && !(g >= 0.5)) throw DomainError("gamma must be at least 1/2");
  if (which == InequalityName::orderalpha && !(g > 0.5)) throw DomainError("orderalpha needs gamma > 1/2");
  const bool free = is_discrete_schroedinger(op);
  if (opt.free_constants && !free) throw DomainError("free constants need a == -1");
  RhsBreakdown r;
  auto power_sums = [&](double p) {
    double sb = 0.0, sa = 0.0;
    for (double b : op.b) sb += std::pow(std::abs(b), p);
    for (double a : op.a) sa += std::pow(std::abs(a + 1.0), p);
    return std::pair{sb, 4.0 * sa};
  };
  switch (which) {
    case InequalityName::final:
    case InequalityName::finalmatrix: {
      for (double b : op.b) r.potential_term += b * b;
      for (double a : op.a) r.offdiag_term += 2.0 * detail::x_minus_1_minus_log(a * a);
      break;
    }
    case InequalityName::hsmain: {
      auto [sb, sa] = power_sums(1.0);
      r.potential_term = sb;
      r.offdiag_term = sa;
      break;
    }
    case InequalityName::hs1:
    case InequalityName::hs2: {
      auto [sb, sa] = power_sums(g + 0.5);
      double c;
      if (which == InequalityName::hs1) {
        c = opt.free_constants ? d_gamma(g) : c_gamma(g);
      } else {
        c = opt.free_constants ? 1.0 : std::pow(3.0, g - 0.5);
      }
      r.potential_term = c * sb;
      r.offdiag_term = c * sa;
      break;
    }
    case InequalityName::orderalpha: {
      auto [sb, sa] = power_sums(g + 0.5);
      const double c = beta_fn(g - 0.5, 2.0) * (free ? 1.0 : std::pow(3.0, g - 0.5));
      r.potential_term = c * sb;
      r.offdiag_term = c * sa;
      break;
    }
    case InequalityName::hsfree:
    case InequalityName::hsfree2: {
      if (!free) throw DomainError(std::string(to_string(which)) + " needs a == -1");
      auto [sb, sa] = power_sums(g + 0.5);
      r.potential_term = (which == InequalityName::hsfree ? d_gamma(g) : 1.0) * sb;
      break;
    }
  }
  r.total = r.potential_term + r.offdiag_term;
  return r;
}

inline double trace_abs_power(const Matrix& B, double p) {
  double s = 0.0;
  for (double mu : hermitian_eigenvalues(0.5 * (B + B.adjoint()))) s += std::pow(std::abs(mu), p);
  return s;
}

/// Block right-hand sides. finalmatrix: sum tr B^2 + 2 sum [tr(AA^* - I) - log det AA^*];
/// orderalpha / hsfree / hsfree2 need A == -I.
inline RhsBreakdown rhs_block(const BlockJacobiOperator& op, InequalityName which = InequalityName::finalmatrix,
                              const RhsOptions& opt = {}) {
  RhsBreakdown r;
  const double g = opt.gamma;
  switch (which) {
    case InequalityName::final:
    case InequalityName::finalmatrix: {
      for (const Matrix& B : op.B) r.potential_term += (B * B).trace().real();
      for (const Matrix& A : op.A) {
        for (double x : hermitian_eigenvalues(A * A.adjoint())) {
          if (!(x > 0.0)) throw SingularBlock("A A^* not positive definite");
          r.offdiag_term += 2.0 * detail::x_minus_1_minus_log(x);
        }
      }
      break;
    }
    case InequalityName::orderalpha:
    case InequalityName::hsfree:
    case InequalityName::hsfree2: {
      if (!is_discrete_schroedinger(op)) throw DomainError(std::string(to_string(which)) + " needs A == -I");
      if (!(g > 0.5) && which == InequalityName::orderalpha) throw DomainError("orderalpha needs gamma > 1/2");
      double s = 0.0;
      for (const Matrix& B : op.B) s += trace_abs_power(B, g + 0.5);
      const double c = which == InequalityName::orderalpha ? beta_fn(g - 0.5, 2.0)
                       : which == InequalityName::hsfree   ? d_gamma(g)
                                                           : 1.0;
      r.potential_term = c * s;
      break;
    }
    default:
      throw DomainError(std::string(to_string(which)) + " is a scalar inequality");
  }
  r.total = r.potential_term + r.offdiag_term;
  return r;
}

}  // namespace jlt
