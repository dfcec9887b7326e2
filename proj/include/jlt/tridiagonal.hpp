#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jlt/error.hpp"
#include "jlt/jacobi.hpp"

namespace jlt {

/// Real symmetric tridiagonal matrix: diag has n entries, off has n - 1.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }

  double scale() const {
    double s = 0.0;
    for (double d : diag) s = std::max(s, std::abs(d));
    for (double e : off) s = std::max(s, std::abs(e));
    return s;
  }

  // Gershgorin enclosure of the spectrum.
  std::pair<double, double> gershgorin() const {
    double lo = INFINITY, hi = -INFINITY;
    const std::size_t n = diag.size();
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0;
      if (i > 0) r += std::abs(off[i - 1]);
      if (i + 1 < n) r += std::abs(off[i]);
      lo = std::min(lo, diag[i] - r);
      hi = std::max(hi, diag[i] + r);
    }
    return {lo, hi};
  }
};

namespace detail {

inline double pivot_floor(double max_off_sq) {
  return std::numeric_limits<double>::min() * std::max(1.0, max_off_sq);
}

inline double max_off_sq(const std::vector<double>& off) {
  double m = 0.0;
  for (double e : off) m = std::max(m, e * e);
  return m;
}

}  // namespace detail

/// Sturm count: number of eigenvalues strictly below x, from the signs of the
/// LDL^T pivots of T - x.
inline std::size_t sturm_count(const Tridiagonal& t, double x) {
  const std::size_t n = t.diag.size();
  if (n == 0) return 0;
  const double pivmin = detail::pivot_floor(detail::max_off_sq(t.off));
  std::size_t count = 0;
  double q = t.diag[0] - x;
  for (std::size_t i = 0;; ++i) {
    if (std::abs(q) <= pivmin) q = -pivmin;
    if (q < 0.0) ++count;
    if (i + 1 == n) break;
    q = (t.diag[i + 1] - x) - t.off[i] * t.off[i] / q;
  }
  return count;
}

namespace detail {

// Recursive bisection on a bracket [lo, hi] holding (chi - clo) eigenvalues.
template <typename Count>
void isolate(const Count& count, double lo, double hi, std::size_t clo, std::size_t chi,
             double abs_tol, std::vector<double>& out) {
  if (chi <= clo) return;
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= abs_tol || mid <= lo || mid >= hi) {
      out.insert(out.end(), chi - clo, mid);
      return;
    }
    const std::size_t cm = count(mid);
    if (cm <= clo) {
      lo = mid;
    } else if (cm >= chi) {
      hi = mid;
    } else {
      isolate(count, lo, mid, clo, cm, abs_tol, out);
      lo = mid;
      clo = cm;
    }
  }
}

template <typename Count>
std::vector<double> bisect_all(const Count& count, double lo, double hi, double abs_tol) {
  std::vector<double> out;
  const std::size_t clo = count(lo);
  const std::size_t chi = count(hi);
  isolate(count, lo, hi, clo, chi, abs_tol, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Eigenvalues of t in the open interval (lo, hi), by Sturm bisection. Either
/// end may be infinite; it is replaced by the Gershgorin bound.
inline std::vector<double> tridiagonal_eigenvalues(const Tridiagonal& t, double lo, double hi) {
  if (!(lo < hi)) throw DomainError("empty interval");
  if (t.diag.size() != t.off.size() + 1 && !(t.diag.empty() && t.off.empty()))
    throw LengthMismatch("off must have one entry fewer than diag");
  if (t.diag.empty()) return {};
  const auto [glo, ghi] = t.gershgorin();
  const double scale = std::max(t.scale(), 1e-300);
  const double a = std::max(lo, glo - scale * 1e-12);
  const double b = std::min(hi, ghi + scale * 1e-12);
  if (!(a < b)) return {};
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() *
                     std::max({std::abs(a), std::abs(b), scale});
  auto count = [&t](double x) { return sturm_count(t, x); };
  std::vector<double> ev = detail::bisect_all(count, a, b, tol);
  // Drop anything that landed on the open endpoints.
  std::erase_if(ev, [&](double v) { return !(v > lo && v < hi); });
  return ev;
}

inline std::vector<double> tridiagonal_eigenvalues(const std::vector<double>& diag,
                                                   const std::vector<double>& off,
                                                   std::pair<double, double> interval) {
  return tridiagonal_eigenvalues(Tridiagonal{diag, off}, interval.first, interval.second);
}

/// Householder reduction of a Hermitian matrix to real symmetric tridiagonal
/// form. The complex off-diagonal left by the reflections is made real by a
/// diagonal unitary scaling, which only keeps the moduli.
inline Tridiagonal householder_tridiagonalize(Matrix a) {
  const Eigen::Index n = a.rows();
  Tridiagonal t;
  if (n == 0) return t;
  for (Eigen::Index j = 0; j + 2 < n; ++j) {
    const Eigen::Index len = n - j - 1;
    Eigen::VectorXcd v = a.col(j).tail(len);
    const double xnorm = v.norm();
    if (xnorm == 0.0) continue;
    const Complex x0 = v(0);
    const Complex phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Complex(1.0, 0.0);
    const Complex alpha = -phase * xnorm;
    v(0) -= alpha;
    const double vv = v.squaredNorm();
    if (vv == 0.0) continue;
    const double tau = 2.0 / vv;
    auto sub = a.bottomRightCorner(len, len);
    Eigen::VectorXcd w = tau * (sub * v);
    const Complex kappa = 0.5 * tau * v.dot(w);
    Eigen::VectorXcd q = w - kappa * v;
    sub.noalias() -= v * q.adjoint() + q * v.adjoint();
    // Column j below the diagonal becomes alpha * e_1.
    a.col(j).tail(len).setZero();
    a.row(j).tail(len).setZero();
    a(j + 1, j) = alpha;
    a(j, j + 1) = std::conj(alpha);
  }
  t.diag.resize(static_cast<std::size_t>(n));
  t.off.resize(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) t.diag[static_cast<std::size_t>(i)] = a(i, i).real();
  for (Eigen::Index i = 0; i + 1 < n; ++i) t.off[static_cast<std::size_t>(i)] = std::abs(a(i + 1, i));
  return t;
}

/// All eigenvalues of a symmetric tridiagonal matrix by the implicit QL
/// algorithm with Wilkinson shifts. Independent of the bisection path and used
/// as its reference.
inline std::vector<double> ql_eigenvalues(Tridiagonal t, int max_iter = 60) {
  const std::size_t n = t.diag.size();
  std::vector<double>& d = t.diag;
  std::vector<double> e(n, 0.0);
  std::copy(t.off.begin(), t.off.end(), e.begin());
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    for (;;) {
      std::size_t m = l;
      for (; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (++iter > max_iter) throw NoConvergence("QL iteration limit");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      std::size_t i = m;
      bool deflated = false;
      while (i-- > l) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
      }
      if (deflated) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
  std::sort(d.begin(), d.end());
  return d;
}

/// Dense reference: Householder then QL.
inline std::vector<double> hermitian_eigenvalues(const Matrix& a) {
  return ql_eigenvalues(householder_tridiagonalize(a));
}

/// Number of negative eigenvalues of a small Hermitian matrix.
inline std::size_t hermitian_negative_count(const Matrix& a) {
  if (a.rows() == 1) return a(0, 0).real() < 0.0 ? 1 : 0;
  return sturm_count(householder_tridiagonalize(a), 0.0);
}

/// Block tridiagonal Hermitian matrix: diagonal blocks B[i], upper blocks A[i]
/// (between rows i and i + 1), lower blocks A[i]^*.
struct BlockTridiagonal {
  std::vector<Matrix> B;
  std::vector<Matrix> A;

  std::pair<double, double> gershgorin() const {
    double lo = INFINITY, hi = -INFINITY;
    const std::size_t n = B.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Index m = B[i].rows();
      for (Eigen::Index r = 0; r < m; ++r) {
        double rad = 0.0;
        for (Eigen::Index c = 0; c < m; ++c)
          if (c != r) rad += std::abs(B[i](r, c));
        if (i > 0) rad += A[i - 1].col(r).cwiseAbs().sum();
        if (i + 1 < n) rad += A[i].row(r).cwiseAbs().sum();
        lo = std::min(lo, B[i](r, r).real() - rad);
        hi = std::max(hi, B[i](r, r).real() + rad);
      }
    }
    return {lo, hi};
  }

  double scale() const {
    double s = 0.0;
    for (const Matrix& m : B) s = std::max(s, max_entry(m));
    for (const Matrix& m : A) s = std::max(s, max_entry(m));
    return s;
  }
};

/// Block Sturm count: eigenvalues below x from the inertia of the block LDL^*
/// pivots D_i = B_i - x - A_{i-1}^* D_{i-1}^{-1} A_{i-1}. For 1 x 1 blocks this
/// is exactly sturm_count. On free sites (B = 0, A = -I) the pivot is carried
/// in a fixed eigenbasis and each eigenvalue follows g -> -x - 1/g.
inline std::size_t block_sturm_count(const BlockTridiagonal& t, double x) {
  const std::size_t n = t.B.size();
  if (n == 0) return 0;
  const Eigen::Index m = t.B[0].rows();
  if (m == 1) {
    Tridiagonal s;
    for (const Matrix& b : t.B) s.diag.push_back(b(0, 0).real());
    for (const Matrix& a : t.A) s.off.push_back(std::abs(a(0, 0)));
    return sturm_count(s, x);
  }
  double off_sq = 0.0;
  for (const Matrix& a : t.A) off_sq = std::max(off_sq, a.squaredNorm());
  const double pivmin = std::sqrt(detail::pivot_floor(off_sq));
  const Matrix I = Matrix::Identity(m, m);
  auto site_free = [&](std::size_t i) {
    return t.B[i].isZero(0.0) && (i == 0 || (t.A[i - 1] + I).isZero(0.0));
  };

  std::size_t count = 0;
  bool diag = false;
  Matrix V = I, D;
  Eigen::VectorXd g(m);
  Eigen::PartialPivLU<Matrix> lu;
  for (std::size_t i = 0; i < n; ++i) {
    if (site_free(i)) {
      if (i == 0) {
        V = I;
        g.setConstant(-x);
      } else {
        if (!diag) {
          Eigen::SelfAdjointEigenSolver<Matrix> es(D);
          V = es.eigenvectors();
          g = es.eigenvalues();
        }
        for (Eigen::Index j = 0; j < m; ++j) g(j) = -x - 1.0 / g(j);
      }
      diag = true;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (std::abs(g(j)) < pivmin) g(j) = -pivmin;
        if (g(j) < 0.0) ++count;
      }
      continue;
    }
    Matrix next;
    if (i == 0) {
      next = t.B[0] - x * I;
    } else if (diag) {
      const Matrix W = V.adjoint() * t.A[i - 1];
      next = t.B[i] - x * I - W.adjoint() * g.cwiseInverse().cast<Complex>().asDiagonal() * W;
    } else {
      next = t.B[i] - x * I - t.A[i - 1].adjoint() * lu.solve(t.A[i - 1]);
    }
    diag = false;
    D = 0.5 * (next + next.adjoint());
    lu.compute(D);
    if (!(std::abs(lu.determinant()) > pivmin)) {
      D -= pivmin * I;
      lu.compute(D);
    }
    count += hermitian_negative_count(D);
  }
  return count;
}

/// Eigenvalues of a block tridiagonal Hermitian matrix in (lo, hi), repeated
/// according to multiplicity.
inline std::vector<double> block_tridiagonal_eigenvalues(const BlockTridiagonal& t, double lo,
                                                         double hi) {
  if (t.B.empty()) return {};
  const auto [glo, ghi] = t.gershgorin();
  const double scale = std::max(t.scale(), 1e-300);
  const double a = std::max(lo, glo - scale * 1e-12);
  const double b = std::min(hi, ghi + scale * 1e-12);
  if (!(a < b)) return {};
  const double tol = 8.0 * std::numeric_limits<double>::epsilon() *
                     std::max({std::abs(a), std::abs(b), scale});
  auto count = [&t](double x) { return block_sturm_count(t, x); };
  std::vector<double> ev = detail::bisect_all(count, a, b, tol);
  std::erase_if(ev, [&](double v) { return !(v > lo && v < hi); });
  return ev;
}

/// Dense Hermitian matrix of a block tridiagonal (for reference checks).
inline Matrix to_dense(const BlockTridiagonal& t) {
  const std::size_t n = t.B.size();
  if (n == 0) return Matrix();
  const Eigen::Index m = t.B[0].rows();
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(n) * m, static_cast<Eigen::Index>(n) * m);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Index r = static_cast<Eigen::Index>(i) * m;
    d.block(r, r, m, m) = t.B[i];
    if (i + 1 < n) {
      d.block(r, r + m, m, m) = t.A[i];
      d.block(r + m, r, m, m) = t.A[i].adjoint();
    }
  }
  return d;
}

inline Matrix to_dense(const Tridiagonal& t) {
  const std::size_t n = t.diag.size();
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    d(k, k) = t.diag[i];
    if (i + 1 < n) d(k, k + 1) = d(k + 1, k) = t.off[i];
  }
  return d;
}

}  // namespace jlt
