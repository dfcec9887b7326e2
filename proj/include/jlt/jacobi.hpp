#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jlt/error.hpp"

namespace jlt {

using Index = std::int64_t;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Scalar Jacobi operator
///   (W u)(n) = a(n-1) u(n-1) + a(n) u(n+1) + b(n) u(n)
/// with a(n) = -1, b(n) = 0 outside [window_start, window_start + a.size()).
struct JacobiOperator {
  Index window_start = 0;
  std::vector<double> a;
  std::vector<double> b;

  Index size() const { return static_cast<Index>(a.size()); }
  Index window_end() const { return window_start + size(); }  // one past
  bool is_free() const { return a.empty(); }

  double a_at(Index n) const {
    const Index i = n - window_start;
    return (i >= 0 && i < size()) ? a[static_cast<std::size_t>(i)] : -1.0;
  }
  double b_at(Index n) const {
    const Index i = n - window_start;
    return (i >= 0 && i < size()) ? b[static_cast<std::size_t>(i)] : 0.0;
  }

  bool operator==(const JacobiOperator&) const = default;
};

/// Block analog: A(n) invertible m x m, B(n) Hermitian; A = -I, B = 0 outside.
struct BlockJacobiOperator {
  int block_dim = 1;
  Index window_start = 0;
  std::vector<Matrix> A;
  std::vector<Matrix> B;

  Index size() const { return static_cast<Index>(A.size()); }
  Index window_end() const { return window_start + size(); }
  bool is_free() const { return A.empty(); }

  Matrix A_at(Index n) const {
    const Index i = n - window_start;
    if (i >= 0 && i < size()) return A[static_cast<std::size_t>(i)];
    return -Matrix::Identity(block_dim, block_dim);
  }
  Matrix B_at(Index n) const {
    const Index i = n - window_start;
    if (i >= 0 && i < size()) return B[static_cast<std::size_t>(i)];
    return Matrix::Zero(block_dim, block_dim);
  }

  bool operator==(const BlockJacobiOperator& o) const {
    if (block_dim != o.block_dim || window_start != o.window_start || A.size() != o.A.size())
      return false;
    for (std::size_t i = 0; i < A.size(); ++i) {
      if (A[i] != o.A[i] || B[i] != o.B[i]) return false;
    }
    return true;
  }
};

/// An eigenvalue outside [-2, 2] with lambda = -k - 1/k, |k| > 1.
struct SpectralPoint {
  double lambda = 0.0;
  double k = 0.0;
  int multiplicity = 1;

  // Distance of |lambda| from the band edge, computed without cancellation
  // in (|lambda| - 2)(|lambda| + 2).
  static double k_from_lambda(double lambda) {
    const double x = std::abs(lambda);
    const double r = std::sqrt((x - 2.0) * (x + 2.0));
    const double k = 0.5 * (x + r);
    return lambda < 0.0 ? k : -k;
  }
  static SpectralPoint from_lambda(double lambda, int multiplicity = 1) {
    if (!(std::abs(lambda) > 2.0)) throw DomainError("eigenvalue inside [-2,2]");
    return {lambda, k_from_lambda(lambda), multiplicity};
  }
  static SpectralPoint from_k(double k, int multiplicity = 1) {
    if (!(std::abs(k) > 1.0)) throw DomainError("|k| must exceed 1");
    return {-k - 1.0 / k, k, multiplicity};
  }
};

struct ReflectionlessSpec {
  double omega = 1.0;
  Index window_half_width = 20;
};

inline JacobiOperator make_scalar(Index window_start, std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) throw LengthMismatch("a and b differ in length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] < 0.0)) {
      throw NonNegativeOffDiagonal("a(" + std::to_string(window_start + static_cast<Index>(i)) +
                                   ") = " + std::to_string(a[i]));
    }
    if (!std::isfinite(b[i])) throw DomainError("non-finite b");
  }
  return {window_start, std::move(a), std::move(b)};
}

inline double max_entry(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : INFINITY;
}

inline BlockJacobiOperator make_block(int block_dim, Index window_start, std::vector<Matrix> A,
                                      std::vector<Matrix> B, double condition_cap = 1e12) {
  if (block_dim < 1) throw DomainError("block_dim must be positive");
  if (A.size() != B.size()) throw LengthMismatch("A and B differ in length");
  for (std::size_t i = 0; i < A.size(); ++i) {
    if (A[i].rows() != block_dim || A[i].cols() != block_dim || B[i].rows() != block_dim ||
        B[i].cols() != block_dim)
      throw LengthMismatch("block of wrong shape");
    if (max_entry(B[i] - B[i].adjoint()) > 1e-12) throw NotHermitian("B is not Hermitian");
    if (condition_number(A[i]) > condition_cap) throw SingularBlock("A is numerically singular");
  }
  return {block_dim, window_start, std::move(A), std::move(B)};
}

inline BlockJacobiOperator to_block(const JacobiOperator& op) {
  BlockJacobiOperator out{1, op.window_start, {}, {}};
  for (Index i = 0; i < op.size(); ++i) {
    out.A.push_back(Matrix::Constant(1, 1, op.a[static_cast<std::size_t>(i)]));
    out.B.push_back(Matrix::Constant(1, 1, op.b[static_cast<std::size_t>(i)]));
  }
  return out;
}

// log cosh, stable for large arguments.
inline double log_cosh(double x) {
  const double y = std::abs(x);
  return y + std::log1p(std::exp(-2.0 * y)) - std::log(2.0);
}

/// Reflectionless family built from c_n = cosh(omega n):
///   b(n) = c_n/c_{n+1} - c_{n-1}/c_n,  a(n) = -sqrt(c_n c_{n+2}) / c_{n+1}
/// materialized for |n| <= window_half_width.
inline JacobiOperator make_reflectionless(const ReflectionlessSpec& spec) {
  if (!(spec.omega > 0.0)) throw DomainError("omega must be positive");
  if (spec.window_half_width < 1) throw DomainError("window_half_width must be >= 1");
  const double w = spec.omega;
  const Index N = spec.window_half_width;
  JacobiOperator op{-N, {}, {}};
  for (Index n = -N; n <= N; ++n) {
    const double lc0 = log_cosh(w * static_cast<double>(n));
    const double lcp = log_cosh(w * static_cast<double>(n + 1));
    const double lcm = log_cosh(w * static_cast<double>(n - 1));
    const double lcpp = log_cosh(w * static_cast<double>(n + 2));
    op.b.push_back(std::exp(lc0 - lcp) - std::exp(lcm - lc0));
    op.a.push_back(-std::exp(0.5 * (lc0 + lcpp) - lcp));
  }
  return op;
}

// Largest deviation from free values at the two window edges.
inline double reflectionless_tail_bound(const ReflectionlessSpec& spec) {
  const JacobiOperator op = make_reflectionless(spec);
  double t = 0.0;
  for (std::size_t i : {std::size_t{0}, op.a.size() - 1}) {
    t = std::max({t, std::abs(op.b[i]), std::abs(op.a[i] + 1.0)});
  }
  return t;
}

inline JacobiOperator sign_flip_conjugate(const JacobiOperator& op) {
  JacobiOperator out = op;
  for (double& v : out.b) v = -v;
  return out;
}

inline BlockJacobiOperator sign_flip_conjugate(const BlockJacobiOperator& op) {
  BlockJacobiOperator out = op;
  for (Matrix& m : out.B) m = -m;
  return out;
}

// Keeps coefficients with |n| < N, free values elsewhere.
inline JacobiOperator truncate(const JacobiOperator& op, Index N) {
  if (N < 0) throw DomainError("truncation index must be non-negative");
  const Index lo = std::max(op.window_start, -N + 1);
  const Index hi = std::min(op.window_end(), N);
  if (lo >= hi) return JacobiOperator{};
  JacobiOperator out{lo, {}, {}};
  for (Index n = lo; n < hi; ++n) {
    out.a.push_back(op.a_at(n));
    out.b.push_back(op.b_at(n));
  }
  return out;
}

inline BlockJacobiOperator truncate(const BlockJacobiOperator& op, Index N) {
  if (N < 0) throw DomainError("truncation index must be non-negative");
  const Index lo = std::max(op.window_start, -N + 1);
  const Index hi = std::min(op.window_end(), N);
  BlockJacobiOperator out{op.block_dim, 0, {}, {}};
  if (lo >= hi) return out;
  out.window_start = lo;
  for (Index n = lo; n < hi; ++n) {
    out.A.push_back(op.A_at(n));
    out.B.push_back(op.B_at(n));
  }
  return out;
}

}  // namespace jlt
