#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jlt/error.hpp"
#include "jlt/functional.hpp"
#include "jlt/jacobi.hpp"
#include "jlt/spectrum.hpp"

namespace jlt {

struct CommutationOptions {
  bool check_spectrum = true;  // compare eigensolve before/after
  double spectrum_tol = 1e-11;
  double identity_tol = 1e-8;
  double shrink_tol = 1e-7;
  bool throw_on_violation = true;
};

/// One Darboux step on a scalar operator.
struct CommutationReport {
  SpectralPoint input_eigenvalue;
  JacobiOperator transformed;
  // sum b1^2 against sum b^2 - (k^2 - 1/k^2) + 2 sum (a^2 - a1^2)
  double sum_identity_residual = 0.0;
  // sum log a1^2 against sum log a^2 - log k^2
  double product_identity_residual = 0.0;
  double scale = 1.0;
  bool removed_only = false;
  double spectrum_shift = 0.0;  // largest movement of the surviving eigenvalues
};

namespace detail {

// Multiset difference "before minus one copy of removed" against "after".
inline bool shrinks_by(const std::vector<SpectralPoint>& before, const std::vector<SpectralPoint>& after,
                       const SpectralPoint& removed, int removed_mult, double tol, double& shift) {
  auto expand = [](const std::vector<SpectralPoint>& pts) {
    std::vector<double> v;
    for (const auto& p : pts)
      for (int i = 0; i < p.multiplicity; ++i) v.push_back(p.lambda);
    std::sort(v.begin(), v.end());
    return v;
  };
  std::vector<double> b = expand(before);
  const std::vector<double> a = expand(after);
  for (int r = 0; r < removed_mult; ++r) {
    auto it = std::min_element(b.begin(), b.end(), [&](double x, double y) {
      return std::abs(x - removed.lambda) < std::abs(y - removed.lambda);
    });
    if (it == b.end() || std::abs(*it - removed.lambda) > tol) return false;
    b.erase(it);
  }
  if (a.size() != b.size()) return false;
  shift = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) shift = std::max(shift, std::abs(a[i] - b[i]));
  return shift <= tol;
}

}  // namespace detail

/// Coefficients of the transformed operator:
///   a1(n) = -sqrt(a(n) a(n+1) phi(n) phi(n+2)) / phi(n+1)
///   b1(n) = -a(n) (phi(n)/phi(n+1) + phi(n+1)/phi(n)) + lambda
/// evaluated through the ratios r(n) = phi(n+1)/phi(n).
inline JacobiOperator commute_scalar(const JacobiOperator& op, const GroundStateResult& gs) {
  const double lambda = gs.eigenvalue.lambda;
  const Index lo = std::min(op.window_start, gs.ratio_start) - 1;
  const Index hi = std::max(op.window_end(), gs.ratio_start + static_cast<Index>(gs.ratios.size()));
  JacobiOperator out{lo, {}, {}};
  for (Index n = lo; n < hi; ++n) {
    const double r = gs.ratio(n);
    const double r1 = gs.ratio(n + 1);
    if (!(r > 0.0) || !(r1 > 0.0)) throw PositivityViolation("phi is not positive at n = " + std::to_string(n));
    const double a = op.a_at(n);
    out.a.push_back(-std::sqrt(a * op.a_at(n + 1) * (r1 / r)));
    out.b.push_back(-a * (r + 1.0 / r) + lambda);
  }
  return out;
}

/// Darboux step removing the bottom eigenvalue, with the identity ledger.
inline CommutationReport scalar_step(const JacobiOperator& op, const GroundStateResult& gs,
                                     const CommutationOptions& opt = {}) {
  CommutationReport rep;
  rep.input_eigenvalue = gs.eigenvalue;
  rep.transformed = commute_scalar(op, gs);
  const JacobiOperator& w1 = rep.transformed;
  const double k = gs.eigenvalue.k;

  const Index lo = std::min(op.window_start, w1.window_start);
  const Index hi = std::max(op.window_end(), w1.window_end());
  double sb = 0.0, sb1 = 0.0, da = 0.0, la = 0.0, la1 = 0.0, la_abs = 0.0;
  for (Index n = lo; n < hi; ++n) {
    const double a = op.a_at(n), a1 = w1.a_at(n), b = op.b_at(n), b1 = w1.b_at(n);
    sb += b * b;
    sb1 += b1 * b1;
    da += (a - a1) * (a + a1);
    la += std::log(a * a);
    la1 += std::log(a1 * a1);
    la_abs += std::abs(std::log(a * a));
  }
  const double k2 = k * k;
  rep.scale = std::max({1.0, sb, k2});
  rep.sum_identity_residual = std::abs(sb1 - (sb - (k2 - 1.0 / k2) + 2.0 * da)) / rep.scale;
  rep.product_identity_residual = std::abs(la1 - (la - std::log(k2))) / std::max({1.0, la_abs, std::log(k2)});

  if (opt.throw_on_violation &&
      (rep.sum_identity_residual > opt.identity_tol || rep.product_identity_residual > opt.identity_tol)) {
    throw IdentityViolation("sum residual " + std::to_string(rep.sum_identity_residual) + ", product residual " +
                            std::to_string(rep.product_identity_residual));
  }
  if (opt.check_spectrum) {
    const auto before = eigenvalues_outside_band(op, opt.spectrum_tol);
    const auto after = eigenvalues_outside_band(w1, opt.spectrum_tol);
    rep.removed_only =
        detail::shrinks_by(before.points, after.points, gs.eigenvalue, 1, opt.shrink_tol, rep.spectrum_shift);
  }
  return rep;
}

/// Removes the top eigenvalue: flip b -> -b, remove the bottom eigenvalue,
/// flip back. The reported point keeps the original sign convention (k < -1).
inline CommutationReport eliminate_top(const JacobiOperator& op, const GroundStateResult& gs_top,
                                       const CommutationOptions& opt = {}) {
  if (!(gs_top.eigenvalue.lambda > 2.0)) throw NoEigenvalue("no eigenvalue above 2");
  GroundStateResult g = gs_top;
  g.eigenvalue = SpectralPoint::from_lambda(-gs_top.eigenvalue.lambda);
  for (double& r : g.ratios) r = -r;
  g.left_ratio = -gs_top.left_ratio;
  g.right_ratio = -gs_top.right_ratio;
  for (std::size_t i = 0; i < g.vector.size(); ++i) {
    const Index n = g.start + static_cast<Index>(i);
    if (n % 2 != 0) g.vector[i] = -g.vector[i];
  }
  CommutationReport rep = scalar_step(sign_flip_conjugate(op), g, opt);
  rep.transformed = sign_flip_conjugate(rep.transformed);
  rep.input_eigenvalue = gs_top.eigenvalue;
  return rep;
}

inline CommutationReport eliminate_top(const JacobiOperator& op, const CommutationOptions& opt = {}) {
  return eliminate_top(op, ground_state(op, Which::top), opt);
}

/// Result of removing every eigenvalue outside [-2, 2].
struct EliminationResult {
  JacobiOperator final_operator;
  std::vector<CommutationReport> chain;
  SpectrumResult spectrum;  // of the input
  // sum b_M^2 = sum b^2 - sum (k^2 - k^-2) + 2 sum (a^2 - a_M^2)
  double chain_sum_residual = 0.0;
  // sum log a_M^2 = sum log a^2 - sum log k^2
  double chain_product_residual = 0.0;
  double lhs = 0.0;          // sum k_functional over the input spectrum
  double rhs = 0.0;          // sum b^2 + 2 sum (a^2 - 1 - log a^2)
  double certificate = 0.0;  // sum b_M^2 + 2 sum (a_M^2 - 1 - log a_M^2) >= 0
  double certified_gap = 0.0;  // |(rhs - lhs) - certificate| / scale
  double scale = 1.0;
};

/// Removes all eigenvalues: the bottom one while any lies below -2, then the
/// top one via sign flip.
inline EliminationResult eliminate_all(const JacobiOperator& op, double tol = 1e-11,
                                       const CommutationOptions& opt = {}) {
  EliminationResult res;
  res.spectrum = eigenvalues_outside_band(op, tol);
  JacobiOperator cur = op;
  std::size_t remaining = res.spectrum.count();
  const SpectrumOptions gs_opt{.tol = std::min(tol, 1e-12)};
  CommutationOptions step_opt = opt;
  step_opt.check_spectrum = false;
  double sum_k = 0.0, sum_logk2 = 0.0;
  while (remaining > 0) {
    const auto s = eigenvalues_outside_band(cur, tol);
    if (s.count() != remaining) {
      throw ChainStalled("expected " + std::to_string(remaining) + " eigenvalues, found " +
                         std::to_string(s.count()));
    }
    CommutationReport rep;
    if (bottom_point(s)) {
      rep = scalar_step(cur, ground_state(cur, Which::bottom, gs_opt), step_opt);
    } else {
      rep = eliminate_top(cur, ground_state(cur, Which::top, gs_opt), step_opt);
    }
    if (opt.check_spectrum) {
      const auto after = eigenvalues_outside_band(rep.transformed, tol);
      rep.removed_only =
          detail::shrinks_by(s.points, after.points, rep.input_eigenvalue, 1, opt.shrink_tol, rep.spectrum_shift);
      if (!rep.removed_only) throw ChainStalled("step changed the surviving spectrum");
    }
    const double k2 = rep.input_eigenvalue.k * rep.input_eigenvalue.k;
    sum_k += k2 - 1.0 / k2;
    sum_logk2 += std::log(k2);
    cur = rep.transformed;
    res.chain.push_back(std::move(rep));
    --remaining;
  }
  res.final_operator = cur;

  const Index lo = std::min(op.window_start, cur.window_start);
  const Index hi = std::max(op.window_end(), cur.window_end());
  double sb = 0.0, sbm = 0.0, da = 0.0, la = 0.0, lam = 0.0, la_abs = 0.0;
  for (Index n = lo; n < hi; ++n) {
    const double a = op.a_at(n), am = cur.a_at(n), b = op.b_at(n), bm = cur.b_at(n);
    sb += b * b;
    sbm += bm * bm;
    da += (a - am) * (a + am);
    la += std::log(a * a);
    lam += std::log(am * am);
    la_abs += std::abs(std::log(a * a));
  }
  res.scale = std::max({1.0, sb, sum_k});
  res.chain_sum_residual = std::abs(sbm - (sb - sum_k + 2.0 * da)) / res.scale;
  res.chain_product_residual = std::abs(lam - (la - sum_logk2)) / std::max({1.0, la_abs, sum_logk2});

  res.lhs = lhs_sum(InequalityName::final, res.spectrum.points, 0.0);
  res.rhs = rhs_scalar(op, InequalityName::final).total;
  res.certificate = rhs_scalar(cur, InequalityName::final).total;
  res.certified_gap = std::abs((res.rhs - res.lhs) - res.certificate) / std::max(1.0, res.rhs);
  if (opt.throw_on_violation &&
      (res.chain_sum_residual > opt.identity_tol || res.chain_product_residual > opt.identity_tol)) {
    throw IdentityViolation("chain residuals " + std::to_string(res.chain_sum_residual) + ", " +
                            std::to_string(res.chain_product_residual));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Matrix case

/// F(n) = -A(n) Phi(n+1) Phi(n)^{-1} over [start, start + F.size()).
struct RiccatiChain {
  Index start = 0;
  std::vector<Matrix> F;
  // Phi(n) over [start, start + phi_solution.size()). The column basis is
  // re-chosen from site to site to keep Phi well conditioned; F does not
  // depend on it. The first m1 columns are the eigen-solutions.
  std::vector<Matrix> phi_solution;
  std::vector<double> riccati_residual;  // per site, from start + 1 on

  Index end() const { return start + static_cast<Index>(F.size()); }
  const Matrix& at(Index n) const {
    if (n < start || n >= end()) throw DomainError("site " + std::to_string(n) + " outside the Riccati chain");
    return F[static_cast<std::size_t>(n - start)];
  }
  double max_riccati_residual() const {
    double r = 0.0;
    for (double x : riccati_residual) r = std::max(r, x);
    return r;
  }
};

struct MatrixStepReport {
  SpectralPoint input_eigenvalue;
  BlockJacobiOperator transformed;  // already cut
  RiccatiChain chain;
  Index cut = 0;
  double sum_identity_residual = 0.0;
  double product_identity_residual = 0.0;  // log-det identity
  double scale = 1.0;
  // tr F and tr F^{-1}, tr F^2, tr F^{-2} at the cut against their limits
  double trace_limit_error = 0.0;
  double tail_A = 0.0;  // largest |A1 + I| beyond the cut
  double tail_B = 0.0;  // largest |B1| beyond the cut
  bool removed_only = false;
  double spectrum_shift = 0.0;
};

struct MatrixStepOptions {
  bool check_spectrum = true;
  double spectrum_tol = 1e-11;
  double shrink_tol = 1e-7;
  double eigen_floor = 1e-13;
  double snap_tol = 1e-6;  // relative distance of the 1/k eigenvalues of F at the window end
  Index max_tail = 1 << 14;
};

namespace detail {

struct HermitianRoots {
  Matrix half;      // F^{1/2}
  Matrix inv_half;  // F^{-1/2}
};

inline HermitianRoots hermitian_roots(const Matrix& F, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (F + F.adjoint()));
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (!(ev.minCoeff() > floor * std::max(1.0, ev.cwiseAbs().maxCoeff()))) {
    throw NotPositiveDefinite("F has eigenvalue " + std::to_string(ev.minCoeff()));
  }
  const Matrix& V = es.eigenvectors();
  HermitianRoots r;
  r.half = V * ev.cwiseSqrt().cast<Complex>().asDiagonal() * V.adjoint();
  r.inv_half = V * ev.cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal() * V.adjoint();
  return r;
}

inline double largest_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

// Eigen-solutions at the bottom eigenvalue lambda (multiplicity m1) on sites
// [n0 - 1, e + 1], by a block twisted factorization: forward pivots
// FL(n) = B(n) - lambda - A(n-1)^* FL(n-1)^{-1} A(n-1) from FL = k I on the left,
// backward transfer matrices TR(n) = psi(n+1) psi(n)^{-1} from TR = I/k on the
// right, joined at the site where FL(m) + A(m) TR(m) is closest to rank
// deficiency m1.
inline std::vector<std::pair<Matrix, Matrix>> block_eigen_solutions(const BlockJacobiOperator& op, double lambda, double k, int m1) {
  const int m = op.block_dim;
  const Index n0 = op.window_start;
  const Index e = op.window_end();
  const std::size_t L = static_cast<std::size_t>(e - n0);
  const Matrix I = Matrix::Identity(m, m);
  auto idx = [&](Index n) { return static_cast<std::size_t>(n - (n0 - 1)); };

  std::vector<Matrix> FL(L + 2), TR(L + 2);
  FL[0] = k * I;
  for (Index n = n0; n <= e; ++n) {
    const Matrix Ap = op.A_at(n - 1);
    Matrix f = op.B_at(n) - lambda * I - Ap.adjoint() * FL[idx(n - 1)].partialPivLu().solve(Ap);
    FL[idx(n)] = 0.5 * (f + f.adjoint());
  }
  TR[idx(e)] = I / k;
  for (Index n = e; n >= n0; --n) {
    const Matrix M = lambda * I - op.B_at(n) - op.A_at(n) * TR[idx(n)];
    TR[idx(n - 1)] = M.partialPivLu().solve(op.A_at(n - 1).adjoint());
  }

  Index twist = n0 - 1;
  double best = INFINITY;
  Matrix null;
  for (Index n = n0 - 1; n <= e; ++n) {
    const Matrix G = FL[idx(n)] + op.A_at(n) * TR[idx(n)];
    Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeFullV);
    const double sc = std::max(1.0, svd.singularValues()(0));
    const double score = svd.singularValues()(m - m1) / sc;
    if (score < best) {
      best = score;
      twist = n;
      null = svd.matrixV().rightCols(m1);
    }
  }
  // The solutions decay like k^-|n - twist| and underflow on long windows, so
  // each pair (E(n), E(n+1)) is returned with its own right factor. F(n) only
  // depends on the pair.
  auto orth = [&](const Matrix& x) {
    Eigen::HouseholderQR<Matrix> qr(x);
    return Matrix(qr.householderQ() * Matrix::Identity(m, m1));
  };
  auto scaled = [](Matrix x, Matrix y) {
    const double s = std::max(max_entry(x), max_entry(y));
    return std::pair<Matrix, Matrix>(x / s, y / s);
  };
  std::vector<std::pair<Matrix, Matrix>> E(L + 2);
  Matrix q = null;
  for (Index n = twist; n > n0 - 1; --n) {
    const Matrix prev = -FL[idx(n - 1)].partialPivLu().solve(op.A_at(n - 1) * q);
    E[idx(n - 1)] = scaled(prev, q);
    q = orth(prev);
  }
  q = null;
  for (Index n = twist; n <= e; ++n) {
    const Matrix next = TR[idx(n)] * q;
    E[idx(n)] = scaled(q, next);
    q = orth(next);
  }
  return E;
}

}  // namespace detail

/// Cuts a block operator: A = -I, B = 0 for n >= N_c. Also reports the largest
/// discarded deviations.
struct CutResult {
  BlockJacobiOperator op;
  double tail_A = 0.0;
  double tail_B = 0.0;
};

inline CutResult matrix_cut(const BlockJacobiOperator& op, Index N_c) {
  CutResult r;
  r.op.block_dim = op.block_dim;
  r.op.window_start = op.window_start;
  const Matrix I = Matrix::Identity(op.block_dim, op.block_dim);
  for (Index n = op.window_start; n < op.window_end(); ++n) {
    if (n >= N_c) {
      r.tail_A = std::max(r.tail_A, max_entry(op.A_at(n) + I));
      r.tail_B = std::max(r.tail_B, max_entry(op.B_at(n)));
    } else {
      r.op.A.push_back(op.A_at(n));
      r.op.B.push_back(op.B_at(n));
    }
  }
  return r;
}

/// Matrix Darboux step at the bottom eigenvalue lambda1 (multiplicity m1).
///
/// Phi is built by forward recursion from Phi(n) = k^n I left of the window and
/// rescaled every few steps. Past the window F evolves in its own eigenbasis by
/// f -> -lambda - 1/f; the m1 eigenvalues equal to 1/k are fixed points and
/// are held exactly. The transformed operator is cut where its deviation from
/// the free values reaches rounding level.
inline MatrixStepReport matrix_step(const BlockJacobiOperator& op, const SpectralPoint& lambda1,
                                    const MatrixStepOptions& opt = {}) {
  const double k = lambda1.k;
  const double lambda = lambda1.lambda;
  if (!(k > 1.0)) throw DomainError("matrix_step needs the bottom eigenvalue (k > 1)");
  const int m = op.block_dim;
  const int m1 = lambda1.multiplicity;
  const Matrix I = Matrix::Identity(m, m);
  const Index n0 = op.window_start;
  const Index e = op.window_end();

  MatrixStepReport rep;
  rep.input_eigenvalue = lambda1;
  RiccatiChain& ch = rep.chain;
  ch.start = n0 - 1;

  const auto E = detail::block_eigen_solutions(op, lambda, k, m1);

  // Phi = [E | P]: P spans the remaining solutions that are k^n Q left of the
  // window, Q the orthogonal complement of E(n0 - 1). P is recursed forward,
  // cleared of its E component and orthonormalized at every site.
  std::vector<Matrix>& phi = ch.phi_solution;
  Matrix P0, P1;
  {
    Eigen::HouseholderQR<Matrix> qr(E[0].first);
    const Matrix Qfull = qr.householderQ() * Matrix::Identity(m, m);
    P0 = Qfull.rightCols(m - m1);
    P1 = k * P0;
  }
  auto assemble = [&](const Matrix& e_cols, const Matrix& p_cols) {
    Matrix out(m, m);
    out << e_cols, p_cols;
    return out;
  };
  phi.push_back(assemble(E[0].first, P0));
  for (Index n = n0 - 1; n <= e; ++n) {
    const std::size_t i = static_cast<std::size_t>(n - (n0 - 1));
    if (n >= n0) {
      const Matrix rhs = (lambda * I - op.B_at(n)) * P1 - op.A_at(n - 1).adjoint() * P0;
      Matrix P2 = op.A_at(n).partialPivLu().solve(rhs);
      P0 = std::move(P1);
      P1 = std::move(P2);
    }
    if (m1 < m) {
      Matrix Es(2 * m, m1), Ps(2 * m, m - m1);
      Es << E[i].first, E[i].second;
      Ps << P0, P1;
      Ps -= Es * Es.colPivHouseholderQr().solve(Ps);
      Eigen::HouseholderQR<Matrix> qr(Ps);
      const Matrix R = qr.matrixQR().topRows(m - m1).triangularView<Eigen::Upper>();
      if (!R.allFinite() || R.diagonal().cwiseAbs().minCoeff() == 0.0) throw RecursionOverflow("Phi recursion degenerate");
      const Matrix Rinv = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(m - m1, m - m1));
      P0 = P0 * Rinv;
      P1 = P1 * Rinv;
    }
    const Matrix cur = assemble(E[i].first, P0);
    const Matrix nxt = assemble(E[i].second, P1);
    const Matrix X = cur.transpose().partialPivLu().solve(nxt.transpose()).transpose();
    Matrix F = -op.A_at(n) * X;
    ch.F.push_back(0.5 * (F + F.adjoint()));
    phi.back() = cur;
    phi.push_back(nxt);
  }

  // Free evolution past the window in the eigenbasis of F(e).
  Eigen::SelfAdjointEigenSolver<Matrix> es(ch.F.back());
  const Matrix V = es.eigenvectors();
  std::vector<double> f(es.eigenvalues().data(), es.eigenvalues().data() + m);
  for (int i = 0; i < m; ++i) {
    if (i < m1) {
      if (std::abs(f[i] * k - 1.0) > opt.snap_tol) {
        throw NotPositiveDefinite("F at the window end lacks the eigenvalue 1/k (found " + std::to_string(f[i]) + ")");
      }
      f[i] = 1.0 / k;
    } else if (!(f[i] * k - 1.0 > opt.snap_tol)) {
      throw NotPositiveDefinite("F at the window end has more than m1 eigenvalues near 1/k");
    }
  }
  ch.F.back() = V * Eigen::Map<Eigen::VectorXd>(f.data(), m).cast<Complex>().asDiagonal() * V.adjoint();
  auto converged = [&](const std::vector<double>& g) {
    for (int i = m1; i < m; ++i)
      if (std::abs(g[static_cast<std::size_t>(i)] - k) > 4.0 * std::numeric_limits<double>::epsilon() * k) return false;
    return true;
  };
  Index steps = 0;
  while (!converged(f) && steps < opt.max_tail) {
    for (int i = m1; i < m; ++i) f[static_cast<std::size_t>(i)] = -lambda - 1.0 / f[static_cast<std::size_t>(i)];
    ch.F.push_back(V * Eigen::Map<Eigen::VectorXd>(f.data(), m).cast<Complex>().asDiagonal() * V.adjoint());
    ++steps;
  }
  // One more site so that A1 at the last kept site is defined.
  for (int i = m1; i < m; ++i) f[static_cast<std::size_t>(i)] = -lambda - 1.0 / f[static_cast<std::size_t>(i)];
  ch.F.push_back(V * Eigen::Map<Eigen::VectorXd>(f.data(), m).cast<Complex>().asDiagonal() * V.adjoint());
  const Index last = ch.start + static_cast<Index>(ch.F.size()) - 1;  // F known on [n0-1, last]

  // Riccati residual A(n-1)^* F(n-1)^{-1} A(n-1) + F(n) - B(n) + lambda.
  for (Index n = ch.start + 1; n <= last; ++n) {
    const Matrix& Fp = ch.at(n - 1);
    const Matrix A = op.A_at(n - 1);
    const Matrix R = A.adjoint() * Fp.partialPivLu().solve(A) + ch.at(n) - op.B_at(n) + lambda * I;
    ch.riccati_residual.push_back(max_entry(R) / std::max(1.0, max_entry(op.B_at(n)) + std::abs(lambda)));
  }

  // Transformed coefficients on [n0 - 1, last).
  std::vector<detail::HermitianRoots> roots;
  for (Index n = ch.start; n <= last; ++n) roots.push_back(detail::hermitian_roots(ch.at(n), opt.eigen_floor));
  BlockJacobiOperator full{m, ch.start, {}, {}};
  for (Index n = ch.start; n < last; ++n) {
    const auto& r0 = roots[static_cast<std::size_t>(n - ch.start)];
    const auto& r1 = roots[static_cast<std::size_t>(n + 1 - ch.start)];
    const Matrix A = op.A_at(n);
    full.A.push_back(r0.inv_half * A * r1.half);
    Matrix B1 = r0.inv_half * A * A.adjoint() * r0.inv_half + ch.at(n) + lambda * I;
    full.B.push_back(0.5 * (B1 + B1.adjoint()));
  }
  // Cut after the last site whose deviation exceeds rounding level.
  Index cut = std::max(e, full.window_start);
  const double level = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lambda));
  for (Index n = full.window_end() - 1; n >= e; --n) {
    if (max_entry(full.A_at(n) + I) > level || max_entry(full.B_at(n)) > level) {
      cut = n + 1;
      break;
    }
  }
  CutResult cr = matrix_cut(full, cut);
  rep.cut = cut;
  rep.tail_A = cr.tail_A;
  rep.tail_B = cr.tail_B;
  rep.transformed = std::move(cr.op);

  // Identities over [n0 - 1, cut).
  double sB = 0.0, sB1 = 0.0, dA = 0.0, ld = 0.0, ld1 = 0.0, ld_abs = 0.0;
  for (Index n = ch.start; n < cut; ++n) {
    const Matrix A = op.A_at(n), B = op.B_at(n);
    const Matrix A1 = rep.transformed.A_at(n), B1 = rep.transformed.B_at(n);
    sB += (B * B).trace().real();
    sB1 += (B1 * B1).trace().real();
    dA += (A * A.adjoint()).trace().real() - (A1 * A1.adjoint()).trace().real();
    const double l0 = std::log(std::abs((A * A.adjoint()).determinant()));
    ld += l0;
    ld_abs += std::abs(l0);
    ld1 += std::log(std::abs((A1 * A1.adjoint()).determinant()));
  }
  const double k2 = k * k;
  rep.scale = std::max({1.0, sB, m1 * k2});
  rep.sum_identity_residual = std::abs(sB1 - (m1 / k2 - m1 * k2 + sB + 2.0 * dA)) / rep.scale;
  rep.product_identity_residual =
      std::abs(ld1 - (-m1 * std::log(k2) + ld)) / std::max({1.0, ld_abs, m1 * std::log(k2)});

  // Trace limits at the cut.
  {
    Eigen::SelfAdjointEigenSolver<Matrix> fe(ch.at(std::min(cut, last)));
    double t1 = 0.0, tm1 = 0.0, t2 = 0.0, tm2 = 0.0;
    for (int i = 0; i < m; ++i) {
      const double x = fe.eigenvalues()(i);
      t1 += x;
      tm1 += 1.0 / x;
      t2 += x * x;
      tm2 += 1.0 / (x * x);
    }
    const double mm = m - m1;
    rep.trace_limit_error = std::max({std::abs(t1 - (m1 / k + mm * k)) / (m * k),
                                      std::abs(tm1 - (m1 * k + mm / k)) / (m * k),
                                      std::abs(t2 - (m1 / k2 + mm * k2)) / (m * k2),
                                      std::abs(tm2 - (m1 * k2 + mm / k2)) / (m * k2)});
  }

  if (opt.check_spectrum) {
    const auto before = block_eigen(op, opt.spectrum_tol);
    const auto after = block_eigen(rep.transformed, opt.spectrum_tol);
    rep.removed_only =
        detail::shrinks_by(before.points, after.points, lambda1, m1, opt.shrink_tol, rep.spectrum_shift);
  }
  return rep;
}

/// Convenience: bottom eigenvalue from block_eigen, then matrix_step.
inline MatrixStepReport matrix_step(const BlockJacobiOperator& op, const MatrixStepOptions& opt = {}) {
  const auto s = block_eigen(op, SpectrumOptions{.tol = 1e-12});
  const SpectralPoint* p = bottom_point(s);
  if (!p) throw NoEigenvalue("no eigenvalue below -2");
  return matrix_step(op, *p, opt);
}

struct BlockEliminationResult {
  BlockJacobiOperator final_operator;
  std::vector<MatrixStepReport> chain;
  SpectrumResult spectrum;
  // sum tr B_M^2 = sum tr B^2 - sum m_j (k_j^2 - k_j^-2) + 2 sum tr(A A^* - A_M A_M^*)
  double chain_sum_residual = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double certificate = 0.0;  // right-hand side evaluated on the final operator
  double certified_gap = 0.0;
};

/// Matrix elimination chain: bottom eigenvalues by matrix_step, top ones on the
/// sign-flipped operator.
inline BlockEliminationResult eliminate_all(const BlockJacobiOperator& op, double tol = 1e-11,
                                            const MatrixStepOptions& opt = {}) {
  BlockEliminationResult res;
  res.spectrum = block_eigen(op, tol);
  BlockJacobiOperator cur = op;
  std::size_t remaining = res.spectrum.count();
  MatrixStepOptions step_opt = opt;
  step_opt.check_spectrum = false;
  double sum_k = 0.0;
  while (remaining > 0) {
    const auto s = block_eigen(cur, tol);
    if (s.count() != remaining) {
      throw ChainStalled("expected " + std::to_string(remaining) + " eigenvalues, found " + std::to_string(s.count()));
    }
    MatrixStepReport rep;
    if (const SpectralPoint* p = bottom_point(s)) {
      rep = matrix_step(cur, *p, step_opt);
    } else {
      const SpectralPoint* t = top_point(s);
      const SpectralPoint flipped = SpectralPoint::from_lambda(-t->lambda, t->multiplicity);
      rep = matrix_step(sign_flip_conjugate(cur), flipped, step_opt);
      rep.transformed = sign_flip_conjugate(rep.transformed);
      rep.input_eigenvalue = *t;
    }
    if (opt.check_spectrum) {
      const auto after = block_eigen(rep.transformed, tol);
      rep.removed_only = detail::shrinks_by(s.points, after.points, rep.input_eigenvalue,
                                            rep.input_eigenvalue.multiplicity, opt.shrink_tol, rep.spectrum_shift);
      if (!rep.removed_only) throw ChainStalled("matrix step changed the surviving spectrum");
    }
    const double k2 = rep.input_eigenvalue.k * rep.input_eigenvalue.k;
    sum_k += rep.input_eigenvalue.multiplicity * (k2 - 1.0 / k2);
    remaining -= static_cast<std::size_t>(rep.input_eigenvalue.multiplicity);
    cur = rep.transformed;
    res.chain.push_back(std::move(rep));
  }
  res.final_operator = cur;

  const Index lo = std::min(op.window_start, cur.window_start);
  const Index hi = std::max(op.window_end(), cur.window_end());
  double sB = 0.0, sBm = 0.0, dA = 0.0;
  for (Index n = lo; n < hi; ++n) {
    const Matrix A = op.A_at(n), B = op.B_at(n), Am = cur.A_at(n), Bm = cur.B_at(n);
    sB += (B * B).trace().real();
    sBm += (Bm * Bm).trace().real();
    dA += (A * A.adjoint()).trace().real() - (Am * Am.adjoint()).trace().real();
  }
  res.chain_sum_residual = std::abs(sBm - (sB - sum_k + 2.0 * dA)) / std::max({1.0, sB, sum_k});
  res.lhs = lhs_sum(InequalityName::finalmatrix, res.spectrum.points, 0.0);
  res.rhs = rhs_block(op).total;
  res.certificate = rhs_block(cur).total;
  res.certified_gap = std::abs((res.rhs - res.lhs) - res.certificate) / std::max(1.0, res.rhs);
  return res;
}

}  // namespace jlt
