#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "jlt/error.hpp"
#include "jlt/jacobi.hpp"
#include "jlt/tridiagonal.hpp"

namespace jlt {

enum class SpectrumMethod {
  // Sturm counts of the whole-line operator: the free tails enter through the
  // fixed points of the pivot recursion, so no truncation error arises.
  exact_tail,
  // Finite truncations doubled until the eigenvalues stabilize and their count
  // matches the whole-line count.
  truncation,
};

struct SpectrumOptions {
  double tol = 1e-9;
  double band_margin = 1e-9;
  Index max_truncation = Index{1} << 16;
  SpectrumMethod method = SpectrumMethod::exact_tail;
};

/// Eigenvalues outside [-2, 2] sorted by decreasing |lambda|.
struct SpectrumResult {
  std::vector<SpectralPoint> points;
  Index truncation_used = 0;  // padding of the accepted truncation; 0 for exact_tail
  double stabilization_gap = 0.0;
  // Set when the final truncation had eigenvalues with 0 < |lambda| - 2 <= band_margin.
  bool band_edge_flag = false;

  std::size_t count() const {
    std::size_t c = 0;
    for (const auto& p : points) c += static_cast<std::size_t>(p.multiplicity);
    return c;
  }
};

namespace detail {

// Truncation to sites [window_start - pad, window_end + pad).
inline Tridiagonal truncation(const JacobiOperator& op, Index pad) {
  const Index lo = op.window_start - pad;
  const Index hi = op.window_end() + pad;
  Tridiagonal t;
  t.diag.reserve(static_cast<std::size_t>(hi - lo));
  for (Index n = lo; n < hi; ++n) {
    t.diag.push_back(op.b_at(n));
    if (n + 1 < hi) t.off.push_back(op.a_at(n));
  }
  return t;
}

inline BlockTridiagonal truncation(const BlockJacobiOperator& op, Index pad) {
  const Index lo = op.window_start - pad;
  const Index hi = op.window_end() + pad;
  BlockTridiagonal t;
  for (Index n = lo; n < hi; ++n) {
    t.B.push_back(op.B_at(n));
    if (n + 1 < hi) t.A.push_back(op.A_at(n));
  }
  return t;
}

struct Level {
  std::vector<double> below;  // ascending
  std::vector<double> above;  // ascending
  bool edge = false;
};

template <typename Op>
Level solve_level(const Op& op, Index pad, double margin) {
  const auto t = truncation(op, pad);
  Level lv;
  auto eig = [&](double lo, double hi) {
    if constexpr (std::is_same_v<Op, JacobiOperator>) {
      return tridiagonal_eigenvalues(t, lo, hi);
    } else {
      return block_tridiagonal_eigenvalues(t, lo, hi);
    }
  };
  lv.below = eig(-INFINITY, -2.0 - margin);
  lv.above = eig(2.0 + margin, INFINITY);
  lv.edge = !eig(-2.0 - margin, -2.0).empty() || !eig(2.0, 2.0 + margin).empty();
  return lv;
}

inline double level_gap(const Level& x, const Level& y) {
  double g = 0.0;
  for (std::size_t i = 0; i < x.below.size(); ++i) g = std::max(g, std::abs(x.below[i] - y.below[i]));
  for (std::size_t i = 0; i < x.above.size(); ++i) g = std::max(g, std::abs(x.above[i] - y.above[i]));
  return g;
}

// Eigenvalues of a block operator have multiplicity at most block_dim; a
// cluster exceeding it means the width merged distinct eigenvalues.
inline std::vector<SpectralPoint> cluster(const Level& lv, double width, int max_multiplicity) {
  std::vector<double> all = lv.below;
  all.insert(all.end(), lv.above.begin(), lv.above.end());
  std::sort(all.begin(), all.end());
  std::vector<SpectralPoint> pts;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i + 1;
    double sum = all[i];
    while (j < all.size() && all[j] - all[j - 1] <= width) sum += all[j++];
    if (static_cast<int>(j - i) > max_multiplicity) {
      throw NoConvergence("tolerance " + std::to_string(width / 10.0) + " merges " + std::to_string(j - i) +
                          " eigenvalues near " + std::to_string(all[i]) + " beyond the block size " +
                          std::to_string(max_multiplicity));
    }
    pts.push_back(SpectralPoint::from_lambda(sum / static_cast<double>(j - i), static_cast<int>(j - i)));
    i = j;
  }
  std::stable_sort(pts.begin(), pts.end(), [](const SpectralPoint& p, const SpectralPoint& q) {
    return std::abs(p.lambda) > std::abs(q.lambda);
  });
  return pts;
}

// Pivot of the free recursion g -> -x - 1/g reached from the left, for x <= -2.
inline double free_pivot(double x) { return 0.5 * (-x + std::sqrt((2.0 - x) * (-2.0 - x))); }

// Whole-line count of eigenvalues below x <= -2. Pivots start at the free
// value g* left of the window; at the first free site on the right, each
// pivot eigenvalue below 1/g* yields exactly one later negative pivot.
inline std::size_t exact_count_below(const JacobiOperator& op, double x) {
  const double gs = free_pivot(x);
  double amax = 1.0;
  for (double a : op.a) amax = std::max(amax, a * a);
  const double pivmin = pivot_floor(amax);
  std::size_t count = 0;
  double q = gs;
  for (Index n = op.window_start; n <= op.window_end(); ++n) {
    const double a = op.a_at(n - 1);
    q = (op.b_at(n) - x) - a * a / q;
    if (std::abs(q) <= pivmin) q = -pivmin;
    if (n < op.window_end() && q < 0.0) ++count;
  }
  return count + (q < 1.0 / gs ? 1 : 0);
}

inline std::size_t exact_count_below(const BlockJacobiOperator& op, double x) {
  const double gs = free_pivot(x);
  const int m = op.block_dim;
  const Matrix I = Matrix::Identity(m, m);
  double amax = 1.0;
  for (const Matrix& a : op.A) amax = std::max(amax, a.squaredNorm());
  const double pivmin = std::sqrt(pivot_floor(amax));
  std::size_t count = 0;
  Matrix D = gs * I;
  Eigen::PartialPivLU<Matrix> lu(D);
  for (Index n = op.window_start; n <= op.window_end(); ++n) {
    const Matrix Ap = op.A_at(n - 1);
    const Matrix next = op.B_at(n) - x * I - Ap.adjoint() * lu.solve(Ap);
    D = 0.5 * (next + next.adjoint());
    lu.compute(D);
    if (!(std::abs(lu.determinant()) > pivmin)) {
      D -= pivmin * I;
      lu.compute(D);
    }
    if (n < op.window_end()) count += hermitian_negative_count(D);
  }
  return count + hermitian_negative_count(D - I / gs);
}

template <typename Op>
std::pair<double, double> window_gershgorin(const Op& op) {
  double lo = -2.0, hi = 2.0;
  for (Index n = op.window_start; n < op.window_end(); ++n) {
    if constexpr (std::is_same_v<Op, JacobiOperator>) {
      const double r = std::abs(op.a_at(n - 1)) + std::abs(op.a_at(n));
      lo = std::min(lo, op.b_at(n) - r);
      hi = std::max(hi, op.b_at(n) + r);
    } else {
      const Matrix B = op.B_at(n), Am = op.A_at(n - 1), A = op.A_at(n);
      for (Eigen::Index i = 0; i < B.rows(); ++i) {
        const double r = B.row(i).cwiseAbs().sum() - std::abs(B(i, i)) + Am.col(i).cwiseAbs().sum() +
                         A.row(i).cwiseAbs().sum();
        lo = std::min(lo, B(i, i).real() - r);
        hi = std::max(hi, B(i, i).real() + r);
      }
    }
  }
  return {lo, hi};
}

template <typename Op>
Level exact_level(const Op& op, double margin) {
  const Op flipped = sign_flip_conjugate(op);
  const auto [glo, ghi] = window_gershgorin(op);
  const double scale = std::max(std::abs(glo), std::abs(ghi));
  const double slack = 1e-12 * scale;
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * scale;
  auto below = [&](double x) { return exact_count_below(op, x); };
  auto above = [&](double x) { return exact_count_below(flipped, x); };
  Level lv;
  lv.below = bisect_all(below, glo - slack, -2.0 - margin, tol);
  std::vector<double> up = bisect_all(above, -ghi - slack, -2.0 - margin, tol);
  for (double v : up) lv.above.push_back(-v);
  std::sort(lv.above.begin(), lv.above.end());
  lv.edge = below(-2.0) > lv.below.size() || above(-2.0) > up.size();
  return lv;
}

template <typename Op>
SpectrumResult adaptive_spectrum(const Op& op, const SpectrumOptions& opt) {
  if (!(opt.tol > 0.0)) throw DomainError("tol must be positive");
  const Level exact = exact_level(op, opt.band_margin);
  int max_mult = 1;
  if constexpr (std::is_same_v<Op, BlockJacobiOperator>) max_mult = op.block_dim;
  if (opt.method == SpectrumMethod::exact_tail) {
    SpectrumResult r;
    r.points = cluster(exact, 10.0 * opt.tol, max_mult);
    r.band_edge_flag = exact.edge;
    return r;
  }
  Index pad = op.size() + 16;
  Level prev = solve_level(op, pad, opt.band_margin);
  for (;;) {
    const Index next = 2 * pad;
    if (next > opt.max_truncation) {
      throw NoConvergence("spectrum not stable up to truncation " + std::to_string(pad) +
                          " (eigenvalue near the band edge or tolerance too tight)");
    }
    Level cur = solve_level(op, next, opt.band_margin);
    if (cur.below.size() == prev.below.size() && cur.above.size() == prev.above.size() &&
        cur.below.size() == exact.below.size() && cur.above.size() == exact.above.size()) {
      const double gap = level_gap(cur, prev);
      if (gap < opt.tol) {
        SpectrumResult r;
        r.points = cluster(cur, 10.0 * opt.tol, max_mult);
        r.truncation_used = next;
        r.stabilization_gap = gap;
        r.band_edge_flag = cur.edge;
        return r;
      }
    }
    prev = std::move(cur);
    pad = next;
  }
}

}  // namespace detail

inline SpectrumResult eigenvalues_outside_band(const JacobiOperator& op, const SpectrumOptions& opt = {}) {
  return detail::adaptive_spectrum(op, opt);
}

inline SpectrumResult eigenvalues_outside_band(const JacobiOperator& op, double tol) {
  SpectrumOptions opt;
  opt.tol = tol;
  return eigenvalues_outside_band(op, opt);
}

inline SpectrumResult block_eigen(const BlockJacobiOperator& op, const SpectrumOptions& opt = {}) {
  return detail::adaptive_spectrum(op, opt);
}

inline SpectrumResult block_eigen(const BlockJacobiOperator& op, double tol) {
  SpectrumOptions opt;
  opt.tol = tol;
  return block_eigen(op, opt);
}

inline SpectrumResult eigenvalues_outside_band(const BlockJacobiOperator& op, const SpectrumOptions& opt = {}) {
  return block_eigen(op, opt);
}

inline const SpectralPoint* bottom_point(const SpectrumResult& s) {
  const SpectralPoint* best = nullptr;
  for (const auto& p : s.points)
    if (p.lambda < -2.0 && (!best || p.lambda < best->lambda)) best = &p;
  return best;
}

inline const SpectralPoint* top_point(const SpectrumResult& s) {
  const SpectralPoint* best = nullptr;
  for (const auto& p : s.points)
    if (p.lambda > 2.0 && (!best || p.lambda > best->lambda)) best = &p;
  return best;
}

/// Eigenvector at an extreme eigenvalue. Inside the window the vector is
/// carried as successive ratios r(n) = phi(n+1)/phi(n); outside it the ratios
/// are the constants left_ratio / right_ratio, so phi is exactly geometric.
struct GroundStateResult {
  SpectralPoint eigenvalue;
  Index start = 0;  // site of vector[0]
  std::vector<double> vector;
  Index ratio_start = 0;
  std::vector<double> ratios;
  double left_ratio = 1.0;
  double right_ratio = 1.0;
  // phi(n) = c k^n left of the window, d k^(-n) right of it (vector's scale).
  double tail_c = 0.0;
  double tail_d = 0.0;
  double residual = 0.0;  // ||(W - lambda) phi|| / ||phi|| over the vector range

  double ratio(Index n) const {
    if (n < ratio_start) return left_ratio;
    const Index i = n - ratio_start;
    if (i < static_cast<Index>(ratios.size())) return ratios[static_cast<std::size_t>(i)];
    return right_ratio;
  }
  double at(Index n) const {
    const Index i = n - start;
    return (i >= 0 && i < static_cast<Index>(vector.size())) ? vector[static_cast<std::size_t>(i)] : 0.0;
  }
};

enum class Which { bottom, top };

namespace detail {

// Fills vector, tails and residual from the ratio representation.
inline void materialize(const JacobiOperator& op, GroundStateResult& gs, Index pad) {
  const Index lo = std::min(op.window_start, gs.ratio_start) - pad;
  const Index hi = std::max(op.window_end(), gs.ratio_start + static_cast<Index>(gs.ratios.size())) + pad;
  gs.start = lo;
  // log|phi| and sign, with phi(lo) = 1 before normalization.
  std::vector<double> logabs(static_cast<std::size_t>(hi - lo + 1));
  std::vector<int> sgn(logabs.size(), 1);
  for (Index n = lo; n < hi; ++n) {
    const double r = gs.ratio(n);
    const std::size_t i = static_cast<std::size_t>(n - lo);
    logabs[i + 1] = logabs[i] + std::log(std::abs(r));
    sgn[i + 1] = r < 0.0 ? -sgn[i] : sgn[i];
  }
  const double mx = *std::max_element(logabs.begin(), logabs.end());
  gs.vector.resize(logabs.size());
  for (std::size_t i = 0; i < logabs.size(); ++i) gs.vector[i] = sgn[i] * std::exp(logabs[i] - mx);

  const double k = gs.eigenvalue.k;
  const double logk = std::log(std::abs(k));
  const Index nl = op.window_start;
  const Index nr = op.window_end();
  auto sign_pow = [&](Index n) { return (k < 0.0 && (n % 2 != 0)) ? -1.0 : 1.0; };
  gs.tail_c = gs.at(nl) * std::exp(-static_cast<double>(nl) * logk) * sign_pow(nl);
  gs.tail_d = gs.at(nr) * std::exp(static_cast<double>(nr) * logk) * sign_pow(nr);

  double res = 0.0, nrm = 0.0;
  for (Index n = lo; n <= hi; ++n) {
    const double v = gs.at(n);
    nrm += v * v;
    if (n == lo || n == hi) continue;
    const double w = op.a_at(n - 1) * gs.at(n - 1) + op.a_at(n) * gs.at(n + 1) +
                     (op.b_at(n) - gs.eigenvalue.lambda) * v;
    res += w * w;
  }
  gs.residual = std::sqrt(res / nrm);
}

// Ratios at the bottom eigenvalue on sites [n0, e) by a twisted factorization:
// forward ratios from the left tail, backward ratios from the right tail,
// joined at the site where the two disagree least.
inline void bottom_ratios(const JacobiOperator& op, double lambda, double k, GroundStateResult& gs) {
  const Index n0 = op.window_start;
  const Index e = op.window_end();
  const std::size_t L = static_cast<std::size_t>(e - n0);
  // fwd[i] = r(n0 - 1 + i) for i in [0, L]
  std::vector<double> fwd(L + 1);
  fwd[0] = k;
  for (std::size_t i = 1; i <= L; ++i) {
    const Index n = n0 - 1 + static_cast<Index>(i);
    fwd[i] = (lambda - op.b_at(n) - op.a_at(n - 1) / fwd[i - 1]) / op.a_at(n);
  }
  // bwd[i] = s(n0 + i) = phi(n0 + i - 1)/phi(n0 + i) for i in [0, L + 1]
  std::vector<double> bwd(L + 2);
  bwd[L + 1] = k;
  for (std::size_t i = L + 1; i-- > 0;) {
    const Index n = n0 + static_cast<Index>(i);
    bwd[i] = (lambda - op.b_at(n) - op.a_at(n) / bwd[i + 1]) / op.a_at(n - 1);
  }
  // Twist at site m = n0 + j, j in [0, L].
  std::size_t best = 0;
  double best_gamma = INFINITY;
  for (std::size_t j = 0; j <= L; ++j) {
    const Index m = n0 + static_cast<Index>(j);
    const double g = op.a_at(m - 1) / fwd[j] + op.a_at(m) / bwd[j + 1] + op.b_at(m) - lambda;
    if (std::abs(g) < best_gamma) {
      best_gamma = std::abs(g);
      best = j;
    }
  }
  gs.ratio_start = n0;
  gs.ratios.resize(L);
  for (std::size_t i = 0; i < L; ++i) {
    // r(n0 + i): forward below the twist, backward from it on.
    gs.ratios[i] = (i < best) ? fwd[i + 1] : 1.0 / bwd[i + 1];
  }
  gs.left_ratio = k;
  gs.right_ratio = 1.0 / k;
}

}  // namespace detail

/// Eigenvector at the lowest (bottom) or highest (top) eigenvalue. The top case
/// is computed on the sign-flipped operator and mapped back by (-1)^n.
inline GroundStateResult ground_state(const JacobiOperator& op, Which which = Which::bottom,
                                      const SpectrumOptions& opt = {.tol = 1e-12}) {
  const JacobiOperator work = which == Which::bottom ? op : sign_flip_conjugate(op);
  const SpectrumResult s = eigenvalues_outside_band(work, opt);
  const SpectralPoint* p = bottom_point(s);
  if (!p) throw NoEigenvalue(which == Which::bottom ? "no eigenvalue below -2" : "no eigenvalue above 2");
  GroundStateResult gs;
  gs.eigenvalue = *p;
  detail::bottom_ratios(work, p->lambda, p->k, gs);
  for (double r : gs.ratios)
    if (!(r > 0.0)) throw PositivityViolation("ground-state ratio not positive");
  if (which == Which::top) {
    gs.eigenvalue = SpectralPoint::from_lambda(-p->lambda, p->multiplicity);
    for (double& r : gs.ratios) r = -r;
    gs.left_ratio = gs.eigenvalue.k;
    gs.right_ratio = 1.0 / gs.eigenvalue.k;
  }
  detail::materialize(op, gs, std::max(s.truncation_used, op.size() + 16));
  if (which == Which::bottom) {
    const double floor = -1e-10;
    for (double v : gs.vector)
      if (v < floor) throw PositivityViolation("ground state changes sign");
  }
  if (!(gs.residual <= 1e-10)) {
    throw NoConvergence("ground-state residual " + std::to_string(gs.residual));
  }
  return gs;
}

/// Ground-state data from an explicitly supplied positive solution phi on
/// sites [start, start + values.size()); outside, phi is continued with the
/// given constant ratios. Used for non-normalizable solutions.
inline GroundStateResult ground_state_from_values(const JacobiOperator& op, double lambda, Index start,
                                                  const std::vector<double>& values, double left_ratio,
                                                  double right_ratio) {
  if (values.size() < 2) throw LengthMismatch("need at least two samples");
  GroundStateResult gs;
  gs.eigenvalue = SpectralPoint::from_lambda(lambda);
  gs.ratio_start = start;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (!(values[i] > 0.0)) throw PositivityViolation("supplied phi not positive");
    gs.ratios.push_back(values[i + 1] / values[i]);
  }
  gs.left_ratio = left_ratio;
  gs.right_ratio = right_ratio;
  gs.start = start;
  gs.vector = values;
  double res = 0.0, nrm = 0.0;
  for (Index n = start; n < start + static_cast<Index>(values.size()); ++n) {
    const double v = gs.at(n);
    nrm += v * v;
    if (n == start || n + 1 == start + static_cast<Index>(values.size())) continue;
    const double w = op.a_at(n - 1) * gs.at(n - 1) + op.a_at(n) * gs.at(n + 1) + (op.b_at(n) - lambda) * v;
    res += w * w;
  }
  gs.residual = std::sqrt(res / nrm);
  return gs;
}

}  // namespace jlt
