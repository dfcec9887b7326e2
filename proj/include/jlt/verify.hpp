#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "jlt/error.hpp"
#include "jlt/functional.hpp"
#include "jlt/jacobi.hpp"
#include "jlt/spectrum.hpp"

namespace jlt {

// ---------------------------------------------------------------------------
// Parallel loop. JACOBI_LT_THREADS caps the worker count (0 or unset: hardware).

inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("JACOBI_LT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) hw = std::min(hw, static_cast<unsigned>(v));
  }
  return hw;
}

/// Runs fn(i) for i in [0, n). Each index is processed exactly once; results
/// written by index keep the output independent of the schedule. The first
/// exception (lowest index) is rethrown after all workers finish.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Single checks

struct CheckOptions {
  double spectral_tol = 1e-9;
  double relative_floor = 1e-8;
  bool free_constants = false;
};

struct InequalityReport {
  InequalityName name = InequalityName::final;
  double gamma = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool passed = true;
  SpectrumResult spectrum;
  RhsBreakdown rhs_breakdown;
};

namespace detail {

inline void finish(InequalityReport& r, const CheckOptions& opt) {
  r.slack = r.rhs - r.lhs;
  const double floor = std::max(opt.relative_floor * std::max(1.0, r.rhs),
                                10.0 * opt.spectral_tol * static_cast<double>(r.spectrum.count()));
  r.passed = r.slack >= -floor;
}

}  // namespace detail

inline InequalityReport check(const JacobiOperator& op, InequalityName name, double gamma = 1.0,
                              const CheckOptions& opt = {}) {
  if (name == InequalityName::finalmatrix) name = InequalityName::final;
  if (name == InequalityName::orderalpha && !(gamma > 0.5)) throw DomainError("orderalpha needs gamma > 1/2");
  InequalityReport r;
  r.name = name;
  r.gamma = needs_gamma(name) ? gamma : 0.0;
  r.spectrum = eigenvalues_outside_band(op, opt.spectral_tol);
  r.rhs_breakdown = rhs_scalar(op, name, RhsOptions{.gamma = gamma, .free_constants = opt.free_constants});
  r.rhs = r.rhs_breakdown.total;
  r.lhs = lhs_sum(name, r.spectrum.points, gamma);
  detail::finish(r, opt);
  return r;
}

inline InequalityReport check(const BlockJacobiOperator& op, InequalityName name, double gamma = 1.0,
                              const CheckOptions& opt = {}) {
  if (name == InequalityName::final) name = InequalityName::finalmatrix;
  InequalityReport r;
  r.name = name;
  r.gamma = needs_gamma(name) ? gamma : 0.0;
  r.rhs_breakdown = rhs_block(op, name, RhsOptions{.gamma = gamma});
  r.spectrum = block_eigen(op, opt.spectral_tol);
  r.rhs = r.rhs_breakdown.total;
  r.lhs = lhs_sum(name, r.spectrum.points, gamma);
  detail::finish(r, opt);
  return r;
}

/// Reflectionless operator with the window sized so that the discarded
/// coefficients are below 1e-17.
inline JacobiOperator reflectionless_auto(double omega) {
  if (!(omega > 0.0)) throw DomainError("omega must be positive");
  const Index N = static_cast<Index>(std::ceil(20.0 / omega)) + 4;
  return make_reflectionless({omega, N});
}

/// e^(2w) - e^(-2w) - 4w, the value both sides take on the reflectionless family.
inline double reflectionless_value(double omega) { return 2.0 * std::sinh(2.0 * omega) - 4.0 * omega; }

// ---------------------------------------------------------------------------
// Random operators

struct RandomOperatorSpec {
  std::uint64_t seed = 1;
  Index window_half_width = 4;
  double potential_scale = 1.0;
  double offdiag_jitter = 0.3;
  int block_dim = 1;
};

namespace detail {

inline std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

inline void validate(const RandomOperatorSpec& s) {
  if (!(s.offdiag_jitter >= 0.0 && s.offdiag_jitter < 0.9)) throw DomainError("offdiag_jitter must lie in [0, 0.9)");
  if (s.window_half_width < 0) throw DomainError("window_half_width must be non-negative");
  if (s.block_dim < 1) throw DomainError("block_dim must be positive");
}

}  // namespace detail

inline JacobiOperator random_scalar(const RandomOperatorSpec& s, std::uint64_t trial) {
  detail::validate(s);
  auto eng = detail::trial_engine(s.seed, trial);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Index W = s.window_half_width;
  std::vector<double> a, b;
  for (Index n = -W; n <= W; ++n) {
    a.push_back(-1.0 + s.offdiag_jitter * u(eng));
    b.push_back(s.potential_scale * u(eng));
  }
  return make_scalar(-W, std::move(a), std::move(b));
}

// A(n) = -I + E with ||E||_F <= jitter < 1, so A(n) stays invertible.
inline BlockJacobiOperator random_block(const RandomOperatorSpec& s, std::uint64_t trial) {
  detail::validate(s);
  auto eng = detail::trial_engine(s.seed, trial);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int m = s.block_dim;
  const Index W = s.window_half_width;
  const double e = s.offdiag_jitter / (m * std::sqrt(2.0));
  std::vector<Matrix> A, B;
  for (Index n = -W; n <= W; ++n) {
    Matrix a = -Matrix::Identity(m, m);
    Matrix b(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        a(i, j) += Complex(e * u(eng), e * u(eng));
        b(i, j) = Complex(u(eng), u(eng));
      }
    A.push_back(std::move(a));
    B.push_back(0.5 * s.potential_scale * (b + b.adjoint()));
  }
  return make_block(m, -W, std::move(A), std::move(B));
}

// ---------------------------------------------------------------------------
// Fuzzing

struct FuzzStats {
  InequalityName name = InequalityName::final;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::size_t errors = 0;  // solver exceptions
  double min_slack = INFINITY;
  double min_relative_slack = INFINITY;  // slack / max(1, rhs)
  double max_ratio = 0.0;                // lhs / rhs
};

struct FuzzSummary {
  RandomOperatorSpec spec;
  std::size_t trials = 0;
  std::vector<FuzzStats> stats;
  std::vector<InequalityReport> failed;  // reports with passed = false
  std::vector<std::string> error_messages;
  std::size_t total_failures() const {
    std::size_t f = 0;
    for (const auto& s : stats) f += s.failures + s.errors;
    return f;
  }
};

inline bool applicable(InequalityName n, bool block, bool free) {
  if (block) {
    return n == InequalityName::final || n == InequalityName::finalmatrix ||
           ((n == InequalityName::orderalpha || n == InequalityName::hsfree || n == InequalityName::hsfree2) && free);
  }
  return (n != InequalityName::hsfree && n != InequalityName::hsfree2) || free;
}

/// Runs check for every trial and name. Names that do not apply to the
/// generated operators are skipped.
inline FuzzSummary fuzz(const RandomOperatorSpec& spec, const std::vector<InequalityName>& names,
                        std::size_t trials, double gamma = 1.0, const CheckOptions& opt = {}) {
  if (trials < 1) throw DomainError("trials must be at least 1");
  detail::validate(spec);
  const bool block = spec.block_dim > 1;
  const bool free = spec.offdiag_jitter == 0.0;
  struct Cell {
    std::vector<InequalityReport> reports;
    std::vector<std::pair<std::size_t, std::string>> errors;  // name index, message
  };
  std::vector<Cell> cells(trials);
  parallel_for(trials, [&](std::size_t t) {
    Cell& c = cells[t];
    try {
      if (block) {
        const BlockJacobiOperator op = random_block(spec, t);
        for (std::size_t j = 0; j < names.size(); ++j) {
          if (!applicable(names[j], true, free)) continue;
          try {
            c.reports.push_back(check(op, names[j], gamma, opt));
          } catch (const Error& e) {
            c.errors.emplace_back(j, e.what());
          }
        }
      } else {
        const JacobiOperator op = random_scalar(spec, t);
        for (std::size_t j = 0; j < names.size(); ++j) {
          if (!applicable(names[j], false, free)) continue;
          try {
            c.reports.push_back(check(op, names[j], gamma, opt));
          } catch (const Error& e) {
            c.errors.emplace_back(j, e.what());
          }
        }
      }
    } catch (const Error& e) {
      for (std::size_t j = 0; j < names.size(); ++j) c.errors.emplace_back(j, e.what());
    }
  });

  FuzzSummary s;
  s.spec = spec;
  s.trials = trials;
  for (InequalityName n : names) {
    FuzzStats st;
    st.name = (block && n == InequalityName::final) ? InequalityName::finalmatrix
              : (!block && n == InequalityName::finalmatrix) ? InequalityName::final
                                                               : n;
    s.stats.push_back(st);
  }
  auto stat_for = [&](InequalityName n) -> FuzzStats& {
    for (auto& st : s.stats)
      if (st.name == n) return st;
    return s.stats.front();
  };
  for (const Cell& c : cells) {
    for (const auto& r : c.reports) {
      FuzzStats& st = stat_for(r.name);
      ++st.checks;
      st.min_slack = std::min(st.min_slack, r.slack);
      st.min_relative_slack = std::min(st.min_relative_slack, r.slack / std::max(1.0, r.rhs));
      if (r.rhs > 0.0) st.max_ratio = std::max(st.max_ratio, r.lhs / r.rhs);
      if (!r.passed) {
        ++st.failures;
        s.failed.push_back(r);
      }
    }
    for (const auto& [j, msg] : c.errors) {
      ++s.stats[j].errors;
      s.error_messages.push_back(msg);
    }
  }
  return s;
}

/// lhs/rhs for the potential eta * b (a unchanged).
struct CouplingRow {
  double eta = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

inline std::vector<CouplingRow> coupling_scan(const JacobiOperator& op, InequalityName name,
                                              const std::vector<double>& etas, double gamma = 1.0,
                                              const CheckOptions& opt = {}) {
  std::vector<CouplingRow> rows(etas.size());
  parallel_for(etas.size(), [&](std::size_t i) {
    JacobiOperator scaled = op;
    for (double& b : scaled.b) b *= etas[i];
    const InequalityReport r = check(scaled, name, gamma, opt);
    rows[i] = {etas[i], r.lhs, r.rhs, r.rhs > 0.0 ? r.lhs / r.rhs : 0.0};
  });
  return rows;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw LengthMismatch("need at least two matching samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Dominance of the G-based left-hand side over the power sums

struct DominanceRow {
  InequalityName name;
  double normalized_lhs;
};

struct DominanceTable {
  double gamma = 1.0;
  // orderalpha: sum m G(|lambda|) / B(gamma - 1/2, 2)
  // hsfree:     sum m (|lambda| - 2)^gamma / d_gamma
  // hsfree2:    sum m (|lambda| - 2)^(gamma + 1/2)
  std::vector<DominanceRow> rows;
  bool dominates_hsfree = true;
  bool dominates_hsfree2 = true;

  double value(InequalityName n) const {
    for (const auto& r : rows)
      if (r.name == n) return r.normalized_lhs;
    return 0.0;
  }
};

inline DominanceTable dominance_from_points(const std::vector<SpectralPoint>& pts, double gamma) {
  if (!(gamma > 0.5)) throw DomainError("dominance needs gamma > 1/2");
  DominanceTable t;
  t.gamma = gamma;
  const double oa = lhs_sum(InequalityName::orderalpha, pts, gamma) / beta_fn(gamma - 0.5, 2.0);
  const double h1 = lhs_sum(InequalityName::hsfree, pts, gamma) / d_gamma(gamma);
  const double h2 = lhs_sum(InequalityName::hsfree2, pts, gamma);
  t.rows = {{InequalityName::orderalpha, oa}, {InequalityName::hsfree, h1}, {InequalityName::hsfree2, h2}};
  t.dominates_hsfree = oa >= h1;
  t.dominates_hsfree2 = oa >= h2;
  return t;
}

inline DominanceTable dominance_table(const JacobiOperator& op, double gamma, double tol = 1e-9) {
  if (!is_discrete_schroedinger(op)) throw DomainError("dominance table needs a == -1");
  return dominance_from_points(eigenvalues_outside_band(op, tol).points, gamma);
}

inline DominanceTable dominance_table(const BlockJacobiOperator& op, double gamma, double tol = 1e-9) {
  if (!is_discrete_schroedinger(op)) throw DomainError("dominance table needs A == -I");
  return dominance_from_points(block_eigen(op, tol).points, gamma);
}

}  // namespace jlt
