#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "jlt/commutation.hpp"
#include "jlt/continuum.hpp"
#include "jlt/functional.hpp"
#include "jlt/io.hpp"
#include "jlt/spectrum.hpp"
#include "jlt/verify.hpp"

namespace jlt {

/// 12 significant digits, '.' separator, "nan"/"inf" spelled out.
inline std::string fmt12(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// JSON numbers must be finite; non-finite values become null.
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(const SpectralPoint& p) {
  return {{"lambda", p.lambda}, {"k", p.k}, {"multiplicity", p.multiplicity}};
}

inline json to_json(const SpectrumResult& s) {
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back(to_json(p));
  return {{"points", pts},
          {"count", s.count()},
          {"truncation_used", s.truncation_used},
          {"stabilization_gap", s.stabilization_gap},
          {"band_edge_flag", s.band_edge_flag}};
}

inline json to_json(const RhsBreakdown& r) {
  return {{"potential_term", r.potential_term}, {"offdiag_term", r.offdiag_term}, {"total", r.total}};
}

inline json to_json(const InequalityReport& r) {
  return {{"name", to_string(r.name)}, {"gamma", r.gamma},          {"lhs", r.lhs},
          {"rhs", r.rhs},              {"slack", r.slack},          {"passed", r.passed},
          {"spectrum", to_json(r.spectrum)}, {"rhs_breakdown", to_json(r.rhs_breakdown)}};
}

inline json to_json(const FuzzSummary& s) {
  json stats = json::array();
  for (const auto& st : s.stats) {
    stats.push_back({{"name", to_string(st.name)},
                     {"checks", st.checks},
                     {"failures", st.failures},
                     {"errors", st.errors},
                     {"min_slack", num(st.min_slack)},
                     {"min_relative_slack", num(st.min_relative_slack)},
                     {"max_ratio", st.max_ratio}});
  }
  json failed = json::array();
  for (const auto& r : s.failed) failed.push_back(to_json(r));
  return {{"spec",
           {{"seed", s.spec.seed},
            {"window_half_width", s.spec.window_half_width},
            {"potential_scale", s.spec.potential_scale},
            {"offdiag_jitter", s.spec.offdiag_jitter},
            {"block_dim", s.spec.block_dim}}},
          {"trials", s.trials},
          {"stats", stats},
          {"failed", failed},
          {"errors", s.error_messages},
          {"total_failures", s.total_failures()}};
}

inline json to_json(const EliminationResult& r) {
  json steps = json::array();
  for (const auto& c : r.chain) {
    steps.push_back({{"eigenvalue", to_json(c.input_eigenvalue)},
                     {"sum_identity_residual", c.sum_identity_residual},
                     {"product_identity_residual", c.product_identity_residual},
                     {"removed_only", c.removed_only},
                     {"spectrum_shift", c.spectrum_shift}});
  }
  return {{"kind", "scalar"},
          {"steps", steps},
          {"chain_sum_residual", r.chain_sum_residual},
          {"chain_product_residual", r.chain_product_residual},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"slack", r.rhs - r.lhs},
          {"certificate", r.certificate},
          {"certified_gap", r.certified_gap},
          {"final_operator", to_json(r.final_operator)}};
}

inline json to_json(const BlockEliminationResult& r) {
  json steps = json::array();
  for (const auto& c : r.chain) {
    steps.push_back({{"eigenvalue", to_json(c.input_eigenvalue)},
                     {"sum_identity_residual", c.sum_identity_residual},
                     {"product_identity_residual", c.product_identity_residual},
                     {"riccati_residual", c.chain.max_riccati_residual()},
                     {"trace_limit_error", c.trace_limit_error},
                     {"cut", c.cut},
                     {"tail_A", c.tail_A},
                     {"tail_B", c.tail_B},
                     {"removed_only", c.removed_only}});
  }
  return {{"kind", "block"},
          {"steps", steps},
          {"chain_sum_residual", r.chain_sum_residual},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"slack", r.rhs - r.lhs},
          {"certificate", r.certificate},
          {"certified_gap", r.certified_gap},
          {"final_operator", to_json(r.final_operator)}};
}

/// G_gamma table on a grid geometric in lambda - 2. R1/R2 columns are left
/// empty unless gamma = 1.
inline std::string gfun_csv(double gamma, double lambda_min, double lambda_max, int points) {
  if (!(lambda_min > 2.0) || !(lambda_max >= lambda_min) || points < 1)
    throw DomainError("need 2 < lambda-min <= lambda-max and points >= 1");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    grid[static_cast<std::size_t>(i)] = 2.0 + (lambda_min - 2.0) * std::pow((lambda_max - 2.0) / (lambda_min - 2.0), t);
  }
  grid.back() = lambda_max;
  std::vector<std::string> lines(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const double l = grid[i];
    std::string row = fmt12(l) + "," + fmt12(gamma) + ",";
    if (gamma == 1.0) {
      const PowerBoundRatios r = power_bound_ratios(l);
      row += fmt12(r.G) + "," + fmt12(r.R1) + "," + fmt12(r.R2);
    } else {
      row += fmt12(g_gamma(gamma, l)) + ",,";
    }
    lines[i] = std::move(row);
  });
  std::string out = "lambda,gamma,G,R1,R2\n";
  for (const auto& l : lines) out += l + "\n";
  return out;
}

inline std::string continuum_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "gamma,c,k,lhs,rhs,ratio,bound,margin\n";
  for (const auto& r : rows) {
    if (r.sign_loss) {
      out += fmt12(r.gamma) + "," + fmt12(r.c) + "," + std::to_string(r.k) + ",nan,nan,nan,nan,nan\n";
      continue;
    }
    out += fmt12(r.gamma) + "," + fmt12(r.c) + "," + std::to_string(r.k) + "," + fmt12(r.lhs) + "," +
           fmt12(r.rhs_integral) + "," + fmt12(r.ratio) + "," + fmt12(r.bound) + "," + fmt12(r.margin) + "\n";
  }
  return out;
}

}  // namespace jlt
