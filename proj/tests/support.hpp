#pragma once

#include <cmath>

#include "jlt/jlt.hpp"

namespace testing_support {

using jlt::Index;
using jlt::Matrix;

inline jlt::JacobiOperator single_site(double b0) { return jlt::make_scalar(0, {-1.0}, {b0}); }

inline jlt::JacobiOperator free_operator() { return jlt::make_scalar(0, {}, {}); }

inline Matrix diag2(double x, double y) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = x;
  m(1, 1) = y;
  return m;
}

inline jlt::BlockJacobiOperator block_site(const Matrix& B0) {
  const int m = static_cast<int>(B0.rows());
  return jlt::make_block(m, 0, {-Matrix::Identity(m, m)}, {B0});
}

inline double rel(double x, double ref) { return std::abs(x - ref) / std::max(1e-300, std::abs(ref)); }

}  // namespace testing_support
