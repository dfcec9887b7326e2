#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include "json.hpp"

#include "jlt/jacobi.hpp"

namespace jlt {

using json = nlohmann::json;
using AnyOperator = std::variant<JacobiOperator, BlockJacobiOperator>;

namespace detail {

inline json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out.push_back({{"re", m(r, c).real()}, {"im", m(r, c).imag()}});
  return out;
}

inline Matrix matrix_from_json(const json& j, int m) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(m) * m)
    throw LengthMismatch("block entry must hold block_dim^2 values");
  Matrix out(m, m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      const json& e = j[static_cast<std::size_t>(r * m + c)];
      if (e.is_number()) {
        out(r, c) = Complex(e.get<double>(), 0.0);
      } else {
        out(r, c) = Complex(e.at("re").get<double>(), e.value("im", 0.0));
      }
    }
  }
  return out;
}

}  // namespace detail

inline json to_json(const JacobiOperator& op) {
  return {{"kind", "scalar"}, {"window_start", op.window_start}, {"a", op.a}, {"b", op.b}};
}

inline json to_json(const BlockJacobiOperator& op) {
  json A = json::array(), B = json::array();
  for (const Matrix& m : op.A) A.push_back(detail::matrix_to_json(m));
  for (const Matrix& m : op.B) B.push_back(detail::matrix_to_json(m));
  return {{"kind", "block"}, {"window_start", op.window_start}, {"block_dim", op.block_dim},
          {"a", A}, {"b", B}};
}

inline AnyOperator operator_from_json(const json& j) {
  const std::string kind = j.value("kind", "scalar");
  const Index n0 = j.value("window_start", Index{0});
  if (kind == "scalar") {
    return make_scalar(n0, j.at("a").get<std::vector<double>>(), j.at("b").get<std::vector<double>>());
  }
  if (kind != "block") throw InputError("unknown operator kind '" + kind + "'");
  const int m = j.value("block_dim", 1);
  std::vector<Matrix> A, B;
  for (const json& e : j.at("a")) A.push_back(detail::matrix_from_json(e, m));
  for (const json& e : j.at("b")) B.push_back(detail::matrix_from_json(e, m));
  return make_block(m, n0, std::move(A), std::move(B));
}

inline std::string serialize(const AnyOperator& op) {
  return std::visit([](const auto& o) { return to_json(o).dump(); }, op);
}

inline AnyOperator parse_operator(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid operator JSON: ") + e.what());
  }
  try {
    return operator_from_json(j);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed operator JSON: ") + e.what());
  }
}

inline AnyOperator load_operator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_operator(ss.str());
}

}  // namespace jlt
