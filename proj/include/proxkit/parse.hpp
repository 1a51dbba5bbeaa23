#pragma once

#include <set>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "proxkit/function.hpp"

namespace proxkit {

/// Malformed or inconsistent declarative input. The CLI maps this (and only
/// this) to its configuration-error exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

/// Every recognized object lists its allowed keys; anything else is a typo
/// or a schema mismatch and gets rejected instead of ignored.
inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      config_fail(where, "unknown key \"" + item.key() + "\"");
    }
  }
}

inline double get_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) config_fail(where, "missing key \"" + key + "\"");
  if (!j.at(key).is_number()) config_fail(where, "\"" + key + "\" must be a number");
  return j.at(key).get<double>();
}

inline int get_dim(const json& j, const std::string& where) {
  if (!j.contains("dim")) config_fail(where, "missing key \"dim\"");
  if (!j.at("dim").is_number_integer()) config_fail(where, "\"dim\" must be an integer");
  const int dim = j.at("dim").get<int>();
  if (dim < 1) config_fail(where, "\"dim\" must be >= 1");
  return dim;
}

inline Vector get_vector(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) config_fail(where, "missing key \"" + key + "\"");
  const json& a = j.at(key);
  if (!a.is_array() || a.empty()) config_fail(where, "\"" + key + "\" must be a nonempty array");
  Vector v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) config_fail(where, "\"" + key + "\" must contain numbers");
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

inline Matrix get_matrix(const json& a, const std::string& where) {
  if (!a.is_array() || a.empty()) config_fail(where, "\"q\" must be a matrix (array of rows)");
  const std::size_t rows = a.size();
  if (!a[0].is_array()) config_fail(where, "\"q\" rows must be arrays");
  const std::size_t cols = a[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!a[r].is_array() || a[r].size() != cols) {
      config_fail(where, "\"q\" rows must all have the same length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!a[r][c].is_number()) config_fail(where, "\"q\" must contain numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a[r][c].get<double>();
    }
  }
  return m;
}

}  // namespace detail

/// Builds a catalog function from its declarative JSON form. Factory
/// validation errors surface as ConfigError with the offending path.
inline ConvexFunction function_from_json(const nlohmann::json& j,
                                         const std::string& where = "function") {
  using detail::config_fail;
  if (!j.is_object()) config_fail(where, "expected an object");
  if (!j.contains("type") || !j.at("type").is_string()) {
    config_fail(where, "missing string key \"type\"");
  }
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "zero") {
      detail::reject_unknown_keys(j, {"type", "dim"}, where);
      return zero(detail::get_dim(j, where));
    }
    if (type == "quadratic") {
      detail::reject_unknown_keys(j, {"type", "dim", "q", "b", "c"}, where);
      if (!j.contains("q")) config_fail(where, "missing key \"q\"");
      Matrix Q;
      if (j.at("q").is_number()) {
        // Scalar shorthand: q * identity on the declared dimension.
        const int dim = detail::get_dim(j, where);
        Q = j.at("q").get<double>() * Matrix::Identity(dim, dim);
      } else {
        Q = detail::get_matrix(j.at("q"), where);
        if (j.contains("dim") && detail::get_dim(j, where) != Q.rows()) {
          config_fail(where, "\"dim\" disagrees with the shape of \"q\"");
        }
      }
      Vector b = Vector::Zero(Q.rows());
      if (j.contains("b")) {
        if (j.at("b").is_number() && Q.rows() == 1) {
          b[0] = j.at("b").get<double>();
        } else {
          b = detail::get_vector(j, "b", where);
        }
      }
      const double c = j.contains("c") ? detail::get_number(j, "c", where) : 0.0;
      return quadratic(std::move(Q), std::move(b), c);
    }
    if (type == "abs_sum") {
      detail::reject_unknown_keys(j, {"type", "dim", "weight"}, where);
      return abs_sum(detail::get_number(j, "weight", where), detail::get_dim(j, where));
    }
    if (type == "eucl_norm") {
      detail::reject_unknown_keys(j, {"type", "dim", "weight"}, where);
      return eucl_norm(detail::get_number(j, "weight", where), detail::get_dim(j, where));
    }
    if (type == "indicator_box") {
      detail::reject_unknown_keys(j, {"type", "lo", "hi"}, where);
      return indicator_box(detail::get_vector(j, "lo", where),
                           detail::get_vector(j, "hi", where));
    }
    if (type == "indicator_ball") {
      detail::reject_unknown_keys(j, {"type", "center", "radius"}, where);
      return indicator_ball(detail::get_vector(j, "center", where),
                            detail::get_number(j, "radius", where));
    }
    if (type == "huber") {
      detail::reject_unknown_keys(j, {"type", "dim", "delta"}, where);
      return huber(detail::get_number(j, "delta", where), detail::get_dim(j, where));
    }
    if (type == "perturbed") {
      detail::reject_unknown_keys(j, {"type", "sigma", "base"}, where);
      if (!j.contains("base")) config_fail(where, "missing key \"base\"");
      return perturbed(function_from_json(j.at("base"), where + ".base"),
                       detail::get_number(j, "sigma", where));
    }
    if (type == "shifted") {
      detail::reject_unknown_keys(j, {"type", "offset", "base"}, where);
      if (!j.contains("base")) config_fail(where, "missing key \"base\"");
      return shifted(function_from_json(j.at("base"), where + ".base"),
                     detail::get_number(j, "offset", where));
    }
  } catch (const std::invalid_argument& e) {
    config_fail(where, e.what());
  }
  detail::config_fail(where, "unknown function type \"" + type + "\"");
}

/// Declarative form of f; function_from_json(function_to_json(f)) rebuilds a
/// structurally equal function.
inline nlohmann::json function_to_json(const ConvexFunction& f) {
  using nlohmann::json;
  return std::visit(
      detail::Overloaded{
          [&](const ZeroNode&) { return json{{"type", "zero"}, {"dim", f.dim()}}; },
          [&](const QuadraticNode& n) {
            json rows = json::array();
            for (Eigen::Index r = 0; r < n.Q.rows(); ++r) {
              json row = json::array();
              for (Eigen::Index c = 0; c < n.Q.cols(); ++c) row.push_back(n.Q(r, c));
              rows.push_back(row);
            }
            json b = json::array();
            for (Eigen::Index i = 0; i < n.b.size(); ++i) b.push_back(n.b[i]);
            return json{{"type", "quadratic"}, {"q", rows}, {"b", b}, {"c", n.c}};
          },
          [&](const AbsSumNode& n) {
            return json{{"type", "abs_sum"}, {"weight", n.weight}, {"dim", f.dim()}};
          },
          [&](const EuclNormNode& n) {
            return json{{"type", "eucl_norm"}, {"weight", n.weight}, {"dim", f.dim()}};
          },
          [&](const IndicatorBoxNode& n) {
            json lo = json::array(), hi = json::array();
            for (Eigen::Index i = 0; i < n.lo.size(); ++i) {
              lo.push_back(n.lo[i]);
              hi.push_back(n.hi[i]);
            }
            return json{{"type", "indicator_box"}, {"lo", lo}, {"hi", hi}};
          },
          [&](const IndicatorBallNode& n) {
            json c = json::array();
            for (Eigen::Index i = 0; i < n.center.size(); ++i) c.push_back(n.center[i]);
            return json{{"type", "indicator_ball"}, {"center", c}, {"radius", n.radius}};
          },
          [&](const HuberNode& n) {
            return json{{"type", "huber"}, {"delta", n.delta}, {"dim", f.dim()}};
          },
          [&](const PerturbedNode& n) {
            return json{{"type", "perturbed"}, {"sigma", n.sigma},
                        {"base", function_to_json(*n.base)}};
          },
          [&](const ShiftedNode& n) {
            return json{{"type", "shifted"}, {"offset", n.offset},
                        {"base", function_to_json(*n.base)}};
          }},
      f.node());
}

}  // namespace proxkit
