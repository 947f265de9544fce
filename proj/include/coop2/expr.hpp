// Restricted expression language for user-supplied vector fields.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// Names x1, x2, x3 are state variables; any other name must be a parameter.
// Functions: sqrt, exp, log.
#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "coop2/models.hpp"

namespace coop2 {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Value and gradient with respect to (x1, x2, x3).
struct Dual {
  double v = 0.0;
  Vec3 g{};
};

class Expression {
 public:
  /// Parameters are bound at parse time. Throws ParseError.
  static Expression parse(const std::string& text, const std::map<std::string, double>& params);

  double eval(const Vec3& x) const;
  Dual eval_dual(const Vec3& x) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

/// Builds a model from the JSON model schema:
///   { "name": str, "params": {str: num}, "f": [str, str, str],
///     "box": {"lower": [3 nums], "upper": [3 nums]},
///     "sign_certificate": [[str x3] x3]   (optional),
///     "signature": [+-1 x3]                (optional),
///     "x0": [3 nums]                       (optional) }
/// The Jacobian is obtained by forward-mode differentiation of f.
/// Throws ParseError or std::invalid_argument.
SystemModel model_from_json(const nlohmann::json& spec);

}  // namespace coop2
