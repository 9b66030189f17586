#pragma once

// Arithmetic expressions over the state (x1, x2) and control (u1, u2).
//
// Grammar, loosest binding first:
//   sum      := product (('+' | '-') product)*
//   product  := unary (('*' | '/') unary)*
//   unary    := '-' unary | power
//   power    := primary ('^' exponent)?
//   exponent := '-' exponent | power
//   primary  := number | 'pi' | variable | func '(' sum (',' sum)* ')' | '(' sum ')'
//
// So '^' binds tighter than unary minus ("-x1^2" is -(x1^2)) and is
// right-associative. Exponents may not reference variables.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "occm/vec2.hpp"

namespace occm {

enum class Var : std::uint8_t { x1, x2, u1, u2 };
enum class Func : std::uint8_t { abs, sqrt, sin, cos, exp, min, max };

class Expr {
 public:
  enum class Op : std::uint8_t { constant, pi, variable, negate, add, sub, mul, div, pow, call };

  struct Node {
    Op op = Op::constant;
    double value = 0.0;  // Op::constant
    Var var = Var::x1;   // Op::variable
    Func func = Func::abs;
    std::int32_t lhs = -1;  // operand / first argument
    std::int32_t rhs = -1;  // second operand / second argument
    std::size_t offset = 0; // byte offset of the token in the source text
  };

  /// Throws ParseError on malformed input, unknown identifiers, wrong arity
  /// or a variable inside an exponent.
  static Expr parse(std::string_view text);

  /// Throws EvalError on division by zero, sqrt of a negative number or any
  /// other non-finite intermediate.
  double evaluate(Vec2 x, Vec2 u) const;

  /// Canonical text with the minimal parentheses; parse(to_string()) yields
  /// a structurally identical tree.
  std::string to_string() const;

  bool uses(Var v) const;
  bool uses_control() const { return uses(Var::u1) || uses(Var::u2); }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::int32_t root() const { return root_; }
  const std::string& source() const { return source_; }

  /// Structural equality; source offsets are ignored.
  bool same_tree(const Expr& other) const;

 private:
  friend class ExprParser;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
  std::string source_;
};

std::string_view to_string(Func f);
std::string_view to_string(Var v);

}  // namespace occm
