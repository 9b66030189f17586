#include <doctest.h>

#include <charconv>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "occm/error.hpp"
#include "occm/expr.hpp"

using occm::EvalError;
using occm::Expr;
using occm::ParseError;
using occm::Vec2;

TEST_CASE("parse builds the expected trees") {
  const Expr e = Expr::parse("x1*u2");
  const auto& n = e.nodes();
  const auto& root = n[static_cast<std::size_t>(e.root())];
  CHECK(root.op == Expr::Op::mul);
  CHECK(n[static_cast<std::size_t>(root.lhs)].op == Expr::Op::variable);
  CHECK(n[static_cast<std::size_t>(root.lhs)].var == occm::Var::x1);
  CHECK(n[static_cast<std::size_t>(root.rhs)].var == occm::Var::u2);

  const Expr neg = Expr::parse("-x1^2");
  const auto& nr = neg.nodes()[static_cast<std::size_t>(neg.root())];
  CHECK(nr.op == Expr::Op::negate);
  CHECK(neg.nodes()[static_cast<std::size_t>(nr.lhs)].op == Expr::Op::pow);
  CHECK(neg.evaluate({3.0, 0.0}, {}) == doctest::Approx(-9.0));

  const Expr ex58 = Expr::parse("1 - x1 - x1^2");
  CHECK(ex58.to_string() == "1 - x1 - x1^2");
  CHECK(ex58.evaluate({1.0, 0.0}, {}) == doctest::Approx(-1.0));
  CHECK(ex58.evaluate({-1.0, 0.0}, {}) == doctest::Approx(1.0));
}

TEST_CASE("precedence and associativity") {
  CHECK(Expr::parse("2^3^2").evaluate({}, {}) == doctest::Approx(512.0));
  CHECK(Expr::parse("8/4/2").evaluate({}, {}) == doctest::Approx(1.0));
  CHECK(Expr::parse("1 - 2 - 3").evaluate({}, {}) == doctest::Approx(-4.0));
  CHECK(Expr::parse("2*-3").evaluate({}, {}) == doctest::Approx(-6.0));
  CHECK(Expr::parse("2^-1").evaluate({}, {}) == doctest::Approx(0.5));
  CHECK(Expr::parse("(-2)^2").evaluate({}, {}) == doctest::Approx(4.0));
  CHECK(Expr::parse("  max( 1 , min(x1, 3) ) ").evaluate({5.0, 0.0}, {}) == doctest::Approx(3.0));
  CHECK(Expr::parse("2*pi").evaluate({}, {}) == doctest::Approx(6.283185307179586));
  CHECK(Expr::parse("1.5e1 + .5").evaluate({}, {}) == doctest::Approx(15.5));
}

TEST_CASE("evaluate examples") {
  CHECK(Expr::parse("x1*u2").evaluate({2.0, 0.0}, {0.0, 1.0}) == 2.0);
  CHECK(Expr::parse("(x1^2+x2^2)^2 - x1^3").evaluate({0.5, 0.0}, {}) == doctest::Approx(-0.0625));
  CHECK(Expr::parse("abs(x1)").evaluate({-3.0, 0.0}, {}) == 3.0);
}

TEST_CASE("parse errors carry offsets") {
  CHECK_THROWS_AS(Expr::parse(""), ParseError);
  try {
    Expr::parse("x1 + y");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
  }
  try {
    Expr::parse("1 + * 2");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(Expr::parse("min(1)"), ParseError);
  CHECK_THROWS_AS(Expr::parse("sqrt(1, 2)"), ParseError);
  CHECK_THROWS_AS(Expr::parse("x1^x2"), ParseError);
  CHECK_THROWS_AS(Expr::parse("(x1"), ParseError);
  CHECK_THROWS_AS(Expr::parse("2 x1"), ParseError);
  CHECK_THROWS_AS(Expr::parse("foo(1)"), ParseError);
}

TEST_CASE("evaluation errors instead of NaN") {
  CHECK_THROWS_AS(Expr::parse("1/x1").evaluate({0.0, 0.0}, {}), EvalError);
  CHECK_THROWS_AS(Expr::parse("sqrt(x1)").evaluate({-1.0, 0.0}, {}), EvalError);
  CHECK_THROWS_AS(Expr::parse("x1^0.5").evaluate({-1.0, 0.0}, {}), EvalError);
  try {
    Expr::parse("1 + sqrt(x2)").evaluate({0.0, -4.0}, {});
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(e.offset() == 4);
  }
}

// ---------------------------------------------------------------------------
// Differential test: a test-side tree type with its own printer and
// interpreter, checked against parse + evaluate of the library.

namespace {

struct TNode {
  enum Kind { lit, var, neg, add, sub, mul, div, pow, fn1, fn2 } kind = lit;
  double value = 0.0;
  int var_index = 0;
  int fn = 0;  // fn1: abs sqrt sin cos exp; fn2: min max
  std::unique_ptr<TNode> a, b;
};

const char* kVarNames[] = {"x1", "x2", "u1", "u2"};
const char* kFn1[] = {"abs", "sqrt", "sin", "cos", "exp"};
const char* kFn2[] = {"min", "max"};

std::string lit_text(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Fully parenthesized, so it does not rely on the library's precedence logic.
std::string show(const TNode& n) {
  switch (n.kind) {
    case TNode::lit:
      return lit_text(n.value);
    case TNode::var:
      return kVarNames[n.var_index];
    case TNode::neg:
      return "(-" + show(*n.a) + ")";
    case TNode::add:
      return "(" + show(*n.a) + "+" + show(*n.b) + ")";
    case TNode::sub:
      return "(" + show(*n.a) + "-" + show(*n.b) + ")";
    case TNode::mul:
      return "(" + show(*n.a) + "*" + show(*n.b) + ")";
    case TNode::div:
      return "(" + show(*n.a) + "/" + show(*n.b) + ")";
    case TNode::pow:
      return "(" + show(*n.a) + "^" + show(*n.b) + ")";
    case TNode::fn1:
      return std::string(kFn1[n.fn]) + "(" + show(*n.a) + ")";
    case TNode::fn2:
      return std::string(kFn2[n.fn]) + "(" + show(*n.a) + "," + show(*n.b) + ")";
  }
  return "";
}

std::optional<double> checked(double v) {
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<double> interp(const TNode& n, const double vars[4]) {
  switch (n.kind) {
    case TNode::lit:
      return n.value;
    case TNode::var:
      return vars[n.var_index];
    case TNode::neg: {
      auto x = interp(*n.a, vars);
      if (!x) return x;
      return -*x;
    }
    case TNode::fn1: {
      auto x = interp(*n.a, vars);
      if (!x) return x;
      switch (n.fn) {
        case 0:
          return std::fabs(*x);
        case 1:
          if (*x < 0) return std::nullopt;
          return std::sqrt(*x);
        case 2:
          return std::sin(*x);
        case 3:
          return std::cos(*x);
        default:
          return checked(std::exp(*x));
      }
    }
    default:
      break;
  }
  auto x = interp(*n.a, vars);
  if (!x) return x;
  auto y = interp(*n.b, vars);
  if (!y) return y;
  switch (n.kind) {
    case TNode::add:
      return checked(*x + *y);
    case TNode::sub:
      return checked(*x - *y);
    case TNode::mul:
      return checked(*x * *y);
    case TNode::div:
      if (*y == 0.0) return std::nullopt;
      return checked(*x / *y);
    case TNode::pow:
      return checked(std::pow(*x, *y));
    case TNode::fn2:
      return n.fn == 0 ? std::min(*x, *y) : std::max(*x, *y);
    default:
      return std::nullopt;
  }
}

std::unique_ptr<TNode> random_tree(std::mt19937_64& rng, int depth, bool constant_only = false) {
  auto n = std::make_unique<TNode>();
  std::uniform_int_distribution<int> pick(0, 9);
  if (depth == 0 || pick(rng) < 3) {
    if (!constant_only && pick(rng) < 6) {
      n->kind = TNode::var;
      n->var_index = std::uniform_int_distribution<int>(0, 3)(rng);
    } else {
      n->kind = TNode::lit;
      n->value = std::uniform_int_distribution<int>(0, 20)(rng) / 4.0;
    }
    return n;
  }
  const int k = std::uniform_int_distribution<int>(0, 7)(rng);
  switch (k) {
    case 0:
      n->kind = TNode::neg;
      n->a = random_tree(rng, depth - 1, constant_only);
      return n;
    case 1:
      n->kind = TNode::fn1;
      n->fn = std::uniform_int_distribution<int>(0, 4)(rng);
      n->a = random_tree(rng, depth - 1, constant_only);
      return n;
    case 2:
      n->kind = TNode::fn2;
      n->fn = std::uniform_int_distribution<int>(0, 1)(rng);
      break;
    case 3:
      n->kind = TNode::pow;
      n->a = random_tree(rng, depth - 1, constant_only);
      n->b = random_tree(rng, std::min(depth - 1, 1), true);
      return n;
    default:
      n->kind = static_cast<TNode::Kind>(TNode::add + (k - 4));
      break;
  }
  n->a = random_tree(rng, depth - 1, constant_only);
  n->b = random_tree(rng, depth - 1, constant_only);
  return n;
}

}  // namespace

TEST_CASE("evaluate matches an independent interpreter on random trees") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  int compared = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto tree = random_tree(rng, 6);
    const std::string text = show(*tree);
    INFO(text);
    const Expr e = Expr::parse(text);
    for (int s = 0; s < 3; ++s) {
      const double vars[4] = {coord(rng), coord(rng), coord(rng), coord(rng)};
      const auto want = interp(*tree, vars);
      if (want) {
        const double got = e.evaluate({vars[0], vars[1]}, {vars[2], vars[3]});
        REQUIRE_MESSAGE(got == *want, text);
        ++compared;
      } else {
        CHECK_THROWS_AS_MESSAGE(e.evaluate({vars[0], vars[1]}, {vars[2], vars[3]}), EvalError, text);
      }
    }
    // Canonical printing re-parses to the same tree.
    const Expr again = Expr::parse(e.to_string());
    REQUIRE_MESSAGE(again.same_tree(e), text << " -> " << e.to_string());
  }
  CHECK(compared > 1500);
}
