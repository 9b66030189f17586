#include "occm/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "occm/error.hpp"

namespace occm {

namespace {

struct FuncInfo {
  std::string_view name;
  Func func;
  int arity;
};

constexpr std::array<FuncInfo, 7> kFuncs{{
    {"abs", Func::abs, 1},
    {"sqrt", Func::sqrt, 1},
    {"sin", Func::sin, 1},
    {"cos", Func::cos, 1},
    {"exp", Func::exp, 1},
    {"min", Func::min, 2},
    {"max", Func::max, 2},
}};

constexpr int arity_of(Func f) {
  for (const auto& info : kFuncs) {
    if (info.func == f) return info.arity;
  }
  return 0;
}

// Binding level used by the printer: a child is parenthesized when its level
// is below what the parent slot requires.
int level(Expr::Op op) {
  using Op = Expr::Op;
  switch (op) {
    case Op::add:
    case Op::sub:
      return 1;
    case Op::mul:
    case Op::div:
      return 2;
    case Op::negate:
      return 3;
    case Op::pow:
      return 4;
    default:
      return 5;
  }
}

}  // namespace

std::string_view to_string(Func f) {
  for (const auto& info : kFuncs) {
    if (info.func == f) return info.name;
  }
  return "?";
}

std::string_view to_string(Var v) {
  switch (v) {
    case Var::x1:
      return "x1";
    case Var::x2:
      return "x2";
    case Var::u1:
      return "u1";
    case Var::u2:
      return "u2";
  }
  return "?";
}

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  Expr run() {
    if (text_.empty()) throw ParseError(0, "empty expression");
    Expr e;
    e.source_ = std::string(text_);
    out_ = &e;
    e.root_ = sum();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError(pos_, "unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  using Op = Expr::Op;

  std::int32_t push(Expr::Node n) {
    out_->nodes_.push_back(n);
    return static_cast<std::int32_t>(out_->nodes_.size() - 1);
  }

  std::int32_t binary(Op op, std::int32_t lhs, std::int32_t rhs, std::size_t at) {
    Expr::Node n;
    n.op = op;
    n.lhs = lhs;
    n.rhs = rhs;
    n.offset = at;
    return push(n);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      throw ParseError(pos_, std::string("expected '") + c + "'");
    }
  }

  std::int32_t sum() {
    std::int32_t lhs = product();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept('+')) {
        lhs = binary(Op::add, lhs, product(), at);
      } else if (accept('-')) {
        lhs = binary(Op::sub, lhs, product(), at);
      } else {
        return lhs;
      }
    }
  }

  std::int32_t product() {
    std::int32_t lhs = unary();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept('*')) {
        lhs = binary(Op::mul, lhs, unary(), at);
      } else if (accept('/')) {
        lhs = binary(Op::div, lhs, unary(), at);
      } else {
        return lhs;
      }
    }
  }

  std::int32_t negated(std::int32_t (ExprParser::*operand)()) {
    skip_ws();
    const std::size_t at = pos_;
    if (accept('-')) {
      Expr::Node n;
      n.op = Op::negate;
      n.offset = at;
      n.lhs = (this->*operand)();
      return push(n);
    }
    return -1;
  }

  std::int32_t unary() {
    if (auto n = negated(&ExprParser::unary); n >= 0) return n;
    return power();
  }

  std::int32_t exponent() {
    if (auto n = negated(&ExprParser::exponent); n >= 0) return n;
    return power();
  }

  std::int32_t power() {
    std::int32_t base = primary();
    skip_ws();
    const std::size_t at = pos_;
    if (!accept('^')) return base;
    std::int32_t exp = exponent();
    if (references_variable(exp)) throw ParseError(at, "exponent must be constant");
    return binary(Op::pow, base, exp, at);
  }

  bool references_variable(std::int32_t idx) const {
    if (idx < 0) return false;
    const auto& n = out_->nodes_[static_cast<std::size_t>(idx)];
    if (n.op == Op::variable) return true;
    return references_variable(n.lhs) || references_variable(n.rhs);
  }

  std::int32_t primary() {
    skip_ws();
    const std::size_t at = pos_;
    if (pos_ >= text_.size()) throw ParseError(pos_, "unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      std::int32_t inner = sum();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(at, "unexpected '" + std::string(1, c) + "'");
  }

  std::int32_t number() {
    const std::size_t at = pos_;
    std::size_t end = pos_;
    while (end < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.')) ++end;
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
      if (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) {
        while (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) ++e;
        end = e;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + at;
    const char* last = text_.data() + end;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw ParseError(at, "malformed number");
    pos_ = end;
    Expr::Node n;
    n.op = Op::constant;
    n.value = value;
    n.offset = at;
    return push(n);
  }

  std::int32_t identifier() {
    const std::size_t at = pos_;
    std::size_t end = pos_;
    while (end < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
      ++end;
    }
    const std::string_view name = text_.substr(at, end - at);
    pos_ = end;

    Expr::Node n;
    n.offset = at;
    constexpr std::array<std::pair<std::string_view, Var>, 4> vars{
        {{"x1", Var::x1}, {"x2", Var::x2}, {"u1", Var::u1}, {"u2", Var::u2}}};
    for (const auto& [vname, v] : vars) {
      if (name == vname) {
        n.op = Op::variable;
        n.var = v;
        return push(n);
      }
    }
    if (name == "pi") {
      n.op = Op::pi;
      n.value = std::numbers::pi;
      return push(n);
    }
    for (const auto& info : kFuncs) {
      if (name != info.name) continue;
      expect('(');
      std::vector<std::int32_t> args;
      if (!accept(')')) {
        do {
          args.push_back(sum());
        } while (accept(','));
        expect(')');
      }
      if (static_cast<int>(args.size()) != info.arity) {
        throw ParseError(at, std::string(info.name) + " expects " + std::to_string(info.arity) +
                                 " argument(s), got " + std::to_string(args.size()));
      }
      n.op = Op::call;
      n.func = info.func;
      n.lhs = args[0];
      if (info.arity == 2) n.rhs = args[1];
      return push(n);
    }
    throw ParseError(at, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Expr* out_ = nullptr;
};

Expr Expr::parse(std::string_view text) { return ExprParser(text).run(); }

namespace {

struct Evaluator {
  const std::vector<Expr::Node>& nodes;
  std::array<double, 4> vars;

  double finite(double v, const Expr::Node& n, const char* what) const {
    if (!std::isfinite(v)) throw EvalError(n.offset, what);
    return v;
  }

  double eval(std::int32_t idx) const {
    using Op = Expr::Op;
    const auto& n = nodes[static_cast<std::size_t>(idx)];
    switch (n.op) {
      case Op::constant:
      case Op::pi:
        return n.value;
      case Op::variable:
        return vars[static_cast<std::size_t>(n.var)];
      case Op::negate:
        return -eval(n.lhs);
      case Op::add:
        return finite(eval(n.lhs) + eval(n.rhs), n, "non-finite sum");
      case Op::sub:
        return finite(eval(n.lhs) - eval(n.rhs), n, "non-finite difference");
      case Op::mul:
        return finite(eval(n.lhs) * eval(n.rhs), n, "non-finite product");
      case Op::div: {
        const double num = eval(n.lhs);
        const double den = eval(n.rhs);
        if (den == 0.0) throw EvalError(n.offset, "division by zero");
        return finite(num / den, n, "non-finite quotient");
      }
      case Op::pow:
        return finite(std::pow(eval(n.lhs), eval(n.rhs)), n, "power outside its domain");
      case Op::call: {
        const double a = eval(n.lhs);
        switch (n.func) {
          case Func::abs:
            return std::fabs(a);
          case Func::sqrt:
            if (a < 0.0) throw EvalError(n.offset, "sqrt of negative value");
            return std::sqrt(a);
          case Func::sin:
            return std::sin(a);
          case Func::cos:
            return std::cos(a);
          case Func::exp:
            return finite(std::exp(a), n, "exp overflow");
          case Func::min:
            return std::min(a, eval(n.rhs));
          case Func::max:
            return std::max(a, eval(n.rhs));
        }
        break;
      }
    }
    throw EvalError(n.offset, "corrupt expression node");
  }
};

void print(const std::vector<Expr::Node>& nodes, std::int32_t idx, std::string& out);

void print_child(const std::vector<Expr::Node>& nodes, std::int32_t idx, int required,
                 std::string& out) {
  const bool parens = level(nodes[static_cast<std::size_t>(idx)].op) < required;
  if (parens) out += '(';
  print(nodes, idx, out);
  if (parens) out += ')';
}

void print(const std::vector<Expr::Node>& nodes, std::int32_t idx, std::string& out) {
  using Op = Expr::Op;
  const auto& n = nodes[static_cast<std::size_t>(idx)];
  switch (n.op) {
    case Op::constant: {
      std::array<char, 32> buf{};
      auto res = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
      out.append(buf.data(), res.ptr);
      return;
    }
    case Op::pi:
      out += "pi";
      return;
    case Op::variable:
      out += to_string(n.var);
      return;
    case Op::negate:
      out += '-';
      print_child(nodes, n.lhs, 3, out);
      return;
    case Op::add:
    case Op::sub:
      print_child(nodes, n.lhs, 1, out);
      out += n.op == Op::add ? " + " : " - ";
      print_child(nodes, n.rhs, 2, out);
      return;
    case Op::mul:
    case Op::div:
      print_child(nodes, n.lhs, 2, out);
      out += n.op == Op::mul ? "*" : "/";
      print_child(nodes, n.rhs, 3, out);
      return;
    case Op::pow:
      print_child(nodes, n.lhs, 5, out);
      out += '^';
      print_child(nodes, n.rhs, 4, out);
      return;
    case Op::call:
      out += to_string(n.func);
      out += '(';
      print(nodes, n.lhs, out);
      if (arity_of(n.func) == 2) {
        out += ", ";
        print(nodes, n.rhs, out);
      }
      out += ')';
      return;
  }
}

bool same(const std::vector<Expr::Node>& a, std::int32_t ia, const std::vector<Expr::Node>& b,
          std::int32_t ib) {
  if ((ia < 0) != (ib < 0)) return false;
  if (ia < 0) return true;
  const auto& na = a[static_cast<std::size_t>(ia)];
  const auto& nb = b[static_cast<std::size_t>(ib)];
  if (na.op != nb.op) return false;
  using Op = Expr::Op;
  if (na.op == Op::constant && na.value != nb.value) return false;
  if (na.op == Op::variable && na.var != nb.var) return false;
  if (na.op == Op::call && na.func != nb.func) return false;
  return same(a, na.lhs, b, nb.lhs) && same(a, na.rhs, b, nb.rhs);
}

}  // namespace

double Expr::evaluate(Vec2 x, Vec2 u) const {
  if (root_ < 0) throw EvalError(0, "empty expression");
  Evaluator ev{nodes_, {x.x, x.y, u.x, u.y}};
  return ev.eval(root_);
}

std::string Expr::to_string() const {
  std::string out;
  if (root_ >= 0) print(nodes_, root_, out);
  return out;
}

bool Expr::uses(Var v) const {
  for (const auto& n : nodes_) {
    if (n.op == Op::variable && n.var == v) return true;
  }
  return false;
}

bool Expr::same_tree(const Expr& other) const { return same(nodes_, root_, other.nodes_, other.root_); }

}  // namespace occm
