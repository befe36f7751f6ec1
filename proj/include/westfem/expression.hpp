#pragma once

// Small arithmetic expression evaluator for closed-form scenario data
// (initial data, boundary excitation, sources, coefficient fields).
// Grammar: comparisons < additive < multiplicative < unary < power (right
// assoc) < primary.  Variables x, y, t; the usual elementary functions;
// sel(c,a,b) picks a if c != 0.  Parsed once into a flat AST, evaluated
// per point.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace westfem {

class ExprError : public std::invalid_argument {
public:
  explicit ExprError(const std::string& what) : std::invalid_argument(what) {}
};

class Expr {
public:
  Expr() = default;

  static Expr parse(const std::string& text) {
    Parser p(text);
    Expr e;
    e.text_ = text;
    e.root_ = p.parse_comparison(e.nodes_);
    p.skip_ws();
    if (!p.done())
      throw ExprError("trailing characters at position " +
                      std::to_string(p.pos()) + " in expression: " + text);
    return e;
  }

  double operator()(double x, double y, double t) const {
    if (nodes_.empty()) throw ExprError("evaluating empty expression");
    return eval(root_, x, y, t);
  }

  const std::string& text() const { return text_; }
  bool empty() const { return nodes_.empty(); }

private:
  enum class Op : std::uint8_t {
    Const, VarX, VarY, VarT,
    Add, Sub, Mul, Div, Pow, Neg,
    Lt, Gt, Le, Ge, Eq, Ne,
    Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Sinh, Cosh, Tanh, Atan, Floor, Sign,
    Min, Max, PowF, Sel
  };

  struct Node {
    Op op;
    double value = 0.0;
    int a = -1, b = -1, c = -1;
  };

  std::vector<Node> nodes_;
  int root_ = -1;
  std::string text_;

  double eval(int i, double x, double y, double t) const {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::Const: return n.value;
      case Op::VarX: return x;
      case Op::VarY: return y;
      case Op::VarT: return t;
      case Op::Add: return eval(n.a, x, y, t) + eval(n.b, x, y, t);
      case Op::Sub: return eval(n.a, x, y, t) - eval(n.b, x, y, t);
      case Op::Mul: return eval(n.a, x, y, t) * eval(n.b, x, y, t);
      case Op::Div: return eval(n.a, x, y, t) / eval(n.b, x, y, t);
      case Op::Pow:
      case Op::PowF: return std::pow(eval(n.a, x, y, t), eval(n.b, x, y, t));
      case Op::Neg: return -eval(n.a, x, y, t);
      case Op::Lt: return eval(n.a, x, y, t) < eval(n.b, x, y, t) ? 1.0 : 0.0;
      case Op::Gt: return eval(n.a, x, y, t) > eval(n.b, x, y, t) ? 1.0 : 0.0;
      case Op::Le: return eval(n.a, x, y, t) <= eval(n.b, x, y, t) ? 1.0 : 0.0;
      case Op::Ge: return eval(n.a, x, y, t) >= eval(n.b, x, y, t) ? 1.0 : 0.0;
      case Op::Eq: return eval(n.a, x, y, t) == eval(n.b, x, y, t) ? 1.0 : 0.0;
      case Op::Ne: return eval(n.a, x, y, t) != eval(n.b, x, y, t) ? 1.0 : 0.0;
      case Op::Sin: return std::sin(eval(n.a, x, y, t));
      case Op::Cos: return std::cos(eval(n.a, x, y, t));
      case Op::Tan: return std::tan(eval(n.a, x, y, t));
      case Op::Exp: return std::exp(eval(n.a, x, y, t));
      case Op::Log: return std::log(eval(n.a, x, y, t));
      case Op::Sqrt: return std::sqrt(eval(n.a, x, y, t));
      case Op::Abs: return std::abs(eval(n.a, x, y, t));
      case Op::Sinh: return std::sinh(eval(n.a, x, y, t));
      case Op::Cosh: return std::cosh(eval(n.a, x, y, t));
      case Op::Tanh: return std::tanh(eval(n.a, x, y, t));
      case Op::Atan: return std::atan(eval(n.a, x, y, t));
      case Op::Floor: return std::floor(eval(n.a, x, y, t));
      case Op::Sign: {
        double v = eval(n.a, x, y, t);
        return (v > 0.0) - (v < 0.0);
      }
      case Op::Min: return std::min(eval(n.a, x, y, t), eval(n.b, x, y, t));
      case Op::Max: return std::max(eval(n.a, x, y, t), eval(n.b, x, y, t));
      case Op::Sel:
        return eval(n.a, x, y, t) != 0.0 ? eval(n.b, x, y, t)
                                         : eval(n.c, x, y, t);
    }
    throw ExprError("corrupt expression node");
  }

  class Parser {
  public:
    explicit Parser(const std::string& s) : s_(s) {}

    int parse_comparison(std::vector<Node>& out) {
      int lhs = parse_additive(out);
      skip_ws();
      while (true) {
        Op op;
        if (match("<=")) op = Op::Le;
        else if (match(">=")) op = Op::Ge;
        else if (match("==")) op = Op::Eq;
        else if (match("!=")) op = Op::Ne;
        else if (match("<")) op = Op::Lt;
        else if (match(">")) op = Op::Gt;
        else break;
        int rhs = parse_additive(out);
        lhs = push(out, {op, 0.0, lhs, rhs, -1});
        skip_ws();
      }
      return lhs;
    }

    void skip_ws() { while (i_ < s_.size() && std::isspace((unsigned char)s_[i_])) ++i_; }
    bool done() const { return i_ >= s_.size(); }
    std::size_t pos() const { return i_; }

  private:
    const std::string& s_;
    std::size_t i_ = 0;

    static int push(std::vector<Node>& out, Node n) {
      out.push_back(n);
      return int(out.size()) - 1;
    }

    bool match(const char* tok) {
      std::size_t n = std::strlen(tok);
      if (s_.compare(i_, n, tok) == 0) { i_ += n; return true; }
      return false;
    }

    int parse_additive(std::vector<Node>& out) {
      int lhs = parse_multiplicative(out);
      skip_ws();
      while (i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) {
        char c = s_[i_++];
        int rhs = parse_multiplicative(out);
        lhs = push(out, {c == '+' ? Op::Add : Op::Sub, 0.0, lhs, rhs, -1});
        skip_ws();
      }
      return lhs;
    }

    int parse_multiplicative(std::vector<Node>& out) {
      int lhs = parse_unary(out);
      skip_ws();
      while (i_ < s_.size() && (s_[i_] == '*' || s_[i_] == '/')) {
        char c = s_[i_++];
        int rhs = parse_unary(out);
        lhs = push(out, {c == '*' ? Op::Mul : Op::Div, 0.0, lhs, rhs, -1});
        skip_ws();
      }
      return lhs;
    }

    int parse_unary(std::vector<Node>& out) {
      skip_ws();
      if (i_ < s_.size() && s_[i_] == '-') {
        ++i_;
        int a = parse_unary(out);
        return push(out, {Op::Neg, 0.0, a, -1, -1});
      }
      if (i_ < s_.size() && s_[i_] == '+') { ++i_; return parse_unary(out); }
      return parse_power(out);
    }

    int parse_power(std::vector<Node>& out) {
      int base = parse_primary(out);
      skip_ws();
      if (i_ < s_.size() && s_[i_] == '^') {
        ++i_;
        int exp = parse_unary(out);  // right associative, binds unary minus
        return push(out, {Op::Pow, 0.0, base, exp, -1});
      }
      return base;
    }

    int parse_primary(std::vector<Node>& out) {
      skip_ws();
      if (i_ >= s_.size())
        throw ExprError("unexpected end of expression: " + s_);
      char c = s_[i_];
      if (c == '(') {
        ++i_;
        int e = parse_comparison(out);
        skip_ws();
        if (i_ >= s_.size() || s_[i_] != ')')
          throw ExprError("missing ')' at position " + std::to_string(i_) +
                          " in expression: " + s_);
        ++i_;
        return e;
      }
      if (std::isdigit((unsigned char)c) || c == '.') return parse_number(out);
      if (std::isalpha((unsigned char)c) || c == '_') return parse_ident(out);
      throw ExprError("unexpected character '" + std::string(1, c) +
                      "' at position " + std::to_string(i_) +
                      " in expression: " + s_);
    }

    int parse_number(std::vector<Node>& out) {
      std::size_t end = i_;
      while (end < s_.size() &&
             (std::isdigit((unsigned char)s_[end]) || s_[end] == '.'))
        ++end;
      if (end < s_.size() && (s_[end] == 'e' || s_[end] == 'E')) {
        std::size_t e2 = end + 1;
        if (e2 < s_.size() && (s_[e2] == '+' || s_[e2] == '-')) ++e2;
        if (e2 < s_.size() && std::isdigit((unsigned char)s_[e2])) {
          while (e2 < s_.size() && std::isdigit((unsigned char)s_[e2])) ++e2;
          end = e2;
        }
      }
      double v = 0.0;
      try {
        v = std::stod(s_.substr(i_, end - i_));
      } catch (const std::exception&) {
        throw ExprError("bad numeric literal at position " + std::to_string(i_));
      }
      i_ = end;
      return push(out, {Op::Const, v, -1, -1, -1});
    }

    int parse_ident(std::vector<Node>& out) {
      std::size_t end = i_;
      while (end < s_.size() &&
             (std::isalnum((unsigned char)s_[end]) || s_[end] == '_'))
        ++end;
      std::string name = s_.substr(i_, end - i_);
      i_ = end;
      if (name == "x") return push(out, {Op::VarX, 0.0, -1, -1, -1});
      if (name == "y") return push(out, {Op::VarY, 0.0, -1, -1, -1});
      if (name == "t") return push(out, {Op::VarT, 0.0, -1, -1, -1});
      if (name == "pi") return push(out, {Op::Const, M_PI, -1, -1, -1});
      if (name == "e") return push(out, {Op::Const, M_E, -1, -1, -1});

      static const std::map<std::string, Op> unary = {
          {"sin", Op::Sin},   {"cos", Op::Cos},   {"tan", Op::Tan},
          {"exp", Op::Exp},   {"log", Op::Log},   {"sqrt", Op::Sqrt},
          {"abs", Op::Abs},   {"sinh", Op::Sinh}, {"cosh", Op::Cosh},
          {"tanh", Op::Tanh}, {"atan", Op::Atan}, {"floor", Op::Floor},
          {"sign", Op::Sign}};
      static const std::map<std::string, Op> binary = {
          {"min", Op::Min}, {"max", Op::Max}, {"pow", Op::PowF}};

      skip_ws();
      if (i_ >= s_.size() || s_[i_] != '(')
        throw ExprError("unknown identifier '" + name + "' in expression: " + s_);
      ++i_;  // '('
      int a = parse_comparison(out);
      if (auto it = unary.find(name); it != unary.end()) {
        expect(')');
        return push(out, {it->second, 0.0, a, -1, -1});
      }
      if (auto it = binary.find(name); it != binary.end()) {
        expect(',');
        int b = parse_comparison(out);
        expect(')');
        return push(out, {it->second, 0.0, a, b, -1});
      }
      if (name == "sel") {
        expect(',');
        int b = parse_comparison(out);
        expect(',');
        int cc = parse_comparison(out);
        expect(')');
        return push(out, {Op::Sel, 0.0, a, b, cc});
      }
      throw ExprError("unknown function '" + name + "' in expression: " + s_);
    }

    void expect(char c) {
      skip_ws();
      if (i_ >= s_.size() || s_[i_] != c)
        throw ExprError("expected '" + std::string(1, c) + "' at position " +
                        std::to_string(i_) + " in expression: " + s_);
      ++i_;
    }
  };
};

}  // namespace westfem
