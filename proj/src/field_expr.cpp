#include "rotforch/field_expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "rotforch/errors.hpp"

namespace rotforch {

enum class Op { number, var, neg, add, sub, mul, div, pow, call };

enum class Fn {
  exp, log, sin, cos, tanh, sqrt, abs, sign, min, max,
  dist_boundary, dist_boundary_dx, dist_boundary_dy, if_lt
};

struct FieldExpr::Node {
  Op op = Op::number;
  double value = 0.0;
  Variable var = Variable::x;
  Fn fn = Fn::exp;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const FieldExpr::Node>;

struct FnInfo {
  const char* name;
  Fn fn;
  int arity;
};

constexpr FnInfo kFunctions[] = {
    {"exp", Fn::exp, 1},
    {"log", Fn::log, 1},
    {"sin", Fn::sin, 1},
    {"cos", Fn::cos, 1},
    {"tanh", Fn::tanh, 1},
    {"sqrt", Fn::sqrt, 1},
    {"abs", Fn::abs, 1},
    {"sign", Fn::sign, 1},
    {"min", Fn::min, 2},
    {"max", Fn::max, 2},
    {"dist_boundary", Fn::dist_boundary, 0},
    {"dist_boundary_dx", Fn::dist_boundary_dx, 0},
    {"dist_boundary_dy", Fn::dist_boundary_dy, 0},
    {"if_lt", Fn::if_lt, 4},
};

const FnInfo& info(Fn fn) {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f;
  }
  throw Error("unknown function id");
}

NodePtr make_number(double v) {
  auto n = std::make_shared<FieldExpr::Node>();
  n->op = Op::number;
  n->value = v;
  return n;
}

NodePtr make_var(Variable v) {
  auto n = std::make_shared<FieldExpr::Node>();
  n->op = Op::var;
  n->var = v;
  return n;
}

NodePtr make_raw(Op op, std::vector<NodePtr> args) {
  auto n = std::make_shared<FieldExpr::Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

NodePtr make_call(Fn fn, std::vector<NodePtr> args) {
  auto n = std::make_shared<FieldExpr::Node>();
  n->op = Op::call;
  n->fn = fn;
  n->args = std::move(args);
  return n;
}

bool is_num(const NodePtr& n, double v) { return n->op == Op::number && n->value == v; }
bool is_num(const NodePtr& n) { return n->op == Op::number; }

// Light simplification used when building derivative trees.
NodePtr s_neg(NodePtr a) {
  if (is_num(a) && a->value != 0.0) return make_number(-a->value);
  if (is_num(a, 0.0)) return a;
  if (a->op == Op::neg) return a->args[0];
  return make_raw(Op::neg, {a});
}

NodePtr s_add(NodePtr a, NodePtr b) {
  if (is_num(a, 0.0)) return b;
  if (is_num(b, 0.0)) return a;
  if (is_num(a) && is_num(b)) return make_number(a->value + b->value);
  return make_raw(Op::add, {a, b});
}

NodePtr s_sub(NodePtr a, NodePtr b) {
  if (is_num(b, 0.0)) return a;
  if (is_num(a, 0.0)) return s_neg(b);
  if (is_num(a) && is_num(b)) return make_number(a->value - b->value);
  return make_raw(Op::sub, {a, b});
}

NodePtr s_mul(NodePtr a, NodePtr b) {
  if (is_num(a, 0.0) || is_num(b, 0.0)) return make_number(0.0);
  if (is_num(a, 1.0)) return b;
  if (is_num(b, 1.0)) return a;
  if (is_num(a) && is_num(b)) return make_number(a->value * b->value);
  return make_raw(Op::mul, {a, b});
}

NodePtr s_div(NodePtr a, NodePtr b) {
  if (is_num(a, 0.0)) return a;
  if (is_num(b, 1.0)) return a;
  return make_raw(Op::div, {a, b});
}

NodePtr s_pow(NodePtr a, NodePtr b) {
  if (is_num(b, 1.0)) return a;
  if (is_num(b, 0.0)) return make_number(1.0);
  return make_raw(Op::pow, {a, b});
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

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

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_raw(Op::add, {lhs, term()});
      } else if (accept('-')) {
        lhs = make_raw(Op::sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_raw(Op::mul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make_raw(Op::div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_raw(Op::neg, {unary()});
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_raw(Op::pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t nd = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) fail("malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) {
        pos_ = save;
        fail("malformed exponent");
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return make_number(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x") return make_var(Variable::x);
    if (name == "y") return make_var(Variable::y);
    if (name == "t") return make_var(Variable::t);
    if (name == "pi") return make_number(std::numbers::pi);
    for (const auto& f : kFunctions) {
      if (name != f.name) continue;
      std::vector<NodePtr> args;
      if (!accept('(')) {
        if (f.arity == 0) return make_call(f.fn, {});
        fail("expected '(' after " + std::string(name));
      }
      if (!accept(')')) {
        do {
          args.push_back(expr());
        } while (accept(','));
        if (!accept(')')) fail("expected ')'");
      }
      if (static_cast<int>(args.size()) != f.arity) {
        fail(std::string(name) + " expects " + std::to_string(f.arity) + " argument(s)");
      }
      return make_call(f.fn, std::move(args));
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// ------------------------------------------------------------ evaluation

double dist_boundary(const EvalContext& c) {
  return std::min(std::min(c.x, c.lx - c.x), std::min(c.y, c.ly - c.y));
}

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw FieldDomainError(std::string("non-finite result in ") + what);
  return v;
}

double eval_node(const FieldExpr::Node& n, const EvalContext& c) {
  switch (n.op) {
    case Op::number:
      return n.value;
    case Op::var:
      return n.var == Variable::x ? c.x : (n.var == Variable::y ? c.y : c.t);
    case Op::neg:
      return -eval_node(*n.args[0], c);
    case Op::add:
      return eval_node(*n.args[0], c) + eval_node(*n.args[1], c);
    case Op::sub:
      return eval_node(*n.args[0], c) - eval_node(*n.args[1], c);
    case Op::mul:
      return eval_node(*n.args[0], c) * eval_node(*n.args[1], c);
    case Op::div: {
      const double d = eval_node(*n.args[1], c);
      if (d == 0.0) throw FieldDomainError("division by zero");
      return checked(eval_node(*n.args[0], c) / d, "division");
    }
    case Op::pow: {
      const double b = eval_node(*n.args[0], c);
      const double e = eval_node(*n.args[1], c);
      if (b < 0.0 && e != std::floor(e)) throw FieldDomainError("negative base with non-integer exponent");
      if (b == 0.0 && e < 0.0) throw FieldDomainError("zero base with negative exponent");
      return checked(std::pow(b, e), "power");
    }
    case Op::call:
      break;
  }
  auto arg = [&](int i) { return eval_node(*n.args[i], c); };
  switch (n.fn) {
    case Fn::exp:
      return checked(std::exp(arg(0)), "exp");
    case Fn::log: {
      const double v = arg(0);
      if (!(v > 0.0)) throw FieldDomainError("log of nonpositive value");
      return std::log(v);
    }
    case Fn::sin:
      return std::sin(arg(0));
    case Fn::cos:
      return std::cos(arg(0));
    case Fn::tanh:
      return std::tanh(arg(0));
    case Fn::sqrt: {
      const double v = arg(0);
      if (v < 0.0) throw FieldDomainError("sqrt of negative value");
      return std::sqrt(v);
    }
    case Fn::abs:
      return std::abs(arg(0));
    case Fn::sign: {
      const double v = arg(0);
      return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    }
    case Fn::min:
      return std::min(arg(0), arg(1));
    case Fn::max:
      return std::max(arg(0), arg(1));
    case Fn::dist_boundary:
      return dist_boundary(c);
    case Fn::dist_boundary_dx:
    case Fn::dist_boundary_dy: {
      const double d = dist_boundary(c);
      const bool wantx = n.fn == Fn::dist_boundary_dx;
      // Ties resolve in the fixed order left, right, bottom, top.
      if (d == c.x) return wantx ? 1.0 : 0.0;
      if (d == c.lx - c.x) return wantx ? -1.0 : 0.0;
      if (d == c.y) return wantx ? 0.0 : 1.0;
      return wantx ? 0.0 : -1.0;
    }
    case Fn::if_lt:
      return arg(0) < arg(1) ? arg(2) : arg(3);
  }
  throw Error("unreachable");
}

// -------------------------------------------------------- differentiation

bool depends(const FieldExpr::Node& n, Variable v) {
  if (n.op == Op::var) return n.var == v;
  if (n.op == Op::call && (n.fn == Fn::dist_boundary || n.fn == Fn::dist_boundary_dx ||
                           n.fn == Fn::dist_boundary_dy)) {
    return v != Variable::t && n.fn == Fn::dist_boundary;
  }
  return std::any_of(n.args.begin(), n.args.end(), [&](const NodePtr& a) { return depends(*a, v); });
}

NodePtr diff(const NodePtr& np, Variable v) {
  const auto& n = *np;
  if (!depends(n, v)) return make_number(0.0);
  switch (n.op) {
    case Op::number:
      return make_number(0.0);
    case Op::var:
      return make_number(1.0);
    case Op::neg:
      return s_neg(diff(n.args[0], v));
    case Op::add:
      return s_add(diff(n.args[0], v), diff(n.args[1], v));
    case Op::sub:
      return s_sub(diff(n.args[0], v), diff(n.args[1], v));
    case Op::mul: {
      const auto& a = n.args[0];
      const auto& b = n.args[1];
      return s_add(s_mul(diff(a, v), b), s_mul(a, diff(b, v)));
    }
    case Op::div: {
      const auto& a = n.args[0];
      const auto& b = n.args[1];
      auto num = s_sub(s_mul(diff(a, v), b), s_mul(a, diff(b, v)));
      return s_div(num, s_pow(b, make_number(2.0)));
    }
    case Op::pow: {
      const auto& a = n.args[0];
      const auto& b = n.args[1];
      if (!depends(*b, v)) {
        auto e1 = is_num(b) ? make_number(b->value - 1.0) : s_sub(b, make_number(1.0));
        return s_mul(s_mul(b, s_pow(a, e1)), diff(a, v));
      }
      // d(a^b) = a^b (b' log a + b a'/a)
      auto t1 = s_mul(diff(b, v), make_call(Fn::log, {a}));
      auto t2 = s_div(s_mul(b, diff(a, v)), a);
      return s_mul(np, s_add(t1, t2));
    }
    case Op::call:
      break;
  }
  auto a = n.args.empty() ? nullptr : n.args[0];
  switch (n.fn) {
    case Fn::exp:
      return s_mul(np, diff(a, v));
    case Fn::log:
      return s_div(diff(a, v), a);
    case Fn::sin:
      return s_mul(make_call(Fn::cos, {a}), diff(a, v));
    case Fn::cos:
      return s_neg(s_mul(make_call(Fn::sin, {a}), diff(a, v)));
    case Fn::tanh:
      return s_mul(s_sub(make_number(1.0), s_pow(np, make_number(2.0))), diff(a, v));
    case Fn::sqrt:
      return s_div(diff(a, v), s_mul(make_number(2.0), np));
    case Fn::abs:
      return s_mul(make_call(Fn::sign, {a}), diff(a, v));
    case Fn::sign:
      return make_number(0.0);
    case Fn::min:
      return make_call(Fn::if_lt, {n.args[0], n.args[1], diff(n.args[0], v), diff(n.args[1], v)});
    case Fn::max:
      return make_call(Fn::if_lt, {n.args[0], n.args[1], diff(n.args[1], v), diff(n.args[0], v)});
    case Fn::dist_boundary:
      return make_call(v == Variable::x ? Fn::dist_boundary_dx : Fn::dist_boundary_dy, {});
    case Fn::dist_boundary_dx:
    case Fn::dist_boundary_dy:
      return make_number(0.0);
    case Fn::if_lt:
      return make_call(Fn::if_lt, {n.args[0], n.args[1], diff(n.args[2], v), diff(n.args[3], v)});
  }
  throw Error("unreachable");
}

// --------------------------------------------------------------- printing

int precedence(const FieldExpr::Node& n) {
  switch (n.op) {
    case Op::add:
    case Op::sub:
      return 1;
    case Op::mul:
    case Op::div:
      return 2;
    case Op::neg:
      return 3;
    case Op::pow:
      return 4;
    case Op::number:
      return n.value < 0.0 || std::signbit(n.value) ? 3 : 5;
    default:
      return 5;
  }
}

void print(const FieldExpr::Node& n, std::string& out, int min_prec);

void print_child(const FieldExpr::Node& n, std::string& out, int min_prec) {
  if (precedence(n) < min_prec) {
    out += '(';
    print(n, out, 0);
    out += ')';
  } else {
    print(n, out, min_prec);
  }
}

void print(const FieldExpr::Node& n, std::string& out, int) {
  switch (n.op) {
    case Op::number:
      out += format_number(n.value);
      return;
    case Op::var:
      out += n.var == Variable::x ? "x" : (n.var == Variable::y ? "y" : "t");
      return;
    case Op::neg:
      out += '-';
      print_child(*n.args[0], out, 3);
      return;
    case Op::add:
    case Op::sub:
      print_child(*n.args[0], out, 1);
      out += n.op == Op::add ? " + " : " - ";
      print_child(*n.args[1], out, 2);
      return;
    case Op::mul:
    case Op::div:
      print_child(*n.args[0], out, 2);
      out += n.op == Op::mul ? "*" : "/";
      print_child(*n.args[1], out, 3);
      return;
    case Op::pow:
      print_child(*n.args[0], out, 5);
      out += '^';
      print_child(*n.args[1], out, 3);
      return;
    case Op::call:
      break;
  }
  const auto& fi = info(n.fn);
  out += fi.name;
  if (fi.arity == 0) return;
  out += '(';
  for (std::size_t i = 0; i < n.args.size(); ++i) {
    if (i) out += ", ";
    print(*n.args[i], out, 0);
  }
  out += ')';
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

FieldExpr::FieldExpr() : root_(make_number(0.0)) {}

FieldExpr::FieldExpr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

FieldExpr FieldExpr::parse(std::string_view text) { return FieldExpr(Parser(text).parse()); }

FieldExpr FieldExpr::constant(double value) { return FieldExpr(make_number(value)); }

double FieldExpr::eval(const EvalContext& ctx) const { return eval_node(*root_, ctx); }

FieldExpr FieldExpr::derivative(Variable v) const { return FieldExpr(diff(root_, v)); }

std::string FieldExpr::to_string() const {
  std::string out;
  print(*root_, out, 0);
  return out;
}

bool FieldExpr::depends_on(Variable v) const { return depends(*root_, v); }

bool FieldExpr::is_constant() const {
  return !depends_on(Variable::x) && !depends_on(Variable::y) && !depends_on(Variable::t);
}

namespace presets {

namespace {
std::string num(double v) {
  std::string s = format_number(v);
  return v < 0.0 ? "(" + s + ")" : s;
}
}  // namespace

std::string constant(double c) { return num(c); }

std::string affine(double c0, double cx, double cy) {
  return num(c0) + " + " + num(cx) + "*x + " + num(cy) + "*y";
}

std::string layered(double c0, double c1, double y0, double width) {
  return num(c0) + " + " + num(c1) + "*tanh((y - " + num(y0) + ")/" + num(width) + ")";
}

std::string radial_bump(double c0, double amp, double x0, double y0, double s) {
  return num(c0) + " + " + num(amp) + "*exp(-((x - " + num(x0) + ")^2 + (y - " + num(y0) +
         ")^2)/" + num(s) + "^2)";
}

std::string checkerboard(double c0, double amp, int k) {
  return num(c0) + " + " + num(amp) + "*sin(" + std::to_string(k) + "*pi*x)*sin(" +
         std::to_string(k) + "*pi*y)";
}

std::string boundary_power(double c0, double amp, double p) {
  return num(c0) + " + " + num(amp) + "*dist_boundary^" + num(p);
}

}  // namespace presets

}  // namespace rotforch
