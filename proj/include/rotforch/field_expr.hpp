#pragma once

// Scalar field expressions over (x, y, t).
//
// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | 'x' | 'y' | 't' | 'pi'
//            | name '(' [expr (',' expr)*] ')'
//            | 'dist_boundary' | '(' expr ')'
//
// Functions: exp log sin cos tanh sqrt abs sign min max dist_boundary,
// plus the derivative helpers if_lt(a,b,c,d) = (a < b ? c : d),
// dist_boundary_dx and dist_boundary_dy.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace rotforch {

enum class Variable { x, y, t };

struct EvalContext {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
  // Rectangle [0, lx] x [0, ly] used by dist_boundary.
  double lx = 1.0;
  double ly = 1.0;
};

class FieldExpr {
 public:
  struct Node;

  FieldExpr();  // the constant 0
  static FieldExpr parse(std::string_view text);
  static FieldExpr constant(double value);

  double eval(const EvalContext& ctx) const;
  double operator()(const EvalContext& ctx) const { return eval(ctx); }

  FieldExpr derivative(Variable v) const;
  std::string to_string() const;
  bool depends_on(Variable v) const;
  bool is_constant() const;

  // Built from nodes; used by the differentiator and by generators.
  explicit FieldExpr(std::shared_ptr<const Node> root);
  const std::shared_ptr<const Node>& root() const { return root_; }

 private:
  std::shared_ptr<const Node> root_;
};

// Preset constructors. Each returns expression text, so presets are
// echoed verbatim in reports.
namespace presets {
std::string constant(double c);
std::string affine(double c0, double cx, double cy);
// c0 + c1 * tanh((y - y0) / width)
std::string layered(double c0, double c1, double y0, double width);
// c0 + amp * exp(-((x-x0)^2 + (y-y0)^2) / s^2)
std::string radial_bump(double c0, double amp, double x0, double y0, double s);
// c0 + amp * sin(k pi x) sin(k pi y)
std::string checkerboard(double c0, double amp, int k);
// c0 + amp * dist_boundary^p
std::string boundary_power(double c0, double amp, double p);
}  // namespace presets

// Shortest round-trip decimal form of v.
std::string format_number(double v);

}  // namespace rotforch
