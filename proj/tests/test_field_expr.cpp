#include <cmath>

#include "doctest.h"
#include "rotforch/errors.hpp"
#include "rotforch/field_expr.hpp"
#include "rotforch/geometry.hpp"

using namespace rotforch;

TEST_CASE("constant expression is uniform") {
  const FieldExpr e = FieldExpr::parse("1 + 0*x");
  for (double x : {0.0, 0.3, 1.0}) {
    for (double y : {0.0, 0.7}) CHECK(e.eval({x, y, 0.0}) == 1.0);
  }
}

TEST_CASE("direct evaluation at the origin") {
  const FieldExpr e = FieldExpr::parse("0.2 + 0.1*sin(3.14159*x)");
  CHECK(e.eval({0.0, 0.5, 0.0}) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("incomplete expression reports its offset") {
  try {
    FieldExpr::parse("1 +");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 3);
  }
}

TEST_CASE("operator precedence and associativity") {
  const EvalContext c{2.0, 3.0, 0.5};
  CHECK(FieldExpr::parse("1 + 2*3").eval(c) == 7.0);
  CHECK(FieldExpr::parse("2^3^2").eval(c) == 512.0);
  CHECK(FieldExpr::parse("-x^2").eval(c) == -4.0);
  CHECK(FieldExpr::parse("x - y - t").eval(c) == doctest::Approx(-1.5));
  CHECK(FieldExpr::parse("min(x, y) + max(x, y)").eval(c) == 5.0);
}

TEST_CASE("domain errors are raised, not silently NaN") {
  CHECK_THROWS_AS(FieldExpr::parse("log(x - 2)").eval({2.0, 0.0, 0.0}), FieldDomainError);
  CHECK_THROWS_AS(FieldExpr::parse("1/x").eval({0.0, 0.0, 0.0}), FieldDomainError);
  CHECK_THROWS_AS(FieldExpr::parse("sqrt(x)").eval({-1.0, 0.0, 0.0}), FieldDomainError);
}

TEST_CASE("unknown names are parse errors") {
  CHECK_THROWS_AS(FieldExpr::parse("foo(x)"), ParseError);
  CHECK_THROWS_AS(FieldExpr::parse("z + 1"), ParseError);
}

TEST_CASE("symbolic derivative agrees with central differences") {
  const char* texts[] = {"x^3*sin(y) + exp(-t)*x*y", "tanh(x - 0.5)*cos(pi*y)", "sqrt(1 + x*x + y)",
                         "log(2 + x)*abs(y - 0.3)", "(1 + x)^(0.5 + y)"};
  for (const char* text : texts) {
    const FieldExpr e = FieldExpr::parse(text);
    for (auto v : {Variable::x, Variable::y, Variable::t}) {
      const FieldExpr d = e.derivative(v);
      const EvalContext c{0.37, 0.61, 0.23};
      const double h = 1e-6;
      EvalContext lo = c, hi = c;
      if (v == Variable::x) { lo.x -= h; hi.x += h; }
      if (v == Variable::y) { lo.y -= h; hi.y += h; }
      if (v == Variable::t) { lo.t -= h; hi.t += h; }
      const double fd = (e.eval(hi) - e.eval(lo)) / (2.0 * h);
      CAPTURE(text);
      CHECK(d.eval(c) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("to_string round-trips") {
  const FieldExpr e = FieldExpr::parse("0.5 + 0.25*cos(pi*x)*cos(pi*y) - x/(1 + t)");
  const FieldExpr r = FieldExpr::parse(e.to_string());
  for (double x : {0.1, 0.9}) CHECK(r.eval({x, 0.4, 0.2}) == e.eval({x, 0.4, 0.2}));
}

TEST_CASE("dist_boundary on the unit square") {
  const FieldExpr e = FieldExpr::parse("dist_boundary");
  CHECK(e.eval({0.5, 0.5, 0.0}) == doctest::Approx(0.5));
  CHECK(e.eval({0.1, 0.7, 0.0}) == doctest::Approx(0.1));
}

TEST_CASE("presets parse and evaluate") {
  CHECK(FieldExpr::parse(presets::constant(2.5)).eval({}) == 2.5);
  CHECK(FieldExpr::parse(presets::affine(1, 2, 3)).eval({1.0, 1.0, 0.0}) == 6.0);
  CHECK(FieldExpr::parse(presets::checkerboard(1, 0.5, 1)).eval({0.5, 0.5, 0.0}) ==
        doctest::Approx(1.5));
  CHECK(FieldExpr::parse(presets::boundary_power(1, 1, 2)).eval({0.5, 0.5, 0.0}) ==
        doctest::Approx(1.25));
}

TEST_CASE("format_number is shortest round trip") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("unit square 2x2 grid") {
  const Rect r{1.0, 1.0};
  const Grid g(r, 2, 2, BoundaryPartition::uniform(r, BoundaryTag::gamma1));
  CHECK(g.cell_count() == 4);
  CHECK(g.cell_area() == 0.25);
  CHECK(g.boundary_faces().size() == 8);
  for (std::size_t f : g.boundary_faces()) CHECK(g.faces()[f].length == 0.5);
}

TEST_CASE("rectangular grid spacing") {
  const Rect r{2.0, 1.0};
  const Grid g(r, 4, 2, BoundaryPartition::uniform(r, BoundaryTag::gamma1));
  CHECK(g.hx() == 0.5);
  CHECK(g.hy() == 0.5);
}

TEST_CASE("degenerate grid is rejected") {
  const Rect r{1.0, 1.0};
  CHECK_THROWS_AS(Grid(r, 1, 4, BoundaryPartition::uniform(r, BoundaryTag::gamma1)),
                  InvalidInput);
}

TEST_CASE("materialize samples cell centres") {
  const Rect r{1.0, 1.0};
  const Grid g(r, 2, 2, BoundaryPartition::uniform(r, BoundaryTag::gamma1));
  const auto v = materialize(FieldExpr::parse("x"), g, 0.0);
  CHECK(v[0] == 0.25);
  CHECK(v[1] == 0.75);
  const auto c = materialize(FieldExpr::constant(3.0), g, 0.0);
  for (double x : c) CHECK(x == 3.0);
}

TEST_CASE("faces are consistent") {
  const Rect r{1.0, 2.0};
  const Grid g(r, 5, 7, BoundaryPartition::uniform(r, BoundaryTag::gamma1));
  double perimeter = 0.0;
  for (std::size_t f : g.boundary_faces()) perimeter += g.faces()[f].length;
  CHECK(perimeter == doctest::Approx(6.0));
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto cf = g.cell_faces(c);
    // outward normals of a cell sum to zero
    double sx = 0.0, sy = 0.0;
    for (int k = 0; k < 4; ++k) {
      const Face& f = g.faces()[cf[k]];
      const double sign = f.minus == static_cast<long>(c) ? 1.0 : -1.0;
      sx += sign * f.nx * f.length;
      sy += sign * f.ny * f.length;
    }
    CHECK(std::abs(sx) < 1e-15);
    CHECK(std::abs(sy) < 1e-15);
  }
}

TEST_CASE("boundary partition must tile the boundary") {
  const Rect r{1.0, 1.0};
  std::vector<BoundarySegment> segs{{Side::left, 0.0, 1.0, BoundaryTag::gamma1},
                                    {Side::right, 0.0, 1.0, BoundaryTag::gamma2},
                                    {Side::bottom, 0.0, 1.0, BoundaryTag::gamma1}};
  CHECK_THROWS_AS(BoundaryPartition(segs).validate(r), InvalidInput);
  segs.push_back({Side::top, 0.0, 0.5, BoundaryTag::gamma2});
  segs.push_back({Side::top, 0.5, 1.0, BoundaryTag::gamma1});
  const BoundaryPartition p(segs);
  CHECK_NOTHROW(p.validate(r));
  CHECK(p.tag_at(Side::top, 0.25) == BoundaryTag::gamma2);
  CHECK(p.tag_at(Side::top, 0.75) == BoundaryTag::gamma1);
}

TEST_CASE("forcing is zero-extended off its part of the boundary") {
  const Rect r{1.0, 1.0};
  std::vector<BoundarySegment> segs{{Side::left, 0.0, 1.0, BoundaryTag::gamma2},
                                    {Side::right, 0.0, 1.0, BoundaryTag::gamma1},
                                    {Side::bottom, 0.0, 1.0, BoundaryTag::gamma1},
                                    {Side::top, 0.0, 1.0, BoundaryTag::gamma1}};
  const Grid g(r, 4, 4, BoundaryPartition(segs));
  BoundaryForcing bf{FieldExpr::constant(2.0), FieldExpr::constant(3.0)};
  for (std::size_t fi : g.boundary_faces()) {
    const Face& f = g.faces()[fi];
    const auto v = bf.at(f, r, 0.0);
    if (f.side == Side::left) {
      CHECK(v[0] == 0.0);
      CHECK(v[1] == 3.0);
    } else {
      CHECK(v[0] == 2.0);
      CHECK(v[1] == 0.0);
    }
  }
}

TEST_CASE("porosity must stay in (0,1)") {
  const Rect r{1.0, 1.0};
  const Grid g(r, 4, 4, BoundaryPartition::uniform(r, BoundaryTag::gamma1));
  PorousDomain d{r, FieldExpr::parse("0.5 + x")};
  CHECK_THROWS_AS(d.validate(g), InvalidInput);
  d.porosity = FieldExpr::parse("0.5 + 0.1*x");
  CHECK_NOTHROW(d.validate(g));
}

TEST_CASE("toggling a segment moves its faces between the forcing sets") {
  const Rect r{1.0, 1.0};
  auto count = [&](BoundaryTag top_tag) {
    std::vector<BoundarySegment> segs{{Side::left, 0.0, 1.0, BoundaryTag::gamma1},
                                      {Side::right, 0.0, 1.0, BoundaryTag::gamma1},
                                      {Side::bottom, 0.0, 1.0, BoundaryTag::gamma1},
                                      {Side::top, 0.0, 0.5, top_tag},
                                      {Side::top, 0.5, 1.0, BoundaryTag::gamma1}};
    const Grid g(r, 8, 8, BoundaryPartition(segs));
    std::size_t n1 = 0, n2 = 0;
    for (std::size_t f : g.boundary_faces()) (g.faces()[f].tag == BoundaryTag::gamma1 ? n1 : n2)++;
    return std::pair{n1, n2};
  };
  const auto [a1, a2] = count(BoundaryTag::gamma1);
  const auto [b1, b2] = count(BoundaryTag::gamma2);
  CHECK(a1 + a2 == 32);
  CHECK(b1 + b2 == 32);
  CHECK(a2 == 0);
  CHECK(b2 == 4);
  CHECK(a1 - b1 == 4);
}
