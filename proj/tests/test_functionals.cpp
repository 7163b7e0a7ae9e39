#include <cmath>
#include <random>

#include "doctest.h"
#include "rotforch/errors.hpp"
#include "rotforch/exponents.hpp"
#include "rotforch/functionals.hpp"

using namespace rotforch;

namespace {

Grid unit_grid(int n, BoundaryTag tag = BoundaryTag::gamma1) {
  const Rect r{1.0, 1.0};
  return Grid(r, n, n, BoundaryPartition::uniform(r, tag));
}

// Porosity 0.5 with cbar = 2 gives phi = 1.
Medium unit_phi_medium() {
  Medium m;
  m.law = ForchheimerLaw({0, 1}, {FieldExpr::constant(1), FieldExpr::constant(1)});
  m.eos = FluidEOS::slightly_compressible(2.0);
  m.domain.rect = {1.0, 1.0};
  m.domain.porosity = FieldExpr::constant(0.5);
  return m;
}

}  // namespace

TEST_CASE("L^alpha_phi norms of constants") {
  const Grid g = unit_grid(8);
  const std::vector<double> one(g.cell_count(), 1.0), two(g.cell_count(), 2.0);
  CHECK(lp_phi_norm(one, 2.0, one, g) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lp_phi_norm(two, 3.0, one, g) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("L^1 norm of x converges at second order") {
  double prev = 0.0;
  for (int n : {8, 16, 32}) {
    const Grid g = unit_grid(n);
    const auto x = materialize(FieldExpr::parse("x*x"), g, 0.0);
    const std::vector<double> one(g.cell_count(), 1.0);
    const double err = std::abs(lp_phi_norm(x, 1.0, one, g) - 1.0 / 3.0);
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.01));
    prev = err;
  }
  const Grid g = unit_grid(16);
  const auto x = materialize(FieldExpr::parse("x"), g, 0.0);
  const std::vector<double> one(g.cell_count(), 1.0);
  CHECK(lp_phi_norm(x, 1.0, one, g) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("quasi-norms need an explicit opt in") {
  const Grid g = unit_grid(4);
  const std::vector<double> one(g.cell_count(), 1.0);
  CHECK_THROWS_AS(lp_phi_norm(one, 0.5, one, g), InvalidInput);
  CHECK(lp_phi_norm(one, 0.5, one, g, true) == doctest::Approx(1.0));
}

TEST_CASE("large exponents do not overflow") {
  const Grid g = unit_grid(4);
  const std::vector<double> big(g.cell_count(), 1e10), one(g.cell_count(), 1.0);
  CHECK(lp_phi_norm(big, 400.0, one, g) == doctest::Approx(1e10).epsilon(1e-12));
  CHECK(log_power_integral(big, 400.0, one, g) == doctest::Approx(400.0 * std::log(1e10)));
}

TEST_CASE("space-time norms") {
  const Grid g = unit_grid(4);
  const std::vector<double> one(g.cell_count(), 1.0), u(g.cell_count(), 1.0);
  CHECK(spacetime_lp_phi_norm({0.0, 2.0}, {u, u}, 4.0, one, g) ==
        doctest::Approx(std::pow(2.0, 0.25)));
  const std::vector<double> three(g.cell_count(), 3.0);
  CHECK(spacetime_lp_phi_norm({0.0, 0.5, 1.5}, {three, three, three}, 2.0, one, g) ==
        doctest::Approx(std::pow(1.5, 0.5) * 3.0));
  CHECK_THROWS_AS(spacetime_lp_phi_norm({0.0}, {u}, 2.0, one, g), InvalidInput);
  CHECK_THROWS_AS(spacetime_lp_phi_norm({1.0, 1.0}, {u, u}, 2.0, one, g), InvalidInput);
}

TEST_CASE("boundary integrals") {
  const Grid g = unit_grid(5);
  const std::size_t nb = g.boundary_faces().size();
  CHECK(boundary_integral(g, std::vector<double>(nb, 0.0), 2.0) == 0.0);
  CHECK(boundary_integral(g, std::vector<double>(nb, 1.0), 2.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(boundary_integral(g, std::vector<double>(nb + 1, 1.0), 2.0), InvalidInput);
}

TEST_CASE("pairwise sums are order-stable and accurate") {
  std::vector<double> v(100001, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(10000.1).epsilon(1e-14));
  CHECK(log_sum_exp({-INFINITY, -INFINITY}) == -INFINITY);
  CHECK(log_sum_exp({1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
}

TEST_CASE("M_alpha") {
  const Grid g = unit_grid(8);
  BoundaryForcing nonneg{FieldExpr::parse("1 + x"), FieldExpr::constant(0.5)};
  CHECK(compute_M_alpha(g, nonneg, 0.0, 3.0, 1.0, 1.0) == 1.0);
  BoundaryForcing inflow{FieldExpr::constant(-1.0), FieldExpr::constant(0.0)};
  CHECK(compute_M_alpha(g, inflow, 0.0, 3.0, 1.0, 1.0) == doctest::Approx(5.0));
  CHECK_THROWS_AS(compute_M_alpha(g, inflow, 0.0, 3.0, 0.0, 1.0), InvalidExponent);
}

TEST_CASE("M_alpha is monotone in the inflow strength") {
  const Grid g = unit_grid(8);
  double prev = 0.0;
  for (double s : {0.5, 1.0, 2.0, 4.0}) {
    BoundaryForcing f{FieldExpr::constant(-s), FieldExpr::constant(0.0)};
    const double m = compute_M_alpha(g, f, 0.0, 10.0, 2.5, 1.0);
    CHECK(m >= prev);
    prev = m;
  }
}

TEST_CASE("Psi_T") {
  const Grid g = unit_grid(8, BoundaryTag::gamma2);
  BoundaryForcing nonneg{FieldExpr::constant(0.0), FieldExpr::constant(1.0)};
  CHECK(compute_PsiT(g, nonneg, 1.0, 2.0, 0.5) == 1.0);
  BoundaryForcing neg{FieldExpr::constant(0.0), FieldExpr::constant(-1.0)};
  // p3 = 2, q3 = 2, a = 1/2: exponent p3(2-a)/(q3(p3(2-a)-1)) = 3/4.
  CHECK(compute_PsiT(g, neg, 1.0, 2.0, 0.5) == doctest::Approx(1.0 + std::pow(4.0, 0.75)));
  CHECK_THROWS_AS(compute_PsiT(g, neg, 0.0, 2.0, 0.5), InvalidInput);
  CHECK_THROWS_AS(compute_PsiT(g, neg, 1.0, 0.6, 0.5), InvalidExponent);
}

TEST_CASE("cell gradients are exact for quadratics") {
  const Grid g = unit_grid(6);
  const auto u = materialize(FieldExpr::parse("x*x + 3*x*y - y*y"), g, 0.0);
  const auto gr = cell_gradients(u, g);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const Point p = g.center(c);
    CHECK(gr[c][0] == doctest::Approx(2 * p[0] + 3 * p[1]).epsilon(1e-11));
    CHECK(gr[c][1] == doctest::Approx(3 * p[0] - 2 * p[1]).epsilon(1e-11));
  }
}

TEST_CASE("K functionals with phi = 1") {
  const Medium m = unit_phi_medium();
  const WeightQuadrature q(m, 16, 16);
  ExponentInputs in;
  in.alpha = 100.0;
  const ExponentBundle b = compute_exponents(in);
  CHECK(compute_K(0, 100.0, b, q).value == doctest::Approx(2.0));
  CHECK(compute_K(1, 100.0, b, q).value == doctest::Approx(1.0));
  CHECK_THROWS_AS(compute_K(3, 8.0, b, q), InvalidExponent);
  CHECK_THROWS_AS(compute_K(7, 100.0, b, q), InvalidInput);
  const KFunctionals K = compute_K_all(b, q);
  CHECK(K.all_finite());
  CHECK(K.first_divergent() == -1);
}

TEST_CASE("K divergence sentinel") {
  // phi ~ dist^4 near the boundary, so phi^-3 is not integrable.
  Medium m = unit_phi_medium();
  m.domain.porosity = FieldExpr::parse("0.5*dist_boundary^4");
  const WeightQuadrature q(m, 8, 8);
  const WeightIntegral w = q.integrate([](const WeightValues& v) { return -3.0 * std::log(v.phi); });
  CHECK_FALSE(w.finite);
  CHECK(std::isinf(w.value));
}
