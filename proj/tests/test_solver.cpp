#include <cmath>

#include "doctest.h"
#include "rotforch/errors.hpp"
#include "rotforch/functionals.hpp"
#include "rotforch/solver.hpp"

using namespace rotforch;

namespace {

Medium medium(double omega = 0.0, const char* porosity = "0.5 + 0.1*x") {
  Medium m;
  m.law = ForchheimerLaw({0, 1}, {FieldExpr::parse("1 + 0.2*sin(pi*x)*cos(pi*y)"),
                                  FieldExpr::constant(1.0)});
  m.eos = FluidEOS::slightly_compressible(1.0);
  m.rotation.omega_tilde = omega;
  m.domain.rect = {1.0, 1.0};
  m.domain.porosity = FieldExpr::parse(porosity);
  return m;
}

Grid grid(int n) {
  const Rect r{1.0, 1.0};
  return Grid(r, n, n, BoundaryPartition::uniform(r, BoundaryTag::gamma1));
}

Problem problem(const Medium& m, const char* u0, const char* psi1 = "0", const char* psi2 = "0") {
  Problem p;
  p.medium = m;
  p.forcing = {FieldExpr::parse(psi1), FieldExpr::parse(psi2)};
  p.u0 = FieldExpr::parse(u0);
  return p;
}

SolverConfig fixed(double dt, double t_end) {
  SolverConfig c;
  c.policy = SolverConfig::DtPolicy::fixed;
  c.dt = dt;
  c.t_end = t_end;
  return c;
}

}  // namespace

TEST_CASE("constant state is a fixed point with zero interior flux") {
  const Grid g = grid(8);
  Simulation sim(problem(medium(), "0.7"), g, fixed(1e-3, 0.01));
  const PseudoPressureState s = sim.initial_state();
  const auto grad = cell_gradients(s.u, g);
  for (std::size_t f = 0; f < g.faces().size(); ++f) CHECK(sim.face_flux(s, grad, f) == 0.0);
  const Trajectory tr = sim.run();
  for (double u : tr.snapshots.back().u) CHECK(u == 0.7);
}

TEST_CASE("boundary flux follows the boundary condition") {
  const Grid g = grid(4);
  Simulation sim(problem(medium(), "0.5 + x", "1", "0"), g, fixed(1e-3, 0.01));
  const PseudoPressureState s = sim.initial_state();
  const auto grad = cell_gradients(s.u, g);
  for (std::size_t f : g.boundary_faces()) CHECK(sim.face_flux(s, grad, f) == -1.0);
}

TEST_CASE("interior flux of a linear profile") {
  Medium m = medium();
  m.law = ForchheimerLaw({0, 1}, {FieldExpr::constant(1.0), FieldExpr::constant(1.0)});
  const Grid g = grid(6);
  Simulation sim(problem(m, "1 + x"), g, fixed(1e-3, 0.01));
  const PseudoPressureState s = sim.initial_state();
  const auto grad = cell_gradients(s.u, g);
  const double root = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t f = 0; f < g.faces().size(); ++f) {
    const Face& face = g.faces()[f];
    if (face.boundary || face.nx == 0.0) continue;
    CHECK(sim.face_flux(s, grad, f) == doctest::Approx(root).epsilon(1e-10));
  }
}

TEST_CASE("closed system conserves mass") {
  const Grid g = grid(16);
  SolverConfig c = fixed(1e-4, 0.01);
  Simulation sim(problem(medium(1.0), "0.5 + 0.25*cos(pi*x)*cos(pi*y)"), g, c);
  const Trajectory tr = sim.run();
  REQUIRE(tr.steps.size() == 100);
  for (const StepRecord& r : tr.steps) {
    CHECK(std::abs(r.mass_after - r.mass_before) <= 1e-13 * r.mass_before);
  }
  const MassBalance mb = mass_balance_residual(tr);
  CHECK(mb.max_abs <= 1e-12);
  CHECK(tr.floor_events == 0);
}

TEST_CASE("zero data stays zero") {
  Medium m = medium(2.0);
  m.rotation.gravity_tilde = 1.0;
  Simulation sim(problem(m, "0"), grid(8), fixed(1e-3, 0.01));
  const Trajectory tr = sim.run();
  for (double u : tr.snapshots.back().u) CHECK(u == 0.0);
}

TEST_CASE("flooring is recorded and closes the balance") {
  Medium m = medium();
  m.eos = FluidEOS::isentropic(1.0, 1.0);
  SolverConfig c;
  c.t_end = 0.05;
  c.eps_reg = 1e-3;
  Simulation sim(problem(m, "0.002*x", "2", "0"), grid(8), c);
  const Trajectory tr = sim.run();
  CHECK(tr.floor_events > 0);
  CHECK(tr.total_floor_injection > 0.0);
  for (double u : tr.snapshots.back().u) CHECK(u >= 1e-3 * (1.0 - 1e-12));
  const MassBalance mb = mass_balance_residual(tr);
  CHECK(mb.max_abs <= 1e-10);
  CHECK(mb.total_floor_injection == doctest::Approx(tr.total_floor_injection));
}

TEST_CASE("source bookkeeping in the mass balance") {
  Problem p = problem(medium(), "1 + 0.1*x");
  p.source = [](double, std::vector<double>& out) {
    for (double& v : out) v = 0.5;
  };
  Simulation sim(p, grid(8), fixed(1e-4, 1e-3));
  const Trajectory tr = sim.run();
  for (const StepRecord& r : tr.steps) CHECK(r.source == doctest::Approx(0.5));
  CHECK(mass_balance_residual(tr).max_abs <= 1e-12);
}

TEST_CASE("step budget exhaustion is a stiffness error") {
  SolverConfig c = fixed(1e-4, 1.0);
  c.max_steps = 3;
  Simulation sim(problem(medium(), "1 + 0.1*x"), grid(8), c);
  CHECK_THROWS_AS(sim.run(), StiffnessError);
}

TEST_CASE("mirror-symmetric data stay mirror-symmetric") {
  // Dyadic spacing and polynomial data make the mirrored initial values exact.
  const Grid g = grid(8);
  SolverConfig c = fixed(2e-4, 0.01);
  Medium m = medium(0.0, "0.5");
  m.law = ForchheimerLaw({0, 1}, {FieldExpr::constant(1.0), FieldExpr::constant(1.0)});
  Simulation sim(problem(m, "1 + 2*x*(1 - x)*y*(1 - y)", "0.1", "0"), g, c);
  const auto& u = sim.run().snapshots.back().u;
  const int n = g.nx();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      CHECK(u[g.index(i, j)] == u[g.index(n - 1 - i, j)]);
      CHECK(u[g.index(i, j)] == u[g.index(i, n - 1 - j)]);
    }
  }
}

TEST_CASE("discrete energy identity residual is first order in dt") {
  // lambda = 1, alpha = 2: (1/2) dJ/dt + int X.grad u + int_Gamma (psi1 u + psi2 u^2) = 0.
  const Grid g = grid(16);
  Simulation sim(problem(medium(0.5), "1 + 0.3*cos(pi*x)*sin(pi*y)", "-0.2*x", "0.3"), g,
                 fixed(1e-4, 1.0));
  const PseudoPressureState s = sim.initial_state();
  const auto grad = cell_gradients(s.u, g);
  const std::vector<double> one(g.cell_count(), 1.0);
  const double J0 = std::exp(log_power_integral(s.u, 2.0, sim.cell_phi(), g));
  double dissipation = 0.0;
  for (std::size_t f = 0; f < g.faces().size(); ++f) {
    const Face& face = g.faces()[f];
    const double q = sim.face_flux(s, grad, f) * face.length;
    if (face.boundary) {
      dissipation -= q * s.u[static_cast<std::size_t>(face.minus)];
    } else {
      dissipation += q * (s.u[static_cast<std::size_t>(face.plus)] -
                          s.u[static_cast<std::size_t>(face.minus)]);
    }
  }
  auto residual = [&](double dt) {
    const PseudoPressureState s1 = sim.step(s, dt);
    const double J1 = std::exp(log_power_integral(s1.u, 2.0, sim.cell_phi(), g));
    return std::abs(0.5 * (J1 - J0) / dt + dissipation);
  };
  const double r1 = residual(1e-5);
  const double r2 = residual(5e-6);
  CHECK(r1 > 0.0);
  CHECK(r1 / r2 == doctest::Approx(2.0).epsilon(0.02));
  CHECK(r1 < 1e-3 * std::abs(dissipation));
}

TEST_CASE("manufactured constant solution is reproduced exactly") {
  const Problem base = problem(medium(), "1.5");
  const ManufacturedSolution ms(base.medium, FieldExpr::parse("1.5"));
  const Grid g = grid(8);
  Simulation sim(ms.make_problem(base, g, 0.01), g, fixed(1e-3, 0.01));
  for (double u : sim.run().snapshots.back().u) CHECK(u == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("manufactured solution must be positive") {
  const Problem base = problem(medium(), "1");
  const ManufacturedSolution ms(base.medium, FieldExpr::parse("x - 0.5"));
  CHECK_THROWS_AS(ms.make_problem(base, grid(8), 0.01), InvalidInput);
}

TEST_CASE("small MMS study converges") {
  const Problem base = problem(medium(1.0), "2 + sin(pi*x)*sin(pi*y)");
  MmsOptions opt;
  opt.grids = {16, 32, 64};
  const MmsResult r = mms_study(base, FieldExpr::parse("2 + sin(pi*x)*sin(pi*y)*exp(-t)"), opt);
  REQUIRE(r.spatial.size() == 3);
  CHECK(r.spatial[2].error_l2 < r.spatial[1].error_l2);
  CHECK(r.spatial_order >= 1.8);
  CHECK(r.temporal_order == doctest::Approx(1.0).epsilon(0.15));
}
