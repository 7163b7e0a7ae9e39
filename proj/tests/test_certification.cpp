#include <cmath>

#include "doctest.h"
#include "rotforch/certification.hpp"
#include "rotforch/errors.hpp"

using namespace rotforch;

namespace {

Medium medium() {
  Medium m;
  m.law = ForchheimerLaw({0, 1}, {FieldExpr::constant(1.0), FieldExpr::constant(1.0)});
  m.eos = FluidEOS::slightly_compressible(1.0);
  m.domain.rect = {1.0, 1.0};
  m.domain.porosity = FieldExpr::constant(0.5);
  return m;
}

Grid grid(int n) {
  const Rect r{1.0, 1.0};
  return Grid(r, n, n, BoundaryPartition::uniform(r, BoundaryTag::gamma1));
}

ExponentBundle bundle(double alpha) {
  ExponentInputs in;
  in.alpha = alpha;
  return compute_exponents(in);
}

}  // namespace

TEST_CASE("alpha below alpha_* names the binding term") {
  try {
    require_alpha_above_star(bundle(90.0));
    FAIL("expected InvalidExponent");
  } catch (const InvalidExponent& e) {
    CHECK(e.inequality() == "alpha > 2r~(1+2/r_*) + 4 lambda/r_*");
  }
  CHECK_NOTHROW(require_alpha_above_star(bundle(97.65)));
}

TEST_CASE("stationary zero solution fits Cbar = 0") {
  const Medium m = medium();
  const Grid g = grid(8);
  const ExponentBundle b = bundle(97.65);
  Problem p;
  p.medium = m;
  p.u0 = FieldExpr::constant(0.0);
  SolverConfig c;
  c.policy = SolverConfig::DtPolicy::fixed;
  c.dt = 1e-3;
  c.t_end = 0.01;
  c.diag_alphas = {b.alpha};
  Simulation sim(p, g, c);
  const Trajectory tr = sim.run();
  const KFunctionals K = compute_K_all(b, WeightQuadrature(m, 8, 8));
  const CbarFit fit = fit_Cbar(tr, b, K, m, g, p.forcing);
  CHECK(fit.Cbar == 0.0);
  for (double l : fit.lhs) CHECK(l == 0.0);
  CHECK(cbar_margin(fit, 1.0) == 1.0);
}

TEST_CASE("fit_Cbar refuses alpha below alpha_* and missing diagnostics") {
  const Medium m = medium();
  const Grid g = grid(8);
  Trajectory tr;
  tr.diag_alphas = {50.0};
  tr.diag.resize(3);
  const ExponentBundle low = bundle(50.0);
  KFunctionals K;
  CHECK_THROWS_AS(fit_Cbar(tr, low, K, m, g, {}), InvalidExponent);
  CHECK_THROWS_AS(diag_index(tr, 97.65), InvalidInput);
}

TEST_CASE("envelope with nonnegative forcing") {
  const Grid g = grid(8);
  const ExponentBundle b = bundle(97.65);
  const std::vector<double> u0(g.cell_count(), 0.9), phi(g.cell_count(), 0.5);
  const BoundaryForcing f{FieldExpr::constant(0.3), FieldExpr::constant(0.0)};
  const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
  const NormEnvelope env = norm_envelope(u0, phi, g, f, b, 1e-3, 1.0, 1.0, times);
  CHECK(env.delta[0] == 1.0);
  CHECK(env.bound[0] == doctest::Approx(std::pow(env.V0, 1.0 / b.alpha)).epsilon(1e-14));
  // M = 1, so delta is affine in t.
  for (std::size_t i = 1; i + 1 < times.size(); ++i) {
    CHECK(env.delta[i + 1] - env.delta[i] == doctest::Approx(env.delta[i] - env.delta[i - 1]));
    CHECK(env.delta[i] < env.delta[i - 1]);
  }
  CHECK(env.delta[1] == doctest::Approx(1.0 - 0.25 / env.smallness));
}

TEST_CASE("smallness window") {
  const Grid g = grid(8);
  const ExponentBundle b = bundle(97.65);
  const std::vector<double> u0(g.cell_count(), 1.0), phi(g.cell_count(), 0.5);
  const BoundaryForcing f{FieldExpr::constant(-0.5), FieldExpr::constant(0.0)};
  const NormEnvelope env = norm_envelope(u0, phi, g, f, b, 1.0, 1.0, 1.0, {0.0});
  CHECK(env.T_max > 0.0);
  CHECK(integrate_M(g, f, env.T_max, b.alpha, b.r, b.lambda) ==
        doctest::Approx(env.smallness).epsilon(1e-9));
  CHECK(env.admissible == (1.0 < env.T_max));
  const NormEnvelope none = norm_envelope(u0, phi, g, f, b, 0.0, 1.0, 1.0, {0.0, 1.0});
  CHECK(std::isinf(none.T_max));
  CHECK(none.delta[1] == 1.0);
}

TEST_CASE("unweighted bound needs eta below alpha") {
  const Grid g = grid(8);
  const ExponentBundle b = bundle(97.65);
  const std::vector<double> u0(g.cell_count(), 1.0), phi(g.cell_count(), 0.5);
  const WeightQuadrature q(medium(), 8, 8);
  CHECK_THROWS_AS(norm_envelope(u0, phi, g, {}, b, 1.0, 1.0, 1.0, {0.0}, b.alpha, &q),
                  InvalidInput);
  const NormEnvelope e = norm_envelope(u0, phi, g, {}, b, 1.0, 1.0, 1.0, {0.0}, 2.0, &q);
  CHECK(e.eta_bound.size() == 1);
  CHECK(e.eta_bound[0] > 0.0);
}

TEST_CASE("shape terms and the sup bound with zero data") {
  const ExponentBundle b = bundle(97.65);
  const double alpha0 = default_alpha(ExponentInputs{}).alpha0;
  const MoserSchedule ms = moser_schedule(b, alpha0, 0.5, 0.02);
  SupShapeInputs in;
  in.chi_star = 2.0;
  in.eps = 0.01;
  in.T = 0.02;
  const SupShape s = sup_shape(ms, b, in);
  CHECK(s.log_chi == doctest::Approx(ms.omega0 * std::log(2.0)));
  CHECK(s.log_eps == doctest::Approx(-ms.omega2 * std::log(0.01)));
  CHECK(s.log_u0 == 0.0);
  CHECK(s.log_shape == doctest::Approx(s.log_chi + s.log_eps + s.log_T + s.log_delta + s.log_u0 +
                                       s.log_psi));
  Trajectory tr;
  tr.snapshots.push_back({0.0, std::vector<double>(4, 0.0)});
  tr.snapshots.push_back({0.02, std::vector<double>(4, 0.0)});
  CHECK(sup_after(tr, 0.01, 0.02) == 0.0);
}

TEST_CASE("summary of shape runs") {
  std::vector<SupRun> runs(2);
  runs[0].sup_u = 1.0;
  runs[0].shape.log_shape = 2.0;
  runs[1].sup_u = std::exp(1.0);
  runs[1].shape.log_shape = 2.0;
  const SupCert c = summarize_sup(runs);
  CHECK(c.log_C1_fit == -1.0);
  CHECK(c.variation == doctest::Approx(std::exp(1.0)));
}
