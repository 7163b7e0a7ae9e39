#pragma once

// Certification of the a priori estimates against solver runs: the
// differential inequality constant C-bar, the L^alpha envelope, and the
// shape of the L^infinity bound.

#include <string>
#include <vector>

#include "rotforch/exponents.hpp"
#include "rotforch/functionals.hpp"
#include "rotforch/moser.hpp"
#include "rotforch/solver.hpp"

namespace rotforch {

// Throws InvalidExponent naming the binding term of alpha_* unless
// b.alpha > alpha_*.
void require_alpha_above_star(const ExponentBundle& b);

// Index of alpha in traj.diag_alphas; throws InvalidInput when absent.
std::size_t diag_index(const Trajectory& traj, double alpha);

struct CbarFit {
  double alpha = 0.0;
  double Cbar = 0.0;
  std::size_t argmax = 0;
  std::vector<double> t;
  std::vector<double> J;            // int phi u^alpha
  std::vector<double> dJdt;         // centred differences, one-sided at the ends
  std::vector<double> grad_energy;  // int u^{alpha-lambda-1}(1+u)^{-2 lambda}|grad u|^{2-a} W1
  std::vector<double> M;            // M_alpha(t)
  std::vector<double> lhs;
  std::vector<double> rhs_shape;    // chi_*^{gamma_*}[(1+J)^{1+mu_*/alpha} + M_alpha]
};

// Requires alpha = b.alpha > alpha_*, every K_j finite, and alpha among the
// trajectory's diagnostic exponents. Throws DivergentFunctional naming the
// first infinite K_j.
CbarFit fit_Cbar(const Trajectory& traj, const ExponentBundle& b, const KFunctionals& K,
                 const Medium& medium, const Grid& grid, const BoundaryForcing& forcing);

// min over t of (C rhs - lhs)/(C rhs); +inf if C rhs is never positive.
double cbar_margin(const CbarFit& fit, double Cbar);

struct NormEnvelope {
  double alpha = 0.0;
  double V0 = 0.0;
  double Cbar = 0.0;
  double chi_star = 1.0;
  double smallness = 0.0;  // alpha / (2 mu_* chi_*^{gamma_*} Cbar) V0^{-mu_*/alpha}
  double T = 0.0;
  double T_max = 0.0;      // int_0^{T_max} M = smallness (inf when Cbar = 0)
  bool admissible = false;
  std::vector<double> t;
  std::vector<double> int_M;
  std::vector<double> delta;
  std::vector<double> bound;      // V0^{1/alpha} delta^{-1/mu_*}; inf where delta <= 0
  double eta = 0.0;               // 0 when the unweighted bound is not requested
  double C_alpha_eta = 0.0;
  std::vector<double> eta_bound;  // C^{1/eta - 1/alpha} bound
};

// int_0^t M_alpha by the trapezoid rule on `nodes` points.
double integrate_M(const Grid& grid, const BoundaryForcing& forcing, double t, double alpha,
                   double r, double lambda, int nodes = 257);

// times must lie in [0, T]. eta in (0, alpha) additionally evaluates the
// unweighted L^eta bound, which needs the weight quadrature.
NormEnvelope norm_envelope(const std::vector<double>& u0, const std::vector<double>& phi,
                              const Grid& grid, const BoundaryForcing& forcing,
                              const ExponentBundle& b, double Cbar, double chi_star, double T,
                              const std::vector<double>& times, double eta = 0.0,
                              const WeightQuadrature* quadrature = nullptr);

struct EnvelopeCheck {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double min_margin = 0.0;  // min of 1 - norm/bound over checked times
};

// Compares the L^alpha_phi norms of the trajectory diagnostics with the
// envelope at every diagnostic time t < T_max (and t <= T).
EnvelopeCheck check_envelope(const NormEnvelope& env, const Trajectory& traj);

struct SupShapeInputs {
  double chi_star = 1.0;
  double eps = 0.1;
  double T = 1.0;
  double delta_T = 1.0;
  double u0_norm = 0.0;  // ||u0||_{L^{beta_1}_phi}
  double PsiT = 1.0;
};

struct SupShape {
  double log_chi = 0.0;    // omega0 log chi_*
  double log_eps = 0.0;    // -omega2 log eps
  double log_T = 0.0;      // (omega1 + nu~/beta1) log(1+T)
  double log_delta = 0.0;  // -(nu~/mu_*) log delta(T)
  double log_u0 = 0.0;     // nu~ log(1 + ||u0||)
  double log_psi = 0.0;    // omega2 log Psi_T
  double log_shape = 0.0;
};

SupShape sup_shape(const MoserSchedule& ms, const ExponentBundle& b, const SupShapeInputs& in);

// sup of u over diagnostics and snapshots with eps <= t <= T.
double sup_after(const Trajectory& traj, double eps, double T);

struct SupRun {
  std::string label;
  SupShapeInputs in;
  double sup_u = 0.0;
  SupShape shape;
  double log_C1 = 0.0;  // log sup_u - log shape
};

struct SupCert {
  std::vector<SupRun> runs;
  double log_C1_fit = 0.0;  // max over runs
  double variation = 0.0;   // max/min of the per-run constants
};

SupCert summarize_sup(std::vector<SupRun> runs);

}  // namespace rotforch
