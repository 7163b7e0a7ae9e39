#pragma once

// Weighted integrals: L^alpha_phi norms, boundary integrals, M_alpha,
// Psi_T and the weight aggregates K0..K6, N1..N3, E1..E3.
//
// Reductions use a fixed pairwise tree so results do not depend on
// anything but the input order. Large powers are accumulated in the log
// domain.

#include <array>
#include <functional>
#include <limits>
#include <vector>

#include "rotforch/constitutive.hpp"
#include "rotforch/exponents.hpp"
#include "rotforch/geometry.hpp"

namespace rotforch {

double pairwise_sum(const double* v, std::size_t n);
double pairwise_sum(const std::vector<double>& v);

// log(sum exp(v_i)); -inf entries are skipped, all -inf gives -inf.
double log_sum_exp(const std::vector<double>& v);

// (sum |f_c|^alpha phi_c area)^{1/alpha}. alpha in (0, 1) is a quasi-norm
// and is accepted only with allow_quasi.
double lp_phi_norm(const std::vector<double>& f, double alpha, const std::vector<double>& phi,
                   const Grid& grid, bool allow_quasi = false);
// log of sum |f_c|^alpha phi_c area, i.e. alpha log ||f||.
double log_power_integral(const std::vector<double>& f, double alpha,
                          const std::vector<double>& phi, const Grid& grid);

// Trapezoid in time, midpoint in space. Requires at least two snapshots
// at strictly increasing times.
double spacetime_lp_phi_norm(const std::vector<double>& times,
                             const std::vector<std::vector<double>>& snaps, double alpha,
                             const std::vector<double>& phi, const Grid& grid);

// sum |v_f|^power length_f over the grid's boundary faces, v indexed like
// grid.boundary_faces().
double boundary_integral(const Grid& grid, const std::vector<double>& values, double power);

// Per-cell gradient: central differences inside, second-order one-sided
// at the boundary.
std::vector<Vec2> cell_gradients(const std::vector<double>& u, const Grid& grid);

// 1 + int_Gamma (psi1^-)^{(alpha+r)/(r+lambda)} + (psi2^-)^{(alpha+r)/r} dS.
double compute_M_alpha(const Grid& grid, const BoundaryForcing& forcing, double t, double alpha,
                       double r, double lambda);

// 1 + (int_0^T int_Gamma (psi1^-)^{q3} + (psi2^-)^{q3})^{p3(2-a)/(q3(p3(2-a)-1))}.
// The time integral uses the trapezoid rule on time_points nodes.
double compute_PsiT(const Grid& grid, const BoundaryForcing& forcing, double T, double p3,
                    double a, int time_points = 65);

// Result of a weight integral checked for divergence by refinement.
struct WeightIntegral {
  double value = 0.0;       // +inf when flagged divergent
  double log_value = 0.0;   // log of the finest-level integral
  bool finite = true;
  std::array<double, 3> levels{};  // log integrals at nx, 2nx, 4nx
};

// Weight values at cell centres on three nested grids, used to integrate
// expressions of phi and W0..W4 with the divergence sentinel: an integral
// is +inf when it grows by more than 5% at both refinements.
class WeightQuadrature {
 public:
  static constexpr double kDivergenceRatio = 1.05;

  WeightQuadrature(const Medium& medium, int nx, int ny);

  // log_integrand receives the weights at a point and returns the log of
  // the integrand there.
  WeightIntegral integrate(const std::function<double(const WeightValues&)>& log_integrand) const;

  int nx() const { return nx_; }
  int ny() const { return ny_; }

 private:
  int nx_;
  int ny_;
  std::array<std::vector<WeightValues>, 3> levels_;
  std::array<double, 3> cell_area_{};
};

struct KFunctionals {
  double alpha = 0.0;
  std::array<double, 7> K{};  // K0..K6, +inf when divergent
  std::array<bool, 7> K_finite{};
  double N1 = 0.0, N2 = 0.0, N3 = 0.0;
  double E1 = 0.0, E2 = 0.0, E3 = 0.0;
  double Phi_star = 0.0;   // 1 + int phi
  double Phi_dstar = 0.0;  // int phi^{-1}
  bool all_finite() const;
  // First divergent K_j, or -1.
  int first_divergent() const;
};

// j-th functional at alpha. Throws InvalidExponent when the exponents are
// undefined (for example alpha(1-r1) <= 2 lambda r1 for K3).
WeightIntegral compute_K(int j, double alpha, const ExponentBundle& b, const WeightQuadrature& q);

// Everything at alpha = b.alpha.
KFunctionals compute_K_all(const ExponentBundle& b, const WeightQuadrature& q);

}  // namespace rotforch
