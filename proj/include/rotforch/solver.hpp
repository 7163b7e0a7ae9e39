#pragma once

// Explicit finite-volume solver for
//
//   phi (u^lambda)_t = div X(x, u, grad u + u^{2 lambda} Z(x, t))   in U
//   X . nu + psi1 + psi2 u^lambda = 0                              on Gamma
//
// The evolved variable is w = u^lambda.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "rotforch/constitutive.hpp"
#include "rotforch/field_expr.hpp"
#include "rotforch/geometry.hpp"

namespace rotforch {

struct Problem {
  Medium medium;
  BoundaryForcing forcing;
  FieldExpr u0;
  // Optional per-cell source added to the right-hand side of the w equation
  // (fills out[c] at time t).
  std::function<void(double t, std::vector<double>& out)> source;
  // Optional replacement of the boundary condition: outward normal X . nu
  // at a boundary face. Used by manufactured-solution runs.
  std::function<double(const Face& face, double t)> boundary_flux;
};

struct SolverConfig {
  enum class DtPolicy { fixed, adaptive };
  DtPolicy policy = DtPolicy::adaptive;
  double dt = 1e-3;     // fixed step, or upper bound for adaptive steps
  double safety = 0.5;  // adaptive: fraction of the probed stability limit
  int probe_interval = 5;
  double eps_reg = -1.0;  // < 0 selects 1e-10 for lambda < 1 and 0 otherwise
  double t_end = 0.01;
  double snapshot_dt = 0.0;  // 0 keeps only the initial and final states
  std::size_t max_steps = 10000000;
  std::vector<double> diag_alphas;  // L^alpha_phi norms and gradient energies
  int diag_every = 1;
  double inverse_tol = kInverseTol;

  double resolved_eps_reg(double lambda) const;
  void validate() const;
};

struct PseudoPressureState {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> w;
  double last_dt = 0.0;
  double last_max_rate = 0.0;  // largest probed flux sensitivity per unit storage
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> u;
};

struct StepRecord {
  double t = 0.0;  // start of the step
  double dt = 0.0;
  double mass_before = 0.0;  // sum phi w area
  double mass_after = 0.0;
  double outflux = 0.0;  // int_Gamma X . nu_out with a minus sign, i.e. int (psi1 + psi2 u^lambda)
  double source = 0.0;   // int f
  double floor_injection = 0.0;  // mass added by the regularization floor
  std::size_t floored_cells = 0;
};

struct DiagRow {
  double t = 0.0;
  double mass = 0.0;
  double outflux = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  std::vector<double> norms;        // per diag alpha
  std::vector<double> grad_energy;  // int u^{alpha-lambda-1}(1+u)^{-2 lambda}|grad u|^{2-a} W1
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<StepRecord> steps;
  std::vector<DiagRow> diag;
  std::vector<double> diag_alphas;
  std::size_t floor_events = 0;
  double total_floor_injection = 0.0;
};

class Simulation {
 public:
  Simulation(Problem problem, const Grid& grid, SolverConfig config);

  const Grid& grid() const { return grid_; }
  const Problem& problem() const { return problem_; }
  const SolverConfig& config() const { return config_; }
  const std::vector<double>& cell_phi() const { return cell_phi_; }
  const std::vector<double>& cell_W1() const { return cell_W1_; }

  PseudoPressureState initial_state() const;
  PseudoPressureState state_from(const std::vector<double>& u, double t) const;

  // Normal component of X at face f: along +x / +y for interior faces and
  // outward for boundary faces. grad holds the cell gradients of u.
  double face_flux(const PseudoPressureState& s, const std::vector<Vec2>& grad,
                   std::size_t f) const;

  // Largest stable step from a finite-difference probe of the face fluxes.
  double probe_dt(const PseudoPressureState& s) const;

  // One explicit Euler step of size dt. Fills rec when given.
  PseudoPressureState step(const PseudoPressureState& s, double dt,
                           StepRecord* rec = nullptr) const;

  Trajectory run();
  // Runs from an explicit initial field (cell values).
  Trajectory run_from(const std::vector<double>& u0);

  double mass(const PseudoPressureState& s) const;
  DiagRow diagnostics(const PseudoPressureState& s) const;

 private:
  double interior_flux(const std::vector<double>& u, const std::vector<Vec2>& grad,
                       std::size_t f, double t, double dgn, double dgt, double du) const;
  double boundary_outflux(const PseudoPressureState& s, std::size_t f) const;

  Problem problem_;
  Grid grid_;
  SolverConfig config_;
  double lambda_;
  double eps_reg_;
  std::vector<double> cell_phi_;
  std::vector<double> cell_W1_;
  std::vector<LocalLaw> face_law_;
  std::vector<double> face_rstar_;
};

struct MassBalance {
  std::vector<double> residual;  // per step, normalized
  double max_abs = 0.0;
  double total_floor_injection = 0.0;
};

// r_k = (mass_{k+1} - mass_k)/dt_k + outflux_k - source_k - floor_k/dt_k,
// normalized by mass_k/dt_k + |outflux_k| + |source_k|.
MassBalance mass_balance_residual(const Trajectory& traj);

// Manufactured solution u*(x, y, t) for the full operator. The source is
// tabulated on time nodes and interpolated with cubic Lagrange weights.
class ManufacturedSolution {
 public:
  ManufacturedSolution(const Medium& medium, FieldExpr exact);

  double u(double x, double y, double t) const;
  // X(x, u*, grad u* + u*^{2 lambda} Z) at a point.
  Vec2 flux(double x, double y, double t) const;
  // phi (u*^lambda)_t - div X by fourth-order central differences.
  double source(double x, double y, double t) const;

  // Wires source, boundary flux and initial data into the problem.
  Problem make_problem(const Problem& base, const Grid& grid, double t_end,
                       int time_nodes = 33) const;
  void check_positive(const Grid& grid, double t_end) const;

 private:
  Medium medium_;
  FieldExpr exact_;
  FieldExpr ux_, uy_, ut_;
  double fd_h_;
};

struct MmsRow {
  int n = 0;
  double h = 0.0;
  double error_l2 = 0.0;   // L^2_phi error at t_end
  double error_max = 0.0;
  double order = 0.0;      // against the previous row; 0 for the first
  std::size_t steps = 0;
};

struct MmsResult {
  std::vector<MmsRow> spatial;
  double spatial_order = 0.0;  // over the whole range
  std::vector<double> temporal_dt;
  std::vector<double> temporal_diff;  // |u_dt - u_dt/2|, |u_dt/2 - u_dt/4|
  double temporal_order = 0.0;
};

struct MmsOptions {
  std::vector<int> grids{16, 32, 64, 128};
  double t_end = 0.002;
  int temporal_grid = 16;
  double temporal_t_end = 0.01;
  SolverConfig solver;
};

MmsResult mms_study(const Problem& base, const FieldExpr& exact, const MmsOptions& opt);

// snap_<k>.csv (t,i,j,x,y,u), diag.csv and steps.csv in dir.
void write_trajectory_csv(const std::string& dir, const Trajectory& traj, const Grid& grid,
                          bool with_steps = false);

}  // namespace rotforch
