#include "rotforch/solver.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>

#include "rotforch/errors.hpp"
#include "rotforch/functionals.hpp"

namespace rotforch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double w_to_u(double w, double lambda) { return lambda == 1.0 ? w : std::pow(w, 1.0 / lambda); }
double u_to_w(double u, double lambda) { return lambda == 1.0 ? u : std::pow(u, lambda); }

}  // namespace

double SolverConfig::resolved_eps_reg(double lambda) const {
  if (eps_reg >= 0.0) return eps_reg;
  return lambda < 1.0 ? 1e-10 : 0.0;
}

void SolverConfig::validate() const {
  if (!(t_end > 0.0)) throw InvalidInput("t_end must be positive");
  if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
  if (!(safety > 0.0 && safety <= 1.0)) throw InvalidInput("safety factor must lie in (0,1]");
  if (probe_interval < 1) throw InvalidInput("probe_interval must be at least 1");
  if (diag_every < 1) throw InvalidInput("diag_every must be at least 1");
  if (snapshot_dt < 0.0) throw InvalidInput("snapshot_dt must be nonnegative");
  if (!(inverse_tol > 0.0)) throw InvalidInput("inverse tolerance must be positive");
}

Simulation::Simulation(Problem problem, const Grid& grid, SolverConfig config)
    : problem_(std::move(problem)), grid_(grid), config_(std::move(config)) {
  config_.validate();
  problem_.medium.eos.validate();
  problem_.medium.rotation.validate();
  problem_.medium.domain.validate(grid_);
  lambda_ = problem_.medium.lambda();
  eps_reg_ = config_.resolved_eps_reg(lambda_);
  const std::size_t nc = grid_.cell_count();
  cell_phi_.resize(nc);
  cell_W1_.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const WeightValues w = eval_weights(problem_.medium, grid_.center(c));
    cell_phi_[c] = w.phi;
    cell_W1_[c] = w.W1;
  }
  const auto& faces = grid_.faces();
  face_law_.reserve(faces.size());
  face_rstar_.reserve(faces.size());
  for (const Face& f : faces) {
    const Point p{f.x, f.y, 0.0};
    face_law_.push_back(problem_.medium.law_at(p));
    face_rstar_.push_back(problem_.medium.R_star(p));
  }
}

PseudoPressureState Simulation::state_from(const std::vector<double>& u, double t) const {
  if (u.size() != grid_.cell_count()) throw InvalidInput("initial field does not match the grid");
  PseudoPressureState s;
  s.t = t;
  s.u = u;
  s.w.resize(u.size());
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (!(u[c] >= 0.0)) {
      throw InvalidInput("initial pseudo-pressure is negative in cell " + std::to_string(c));
    }
    s.w[c] = u_to_w(u[c], lambda_);
  }
  return s;
}

PseudoPressureState Simulation::initial_state() const {
  return state_from(materialize(problem_.u0, grid_, 0.0), 0.0);
}

double Simulation::interior_flux(const std::vector<double>& u, const std::vector<Vec2>& grad,
                                 std::size_t fi, double t, double dgn, double dgt,
                                 double du) const {
  const Face& f = grid_.faces()[fi];
  const std::size_t m = static_cast<std::size_t>(f.minus);
  const std::size_t p = static_cast<std::size_t>(f.plus);
  const bool xface = f.nx != 0.0;
  Vec2 G;
  if (xface) {
    G[0] = (u[p] - u[m]) / grid_.hx() + dgn;
    G[1] = 0.5 * (grad[m][1] + grad[p][1]) + dgt;
  } else {
    G[0] = 0.5 * (grad[m][0] + grad[p][0]) + dgt;
    G[1] = (u[p] - u[m]) / grid_.hy() + dgn;
  }
  const double uf = std::max(0.0, 0.5 * (u[m] + u[p]) + du);
  const Vec2 Z = eval_Z(problem_.medium, {f.x, f.y, 0.0}, t);
  const double u2l = lambda_ == 1.0 ? uf * uf : std::pow(uf, 2.0 * lambda_);
  G[0] += u2l * Z[0];
  G[1] += u2l * Z[1];
  const double zeta = face_rstar_[fi] * u_to_w(uf, lambda_);
  const Vec2 v = invert_F(face_law_[fi], zeta, G, config_.inverse_tol);
  return xface ? v[0] : v[1];
}

double Simulation::boundary_outflux(const PseudoPressureState& s, std::size_t fi) const {
  const Face& f = grid_.faces()[fi];
  if (problem_.boundary_flux) return problem_.boundary_flux(f, s.t);
  const auto psi = problem_.forcing.at(f, grid_.rect(), s.t);
  return -(psi[0] + psi[1] * s.w[static_cast<std::size_t>(f.minus)]);
}

double Simulation::face_flux(const PseudoPressureState& s, const std::vector<Vec2>& grad,
                             std::size_t f) const {
  if (grid_.faces()[f].boundary) return boundary_outflux(s, f);
  return interior_flux(s.u, grad, f, s.t, 0.0, 0.0, 0.0);
}

double Simulation::probe_dt(const PseudoPressureState& s) const {
  const auto grad = cell_gradients(s.u, grid_);
  const auto& faces = grid_.faces();
  std::vector<double> rate(grid_.cell_count(), 0.0);
  for (std::size_t fi = 0; fi < faces.size(); ++fi) {
    const Face& f = faces[fi];
    if (f.boundary) {
      if (problem_.boundary_flux) continue;
      const auto psi = problem_.forcing.at(f, grid_.rect(), s.t);
      // d(outflux)/dw is psi2 per unit length, already in w units
      rate[f.minus] += std::abs(psi[1]) * f.length;
      continue;
    }
    const bool xface = f.nx != 0.0;
    const double hn = xface ? grid_.hx() : grid_.hy();
    const double ht = xface ? grid_.hy() : grid_.hx();
    const std::size_t m = f.minus;
    const std::size_t p = f.plus;
    const double gn = (s.u[p] - s.u[m]) / hn;
    const double uf = 0.5 * (s.u[m] + s.u[p]);
    const double dn = 1e-6 * (1.0 + std::abs(gn));
    const double du = 1e-6 * (1.0 + uf);
    const double F0 = interior_flux(s.u, grad, fi, s.t, 0.0, 0.0, 0.0);
    const double Fn = interior_flux(s.u, grad, fi, s.t, dn, 0.0, 0.0);
    const double Ft = interior_flux(s.u, grad, fi, s.t, 0.0, dn, 0.0);
    const double Fu = interior_flux(s.u, grad, fi, s.t, 0.0, 0.0, du);
    const double k = (std::abs(Fn - F0) / dn / hn + std::abs(Ft - F0) / dn / (2.0 * ht) +
                      0.5 * std::abs(Fu - F0) / du) *
                     f.length;
    // converted from u to w units below
    rate[m] += k;
    rate[p] += k;
  }
  double max_rate = 0.0;
  for (std::size_t c = 0; c < rate.size(); ++c) {
    const double dudw =
        lambda_ == 1.0 ? 1.0 : std::pow(std::max(s.w[c], 0.0), 1.0 / lambda_ - 1.0) / lambda_;
    max_rate = std::max(max_rate, rate[c] * dudw / (cell_phi_[c] * grid_.cell_area()));
  }
  if (max_rate == 0.0) return config_.dt;
  return config_.safety / max_rate;
}

PseudoPressureState Simulation::step(const PseudoPressureState& s, double dt,
                                     StepRecord* rec) const {
  const auto grad = cell_gradients(s.u, grid_);
  const auto& faces = grid_.faces();
  std::vector<double> flux(faces.size());
  for (std::size_t fi = 0; fi < faces.size(); ++fi) {
    try {
      flux[fi] = face_flux(s, grad, fi);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("face " + std::to_string(fi) + " at t=" + format_number(s.t) + ": " +
                                 e.what(),
                             e.residual());
    }
  }
  std::vector<double> src;
  if (problem_.source) {
    src.assign(grid_.cell_count(), 0.0);
    problem_.source(s.t, src);
  }
  const double area = grid_.cell_area();
  const double wfloor = eps_reg_ > 0.0 ? u_to_w(eps_reg_, lambda_) : 0.0;

  PseudoPressureState out;
  out.t = s.t + dt;
  out.last_dt = dt;
  out.last_max_rate = s.last_max_rate;
  out.w.resize(s.w.size());
  out.u.resize(s.u.size());
  std::vector<double> injections(s.w.size(), 0.0);
  std::size_t floored = 0;
  for (std::size_t c = 0; c < s.w.size(); ++c) {
    const auto cf = grid_.cell_faces(c);
    double contrib[4];
    for (int k = 0; k < 4; ++k) {
      const Face& f = faces[cf[k]];
      const double v = flux[cf[k]] * f.length;
      contrib[k] = static_cast<std::size_t>(f.minus) == c ? v : -v;
    }
    // x and y pairs summed separately, so mirrored data give mirrored bits.
    double net = (contrib[0] + contrib[1]) + (contrib[2] + contrib[3]);
    if (!src.empty()) net += src[c] * area;
    double w = s.w[c] + dt / (cell_phi_[c] * area) * net;
    if (w < wfloor) {
      injections[c] = cell_phi_[c] * area * (wfloor - w);
      w = wfloor;
      ++floored;
    }
    out.w[c] = w;
    out.u[c] = w_to_u(w, lambda_);
  }
  if (rec) {
    rec->t = s.t;
    rec->dt = dt;
    rec->mass_before = mass(s);
    rec->mass_after = mass(out);
    std::vector<double> bterms;
    bterms.reserve(grid_.boundary_faces().size());
    for (std::size_t fi : grid_.boundary_faces()) bterms.push_back(-flux[fi] * faces[fi].length);
    rec->outflux = pairwise_sum(bterms);
    if (!src.empty()) {
      std::vector<double> st(src.size());
      for (std::size_t c = 0; c < src.size(); ++c) st[c] = src[c] * area;
      rec->source = pairwise_sum(st);
    }
    rec->floor_injection = pairwise_sum(injections);
    rec->floored_cells = floored;
  }
  return out;
}

double Simulation::mass(const PseudoPressureState& s) const {
  std::vector<double> terms(s.w.size());
  for (std::size_t c = 0; c < s.w.size(); ++c) terms[c] = cell_phi_[c] * s.w[c];
  return pairwise_sum(terms) * grid_.cell_area();
}

DiagRow Simulation::diagnostics(const PseudoPressureState& s) const {
  DiagRow d;
  d.t = s.t;
  d.mass = mass(s);
  std::vector<double> bterms;
  for (std::size_t fi : grid_.boundary_faces()) {
    bterms.push_back(-boundary_outflux(s, fi) * grid_.faces()[fi].length);
  }
  d.outflux = pairwise_sum(bterms);
  d.min_u = *std::min_element(s.u.begin(), s.u.end());
  d.max_u = *std::max_element(s.u.begin(), s.u.end());
  if (config_.diag_alphas.empty()) return d;
  const auto grad = cell_gradients(s.u, grid_);
  const double a = problem_.medium.a();
  const double la = std::log(grid_.cell_area());
  for (double alpha : config_.diag_alphas) {
    d.norms.push_back(lp_phi_norm(s.u, alpha, cell_phi_, grid_, true));
    std::vector<double> terms(s.u.size());
    for (std::size_t c = 0; c < s.u.size(); ++c) {
      const double gn = std::hypot(grad[c][0], grad[c][1]);
      if (s.u[c] <= 0.0 || gn == 0.0) {
        terms[c] = kNegInf;
        continue;
      }
      terms[c] = (alpha - lambda_ - 1.0) * std::log(s.u[c]) - 2.0 * lambda_ * std::log1p(s.u[c]) +
                 (2.0 - a) * std::log(gn) + std::log(cell_W1_[c]) + la;
    }
    const double l = log_sum_exp(terms);
    d.grad_energy.push_back(l == kNegInf ? 0.0 : std::exp(l));
  }
  return d;
}

Trajectory Simulation::run() { return run_from(materialize(problem_.u0, grid_, 0.0)); }

Trajectory Simulation::run_from(const std::vector<double>& u0) {
  PseudoPressureState s = state_from(u0, 0.0);
  Trajectory traj;
  traj.diag_alphas = config_.diag_alphas;
  traj.snapshots.push_back({s.t, s.u});
  traj.diag.push_back(diagnostics(s));

  const double t_end = config_.t_end;
  const double dt_floor = 1e-14 * t_end;
  std::size_t snap_index = 1;
  auto next_snap = [&]() {
    if (config_.snapshot_dt <= 0.0) return t_end;
    return std::min(t_end, config_.snapshot_dt * static_cast<double>(snap_index));
  };
  double dt_probe = config_.dt;
  std::size_t k = 0;
  while (t_end - s.t > dt_floor) {
    if (k >= config_.max_steps) {
      throw StiffnessError("step budget exhausted at t=" + format_number(s.t), s.t, s.last_dt);
    }
    if (config_.policy == SolverConfig::DtPolicy::adaptive && k % config_.probe_interval == 0) {
      dt_probe = std::min(probe_dt(s), config_.dt);
      if (dt_probe < dt_floor) {
        throw StiffnessError("adaptive step " + format_number(dt_probe) + " fell below 1e-14 t_end at t=" +
                                 format_number(s.t) + "; an implicit integrator is out of scope",
                             s.t, dt_probe);
      }
    }
    const double target = next_snap();
    double dt = dt_probe;
    bool hit = false;
    // Accumulated rounding in t must not leave a sliver step before the target.
    if (dt >= (target - s.t) * (1.0 - 1e-9)) {
      dt = target - s.t;
      hit = true;
    }
    StepRecord rec;
    s = step(s, dt, &rec);
    if (hit) s.t = target;
    traj.steps.push_back(rec);
    if (rec.floored_cells > 0) {
      traj.floor_events += rec.floored_cells;
      traj.total_floor_injection += rec.floor_injection;
    }
    ++k;
    const bool final_step = t_end - s.t <= dt_floor;
    if (k % config_.diag_every == 0 || final_step) traj.diag.push_back(diagnostics(s));
    if (hit) {
      traj.snapshots.push_back({s.t, s.u});
      ++snap_index;
    }
  }
  if (traj.snapshots.back().t != s.t) traj.snapshots.push_back({s.t, s.u});
  return traj;
}

MassBalance mass_balance_residual(const Trajectory& traj) {
  MassBalance mb;
  for (const StepRecord& r : traj.steps) {
    const double lhs = (r.mass_after - r.mass_before) / r.dt;
    const double res = lhs + r.outflux - r.source - r.floor_injection / r.dt;
    const double scale = r.mass_before / r.dt + std::abs(r.outflux) + std::abs(r.source);
    const double v = scale > 0.0 ? res / scale : res;
    mb.residual.push_back(v);
    mb.max_abs = std::max(mb.max_abs, std::abs(v));
    mb.total_floor_injection += r.floor_injection;
  }
  return mb;
}

ManufacturedSolution::ManufacturedSolution(const Medium& medium, FieldExpr exact)
    : medium_(medium), exact_(std::move(exact)) {
  ux_ = exact_.derivative(Variable::x);
  uy_ = exact_.derivative(Variable::y);
  ut_ = exact_.derivative(Variable::t);
  fd_h_ = 1e-3 * std::min(medium_.domain.rect.lx, medium_.domain.rect.ly);
}

double ManufacturedSolution::u(double x, double y, double t) const {
  return exact_.eval(context_at(medium_.domain.rect, x, y, t));
}

Vec2 ManufacturedSolution::flux(double x, double y, double t) const {
  const EvalContext ctx = context_at(medium_.domain.rect, x, y, t);
  const double uv = exact_.eval(ctx);
  const double lam = medium_.lambda();
  const Point p{x, y, 0.0};
  const Vec2 Z = eval_Z(medium_, p, t);
  const double u2l = std::pow(uv, 2.0 * lam);
  const Vec2 G{ux_.eval(ctx) + u2l * Z[0], uy_.eval(ctx) + u2l * Z[1]};
  const double zeta = medium_.R_star(p) * std::pow(uv, lam);
  return invert_F(medium_.law_at(p), zeta, G);
}

double ManufacturedSolution::source(double x, double y, double t) const {
  const EvalContext ctx = context_at(medium_.domain.rect, x, y, t);
  const double lam = medium_.lambda();
  const double uv = exact_.eval(ctx);
  const double time_term =
      medium_.phi({x, y, 0.0}) * lam * std::pow(uv, lam - 1.0) * ut_.eval(ctx);
  const double h = fd_h_;
  auto d4 = [h](double fm2, double fm1, double fp1, double fp2) {
    return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
  };
  const double dX = d4(flux(x - 2 * h, y, t)[0], flux(x - h, y, t)[0], flux(x + h, y, t)[0],
                       flux(x + 2 * h, y, t)[0]);
  const double dY = d4(flux(x, y - 2 * h, t)[1], flux(x, y - h, t)[1], flux(x, y + h, t)[1],
                       flux(x, y + 2 * h, t)[1]);
  return time_term - (dX + dY);
}

void ManufacturedSolution::check_positive(const Grid& grid, double t_end) const {
  for (int k = 0; k <= 8; ++k) {
    const double t = t_end * k / 8.0;
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      const Point p = grid.center(c);
      if (!(u(p[0], p[1], t) > 0.0)) {
        throw InvalidInput("manufactured solution is not positive in cell " + std::to_string(c) +
                           " at t=" + format_number(t));
      }
    }
  }
}

Problem ManufacturedSolution::make_problem(const Problem& base, const Grid& grid, double t_end,
                                           int time_nodes) const {
  check_positive(grid, t_end);
  if (time_nodes < 4) throw InvalidInput("source table needs at least four time nodes");
  Problem p = base;
  p.u0 = exact_;
  auto table = std::make_shared<std::vector<std::vector<double>>>(time_nodes);
  for (int k = 0; k < time_nodes; ++k) {
    const double t = t_end * k / (time_nodes - 1);
    auto& row = (*table)[k];
    row.resize(grid.cell_count());
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      const Point q = grid.center(c);
      row[c] = source(q[0], q[1], t);
    }
  }
  const double dtn = t_end / (time_nodes - 1);
  p.source = [table, dtn, time_nodes](double t, std::vector<double>& out) {
    const int k = std::clamp(static_cast<int>(std::floor(t / dtn)) - 1, 0, time_nodes - 4);
    double tk[4];
    for (int i = 0; i < 4; ++i) tk[i] = (k + i) * dtn;
    double wgt[4];
    for (int i = 0; i < 4; ++i) {
      double l = 1.0;
      for (int j = 0; j < 4; ++j) {
        if (j != i) l *= (t - tk[j]) / (tk[i] - tk[j]);
      }
      wgt[i] = l;
    }
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[c] = wgt[0] * (*table)[k][c] + wgt[1] * (*table)[k + 1][c] +
               wgt[2] * (*table)[k + 2][c] + wgt[3] * (*table)[k + 3][c];
    }
  };
  const ManufacturedSolution self = *this;
  p.boundary_flux = [self](const Face& f, double t) {
    const Vec2 v = self.flux(f.x, f.y, t);
    return v[0] * f.nx + v[1] * f.ny;
  };
  return p;
}

namespace {

double l2_phi_diff(const std::vector<double>& a, const std::vector<double>& b,
                   const std::vector<double>& phi, const Grid& grid) {
  std::vector<double> d(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) d[c] = a[c] - b[c];
  return lp_phi_norm(d, 2.0, phi, grid);
}

}  // namespace

MmsResult mms_study(const Problem& base, const FieldExpr& exact, const MmsOptions& opt) {
  if (opt.grids.size() < 2) throw InvalidInput("MMS study needs at least two grids");
  const ManufacturedSolution ms(base.medium, exact);
  const Rect rect = base.medium.domain.rect;
  MmsResult res;
  for (int n : opt.grids) {
    const Grid grid(rect, n, n, BoundaryPartition::uniform(rect, BoundaryTag::gamma1));
    SolverConfig cfg = opt.solver;
    cfg.t_end = opt.t_end;
    cfg.snapshot_dt = 0.0;
    cfg.diag_alphas.clear();
    cfg.diag_every = 1000000;
    Simulation sim(ms.make_problem(base, grid, opt.t_end), grid, cfg);
    const Trajectory traj = sim.run();
    const auto& u = traj.snapshots.back().u;
    std::vector<double> ex(u.size());
    double emax = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
      const Point p = grid.center(c);
      ex[c] = ms.u(p[0], p[1], opt.t_end);
      emax = std::max(emax, std::abs(u[c] - ex[c]));
    }
    MmsRow row;
    row.n = n;
    row.h = rect.lx / n;
    row.error_l2 = l2_phi_diff(u, ex, sim.cell_phi(), grid);
    row.error_max = emax;
    row.steps = traj.steps.size();
    if (!res.spatial.empty()) {
      const MmsRow& prev = res.spatial.back();
      row.order = std::log(prev.error_l2 / row.error_l2) / std::log(prev.h / row.h);
    }
    res.spatial.push_back(row);
  }
  const MmsRow& first = res.spatial.front();
  const MmsRow& last = res.spatial.back();
  res.spatial_order = std::log(first.error_l2 / last.error_l2) / std::log(first.h / last.h);

  // Temporal order by dt halving at a fixed grid.
  const int n = opt.temporal_grid;
  const Grid grid(rect, n, n, BoundaryPartition::uniform(rect, BoundaryTag::gamma1));
  const Problem prob = ms.make_problem(base, grid, opt.temporal_t_end);
  SolverConfig cfg = opt.solver;
  cfg.t_end = opt.temporal_t_end;
  cfg.snapshot_dt = 0.0;
  cfg.diag_alphas.clear();
  cfg.diag_every = 1000000;
  cfg.policy = SolverConfig::DtPolicy::fixed;
  Simulation probe_sim(prob, grid, cfg);
  const double dt_stable = probe_sim.probe_dt(probe_sim.initial_state());
  const double steps0 = std::ceil(opt.temporal_t_end / dt_stable);
  std::vector<std::vector<double>> finals;
  for (int k = 0; k < 3; ++k) {
    cfg.dt = opt.temporal_t_end / (steps0 * std::pow(2.0, k));
    res.temporal_dt.push_back(cfg.dt);
    Simulation sim(prob, grid, cfg);
    finals.push_back(sim.run().snapshots.back().u);
  }
  res.temporal_diff.push_back(l2_phi_diff(finals[0], finals[1], probe_sim.cell_phi(), grid));
  res.temporal_diff.push_back(l2_phi_diff(finals[1], finals[2], probe_sim.cell_phi(), grid));
  res.temporal_order = std::log2(res.temporal_diff[0] / res.temporal_diff[1]);
  return res;
}

void write_trajectory_csv(const std::string& dir, const Trajectory& traj, const Grid& grid,
                          bool with_steps) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream os(fs::path(dir) / name, std::ios::binary);
    if (!os) throw InvalidInput("cannot write " + (fs::path(dir) / name).string());
    return os;
  };
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const Snapshot& s = traj.snapshots[k];
    auto os = open("snap_" + std::to_string(k) + ".csv");
    os << "t,i,j,x,y,u\n";
    const std::string ts = format_number(s.t);
    for (int j = 0; j < grid.ny(); ++j) {
      for (int i = 0; i < grid.nx(); ++i) {
        os << ts << ',' << i << ',' << j << ',' << format_number(grid.xc(i)) << ','
           << format_number(grid.yc(j)) << ',' << format_number(s.u[grid.index(i, j)]) << '\n';
      }
    }
  }
  {
    auto os = open("diag.csv");
    os << "t,mass,outflux,min_u,max_u";
    for (double a : traj.diag_alphas) os << ",norm_" << format_number(a);
    for (double a : traj.diag_alphas) os << ",grad_energy_" << format_number(a);
    os << '\n';
    for (const DiagRow& d : traj.diag) {
      os << format_number(d.t) << ',' << format_number(d.mass) << ',' << format_number(d.outflux)
         << ',' << format_number(d.min_u) << ',' << format_number(d.max_u);
      for (double v : d.norms) os << ',' << format_number(v);
      for (double v : d.grad_energy) os << ',' << format_number(v);
      os << '\n';
    }
  }
  if (with_steps) {
    auto os = open("steps.csv");
    os << "t,dt,mass_before,mass_after,outflux,source,floor_injection,floored_cells\n";
    for (const StepRecord& r : traj.steps) {
      os << format_number(r.t) << ',' << format_number(r.dt) << ',' << format_number(r.mass_before)
         << ',' << format_number(r.mass_after) << ',' << format_number(r.outflux) << ','
         << format_number(r.source) << ',' << format_number(r.floor_injection) << ','
         << r.floored_cells << '\n';
    }
  }
}

}  // namespace rotforch
