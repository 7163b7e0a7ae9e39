#include "rotforch/app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "rotforch/certification.hpp"
#include "rotforch/errors.hpp"
#include "rotforch/functionals.hpp"
#include "rotforch/inequality_harness.hpp"
#include "rotforch/moser.hpp"

namespace rotforch {

using nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) { return format_number(v); }

ordered_json header(const RunConfig& cfg, const std::string& command) {
  ordered_json r;
  r["schema"] = kReportSchema;
  r["tool"] = "rotforch";
  r["version"] = kVersion;
  r["command"] = command;
  r["config"] = cfg.to_json();
  return r;
}

// inf and nan become strings so the report stays valid and lossless.
ordered_json jnum(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

ordered_json jvec(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

struct Check {
  std::string name;
  double value;
  double threshold;
  std::string relation;  // "<=", ">=", ">", "=="
  bool assertable;
};

bool passes(const Check& c) {
  if (c.relation == "<=") return c.value <= c.threshold;
  if (c.relation == ">=") return c.value >= c.threshold;
  if (c.relation == ">") return c.value > c.threshold;
  return c.value == c.threshold;
}

ordered_json to_json(const Check& c) {
  ordered_json j;
  j["name"] = c.name;
  j["value"] = jnum(c.value);
  j["relation"] = c.relation;
  j["threshold"] = jnum(c.threshold);
  j["pass"] = passes(c);
  j["assertable"] = c.assertable;
  return j;
}

CommandResult finish(ordered_json report, const std::vector<Check>& checks) {
  ordered_json arr = ordered_json::array();
  bool ok = true;
  for (const Check& c : checks) {
    arr.push_back(to_json(c));
    if (c.assertable && !passes(c)) ok = false;
  }
  report["checks"] = arr;
  report["status"] = ok ? "pass" : "fail";
  return {ok ? kExitOk : kExitFailed, std::move(report)};
}

CommandResult error_result(ordered_json report, int code, const std::string& kind,
                           const std::string& message, ordered_json extra = ordered_json::object()) {
  report["status"] = "error";
  ordered_json e;
  e["kind"] = kind;
  e["message"] = message;
  for (auto& [k, v] : extra.items()) e[k] = v;
  report["error"] = e;
  return {code, std::move(report)};
}

template <class F>
CommandResult guarded(const RunConfig& cfg, const std::string& command, const std::string& out_dir,
                      F body) {
  ordered_json rep = header(cfg, command);
  CommandResult res;
  try {
    res = body(rep);
  } catch (const ConfigError& e) {
    res = error_result(rep, kExitConfig, "config", e.what(), {{"key", e.key()}});
  } catch (const InvalidExponent& e) {
    res = error_result(rep, kExitPrecondition, "invalid_exponent", e.what(),
                       {{"inequality", e.inequality()}});
  } catch (const DivergentFunctional& e) {
    res = error_result(rep, kExitPrecondition, "divergent_functional", e.what(),
                       {{"functional", e.name()}});
  } catch (const SmallnessViolation& e) {
    res = error_result(rep, kExitPrecondition, "smallness", e.what(),
                       {{"largest_admissible_T", jnum(e.critical_time())}});
  } catch (const StiffnessError& e) {
    res = error_result(rep, kExitSolver, "stiffness", e.what(),
                       {{"t", jnum(e.time())}, {"dt", jnum(e.dt())}});
  } catch (const ConvergenceError& e) {
    res = error_result(rep, kExitSolver, "convergence", e.what(),
                       {{"residual", jnum(e.residual())}});
  } catch (const Error& e) {
    res = error_result(rep, kExitConfig, "input", e.what());
  }
  if (!out_dir.empty()) write_report(out_dir, res.report);
  return res;
}

BoundaryPartition parse_segments(const std::string& text, const Rect& rect) {
  if (text.empty()) return BoundaryPartition::uniform(rect, BoundaryTag::gamma1);
  std::vector<BoundarySegment> segs;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    std::stringstream in(item);
    std::string side, s0, s1, tag;
    if (!std::getline(in, side, ':') || !std::getline(in, s0, ':') ||
        !std::getline(in, s1, ':') || !std::getline(in, tag)) {
      throw ConfigError("domain.segments", "expected side:s0:s1:tag, got '" + item + "'");
    }
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    try {
      segs.push_back({side_from_string(trim(side)), std::stod(s0), std::stod(s1),
                      tag_from_string(trim(tag))});
    } catch (const std::logic_error&) {
      throw ConfigError("domain.segments", "bad number in '" + item + "'");
    } catch (const InvalidInput& e) {
      throw ConfigError("domain.segments", e.what());
    }
  }
  BoundaryPartition p(segs);
  try {
    p.validate(rect);
  } catch (const InvalidInput& e) {
    throw ConfigError("domain.segments", e.what());
  }
  return p;
}

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

}  // namespace

// ------------------------------------------------------------------ builders

Medium build_medium(const RunConfig& cfg) {
  Medium m;
  std::vector<FieldExpr> coeffs;
  for (const std::string& t : cfg.coeffs) coeffs.push_back(FieldExpr::parse(t));
  m.law = ForchheimerLaw(cfg.degrees, coeffs);
  m.eos = cfg.eos_kind == "isentropic" ? FluidEOS::isentropic(cfg.eos_c, cfg.eos_gamma)
                                       : FluidEOS::slightly_compressible(cfg.varpi);
  m.eos.validate();
  m.rotation.omega_tilde = cfg.omega;
  m.rotation.gravity_tilde = cfg.gravity;
  m.rotation.gravity_angle = cfg.gravity_angle;
  m.rotation.gravity_rate = cfg.gravity_rate;
  m.rotation.validate();
  m.domain.rect = {cfg.lx, cfg.ly};
  m.domain.porosity = FieldExpr::parse(cfg.porosity);
  return m;
}

Grid build_grid(const RunConfig& cfg, int nx, int ny) {
  const Rect rect{cfg.lx, cfg.ly};
  return Grid(rect, nx, ny, parse_segments(cfg.segments, rect));
}

BoundaryForcing build_forcing(const RunConfig& cfg) {
  return {FieldExpr::parse(cfg.psi1), FieldExpr::parse(cfg.psi2)};
}

Problem build_problem(const RunConfig& cfg) {
  Problem p;
  p.medium = build_medium(cfg);
  p.forcing = build_forcing(cfg);
  p.u0 = FieldExpr::parse(cfg.u0);
  return p;
}

SolverConfig build_solver_config(const RunConfig& cfg) {
  SolverConfig s;
  s.policy = cfg.policy == "fixed" ? SolverConfig::DtPolicy::fixed : SolverConfig::DtPolicy::adaptive;
  s.dt = cfg.dt;
  s.safety = cfg.safety;
  s.probe_interval = cfg.probe_interval;
  s.eps_reg = cfg.eps_reg;
  s.t_end = cfg.t_end;
  s.snapshot_dt = cfg.snapshot_dt;
  s.max_steps = cfg.max_steps;
  s.diag_alphas = cfg.diag_alphas;
  s.diag_every = cfg.diag_every;
  try {
    s.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError("solver", e.what());
  }
  return s;
}

ExponentInputs build_exponent_inputs(const RunConfig& cfg, const Medium& medium) {
  ExponentInputs in;
  in.n = 2;
  in.a = medium.a();
  in.lambda = medium.lambda();
  in.r1 = cfg.r1;
  in.r = cfg.r;
  in.kappa_tilde = cfg.kappa_tilde;
  for (int i = 0; i < 5; ++i) in.p[i] = cfg.p[i];
  in.alpha = cfg.alpha > 0.0 ? cfg.alpha : default_alpha(in).beta1;
  return in;
}

void write_report(const std::string& out_dir, const ordered_json& report) {
  ensure_dir(out_dir);
  std::ofstream f(std::filesystem::path(out_dir) / "report.json", std::ios::binary);
  f << report.dump(2) << '\n';
}

// ------------------------------------------------------------------ simulate

CommandResult run_simulate(const RunConfig& cfg, const std::string& out_dir) {
  return guarded(cfg, "simulate", out_dir, [&](ordered_json& rep) {
    const Problem pb = build_problem(cfg);
    const Grid grid = build_grid(cfg, cfg.nx, cfg.ny);
    pb.medium.domain.validate(grid);
    Simulation sim(pb, grid, build_solver_config(cfg));
    const Trajectory tr = sim.run();
    const MassBalance mb = mass_balance_residual(tr);

    ordered_json r;
    r["steps"] = tr.steps.size();
    r["t_final"] = jnum(tr.diag.empty() ? 0.0 : tr.diag.back().t);
    const double m0 = tr.diag.empty() ? 0.0 : tr.diag.front().mass;
    const double m1 = tr.diag.empty() ? 0.0 : tr.diag.back().mass;
    r["mass_initial"] = jnum(m0);
    r["mass_final"] = jnum(m1);
    r["mass_drift_relative"] = jnum(m0 > 0.0 ? (m1 - m0) / m0 : 0.0);
    r["mass_balance_max_residual"] = jnum(mb.max_abs);
    r["floor_events"] = tr.floor_events;
    r["floor_injection_total"] = jnum(tr.total_floor_injection);
    r["min_u"] = jnum(tr.diag.empty() ? 0.0 : tr.diag.back().min_u);
    r["max_u"] = jnum(tr.diag.empty() ? 0.0 : tr.diag.back().max_u);
    r["snapshots"] = tr.snapshots.size();
    rep["results"] = r;
    if (!out_dir.empty()) {
      ensure_dir(out_dir);
      write_trajectory_csv(out_dir, tr, grid, true);
    }
    std::vector<Check> checks{
        {"mass balance residual", mb.max_abs, 1e-8, "<=", true},
    };
    return finish(rep, checks);
  });
}

// -------------------------------------------------------------------- verify

namespace {

SobolevExponents random_sobolev_tuple(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto U = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  for (;;) {
    const int n = u(rng) < 0.5 ? 2 : 3;
    const double p = U(1.05, n - 0.05);
    const double lo = std::max(static_cast<double>(n) / (n + p), 1.0 / p);
    const double hi = std::min(1.0, n / p);
    if (!(lo < hi)) continue;
    const double r1 = U(lo, hi);
    if (!(r1 > lo && r1 < hi)) continue;
    const double s = U(0.5, 3.0);
    const double beta = U(0.1, 3.0);
    const double r = U(0.0, 3.0);
    const double rs = 1.0 + p / n - 1.0 / r1;
    const double rt = (r * p + s - p) / (p - 1.0);
    const double amin = std::max({s, (p - s) / (p - 1.0), 2.0 * (r + s - p) / rs,
                                  2.0 * (rt + s - p) / rs, 0.0});
    try {
      return compute_sobolev_exponents(n, p, s, beta, r1, r, amin + U(0.1, 50.0));
    } catch (const InvalidExponent&) {
      continue;
    }
  }
}

HarnessParams harness_params(const RunConfig&) { return HarnessParams{}; }

ordered_json constants_json(const EmpiricalConstants& c) {
  ordered_json j;
  j["c3"] = jnum(c.c3);
  j["c4"] = jnum(c.c4);
  j["c5"] = jnum(c.c5);
  j["c6"] = jnum(c.c6);
  j["c7"] = jnum(c.c7);
  j["safety"] = jnum(c.safety);
  j["provenance"] = c.provenance;
  j["corpus_hash"] = c.corpus_hash;
  j["corpus_size"] = c.corpus_size;
  j["corpus_seed"] = c.corpus_seed;
  return j;
}

EmpiricalConstants constants_from_json(const nlohmann::json& j) {
  EmpiricalConstants c;
  c.c3 = j.at("c3").get<double>();
  c.c4 = j.at("c4").get<double>();
  c.c5 = j.at("c5").get<double>();
  c.c6 = j.at("c6").get<double>();
  c.c7 = j.at("c7").get<double>();
  c.safety = j.at("safety").get<double>();
  c.provenance = j.at("provenance").get<std::string>();
  c.corpus_hash = j.at("corpus_hash").get<std::string>();
  c.corpus_size = j.at("corpus_size").get<std::size_t>();
  c.corpus_seed = j.at("corpus_seed").get<std::uint64_t>();
  return c;
}

}  // namespace

CommandResult run_verify(const RunConfig& cfg, const std::string& suite,
                         const std::string& out_dir) {
  return guarded(cfg, "verify", out_dir, [&](ordered_json& rep) -> CommandResult {
    rep["suite"] = suite;
    std::vector<Check> checks;
    ordered_json r;

    if (suite == "constitutive") {
      std::mt19937_64 rng(cfg.seed);
      const int laws = std::max(1, cfg.verify_laws);
      XBoundOptions opt;
      opt.samples = std::max<std::uint64_t>(1, cfg.verify_samples / laws);
      std::size_t samples = 0, upper = 0, lower = 0;
      double worst_upper = 0.0, worst_lower = kInf, residual = 0.0;
      ordered_json per = ordered_json::array();
      for (int k = 0; k < laws; ++k) {
        const Medium m = random_medium(rng);
        opt.seed = cfg.seed * 1000003ULL + static_cast<std::uint64_t>(k);
        const XBoundReport x = verify_X_bounds(m, opt);
        samples += x.samples;
        upper += x.upper_violations;
        lower += x.lower_violations;
        worst_upper = std::max(worst_upper, x.worst_upper_ratio);
        worst_lower = std::min(worst_lower, x.worst_lower_margin);
        residual = std::max(residual, x.max_inverse_residual);
        per.push_back({{"law", k},
                       {"a", jnum(m.a())},
                       {"lambda", jnum(m.lambda())},
                       {"upper_violations", x.upper_violations},
                       {"lower_violations", x.lower_violations},
                       {"max_inverse_residual", jnum(x.max_inverse_residual)}});
      }
      r["laws"] = per;
      r["samples"] = samples;
      r["worst_upper_ratio"] = jnum(worst_upper);
      r["worst_lower_margin"] = jnum(worst_lower);
      checks.push_back({"inverse residual", residual, 1e-10, "<=", true});
      checks.push_back({"upper bound violations", static_cast<double>(upper), 0.0, "==", true});
      checks.push_back({"lower bound violations", static_cast<double>(lower), 0.0, "==", true});
    } else if (suite == "elementary") {
      ordered_json arr = ordered_json::array();
      for (const ElementaryReport& e : fuzz_elementary(cfg.elementary_samples, cfg.seed)) {
        arr.push_back({{"inequality", e.name},
                       {"samples", e.samples},
                       {"violations", e.violations},
                       {"worst_margin", jnum(e.worst_margin)}});
        checks.push_back({e.name + " violations", static_cast<double>(e.violations), 0.0, "==", true});
      }
      r["inequalities"] = arr;
    } else if (suite == "exponents") {
      std::mt19937_64 rng(cfg.seed);
      std::map<std::string, double> worst;
      std::vector<std::string> order;
      for (int k = 0; k < cfg.exponent_tuples; ++k) {
        const SobolevExponents e = random_sobolev_tuple(rng);
        for (const IdentityCheck& c : check_identities(e)) {
          if (!worst.count(c.name)) order.push_back(c.name);
          worst[c.name] = std::max(worst[c.name], c.rel_error);
        }
      }
      r["tuples"] = cfg.exponent_tuples;
      for (const std::string& name : order) {
        checks.push_back({name + " (max relative error)", worst[name], 1e-12, "<=", true});
      }
    } else if (suite == "calibrate") {
      const FunctionCorpus corpus = generate_corpus(cfg.corpus_size, cfg.seed);
      const EmpiricalConstants c = estimate_constants(corpus, harness_params(cfg));
      r["constants"] = constants_json(c);
      if (!out_dir.empty()) {
        ensure_dir(out_dir);
        std::ofstream f(std::filesystem::path(out_dir) / "calibration.json", std::ios::binary);
        f << constants_json(c).dump(2) << '\n';
      }
    } else if (suite == "composites") {
      std::string path = cfg.calibration;
      if (path.empty() && !out_dir.empty()) {
        path = (std::filesystem::path(out_dir) / "calibration.json").string();
      }
      if (path.empty() || !std::filesystem::exists(path)) {
        throw ConfigError("verify.calibration",
                          "no calibration artifact found; run 'verify --suite calibrate' first");
      }
      std::ifstream f(path);
      EmpiricalConstants c;
      try {
        c = constants_from_json(nlohmann::json::parse(f));
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("verify.calibration", std::string("unreadable artifact: ") + e.what());
      }
      std::uint64_t seed = cfg.seed + 1;
      if (seed == c.corpus_seed) ++seed;
      const FunctionCorpus corpus = generate_corpus(cfg.corpus_size, seed);
      r["constants"] = constants_json(c);
      r["assertion_corpus"] = {{"seed", seed}, {"size", corpus.members.size()},
                               {"hash", corpus.hash()}};
      ordered_json arr = ordered_json::array();
      for (const LemmaReport& L : verify_composites(corpus, c, harness_params(cfg))) {
        arr.push_back({{"lemma", L.lemma},
                       {"checked", L.checked},
                       {"violations", L.violations},
                       {"min_log_margin", jnum(L.min_log_margin)},
                       {"skipped", L.skipped},
                       {"skip_reason", L.skip_reason},
                       {"eps_sanity_failures", L.eps_sanity_failures}});
        checks.push_back({L.lemma + " violations", static_cast<double>(L.violations), 0.0, "==", true});
        checks.push_back({L.lemma + " eps sanity failures",
                          static_cast<double>(L.eps_sanity_failures), 0.0, "==", true});
      }
      r["lemmas"] = arr;
    } else {
      throw ConfigError("--suite", "unknown suite '" + suite +
                                       "' (constitutive, elementary, exponents, calibrate, composites)");
    }
    rep["results"] = r;
    return finish(rep, checks);
  });
}

// ----------------------------------------------------------------------- mms

CommandResult run_mms(const RunConfig& cfg, const std::string& out_dir) {
  return guarded(cfg, "mms", out_dir, [&](ordered_json& rep) {
    if (cfg.mms_exact.empty()) throw ConfigError("mms.exact", "required for the mms command");
    const Problem base = build_problem(cfg);
    MmsOptions opt;
    opt.grids = cfg.mms_grids;
    opt.t_end = cfg.mms_t_end;
    opt.temporal_grid = cfg.mms_temporal_grid;
    opt.temporal_t_end = cfg.mms_temporal_t_end;
    opt.solver = build_solver_config(cfg);
    const MmsResult res = mms_study(base, FieldExpr::parse(cfg.mms_exact), opt);

    ordered_json rows = ordered_json::array();
    for (const MmsRow& row : res.spatial) {
      rows.push_back({{"n", row.n},
                      {"h", jnum(row.h)},
                      {"error_l2", jnum(row.error_l2)},
                      {"error_max", jnum(row.error_max)},
                      {"order", jnum(row.order)},
                      {"steps", row.steps}});
    }
    ordered_json r;
    r["spatial"] = rows;
    r["spatial_order"] = jnum(res.spatial_order);
    r["temporal_dt"] = jvec(res.temporal_dt);
    r["temporal_diff"] = jvec(res.temporal_diff);
    r["temporal_order"] = jnum(res.temporal_order);
    rep["results"] = r;
    if (!out_dir.empty()) {
      ensure_dir(out_dir);
      std::ofstream f(std::filesystem::path(out_dir) / "mms.csv", std::ios::binary);
      f << "n,h,error_l2,error_max,order,steps\n";
      for (const MmsRow& row : res.spatial) {
        f << row.n << ',' << num(row.h) << ',' << num(row.error_l2) << ',' << num(row.error_max)
          << ',' << num(row.order) << ',' << row.steps << '\n';
      }
    }
    std::vector<Check> checks{
        {"spatial order", res.spatial_order, 1.8, ">=", true},
        {"temporal order", res.temporal_order, 0.9, ">=", true},
    };
    return finish(rep, checks);
  });
}

// ------------------------------------------------------------------- certify

namespace {

struct CertRun {
  std::string label;
  double omega = 0.0;
  double amplitude = 1.0;
  int nx = 0;
  Medium medium;
  BoundaryForcing forcing;
  Grid grid;
  std::vector<double> u0;
  std::vector<double> phi;
  Trajectory traj;
};

CertRun certification_run(const RunConfig& cfg, double omega, double amplitude, int nx,
                          double alpha, double snapshot_dt) {
  RunConfig c = cfg;
  c.omega = omega;
  c.u0 = "(" + num(amplitude) + ")*(" + cfg.u0 + ")";
  const int ny = std::max(2, static_cast<int>(std::lround(nx * cfg.ly / cfg.lx)));
  Problem pb = build_problem(c);
  CertRun run{"",        omega, amplitude, nx, pb.medium, pb.forcing, build_grid(c, nx, ny),
              {},        {},    {}};
  run.label = "omega" + num(omega) + "_amp" + num(amplitude) + "_n" + std::to_string(nx);
  pb.medium.domain.validate(run.grid);
  SolverConfig sc = build_solver_config(c);
  sc.t_end = cfg.T;
  sc.diag_alphas = {alpha};
  sc.snapshot_dt = snapshot_dt;
  Simulation sim(pb, run.grid, sc);
  run.u0 = materialize(pb.u0, run.grid, 0.0);
  run.phi = sim.cell_phi();
  run.traj = sim.run();
  return run;
}

// At most `count` diagnostic times, evenly spread by index, always with
// the first and last.
std::vector<double> pick_times(const Trajectory& tr, std::size_t count) {
  std::vector<double> t;
  const std::size_t n = tr.diag.size();
  if (n == 0) return t;
  const std::size_t stride = std::max<std::size_t>(1, (n + count - 1) / count);
  for (std::size_t i = 0; i < n; i += stride) t.push_back(tr.diag[i].t);
  if (t.back() != tr.diag.back().t) t.push_back(tr.diag.back().t);
  return t;
}

void write_fit_csv(const std::string& dir, const std::string& label, const CbarFit& fit) {
  std::ofstream f(std::filesystem::path(dir) / ("cbar_" + label + ".csv"), std::ios::binary);
  f << "t,J,dJdt,grad_energy,M,lhs,rhs_shape\n";
  for (std::size_t i = 0; i < fit.t.size(); ++i) {
    f << num(fit.t[i]) << ',' << num(fit.J[i]) << ',' << num(fit.dJdt[i]) << ','
      << num(fit.grad_energy[i]) << ',' << num(fit.M[i]) << ',' << num(fit.lhs[i]) << ','
      << num(fit.rhs_shape[i]) << '\n';
  }
}

void write_envelope_csv(const std::string& dir, const std::string& label, const NormEnvelope& env,
                        const Trajectory& tr, std::size_t k) {
  std::ofstream f(std::filesystem::path(dir) / ("envelope_" + label + ".csv"), std::ios::binary);
  f << "t,norm,bound,delta,int_M\n";
  for (std::size_t i = 0; i < env.t.size(); ++i) {
    double norm = 0.0;
    for (const DiagRow& d : tr.diag) {
      if (d.t == env.t[i]) norm = d.norms[k];
    }
    f << num(env.t[i]) << ',' << num(norm) << ',' << num(env.bound[i]) << ','
      << num(env.delta[i]) << ',' << num(env.int_M[i]) << '\n';
  }
}

}  // namespace

CommandResult run_certify(const RunConfig& cfg, const std::string& out_dir) {
  return guarded(cfg, "certify", out_dir, [&](ordered_json& rep) {
    if (cfg.omegas.empty() || cfg.calibration_amplitudes.empty() ||
        cfg.assertion_amplitudes.empty()) {
      throw ConfigError("estimates", "omegas and both amplitude lists must be nonempty");
    }
    const Medium base_medium = build_medium(cfg);
    const ExponentInputs in = build_exponent_inputs(cfg, base_medium);
    const ExponentBundle b = compute_exponents(in);
    require_alpha_above_star(b);
    const double alpha = b.alpha;
    const double alpha0 = alpha / b.kappa_tilde;
    const MoserSchedule ms = moser_schedule(b, alpha0, cfg.sigma, cfg.T);

    const WeightQuadrature quad(base_medium, cfg.nx, cfg.ny);
    const KFunctionals K = compute_K_all(b, quad);
    if (K.first_divergent() >= 0) {
      throw DivergentFunctional("K" + std::to_string(K.first_divergent()),
                                "weight integral grows under refinement; certification aborted");
    }

    ordered_json r;
    ordered_json ex;
    ex["a"] = jnum(b.a);
    ex["lambda"] = jnum(b.lambda);
    ex["r_star"] = jnum(b.r_star);
    ex["alpha"] = jnum(alpha);
    ex["alpha0"] = jnum(alpha0);
    ex["alpha_star"] = jnum(b.alpha_star);
    ex["alpha_star_terms"] = jvec({b.alpha_star_terms.begin(), b.alpha_star_terms.end()});
    ex["mu_star"] = jnum(b.mu_star);
    ex["gamma_star"] = jnum(b.gamma_star);
    ex["gamma_moser"] = jnum(b.gamma_moser);
    ex["mu_bar"] = jnum(b.mu_bar);
    ex["alpha0_min"] = jnum(b.alpha0_min);
    r["exponents"] = ex;
    ordered_json kj;
    kj["K"] = jvec({K.K.begin(), K.K.end()});
    kj["N"] = jvec({K.N1, K.N2, K.N3});
    kj["E"] = jvec({K.E1, K.E2, K.E3});
    r["K_functionals"] = kj;

    std::vector<Check> checks;
    if (!out_dir.empty()) ensure_dir(out_dir);

    // Calibration and assertion runs on the working grid.
    const double cal_amp =
        *std::max_element(cfg.calibration_amplitudes.begin(), cfg.calibration_amplitudes.end());
    std::vector<double> cbar_by_omega;
    ordered_json cal = ordered_json::array();
    std::vector<CertRun> assertion_runs;
    std::vector<CbarFit> assertion_fits;
    CbarFit coarse_reference;
    for (std::size_t oi = 0; oi < cfg.omegas.size(); ++oi) {
      const double om = cfg.omegas[oi];
      double cb = 0.0;
      for (double A : cfg.calibration_amplitudes) {
        CertRun run = certification_run(cfg, om, A, cfg.nx, alpha, 0.0);
        const CbarFit fit = fit_Cbar(run.traj, b, K, run.medium, run.grid, run.forcing);
        cb = std::max(cb, fit.Cbar);
        cal.push_back({{"label", run.label},
                       {"omega", jnum(om)},
                       {"amplitude", jnum(A)},
                       {"Cbar", jnum(fit.Cbar)},
                       {"argmax_t", jnum(fit.t[fit.argmax])},
                       {"steps", run.traj.steps.size()}});
        if (!out_dir.empty()) write_fit_csv(out_dir, run.label, fit);
        if (oi == 0 && A == cal_amp) coarse_reference = fit;
      }
      cbar_by_omega.push_back(cb);
      for (double A : cfg.assertion_amplitudes) {
        CertRun run = certification_run(cfg, om, A, cfg.nx, alpha, 0.0);
        assertion_fits.push_back(fit_Cbar(run.traj, b, K, run.medium, run.grid, run.forcing));
        assertion_runs.push_back(std::move(run));
      }
    }
    const double Cbar = *std::max_element(cbar_by_omega.begin(), cbar_by_omega.end());
    const double cmin = *std::min_element(cbar_by_omega.begin(), cbar_by_omega.end());

    // Same calibration run on the refined grid.
    CertRun fine = certification_run(cfg, cfg.omegas[0], cal_amp, cfg.fine_nx, alpha, 0.0);
    const CbarFit fine_fit = fit_Cbar(fine.traj, b, K, fine.medium, fine.grid, fine.forcing);
    const double grid_var =
        std::max(fine_fit.Cbar, coarse_reference.Cbar) /
            std::min(fine_fit.Cbar, coarse_reference.Cbar) - 1.0;
    bool monotone = true;
    for (std::size_t i = 1; i < cbar_by_omega.size(); ++i) {
      if (cbar_by_omega[i] > cbar_by_omega[i - 1]) monotone = false;
    }

    ordered_json prop;
    prop["calibration"] = cal;
    prop["Cbar"] = jnum(Cbar);
    prop["Cbar_by_omega"] = jvec(cbar_by_omega);
    prop["omega_variation"] = jnum(cmin > 0.0 ? Cbar / cmin - 1.0 : kInf);
    prop["fine_grid"] = {{"nx", cfg.fine_nx},
                         {"Cbar", jnum(fine_fit.Cbar)},
                         {"coarse_Cbar", jnum(coarse_reference.Cbar)},
                         {"variation", jnum(grid_var)}};
    checks.push_back({"Cbar grid variation", grid_var, 0.25, "<=", false});
    checks.push_back({"Cbar omega variation", cmin > 0.0 ? Cbar / cmin - 1.0 : kInf, 0.25, "<=",
                      false});
    checks.push_back({"Cbar nonincreasing in omega", monotone ? 1.0 : 0.0, 1.0, "==", false});

    ordered_json asr = ordered_json::array();
    double worst_assert = kInf;
    for (std::size_t i = 0; i < assertion_runs.size(); ++i) {
      const double m = cbar_margin(assertion_fits[i], Cbar);
      worst_assert = std::min(worst_assert, m);
      asr.push_back({{"label", assertion_runs[i].label},
                     {"fitted", jnum(assertion_fits[i].Cbar)},
                     {"margin", jnum(m)}});
      if (!out_dir.empty()) write_fit_csv(out_dir, assertion_runs[i].label, assertion_fits[i]);
    }
    prop["assertion"] = asr;
    checks.push_back({"LHS <= Cbar RHS on assertion runs (min margin)", worst_assert, 0.0, ">=",
                      true});
    r["differential_inequality"] = prop;

    // L^alpha envelope on the assertion runs.
    ordered_json envs = ordered_json::array();
    std::size_t env_checked = 0, env_viol = 0, admissible_runs = 0;
    double env_margin = kInf;
    bool delta_ok = true;
    for (const CertRun& run : assertion_runs) {
      const NormEnvelope env =
          norm_envelope(run.u0, run.phi, run.grid, run.forcing, b, Cbar,
                             run.medium.chi_star(), cfg.T, pick_times(run.traj, 100));
      ordered_json e{{"label", run.label},
                     {"chi_star", jnum(run.medium.chi_star())},
                     {"V0", jnum(env.V0)},
                     {"T_max", jnum(env.T_max)},
                     {"admissible", env.admissible}};
      if (run.omega == cfg.omega && !env.admissible) {
        throw SmallnessViolation("T = " + num(cfg.T) + " exceeds the smallness window of run " +
                                     run.label + " (largest admissible T = " + num(env.T_max) + ")",
                                 env.T_max);
      }
      if (env.admissible) {
        ++admissible_runs;
        const EnvelopeCheck ec = check_envelope(env, run.traj);
        env_checked += ec.checked;
        env_viol += ec.violations;
        env_margin = std::min(env_margin, ec.min_margin);
        if (env.delta.empty() || env.delta.front() != 1.0) delta_ok = false;
        for (std::size_t i = 1; i < env.delta.size(); ++i) {
          if (env.delta[i] > env.delta[i - 1]) delta_ok = false;
        }
        e["checked"] = ec.checked;
        e["violations"] = ec.violations;
        e["min_margin"] = jnum(ec.min_margin);
        if (!out_dir.empty()) {
          write_envelope_csv(out_dir, run.label, env, run.traj, diag_index(run.traj, alpha));
        }
      }
      envs.push_back(e);
    }
    r["envelope"] = {{"runs", envs},
                     {"admissible_runs", admissible_runs},
                     {"checked", env_checked},
                     {"violations", env_viol},
                     {"min_margin", jnum(env_margin)}};
    checks.push_back({"envelope violations", static_cast<double>(env_viol), 0.0, "==", true});
    checks.push_back({"envelope points checked", static_cast<double>(env_checked), 1.0, ">=", true});
    checks.push_back({"delta(0) = 1 and nonincreasing", delta_ok ? 1.0 : 0.0, 1.0, "==", true});

    // Moser machinery.
    const SequenceFuzzReport fz = fuzz_sequence_bound(200, 100, cfg.seed);
    const SequenceBound sb = sequence_bound(1.0, moser_family(b, alpha0, ms.J + 1), 1.0);
    ordered_json mo;
    mo["J"] = ms.J;
    mo["mu_tilde"] = jnum(ms.mu_tilde);
    mo["nu_tilde"] = jnum(ms.nu_tilde);
    mo["G"] = jnum(ms.G);
    mo["L0"] = jnum(ms.L0);
    mo["omega"] = jnum(ms.omega);
    mo["omega0"] = jnum(ms.omega0);
    mo["omega1"] = jnum(ms.omega1);
    mo["omega2"] = jnum(ms.omega2);
    mo["omega3"] = jnum(ms.omega3);
    mo["chain_min_margin"] = jnum(ms.chain_min_margin());
    mo["raw_gap_60_120"] = jnum(ms.raw_gap_60_120);
    mo["corrected_gap_60_120"] = jnum(ms.corrected_gap_60_120);
    mo["sequence_bound"] = {{"alpha_bar", jnum(sb.alpha_bar)},
                            {"beta_bar", jnum(sb.beta_bar)},
                            {"gamma_bar", jnum(sb.gamma_bar)},
                            {"G", jnum(sb.G)}};
    mo["fuzz"] = {{"families", fz.families},
                  {"violations", fz.violations},
                  {"worst_log_margin", jnum(fz.worst_log_margin)}};
    r["moser"] = mo;
    checks.push_back({"chain kappa(beta_j) beta_j > beta_{j+2}, j <= 50 (min margin)",
                      ms.chain_min_margin(), 0.0, ">", true});
    checks.push_back({"products stable 60 -> 120", ms.corrected_gap_60_120, 1e-8, "<=", true});
    checks.push_back({"sequence bound fuzz violations", static_cast<double>(fz.violations), 0.0,
                      "==", true});

    // Shape of the L^infinity bound.
    std::vector<SupRun> sup_runs;
    std::vector<std::array<double, 4>> keys;  // omega, amplitude, eps, sup
    ordered_json sweep = ordered_json::array();
    const double snap_dt = cfg.T / 40.0;
    for (double om : cfg.sweep_omegas) {
      for (double A : cfg.sweep_amplitudes) {
        CertRun run = certification_run(cfg, om, A, cfg.sweep_nx, alpha, snap_dt);
        const NormEnvelope env = norm_envelope(run.u0, run.phi, run.grid, run.forcing, b,
                                                  Cbar, run.medium.chi_star(), cfg.T, {cfg.T});
        const double PsiT = compute_PsiT(run.grid, run.forcing, cfg.T, b.pp[2], b.a);
        const double u0n = lp_phi_norm(run.u0, alpha, run.phi, run.grid);
        for (double eps : cfg.sweep_eps) {
          ordered_json e{{"label", run.label}, {"eps", jnum(eps)}, {"T_max", jnum(env.T_max)}};
          if (!env.admissible) {
            e["admissible"] = false;
            sweep.push_back(e);
            continue;
          }
          SupRun srun;
          srun.label = run.label + "_eps" + num(eps);
          srun.in = {run.medium.chi_star(), eps, cfg.T, env.delta.back(), u0n, PsiT};
          srun.sup_u = sup_after(run.traj, eps, cfg.T);
          srun.shape = sup_shape(ms, b, srun.in);
          sup_runs.push_back(srun);
          keys.push_back({om, A, eps, srun.sup_u});
        }
      }
    }
    const SupCert scert = summarize_sup(sup_runs);
    for (const SupRun& x : scert.runs) {
      sweep.push_back({{"label", x.label},
                       {"admissible", true},
                       {"sup_u", jnum(x.sup_u)},
                       {"log_shape", jnum(x.shape.log_shape)},
                       {"log_C1", jnum(x.log_C1)}});
    }
    // Measured growth ratios against the eps^{-omega2} and chi^{omega0} factors.
    std::size_t growth_checked = 0, growth_viol = 0;
    double growth_margin = kInf;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      for (std::size_t j = 0; j < keys.size(); ++j) {
        const auto& p = keys[i];
        const auto& q = keys[j];
        double log_allowed = 0.0, log_measured = 0.0;
        if (p[0] == q[0] && p[1] == q[1] && p[2] < q[2]) {
          log_allowed = ms.omega2 * std::log(q[2] / p[2]);
        } else if (p[1] == q[1] && p[2] == q[2] && p[0] < q[0]) {
          log_allowed = ms.omega0 * std::log((1.0 + q[0] * base_medium.cbar()) /
                                             (1.0 + p[0] * base_medium.cbar()));
        } else {
          continue;
        }
        const bool by_eps = p[0] == q[0];
        log_measured = by_eps ? std::log(p[3] / q[3]) : std::log(q[3] / p[3]);
        ++growth_checked;
        const double m = log_allowed - log_measured;
        growth_margin = std::min(growth_margin, m);
        if (m < 0.0) ++growth_viol;
      }
    }
    r["linf_shape"] = {{"runs", sweep},
                       {"log_C1_fit", jnum(scert.log_C1_fit)},
                       {"variation", jnum(scert.variation)},
                       {"growth_checked", growth_checked},
                       {"growth_violations", growth_viol},
                       {"growth_min_log_margin", jnum(growth_margin)}};
    checks.push_back({"C1 variation across sweep", scert.variation, 2.0, "<=", false});
    checks.push_back({"growth ratios within eps and chi factors (violations)",
                      static_cast<double>(growth_viol), 0.0, "==", true});
    checks.push_back({"growth ratio pairs checked", static_cast<double>(growth_checked), 1.0, ">=",
                      true});

    rep["results"] = r;
    if (!out_dir.empty()) {
      std::ofstream f(std::filesystem::path(out_dir) / "sup_shape.csv", std::ios::binary);
      f << "label,chi_star,eps,T,delta_T,u0_norm,PsiT,sup_u,log_shape,log_C1\n";
      for (const SupRun& x : scert.runs) {
        f << x.label << ',' << num(x.in.chi_star) << ',' << num(x.in.eps) << ',' << num(x.in.T)
          << ',' << num(x.in.delta_T) << ',' << num(x.in.u0_norm) << ',' << num(x.in.PsiT) << ','
          << num(x.sup_u) << ',' << num(x.shape.log_shape) << ',' << num(x.log_C1) << '\n';
      }
    }
    return finish(rep, checks);
  });
}

}  // namespace rotforch
