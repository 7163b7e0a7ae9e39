#include "rotforch/certification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rotforch/errors.hpp"
#include "rotforch/field_expr.hpp"

namespace rotforch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void require_alpha_above_star(const ExponentBundle& b) {
  if (b.alpha > b.alpha_star) return;
  static const char* names[] = {"2 lambda r1/(1-r1)", "2(2-a)(r+a+lambda-1)/(r_*(1-a))",
                                "2 lambda(2+r_*)/((1-a)r_*) + 2/r_*",
                                "2r(1+2/r_*) + 4 lambda/r_*", "2r~(1+2/r_*) + 4 lambda/r_*"};
  const auto it = std::max_element(b.alpha_star_terms.begin(), b.alpha_star_terms.end());
  throw InvalidExponent(std::string("alpha > ") + names[it - b.alpha_star_terms.begin()],
                        "alpha = " + format_number(b.alpha) + " <= alpha_* = " +
                            format_number(b.alpha_star));
}

namespace {

void require_finite(const KFunctionals& K) {
  const int j = K.first_divergent();
  if (j >= 0) {
    throw DivergentFunctional("K" + std::to_string(j),
                              "weight integral grows under refinement; certification aborted");
  }
}

}  // namespace

std::size_t diag_index(const Trajectory& traj, double alpha) {
  for (std::size_t i = 0; i < traj.diag_alphas.size(); ++i) {
    if (std::abs(traj.diag_alphas[i] - alpha) <= 1e-12 * alpha) return i;
  }
  throw InvalidInput("alpha " + format_number(alpha) + " is not among the diagnostic exponents");
}

CbarFit fit_Cbar(const Trajectory& traj, const ExponentBundle& b, const KFunctionals& K,
                 const Medium& medium, const Grid& grid, const BoundaryForcing& forcing) {
  require_alpha_above_star(b);
  require_finite(K);
  const std::size_t k = diag_index(traj, b.alpha);
  const std::size_t n = traj.diag.size();
  if (n < 2) throw InvalidInput("fit_Cbar needs at least two diagnostic rows");
  const double alpha = b.alpha;
  const double lam = b.lambda;
  const double chi = medium.chi_star();
  const double a = medium.a();

  CbarFit fit;
  fit.alpha = alpha;
  for (const DiagRow& d : traj.diag) {
    fit.t.push_back(d.t);
    fit.J.push_back(d.norms[k] > 0.0 ? std::exp(alpha * std::log(d.norms[k])) : 0.0);
    fit.grad_energy.push_back(d.grad_energy[k]);
    fit.M.push_back(compute_M_alpha(grid, forcing, d.t, alpha, b.r, lam));
  }
  fit.dJdt.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
    fit.dJdt[i] = (fit.J[hi] - fit.J[lo]) / (fit.t[hi] - fit.t[lo]);
  }
  const double coef = alpha * (alpha - lam) / (chi * chi * std::pow(2.0, 3.0 - a) * lam);
  const double chi_g = std::pow(chi, b.gamma_star);
  const double expo = 1.0 + b.mu_star / alpha;
  fit.Cbar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fit.lhs.push_back(fit.dJdt[i] + coef * fit.grad_energy[i]);
    fit.rhs_shape.push_back(chi_g * (std::pow(1.0 + fit.J[i], expo) + fit.M[i]));
    const double ratio = fit.lhs[i] / fit.rhs_shape[i];
    if (ratio > fit.Cbar) {
      fit.Cbar = ratio;
      fit.argmax = i;
    }
  }
  return fit;
}

double cbar_margin(const CbarFit& fit, double Cbar) {
  double m = kInf;
  for (std::size_t i = 0; i < fit.lhs.size(); ++i) {
    const double cap = Cbar * fit.rhs_shape[i];
    if (cap > 0.0) m = std::min(m, (cap - fit.lhs[i]) / cap);
    else if (fit.lhs[i] > 0.0) m = -kInf;
  }
  return m;
}

double integrate_M(const Grid& grid, const BoundaryForcing& forcing, double t, double alpha,
                   double r, double lambda, int nodes) {
  if (t <= 0.0) return 0.0;
  std::vector<double> v(nodes);
  const double h = t / (nodes - 1);
  for (int i = 0; i < nodes; ++i) {
    const double w = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
    v[i] = w * h * compute_M_alpha(grid, forcing, i * h, alpha, r, lambda);
  }
  return pairwise_sum(v);
}

NormEnvelope norm_envelope(const std::vector<double>& u0, const std::vector<double>& phi,
                              const Grid& grid, const BoundaryForcing& forcing,
                              const ExponentBundle& b, double Cbar, double chi_star, double T,
                              const std::vector<double>& times, double eta,
                              const WeightQuadrature* quadrature) {
  if (!(T > 0.0)) throw InvalidInput("T must be positive");
  if (!(Cbar >= 0.0)) throw InvalidInput("Cbar must be nonnegative");
  const double alpha = b.alpha;
  NormEnvelope env;
  env.alpha = alpha;
  env.Cbar = Cbar;
  env.chi_star = chi_star;
  env.T = T;
  env.V0 = 1.0 + std::exp(log_power_integral(u0, alpha, phi, grid));
  const double mu = b.mu_star;
  // log of 2 mu_* chi^{gamma_*} Cbar V0^{mu_*/alpha} / alpha
  const double log_rate = std::log(2.0 * mu / alpha) + b.gamma_star * std::log(chi_star) +
                          std::log(Cbar) + (mu / alpha) * std::log(env.V0);
  env.smallness = Cbar > 0.0 ? std::exp(-log_rate) : kInf;
  auto intM = [&](double t) { return integrate_M(grid, forcing, t, alpha, b.r, b.lambda); };

  if (Cbar == 0.0) {
    env.T_max = kInf;
  } else {
    double hi = T;
    int guard = 0;
    while (intM(hi) < env.smallness && guard++ < 60) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (intM(mid) < env.smallness ? lo : hi) = mid;
    }
    env.T_max = guard > 60 ? kInf : lo;
  }
  env.admissible = intM(T) < env.smallness;

  if (eta > 0.0) {
    if (eta >= alpha) throw InvalidInput("eta must lie in (0, alpha)");
    if (!quadrature) throw InvalidInput("the unweighted bound needs a weight quadrature");
    const double e = eta / (alpha - eta);
    const WeightIntegral wi =
        quadrature->integrate([e](const WeightValues& w) { return -e * std::log(w.phi); });
    if (!wi.finite) throw DivergentFunctional("C_{alpha,eta}", "int phi^{-eta/(alpha-eta)}");
    env.eta = eta;
    env.C_alpha_eta = wi.value;
  }

  for (double t : times) {
    if (t < 0.0 || t > T * (1.0 + 1e-12)) throw InvalidInput("envelope time outside [0, T]");
    const double im = intM(t);
    const double d = Cbar > 0.0 ? 1.0 - im / env.smallness : 1.0;
    env.t.push_back(t);
    env.int_M.push_back(im);
    env.delta.push_back(d);
    const double bound = d > 0.0 ? std::pow(env.V0, 1.0 / alpha) * std::pow(d, -1.0 / mu) : kInf;
    env.bound.push_back(bound);
    if (env.eta > 0.0) {
      env.eta_bound.push_back(std::pow(env.C_alpha_eta, 1.0 / env.eta - 1.0 / alpha) * bound);
    }
  }
  return env;
}

EnvelopeCheck check_envelope(const NormEnvelope& env, const Trajectory& traj) {
  const std::size_t k = diag_index(traj, env.alpha);
  EnvelopeCheck c;
  c.min_margin = kInf;
  for (const DiagRow& d : traj.diag) {
    if (d.t > env.T * (1.0 + 1e-12) || d.t >= env.T_max) continue;
    const auto it = std::find(env.t.begin(), env.t.end(), d.t);
    if (it == env.t.end()) continue;
    const double bound = env.bound[static_cast<std::size_t>(it - env.t.begin())];
    const double m = 1.0 - d.norms[k] / bound;
    ++c.checked;
    c.min_margin = std::min(c.min_margin, m);
    if (m < -1e-12) ++c.violations;
  }
  return c;
}

SupShape sup_shape(const MoserSchedule& ms, const ExponentBundle& b, const SupShapeInputs& in) {
  if (!(in.eps > 0.0 && in.eps < std::min(1.0, in.T))) {
    throw InvalidInput("eps must lie in (0, min{1, T})");
  }
  if (!(in.delta_T > 0.0)) throw SmallnessViolation("delta(T) is not positive", in.T);
  const double beta1 = ms.kappa_tilde * ms.alpha0;
  SupShape s;
  s.log_chi = ms.omega0 * std::log(in.chi_star);
  s.log_eps = -ms.omega2 * std::log(in.eps);
  s.log_T = (ms.omega1 + ms.nu_tilde / beta1) * std::log1p(in.T);
  s.log_delta = -(ms.nu_tilde / b.mu_star) * std::log(in.delta_T);
  s.log_u0 = ms.nu_tilde * std::log1p(in.u0_norm);
  s.log_psi = ms.omega2 * std::log(in.PsiT);
  s.log_shape = s.log_chi + s.log_eps + s.log_T + s.log_delta + s.log_u0 + s.log_psi;
  return s;
}

double sup_after(const Trajectory& traj, double eps, double T) {
  double m = 0.0;
  const double hi = T * (1.0 + 1e-12);
  for (const DiagRow& d : traj.diag) {
    if (d.t >= eps && d.t <= hi) m = std::max(m, d.max_u);
  }
  for (const Snapshot& s : traj.snapshots) {
    if (s.t >= eps && s.t <= hi) m = std::max(m, *std::max_element(s.u.begin(), s.u.end()));
  }
  return m;
}

SupCert summarize_sup(std::vector<SupRun> runs) {
  SupCert c;
  c.runs = std::move(runs);
  double lo = kInf, hi = -kInf;
  for (SupRun& r : c.runs) {
    r.log_C1 = r.sup_u > 0.0 ? std::log(r.sup_u) - r.shape.log_shape : -kInf;
    lo = std::min(lo, r.log_C1);
    hi = std::max(hi, r.log_C1);
  }
  c.log_C1_fit = hi;
  c.variation = c.runs.empty() ? 1.0 : std::exp(hi - lo);
  return c;
}

}  // namespace rotforch
