#include "rotforch/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "rotforch/errors.hpp"

namespace rotforch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

// integral^power from a log integral; 0 integrals stay 0 for power > 0.
double raise(const WeightIntegral& w, double power) {
  if (!w.finite) return kInf;
  return std::exp(power * w.log_value);
}

void require_exp(bool ok, const std::string& ineq, double alpha) {
  if (!ok) throw InvalidExponent(ineq, "alpha = " + format_number(alpha));
}

}  // namespace

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

double log_sum_exp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  if (m == kInf) return kInf;
  std::vector<double> e(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) e[i] = v[i] == kNegInf ? 0.0 : std::exp(v[i] - m);
  return m + std::log(pairwise_sum(e));
}

double log_power_integral(const std::vector<double>& f, double alpha,
                          const std::vector<double>& phi, const Grid& grid) {
  if (f.size() != grid.cell_count() || phi.size() != grid.cell_count()) {
    throw InvalidInput("field size does not match the grid");
  }
  const double la = std::log(grid.cell_area());
  std::vector<double> terms(f.size());
  for (std::size_t c = 0; c < f.size(); ++c) {
    terms[c] = alpha * safe_log(std::abs(f[c])) + std::log(phi[c]) + la;
  }
  return log_sum_exp(terms);
}

double lp_phi_norm(const std::vector<double>& f, double alpha, const std::vector<double>& phi,
                   const Grid& grid, bool allow_quasi) {
  if (!(alpha > 0.0)) throw InvalidInput("L^alpha norm needs alpha > 0");
  if (alpha < 1.0 && !allow_quasi) throw InvalidInput("alpha < 1 gives a quasi-norm");
  const double l = log_power_integral(f, alpha, phi, grid);
  return l == kNegInf ? 0.0 : std::exp(l / alpha);
}

double spacetime_lp_phi_norm(const std::vector<double>& times,
                             const std::vector<std::vector<double>>& snaps, double alpha,
                             const std::vector<double>& phi, const Grid& grid) {
  if (snaps.size() < 2 || times.size() != snaps.size()) {
    throw InvalidInput("space-time norm needs at least two snapshots");
  }
  std::vector<double> terms;
  terms.reserve(snaps.size());
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    double w = 0.0;
    if (k > 0) w += times[k] - times[k - 1];
    if (k + 1 < snaps.size()) w += times[k + 1] - times[k];
    if (!(k == 0 || times[k] > times[k - 1])) {
      throw InvalidInput("snapshot times must be strictly increasing");
    }
    terms.push_back(log_power_integral(snaps[k], alpha, phi, grid) + std::log(0.5 * w));
  }
  const double l = log_sum_exp(terms);
  return l == kNegInf ? 0.0 : std::exp(l / alpha);
}

double boundary_integral(const Grid& grid, const std::vector<double>& values, double power) {
  const auto& bf = grid.boundary_faces();
  if (values.size() != bf.size()) throw InvalidInput("boundary values do not match face count");
  std::vector<double> terms(bf.size());
  for (std::size_t k = 0; k < bf.size(); ++k) {
    const double v = std::abs(values[k]);
    terms[k] = (v == 0.0 ? 0.0 : std::pow(v, power)) * grid.faces()[bf[k]].length;
  }
  return pairwise_sum(terms);
}

std::vector<Vec2> cell_gradients(const std::vector<double>& u, const Grid& grid) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  const double hx = grid.hx();
  const double hy = grid.hy();
  auto d = [](const double* v, int n, int i, std::ptrdiff_t stride, double h) {
    auto at = [&](int k) { return v[k * stride]; };
    if (n == 2) return (at(1) - at(0)) / h;
    if (i == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    if (i == n - 1) return -(-3.0 * at(n - 1) + 4.0 * at(n - 2) - at(n - 3)) / (2.0 * h);
    return (at(i + 1) - at(i - 1)) / (2.0 * h);
  };
  std::vector<Vec2> g(u.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = grid.index(i, j);
      g[c][0] = d(&u[grid.index(0, j)], nx, i, 1, hx);
      g[c][1] = d(&u[grid.index(i, 0)], ny, j, nx, hy);
    }
  }
  return g;
}

double compute_M_alpha(const Grid& grid, const BoundaryForcing& forcing, double t, double alpha,
                       double r, double lambda) {
  if (!(r > 0.0)) throw InvalidExponent("r > 0", "r = " + format_number(r));
  const double e1 = (alpha + r) / (r + lambda);
  const double e2 = (alpha + r) / r;
  const auto& bf = grid.boundary_faces();
  std::vector<double> terms(bf.size());
  for (std::size_t k = 0; k < bf.size(); ++k) {
    const Face& f = grid.faces()[bf[k]];
    const auto psi = forcing.at(f, grid.rect(), t);
    const double m1 = std::max(0.0, -psi[0]);
    const double m2 = std::max(0.0, -psi[1]);
    terms[k] = ((m1 > 0.0 ? std::pow(m1, e1) : 0.0) + (m2 > 0.0 ? std::pow(m2, e2) : 0.0)) *
               f.length;
  }
  return 1.0 + pairwise_sum(terms);
}

double compute_PsiT(const Grid& grid, const BoundaryForcing& forcing, double T, double p3,
                    double a, int time_points) {
  if (!(T > 0.0)) throw InvalidInput("Psi_T needs T > 0");
  if (!(p3 > 1.0)) throw InvalidExponent("p3 > 1", "p3 = " + format_number(p3));
  const double d = p3 * (2.0 - a) - 1.0;
  if (!(d > 0.0)) throw InvalidExponent("p3 (2-a) > 1", "p3 = " + format_number(p3));
  if (time_points < 2) throw InvalidInput("Psi_T needs at least two time nodes");
  const double q3 = p3 / (p3 - 1.0);
  const auto& bf = grid.boundary_faces();
  std::vector<double> in_time(time_points);
  for (int k = 0; k < time_points; ++k) {
    const double t = T * k / (time_points - 1);
    std::vector<double> terms(bf.size());
    for (std::size_t i = 0; i < bf.size(); ++i) {
      const Face& f = grid.faces()[bf[i]];
      const auto psi = forcing.at(f, grid.rect(), t);
      const double m1 = std::max(0.0, -psi[0]);
      const double m2 = std::max(0.0, -psi[1]);
      terms[i] = ((m1 > 0.0 ? std::pow(m1, q3) : 0.0) + (m2 > 0.0 ? std::pow(m2, q3) : 0.0)) *
                 f.length;
    }
    const double w = (k == 0 || k == time_points - 1) ? 0.5 : 1.0;
    in_time[k] = w * pairwise_sum(terms) * T / (time_points - 1);
  }
  const double integral = pairwise_sum(in_time);
  if (integral == 0.0) return 1.0;
  return 1.0 + std::pow(integral, p3 * (2.0 - a) / (q3 * d));
}

WeightQuadrature::WeightQuadrature(const Medium& medium, int nx, int ny) : nx_(nx), ny_(ny) {
  if (nx < 1 || ny < 1) throw InvalidInput("weight quadrature needs a positive resolution");
  const Rect& rect = medium.domain.rect;
  for (int l = 0; l < 3; ++l) {
    const int mx = nx << l;
    const int my = ny << l;
    const double hx = rect.lx / mx;
    const double hy = rect.ly / my;
    cell_area_[l] = hx * hy;
    auto& vals = levels_[l];
    vals.resize(static_cast<std::size_t>(mx) * my);
    for (int j = 0; j < my; ++j) {
      for (int i = 0; i < mx; ++i) {
        const Point p{(i + 0.5) * hx, (j + 0.5) * hy, 0.0};
        vals[static_cast<std::size_t>(j) * mx + i] = eval_weights(medium, p);
      }
    }
  }
}

WeightIntegral WeightQuadrature::integrate(
    const std::function<double(const WeightValues&)>& log_integrand) const {
  WeightIntegral out;
  for (int l = 0; l < 3; ++l) {
    const auto& vals = levels_[l];
    std::vector<double> terms(vals.size());
    for (std::size_t c = 0; c < vals.size(); ++c) terms[c] = log_integrand(vals[c]);
    out.levels[l] = log_sum_exp(terms) + std::log(cell_area_[l]);
  }
  out.log_value = out.levels[2];
  const double lr = std::log(kDivergenceRatio);
  const bool grows = out.levels[0] != kNegInf && out.levels[1] - out.levels[0] > lr &&
                     out.levels[2] - out.levels[1] > lr;
  if (grows || out.log_value == kInf || std::isnan(out.log_value)) {
    out.finite = false;
    out.value = kInf;
  } else {
    out.value = std::exp(out.log_value);
  }
  return out;
}

bool KFunctionals::all_finite() const { return first_divergent() < 0; }

int KFunctionals::first_divergent() const {
  for (int j = 0; j < 7; ++j) {
    if (!K_finite[j]) return j;
  }
  return -1;
}

WeightIntegral compute_K(int j, double alpha, const ExponentBundle& b, const WeightQuadrature& q) {
  const double a = b.a;
  const double lam = b.lambda;
  const double r1 = b.r1;
  const SobolevExponents e =
      compute_sobolev_exponents(b.n, 2.0 - a, lam + 1.0, 2.0 * lam, r1, b.r, alpha);
  auto lphi = [](const WeightValues& w) { return std::log(w.phi); };
  WeightIntegral base;
  double power = 1.0;
  switch (j) {
    case 0:
      base = q.integrate(lphi);
      if (base.finite) base.value = 1.0 + base.value;
      base.log_value = std::log(base.value);
      return base;
    case 1:
      base = q.integrate([](const WeightValues& w) { return -std::log(w.phi); });
      power = 1.0 + e.mu1 / alpha;
      break;
    case 2: {
      const double den = alpha * (1.0 - a) - 1.0 + lam + a;
      require_exp(den > 0.0, "alpha (1-a) - 1 + lambda + a > 0", alpha);
      const double ex = -(alpha + 1.0 - lam - a) / den;
      base = q.integrate([ex](const WeightValues& w) { return ex * std::log(w.phi); });
      power = den / alpha;
      break;
    }
    case 3: {
      const double den = alpha * (1.0 - r1) - 2.0 * lam * r1;
      require_exp(den > 0.0, "alpha (1-r1) > 2 lambda r1", alpha);
      const double ep = -2.0 * lam * r1 / den;
      const double ew = -r1 * alpha / den;
      base = q.integrate([ep, ew](const WeightValues& w) {
        return ep * std::log(w.phi) + ew * std::log(w.W1);
      });
      power = den / (alpha * r1);
      break;
    }
    case 4: {
      const double bs = e.beta_star;
      require_exp(alpha > bs, "alpha > beta_*", alpha);
      const double ep = -(alpha + bs) / (alpha - bs);
      const double ew = -bs * alpha / (2.0 * lam * (alpha - bs));
      base = q.integrate([ep, ew](const WeightValues& w) {
        return ep * std::log(w.phi) + ew * std::log(w.W1);
      });
      power = (alpha - bs) * (1.0 + e.mu1_tilde / alpha) / alpha;
      break;
    }
    case 5: {
      const double ep = -(alpha - lam - 1.0) / (lam + 1.0);
      const double ew = alpha / (lam + 1.0);
      base = q.integrate([ep, ew](const WeightValues& w) {
        return ep * std::log(w.phi) + ew * std::log(w.W4);
      });
      break;
    }
    case 6: {
      const double den = b.r - lam * (5.0 - 4.0 * a) + 1.0;
      require_exp(den > 0.0, "r - lambda(5-4a) + 1 > 0", alpha);
      const double ew = (alpha + b.r) / den;
      base = q.integrate([ew](const WeightValues& w) { return ew * std::log(w.W3); });
      break;
    }
    default:
      throw InvalidInput("K index must be in 0..6");
  }
  WeightIntegral out = base;
  out.value = raise(base, power);
  out.log_value = base.finite ? power * base.log_value : kInf;
  return out;
}

KFunctionals compute_K_all(const ExponentBundle& b, const WeightQuadrature& q) {
  KFunctionals k;
  k.alpha = b.alpha;
  for (int j = 0; j < 7; ++j) {
    const WeightIntegral w = compute_K(j, b.alpha, b, q);
    k.K[j] = w.value;
    k.K_finite[j] = w.finite;
  }
  const double a = b.a;
  const double lam = b.lambda;
  const double r1 = b.r1;
  const auto& p = b.pp;
  const auto& qq = b.qq;

  const WeightIntegral int_phi = q.integrate([](const WeightValues& w) { return std::log(w.phi); });
  const WeightIntegral int_inv =
      q.integrate([](const WeightValues& w) { return -std::log(w.phi); });
  k.Phi_star = 1.0 + int_phi.value;
  k.Phi_dstar = int_inv.value;
  k.E1 = k.Phi_star;

  // N1 = (1 + int phi) {1 + four weighted pieces}
  const WeightIntegral n1a = q.integrate([&](const WeightValues& w) {
    return qq[0] * std::log(w.W4) - qq[0] / p[0] * std::log(w.phi);
  });
  const WeightIntegral n1b = q.integrate([&](const WeightValues& w) {
    return qq[1] * std::log(w.W3) - qq[1] / p[1] * std::log(w.phi);
  });
  const WeightIntegral n1c =
      q.integrate([&](const WeightValues& w) { return -qq[3] / p[3] * std::log(w.phi); });
  const WeightIntegral n1d = q.integrate([&](const WeightValues& w) {
    return -qq[4] / (1.0 - a) * std::log(w.W1) - qq[4] / p[4] * std::log(w.phi);
  });
  const double d3 = p[2] * (2.0 - a) - 1.0;
  k.N1 = k.Phi_star * (1.0 + raise(n1a, 1.0 / qq[0]) + raise(n1b, 1.0 / qq[1]) +
                       raise(n1c, 1.0 / (p[2] * qq[3])) +
                       raise(n1d, (1.0 - a) / (qq[4] * d3)));

  const double rs = b.r_star;
  const WeightIntegral e2 =
      q.integrate([rs](const WeightValues& w) { return (2.0 / rs - 1.0) * std::log(w.phi); });
  k.E2 = raise(e2, rs / 2.0);
  const double g1 = r1 / (1.0 - r1);
  const double g2 = r1 / ((1.0 - r1) * (1.0 - r1));
  const WeightIntegral e3 = q.integrate([g1, g2](const WeightValues& w) {
    return g1 * std::log1p(1.0 / w.phi) + g2 * std::log1p(1.0 / w.W1);
  });
  k.E3 = e3.finite ? std::pow(1.0 + e3.value, (1.0 - r1) / r1) : kInf;
  k.N2 = std::pow(k.Phi_star, std::min(1.0 - r1, 2.0 * lam / (1.0 + lam))) * k.E2 * k.E3;
  k.N3 = std::max(k.N1, k.N2);
  return k;
}

}  // namespace rotforch
