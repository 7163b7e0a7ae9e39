#include "rotforch/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rotforch/errors.hpp"

namespace rotforch {

namespace {

double ipow_or_pow(double s, double e) {
  if (e == 1.0) return s;
  if (e == 2.0) return s * s;
  if (e == 3.0) return s * s * s;
  if (e == 0.5) return std::sqrt(s);
  return std::pow(s, e);
}

double norm2(const Vec2& v) { return std::hypot(v[0], v[1]); }
double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Root of an increasing function h on [lo, hi] with h(lo) <= 0 <= h(hi).
// Newton steps are used while they stay inside the bracket.
template <class H, class DH>
double bracketed_newton(H h, DH dh, double lo, double hi, int* iterations) {
  constexpr int kMaxIter = 200;
  double s = hi;
  for (int it = 0; it < kMaxIter; ++it) {
    if (iterations) *iterations = it + 1;
    const double hv = h(s);
    if (hv == 0.0) return s;
    if (hv > 0.0) {
      hi = s;
    } else {
      lo = s;
    }
    const double d = dh(s);
    double next = s - hv / d;
    if (!(d > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - s);
    s = next;
    if (step <= 1e-15 * s || hi - lo <= 1e-15 * hi || step <= 1e-300) return s;
  }
  return s;
}

}  // namespace

double LocalLaw::g(double s) const {
  if (!(s >= 0.0)) throw InvalidInput("g(x, s) needs s >= 0, got " + format_number(s));
  double r = coeffs[0];
  for (std::size_t i = 1; i < degrees.size(); ++i) r += coeffs[i] * ipow_or_pow(s, degrees[i]);
  return r;
}

double LocalLaw::dg(double s) const {
  double r = 0.0;
  for (std::size_t i = 1; i < degrees.size(); ++i) {
    const double e = degrees[i];
    if (coeffs[i] == 0.0) continue;
    r += coeffs[i] * e * (e == 1.0 ? 1.0 : std::pow(s, e - 1.0));
  }
  return r;
}

double LocalLaw::chi0() const {
  double r = 0.0;
  for (double c : coeffs) r += c;
  return r;
}

ForchheimerLaw::ForchheimerLaw(std::vector<double> degrees, std::vector<FieldExpr> coeffs)
    : degrees_(std::move(degrees)), coeffs_(std::move(coeffs)) {
  if (degrees_.size() < 2) throw InvalidInput("Forchheimer law needs N >= 1");
  if (degrees_.size() != coeffs_.size()) {
    throw InvalidInput("Forchheimer law: " + std::to_string(degrees_.size()) + " degrees but " +
                       std::to_string(coeffs_.size()) + " coefficients");
  }
  if (degrees_[0] != 0.0) throw InvalidInput("Forchheimer law: first degree must be 0");
  for (std::size_t i = 1; i < degrees_.size(); ++i) {
    if (!(degrees_[i] > degrees_[i - 1]) || !std::isfinite(degrees_[i])) {
      throw InvalidInput("Forchheimer law: degrees must be strictly increasing");
    }
  }
}

LocalLaw ForchheimerLaw::at(const Rect& rect, const Point& x) const {
  LocalLaw l;
  l.degrees = degrees_;
  l.coeffs.resize(coeffs_.size());
  const EvalContext ctx = context_at(rect, x[0], x[1], 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) l.coeffs[i] = coeffs_[i].eval(ctx);
  auto where = [&] { return " at (" + format_number(x[0]) + ", " + format_number(x[1]) + ")"; };
  if (!(l.coeffs.front() > 0.0)) throw DegenerateCoefficient("a_0 <= 0" + where());
  if (!(l.coeffs.back() > 0.0)) throw DegenerateCoefficient("a_N <= 0" + where());
  for (std::size_t i = 1; i + 1 < l.coeffs.size(); ++i) {
    if (!(l.coeffs[i] >= 0.0)) {
      throw DegenerateCoefficient("a_" + std::to_string(i) + " < 0" + where());
    }
  }
  return l;
}

FluidEOS FluidEOS::isentropic(double c, double gamma) {
  FluidEOS e;
  e.kind = Kind::isentropic;
  e.c = c;
  e.gamma = gamma;
  e.validate();
  return e;
}

FluidEOS FluidEOS::slightly_compressible(double varpi) {
  FluidEOS e;
  e.kind = Kind::slightly_compressible;
  e.varpi = varpi;
  e.validate();
  return e;
}

double FluidEOS::lambda() const {
  return kind == Kind::isentropic ? 1.0 / (gamma + 1.0) : 1.0;
}

double FluidEOS::cbar() const {
  if (kind == Kind::isentropic) return std::pow((gamma + 1.0) / (c * gamma), 1.0 / (gamma + 1.0));
  return varpi;
}

void FluidEOS::validate() const {
  if (kind == Kind::isentropic) {
    if (!(gamma > 0.0)) throw InvalidInput("isentropic gas needs gamma > 0");
    if (!(c > 0.0)) throw InvalidInput("isentropic gas needs c > 0");
  } else if (!(varpi > 0.0)) {
    throw InvalidInput("slightly compressible fluid needs varpi > 0");
  }
}

void RotationGravity::validate() const {
  if (!(omega_tilde >= 0.0)) throw InvalidInput("angular speed must be >= 0");
  if (!(gravity_tilde >= 0.0)) throw InvalidInput("gravity must be >= 0");
  if (std::abs(norm3(k_hat) - 1.0) > 1e-12) throw InvalidInput("rotation axis must be a unit vector");
  if (std::abs(norm3(e0_3d) - 1.0) > 1e-12) throw InvalidInput("e0 must be a unit vector");
}

double Medium::cZ() const { return G() + std::hypot(domain.rect.lx, domain.rect.ly); }

double Medium::phi(const Point& x) const { return cbar() * domain.phi_tilde(x[0], x[1]); }

Vec2 eval_F(const LocalLaw& law, double zeta, const Vec2& v) {
  const double g = law.g(norm2(v));
  return {g * v[0] - zeta * v[1], g * v[1] + zeta * v[0]};
}

Vec3 eval_F(const LocalLaw& law, double zeta, const Vec3& k_hat, const Vec3& v) {
  const double g = law.g(norm3(v));
  const Vec3 kv = cross(k_hat, v);
  return {g * v[0] + zeta * kv[0], g * v[1] + zeta * kv[1], g * v[2] + zeta * kv[2]};
}

Vec2 invert_F(const LocalLaw& law, double zeta, const Vec2& y, double tol, InvertStats* stats) {
  if (!(tol > 0.0)) throw InvalidInput("inverse tolerance must be positive");
  const double ny = norm2(y);
  if (stats) *stats = InvertStats{};
  if (ny == 0.0) return {0.0, 0.0};
  // |F(v)| = s sqrt(g(s)^2 + zeta^2) with s = |v|.
  auto h = [&](double s) {
    const double g = law.g(s);
    return s * std::sqrt(g * g + zeta * zeta) - ny;
  };
  auto dh = [&](double s) {
    const double g = law.g(s);
    const double q = std::sqrt(g * g + zeta * zeta);
    return q + s * g * law.dg(s) / q;
  };
  const double hi = std::min(ny / std::hypot(law.a0(), zeta),
                             std::pow(ny / law.aN(), 1.0 / (1.0 + law.degrees.back())));
  int iters = 0;
  const double s = bracketed_newton(h, dh, 0.0, hi, &iters);
  const double g = law.g(s);
  const double den = g * g + zeta * zeta;
  const Vec2 v{(g * y[0] + zeta * y[1]) / den, (g * y[1] - zeta * y[0]) / den};
  const Vec2 fv = eval_F(law, zeta, v);
  const double res = std::hypot(fv[0] - y[0], fv[1] - y[1]) / (1.0 + ny);
  if (stats) {
    stats->scalar_iterations = iters;
    stats->residual = res;
  }
  if (!(res <= tol)) throw ConvergenceError("inverse of F did not converge", res);
  return v;
}

namespace {

Vec3 solve3(const std::array<Vec3, 3>& A, const Vec3& b) {
  const double det = dot3(A[0], cross(A[1], A[2]));
  // Cramer's rule on rows.
  auto col_replace = [&](int k) {
    std::array<Vec3, 3> M = A;
    for (int r = 0; r < 3; ++r) M[r][k] = b[r];
    return dot3(M[0], cross(M[1], M[2]));
  };
  return {col_replace(0) / det, col_replace(1) / det, col_replace(2) / det};
}

}  // namespace

Vec3 invert_F(const LocalLaw& law, double zeta, const Vec3& k_hat, const Vec3& y, double tol,
              InvertStats* stats) {
  if (!(tol > 0.0)) throw InvalidInput("inverse tolerance must be positive");
  const double ny = norm3(y);
  if (stats) *stats = InvertStats{};
  if (ny == 0.0) return {0.0, 0.0, 0.0};
  const double ypar = dot3(y, k_hat);
  const Vec3 yperp{y[0] - ypar * k_hat[0], y[1] - ypar * k_hat[1], y[2] - ypar * k_hat[2]};
  const double yp2 = dot3(yperp, yperp);
  // Seed: |v| solves s^2 = ypar^2 / g^2 + |yperp|^2 / (g^2 + zeta^2).
  auto h = [&](double s) {
    const double g = law.g(s);
    return s - std::sqrt(ypar * ypar / (g * g) + yp2 / (g * g + zeta * zeta));
  };
  auto dh = [&](double s) {
    const double g = law.g(s);
    const double q = std::sqrt(ypar * ypar / (g * g) + yp2 / (g * g + zeta * zeta));
    const double d = g * g + zeta * zeta;
    const double dq = (ypar * ypar / (g * g * g) + yp2 * g / (d * d)) * law.dg(s) / std::max(q, 1e-300);
    return 1.0 + dq;
  };
  const double hi = std::min(ny / law.a0(), std::pow(ny / law.aN(), 1.0 / (1.0 + law.degrees.back())));
  int iters = 0;
  const double s = bracketed_newton(h, dh, 0.0, hi, &iters);
  const double g = law.g(s);
  const double d = g * g + zeta * zeta;
  const Vec3 kyp = cross(k_hat, yperp);
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = ypar * k_hat[i] / g + (g * yperp[i] - zeta * kyp[i]) / d;

  // Damped Newton polish on the full system.
  auto residual = [&](const Vec3& w) {
    const Vec3 f = eval_F(law, zeta, k_hat, w);
    return Vec3{f[0] - y[0], f[1] - y[1], f[2] - y[2]};
  };
  Vec3 r = residual(v);
  double rn = norm3(r);
  int newton = 0;
  for (; newton < 60 && rn > 1e-15 * (1.0 + ny); ++newton) {
    const double sv = norm3(v);
    const double gv = law.g(sv);
    const double dgv = sv > 0.0 ? law.dg(sv) / sv : 0.0;
    std::array<Vec3, 3> J{};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) J[i][j] = (i == j ? gv : 0.0) + dgv * v[i] * v[j];
    }
    // zeta k x (.) as a matrix
    J[0][1] += -zeta * k_hat[2];
    J[0][2] += zeta * k_hat[1];
    J[1][0] += zeta * k_hat[2];
    J[1][2] += -zeta * k_hat[0];
    J[2][0] += -zeta * k_hat[1];
    J[2][1] += zeta * k_hat[0];
    const Vec3 dv = solve3(J, r);
    double damp = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k) {
      const Vec3 trial{v[0] - damp * dv[0], v[1] - damp * dv[1], v[2] - damp * dv[2]};
      const Vec3 rt = residual(trial);
      const double rtn = norm3(rt);
      if (rtn < rn) {
        v = trial;
        r = rt;
        rn = rtn;
        improved = true;
        break;
      }
      damp *= 0.5;
    }
    if (!improved) break;
  }
  const double res = rn / (1.0 + ny);
  if (stats) {
    stats->scalar_iterations = iters;
    stats->newton_iterations = newton;
    stats->residual = res;
  }
  if (!(res <= tol)) throw ConvergenceError("inverse of F did not converge", res);
  return v;
}

Vec2 eval_X(const Medium& m, const Point& x, double z, const Vec2& y, double tol, InvertStats* stats) {
  if (!(z >= 0.0)) throw InvalidInput("pseudo-pressure must be nonnegative");
  const LocalLaw law = m.law_at(x);
  const double zeta = m.R_star(x) * std::pow(z, m.lambda());
  return invert_F(law, zeta, y, tol, stats);
}

Vec3 eval_X3(const Medium& m, const Point& x, double z, const Vec3& y, double tol, InvertStats* stats) {
  if (!(z >= 0.0)) throw InvalidInput("pseudo-pressure must be nonnegative");
  const LocalLaw law = m.law_at(x);
  const double zeta = m.R_star(x) * std::pow(z, m.lambda());
  return invert_F(law, zeta, m.rotation.k_hat, y, tol, stats);
}

WeightValues weights_from(const LocalLaw& law, double phi, double cbar) {
  WeightValues w;
  const double a = law.a();
  w.phi = phi;
  w.chi0 = law.chi0();
  const double lo = std::min({1.0, law.a0(), law.aN()});
  w.c4_tilde = std::pow(lo / std::pow(2.0, law.degrees.back()), 1.0 + a);
  w.W0 = std::pow(law.aN(), a - 1.0);
  const double pre = std::pow(2.0, -a) * w.c4_tilde;
  const double q = (1.0 + 2.0 * cbar) * (w.chi0 + 1.0 / phi);
  w.W1 = pre / (q * q);
  w.W2 = pre / (w.chi0 * w.chi0);
  w.W3 = std::pow(w.W0, 2.0 - a) * std::pow(w.W1, a - 1.0) + w.W1;
  w.W4 = w.W2 + w.W3;
  return w;
}

WeightValues eval_weights(const Medium& m, const Point& x) {
  return weights_from(m.law_at(x), m.phi(x), m.cbar());
}

Vec2 eval_Z(const Medium& m, const Point& x, double t) {
  const double ang = m.rotation.gravity_angle + m.rotation.gravity_rate * t;
  const double G = m.G();
  const double O2 = m.Omega() * m.Omega();
  return {G * std::cos(ang) - O2 * x[0], G * std::sin(ang) - O2 * x[1]};
}

Vec3 eval_Z3(const Medium& m, const Point& x, double) {
  const double G = m.G();
  const double O2 = m.Omega() * m.Omega();
  const Vec3 kx = cross(m.rotation.k_hat, Vec3{x[0], x[1], x[2]});
  const Vec3 kkx = cross(m.rotation.k_hat, kx);
  const auto& e0 = m.rotation.e0_3d;
  return {G * e0[0] + O2 * kkx[0], G * e0[1] + O2 * kkx[1], G * e0[2] + O2 * kkx[2]};
}

XBoundReport verify_X_bounds(const Medium& m, const XBoundOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> ux(0.0, m.domain.rect.lx);
  std::uniform_real_distribution<double> uy(0.0, m.domain.rect.ly);
  std::uniform_real_distribution<double> ulog(opt.log10_min, opt.log10_max);
  std::uniform_real_distribution<double> uang(0.0, 2.0 * 3.141592653589793);
  const double a = m.a();
  const double lam = m.lambda();
  const double chi2 = m.chi_star() * m.chi_star();
  XBoundReport rep;
  rep.worst_lower_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < opt.samples; ++k) {
    const Point x{ux(rng), uy(rng), 0.0};
    const double z = (k % 16 == 0) ? 0.0 : std::pow(10.0, ulog(rng));
    const double ny = std::pow(10.0, ulog(rng));
    const double th = uang(rng);
    const Vec2 y{ny * std::cos(th), ny * std::sin(th)};
    const LocalLaw law = m.law_at(x);
    const WeightValues w = weights_from(law, m.phi(x), m.cbar());
    const double zeta = m.R_star(x) * std::pow(z, lam);
    InvertStats st;
    const Vec2 v = invert_F(law, zeta, y, kInverseTol, &st);
    rep.max_inverse_residual = std::max(rep.max_inverse_residual, st.residual);
    const double upper = w.W0 * std::pow(ny, 1.0 - a);
    const double ratio = norm2(v) / upper;
    rep.worst_upper_ratio = std::max(rep.worst_upper_ratio, ratio);
    if (ratio > 1.0 + opt.slack) ++rep.upper_violations;
    const double lower = w.W1 * std::pow(ny, 2.0 - a) / (chi2 * std::pow(1.0 + z, 2.0 * lam)) - w.W2;
    const double xy = v[0] * y[0] + v[1] * y[1];
    const double margin = (xy - lower) / (1.0 + std::abs(lower));
    rep.worst_lower_margin = std::min(rep.worst_lower_margin, margin);
    if (margin < -opt.slack) ++rep.lower_violations;
    ++rep.samples;
  }
  return rep;
}

Medium random_medium(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  Medium m;
  const int N = 1 + static_cast<int>(u01(rng) * 3.0);
  std::vector<double> deg{0.0};
  for (int i = 0; i < N; ++i) deg.push_back(uni(0.2, 3.0));
  std::sort(deg.begin() + 1, deg.end());
  for (int i = 2; i <= N; ++i) {
    if (deg[i] <= deg[i - 1]) deg[i] = deg[i - 1] + 0.1;
  }
  std::vector<FieldExpr> coeffs;
  for (int i = 0; i <= N; ++i) {
    const bool middle = i > 0 && i < N;
    if (middle && u01(rng) < 0.25) {
      coeffs.push_back(FieldExpr::constant(0.0));
      continue;
    }
    const double c = uni(0.2, 3.0);
    const double d = uni(-0.45, 0.45) * c;
    const int kx = 1 + static_cast<int>(u01(rng) * 3.0);
    const int ky = 1 + static_cast<int>(u01(rng) * 3.0);
    const std::string text = format_number(c) + " + " + presets::constant(d) + "*sin(" +
                             std::to_string(kx) + "*pi*x)*cos(" + std::to_string(ky) + "*pi*y)";
    coeffs.push_back(FieldExpr::parse(text));
  }
  m.law = ForchheimerLaw(deg, coeffs);
  if (u01(rng) < 0.5) {
    m.eos = FluidEOS::isentropic(uni(0.5, 2.0), uni(1.0, 2.0));
  } else {
    m.eos = FluidEOS::slightly_compressible(uni(0.05, 2.0));
  }
  m.rotation.omega_tilde = uni(0.0, 3.0);
  m.rotation.gravity_tilde = uni(0.0, 2.0);
  m.rotation.gravity_angle = uni(0.0, 6.283185307179586);
  m.domain.rect = {1.0, 1.0};
  const double p0 = uni(0.3, 0.7);
  const double p1 = uni(-0.2, 0.2);
  m.domain.porosity = FieldExpr::parse(presets::affine(p0, p1, -p1 / 2.0));
  return m;
}

}  // namespace rotforch
