#include "rotforch/inequality_harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "rotforch/errors.hpp"
#include "rotforch/functionals.hpp"

namespace rotforch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLog2 = std::log(2.0);

double lse2(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double lse(std::initializer_list<double> v) {
  double acc = -kInf;
  for (double x : v) acc = lse2(acc, x);
  return acc;
}

double safe_log(double v) { return v > 0.0 ? std::log(v) : -kInf; }

// ---------------------------------------------------------------- elementary

struct Elem {
  double lhs, rhs;  // inequality lhs <= rhs
};

double margin(const Elem& e) {
  const double scale = std::max({std::abs(e.lhs), std::abs(e.rhs), 1e-300});
  return (e.rhs - e.lhs) / scale;
}

}  // namespace

std::vector<ElementaryReport> fuzz_elementary(std::size_t count, std::uint64_t seed, double slack) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto logu = [&] {
    // log-uniform on [1e-6, 1e6], with an occasional exact zero
    if (unit(rng) < 0.01) return 0.0;
    return std::pow(10.0, -6.0 + 12.0 * unit(rng));
  };
  auto expo = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  std::vector<ElementaryReport> out(5);
  const char* names[] = {"power-sum-sharp", "power-sum", "difference-lower", "three-power",
                         "power-one"};
  for (int k = 0; k < 5; ++k) {
    out[k].name = names[k];
    out[k].worst_margin = kInf;
  }
  auto record = [&](int k, const Elem& e) {
    const double m = margin(e);
    ++out[k].samples;
    out[k].worst_margin = std::min(out[k].worst_margin, m);
    if (m < -slack) ++out[k].violations;
  };

  for (std::size_t i = 0; i < count; ++i) {
    {
      const double x = logu(), y = logu(), p = expo(1e-3, 10.0);
      if (x + y > 0.0) {
        const double lhs = std::pow(x + y, p);
        record(0, {lhs, std::pow(2.0, std::max(p - 1.0, 0.0)) * (std::pow(x, p) + std::pow(y, p))});
        record(1, {lhs, std::pow(2.0, p) * (std::pow(x, p) + std::pow(y, p))});
      } else {
        record(0, {0.0, 0.0});
        record(1, {0.0, 0.0});
      }
    }
    {
      const double p = expo(1e-3, 10.0);
      std::array<double, 2> x{}, y{};
      for (int d = 0; d < 2; ++d) {
        x[d] = (unit(rng) < 0.5 ? -1.0 : 1.0) * logu();
        y[d] = (unit(rng) < 0.5 ? -1.0 : 1.0) * logu();
      }
      const double nd = std::hypot(x[0] - y[0], x[1] - y[1]);
      const double nx = std::hypot(x[0], x[1]);
      const double ny = std::hypot(y[0], y[1]);
      // |x-y|^p >= 2^{-(p-1)+}|x|^p - |y|^p, as lhs' <= rhs'
      const double a = std::pow(2.0, -std::max(p - 1.0, 0.0)) * std::pow(nx, p);
      const double b = std::pow(ny, p);
      const double c = std::pow(nd, p);
      const double scale = std::max({a, b, c, 1e-300});
      const double m = (c + b - a) / scale;
      ++out[2].samples;
      out[2].worst_margin = std::min(out[2].worst_margin, m);
      if (m < -slack) ++out[2].violations;
    }
    {
      std::array<double, 3> e{expo(-5.0, 5.0), expo(-5.0, 5.0), expo(-5.0, 5.0)};
      std::sort(e.begin(), e.end());
      double x = logu();
      if (x == 0.0 && e[0] <= 0.0) x = 1e-3;
      record(3, {std::pow(x, e[1]), std::pow(x, e[0]) + std::pow(x, e[2])});
    }
    {
      std::array<double, 2> e{expo(0.0, 5.0), expo(0.0, 5.0)};
      std::sort(e.begin(), e.end());
      double x = logu();
      if (x == 0.0 && e[0] == 0.0) x = 1e-3;
      record(4, {std::pow(x, e[0]), 1.0 + std::pow(x, e[1])});
    }
  }
  return out;
}

// -------------------------------------------------------------------- corpus

std::string FunctionCorpus::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  for (const CorpusMember& m : members) {
    mix(m.u_text);
    mix(m.phi_text);
    mix(m.W_text);
    mix(m.omega_text);
    mix(format_number(m.tamp) + "," + format_number(m.tphase));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FunctionCorpus generate_corpus(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto U = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  auto pick = [&](int n) { return static_cast<int>(unit(rng) * n) % n; };
  auto num = [](double v) { return format_number(v); };
  static const double kDistPowers[] = {0.5, 1.0, 2.0};

  auto weight = [&](bool allow_zero_floor) -> std::string {
    const double floor = allow_zero_floor && unit(rng) < 0.3 ? 0.0 : U(0.05, 1.0);
    switch (pick(4)) {
      case 0: return presets::constant(U(0.2, 2.0));
      case 1: return presets::affine(floor + 1.05, U(-0.5, 0.5), U(-0.5, 0.5));
      case 2: return presets::radial_bump(floor, U(0.2, 2.0), U(0.2, 0.8), U(0.2, 0.8), U(0.15, 0.5));
      default: return presets::boundary_power(floor + 0.05, U(0.5, 2.0), kDistPowers[pick(3)]);
    }
  };

  FunctionCorpus c;
  c.seed = seed;
  c.members.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    CorpusMember m;
    switch (i % 5) {
      case 0: {
        m.family = "trig";
        std::string u = num(U(-0.5, 1.0));
        for (int k = 0; k < 3; ++k) {
          u += " + " + num(U(-0.6, 0.6)) + "*cos(" + num((1 + pick(4)) * std::numbers::pi) +
               "*x + " + num(U(0.0, 3.0)) + ")*cos(" + num((1 + pick(4)) * std::numbers::pi) +
               "*y + " + num(U(0.0, 3.0)) + ")";
        }
        m.u_text = u;
        break;
      }
      case 1:
        m.family = "bump";
        m.u_text = presets::radial_bump(U(-0.3, 0.6), U(-1.5, 1.5), U(0.1, 0.9), U(0.1, 0.9),
                                        U(0.1, 0.6));
        break;
      case 2:
        m.family = "dist_power";
        m.u_text = presets::boundary_power(U(0.0, 0.5), U(0.5, 3.0), kDistPowers[pick(3)]);
        break;
      case 3:
        m.family = "layer";
        m.u_text = presets::layered(U(-0.5, 1.0), U(-1.0, 1.0), U(0.2, 0.8), U(0.05, 0.4));
        break;
      default:
        m.family = "checkerboard";
        m.u_text = presets::checkerboard(U(-0.5, 1.0), U(-1.0, 1.0), 1 + pick(3));
        break;
    }
    m.phi_text = weight(false);
    m.W_text = weight(false);
    m.omega_text = unit(rng) < 0.3 ? m.phi_text : weight(true);
    m.tamp = U(0.0, 0.9);
    m.tphase = U(0.0, 2.0 * std::numbers::pi);
    c.members.push_back(std::move(m));
  }
  return c;
}

// ------------------------------------------------------------------ sampling

namespace {

struct Sample {
  int n = 0;
  double h = 0.0;
  std::vector<double> u, g, phi, W, omega;  // cell centres
  std::vector<double> ub;                   // boundary edge midpoints
};

Sample sample_member(const CorpusMember& m, int n) {
  const FieldExpr u = FieldExpr::parse(m.u_text);
  const FieldExpr ux = u.derivative(Variable::x);
  const FieldExpr uy = u.derivative(Variable::y);
  const FieldExpr phi = FieldExpr::parse(m.phi_text);
  const FieldExpr W = FieldExpr::parse(m.W_text);
  const FieldExpr om = FieldExpr::parse(m.omega_text);
  Sample s;
  s.n = n;
  s.h = 1.0 / n;
  const std::size_t N = static_cast<std::size_t>(n) * n;
  s.u.resize(N);
  s.g.resize(N);
  s.phi.resize(N);
  s.W.resize(N);
  s.omega.resize(N);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      EvalContext c;
      c.x = (i + 0.5) * s.h;
      c.y = (j + 0.5) * s.h;
      const std::size_t k = static_cast<std::size_t>(j) * n + i;
      s.u[k] = u(c);
      s.g[k] = std::hypot(ux(c), uy(c));
      s.phi[k] = phi(c);
      s.W[k] = W(c);
      s.omega[k] = om(c);
      if (!(s.phi[k] > 0.0) || !(s.W[k] > 0.0) || !(s.omega[k] >= 0.0) ||
          !std::isfinite(s.u[k]) || !std::isfinite(s.g[k])) {
        throw FieldDomainError("corpus member has an inadmissible value at a cell centre");
      }
    }
  }
  s.ub.reserve(4 * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double q = (i + 0.5) * s.h;
    for (auto [x, y] : {std::pair{q, 0.0}, {q, 1.0}, {0.0, q}, {1.0, q}}) {
      EvalContext c;
      c.x = x;
      c.y = y;
      s.ub.push_back(u(c));
    }
  }
  return s;
}

// log of the midpoint-rule integral of exp(f(k)) over the cells.
template <class F>
double log_int(const Sample& s, F f) {
  std::vector<double> v(s.u.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(k);
  return log_sum_exp(v) + 2.0 * std::log(s.h);
}

template <class F>
double log_bint(const Sample& s, F f) {
  std::vector<double> v(s.ub.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(s.ub[k]);
  return log_sum_exp(v) + std::log(s.h);
}

// Logs of |u| and |grad u| per cell, and the weight integrals that do not
// depend on eps or the constants.
struct Logs {
  std::vector<double> lu, lg, lphi, lW, lom;
  double logJ = 0.0;      // int |u|^alpha phi
  double logIstar = 0.0;  // int |u|^{alpha-s}(1+|u|)^{-beta}|grad u|^p W_*
  double logE1 = 0.0;
  double logG1 = 0.0, logG3 = 0.0, logG4 = 0.0, logG2t = 0.0, logG5t = 0.0;
};

Logs compute_logs(const Sample& s, const SobolevExponents& e) {
  Logs L;
  const std::size_t N = s.u.size();
  L.lu.resize(N);
  L.lg.resize(N);
  L.lphi.resize(N);
  L.lW.resize(N);
  L.lom.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    L.lu[k] = safe_log(std::abs(s.u[k]));
    L.lg[k] = safe_log(s.g[k]);
    L.lphi[k] = std::log(s.phi[k]);
    L.lW[k] = std::log(s.W[k]);
    L.lom[k] = safe_log(s.omega[k]);
  }
  const double a = e.alpha, p = e.p, sx = e.s, b = e.beta, r1 = e.r1;
  L.logJ = log_int(s, [&](std::size_t k) { return a * L.lu[k] + L.lphi[k]; });
  L.logIstar = log_int(s, [&](std::size_t k) {
    return (a - sx) * L.lu[k] - b * std::log1p(std::abs(s.u[k])) + p * L.lg[k] + L.lW[k];
  });
  L.logE1 = std::log1p(std::exp(log_int(s, [&](std::size_t k) { return L.lphi[k]; })));
  const double e1 = (a * (p - 1.0) + sx - p) / a;
  const double q1 = (a - sx + p) / (a * (p - 1.0) + sx - p);
  L.logG1 = e1 * log_int(s, [&](std::size_t k) { return -q1 * L.lphi[k]; });
  const double g3 = 1.0 + e.mu1 / a;
  L.logG3 = g3 * log_int(s, [&](std::size_t k) {
    return -L.lphi[k] + L.lom[k] / ((1.0 - e.theta) * g3);
  });
  L.logG4 = g3 * log_int(s, [&](std::size_t k) { return -L.lphi[k]; });
  const double d = a * (1.0 - r1) - r1 * b;
  if (d > 0.0) {
    L.logG2t = d / (a * r1) * log_int(s, [&](std::size_t k) {
                 return -(r1 * b / d) * L.lphi[k] - (r1 * a / d) * L.lW[k];
               });
  } else {
    L.logG2t = kInf;
  }
  const double bs = e.beta_star;
  if (a > bs) {
    L.logG5t = (a - bs) / a * (1.0 + e.mu1_tilde / a) * log_int(s, [&](std::size_t k) {
                 return -((a + bs) / (a - bs)) * L.lphi[k] - (bs / b) * (a / (a - bs)) * L.lW[k];
               });
  } else {
    L.logG5t = kInf;
  }
  return L;
}

double logD1(double c4, double z, double eta, double p) {
  return eta * p * (std::log(c4) + z * kLog2);
}
double logD2(double c3, double z, double eta, double p) {
  return eta * p / (1.0 - eta) * (std::log(c3) + std::log(z) + z * kLog2);
}

// log min{J^{1+lo/alpha} + J^{1+hi/alpha}, (1+J)^{1+hi/alpha}}
double log_Jfactor(double logJ, double lo, double hi, double alpha) {
  const double a = lse2((1.0 + lo / alpha) * logJ, (1.0 + hi / alpha) * logJ);
  const double b = (1.0 + hi / alpha) * std::log1p(std::exp(logJ));
  return std::min(a, b);
}

// Base weighted Sobolev inequality with W = (1+|u|)^{-beta} W_*, as a
// function of the common constant c = c3 = c4. Returns log LHS and the
// three log RHS pieces (the c-dependent ones at c = 1).
struct BaseTerms {
  double logL, t0, t1, t2, w1, w2;  // log RHS = lse(t0, t1 + w1 log c, t2 + w2 log c)
};

BaseTerms base_terms(const Sample& s, const Logs& L, const SobolevExponents& e, double eps) {
  const double a = e.alpha, p = e.p, th = e.theta, r1 = e.r1, b = e.beta;
  BaseTerms t;
  t.logL = log_int(s, [&](std::size_t k) { return (a + e.r) * L.lu[k] + L.lom[k]; });
  // int |u|^{alpha-s}|grad u|^p W with the u-dependent W equals I_*
  t.t0 = std::log(eps) + L.logIstar;
  const double logG2 = (1.0 - r1) / r1 * log_int(s, [&](std::size_t k) {
                         return -(r1 / (1.0 - r1)) *
                                (L.lW[k] - b * std::log1p(std::abs(s.u[k])));
                       });
  const double logPhi1 = th * L.logG1 + (1.0 - th) * L.logG3;
  const double logPhi2 = th / (1.0 - th) * logG2 + L.logG3;
  t.w1 = th * p;
  t.t1 = logD1(1.0, e.m, th, p) + logPhi1 + (1.0 + e.r / a) * L.logJ;
  t.w2 = th * p / (1.0 - th);
  t.t2 = -th / (1.0 - th) * std::log(eps) + logD2(1.0, e.m, th, p) + logPhi2 +
         (1.0 + e.mu1 / a) * L.logJ;
  return t;
}

// Smallest log c with lse(t0, t1 + w1 log c, t2 + w2 log c) >= logL.
double min_log_c(const BaseTerms& t) {
  if (t.logL == -kInf || t.t0 >= t.logL) return -kInf;
  auto ok = [&](double lc) { return lse({t.t0, t.t1 + t.w1 * lc, t.t2 + t.w2 * lc}) >= t.logL; };
  double lo = -700.0, hi = 700.0;
  if (ok(lo)) return -kInf;
  if (!ok(hi)) return kInf;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

SobolevExponents harness_exponents(const HarnessParams& hp) {
  return compute_sobolev_exponents(2, hp.p, hp.s, hp.beta, hp.r1, hp.r, hp.alpha);
}

std::vector<Sample> sample_all(const FunctionCorpus& corpus, int n) {
  std::vector<Sample> out;
  out.reserve(corpus.members.size());
  for (const CorpusMember& m : corpus.members) out.push_back(sample_member(m, n));
  return out;
}

double time_factor(const CorpusMember& m, double t) {
  return 1.0 + m.tamp * std::sin(2.0 * std::numbers::pi * t + m.tphase);
}

}  // namespace

// --------------------------------------------------------------- estimation

EmpiricalConstants estimate_constants(const FunctionCorpus& corpus, const HarnessParams& hp) {
  if (corpus.members.size() < 50) {
    throw InvalidInput("constant estimation needs at least 50 corpus members, got " +
                       std::to_string(corpus.members.size()));
  }
  const SobolevExponents e = harness_exponents(hp);
  const std::vector<Sample> samples = sample_all(corpus, hp.quad_n);

  // Sobolev with exponent q = r1 p applied to u and |u|^m.
  const double q = hp.r1 * hp.p;
  const double qs = 2.0 * q / (2.0 - q);
  double log_c7 = -kInf;
  // Trace: int_Gamma |f| <= c5 int |f| + c6 int |grad f| with c5 the
  // constant-function ratio (perimeter over area) of the unit square.
  const double c5 = 4.0;
  double c6 = 0.0;
  double log_c = -kInf;

  for (const Sample& s : samples) {
    const Logs L = compute_logs(s, e);
    for (double k_pow : {1.0, e.m, hp.alpha + hp.r}) {
      // f = |u|^k, |grad f| = k |u|^{k-1} |grad u|
      auto lf = [&](std::size_t i) { return k_pow * L.lu[i]; };
      auto lgf = [&](std::size_t i) {
        return std::log(k_pow) + (k_pow - 1.0) * L.lu[i] + L.lg[i];
      };
      if (k_pow != hp.alpha + hp.r) {
        const double num = log_int(s, [&](std::size_t i) { return qs * lf(i); }) / qs;
        const double den =
            lse2(log_int(s, [&](std::size_t i) { return q * lgf(i); }),
                 log_int(s, [&](std::size_t i) { return q * lf(i); })) / q;
        if (num > -kInf) log_c7 = std::max(log_c7, num - den);
      }
      const double B = std::exp(log_bint(s, [&](double ub) {
        return k_pow * safe_log(std::abs(ub));
      }));
      const double A = std::exp(log_int(s, lf));
      const double D = std::exp(log_int(s, lgf));
      if (D > 0.0 && std::isfinite(B) && std::isfinite(A)) c6 = std::max(c6, (B - c5 * A) / D);
    }
    for (double eps : hp.eps) log_c = std::max(log_c, min_log_c(base_terms(s, L, e, eps)));
  }

  EmpiricalConstants c;
  c.safety = hp.safety;
  const double c_base = log_c == -kInf ? 1e-12 : std::max(std::exp(log_c), 1e-12);
  c.c3 = c.c4 = hp.safety * c_base;
  c.c5 = hp.safety * c5;
  c.c6 = hp.safety * std::max(c6, 1e-3);
  c.c7 = hp.safety * std::exp(log_c7);
  c.corpus_hash = corpus.hash();
  c.corpus_size = corpus.members.size();
  c.corpus_seed = corpus.seed;
  return c;
}

// --------------------------------------------------------------- composites

namespace {

void note(LemmaReport& rep, double logL, double logR) {
  ++rep.checked;
  if (logL == -kInf) return;  // zero left-hand side
  const double m = logR - logL;
  rep.min_log_margin = std::min(rep.min_log_margin, m);
  if (m < -1e-12) ++rep.violations;
}

std::string precondition(const SobolevExponents& e, const std::string& lemma) {
  const double a = e.alpha;
  std::vector<std::pair<bool, std::string>> req = {
      {a >= e.s, "alpha >= s"},
      {a > (e.p - e.s) / (e.p - 1.0), "alpha > (p-s)/(p-1)"},
  };
  if (lemma == "weighted_sobolev") {
    req.push_back({a > 2.0 * (e.r + e.s - e.p) / e.r_star, "alpha > 2(r+s-p)/r_*"});
    req.push_back({a > e.r1 * e.beta / (1.0 - e.r1), "alpha > r1 beta/(1-r1)"});
  } else if (lemma == "trace") {
    req.push_back({e.r_tilde >= 0.0, "r~ >= 0"});
    req.push_back({a > 2.0 * (e.r_tilde + e.s - e.p) / e.r_star, "alpha > 2(r~+s-p)/r_*"});
    req.push_back({a > e.r1 * e.beta / (1.0 - e.r1), "alpha > r1 beta/(1-r1)"});
    req.push_back({a > e.beta_star, "alpha > beta_*"});
  } else {
    req.push_back({a > 2.0 * (e.s - e.p) / e.r_star, "alpha > 2(s-p)/r_*"});
    req.push_back({a >= e.beta / (1.0 - e.r1), "alpha >= beta/(1-r1)"});
  }
  for (const auto& [ok, what] : req) {
    if (!ok) return what;
  }
  return {};
}

}  // namespace

std::vector<LemmaReport> verify_composites(const FunctionCorpus& corpus,
                                           const EmpiricalConstants& c, const HarnessParams& hp) {
  const SobolevExponents e = harness_exponents(hp);
  const double a = e.alpha, p = e.p, th = e.theta, tt = e.theta_tilde, b = e.beta;

  std::vector<LemmaReport> reps(3);
  reps[0].lemma = "weighted_sobolev";
  reps[1].lemma = "trace";
  reps[2].lemma = "parabolic_sobolev";
  std::array<bool, 3> active{};
  for (int i = 0; i < 3; ++i) {
    reps[i].min_log_margin = kInf;
    reps[i].skip_reason = precondition(e, reps[i].lemma);
    active[i] = reps[i].skip_reason.empty();
    if (!active[i]) reps[i].skipped = corpus.members.size();
  }

  // Constant pieces.
  const double lc5 = std::log(c.c5);
  const double lz3 = p / (p - 1.0) * std::log(c.c6 * (a + e.r));
  const double lz1 = lc5 + logD1(c.c4, e.m, th, p);
  const double lz2 = lc5 / (1.0 - th) + logD2(c.c3, e.m, th, p);
  const double lz4 = lz3 + logD1(c.c4, e.m, tt, p);
  const double lz5 = lz3 / (1.0 - tt) + logD2(c.c3, e.m, tt, p);
  const double lz2t = (1.0 + e.beta_hat1) * kLog2 + lz2;
  const double lz4t = (1.0 + e.beta_hat2) * kLog2 + lz4;
  const double lz5t = (1.0 + e.beta_hat3 * (1.0 + 1.0 / a)) * kLog2 + lz5;

  // Parabolic lemma pieces.
  const double ka = e.kappa * a;
  const double nt = hp.time_nodes;
  const double dt = hp.T / nt;

  for (std::size_t mi = 0; mi < corpus.members.size(); ++mi) {
    const CorpusMember& member = corpus.members[mi];
    const Sample s = sample_member(member, hp.quad_n);
    const Logs L = compute_logs(s, e);
    const double logPhi1 = th * L.logG1 + (1.0 - th) * L.logG3;
    const double logPhi2t =
        th / (1.0 - th) * L.logG2t + L.logG3 + b * th / (a * (1.0 - th)) * L.logE1;
    const double logPhi3 = th * L.logG1 + (1.0 - th) * L.logG4;
    const double logPhi4t =
        b * th / (a * (1.0 - th)) * L.logE1 + th / (1.0 - th) * L.logG2t + L.logG4;
    const double logPhi6t =
        b / (a * (p - 1.0)) * L.logE1 + tt * L.logG1 + (1.0 - tt) * L.logG5t;
    const double logPhi7t =
        e.beta_hat3 / a * L.logE1 + tt / (1.0 - tt) * L.logG2t + L.logG5t;
    const double logLw = log_int(s, [&](std::size_t k) { return (a + e.r) * L.lu[k] + L.lom[k]; });
    const double logLt = log_bint(s, [&](double ub) { return (a + e.r) * safe_log(std::abs(ub)); });
    const double lJw = log_Jfactor(L.logJ, e.mu_hat2, e.mu_hat3, a);
    const double lJt = log_Jfactor(L.logJ, e.mu_hat4, e.mu_hat5, a);

    std::array<std::vector<double>, 2> rhs_by_eps;
    for (double eps : hp.eps) {
      const double le = std::log(eps);
      if (active[0]) {
        const double lPhi =
            lse2(logD1(c.c4, e.m, th, p) + logPhi1,
                 (1.0 + e.beta_hat1) * kLog2 - th / (1.0 - th) * le + logD2(c.c3, e.m, th, p) +
                     logPhi2t);
        const double R = lse2(le + L.logIstar, lPhi + lJw);
        note(reps[0], logLw, R);
        rhs_by_eps[0].push_back(R);
      }
      if (active[1]) {
        const double lPhi = lse({lz1 + logPhi3, -th / (1.0 - th) * le + lz2t + logPhi4t,
                                 -le / (p - 1.0) + lz4t + logPhi6t,
                                 -(1.0 / (p - 1.0) + p / (p - 1.0) * tt / (1.0 - tt)) * le + lz5t +
                                     logPhi7t});
        const double R = lse2(std::log(3.0 * eps) + L.logIstar, lPhi + lJt);
        note(reps[1], logLt, R);
        rhs_by_eps[1].push_back(R);
      }
    }
    // For each inequality, rhs(eps_min) + rhs(eps_max) >= 2 min_eps rhs.
    for (int i = 0; i < 2; ++i) {
      const auto& v = rhs_by_eps[i];
      if (v.size() < 2) continue;
      const double lo = *std::min_element(v.begin(), v.end());
      if (lse2(v.front(), v.back()) < kLog2 + lo - 1e-12) ++reps[i].eps_sanity_failures;
    }

    if (active[2]) {
      // u(x, t) = m(t) u(x) on midpoint nodes of (0, T).
      std::vector<double> lkap, lI, lJ2;
      double sup_norm = -kInf;
      for (int k = 0; k < hp.time_nodes; ++k) {
        const double mt = std::abs(time_factor(member, (k + 0.5) * dt));
        const double lm = safe_log(mt);
        lkap.push_back(std::log(dt) + log_int(s, [&](std::size_t i) {
                         return ka * (lm + L.lu[i]) + L.lphi[i];
                       }));
        lI.push_back(std::log(dt) + log_int(s, [&](std::size_t i) {
                       return (a - e.s) * (lm + L.lu[i]) -
                              b * std::log1p(mt * std::abs(s.u[i])) + p * (lm + L.lg[i]) +
                              L.lW[i];
                     }));
        lJ2.push_back(std::log(dt) + log_int(s, [&](std::size_t i) {
                        return (a - e.s + p) * (lm + L.lu[i]) + L.lphi[i];
                      }));
        sup_norm = std::max(sup_norm, lm + L.logJ / a);
      }
      const double logLHS = log_sum_exp(lkap) / ka;
      const double logE2 =
          e.r_star / 2.0 * log_int(s, [&](std::size_t i) { return (2.0 / e.r_star - 1.0) * L.lphi[i]; });
      const double r1 = e.r1;
      const double logE3 = (1.0 - r1) / r1 * std::log1p(std::exp(log_int(s, [&](std::size_t i) {
                             return r1 / (1.0 - r1) * std::log1p(1.0 / s.phi[i]) +
                                    r1 / ((1.0 - r1) * (1.0 - r1)) * std::log1p(1.0 / s.W[i]);
                           })));
      const double logPhi3h = (1.0 + b + 1.0 / r1) * kLog2 + p * std::log(c.c7) +
                              std::log(e.m) / r1 + b / a * L.logE1 + logE2 + logE3;
      const double R = (logPhi3h + lse2(log_sum_exp(lI), log_sum_exp(lJ2))) / ka +
                       lse2((1.0 - e.theta0) * sup_norm, (1.0 - e.theta0_hat) * sup_norm);
      note(reps[2], logLHS, R);
    }
  }
  return reps;
}

}  // namespace rotforch
