#include "rotforch/exponents.hpp"

#include <algorithm>
#include <cmath>

#include "rotforch/errors.hpp"
#include "rotforch/field_expr.hpp"

namespace rotforch {

namespace {

void require(bool ok, const std::string& inequality, const std::string& detail) {
  if (!ok) throw InvalidExponent(inequality, detail);
}

std::string num(double v) { return format_number(v); }

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

IdentityCheck make_check(std::string name, double lhs, double rhs) {
  const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return {std::move(name), lhs, rhs, std::abs(lhs - rhs) / scale};
}

}  // namespace

double theta_of(const SobolevExponents& e, double alpha, double r) {
  return (alpha + 2.0 * r) / (alpha * (1.0 + e.r_star) + 2.0 * (e.p - e.s));
}

double mu_of(const SobolevExponents& e, double r, double theta) {
  return (r + theta * (e.s - e.p)) / (1.0 - theta);
}

SobolevExponents compute_sobolev_exponents(int n, double p, double s, double beta, double r1,
                                           double r, double alpha) {
  require(n >= 2, "n >= 2", "dimension " + std::to_string(n));
  require(p > 1.0, "p > 1", "p = " + num(p));
  require(r1 > n / (n + p) && r1 < 1.0, "n/(n+p) < r1 < 1", "r1 = " + num(r1));
  require(r1 * p >= 1.0 && r1 * p < n, "1 <= r1 p < n", "r1 p = " + num(r1 * p));
  require(r >= 0.0, "r >= 0", "r = " + num(r));
  require(beta > 0.0, "beta > 0", "beta = " + num(beta));

  SobolevExponents e;
  e.n = n;
  e.p = p;
  e.s = s;
  e.beta = beta;
  e.r1 = r1;
  e.r = r;
  e.alpha = alpha;
  e.r_star = 1.0 + p / n - 1.0 / r1;
  e.r_tilde = (r * p + s - p) / (p - 1.0);

  require(alpha >= s, "alpha >= s", "alpha = " + num(alpha) + ", s = " + num(s));
  require(alpha > (p - s) / (p - 1.0), "alpha > (p-s)/(p-1)", "alpha = " + num(alpha));

  e.m = (alpha - s + p) / p;
  e.theta = theta_of(e, alpha, r);
  e.theta_tilde = theta_of(e, alpha, e.r_tilde);
  require(e.theta > 0.0 && e.theta < 1.0, "theta in (0,1)", "theta = " + num(e.theta));
  require(e.theta_tilde > 0.0 && e.theta_tilde < 1.0, "theta~ in (0,1)",
          "theta~ = " + num(e.theta_tilde));
  e.mu1 = mu_of(e, r, e.theta);
  e.mu1_tilde = mu_of(e, e.r_tilde, e.theta_tilde);
  e.beta_star =
      beta / ((p - 1.0) * (1.0 - e.theta_tilde) * (1.0 + e.mu1_tilde / alpha));

  e.kappa = 1.0 + e.r_star / 2.0 + (p - s) / alpha;
  e.theta0 = 1.0 / (1.0 + e.r_star * alpha / (2.0 * (alpha - s + p)));
  e.theta0_hat = e.theta0 - beta / (e.kappa * alpha);

  e.mu_hat1 = e.mu1 + beta * e.theta / (1.0 - e.theta);
  e.mu_hat2 = std::min(r, e.mu1);
  e.mu_hat3 = std::max(r, e.mu_hat1);
  e.beta_hat1 = beta * e.theta / (1.0 - e.theta) * (1.0 + 1.0 / alpha);
  e.beta_hat2 = beta / (p - 1.0) * (1.0 + 1.0 / alpha);
  e.beta_hat3 = beta / (1.0 - e.theta_tilde) * (1.0 / (p - 1.0) + e.theta_tilde);
  e.mu_hat4 = std::min({r, e.mu1, e.r_tilde, e.mu1_tilde});
  e.mu_hat5 = std::max({r, e.mu_hat1, e.r_tilde + beta / (p - 1.0), e.mu1_tilde + e.beta_hat3});
  return e;
}

double ExponentBundle::kappa_at(double alpha) const {
  return 1.0 + r_star / 2.0 + (1.0 - lambda - a) / alpha;
}

double ExponentBundle::nu1(double alpha) const {
  return (alpha - h1) / (1.0 + 1.0 / (alpha * (1.0 + r_star / 2.0)));
}

double ExponentBundle::nu2(double alpha) const {
  return (alpha + h3) * (1.0 + 3.0 * lambda / alpha);
}

ExponentBundle compute_exponents(const ExponentInputs& in) {
  const double a = in.a;
  const double lam = in.lambda;
  const int n = in.n;
  require(n == 2, "n = 2", "only the planar case is supported, got n = " + std::to_string(n));
  require(a > 0.0 && a < 1.0, "0 < a < 1", "a = " + num(a));
  require(lam > 0.0 && lam <= 1.0, "0 < lambda <= 1", "lambda = " + num(lam));
  require(in.r1 > n / (n + 2.0 - a) && in.r1 < 1.0 && in.r1 * (2.0 - a) > 1.0,
          "n/(n+2-a) < r1 < 1 < r1(2-a)", "r1 = " + num(in.r1));
  const double r_lower = std::max({0.0, lam * (5.0 - 4.0 * a) - 1.0, (1.0 - a - lam) / (2.0 - a)});
  require(in.r > r_lower, "r > max{0, lambda(5-4a)-1, (1-a-lambda)/(2-a)}",
          "r = " + num(in.r) + ", bound = " + num(r_lower));

  ExponentBundle b;
  static_cast<SobolevExponents&>(b) =
      compute_sobolev_exponents(n, 2.0 - a, lam + 1.0, 2.0 * lam, in.r1, in.r, in.alpha);
  b.a = a;
  b.lambda = lam;

  const double rs = b.r_star;
  b.theta_dstar = 1.0 / (1.0 + rs / 2.0);
  b.alpha_dstar = 2.0 * lam * (2.0 + rs) / ((1.0 - a) * rs) + 2.0 / rs;
  b.alpha_star_terms = {
      2.0 * lam * in.r1 / (1.0 - in.r1),
      2.0 * (2.0 - a) * (in.r + a + lam - 1.0) / (rs * (1.0 - a)),
      b.alpha_dstar,
      2.0 * in.r * (1.0 + 2.0 / rs) + 4.0 * lam / rs,
      2.0 * b.r_tilde * (1.0 + 2.0 / rs) + 4.0 * lam / rs,
  };
  b.alpha_star = *std::max_element(b.alpha_star_terms.begin(), b.alpha_star_terms.end());

  const double td = b.theta_dstar;
  b.mu_star = std::max((in.r + td * (a + 3.0 * lam)) / (1.0 - td),
                       (b.r_tilde + td * (a + 3.0 * lam)) / (1.0 - td) +
                           2.0 * lam / ((1.0 - td) * (1.0 - a)));
  b.gamma_star = std::max(2.0 * (3.0 - 2.0 * a) + 4.0 * (2.0 - a) * td / (1.0 - td),
                          2.0 / (1.0 - a) + 2.0 * (2.0 - a) / (1.0 - a) * td / (1.0 - td));

  b.kappa_tilde = in.kappa_tilde;
  for (int i = 0; i < 5; ++i) b.pp[i] = in.p[i];
  const double p3 = b.pp[2];
  const double p5 = b.pp[4];
  b.pp[5] = p5 * (p3 * (2.0 - a) - 1.0) / (1.0 - a);
  for (int i = 0; i < 6; ++i) b.qq[i] = b.pp[i] / (b.pp[i] - 1.0);

  const double d3 = p3 * (2.0 - a) - 1.0;
  b.gamma_moser = 2.0 * std::max(3.0 - 2.0 * a, 1.0 / d3);
  b.h1 = lam + 1.0;
  b.h2 = std::max({0.0, lam * (5.0 - 4.0 * a) - 1.0, (a + 3.0 * lam - 1.0) / d3});
  b.h3 = std::max(b.h2, 1.0 - a - lam);
  b.mu_bar = 1.0 + rs / 2.0 + std::min(1.0 - in.r1, 2.0 * lam / (lam + 1.0));

  const double kt = b.kappa_tilde;
  const double p2 = b.pp[1];
  const double p6 = b.pp[5];
  const double t_p2 = p2 * (lam * (5.0 - 4.0 * a) - 1.0) / (kt - p2);
  const double t_p5 = p5 * (a + 3.0 * lam - 1.0) / ((1.0 - a) * (kt - p6));
  const double t_k1 = (1.0 - lam - a) / (kt - 1.0);
  const double t_r1 = 2.0 * lam / (1.0 - in.r1);
  const double t_k2 = (lam + a - 1.0) / (1.0 + rs / 2.0 - kt * kt);
  b.alpha0_min_terms = {1.0 + lam, t_p2, t_p5, t_k1, t_r1, t_k2};
  b.alpha0_min = max_of(b.alpha0_min_terms);
  b.alpha0_min_sup_terms = {
      t_k1,
      t_p2,
      t_p5,
      t_r1,
      t_k2,
      2.0 * (2.0 - a) * (in.r + a + lam - 1.0) / (kt * rs * (1.0 - a)),
      b.alpha_dstar / kt,
      (2.0 * std::max(in.r, b.r_tilde) * (1.0 + 2.0 / rs) + 4.0 * lam / rs) / kt,
  };
  b.alpha0_min_sup = max_of(b.alpha0_min_sup_terms);
  return b;
}

void check_moser_parameters(const ExponentBundle& b) {
  const double kt = b.kappa_tilde;
  require(kt > 1.0 && kt < std::sqrt(1.0 + b.r_star / 2.0), "1 < kappa~ < sqrt(1 + r_*/2)",
          "kappa~ = " + num(kt));
  for (int i = 0; i < 5; ++i) {
    require(b.pp[i] > 1.0, "p" + std::to_string(i + 1) + " > 1", "got " + num(b.pp[i]));
  }
  require(b.pp[0] < kt, "p1 < kappa~", "p1 = " + num(b.pp[0]));
  require(b.pp[1] < kt, "p2 < kappa~", "p2 = " + num(b.pp[1]));
  require(b.pp[2] * b.pp[3] < kt, "p3 p4 < kappa~", "p3 p4 = " + num(b.pp[2] * b.pp[3]));
  require(b.pp[2] * (2.0 - b.a) > 1.0, "p3 (2-a) > 1", "p3 = " + num(b.pp[2]));
  require(b.pp[5] < kt, "p6 < kappa~", "p6 = " + num(b.pp[5]));
}

AlphaChoice default_alpha(const ExponentInputs& in) {
  const ExponentBundle b = compute_exponents(in);
  check_moser_parameters(b);
  const double floor0 = std::max({b.alpha0_min, b.alpha0_min_sup, b.alpha_star / b.kappa_tilde});
  AlphaChoice c;
  c.alpha0 = 1.05 * floor0;
  c.beta1 = b.kappa_tilde * c.alpha0;
  return c;
}

std::vector<IdentityCheck> check_identities(const SobolevExponents& e) {
  const double a = e.alpha;
  std::vector<IdentityCheck> out;
  out.push_back(make_check("(1-theta0) kappa = r_*/2", (1.0 - e.theta0) * e.kappa, e.r_star / 2.0));
  out.push_back(make_check("beta_* (1-theta~)(1+mu~1/alpha) = beta/(p-1)",
                           e.beta_star * (1.0 - e.theta_tilde) * (1.0 + e.mu1_tilde / a),
                           e.beta / (e.p - 1.0)));
  out.push_back(make_check("mu1 (1-theta) - theta (s-p) = r",
                           e.mu1 * (1.0 - e.theta) - e.theta * (e.s - e.p), e.r));
  out.push_back(make_check("r~ (p-1) = r p + s - p", e.r_tilde * (e.p - 1.0),
                           e.r * e.p + e.s - e.p));
  out.push_back(make_check("kappa alpha = alpha (1 + r_*/2) + p - s", e.kappa * a,
                           a * (1.0 + e.r_star / 2.0) + e.p - e.s));
  out.push_back(make_check("theta0^ kappa alpha = theta0 kappa alpha - beta",
                           e.theta0_hat * e.kappa * a, e.theta0 * e.kappa * a - e.beta));
  return out;
}

std::vector<IdentityCheck> check_identities(const ExponentBundle& b) {
  auto out = check_identities(static_cast<const SobolevExponents&>(b));
  if (b.alpha >= b.alpha_star) {
    out.push_back({"theta <= theta_**", b.theta, b.theta_dstar,
                   std::max(0.0, b.theta - b.theta_dstar)});
    out.push_back({"theta~ <= theta_**", b.theta_tilde, b.theta_dstar,
                   std::max(0.0, b.theta_tilde - b.theta_dstar)});
  }
  return out;
}

}  // namespace rotforch
