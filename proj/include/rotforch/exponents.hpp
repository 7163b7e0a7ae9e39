#pragma once

// Exponent algebra for the L^alpha estimate and the Moser iteration.
//
// Base substitutions: p = 2 - a, s = lambda + 1, beta = 2 lambda,
// r_* = 1 + p/n - 1/r1, r~ = (r p + s - p) / (p - 1).

#include <array>
#include <string>
#include <vector>

namespace rotforch {

// Exponents of the weighted interpolation inequalities, for general
// (p, s, beta). These are the quantities shared by all of the
// parabolic embedding and trace estimates.
struct SobolevExponents {
  int n = 2;
  double p = 1.5;
  double s = 2.0;
  double beta = 2.0;
  double r1 = 0.8;
  double r = 0.0;
  double alpha = 16.0;

  double r_star = 0.0;
  double r_tilde = 0.0;
  double m = 0.0;
  double theta = 0.0;
  double theta_tilde = 0.0;
  double mu1 = 0.0;
  double mu1_tilde = 0.0;
  double beta_star = 0.0;
  double kappa = 0.0;
  double theta0 = 0.0;
  double theta0_hat = 0.0;
  double mu_hat1 = 0.0, mu_hat2 = 0.0, mu_hat3 = 0.0, mu_hat4 = 0.0, mu_hat5 = 0.0;
  double beta_hat1 = 0.0, beta_hat2 = 0.0, beta_hat3 = 0.0;
};

// Theta(alpha, r) = (alpha + 2r) / (alpha (1 + r_*) + 2 (p - s)).
double theta_of(const SobolevExponents& e, double alpha, double r);
// Lambda(r, theta) = (r + theta (s - p)) / (1 - theta).
double mu_of(const SobolevExponents& e, double r, double theta);

// Fills the derived fields. Throws InvalidExponent on r1 outside
// (n/(n+p), 1), r1 p outside [1, n), r < 0, or theta outside (0, 1).
SobolevExponents compute_sobolev_exponents(int n, double p, double s, double beta, double r1,
                                           double r, double alpha);

struct ExponentInputs {
  int n = 2;
  double a = 0.5;
  double lambda = 1.0;
  double r1 = 0.8;
  double r = 2.5;
  double alpha = 100.0;
  double kappa_tilde = 1.1;
  std::array<double, 5> p{1.05, 1.02, 1.005, 1.05, 1.02};
};

struct ExponentBundle : SobolevExponents {
  double a = 0.5;
  double lambda = 1.0;

  double theta_dstar = 0.0;
  double alpha_dstar = 0.0;
  double alpha_star = 0.0;
  std::array<double, 5> alpha_star_terms{};
  double mu_star = 0.0;
  double gamma_star = 0.0;

  // Moser iteration parameters.
  double kappa_tilde = 1.1;
  std::array<double, 6> pp{};  // p1..p6
  std::array<double, 6> qq{};  // conjugates q1..q6
  double gamma_moser = 0.0;
  double h1 = 0.0, h2 = 0.0, h3 = 0.0;
  double mu_bar = 0.0;
  double alpha0_min = 0.0;       // threshold for the iteration chain
  std::vector<double> alpha0_min_terms;
  double alpha0_min_sup = 0.0;   // threshold for the sup bound, all eight terms
  std::vector<double> alpha0_min_sup_terms;

  double kappa_at(double alpha) const;  // 1 + r_*/2 + (1 - lambda - a)/alpha
  double nu1(double alpha) const;
  double nu2(double alpha) const;
};

// Throws InvalidExponent naming the violated condition.
ExponentBundle compute_exponents(const ExponentInputs& in);

// Throws InvalidExponent unless kappa~ and p1..p5 satisfy the Moser
// iteration hypotheses.
void check_moser_parameters(const ExponentBundle& b);

// Default alpha: 5% above the largest of alpha_* and the sup-bound
// thresholds (taken at beta_1 = kappa~ alpha_0).
struct AlphaChoice {
  double alpha0;
  double beta1;
};
AlphaChoice default_alpha(const ExponentInputs& in);

struct IdentityCheck {
  std::string name;
  double lhs;
  double rhs;
  double rel_error;
};

std::vector<IdentityCheck> check_identities(const SobolevExponents& e);

// The algebraic identities plus theta <= theta_** and theta~ <= theta_**
// when alpha >= alpha_*. For the inequality entries rel_error is the
// positive part of (lhs - rhs).
std::vector<IdentityCheck> check_identities(const ExponentBundle& b);

}  // namespace rotforch
