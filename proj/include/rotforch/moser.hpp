#pragma once

// Moser iteration schedule (beta_j = kappa~^j alpha0, t_j = sigma T (1 - 2^-j)),
// its infinite products, and the abstract bound for sequences satisfying
//   y_{j+1} <= A^{omega_j/kappa_j} (y_j^{r_j} + y_j^{s_j})^{1/kappa_j}.

#include <cstdint>
#include <vector>

#include "rotforch/exponents.hpp"

namespace rotforch {

// sum_{j >= j0} log(1 + c / (alpha0 kappa^j)), evaluated as a finite
// partial sum up to J plus the exact tail
//   sum_m (-1)^{m+1} (c/alpha0)^m / m * kappa^{-m(J+1)} / (1 - kappa^{-m}).
// Requires |c| < alpha0 kappa^{j0}.
double log_geometric_product(double c, double alpha0, double kappa, int j0, int J);
// Plain partial sum over j0 <= j <= J.
double log_geometric_partial(double c, double alpha0, double kappa, int j0, int J);

struct MoserSchedule {
  double alpha0 = 0.0;
  double kappa_tilde = 0.0;
  double sigma = 0.0;
  double T = 0.0;

  std::vector<double> beta;  // beta_0..beta_J
  std::vector<double> t;     // t_0..t_J
  std::vector<double> r_seq;  // nu1(beta_j)
  std::vector<double> s_seq;  // nu2(beta_j)

  double mu_tilde = 0.0;  // prod nu1(beta_j)/beta_j
  double nu_tilde = 0.0;  // prod nu2(beta_j)/beta_j
  double G = 0.0;         // prod_{k >= 1} nu2(beta_k)/beta_k
  double L0 = 0.0;        // sum (j+1)/beta_j
  double omega = 0.0;
  double omega0 = 0.0, omega1 = 0.0, omega2 = 0.0, omega3 = 0.0;

  // Truncation diagnostics.
  int J = 0;  // smallest J whose last raw factor changes the log product by < 1e-10 (cap 10^4)
  double raw_gap_60_120 = 0.0;       // |log prod_{<=60} - log prod_{<=120}|, tail not added
  double corrected_gap_60_120 = 0.0;  // same with the tail correction at both J
  double tail_bound = 0.0;  // |tail| of the log products beyond J

  // kappa(beta_j) beta_j / beta_{j+2} - 1 for j = 0..chain_terms.
  std::vector<double> chain_margin;
  double chain_min_margin() const;

  // log of [2^{1+mu_bar} c10 (kappa~ alpha0)^{6 + 5/(2(1-a))}]^omega.
  double log_C0_hat(double c10, double mu_bar, double a) const;
  // log of A_{T,sigma,alpha0}.
  double log_A(double c10, double mu_bar, double gamma, double a, double chi_star, double N3,
               double PsiT) const;
};

// Throws InvalidExponent when alpha0 does not exceed the six-term
// threshold (naming the binding term) or kappa~ / p_i are inadmissible.
MoserSchedule moser_schedule(const ExponentBundle& b, double alpha0, double sigma, double T,
                             int chain_terms = 50);

struct SequenceFamily {
  std::vector<double> kappa;
  std::vector<double> r;
  std::vector<double> s;
  std::vector<double> omega;
  std::size_t size() const { return kappa.size(); }
  void validate() const;
};

struct SequenceBound {
  double alpha_bar = 0.0;
  double beta_bar = 0.0;
  double gamma_bar = 0.0;
  double G = 1.0;
  double log_value = 0.0;  // -inf for y0 = 0
  double value = 0.0;
};

// Truncated sums and products over the family. Throws DivergentFunctional
// when the ratio-test tail estimate of the omega/kappa series is not negligible.
SequenceBound sequence_bound(double y0, const SequenceFamily& fam, double A);

// Runs the recursion with equality for `steps` steps, in the log domain.
// Returns log y_0..log y_steps.
std::vector<double> simulate_recursion(double y0, const SequenceFamily& fam, double A, int steps);

// Geometric test family: kappa_j = kappa0 q^j, r_j/kappa_j = 1 - b q^-j,
// s_j/kappa_j = 1 + c q^-j, omega_j = 1 + w j.
SequenceFamily geometric_family(double kappa0, double q, double b, double c, double w, int n);

// The Moser sequence itself: kappa_j = beta_j, r_j = nu1, s_j = nu2,
// omega_j = j + 1.
SequenceFamily moser_family(const ExponentBundle& b, double alpha0, int n);

struct SequenceFuzzReport {
  int families = 0;
  int violations = 0;
  double worst_log_margin = 0.0;  // min over families of log bound - log max tail y
};

SequenceFuzzReport fuzz_sequence_bound(int families, int steps, std::uint64_t seed);

}  // namespace rotforch
