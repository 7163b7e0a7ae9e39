#include "rotforch/moser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rotforch/errors.hpp"
#include "rotforch/field_expr.hpp"

namespace rotforch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

}  // namespace

double log_geometric_partial(double c, double alpha0, double kappa, int j0, int J) {
  double sum = 0.0;
  for (int j = j0; j <= J; ++j) sum += std::log1p(c / (alpha0 * std::pow(kappa, j)));
  return sum;
}

double log_geometric_product(double c, double alpha0, double kappa, int j0, int J) {
  if (!(std::abs(c) < alpha0 * std::pow(kappa, j0))) {
    throw InvalidInput("log_geometric_product: factor 1 + c/beta_j is not positive");
  }
  const double head = log_geometric_partial(c, alpha0, kappa, j0, J);
  const double x = c / alpha0;
  double tail = 0.0;
  double xm = 1.0;
  for (int m = 1; m <= 400; ++m) {
    xm *= x;
    const double km = std::pow(kappa, -static_cast<double>(m));
    const double term = (m % 2 == 1 ? 1.0 : -1.0) * xm / m *
                        std::pow(kappa, -static_cast<double>(m) * (J + 1)) / (1.0 - km);
    tail += term;
    if (std::abs(term) < 1e-20 * std::max(1.0, std::abs(tail))) break;
  }
  return head + tail;
}

double MoserSchedule::chain_min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : chain_margin) m = std::min(m, v);
  return m;
}

double MoserSchedule::log_C0_hat(double c10, double mu_bar, double a) const {
  return omega * ((1.0 + mu_bar) * std::log(2.0) + std::log(c10) +
                  (6.0 + 5.0 / (2.0 * (1.0 - a))) * std::log(kappa_tilde * alpha0));
}

double MoserSchedule::log_A(double c10, double mu_bar, double gamma, double a, double chi_star,
                            double N3, double PsiT) const {
  return std::log(c10) + mu_bar * std::log(2.0) + (2.0 + gamma * mu_bar) * std::log(chi_star) +
         (1.0 + mu_bar) * std::log1p(T) + mu_bar * std::log1p(1.0 / (sigma * T)) +
         (6.0 + 5.0 / (2.0 * (1.0 - a))) * std::log(kappa_tilde * alpha0) +
         (2.0 + mu_bar) * std::log(N3) + mu_bar * std::log(PsiT);
}

MoserSchedule moser_schedule(const ExponentBundle& b, double alpha0, double sigma, double T,
                             int chain_terms) {
  check_moser_parameters(b);
  if (!(sigma > 0.0 && sigma < 1.0)) throw InvalidInput("sigma must lie in (0,1)");
  if (!(T > 0.0)) throw InvalidInput("T must be positive");
  static const char* names[] = {"1 + lambda",
                                "p2 (lambda(5-4a)-1)/(kappa~ - p2)",
                                "p5 (a+3 lambda-1)/((1-a)(kappa~ - p6))",
                                "(1-lambda-a)/(kappa~ - 1)",
                                "2 lambda/(1-r1)",
                                "(lambda+a-1)/(1+r_*/2-kappa~^2)"};
  for (std::size_t i = 0; i < b.alpha0_min_terms.size(); ++i) {
    if (!(alpha0 > b.alpha0_min_terms[i])) {
      throw InvalidExponent(std::string("alpha0 > ") + names[i],
                            "alpha0 = " + format_number(alpha0) + " <= " +
                                format_number(b.alpha0_min_terms[i]));
    }
  }

  MoserSchedule ms;
  ms.alpha0 = alpha0;
  ms.kappa_tilde = b.kappa_tilde;
  ms.sigma = sigma;
  ms.T = T;
  const double kt = b.kappa_tilde;
  const double cprime = 1.0 / (1.0 + b.r_star / 2.0);
  const double h1 = b.h1;
  const double h3 = b.h3;
  const double l3 = 3.0 * b.lambda;

  // Truncation index from the raw factors.
  int J = 0;
  while (J < 10000) {
    const double bj = alpha0 * std::pow(kt, J);
    const double step = std::abs(std::log1p(-h1 / bj) - std::log1p(cprime / bj)) +
                        std::abs(std::log1p(h3 / bj) + std::log1p(l3 / bj));
    if (step < 1e-10) break;
    ++J;
  }
  ms.J = J;

  auto log_mu = [&](int JJ) {
    return log_geometric_product(-h1, alpha0, kt, 0, JJ) -
           log_geometric_product(cprime, alpha0, kt, 0, JJ);
  };
  auto log_nu = [&](int j0, int JJ) {
    return log_geometric_product(h3, alpha0, kt, j0, JJ) +
           log_geometric_product(l3, alpha0, kt, j0, JJ);
  };
  auto raw_mu = [&](int JJ) {
    return log_geometric_partial(-h1, alpha0, kt, 0, JJ) -
           log_geometric_partial(cprime, alpha0, kt, 0, JJ);
  };
  auto raw_nu = [&](int JJ) {
    return log_geometric_partial(h3, alpha0, kt, 0, JJ) +
           log_geometric_partial(l3, alpha0, kt, 0, JJ);
  };

  const double lmu = log_mu(J);
  const double lnu = log_nu(0, J);
  ms.mu_tilde = std::exp(lmu);
  ms.nu_tilde = std::exp(lnu);
  ms.G = std::exp(log_nu(1, J));
  ms.tail_bound = std::abs(lmu - raw_mu(J)) + std::abs(lnu - raw_nu(J));
  ms.raw_gap_60_120 = std::max(std::abs(raw_mu(60) - raw_mu(120)),
                               std::abs(raw_nu(60) - raw_nu(120)));
  ms.corrected_gap_60_120 = std::max(std::abs(log_mu(60) - log_mu(120)),
                                     std::abs(log_nu(0, 60) - log_nu(0, 120)));

  const double one_minus = 1.0 - 1.0 / kt;
  ms.L0 = 1.0 / (alpha0 * one_minus * one_minus);
  ms.omega = ms.G * ms.L0;
  const double mb = b.mu_bar;
  ms.omega0 = (2.0 + b.gamma_moser * mb) * ms.omega;
  ms.omega1 = (1.0 + mb) * ms.omega;
  ms.omega2 = mb * ms.omega;
  ms.omega3 = (2.0 + mb) * ms.omega;

  const int n = std::max(J, chain_terms + 2);
  for (int j = 0; j <= n; ++j) {
    const double bj = alpha0 * std::pow(kt, j);
    ms.beta.push_back(bj);
    ms.t.push_back(sigma * T * (1.0 - std::pow(2.0, -j)));
    ms.r_seq.push_back(b.nu1(bj));
    ms.s_seq.push_back(b.nu2(bj));
  }
  for (int j = 0; j <= chain_terms; ++j) {
    ms.chain_margin.push_back(b.kappa_at(ms.beta[j]) * ms.beta[j] / ms.beta[j + 2] - 1.0);
  }
  return ms;
}

void SequenceFamily::validate() const {
  const std::size_t n = kappa.size();
  if (n == 0 || r.size() != n || s.size() != n || omega.size() != n) {
    throw InvalidInput("sequence family arrays must be nonempty and of equal length");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(kappa[j] > 0.0)) throw InvalidInput("kappa_j must be positive");
    if (!(r[j] > 0.0 && s[j] >= r[j])) throw InvalidInput("need s_j >= r_j > 0");
    if (!(omega[j] >= 1.0)) throw InvalidInput("omega_j must be at least 1");
  }
}

SequenceBound sequence_bound(double y0, const SequenceFamily& fam, double A) {
  fam.validate();
  if (!(A >= 1.0)) throw InvalidInput("A must be at least 1");
  if (!(y0 >= 0.0)) throw InvalidInput("y0 must be nonnegative");
  const std::size_t n = fam.size();
  SequenceBound out;
  std::vector<double> terms(n);
  double lb = 0.0, lg = 0.0;
  double best = 0.0, run = 0.0;  // Kadane over log gamma_j, j >= 1
  for (std::size_t j = 0; j < n; ++j) {
    const double t = fam.omega[j] / fam.kappa[j];
    out.alpha_bar += t;
    terms[j] = t;
    lb += std::log(fam.r[j] / fam.kappa[j]);
    const double lgj = std::log(fam.s[j] / fam.kappa[j]);
    lg += lgj;
    if (j >= 1) {
      run = std::max(lgj, run + lgj);
      best = std::max(best, run);
    }
  }
  // Ratio-test estimate of the untruncated tail, using the geometric rate of
  // the last quarter of terms. Harmonic-type families give rho ~ 1.
  if (n >= 8) {
    const std::size_t q0 = 3 * n / 4;
    double tail = 0.0;
    if (terms[n - 1] > 0.0 && terms[q0] > 0.0) {
      const double rho =
          std::exp((std::log(terms[n - 1]) - std::log(terms[q0])) / static_cast<double>(n - 1 - q0));
      tail = rho < 1.0 ? terms[n - 1] * rho / (1.0 - rho)
                     : std::numeric_limits<double>::infinity();
    }
    if (tail > 1e-3 * out.alpha_bar) {
      throw DivergentFunctional("alpha_bar", "estimated tail of sum omega_j/kappa_j is " +
                                                 format_number(tail));
    }
  }
  out.beta_bar = std::exp(lb);
  out.gamma_bar = std::exp(lg);
  out.G = std::exp(best);
  if (y0 == 0.0) {
    out.log_value = kNegInf;
    out.value = 0.0;
    return out;
  }
  const double ly = std::log(y0);
  out.log_value =
      out.G * out.alpha_bar * std::log(2.0 * A) + std::max(out.beta_bar * ly, out.gamma_bar * ly);
  out.value = std::exp(out.log_value);
  return out;
}

std::vector<double> simulate_recursion(double y0, const SequenceFamily& fam, double A, int steps) {
  fam.validate();
  if (static_cast<std::size_t>(steps) > fam.size()) {
    throw InvalidInput("family shorter than the requested number of steps");
  }
  std::vector<double> ly{y0 > 0.0 ? std::log(y0) : kNegInf};
  const double la = std::log(A);
  for (int j = 0; j < steps; ++j) {
    const double l = ly.back();
    if (l == kNegInf) {
      ly.push_back(kNegInf);
      continue;
    }
    const double inner = log_add_exp(fam.r[j] * l, fam.s[j] * l);
    ly.push_back((fam.omega[j] * la + inner) / fam.kappa[j]);
  }
  return ly;
}

SequenceFamily geometric_family(double kappa0, double q, double b, double c, double w, int n) {
  SequenceFamily f;
  for (int j = 0; j < n; ++j) {
    const double k = kappa0 * std::pow(q, j);
    const double d = std::pow(q, -j);
    f.kappa.push_back(k);
    f.r.push_back(k * (1.0 - b * d));
    f.s.push_back(k * (1.0 + c * d));
    f.omega.push_back(1.0 + w * j);
  }
  return f;
}

SequenceFamily moser_family(const ExponentBundle& b, double alpha0, int n) {
  SequenceFamily f;
  for (int j = 0; j < n; ++j) {
    const double bj = alpha0 * std::pow(b.kappa_tilde, j);
    f.kappa.push_back(bj);
    f.r.push_back(b.nu1(bj));
    f.s.push_back(b.nu2(bj));
    f.omega.push_back(j + 1.0);
  }
  return f;
}

SequenceFuzzReport fuzz_sequence_bound(int families, int steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  SequenceFuzzReport rep;
  rep.worst_log_margin = std::numeric_limits<double>::infinity();
  for (int f = 0; f < families; ++f) {
    const double kappa0 = 1.0 + 4.0 * U(rng);
    const double q = 1.05 + 0.45 * U(rng);
    const double b = 0.5 * U(rng);
    const double c = U(rng);
    const double w = U(rng);
    const double A = std::exp(std::log(10.0) * U(rng));
    const double y0 = std::exp(std::log(1e-3) + std::log(1e6) * U(rng));
    const int n = std::max(steps, std::min(4000, static_cast<int>(600.0 / std::log(q))));
    const SequenceFamily fam = geometric_family(kappa0, q, b, c, w, n);
    const SequenceBound sb = sequence_bound(y0, fam, A);
    const auto ly = simulate_recursion(y0, fam, A, steps);
    double tail = kNegInf;
    for (std::size_t j = ly.size() - ly.size() / 10 - 1; j < ly.size(); ++j) tail = std::max(tail, ly[j]);
    const double margin = sb.log_value - tail;
    rep.worst_log_margin = std::min(rep.worst_log_margin, margin);
    if (margin < -1e-12 * std::max(1.0, std::abs(sb.log_value))) ++rep.violations;
    ++rep.families;
  }
  return rep;
}

}  // namespace rotforch
