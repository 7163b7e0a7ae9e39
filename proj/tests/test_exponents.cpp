#include <cmath>
#include <random>

#include "doctest.h"
#include "rotforch/errors.hpp"
#include "rotforch/exponents.hpp"

using namespace rotforch;

TEST_CASE("worked values at the default point") {
  ExponentInputs in;
  const ExponentBundle b = compute_exponents(in);
  CHECK(b.r_star == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(b.h1 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(b.kappa_at(20.0) == doctest::Approx(1.225).epsilon(1e-14));
}

TEST_CASE("alpha_* terms by hand at a = 1/2, lambda = 1, r1 = 0.8, r = 2.5") {
  ExponentInputs in;
  const ExponentBundle b = compute_exponents(in);
  // r_* = 1/2, r~ = (r p + s - p)/(p - 1) = (3.75 + 0.5)/0.5 = 8.5
  CHECK(b.r_tilde == doctest::Approx(8.5));
  const double rs = 0.5;
  CHECK(b.alpha_star_terms[0] == doctest::Approx(2.0 * 0.8 / 0.2));
  CHECK(b.alpha_star_terms[1] == doctest::Approx(2.0 * 1.5 * (2.5 + 0.5) / (rs * 0.5)));
  CHECK(b.alpha_star_terms[2] == doctest::Approx(2.0 * 2.5 / (0.5 * rs) + 2.0 / rs));
  CHECK(b.alpha_star_terms[3] == doctest::Approx(2.0 * 2.5 * 5.0 + 4.0 / rs));
  CHECK(b.alpha_star_terms[4] == doctest::Approx(2.0 * 8.5 * 5.0 + 4.0 / rs));
  CHECK(b.alpha_star == doctest::Approx(93.0));
}

TEST_CASE("admissibility errors name the inequality") {
  ExponentInputs in;
  in.r1 = 0.5;
  try {
    compute_exponents(in);
    FAIL("expected InvalidExponent");
  } catch (const InvalidExponent& e) {
    CHECK(e.inequality().find("r1") != std::string::npos);
  }
  ExponentInputs bad_a;
  bad_a.a = 1.2;
  CHECK_THROWS_AS(compute_exponents(bad_a), InvalidExponent);
}

TEST_CASE("algebraic identities on random admissible bundles") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int accepted = 0;
  for (int k = 0; k < 4000 && accepted < 1000; ++k) {
    ExponentInputs in;
    in.a = 0.05 + 0.9 * U(rng);
    in.lambda = 0.1 + 0.9 * U(rng);
    const double p = 2.0 - in.a;
    const double lo = std::max(2.0 / (2.0 + p), 1.0 / p);
    in.r1 = lo + (1.0 - lo) * U(rng);
    in.r = 0.1 + 4.0 * U(rng);
    in.alpha = 10.0 + 400.0 * U(rng);
    ExponentBundle b;
    try {
      b = compute_exponents(in);
    } catch (const InvalidExponent&) {
      continue;
    }
    ++accepted;
    const double lhs0 = (1.0 - b.theta0) * b.kappa;
    CHECK(std::abs(lhs0 - b.r_star / 2.0) <= 1e-12 * std::max(1.0, b.r_star));
    const double lhs1 = b.beta_star * (1.0 - b.theta_tilde) * (1.0 + b.mu1_tilde / b.alpha);
    const double rhs1 = 2.0 * b.lambda / (1.0 - b.a);
    CHECK(std::abs(lhs1 - rhs1) <= 1e-12 * rhs1);
    for (const IdentityCheck& c : check_identities(static_cast<const SobolevExponents&>(b))) {
      CAPTURE(c.name);
      CHECK(c.rel_error <= 1e-12);
    }
  }
  CHECK(accepted >= 500);
}

TEST_CASE("theta~ <= theta_** above twice the threshold") {
  ExponentInputs in;
  in.alpha = 2.0 * compute_exponents(in).alpha_star;
  const ExponentBundle b = compute_exponents(in);
  CHECK(b.theta_tilde <= b.theta_dstar);
  CHECK(b.theta <= b.theta_dstar);
  for (const IdentityCheck& c : check_identities(b)) {
    CAPTURE(c.name);
    CHECK(c.rel_error <= 1e-12);
  }
}

TEST_CASE("alpha_* is nondecreasing in r and lambda") {
  for (double lam : {0.3, 0.6, 1.0}) {
    double prev = 0.0;
    for (double r = 3.0; r <= 6.0; r += 0.25) {
      ExponentInputs in;
      in.lambda = lam;
      in.r = r;
      const double as = compute_exponents(in).alpha_star;
      CHECK(as >= prev);
      prev = as;
    }
  }
  for (double r : {3.0, 4.0, 5.0}) {
    double prev = 0.0;
    for (double lam = 0.2; lam <= 1.0; lam += 0.1) {
      ExponentInputs in;
      in.lambda = lam;
      in.r = r;
      const double as = compute_exponents(in).alpha_star;
      CHECK(as >= prev);
      prev = as;
    }
  }
}

TEST_CASE("Moser parameters") {
  ExponentInputs in;
  CHECK_NOTHROW(check_moser_parameters(compute_exponents(in)));
  in.kappa_tilde = 1.5;  // exceeds sqrt(1 + r_*/2)
  CHECK_THROWS_AS(check_moser_parameters(compute_exponents(in)), InvalidExponent);
  ExponentInputs p;
  p.p[0] = 1.2;  // p1 must stay below kappa~
  CHECK_THROWS_AS(check_moser_parameters(compute_exponents(p)), InvalidExponent);
}

TEST_CASE("default alpha sits 5% above the thresholds") {
  ExponentInputs in;
  const AlphaChoice c = default_alpha(in);
  CHECK(c.beta1 == doctest::Approx(in.kappa_tilde * c.alpha0));
  in.alpha = c.beta1;
  const ExponentBundle b = compute_exponents(in);
  CHECK(c.alpha0 > b.alpha0_min);
  CHECK(c.beta1 > b.alpha_star);
}

TEST_CASE("Sobolev exponents preconditions") {
  CHECK_THROWS_AS(compute_sobolev_exponents(2, 1.5, 2.0, 2.0, 0.5, 1.0, 20.0), InvalidExponent);
  CHECK_THROWS_AS(compute_sobolev_exponents(2, 1.5, 2.0, 2.0, 0.8, -1.0, 20.0), InvalidExponent);
  const SobolevExponents e = compute_sobolev_exponents(2, 1.5, 2.0, 2.0, 0.8, 0.5, 16.0);
  CHECK(e.theta > 0.0);
  CHECK(e.theta < 1.0);
  CHECK(theta_of(e, e.alpha, e.r) == doctest::Approx(e.theta));
}
