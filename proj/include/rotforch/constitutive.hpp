#pragma once

// Generalized Forchheimer law with rotation and the inverse map X.
//
//   g(x, s)      = sum_i a_i(x) s^{alpha_i},  0 = alpha_0 < ... < alpha_N
//   F_{x,z}(v)   = g(x, |v|) v + z J v
//   X(x, z, y)   = F^{-1}_{x, R_*(x) z^lambda}(y)
//
// J is the quarter turn in 2-D and k x (.) in 3-D.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "rotforch/field_expr.hpp"
#include "rotforch/geometry.hpp"

namespace rotforch {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

// Law with coefficients frozen at one point.
struct LocalLaw {
  std::vector<double> degrees;
  std::vector<double> coeffs;

  double g(double s) const;
  double dg(double s) const;  // dg/ds
  double a() const { return degrees.back() / (1.0 + degrees.back()); }
  double a0() const { return coeffs.front(); }
  double aN() const { return coeffs.back(); }
  double chi0() const;
};

class ForchheimerLaw {
 public:
  ForchheimerLaw() = default;
  ForchheimerLaw(std::vector<double> degrees, std::vector<FieldExpr> coeffs);

  const std::vector<double>& degrees() const { return degrees_; }
  const std::vector<FieldExpr>& coeffs() const { return coeffs_; }
  int N() const { return static_cast<int>(degrees_.size()) - 1; }
  double a() const { return degrees_.back() / (1.0 + degrees_.back()); }

  // Throws DegenerateCoefficient if a_0 or a_N is not positive or a
  // middle coefficient is negative at x.
  LocalLaw at(const Rect& rect, const Point& x) const;

 private:
  std::vector<double> degrees_;
  std::vector<FieldExpr> coeffs_;
};

struct FluidEOS {
  enum class Kind { isentropic, slightly_compressible };
  Kind kind = Kind::slightly_compressible;
  double c = 1.0;      // isentropic: rho = c p^{1/gamma}
  double gamma = 1.4;  // isentropic
  double varpi = 1.0;  // slightly compressible

  static FluidEOS isentropic(double c, double gamma);
  static FluidEOS slightly_compressible(double varpi);

  double lambda() const;
  double cbar() const;
  void validate() const;
};

struct RotationGravity {
  double omega_tilde = 0.0;    // angular speed
  double gravity_tilde = 0.0;  // gravitational acceleration
  // In 2-D the unit vector e0(t) = (cos(angle + rate t), sin(angle + rate t)).
  double gravity_angle = 1.5707963267948966;
  double gravity_rate = 0.0;
  // 3-D only.
  Vec3 k_hat{0.0, 0.0, 1.0};
  Vec3 e0_3d{0.0, 0.0, 1.0};

  void validate() const;
};

// Everything pointwise quantities depend on.
struct Medium {
  ForchheimerLaw law;
  FluidEOS eos;
  RotationGravity rotation;
  PorousDomain domain;

  double cbar() const { return eos.cbar(); }
  double lambda() const { return eos.lambda(); }
  double a() const { return law.a(); }
  double Omega() const { return cbar() * rotation.omega_tilde; }
  double G() const { return cbar() * cbar() * rotation.gravity_tilde; }
  double chi_star() const { return 1.0 + Omega(); }
  // |Z| <= c_Z chi_*^2 on the closed domain.
  double cZ() const;
  double phi(const Point& x) const;
  double R_star(const Point& x) const { return 2.0 * cbar() * Omega() / phi(x); }
  LocalLaw law_at(const Point& x) const { return law.at(domain.rect, x); }
};

struct WeightValues {
  double phi = 0.0;
  double chi0 = 0.0;
  double c4_tilde = 0.0;
  double W0 = 0.0;
  double W1 = 0.0;
  double W2 = 0.0;
  double W3 = 0.0;
  double W4 = 0.0;
};

struct InvertStats {
  int scalar_iterations = 0;
  int newton_iterations = 0;
  double residual = 0.0;  // |F(v) - y| / (1 + |y|)
};

constexpr double kInverseTol = 1e-10;

Vec2 eval_F(const LocalLaw& law, double zeta, const Vec2& v);
Vec3 eval_F(const LocalLaw& law, double zeta, const Vec3& k_hat, const Vec3& v);

// Solves F(v) = y with rotation magnitude zeta >= 0. Throws
// ConvergenceError if |F(v) - y| > tol (1 + |y|).
Vec2 invert_F(const LocalLaw& law, double zeta, const Vec2& y, double tol = kInverseTol,
              InvertStats* stats = nullptr);
Vec3 invert_F(const LocalLaw& law, double zeta, const Vec3& k_hat, const Vec3& y,
              double tol = kInverseTol, InvertStats* stats = nullptr);

// z is the pseudo-pressure (z >= 0); the rotation magnitude is R_*(x) z^lambda.
Vec2 eval_X(const Medium& m, const Point& x, double z, const Vec2& y, double tol = kInverseTol,
            InvertStats* stats = nullptr);
Vec3 eval_X3(const Medium& m, const Point& x, double z, const Vec3& y, double tol = kInverseTol,
             InvertStats* stats = nullptr);

WeightValues eval_weights(const Medium& m, const Point& x);
WeightValues weights_from(const LocalLaw& law, double phi, double cbar);

Vec2 eval_Z(const Medium& m, const Point& x, double t);
Vec3 eval_Z3(const Medium& m, const Point& x, double t);

struct XBoundReport {
  std::size_t samples = 0;
  std::size_t upper_violations = 0;
  std::size_t lower_violations = 0;
  double worst_upper_ratio = 0.0;   // max |X| / (W0 |y|^{1-a})
  double worst_lower_margin = 0.0;  // min (X.y - lower bound) / (1 + |lower bound|)
  double max_inverse_residual = 0.0;
};

struct XBoundOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double slack = 1e-9;
  double log10_min = -6.0;  // |y| and z ranges, log-uniform
  double log10_max = 6.0;
};

XBoundReport verify_X_bounds(const Medium& m, const XBoundOptions& opt);

// Random admissible law with spatially varying coefficients, for fuzzing.
Medium random_medium(std::mt19937_64& rng);

}  // namespace rotforch
