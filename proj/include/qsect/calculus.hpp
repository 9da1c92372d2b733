#pragma once

// Holomorphic functional calculus on shifted sectors Sigma_theta - omega:
//   psi(A) = (1/2 pi i) int_{boundary(Sigma_sigma - omega)} psi(z) R(z) dz,
// for psi in Hinf00 (bounded, |psi(z)| <= K |z+omega|^{-mu} with mu > 1/2)
// and sigma strictly between the form's sector angle arctan(M/alpha) and
// psi's angle of analyticity. Bounded psi in Hinf act through the
// regularization psi(z)/(omega+1+z) on vectors (omega+1+A)u, with the
// m-sectorial norm bound |phi(A)| <= (2 + 2/sqrt 3) |phi|_inf. The
// convergence statement verified here: |Jup psi(A0) Jdown - psi(Ae)| <= C
// delta_eps across a family, C fitted once and stable.

#include <string>

#include "qsect/quasiuni.hpp"

namespace qsect {

struct CalculusFunction {
  enum class Class { Hinf, Hinf00 };

  std::string label;
  std::function<Complex(Complex)> eval;
  double theta = M_PI;  // analytic and bounded on Sigma_theta - omega
  double omega = 0.0;
  Class cls = Class::Hinf00;
  double decay_mu = 1.0;  // |eval(z)| <= decay_K |z+omega|^{-decay_mu} (Hinf00)
  double decay_K = 0.0;   // ... and |eval(z)| <= decay_K
  double sup_norm = 0.0;
  int contour_npd = 40;  // nodes per decade a contour for this function wants

  // e^{-tz}, t > 0, certified with a power-decay envelope of order 4 (the
  // larger order keeps the truncation radius small); theta must stay below
  // pi/2 where the exponential is still decaying along the boundary rays.
  static CalculusFunction exponential(double t, double omega,
                                      double theta = M_PI / 2.0 - 0.02);

  // psi*(z) = 1/(omega + 1 + z), decay order 1.
  static CalculusFunction resolvent_shift(double omega, double theta);

  // p(z)/q(z) with ascending coefficient lists, deg q > deg p, and all poles
  // outside Sigma_theta - omega (checked via companion-matrix roots); the
  // envelope constants are estimated on a sector sampling with a 5% margin.
  static CalculusFunction rational(const std::vector<Complex>& num,
                                   const std::vector<Complex>& den, double theta,
                                   double omega, std::string label = "rational");

  // Bounded function without decay certificate (class Hinf).
  static CalculusFunction hinf(std::string label, std::function<Complex(Complex)> f,
                               double theta, double omega, double sup_norm);
};

// Checks the Hinf00 envelope |eval| <= min(decay_K, decay_K |z+omega|^{-mu})
// on sample points of both boundary rays of Sigma_theta - omega; throws
// ConfigError on violation.
void certify_hinf00(const CalculusFunction& psi, int samples_per_ray = 200);

struct CalculusResult {
  Matrix op;          // psi(A): H -> H
  double tail_bound;  // decay_K R_max^{1/2-mu} / (pi (mu - 1/2)), the
                      // analytic bound on the truncated contour tail
};

// Sector contour for psi(A): sigma halfway between the sector angle and
// psi.theta; R_max chosen so the integrand-level tail (envelope times the
// resolvent bound D_sigma'/|z+omega|) is below rel_tail_tol * sup_norm.
ContourSpec default_calculus_contour(const SectorialityConstants& c,
                                     const CalculusFunction& psi,
                                     double rel_tail_tol = 1e-10);

CalculusResult eval_calculus(const SesquilinearForm& form, const CalculusFunction& psi,
                             const ContourSpec& contour);
CalculusResult eval_calculus(const SesquilinearForm& form, const CalculusFunction& psi);

// phi(A) u for bounded phi via the regularization psi(z) = phi(z)/(omega+1+z):
// returns psi(A) (omega+1+A) u; u must lie in the range of the inclusion.
Vector extended_calculus_apply(const SesquilinearForm& form, const CalculusFunction& phi,
                               const Vector& u);

struct CalculusFamilyMember {
  double eps = 0.0;
  SesquilinearForm fe;
  IdentificationQuadruple J;
  QuasiUnitaryReport report;
};

struct CalculusConvergenceRow {
  std::string psi_label;
  double eps = 0.0;
  double delta = 0.0;
  double lhs_up = 0.0;    // |Jup psi(A0) Jdown - psi(Ae)|_{He->He}
  double lhs_down = 0.0;  // |psi(A0) - Jdown psi(Ae) Jup|_{H0->H0}
};

struct CalculusConvergenceFit {
  std::string psi_label;
  double C = 0.0;         // least-squares fit of L = C delta through the origin
  double max_ratio = 0.0; // max L / (C delta)
  bool pass = false;      // max_ratio <= 2 (or all L <= 1e-12 when delta = 0)
};

struct CalculusConvergenceTable {
  std::vector<CalculusConvergenceRow> rows;
  std::vector<CalculusConvergenceFit> fits;
  bool pass = false;
};

CalculusConvergenceTable verify_calculus_convergence(
    const SesquilinearForm& f0, const std::vector<CalculusFamilyMember>& family,
    const std::vector<CalculusFunction>& psi_list);

enum class SemigroupMethod { Contour, Expm };

// e^{-tA}: contour calculus with psi(z) = e^{-tz} (t > 0 required), or dense
// scaling-and-squaring on -t A_op (identity inclusions only).
Matrix semigroup(const SesquilinearForm& form, double t, SemigroupMethod method);

// Matrix exponential, Pade-13 scaling and squaring.
Matrix expm(const Matrix& X);

}  // namespace qsect
