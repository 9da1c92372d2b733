#pragma once

// Quasi-unitary equivalence of two sectorial form bundles (the "0" and "eps"
// sides) through identification operators
//   Jup: H0 -> He, Jdown: He -> H0, Jup1: V0 -> Ve, Jdown1: Ve -> V0.
// The coupling quality is measured by six defect norms,
//   d_A1a = |Jup - Jup1|_{V0->He},        d_A1b = |Jdown - Jdown1|_{Ve->H0},
//   d_A2  = |Jdown - Jup*|_{He->H0},
//   d_A3a = |id - Jdown Jup|_{V0->H0},    d_A3b = |id - Jup Jdown|_{Ve->He},
//   d_A5  = sup |a0(f, Jdown1 u) - ae(Jup1 f, u)| / (|f|_V0 |u|_Ve),
// delta = max of the six, kappa = max(1, |Jup|, |Jdown|), and the pair is
// delta-kappa-quasi-unitarily equivalent. The resolvent key estimate
//   |Re(z) Jup - Jup R0(z)|_{H0->He} <= delta C_{theta,r,1} / sqrt|z+omega|,
//   |Re(z) - Jup R0(z) Jdown|_{He->He} <= delta C_{theta,r,2} / sqrt|z+omega|
// holds for z outside Sigma_theta - omega with |z+omega| >= r, where
//   C_{theta,r,1} = (C_theta D_theta + 2 C_theta)
//                   + (D_theta + C_theta^2 + D_theta^2) / sqrt(r)
//                   + |omega| C_theta D_theta / r
//                   + |omega| D_theta^2 / r^{3/2},
//   C_{theta,r,2} = kappa C_{theta,r,1} + C_theta,
// with D_theta, C_theta built from constants uniform over the pair
// (M, omega, c_V maxima; common alpha).

#include <utility>

#include "qsect/forms.hpp"

namespace qsect {

struct IdentificationQuadruple {
  Mat Jup;     // H0 -> He
  Mat Jdown;   // He -> H0
  Mat Jup1;    // V0 -> Ve
  Mat Jdown1;  // Ve -> V0

  // Shared-space quadruple: all four maps are identities.
  static IdentificationQuadruple identity(int dim_H, int dim_V);

  // The same coupling read in the opposite direction (up/down exchanged),
  // joining (fe, f0) instead of (f0, fe).
  IdentificationQuadruple swapped() const;
};

struct QuasiUnitaryReport {
  double d_A1a = 0.0;
  double d_A1b = 0.0;
  double d_A2 = 0.0;
  double d_A3a = 0.0;
  double d_A3b = 0.0;
  double d_A5 = 0.0;
  double kappa = 1.0;  // max(1, |Jup|_{H0->He}, |Jdown|_{He->H0})
  double delta = 0.0;  // max of the six defects
};

// Computes all defects of the coupling (H-valued differences compose the
// V-coefficient maps with the inclusions). Throws ConfigError on any
// dimension mismatch.
QuasiUnitaryReport defect_report(const SesquilinearForm& f0, const SesquilinearForm& fe,
                                 const IdentificationQuadruple& J);

Json report_to_json(const QuasiUnitaryReport& r);
std::string report_csv_header();  // "eps,dA1a,dA1b,dA2,dA3a,dA3b,dA5,delta,kappa"
std::string report_csv_row(double eps, const QuasiUnitaryReport& r);

// Constants valid for both forms at once: M, omega, c_V are maxima over the
// pair; alpha must agree (the forms are normalized to a common ellipticity
// target) and is taken as the minimum.
SectorialityConstants uniform_constants(const SesquilinearForm& f0,
                                        const SesquilinearForm& fe);

struct KeyEstimateRow {
  Complex z;
  double lhs_one = 0.0;    // |Re(z) Jup - Jup R0(z)|_{H0->He}
  double bound_one = 0.0;  // delta C_{theta,r,1} / sqrt|z+omega|
  double lhs_two = 0.0;    // |Re(z) - Jup R0(z) Jdown|_{He->He}
  double bound_two = 0.0;  // delta C_{theta,r,2} / sqrt|z+omega|
  bool ok = false;
};

struct KeyEstimateTable {
  double theta = M_PI;
  double r = 1.0;
  double C1 = 0.0;  // C_{theta,r,1}
  double C2 = 0.0;  // C_{theta,r,2}
  double delta = 0.0;
  double kappa = 1.0;
  std::vector<KeyEstimateRow> rows;
  bool pass = false;
};

// Checks both halves of the key estimate at every grid point. Each z must lie
// outside Sigma_theta - omega (uniform omega) with |z+omega| >= r; offending
// points raise ConfigError naming z. Comparisons carry a 1e-12 absolute
// roundoff allowance.
KeyEstimateTable verify_key_estimate(const SesquilinearForm& f0, const SesquilinearForm& fe,
                                     const IdentificationQuadruple& J,
                                     const QuasiUnitaryReport& report, double theta, double r,
                                     const std::vector<Complex>& z_grid);

struct LemmaCheck {
  bool pass = false;
  double lhs = 0.0;  // worst observed left side
  double rhs = 0.0;  // its right side (including the 1e-9 slack)
};

// Sandwich estimate for operators B0: H0 -> V0 and Be: He -> Ve (given in
// V-coefficients):
//   |Be - Jup B0 Jdown|_{He->He}
//     <= kappa |Jdown Be - B0 Jdown|_{He->H0} + delta |Be|_{He->Ve} + 1e-9.
LemmaCheck check_lemma_sandwich(const SesquilinearForm& f0, const SesquilinearForm& fe,
                                const IdentificationQuadruple& J, const Mat& B0,
                                const Mat& Be);

// Pull-back estimate per sample (f in V0-coefficients, u in He-coefficients):
//   |Jdown u - f|_{H0} <= kappa |u - Jup f|_{He} + delta |f|_{V0} + 1e-9.
LemmaCheck check_lemma_pullback(const SesquilinearForm& f0, const SesquilinearForm& fe,
                                const IdentificationQuadruple& J,
                                const std::vector<std::pair<Vector, Vector>>& samples);

}  // namespace qsect
