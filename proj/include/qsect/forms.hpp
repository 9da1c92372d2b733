#pragma once

// Sesquilinear forms a: V x V -> C on a pair of weighted spaces with an
// inclusion V -> H, their sectoriality constants, and the associated
// resolvents with explicit sector bounds:
//   |a(u,v)| <= M |u|_V |v|_V,   Re a(u,u) + omega |u|_H^2 >= alpha |u|_V^2,
//   |u|_H <= c_V |u|_V,
//   ||R(z)||_{H->H} <= D_theta / |z+omega|,
//   ||R(z)||_{H->V} <= C_theta / sqrt(|z+omega|)  (same for the adjoint),
// for z outside the shifted sector Sigma_theta - omega, with
//   D_theta = 1 / sin(theta - arctan(M/alpha)),
//   C_theta = sqrt((1 + D_theta) D_theta / alpha).

#include <optional>

#include "qsect/linalg.hpp"

namespace qsect {

struct SectorialityConstants {
  double M = 0.0;      // form bound
  double alpha = 0.5;  // ellipticity constant (caller-chosen target)
  double omega = 0.0;  // minimal vertex shift for H-ellipticity at alpha
  double c_V = 1.0;    // embedding norm V -> H

  double sectorAngle() const { return std::atan2(M, alpha); }  // arctan(M/alpha)
};

struct SectorEstimates {
  double theta = M_PI;
  double D_theta = 0.0;
  double C_theta = 0.0;
};

SectorEstimates sector_estimates(const SectorialityConstants& c, double theta);

class SesquilinearForm {
 public:
  // a(u,v) = v^H A u on V-coefficients; incl is the (injective) coefficient
  // map V -> H. With shared coefficients incl = I.
  SesquilinearForm(WeightedSpace H, WeightedSpace V, Mat incl, Mat form,
                   std::string label = {});

  const WeightedSpace& H() const { return H_; }
  const WeightedSpace& V() const { return V_; }
  const Mat& incl() const { return incl_; }
  const Mat& form() const { return form_; }
  const std::string& label() const { return label_; }
  bool inclIsIdentity() const { return incl_identity_; }

  Complex eval(const Vector& u, const Vector& v) const;  // a(u,v) = v^H A u

  // G_hat = incl^H G_H incl, the H inner product restricted to V.
  const Mat& gramHonV() const;
  // incl^H G_H : H-coefficients -> V-dual data of the weak problem.
  const Matrix& inclAdjGram() const;

  // constants are computed once per form (alpha defaults to 0.5) and cached;
  // setConstants overrides, e.g. with family-uniform values.
  const SectorialityConstants& constants(double alpha_target = 0.5) const;
  void setConstants(const SectorialityConstants& c) { constants_ = c; }

  SesquilinearForm adjointForm() const;  // a*(u,v) = conj a(v,u): matrix A^H

 private:
  WeightedSpace H_;
  WeightedSpace V_;
  Mat incl_;
  Mat form_;
  std::string label_;
  bool incl_identity_ = false;
  mutable std::optional<Mat> ghat_;
  mutable std::optional<Matrix> incl_adj_gram_;
  mutable std::optional<SectorialityConstants> constants_;
};

// Minimal omega for the target alpha: omega = max(0, -lambda_min) of the
// Hermitian pencil (Re A - alpha G_V, G_hat); M and c_V are weighted norms.
SectorialityConstants sectoriality_constants(const SesquilinearForm& form,
                                             double alpha_target = 0.5);

// R(z): H -> H. Shared coefficients: (z G_H - A)^{-1} G_H; in general the
// weak problem z<u,v>_H - a(u,v) = <f,v>_H is solved on V and included into
// H (a pseudo-resolvent: the identity (z - A_op) R(z) = id holds on
// range(incl), which is all of H when incl = I). Throws SpectrumHitError.
Matrix resolvent(const SesquilinearForm& form, Complex z);

// The V-coefficient factor S(z)^{-1} incl^H G_H with S(z) = z G_hat - A;
// resolvent(z) = incl * resolvent_into_V(z). Maps H -> V.
Matrix resolvent_into_V(const SesquilinearForm& form, Complex z);

struct SectorCheck {
  bool pass = false;
  double worst_slack = 0.0;  // max over eigenvalues of |arg(lam+omega)| - angle
  std::vector<Complex> eigenvalues;
};

// All pencil eigenvalues satisfy |arg(lambda + omega)| <= arctan(M/alpha) + slack.
SectorCheck check_sector_inclusion(const SesquilinearForm& form, double slack = 1e-7);

struct ResolventBoundsCheck {
  bool pass = false;
  double worst_HH = 0.0;      // max ||R(z)|| |z+omega| / D_theta
  double worst_HV = 0.0;      // max ||R(z)||_{H->V} sqrt|z+omega| / C_theta
  double worst_HV_adj = 0.0;  // same for R(z)^*
};

// Verifies the three resolvent bounds at the given z samples (all must lie
// outside Sigma_theta - omega, checked).
ResolventBoundsCheck check_resolvent_bounds(const SesquilinearForm& form, double theta,
                                            const std::vector<Complex>& z_samples,
                                            double rel_tol = 1e-9);

// Sample points outside Sigma_theta - omega on rays at angles +-phi,
// phi in (theta, pi], radii log-spaced in [r_lo, r_hi].
std::vector<Complex> sector_exterior_samples(double theta, double omega, int n_per_ray,
                                             double r_lo, double r_hi);

// bundle (de)serialization: {"gram_H","gram_V","incl","form"[,"constants"]}
Json form_to_json(const SesquilinearForm& form);
SesquilinearForm form_from_json(const Json& j);

}  // namespace qsect
