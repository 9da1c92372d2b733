#include "qsect/quasiuni.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include <Eigen/SparseLU>

namespace qsect {

IdentificationQuadruple IdentificationQuadruple::identity(int dim_H, int dim_V) {
  IdentificationQuadruple J;
  J.Jup = Mat::identity(dim_H);
  J.Jdown = Mat::identity(dim_H);
  J.Jup1 = Mat::identity(dim_V);
  J.Jdown1 = Mat::identity(dim_V);
  return J;
}

IdentificationQuadruple IdentificationQuadruple::swapped() const {
  IdentificationQuadruple S;
  S.Jup = Jdown;
  S.Jdown = Jup;
  S.Jup1 = Jdown1;
  S.Jdown1 = Jup1;
  return S;
}

namespace {

void check_dims(const SesquilinearForm& f0, const SesquilinearForm& fe,
                const IdentificationQuadruple& J) {
  require(J.Jup.rows() == fe.H().dim() && J.Jup.cols() == f0.H().dim(),
          "quasiuni: Jup must map H0 -> He");
  require(J.Jdown.rows() == f0.H().dim() && J.Jdown.cols() == fe.H().dim(),
          "quasiuni: Jdown must map He -> H0");
  require(J.Jup1.rows() == fe.V().dim() && J.Jup1.cols() == f0.V().dim(),
          "quasiuni: Jup1 must map V0 -> Ve");
  require(J.Jdown1.rows() == f0.V().dim() && J.Jdown1.cols() == fe.V().dim(),
          "quasiuni: Jdown1 must map Ve -> V0");
}

// |Jdown - Jup*|_{He->H0} with Jup* = G0^{-1} Jup^H Ge; above the dense limit
// the difference is never materialized.
double a2_defect(const WeightedSpace& H0, const WeightedSpace& He, const Mat& Jup,
                 const Mat& Jdown) {
  if (std::max(H0.dim(), He.dim()) <= kDenseStorageLimit) {
    Matrix adj = gram_adjoint(Jup, H0, He);
    return weighted_norm(Mat(Matrix(Jdown.dense() - adj)), He, H0);
  }
  auto applyT = [&](const Vector& x) {
    return Vector(Jdown.apply(x) - H0.gramSolve(Jup.applyAdjoint(He.gramApply(x))));
  };
  auto applyTH = [&](const Vector& y) {
    return Vector(Jdown.applyAdjoint(y) - He.gramApply(Jup.apply(H0.gramSolve(y))));
  };
  return weighted_norm_matfree(applyT, applyTH, He, H0);
}

}  // namespace

QuasiUnitaryReport defect_report(const SesquilinearForm& f0, const SesquilinearForm& fe,
                                 const IdentificationQuadruple& J) {
  check_dims(f0, fe, J);
  QuasiUnitaryReport r;
  r.d_A1a = weighted_norm(mat_sub(mat_mul(J.Jup, f0.incl()), mat_mul(fe.incl(), J.Jup1)),
                          f0.V(), fe.H());
  r.d_A1b = weighted_norm(mat_sub(mat_mul(J.Jdown, fe.incl()), mat_mul(f0.incl(), J.Jdown1)),
                          fe.V(), f0.H());
  r.d_A2 = a2_defect(f0.H(), fe.H(), J.Jup, J.Jdown);
  r.d_A3a = weighted_norm(mat_sub(f0.incl(), mat_mul(J.Jdown, mat_mul(J.Jup, f0.incl()))),
                          f0.V(), f0.H());
  r.d_A3b = weighted_norm(mat_sub(fe.incl(), mat_mul(J.Jup, mat_mul(J.Jdown, fe.incl()))),
                          fe.V(), fe.H());
  r.d_A5 = weighted_bilinear_norm(
      mat_sub(mat_mul(mat_adjoint(J.Jdown1), f0.form()), mat_mul(fe.form(), J.Jup1)),
      f0.V(), fe.V());
  r.kappa = std::max({1.0, weighted_norm(J.Jup, f0.H(), fe.H()),
                      weighted_norm(J.Jdown, fe.H(), f0.H())});
  r.delta = std::max({r.d_A1a, r.d_A1b, r.d_A2, r.d_A3a, r.d_A3b, r.d_A5});
  return r;
}

Json report_to_json(const QuasiUnitaryReport& r) {
  return Json{{"d_A1a", r.d_A1a}, {"d_A1b", r.d_A1b}, {"d_A2", r.d_A2},
              {"d_A3a", r.d_A3a}, {"d_A3b", r.d_A3b}, {"d_A5", r.d_A5},
              {"delta", r.delta}, {"kappa", r.kappa}};
}

std::string report_csv_header() {
  return "eps,dA1a,dA1b,dA2,dA3a,dA3b,dA5,delta,kappa";
}

std::string report_csv_row(double eps, const QuasiUnitaryReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e", eps, r.d_A1a,
                r.d_A1b, r.d_A2, r.d_A3a, r.d_A3b, r.d_A5, r.delta, r.kappa);
  return buf;
}

SectorialityConstants uniform_constants(const SesquilinearForm& f0,
                                        const SesquilinearForm& fe) {
  const SectorialityConstants& c0 = f0.constants();
  const SectorialityConstants& ce = fe.constants();
  require(std::abs(c0.alpha - ce.alpha) <= 1e-12 * std::max(1.0, std::abs(c0.alpha)),
          "uniform_constants: the two forms carry different ellipticity targets");
  SectorialityConstants u;
  u.alpha = std::min(c0.alpha, ce.alpha);
  u.M = std::max(c0.M, ce.M);
  u.omega = std::max(c0.omega, ce.omega);
  u.c_V = std::max(c0.c_V, ce.c_V);
  return u;
}

namespace {

// R(z) = incl S(z)^{-1} incl^H G_H with S(z) = z G_hat - A, factored once per
// z; the plain coefficient adjoint G_H incl S(z)^{-H} incl^H uses a separate
// factorization of S(z)^H.
class FactoredResolvent {
 public:
  FactoredResolvent(const SesquilinearForm& f, Complex z) : f_(&f) {
    Mat S = mat_sub(mat_scale(z, f.gramHonV()), f.form());
    Mat SH = mat_sub(mat_scale(std::conj(z), f.gramHonV()), mat_adjoint(f.form()));
    factor(S, lu_, plu_, z);
    factor(SH, luH_, pluH_, z);
  }

  Vector apply(const Vector& x) const {
    Vector rhs = f_->incl().applyAdjoint(f_->H().gramApply(x));
    return f_->incl().apply(solveWith(lu_, plu_, rhs));
  }

  Vector applyAdjoint(const Vector& x) const {
    Vector rhs = f_->incl().applyAdjoint(x);
    return f_->H().gramApply(f_->incl().apply(solveWith(luH_, pluH_, rhs)));
  }

 private:
  using SpLU = Eigen::SparseLU<SpMatrix>;
  using DnLU = Eigen::PartialPivLU<Matrix>;

  static void factor(const Mat& S, std::unique_ptr<SpLU>& sp, std::unique_ptr<DnLU>& dn,
                     Complex z) {
    if (S.isSparse()) {
      sp = std::make_unique<SpLU>();
      sp->compute(S.sparseRef());
      if (sp->info() != Eigen::Success)
        throw SpectrumHitError("resolvent factorization failed: z in spectrum?", z);
      return;
    }
    dn = std::make_unique<DnLU>(S.denseRef());
    double scale = std::max(1e-300, S.maxAbs());
    const Matrix& LU = dn->matrixLU();
    for (Eigen::Index i = 0; i < LU.rows(); ++i)
      if (std::abs(LU(i, i)) <= 1e-14 * scale)
        throw SpectrumHitError("resolvent numerically singular: z in spectrum?", z);
  }

  static Vector solveWith(const std::unique_ptr<SpLU>& sp, const std::unique_ptr<DnLU>& dn,
                          const Vector& rhs) {
    return sp ? Vector(sp->solve(rhs)) : Vector(dn->solve(rhs));
  }

  const SesquilinearForm* f_;
  std::unique_ptr<SpLU> lu_, luH_;
  std::unique_ptr<DnLU> plu_, pluH_;
};

}  // namespace

KeyEstimateTable verify_key_estimate(const SesquilinearForm& f0, const SesquilinearForm& fe,
                                     const IdentificationQuadruple& J,
                                     const QuasiUnitaryReport& report, double theta, double r,
                                     const std::vector<Complex>& z_grid) {
  check_dims(f0, fe, J);
  require(r > 0.0, "verify_key_estimate: r must be positive");
  SectorialityConstants uni = uniform_constants(f0, fe);
  SectorEstimates est = sector_estimates(uni, theta);
  const double D = est.D_theta, C = est.C_theta, w = std::abs(uni.omega);

  KeyEstimateTable table;
  table.theta = theta;
  table.r = r;
  table.C1 = (C * D + 2.0 * C) + (D + C * C + D * D) / std::sqrt(r) + w * C * D / r +
             w * D * D / std::pow(r, 1.5);
  table.C2 = report.kappa * table.C1 + C;
  table.delta = report.delta;
  table.kappa = report.kappa;

  for (Complex z : z_grid) {
    Complex zs = z + uni.omega;
    char msg[128];
    if (std::abs(zs) < r * (1.0 - 1e-12)) {
      std::snprintf(msg, sizeof(msg), "verify_key_estimate: |z+omega| < r at z = %g%+gi",
                    z.real(), z.imag());
      throw ConfigError(msg);
    }
    if (std::abs(std::arg(zs)) < theta - 1e-12) {
      std::snprintf(msg, sizeof(msg),
                    "verify_key_estimate: z = %g%+gi lies inside the sector", z.real(),
                    z.imag());
      throw ConfigError(msg);
    }
  }

  const bool small = std::max(f0.H().dim(), fe.H().dim()) <= kDenseStorageLimit;
  for (Complex z : z_grid) {
    KeyEstimateRow row;
    row.z = z;
    double sq = std::sqrt(std::abs(z + uni.omega));
    row.bound_one = report.delta * table.C1 / sq;
    row.bound_two = report.delta * table.C2 / sq;
    if (small) {
      Matrix R0 = resolvent(f0, z);
      Matrix Re = resolvent(fe, z);
      Matrix Ju = J.Jup.dense(), Jd = J.Jdown.dense();
      row.lhs_one = weighted_norm(Mat(Matrix(Re * Ju - Ju * R0)), f0.H(), fe.H());
      row.lhs_two = weighted_norm(Mat(Matrix(Re - Ju * R0 * Jd)), fe.H(), fe.H());
    } else {
      FactoredResolvent R0(f0, z), Re(fe, z);
      row.lhs_one = weighted_norm_matfree(
          [&](const Vector& x) { return Vector(Re.apply(J.Jup.apply(x)) -
                                               J.Jup.apply(R0.apply(x))); },
          [&](const Vector& y) { return Vector(J.Jup.applyAdjoint(Re.applyAdjoint(y)) -
                                               R0.applyAdjoint(J.Jup.applyAdjoint(y))); },
          f0.H(), fe.H());
      row.lhs_two = weighted_norm_matfree(
          [&](const Vector& x) { return Vector(Re.apply(x) -
                                               J.Jup.apply(R0.apply(J.Jdown.apply(x)))); },
          [&](const Vector& y) {
            return Vector(Re.applyAdjoint(y) -
                          J.Jdown.applyAdjoint(R0.applyAdjoint(J.Jup.applyAdjoint(y))));
          },
          fe.H(), fe.H());
    }
    row.ok = row.lhs_one <= row.bound_one + 1e-12 && row.lhs_two <= row.bound_two + 1e-12;
    table.rows.push_back(row);
  }
  table.pass = std::all_of(table.rows.begin(), table.rows.end(),
                           [](const KeyEstimateRow& q) { return q.ok; });
  return table;
}

LemmaCheck check_lemma_sandwich(const SesquilinearForm& f0, const SesquilinearForm& fe,
                                const IdentificationQuadruple& J, const Mat& B0,
                                const Mat& Be) {
  check_dims(f0, fe, J);
  require(B0.rows() == f0.V().dim() && B0.cols() == f0.H().dim(),
          "check_lemma_sandwich: B0 must map H0 -> V0");
  require(Be.rows() == fe.V().dim() && Be.cols() == fe.H().dim(),
          "check_lemma_sandwich: Be must map He -> Ve");
  QuasiUnitaryReport rep = defect_report(f0, fe, J);
  Mat BeH = mat_mul(fe.incl(), Be);                          // He -> He
  Mat B0Jd = mat_mul(f0.incl(), mat_mul(B0, J.Jdown));       // He -> H0
  LemmaCheck out;
  out.lhs = weighted_norm(mat_sub(BeH, mat_mul(J.Jup, B0Jd)), fe.H(), fe.H());
  double mid = weighted_norm(mat_sub(mat_mul(J.Jdown, BeH), B0Jd), fe.H(), f0.H());
  out.rhs = rep.kappa * mid + rep.delta * weighted_norm(Be, fe.H(), fe.V()) + 1e-9;
  out.pass = out.lhs <= out.rhs;
  return out;
}

LemmaCheck check_lemma_pullback(const SesquilinearForm& f0, const SesquilinearForm& fe,
                                const IdentificationQuadruple& J,
                                const std::vector<std::pair<Vector, Vector>>& samples) {
  check_dims(f0, fe, J);
  QuasiUnitaryReport rep = defect_report(f0, fe, J);
  LemmaCheck out;
  out.pass = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& [f, u] : samples) {
    require(f.size() == f0.V().dim(), "check_lemma_pullback: f must lie in V0");
    require(u.size() == fe.H().dim(), "check_lemma_pullback: u must lie in He");
    Vector fH = f0.incl().apply(f);
    double lhs = f0.H().norm(J.Jdown.apply(u) - fH);
    double rhs = rep.kappa * fe.H().norm(u - J.Jup.apply(fH)) + rep.delta * f0.V().norm(f) +
                 1e-9;
    if (lhs > rhs) out.pass = false;
    if (lhs - rhs > worst) {
      worst = lhs - rhs;
      out.lhs = lhs;
      out.rhs = rhs;
    }
  }
  return out;
}

}  // namespace qsect
