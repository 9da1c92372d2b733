#include "qsect/forms.hpp"

#include <cmath>

namespace qsect {

namespace {

bool isIdentityMat(const Mat& m) {
  if (m.rows() != m.cols()) return false;
  if (m.isSparse()) {
    const SpMatrix& s = m.sparseRef();
    if (s.nonZeros() != s.rows()) return false;
    for (int k = 0; k < s.outerSize(); ++k)
      for (SpMatrix::InnerIterator it(s, k); it; ++it)
        if (it.row() != it.col() || it.value() != Complex(1.0, 0.0)) return false;
    return true;
  }
  return m.denseRef().isIdentity(0.0);
}

Mat matProductKeepSparse(const Mat& a, const Mat& b) {
  if (a.isSparse() && b.isSparse()) return Mat(SpMatrix(a.sparseRef() * b.sparseRef()));
  return Mat(Matrix(a.dense() * b.dense()));
}

Mat matAdjoint(const Mat& m) {
  if (m.isSparse()) return Mat(SpMatrix(m.sparseRef().adjoint()));
  return Mat(Matrix(m.denseRef().adjoint()));
}

}  // namespace

SectorEstimates sector_estimates(const SectorialityConstants& c, double theta) {
  const double angle = c.sectorAngle();
  require(theta > angle && theta <= M_PI,
          "sector_estimates: theta must lie in (arctan(M/alpha), pi]");
  SectorEstimates out;
  out.theta = theta;
  out.D_theta = 1.0 / std::sin(theta - angle);
  out.C_theta = std::sqrt((1.0 + out.D_theta) * out.D_theta / c.alpha);
  return out;
}

SesquilinearForm::SesquilinearForm(WeightedSpace H, WeightedSpace V, Mat incl, Mat form,
                                   std::string label)
    : H_(std::move(H)), V_(std::move(V)), incl_(std::move(incl)), form_(std::move(form)),
      label_(std::move(label)) {
  require(incl_.rows() == H_.dim() && incl_.cols() == V_.dim(),
          "form: inclusion must map V-coefficients to H-coefficients");
  require(form_.rows() == V_.dim() && form_.cols() == V_.dim(),
          "form: form matrix must be square on V");
  require(V_.dim() <= H_.dim(), "form: V cannot exceed H");
  incl_identity_ = isIdentityMat(incl_);
  if (!incl_identity_ && H_.dim() <= kDenseStorageLimit) {
    Eigen::ColPivHouseholderQR<Matrix> qr(incl_.dense());
    require(qr.rank() == V_.dim(), "form: inclusion must be injective");
  }
}

Complex SesquilinearForm::eval(const Vector& u, const Vector& v) const {
  return Complex(v.adjoint() * form_.apply(u));
}

const Mat& SesquilinearForm::gramHonV() const {
  if (!ghat_) {
    if (incl_identity_) {
      ghat_ = H_.gram();
    } else if (incl_.isSparse() && H_.gram().isSparse()) {
      ghat_ = Mat(SpMatrix(incl_.sparseRef().adjoint() * H_.gram().sparseRef() *
                           incl_.sparseRef()));
    } else {
      Matrix e = incl_.dense();
      ghat_ = Mat(Matrix(e.adjoint() * H_.gram().dense() * e));
    }
  }
  return *ghat_;
}

const Matrix& SesquilinearForm::inclAdjGram() const {
  if (!incl_adj_gram_) {
    if (incl_identity_) {
      incl_adj_gram_ = H_.gram().dense();
    } else {
      incl_adj_gram_ = Matrix(matProductKeepSparse(matAdjoint(incl_), H_.gram()).dense());
    }
  }
  return *incl_adj_gram_;
}

const SectorialityConstants& SesquilinearForm::constants(double alpha_target) const {
  if (!constants_) constants_ = sectoriality_constants(*this, alpha_target);
  return *constants_;
}

SesquilinearForm SesquilinearForm::adjointForm() const {
  SesquilinearForm out(H_, V_, incl_, matAdjoint(form_), label_.empty() ? "" : label_ + "*");
  if (constants_) out.constants_ = constants_;  // a and a* share all constants
  return out;
}

SectorialityConstants sectoriality_constants(const SesquilinearForm& form,
                                             double alpha_target) {
  require(alpha_target > 0.0, "sectoriality_constants: alpha_target must be positive");
  SectorialityConstants c;
  c.alpha = alpha_target;
  c.M = weighted_bilinear_norm(form.form(), form.V(), form.V());
  c.c_V = weighted_norm(form.incl(), form.V(), form.H());
  // minimal omega: Re a(u,u) + omega |u|_H^2 - alpha |u|_V^2 >= 0 on V
  Matrix a = form.form().dense();
  Matrix re_a = 0.5 * (a + a.adjoint().eval());
  Matrix pencil = re_a - alpha_target * form.V().gram().dense();
  auto eig = generalized_hermitian_eigs(Mat(Matrix(pencil)), form.gramHonV());
  c.omega = std::max(0.0, -eig.values(0));
  return c;
}

Matrix resolvent_into_V(const SesquilinearForm& form, Complex z) {
  Mat s = form.gramHonV();
  Mat sz = s.isSparse() && form.form().isSparse()
               ? Mat(SpMatrix(z * s.sparseRef() - form.form().sparseRef()))
               : Mat(Matrix(z * s.dense() - form.form().dense()));
  try {
    return solve(sz, form.inclAdjGram());
  } catch (const SingularMatrixError&) {
    throw SpectrumHitError("resolvent: z is (numerically) in the spectrum", z);
  }
}

Matrix resolvent(const SesquilinearForm& form, Complex z) {
  Matrix x = resolvent_into_V(form, z);
  if (form.inclIsIdentity()) return x;
  return form.incl().isSparse() ? Matrix(form.incl().sparseRef() * x)
                                : Matrix(form.incl().denseRef() * x);
}

SectorCheck check_sector_inclusion(const SesquilinearForm& form, double slack) {
  const SectorialityConstants& c = form.constants();
  const double angle = c.sectorAngle();
  auto eigs = pencil_eigs(form.form(), form.gramHonV());
  SectorCheck out;
  out.eigenvalues.assign(eigs.values.data(), eigs.values.data() + eigs.values.size());
  out.worst_slack = -M_PI;
  for (Complex lam : out.eigenvalues) {
    Complex shifted = lam + c.omega;
    double a = std::abs(std::arg(shifted));
    out.worst_slack = std::max(out.worst_slack, a - angle);
  }
  out.pass = out.worst_slack <= slack;
  return out;
}

ResolventBoundsCheck check_resolvent_bounds(const SesquilinearForm& form, double theta,
                                            const std::vector<Complex>& z_samples,
                                            double rel_tol) {
  const SectorialityConstants& c = form.constants();
  SectorEstimates est = sector_estimates(c, theta);
  ResolventBoundsCheck out;
  for (Complex z : z_samples) {
    Complex shifted = z + c.omega;
    require(std::abs(std::arg(shifted)) >= theta - 1e-12,
            "check_resolvent_bounds: sample lies inside Sigma_theta - omega");
    double r = std::abs(shifted);
    Matrix rv = resolvent_into_V(form, z);
    Matrix rz = form.inclIsIdentity() ? rv : Matrix(form.incl().dense() * rv);
    double n_hh = weighted_norm(Mat(rz), form.H(), form.H());
    double n_hv = weighted_norm(Mat(rv), form.H(), form.V());
    // R(z)^* is the resolvent of the adjoint form at conj z; as a map H -> V
    // its coefficients are S(z)^{-H} incl^H G_H.
    Matrix rv_adj = resolvent_into_V(form.adjointForm(), std::conj(z));
    double n_hv_adj = weighted_norm(Mat(rv_adj), form.H(), form.V());
    out.worst_HH = std::max(out.worst_HH, n_hh * r / est.D_theta);
    out.worst_HV = std::max(out.worst_HV, n_hv * std::sqrt(r) / est.C_theta);
    out.worst_HV_adj = std::max(out.worst_HV_adj, n_hv_adj * std::sqrt(r) / est.C_theta);
  }
  double lim = 1.0 + rel_tol;
  out.pass = out.worst_HH <= lim && out.worst_HV <= lim && out.worst_HV_adj <= lim;
  return out;
}

std::vector<Complex> sector_exterior_samples(double theta, double omega, int n_per_ray,
                                             double r_lo, double r_hi) {
  require(n_per_ray >= 1 && r_hi >= r_lo && r_lo > 0.0, "sector_exterior_samples: bad input");
  std::vector<Complex> zs;
  std::vector<double> phis;
  if (theta < M_PI) {
    phis = {theta + 0.25 * (M_PI - theta), theta + 0.6 * (M_PI - theta), M_PI};
  } else {
    phis = {M_PI};
  }
  for (double phi : phis) {
    for (int k = 0; k < n_per_ray; ++k) {
      double t = n_per_ray == 1 ? 0.0 : static_cast<double>(k) / (n_per_ray - 1);
      double r = r_lo * std::pow(r_hi / r_lo, t);
      zs.push_back(Complex(-omega, 0.0) + std::polar(r, phi));
      if (phi < M_PI) zs.push_back(Complex(-omega, 0.0) + std::polar(r, -phi));
    }
  }
  return zs;
}

Json form_to_json(const SesquilinearForm& form) {
  Json j;
  j["gram_H"] = mat_to_json(form.H().gram());
  j["gram_V"] = mat_to_json(form.V().gram());
  j["incl"] = mat_to_json(form.incl());
  j["form"] = mat_to_json(form.form());
  const SectorialityConstants& c = form.constants();
  j["constants"] = {{"M", c.M}, {"alpha", c.alpha}, {"omega", c.omega}, {"c_V", c.c_V}};
  return j;
}

SesquilinearForm form_from_json(const Json& j) {
  require(j.contains("gram_H") && j.contains("gram_V") && j.contains("incl") &&
              j.contains("form"),
          "form JSON: missing required field");
  WeightedSpace H(mat_from_json(j.at("gram_H")));
  WeightedSpace V(mat_from_json(j.at("gram_V")));
  SesquilinearForm form(std::move(H), std::move(V), mat_from_json(j.at("incl")),
                        mat_from_json(j.at("form")));
  if (j.contains("constants")) {
    const Json& c = j.at("constants");
    SectorialityConstants sc;
    sc.M = c.at("M").get<double>();
    sc.alpha = c.at("alpha").get<double>();
    sc.omega = c.at("omega").get<double>();
    sc.c_V = c.at("c_V").get<double>();
    form.setConstants(sc);
  }
  return form;
}

}  // namespace qsect
