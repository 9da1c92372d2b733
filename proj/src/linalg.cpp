#include "qsect/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace qsect {

// ---------------------------------------------------------------------------
// Mat

Mat Mat::identity(int n) {
  return Mat(Matrix(Matrix::Identity(n, n)));
}

Eigen::Index Mat::rows() const {
  return isSparse() ? std::get<SpMatrix>(store_).rows() : std::get<Matrix>(store_).rows();
}

Eigen::Index Mat::cols() const {
  return isSparse() ? std::get<SpMatrix>(store_).cols() : std::get<Matrix>(store_).cols();
}

const Matrix& Mat::denseRef() const {
  if (isSparse()) throw ConfigError("Mat::denseRef on sparse matrix");
  return std::get<Matrix>(store_);
}

const SpMatrix& Mat::sparseRef() const {
  if (!isSparse()) throw ConfigError("Mat::sparseRef on dense matrix");
  return std::get<SpMatrix>(store_);
}

Matrix Mat::dense() const {
  return isSparse() ? Matrix(std::get<SpMatrix>(store_)) : std::get<Matrix>(store_);
}

Vector Mat::apply(const Vector& x) const {
  return isSparse() ? Vector(std::get<SpMatrix>(store_) * x) : Vector(std::get<Matrix>(store_) * x);
}

Vector Mat::applyAdjoint(const Vector& x) const {
  return isSparse() ? Vector(std::get<SpMatrix>(store_).adjoint() * x)
                    : Vector(std::get<Matrix>(store_).adjoint() * x);
}

double Mat::maxAbs() const {
  if (isSparse()) {
    const SpMatrix& s = std::get<SpMatrix>(store_);
    double m = 0.0;
    for (int k = 0; k < s.outerSize(); ++k)
      for (SpMatrix::InnerIterator it(s, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
  }
  const Matrix& d = std::get<Matrix>(store_);
  return d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// WeightedSpace

WeightedSpace::WeightedSpace(Mat gram, std::optional<RealVector> lumped, std::string label)
    : dim_(static_cast<int>(gram.rows())), gram_(std::move(gram)),
      label_(std::move(label)), lumped_(std::move(lumped)) {
  require(gram_.rows() == gram_.cols(), "Gram matrix must be square");
  require(dim_ > 0, "Gram matrix must be nonempty");
  if (!gram_.isSparse() || dim_ <= kDenseStorageLimit) {
    Matrix g = gram_.dense();
    require(approxHermitian(g), "Gram matrix must be Hermitian (1e-12 relative)");
  }
  if (lumped_) {
    require(lumped_->size() == dim_, "lumped weight vector has wrong length");
    require(lumped_->minCoeff() > 0.0, "lumped weights must be positive");
  }
}

WeightedSpace WeightedSpace::euclidean(int n, std::string label) {
  return WeightedSpace(Mat::identity(n), std::nullopt, std::move(label));
}

void WeightedSpace::ensureFactor() const {
  if (cholL_ || sparse_llt_) return;
  if (gram_.isSparse() && dim_ > kDenseStorageLimit) {
    auto llt = std::make_shared<Eigen::SimplicialLLT<SpMatrix>>();
    llt->compute(gram_.sparseRef());
    if (llt->info() != Eigen::Success)
      throw ConfigError("Gram matrix is not positive definite (sparse LLT failed)");
    sparse_llt_ = std::move(llt);
    return;
  }
  Eigen::LLT<Matrix> llt(gram_.dense());
  if (llt.info() != Eigen::Success)
    throw ConfigError("Gram matrix is not positive definite (LLT failed)");
  cholL_ = std::make_shared<Matrix>(llt.matrixL());
}

const Matrix& WeightedSpace::cholL() const {
  ensureFactor();
  if (!cholL_) throw ConfigError("dense Cholesky factor unavailable above the dense limit");
  return *cholL_;
}

Vector WeightedSpace::gramApply(const Vector& v) const { return gram_.apply(v); }

Matrix WeightedSpace::gramApply(const Matrix& v) const {
  return gram_.isSparse() ? Matrix(gram_.sparseRef() * v) : Matrix(gram_.denseRef() * v);
}

Vector WeightedSpace::gramSolve(const Vector& v) const {
  ensureFactor();
  if (sparse_llt_) return sparse_llt_->solve(v);
  Vector y = cholL_->triangularView<Eigen::Lower>().solve(v);
  return cholL_->adjoint().triangularView<Eigen::Upper>().solve(y);
}

Matrix WeightedSpace::gramSolve(const Matrix& v) const {
  ensureFactor();
  if (sparse_llt_) return sparse_llt_->solve(v);
  Matrix y = cholL_->triangularView<Eigen::Lower>().solve(v);
  return cholL_->adjoint().triangularView<Eigen::Upper>().solve(y);
}

double WeightedSpace::norm(const Vector& v) const {
  double sq = std::real(Complex(v.adjoint() * gram_.apply(v)));
  return std::sqrt(std::max(0.0, sq));
}

Complex WeightedSpace::inner(const Vector& u, const Vector& v) const {
  return Complex(v.adjoint() * gram_.apply(u));
}

// ---------------------------------------------------------------------------
// Mat algebra

Mat mat_mul(const Mat& A, const Mat& B) {
  require(A.cols() == B.rows(), "mat_mul: inner dimension mismatch");
  if (A.isSparse() && B.isSparse()) return Mat(SpMatrix(A.sparseRef() * B.sparseRef()));
  if (A.isSparse()) return Mat(Matrix(A.sparseRef() * B.denseRef()));
  if (B.isSparse()) return Mat(Matrix(A.denseRef() * B.sparseRef()));
  return Mat(Matrix(A.denseRef() * B.denseRef()));
}

Mat mat_add(const Mat& A, const Mat& B) {
  require(A.rows() == B.rows() && A.cols() == B.cols(), "mat_add: dimension mismatch");
  if (A.isSparse() && B.isSparse()) return Mat(SpMatrix(A.sparseRef() + B.sparseRef()));
  return Mat(Matrix(A.dense() + B.dense()));
}

Mat mat_sub(const Mat& A, const Mat& B) {
  require(A.rows() == B.rows() && A.cols() == B.cols(), "mat_sub: dimension mismatch");
  if (A.isSparse() && B.isSparse()) return Mat(SpMatrix(A.sparseRef() - B.sparseRef()));
  return Mat(Matrix(A.dense() - B.dense()));
}

Mat mat_scale(Complex c, const Mat& A) {
  if (A.isSparse()) return Mat(SpMatrix(c * A.sparseRef()));
  return Mat(Matrix(c * A.denseRef()));
}

Mat mat_adjoint(const Mat& A) {
  if (A.isSparse()) return Mat(SpMatrix(A.sparseRef().adjoint()));
  return Mat(Matrix(A.denseRef().adjoint()));
}

// ---------------------------------------------------------------------------
// norms

double block_power_sigma_max(const std::function<Vector(const Vector&)>& applyT,
                             const std::function<Vector(const Vector&)>& applyTH,
                             Eigen::Index ncols, int block, int max_iter, double tol) {
  // deterministic seeded start; converges to sigma_max even for multiple
  // leading singular values (block of 4)
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  block = static_cast<int>(std::min<Eigen::Index>(block, ncols));
  Matrix X(ncols, block);
  for (Eigen::Index i = 0; i < ncols; ++i)
    for (int j = 0; j < block; ++j) X(i, j) = Complex(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<Matrix> qr0(X);
  X = qr0.householderQ() * Matrix::Identity(ncols, block);

  double sigma = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Matrix Y(ncols, block);
    double smax = 0.0;
    for (int j = 0; j < block; ++j) {
      Vector tx = applyT(X.col(j));
      smax = std::max(smax, tx.norm());
      Y.col(j) = applyTH(tx);
    }
    Eigen::HouseholderQR<Matrix> qr(Y);
    X = qr.householderQ() * Matrix::Identity(ncols, block);
    if (smax <= 1e-300) return 0.0;
    if (std::abs(smax - sigma) <= tol * smax && it >= 10) return smax;
    sigma = smax;
  }
  return sigma;
}

namespace {

// Whitened representative L_cod^H T L_dom^{-H} (dense path).
Matrix whiten(const Matrix& T, const WeightedSpace& dom, const WeightedSpace& cod) {
  // T L_dom^{-H}: solve X L_dom^H = T  <=>  L_dom X^H = T^H
  Matrix XH = dom.cholL().triangularView<Eigen::Lower>().solve(T.adjoint());
  return cod.cholL().adjoint() * XH.adjoint();
}

double sigmaMaxDense(const Matrix& W) {
  if (W.size() == 0) return 0.0;
  if (std::min(W.rows(), W.cols()) <= 16)
    return Eigen::JacobiSVD<Matrix>(W).singularValues()(0);
  if (std::min(W.rows(), W.cols()) <= kDirectSvdLimit)
    return Eigen::BDCSVD<Matrix>(W).singularValues()(0);
  auto applyT = [&](const Vector& x) { return Vector(W * x); };
  auto applyTH = [&](const Vector& x) { return Vector(W.adjoint() * x); };
  return block_power_sigma_max(applyT, applyTH, W.cols());
}

}  // namespace

double weighted_norm_matfree(const std::function<Vector(const Vector&)>& applyT,
                             const std::function<Vector(const Vector&)>& applyTH,
                             const WeightedSpace& dom, const WeightedSpace& cod) {
  // Seeded block power iteration on G_dom^{-1} T^H G_cod T, whose top
  // eigenvalue is the squared weighted norm; needs only operator actions and
  // Gram solves, never a dense factor.
  const int n = dom.dim();
  const int block = std::min(4, n);
  std::mt19937_64 rng(0x2545F4914F6CDD1Dull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix X(n, block);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < block; ++j) X(i, j) = Complex(gauss(rng), gauss(rng));
  auto orthonormalize = [&](Matrix& Z) {  // modified Gram-Schmidt in <.,.>_dom
    for (int j = 0; j < Z.cols(); ++j) {
      for (int k = 0; k < j; ++k)
        Z.col(j) -= dom.inner(Z.col(j), Z.col(k)) * Z.col(k);
      double nj = dom.norm(Z.col(j));
      if (nj > 1e-300) Z.col(j) /= nj;
    }
  };
  orthonormalize(X);
  double sigma = 0.0;
  for (int it = 0; it < 500; ++it) {
    double smax = 0.0;
    Matrix Y(n, block);
    for (int j = 0; j < block; ++j) {
      Vector tx = applyT(X.col(j));
      smax = std::max(smax, cod.norm(tx));
      Y.col(j) = dom.gramSolve(applyTH(cod.gramApply(tx)));
    }
    orthonormalize(Y);
    X = Y;
    if (smax <= 1e-300) return 0.0;
    if (std::abs(smax - sigma) <= 1e-11 * smax && it >= 10) return smax;
    sigma = smax;
  }
  return sigma;
}

double weighted_norm(const Mat& T, const WeightedSpace& dom, const WeightedSpace& cod) {
  require(T.cols() == dom.dim() && T.rows() == cod.dim(),
          "weighted_norm: operator/space dimension mismatch");
  if (std::max(T.rows(), T.cols()) <= kDenseStorageLimit)
    return sigmaMaxDense(whiten(T.dense(), dom, cod));
  return weighted_norm_matfree([&](const Vector& x) { return T.apply(x); },
                               [&](const Vector& x) { return T.applyAdjoint(x); }, dom, cod);
}

double weighted_bilinear_norm(const Mat& D, const WeightedSpace& left,
                              const WeightedSpace& right) {
  require(D.cols() == left.dim() && D.rows() == right.dim(),
          "weighted_bilinear_norm: dimension mismatch");
  if (std::max(D.rows(), D.cols()) <= kDenseStorageLimit) {
    // sigma_max(L_right^{-1} D L_left^{-H})
    Matrix A = right.cholL().triangularView<Eigen::Lower>().solve(D.dense());
    Matrix BH = left.cholL().triangularView<Eigen::Lower>().solve(A.adjoint());
    return sigmaMaxDense(BH.adjoint());
  }
  // Large case: the pairing norm equals the weighted operator norm of
  // G_right^{-1} D : left -> right (Riesz representative of u -> u^H D f).
  return weighted_norm_matfree(
      [&](const Vector& x) { return right.gramSolve(D.apply(x)); },
      [&](const Vector& y) { return D.applyAdjoint(right.gramSolve(y)); }, left, right);
}

Matrix gram_adjoint(const Mat& T, const WeightedSpace& dom, const WeightedSpace& cod) {
  require(T.cols() == dom.dim() && T.rows() == cod.dim(),
          "gram_adjoint: operator/space dimension mismatch");
  Matrix rhs = T.isSparse() ? Matrix(T.sparseRef().adjoint() * cod.gram().dense())
                            : Matrix(T.denseRef().adjoint() * cod.gram().dense());
  return dom.gramSolve(rhs);
}

// ---------------------------------------------------------------------------
// solve

Matrix solve(const Mat& A, const Matrix& rhs) {
  require(A.rows() == A.cols(), "solve: matrix must be square");
  require(A.rows() == rhs.rows(), "solve: rhs dimension mismatch");
  if (A.isSparse()) {
    Eigen::SparseLU<SpMatrix> lu;
    lu.compute(A.sparseRef());
    if (lu.info() != Eigen::Success)
      throw SingularMatrixError("sparse LU factorization failed (matrix singular?)", -1);
    return lu.solve(rhs);
  }
  const Matrix& Ad = A.denseRef();
  Eigen::PartialPivLU<Matrix> lu(Ad);
  const Matrix& LU = lu.matrixLU();
  double scale = std::max(1e-300, Ad.cwiseAbs().maxCoeff());
  int bad = -1;
  double bad_val = 0.0;
  for (Eigen::Index i = 0; i < LU.rows(); ++i) {
    double p = std::abs(LU(i, i));
    if (p <= 1e-14 * scale && (bad < 0 || p < bad_val)) {
      bad = static_cast<int>(i);
      bad_val = p;
    }
  }
  if (bad >= 0)
    throw SingularMatrixError("matrix numerically singular at pivot " + std::to_string(bad), bad);
  return lu.solve(rhs);
}

// ---------------------------------------------------------------------------
// eigensolvers

HermitianEigs generalized_hermitian_eigs(const Mat& A, const Mat& B) {
  require(A.rows() == A.cols() && B.rows() == B.cols() && A.rows() == B.rows(),
          "generalized_hermitian_eigs: dimension mismatch");
  Matrix Ad = A.dense(), Bd = B.dense();
  require(approxHermitian(Ad), "generalized_hermitian_eigs: A must be Hermitian");
  require(approxHermitian(Bd), "generalized_hermitian_eigs: B must be Hermitian");
  Ad = Complex(0.5, 0.0) * (Ad + Ad.adjoint().eval());
  Bd = Complex(0.5, 0.0) * (Bd + Bd.adjoint().eval());
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(Ad, Bd,
      Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success)
    throw NumericalError("generalized Hermitian eigensolver failed (B not HPD?)");
  HermitianEigs out;
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  return out;
}

PencilEigs pencil_eigs(const Mat& A, const Mat& B) {
  require(A.rows() == A.cols() && B.rows() == B.cols() && A.rows() == B.rows(),
          "pencil_eigs: dimension mismatch");
  Matrix Ad = A.dense();
  if (approxHermitian(Ad)) {
    HermitianEigs he = generalized_hermitian_eigs(A, B);
    PencilEigs out;
    out.values = he.values.cast<Complex>();
    out.vectors = he.vectors;
    for (Eigen::Index j = 0; j < out.vectors.cols(); ++j)
      out.vectors.col(j).normalize();
    return out;
  }
  Eigen::LLT<Matrix> llt(B.dense());
  if (llt.info() != Eigen::Success)
    throw ConfigError("pencil_eigs: B must be Hermitian positive definite");
  Matrix L = llt.matrixL();
  Matrix C = L.triangularView<Eigen::Lower>().solve(Ad);
  C = L.triangularView<Eigen::Lower>().solve(C.adjoint()).adjoint();  // L^{-1} A L^{-H}
  Eigen::ComplexEigenSolver<Matrix> es(C, true);
  if (es.info() != Eigen::Success) throw NumericalError("complex eigensolver failed");
  PencilEigs out;
  out.values = es.eigenvalues();
  out.vectors = L.adjoint().triangularView<Eigen::Upper>().solve(es.eigenvectors());
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) out.vectors.col(j).normalize();
  return out;
}

// ---------------------------------------------------------------------------
// contours

ContourSpec ContourSpec::circle(Complex center, double radius, int n_nodes) {
  ContourSpec s;
  s.kind = Kind::Circle;
  s.center = center;
  s.radius = radius;
  s.n_nodes = n_nodes;
  return s;
}

ContourSpec ContourSpec::sector(double sigma, double omega, double r_max, double r_min,
                                int nodes_per_decade) {
  ContourSpec s;
  s.kind = Kind::Sector;
  s.sigma = sigma;
  s.omega = omega;
  s.r_max = r_max;
  s.r_min = r_min;
  s.nodes_per_decade = nodes_per_decade;
  return s;
}

std::vector<ContourNode> contour_nodes(const ContourSpec& spec) {
  std::vector<ContourNode> nodes;
  if (spec.kind == ContourSpec::Kind::Circle) {
    require(spec.radius > 0.0, "contour: circle radius must be positive");
    require(spec.n_nodes >= 4, "contour: need at least 4 circle nodes");
    const int n = spec.n_nodes;
    nodes.reserve(n);
    const Complex iw = Complex(0.0, 2.0 * M_PI / n);
    for (int j = 0; j < n; ++j) {
      double th = 2.0 * M_PI * j / n;
      Complex rel = std::polar(spec.radius, th);
      nodes.push_back({spec.center + rel, iw * rel});
    }
    return nodes;
  }

  require(spec.sigma > 0.0 && spec.sigma < M_PI, "contour: sector angle must be in (0, pi)");
  double rmin = spec.r_min > 0.0 ? spec.r_min : 1e-8 * std::max(1.0, std::abs(spec.omega));
  require(spec.r_max > rmin, "contour: r_max must exceed r_min");
  require(spec.nodes_per_decade >= 1, "contour: nodes_per_decade must be >= 1");

  const double decades = std::log10(spec.r_max / rmin);
  const int n = std::max(2, static_cast<int>(std::ceil(spec.nodes_per_decade * decades)) + 1);
  const double dt = std::log(spec.r_max / rmin) / (n - 1);
  const Complex vertex(-spec.omega, 0.0);
  const Complex dir_lo = std::polar(1.0, -spec.sigma);
  const Complex dir_up = std::polar(1.0, spec.sigma);

  // Boundary of Sigma_sigma - omega with the sector to the left: out along the
  // lower ray (arg -sigma), back in along the upper ray. Trapezoid in log r;
  // the first node also carries a rectangle term r_min*f(z(r_min)) closing the
  // (0, r_min) gap to O(r_min^2).
  nodes.reserve(2 * static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    double r = rmin * std::exp(dt * j);
    double wt = (j == 0 || j == n - 1) ? 0.5 * dt : dt;
    double wr = wt * r + (j == 0 ? rmin : 0.0);
    nodes.push_back({vertex + r * dir_lo, wr * dir_lo});
  }
  for (int j = n - 1; j >= 0; --j) {
    double r = rmin * std::exp(dt * j);
    double wt = (j == 0 || j == n - 1) ? 0.5 * dt : dt;
    double wr = wt * r + (j == 0 ? rmin : 0.0);
    nodes.push_back({vertex + r * dir_up, -wr * dir_up});
  }
  return nodes;
}

// ---------------------------------------------------------------------------
// serialization

Json mat_to_json(const Mat& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  if (m.isSparse()) {
    const SpMatrix& s = m.sparseRef();
    j["format"] = "csc";
    std::vector<long> colptr(s.cols() + 1), rowind;
    std::vector<double> re, im;
    rowind.reserve(s.nonZeros());
    re.reserve(s.nonZeros());
    im.reserve(s.nonZeros());
    long nnz = 0;
    for (int k = 0; k < s.outerSize(); ++k) {
      colptr[k] = nnz;
      for (SpMatrix::InnerIterator it(s, k); it; ++it) {
        rowind.push_back(it.row());
        re.push_back(it.value().real());
        im.push_back(it.value().imag());
        ++nnz;
      }
    }
    colptr[s.cols()] = nnz;
    j["colptr"] = colptr;
    j["rowind"] = rowind;
    j["re"] = re;
    j["im"] = im;
    return j;
  }
  const Matrix& d = m.denseRef();
  j["format"] = "dense";
  std::vector<double> re, im;
  re.reserve(d.size());
  im.reserve(d.size());
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index k = 0; k < d.cols(); ++k) {
      re.push_back(d(i, k).real());
      im.push_back(d(i, k).imag());
    }
  j["re"] = re;
  j["im"] = im;
  return j;
}

Mat mat_from_json(const Json& j) {
  require(j.contains("rows") && j.contains("cols") && j.contains("format") &&
              j.contains("re") && j.contains("im"),
          "matrix JSON: missing required field");
  const long rows = j.at("rows").get<long>();
  const long cols = j.at("cols").get<long>();
  require(rows >= 0 && cols >= 0, "matrix JSON: negative dimensions");
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  require(re.size() == im.size(), "matrix JSON: re/im length mismatch");
  const std::string fmt = j.at("format").get<std::string>();
  if (fmt == "dense") {
    require(static_cast<long>(re.size()) == rows * cols, "matrix JSON: wrong entry count");
    Matrix d(rows, cols);
    size_t p = 0;
    for (long i = 0; i < rows; ++i)
      for (long k = 0; k < cols; ++k, ++p) d(i, k) = Complex(re[p], im[p]);
    return Mat(std::move(d));
  }
  if (fmt == "csc") {
    require(j.contains("colptr") && j.contains("rowind"), "matrix JSON: csc needs colptr/rowind");
    const auto colptr = j.at("colptr").get<std::vector<long>>();
    const auto rowind = j.at("rowind").get<std::vector<long>>();
    require(static_cast<long>(colptr.size()) == cols + 1, "matrix JSON: bad colptr length");
    require(rowind.size() == re.size(), "matrix JSON: rowind/value length mismatch");
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(re.size());
    for (long c = 0; c < cols; ++c) {
      require(colptr[c] <= colptr[c + 1], "matrix JSON: colptr not monotone");
      for (long p = colptr[c]; p < colptr[c + 1]; ++p) {
        require(rowind[p] >= 0 && rowind[p] < rows, "matrix JSON: row index out of range");
        trips.emplace_back(rowind[p], c, Complex(re[p], im[p]));
      }
    }
    SpMatrix s(rows, cols);
    s.setFromTriplets(trips.begin(), trips.end());
    return Mat(std::move(s));
  }
  throw ConfigError("matrix JSON: unknown format '" + fmt + "'");
}

}  // namespace qsect
