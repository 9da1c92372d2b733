#pragma once

// Dense/sparse linear-algebra kernel shared by all qsect modules: weighted
// (Gram-matrix) spaces, operator norms between them, Gram adjoints, pencil
// eigensolvers, quadrature contours and matrix (de)serialization.

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <json.hpp>

namespace qsect {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using SpMatrix = Eigen::SparseMatrix<Complex>;
using Json = nlohmann::json;

// Storage/algorithm thresholds.
inline constexpr int kDenseStorageLimit = 2000;  // densify at or below this dim
inline constexpr int kDirectSvdLimit = 600;      // full SVD at or below this dim

// ---------------------------------------------------------------------------
// errors

struct QsectError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// invalid input, malformed config, dimension mismatch -> CLI exit code 2
struct ConfigError : QsectError {
  using QsectError::QsectError;
};

// numerical breakdown (singular solve, contour through spectrum, ...) -> 3
struct NumericalError : QsectError {
  using QsectError::QsectError;
};

struct SingularMatrixError : NumericalError {
  int pivot_index;  // offending pivot (dense LU); -1 when not available
  explicit SingularMatrixError(const std::string& msg, int pivot)
      : NumericalError(msg), pivot_index(pivot) {}
};

struct SpectrumHitError : NumericalError {
  Complex z;
  explicit SpectrumHitError(const std::string& msg, Complex z_) : NumericalError(msg), z(z_) {}
};

struct ContourHitsSpectrumError : NumericalError {
  using NumericalError::NumericalError;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

// ---------------------------------------------------------------------------
// Mat: dense or compressed-column matrix

class Mat {
 public:
  Mat() : store_(Matrix()) {}
  Mat(Matrix m) : store_(std::move(m)) {}  // NOLINT: implicit by design
  Mat(SpMatrix m) : store_(std::move(m)) { std::get<SpMatrix>(store_).makeCompressed(); }
  static Mat identity(int n);

  Eigen::Index rows() const;
  Eigen::Index cols() const;
  bool isSparse() const { return std::holds_alternative<SpMatrix>(store_); }

  const Matrix& denseRef() const;    // throws unless dense-stored
  const SpMatrix& sparseRef() const; // throws unless sparse-stored
  Matrix dense() const;              // always materializes

  Vector apply(const Vector& x) const;
  Vector applyAdjoint(const Vector& x) const;

  double maxAbs() const;

 private:
  std::variant<Matrix, SpMatrix> store_;
};

// ---------------------------------------------------------------------------
// WeightedSpace: finite-dimensional Hilbert space with HPD Gram matrix.
// Inner product convention: <u,v> = v^H G u (linear in the first argument),
// matching the sesquilinear-form convention a(u,v) = v^H A u.

class WeightedSpace {
 public:
  explicit WeightedSpace(Mat gram, std::optional<RealVector> lumped = std::nullopt,
                         std::string label = {});
  static WeightedSpace euclidean(int n, std::string label = {});

  int dim() const { return dim_; }
  const Mat& gram() const { return gram_; }
  const std::string& label() const { return label_; }

  // Lower Cholesky factor L with G = L L^H (dense; dims here stay well below
  // the dense storage limit wherever whitening is needed).
  const Matrix& cholL() const;

  Vector gramApply(const Vector& v) const;
  Matrix gramApply(const Matrix& v) const;
  Vector gramSolve(const Vector& v) const;
  Matrix gramSolve(const Matrix& v) const;

  double norm(const Vector& v) const;
  Complex inner(const Vector& u, const Vector& v) const;  // <u,v> = v^H G u

  // Optional diagonal weights of a lumped variant of the Gram, for lattice
  // (entrywise) work in the invariance module.
  const std::optional<RealVector>& lumped() const { return lumped_; }

 private:
  int dim_;
  Mat gram_;
  std::string label_;
  std::optional<RealVector> lumped_;
  mutable std::shared_ptr<Matrix> cholL_;                                   // lazy
  mutable std::shared_ptr<Eigen::SimplicialLLT<SpMatrix>> sparse_llt_;      // lazy
  void ensureFactor() const;
};

// Mat algebra; sparse operands yield sparse results, anything else densifies.
Mat mat_mul(const Mat& A, const Mat& B);
Mat mat_add(const Mat& A, const Mat& B);
Mat mat_sub(const Mat& A, const Mat& B);
Mat mat_scale(Complex c, const Mat& A);
Mat mat_adjoint(const Mat& A);

// ---------------------------------------------------------------------------
// weighted operator/bilinear norms and Gram adjoints

// sup_{x != 0} ||T x||_cod / ||x||_dom = sigma_max(L_cod^H T L_dom^{-H}).
double weighted_norm(const Mat& T, const WeightedSpace& dom, const WeightedSpace& cod);

// Same norm for an operator given only through its action and the action of
// its plain (coefficient) adjoint; block power iteration on
// G_dom^{-1} T^H G_cod T, deterministic seed.
double weighted_norm_matfree(const std::function<Vector(const Vector&)>& applyT,
                             const std::function<Vector(const Vector&)>& applyTH,
                             const WeightedSpace& dom, const WeightedSpace& cod);

// sup |u^H D f| / (||f||_left ||u||_right) = sigma_max(L_right^{-1} D L_left^{-H});
// D pairs f (columns, "left" space) against u (rows, "right" space).
double weighted_bilinear_norm(const Mat& D, const WeightedSpace& left,
                              const WeightedSpace& right);

// T*: cod -> dom with <T u, v>_cod = <u, T* v>_dom; matrix G_dom^{-1} T^H G_cod.
Matrix gram_adjoint(const Mat& T, const WeightedSpace& dom, const WeightedSpace& cod);

// ---------------------------------------------------------------------------
// solvers and eigensolvers

// Solve A X = B. Dense: partial-pivot LU with explicit singularity detection;
// sparse: SparseLU. Throws SingularMatrixError.
Matrix solve(const Mat& A, const Matrix& rhs);

struct HermitianEigs {
  RealVector values;  // ascending
  Matrix vectors;     // columns, B-orthonormal: V^H B V = I
};

// A v = lambda B v with A Hermitian (checked, 1e-12 relative) and B HPD.
HermitianEigs generalized_hermitian_eigs(const Mat& A, const Mat& B);

struct PencilEigs {
  Vector values;
  Matrix vectors;  // columns (right eigenvectors), unit Euclidean norm
};

// A v = lambda B v for general square A, HPD B, via Cholesky reduction
// L^{-1} A L^{-H}; dispatches to the Hermitian solver when A is Hermitian.
PencilEigs pencil_eigs(const Mat& A, const Mat& B);

// ---------------------------------------------------------------------------
// quadrature contours

struct ContourNode {
  Complex z;  // node location
  Complex w;  // quadrature weight, orientation factor dz included
};

struct ContourSpec {
  enum class Kind { Circle, Sector };
  Kind kind = Kind::Circle;

  // circle |z - center| = radius, counterclockwise
  Complex center{0.0, 0.0};
  double radius = 1.0;
  int n_nodes = 64;

  // boundary of the shifted sector Sigma_sigma - omega (two rays from the
  // vertex -omega at angles +-sigma), traversed with the sector to the left
  double sigma = 0.0;
  double omega = 0.0;
  double r_min = 0.0;  // 0 -> default 1e-8 * max(1, |omega|)
  double r_max = 0.0;
  int nodes_per_decade = 40;

  static ContourSpec circle(Complex center, double radius, int n_nodes = 64);
  static ContourSpec sector(double sigma, double omega, double r_max,
                            double r_min = 0.0, int nodes_per_decade = 40);
};

std::vector<ContourNode> contour_nodes(const ContourSpec& spec);

// ---------------------------------------------------------------------------
// serialization: {"rows","cols","format":"dense"|"csc","re","im"[,"colptr","rowind"]}
// Dense entry order is row-major.

Json mat_to_json(const Mat& m);
Mat mat_from_json(const Json& j);

// ---------------------------------------------------------------------------
// misc helpers

inline bool approxHermitian(const Matrix& A, double rel_tol = 1e-12) {
  double scale = std::max(1e-300, A.cwiseAbs().maxCoeff());
  return (A - A.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

// sigma_max via seeded block power iteration on T^H T (deterministic);
// used above the direct-SVD size limit.
double block_power_sigma_max(const std::function<Vector(const Vector&)>& applyT,
                             const std::function<Vector(const Vector&)>& applyTH,
                             Eigen::Index ncols, int block = 4, int max_iter = 500,
                             double tol = 1e-11);

}  // namespace qsect
