#pragma once

// Shared helpers for the test binaries: seeded random matrices and spaces.
// Oracles in the test files use raw Eigen calls, never the library wrappers,
// so each assertion compares two independent code paths.

#include <random>

#include <Eigen/Dense>

#include "qsect/forms.hpp"
#include "qsect/linalg.hpp"

namespace qtest {

using qsect::Complex;
using qsect::Matrix;
using qsect::Vector;

inline Matrix randomMatrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * Complex(g(rng), g(rng));
  return m;
}

inline Vector randomVector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * Complex(g(rng), g(rng));
  return v;
}

// Random sectorial form bundle: arbitrary Grams and form matrix; the
// computed constants (minimal omega for the target alpha) make the
// sectoriality inequalities hold by construction.
inline qsect::SesquilinearForm randomForm(std::mt19937_64& rng, int dim,
                                          double alpha = 0.5, double cond = 20.0);

// Random Hermitian positive definite matrix with spectrum in [1/cond, 1].
inline Matrix randomHPD(std::mt19937_64& rng, int n, double cond = 100.0) {
  Matrix a = randomMatrix(rng, n, n);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  std::uniform_real_distribution<double> u(1.0 / cond, 1.0);
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = u(rng);
  d(0) = 1.0;
  if (n > 1) d(n - 1) = 1.0 / cond;
  return q * d.asDiagonal() * q.adjoint();
}

inline qsect::SesquilinearForm randomForm(std::mt19937_64& rng, int dim, double alpha,
                                          double cond) {
  Matrix gh = randomHPD(rng, dim, cond);
  Matrix gv = randomHPD(rng, dim, cond);
  Matrix a = randomMatrix(rng, dim, dim);
  qsect::SesquilinearForm form(qsect::WeightedSpace(qsect::Mat(gh)),
                               qsect::WeightedSpace(qsect::Mat(gv)),
                               qsect::Mat::identity(dim), qsect::Mat(a));
  form.constants(alpha);
  return form;
}

// Same, but with a Hermitian form matrix (self-adjoint associated operator).
inline qsect::SesquilinearForm randomHermitianForm(std::mt19937_64& rng, int dim,
                                                   double alpha = 0.5, double cond = 20.0) {
  Matrix gh = randomHPD(rng, dim, cond);
  Matrix gv = randomHPD(rng, dim, cond);
  Matrix a = randomMatrix(rng, dim, dim);
  a = Complex(0.5, 0.0) * (a + a.adjoint().eval());
  qsect::SesquilinearForm form(qsect::WeightedSpace(qsect::Mat(gh)),
                               qsect::WeightedSpace(qsect::Mat(gv)),
                               qsect::Mat::identity(dim), qsect::Mat(a));
  form.constants(alpha);
  return form;
}

}  // namespace qtest
