#include <doctest.h>

#include <cmath>
#include <random>

#include "qsect/linalg.hpp"
#include "test_util.hpp"

using namespace qsect;
using qtest::randomHPD;
using qtest::randomMatrix;
using qtest::randomVector;

TEST_SUITE("linalg") {

TEST_CASE("weighted_norm with identity Grams is the plain spectral norm") {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 5; ++rep) {
    Matrix t = randomMatrix(rng, 7, 5);
    // oracle: plain SVD computed directly in the test
    double oracle = Eigen::JacobiSVD<Matrix>(t).singularValues()(0);
    double got = weighted_norm(Mat(t), WeightedSpace::euclidean(5), WeightedSpace::euclidean(7));
    CHECK(got == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("weighted_norm against pencil oracle and random-sampling lower bound") {
  std::mt19937_64 rng(202);
  for (int rep = 0; rep < 20; ++rep) {
    int nd = 3 + static_cast<int>(rng() % 10);
    int nc = 3 + static_cast<int>(rng() % 10);
    Matrix g1 = randomHPD(rng, nd), g2 = randomHPD(rng, nc);
    Matrix t = randomMatrix(rng, nc, nd);

    // oracle 1 (computed first): the squared norm is the top eigenvalue of
    // the Hermitian pencil T^H G2 T v = s^2 G1 v; raw Eigen solver.
    Matrix lhs = t.adjoint() * g2 * t;
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(
        0.5 * (lhs + lhs.adjoint()), g1, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    double oracle = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));

    // oracle 2: random sampling can only produce lower bounds.
    Eigen::LLT<Matrix> l1(g1), l2(g2);
    double sampled = 0.0;
    for (int s = 0; s < 2000; ++s) {
      Vector x = randomVector(rng, nd);
      double nx = std::sqrt(std::real(Complex(x.adjoint() * g1 * x)));
      Vector tx = t * x;
      double ntx = std::sqrt(std::real(Complex(tx.adjoint() * g2 * tx)));
      sampled = std::max(sampled, ntx / nx);
    }

    WeightedSpace dom{Mat(g1)}, cod{Mat(g2)};
    double got = weighted_norm(Mat(t), dom, cod);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(got >= sampled * (1.0 - 1e-10));  // sampling can only lower-bound
  }
}

TEST_CASE("weighted_bilinear_norm matches its sampled supremum from below") {
  std::mt19937_64 rng(303);
  for (int rep = 0; rep < 10; ++rep) {
    int nl = 4 + static_cast<int>(rng() % 6);
    int nr = 4 + static_cast<int>(rng() % 6);
    Matrix gl = randomHPD(rng, nl), gr = randomHPD(rng, nr);
    Matrix d = randomMatrix(rng, nr, nl);

    // oracle 1 (computed first): for fixed f the sup over u of
    // |u^H D f|/|u|_right is |G_right^{-1} D f|_right (dual norm attained),
    // so the square of the bilinear norm is the top eigenvalue of the pencil
    // D^H G_right^{-1} D v = s^2 G_left v; raw Eigen throughout.
    Matrix lhs = d.adjoint() * gr.ldlt().solve(d);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(
        0.5 * (lhs + lhs.adjoint()), gl, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    double oracle = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));

    // oracle 2: sampled lower bound
    double sampled = 0.0;
    for (int s = 0; s < 4000; ++s) {
      Vector f = randomVector(rng, nl), u = randomVector(rng, nr);
      double nf = std::sqrt(std::real(Complex(f.adjoint() * gl * f)));
      double nu = std::sqrt(std::real(Complex(u.adjoint() * gr * u)));
      sampled = std::max(sampled, std::abs(Complex(u.adjoint() * d * f)) / (nf * nu));
    }
    WeightedSpace left{Mat(gl)}, right{Mat(gr)};
    double got = weighted_bilinear_norm(Mat(d), left, right);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(got >= sampled * (1.0 - 1e-10));
  }
}

TEST_CASE("weighted_bilinear_norm of a diagonal pairing in diagonal spaces is explicit") {
  // <u, D f> with D = diag(d), G_left = diag(a), G_right = diag(b):
  // sup = max_i |d_i| / sqrt(a_i b_i)   (hand-derived oracle)
  Eigen::Vector3d a(1.0, 4.0, 9.0), b(4.0, 1.0, 16.0);
  Eigen::Vector3cd d(Complex(2, 0), Complex(0, 3), Complex(6, 0));
  double oracle = 0.0;
  for (int i = 0; i < 3; ++i)
    oracle = std::max(oracle, std::abs(d(i)) / std::sqrt(a(i) * b(i)));
  WeightedSpace left{Mat(Matrix(a.cast<Complex>().asDiagonal()))};
  WeightedSpace right{Mat(Matrix(b.cast<Complex>().asDiagonal()))};
  double got = weighted_bilinear_norm(Mat(Matrix(d.asDiagonal())), left, right);
  CHECK(got == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("gram_adjoint satisfies the adjoint identity on 100 random pairs") {
  std::mt19937_64 rng(404);
  Matrix g1 = randomHPD(rng, 6), g2 = randomHPD(rng, 9);
  Matrix t = randomMatrix(rng, 9, 6);
  WeightedSpace dom{Mat(g1)}, cod{Mat(g2)};
  Matrix tstar = gram_adjoint(Mat(t), dom, cod);
  REQUIRE(tstar.rows() == 6);
  REQUIRE(tstar.cols() == 9);
  for (int s = 0; s < 100; ++s) {
    Vector u = randomVector(rng, 6), v = randomVector(rng, 9);
    Complex lhs = cod.inner(t * u, v);
    Complex rhs = dom.inner(u, tstar * v);
    CHECK(std::abs(lhs - rhs) <= 1e-11 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("gram_adjoint is an involution and reverses products") {
  std::mt19937_64 rng(505);
  Matrix g1 = randomHPD(rng, 5), g2 = randomHPD(rng, 7), g3 = randomHPD(rng, 4);
  WeightedSpace s1{Mat(g1)}, s2{Mat(g2)}, s3{Mat(g3)};
  Matrix t = randomMatrix(rng, 7, 5);  // s1 -> s2
  Matrix s = randomMatrix(rng, 4, 7);  // s2 -> s3
  Matrix tss = gram_adjoint(Mat(gram_adjoint(Mat(t), s1, s2)), s2, s1);
  CHECK((tss - t).cwiseAbs().maxCoeff() <= 1e-10 * t.cwiseAbs().maxCoeff());
  Matrix lhs = gram_adjoint(Mat(Matrix(s * t)), s1, s3);
  Matrix rhs = gram_adjoint(Mat(t), s1, s2) * gram_adjoint(Mat(s), s2, s3);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + lhs.cwiseAbs().maxCoeff()));
}

TEST_CASE("generalized_hermitian_eigs: hand 2x2 oracle, residuals, B-orthonormality") {
  // oracle first: diag(2,8) v = lambda diag(1,2) v  =>  lambda = {2, 4}
  Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
  a(0, 0) = 2.0; a(1, 1) = 8.0;
  b(0, 0) = 1.0; b(1, 1) = 2.0;
  auto eig = generalized_hermitian_eigs(Mat(a), Mat(b));
  CHECK(eig.values(0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(eig.values(1) == doctest::Approx(4.0).epsilon(1e-13));

  std::mt19937_64 rng(606);
  for (int rep = 0; rep < 8; ++rep) {
    int n = 4 + static_cast<int>(rng() % 12);
    Matrix hb = randomHPD(rng, n);
    Matrix ha = randomMatrix(rng, n, n);
    ha = (ha + ha.adjoint()).eval();
    auto e = generalized_hermitian_eigs(Mat(ha), Mat(hb));
    for (int j = 1; j < n; ++j) CHECK(e.values(j) >= e.values(j - 1));
    Matrix resid = ha * e.vectors - hb * e.vectors * e.values.cast<Complex>().asDiagonal();
    double scale = ha.cwiseAbs().maxCoeff() + hb.cwiseAbs().maxCoeff();
    CHECK(resid.cwiseAbs().maxCoeff() <= 1e-10 * scale);
    Matrix gram = e.vectors.adjoint() * hb * e.vectors;
    CHECK((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("pencil_eigs handles non-Hermitian pencils with residual check") {
  std::mt19937_64 rng(707);
  for (int rep = 0; rep < 8; ++rep) {
    int n = 3 + static_cast<int>(rng() % 10);
    Matrix b = randomHPD(rng, n);
    Matrix a = randomMatrix(rng, n, n);
    auto e = pencil_eigs(Mat(a), Mat(b));
    for (int j = 0; j < n; ++j) {
      Vector v = e.vectors.col(j);
      Vector resid = a * v - e.values(j) * (b * v);
      CHECK(resid.norm() <= 1e-9 * (a.norm() + std::abs(e.values(j)) * b.norm()));
    }
  }
}

TEST_CASE("solve: exact on identity, residual on random, singular detection") {
  Matrix id = Matrix::Identity(4, 4);
  Matrix rhs = Matrix::Random(4, 2).cast<Complex>();
  CHECK((solve(Mat(id), rhs) - rhs).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(808);
  Matrix a = randomMatrix(rng, 12, 12);
  Matrix b = randomMatrix(rng, 12, 3);
  Matrix x = solve(Mat(a), b);
  CHECK((a * x - b).cwiseAbs().maxCoeff() <= 1e-10 * a.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff() * 12);

  Matrix rank1(2, 2);
  rank1 << Complex(1, 0), Complex(2, 0), Complex(2, 0), Complex(4, 0);
  CHECK_THROWS_AS(solve(Mat(rank1), Matrix::Identity(2, 2)), SingularMatrixError);
  try {
    solve(Mat(rank1), Matrix::Identity(2, 2));
  } catch (const SingularMatrixError& err) {
    CHECK(err.pivot_index >= 0);
  }
}

TEST_CASE("solve dispatches to sparse LU for sparse operands") {
  std::mt19937_64 rng(909);
  int n = 30;
  std::vector<Eigen::Triplet<Complex>> trips;
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, i, Complex(4.0, 0.5));
    if (i + 1 < n) {
      trips.emplace_back(i, i + 1, Complex(-1.0, 0.0));
      trips.emplace_back(i + 1, i, Complex(-1.0, 0.0));
    }
  }
  SpMatrix s(n, n);
  s.setFromTriplets(trips.begin(), trips.end());
  Matrix rhs = randomMatrix(rng, n, 2);
  Matrix x = solve(Mat(s), rhs);
  CHECK((Matrix(s) * x - rhs).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("contour: 4-node circle reproduces the textbook nodes and weights") {
  auto nodes = contour_nodes(ContourSpec::circle(Complex(0, 0), 1.0, 4));
  REQUIRE(nodes.size() == 4);
  Complex expect_z[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int j = 0; j < 4; ++j) {
    CHECK(std::abs(nodes[j].z - expect_z[j]) <= 1e-15);
    Complex w_expect = Complex(0, 2.0 * M_PI / 4.0) * expect_z[j];
    CHECK(std::abs(nodes[j].w - w_expect) <= 1e-15);
  }
}

TEST_CASE("contour: circle quadrature of dz/z, dz/z^2, polynomials; weights close up") {
  auto nodes = contour_nodes(ContourSpec::circle(Complex(0.5, -0.25), 2.0, 64));
  Complex int_inv(0, 0), int_inv2(0, 0), int_poly(0, 0), wsum(0, 0);
  for (const auto& nd : nodes) {
    Complex zc = nd.z - Complex(0.5, -0.25);
    int_inv += nd.w / zc;
    int_inv2 += nd.w / (zc * zc);
    int_poly += nd.w * (Complex(3, 1) + nd.z + nd.z * nd.z);
    wsum += nd.w;
  }
  CHECK(std::abs(int_inv - Complex(0, 2 * M_PI)) <= 1e-12);     // Cauchy: 2 pi i
  CHECK(std::abs(int_inv2) <= 1e-12);                            // residue 0
  CHECK(std::abs(int_poly) <= 1e-10);                            // entire function
  CHECK(std::abs(wsum) <= 1e-13);                                // closed contour
}

TEST_CASE("contour: sector boundary reproduces residues of decay-2 rationals") {
  // Integrands must decay faster than 1/|z| for the arc at infinity to be
  // negligible (in the calculus the resolvent supplies that extra decay).
  // f(z) = 1/((z-1)(z+2)): pole 1 inside Sigma_2.0, pole -2 outside;
  // oracle: residue at z=1 is 1/3.
  auto nodes = contour_nodes(ContourSpec::sector(2.0, 0.0, 3.0e9, 0.0, 40));
  Complex acc(0, 0);
  for (const auto& nd : nodes)
    acc += nd.w / ((nd.z - Complex(1.0, 0.0)) * (nd.z + Complex(2.0, 0.0)));
  acc /= Complex(0, 2 * M_PI);
  CHECK(std::abs(acc - Complex(1.0 / 3.0, 0)) <= 1e-9);

  // both poles outside the sector -> 0
  Complex acc_out(0, 0);
  for (const auto& nd : nodes)
    acc_out += nd.w / ((nd.z + Complex(2.0, 0.0)) * (nd.z + Complex(3.0, 0.0)));
  acc_out /= Complex(0, 2 * M_PI);
  CHECK(std::abs(acc_out) <= 1e-9);
}

TEST_CASE("contour validation errors") {
  CHECK_THROWS_AS(contour_nodes(ContourSpec::circle(Complex(0, 0), -1.0, 16)), ConfigError);
  CHECK_THROWS_AS(contour_nodes(ContourSpec::circle(Complex(0, 0), 1.0, 2)), ConfigError);
  CHECK_THROWS_AS(contour_nodes(ContourSpec::sector(3.5, 0.0, 10.0)), ConfigError);
  CHECK_THROWS_AS(contour_nodes(ContourSpec::sector(1.0, 0.0, 1e-10)), ConfigError);
}

TEST_CASE("matrix JSON round-trip preserves values and storage format") {
  std::mt19937_64 rng(111);
  Matrix d = randomMatrix(rng, 5, 3);
  Mat back = mat_from_json(mat_to_json(Mat(d)));
  CHECK(!back.isSparse());
  CHECK((back.dense() - d).cwiseAbs().maxCoeff() == 0.0);

  SpMatrix s(4, 4);
  std::vector<Eigen::Triplet<Complex>> trips{{0, 0, Complex(1, 2)}, {2, 1, Complex(-3, 0.5)},
                                             {3, 3, Complex(0, -1)}};
  s.setFromTriplets(trips.begin(), trips.end());
  Json j = mat_to_json(Mat(s));
  CHECK(j.at("format") == "csc");
  Mat sback = mat_from_json(j);
  CHECK(sback.isSparse());
  CHECK((sback.dense() - Matrix(s)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix JSON rejects malformed input") {
  Json j;
  j["rows"] = 2;
  j["cols"] = 2;
  j["format"] = "dense";
  j["re"] = std::vector<double>{1.0, 2.0, 3.0};  // wrong length
  j["im"] = std::vector<double>{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(mat_from_json(j), ConfigError);
  j["format"] = "whatever";
  j["re"] = std::vector<double>{1.0, 2.0, 3.0, 4.0};
  j["im"] = std::vector<double>{0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(mat_from_json(j), ConfigError);
}

TEST_CASE("WeightedSpace validates its Gram matrix") {
  Matrix bad(2, 2);
  bad << Complex(1, 0), Complex(1, 0), Complex(0, 0), Complex(1, 0);  // not Hermitian
  CHECK_THROWS_AS(WeightedSpace{Mat(bad)}, ConfigError);
  Matrix neg = -Matrix::Identity(3, 3);
  WeightedSpace wneg{Mat(neg)};  // construction defers factor
  CHECK_THROWS_AS(wneg.cholL(), ConfigError);
}

TEST_CASE("property: weighted operator norm is submultiplicative over chained spaces") {
  std::mt19937_64 rng(121);
  for (int rep = 0; rep < 10; ++rep) {
    int n1 = 3 + static_cast<int>(rng() % 6);
    int n2 = 3 + static_cast<int>(rng() % 6);
    int n3 = 3 + static_cast<int>(rng() % 6);
    WeightedSpace s1{Mat(randomHPD(rng, n1))}, s2{Mat(randomHPD(rng, n2))},
        s3{Mat(randomHPD(rng, n3))};
    Matrix t = randomMatrix(rng, n2, n1), s = randomMatrix(rng, n3, n2);
    double lhs = weighted_norm(Mat(Matrix(s * t)), s1, s3);
    double rhs = weighted_norm(Mat(t), s1, s2) * weighted_norm(Mat(s), s2, s3);
    CHECK(lhs <= rhs * (1.0 + 1e-10));
  }
}

TEST_CASE("block power iteration agrees with SVD on a tall dense matrix") {
  std::mt19937_64 rng(131);
  Matrix w = randomMatrix(rng, 80, 60);
  double oracle = Eigen::BDCSVD<Matrix>(w).singularValues()(0);
  auto applyT = [&](const Vector& x) { return Vector(w * x); };
  auto applyTH = [&](const Vector& x) { return Vector(w.adjoint() * x); };
  double got = block_power_sigma_max(applyT, applyTH, w.cols());
  CHECK(got == doctest::Approx(oracle).epsilon(1e-8));
}

}  // TEST_SUITE
