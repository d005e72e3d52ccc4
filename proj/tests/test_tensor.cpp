#include "lsfem/tensor.hpp"

#include "support.hpp"

using namespace lsfem;
using namespace lsfem::test;
namespace t = lsfem::tensor;

TEST_SUITE("tensor") {
  TEST_CASE("kron mixed product") {
    for (int trial = 0; trial < 100; ++trial) {
      const int a = uniform_int(1, 4), b = uniform_int(1, 4), c = uniform_int(1, 4);
      const int d = uniform_int(1, 4), e = uniform_int(1, 4), f = uniform_int(1, 4);
      const MatrixXd A = random_matrix(a, b), B = random_matrix(d, e);
      const MatrixXd C = random_matrix(b, c), D = random_matrix(e, f);
      CHECK(max_abs(t::kron(A, B) * t::kron(C, D) - t::kron(A * C, B * D)) < 1e-12);
    }
  }

  TEST_CASE("kron block layout") {
    MatrixXd A(2, 2), B(1, 2);
    A << 1, 2, 3, 4;
    B << 5, 6;
    MatrixXd K(2, 4);
    K << 5, 6, 10, 12, 15, 18, 20, 24;
    CHECK(max_abs(t::kron(A, B) - K) == 0.0);
  }

  TEST_CASE("vec of a triple product") {
    for (int trial = 0; trial < 100; ++trial) {
      const int m = uniform_int(1, 4), n = uniform_int(1, 4), p = uniform_int(1, 4), q = uniform_int(1, 4);
      const MatrixXd A = random_matrix(m, n), C = random_matrix(n, p), B = random_matrix(p, q);
      CHECK(max_abs(t::vec(A * C * B) - t::kron(B.transpose(), A) * t::vec(C)) < 1e-12);
    }
  }

  TEST_CASE("vec and unvec are inverse in both stackings") {
    for (int trial = 0; trial < 20; ++trial) {
      const int m = uniform_int(1, 5), n = uniform_int(1, 5);
      const MatrixXd A = random_matrix(m, n);
      CHECK(max_abs(t::unvec(t::vec(A), m, n) - A) == 0.0);
      CHECK(max_abs(t::unvec_rows(t::vec_rows(A), m, n) - A) == 0.0);
      CHECK(max_abs(t::vec_rows(A) - t::vec(A.transpose())) == 0.0);
    }
    MatrixXd A(2, 2);
    A << 1, 2, 3, 4;
    CHECK(t::vec(A)(1) == 3.0);
    CHECK(t::vec_rows(A)(1) == 2.0);
  }

  TEST_CASE("transposer maps vec_rows(Z) to vec_rows(Z^T)") {
    for (int trial = 0; trial < 100; ++trial) {
      const int m = uniform_int(1, 5), n = uniform_int(1, 5);
      const MatrixXd Z = random_matrix(m, n);
      const MatrixXd T = t::transposer(m, n);
      CHECK(T.rows() == m * n);
      CHECK(max_abs(T * t::vec_rows(Z) - t::vec_rows(Z.transpose())) < 1e-14);
      // A permutation: orthogonal.
      CHECK(max_abs(T.transpose() * T - MatrixXd::Identity(m * n, m * n)) == 0.0);
    }
  }

  TEST_CASE("symmetrizer projects onto symmetric matrices") {
    for (int n = 1; n <= 4; ++n) {
      const MatrixXd S = t::symmetrizer(n);
      CHECK(max_abs(S * S - S) < 1e-14);
      CHECK(max_abs(S - S.transpose()) < 1e-14);
      for (int trial = 0; trial < 25; ++trial) {
        const MatrixXd X = random_matrix(n, n);
        CHECK(max_abs(S * t::vec(X) - t::vec(0.5 * (X + X.transpose()))) < 1e-14);
      }
    }
  }

  TEST_CASE("mat4 of a box product") {
    for (int trial = 0; trial < 50; ++trial) {
      const int m = uniform_int(1, 3), n = uniform_int(1, 3), p = uniform_int(1, 3), q = uniform_int(1, 3);
      const MatrixXd R = random_matrix(m, p), S = random_matrix(n, q), T = random_matrix(p, q);
      const t::Array4 P = t::box(R, S);
      CHECK(max_abs(t::mat4(P) * t::vec(T) - t::vec(R * T * S.transpose())) < 1e-13);
      CHECK(max_abs(t::mat4(P) - t::kron(S, R)) < 1e-14);
    }
  }

  TEST_CASE("mat1 and mat2 contract the trailing and leading index") {
    for (int trial = 0; trial < 50; ++trial) {
      const int m = uniform_int(1, 4), n = uniform_int(1, 4), p = uniform_int(1, 4);
      t::Array3 Q(m, n, p);
      for (double& v : Q.data) v = uniform(-1.0, 1.0);
      const MatrixXd Y = random_matrix(n, p);
      VectorXd QY = VectorXd::Zero(m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < p; ++k) QY(i) += Q(i, j, k) * Y(j, k);
      CHECK(max_abs(t::mat1(Q) * t::vec(Y) - QY) < 1e-13);

      const VectorXd z = random_matrix(m, 1);
      MatrixXd Qz = MatrixXd::Zero(n, p);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < p; ++k) Qz(j, k) += Q(i, j, k) * z(i);
      CHECK(max_abs(t::mat2(Q) * z - t::vec_rows(Qz)) < 1e-13);
    }
  }
}
