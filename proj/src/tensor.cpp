#include "lsfem/tensor.hpp"

namespace lsfem::tensor {

MatrixXd kron(const MatrixXd& A, const MatrixXd& B) {
  MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

VectorXd vec(const MatrixXd& A) {
  return Eigen::Map<const VectorXd>(A.data(), A.size());
}

MatrixXd unvec(const VectorXd& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols) throw InvalidArgument("unvec: size mismatch");
  return Eigen::Map<const MatrixXd>(v.data(), rows, cols);
}

VectorXd vec_rows(const MatrixXd& A) {
  const MatrixXd At = A.transpose();
  return vec(At);
}

MatrixXd unvec_rows(const VectorXd& v, int rows, int cols) {
  return unvec(v, cols, rows).transpose();
}

MatrixXd mat4(const Array4& P) {
  MatrixXd M(P.m * P.n, P.p * P.q);
  for (int i = 0; i < P.m; ++i)
    for (int j = 0; j < P.n; ++j)
      for (int k = 0; k < P.p; ++k)
        for (int l = 0; l < P.q; ++l) M(j * P.m + i, l * P.p + k) = P(i, j, k, l);
  return M;
}

MatrixXd mat1(const Array3& Q) {
  MatrixXd M(Q.m, Q.n * Q.p);
  for (int i = 0; i < Q.m; ++i)
    for (int j = 0; j < Q.n; ++j)
      for (int k = 0; k < Q.p; ++k) M(i, k * Q.n + j) = Q(i, j, k);
  return M;
}

MatrixXd mat2(const Array3& Q) {
  MatrixXd M(Q.n * Q.p, Q.m);
  for (int i = 0; i < Q.m; ++i)
    for (int j = 0; j < Q.n; ++j)
      for (int k = 0; k < Q.p; ++k) M(j * Q.p + k, i) = Q(i, j, k);
  return M;
}

MatrixXd transposer(int m, int n) {
  MatrixXd T(m * n, m * n);
  const MatrixXd I = MatrixXd::Identity(m, m);
  for (int k = 0; k < n; ++k) {
    MatrixXd e = MatrixXd::Zero(1, n);
    e(0, k) = 1.0;
    T.block(k * m, 0, m, m * n) = kron(I, e);
  }
  return T;
}

Array4 box(const MatrixXd& R, const MatrixXd& S) {
  // (R T S^T)_ij = sum_kl R_ik T_kl S_jl
  Array4 P(static_cast<int>(R.rows()), static_cast<int>(S.rows()), static_cast<int>(R.cols()),
           static_cast<int>(S.cols()));
  for (int i = 0; i < P.m; ++i)
    for (int j = 0; j < P.n; ++j)
      for (int k = 0; k < P.p; ++k)
        for (int l = 0; l < P.q; ++l) P(i, j, k, l) = R(i, k) * S(j, l);
  return P;
}

MatrixXd symmetrizer(int n) {
  const MatrixXd I = MatrixXd::Identity(n, n);
  return 0.5 * (kron(I, I) + transposer(n, n));
}

}  // namespace lsfem::tensor
