#pragma once

#include "lsfem/types.hpp"

#include <vector>

namespace lsfem::tensor {

// Dense 3- and 4-index arrays with index ranges fixed at construction.
struct Array3 {
  int m = 0, n = 0, p = 0;
  std::vector<double> data;
  Array3() = default;
  Array3(int m_, int n_, int p_) : m(m_), n(n_), p(p_), data(static_cast<std::size_t>(m_) * n_ * p_, 0.0) {}
  double& operator()(int i, int j, int k) { return data[(static_cast<std::size_t>(i) * n + j) * p + k]; }
  double operator()(int i, int j, int k) const { return data[(static_cast<std::size_t>(i) * n + j) * p + k]; }
};

struct Array4 {
  int m = 0, n = 0, p = 0, q = 0;
  std::vector<double> data;
  Array4() = default;
  Array4(int m_, int n_, int p_, int q_)
      : m(m_), n(n_), p(p_), q(q_), data(static_cast<std::size_t>(m_) * n_ * p_ * q_, 0.0) {}
  double& operator()(int i, int j, int k, int l) {
    return data[((static_cast<std::size_t>(i) * n + j) * p + k) * q + l];
  }
  double operator()(int i, int j, int k, int l) const {
    return data[((static_cast<std::size_t>(i) * n + j) * p + k) * q + l];
  }
};

// Block matrix [a_ij B].
MatrixXd kron(const MatrixXd& A, const MatrixXd& B);

// Column-stacking vec: a_11, a_21, ..., a_n1, a_12, ... This is the convention
// under which vec(ACB) = (B^T kron A) vec(C) and the element flux layout
// (N kron I) agree.
VectorXd vec(const MatrixXd& A);
MatrixXd unvec(const VectorXd& v, int rows, int cols);

// Row-stacking vec: a_11, a_12, ..., a_1m, a_21, ...
VectorXd vec_rows(const MatrixXd& A);
MatrixXd unvec_rows(const VectorXd& v, int rows, int cols);

// mat[P] for an m x n x p x q array: row (i,j) and column (k,l), first index
// fastest, so vec(P X) = mat[P] vec(X) with (P X)_ij = sum_kl P_ijkl X_kl.
MatrixXd mat4(const Array4& P);

// mat_1[Q] for an m x n x p array: m rows, column (j,k) with j fastest, so
// vec(Q Y) = mat_1[Q] vec(Y) with (Q Y)_i = sum_jk Q_ijk Y_jk.
MatrixXd mat1(const Array3& Q);

// mat_2[Q] for an m x n x p array: row (j,k) with k fastest and m columns, so
// vec_rows(Q z) = mat_2[Q] z with (Q z)_jk = sum_i Q_ijk z_i.
MatrixXd mat2(const Array3& Q);

// Stacked rows I_m kron e_k^T (k = 1..n). Maps vec_rows(Z) to vec_rows(Z^T)
// for an m x n matrix Z.
MatrixXd transposer(int m, int n);

// Box product R [x] S acting as T -> R T S^T.
Array4 box(const MatrixXd& R, const MatrixXd& S);

// mat[S] = (I kron I + mat[T]) / 2 for n x n arguments.
MatrixXd symmetrizer(int n);

}  // namespace lsfem::tensor
