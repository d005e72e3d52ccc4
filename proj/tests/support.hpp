#pragma once

#include "lsfem/types.hpp"

#include <doctest.h>

#include <random>

namespace lsfem::test {

inline std::mt19937& rng() {
  static std::mt19937 g(20240611u);
  return g;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

inline int uniform_int(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng()); }

inline MatrixXd random_matrix(int r, int c) {
  MatrixXd M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = uniform(-1.0, 1.0);
  return M;
}

inline double max_abs(const MatrixXd& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace lsfem::test
