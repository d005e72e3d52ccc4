#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <limits>
#include <stdexcept>
#include <string>

namespace lsfem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised for malformed run configurations and ill-posed problem setups.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EllipticityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lsfem
