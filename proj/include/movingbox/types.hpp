#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace movingbox {

using Real = double;
using Complex = std::complex<double>;

using VecR = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using MatC = Eigen::MatrixXcd;

/// Invalid physical or configuration input (bad level index, x outside the
/// box, malformed config). CLI maps this to exit code 1.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Failure of a numerical procedure at runtime (step-size underflow,
/// singular box length, unstable grid propagation). CLI maps this to exit
/// code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace movingbox
