#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bdf {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Mat4 = Eigen::Matrix4cd;
using Index = Eigen::Index;

/// Coupling constants must satisfy 0 <= alpha < 4/pi (Kato's inequality).
inline constexpr double kAlphaMax = 4.0 / 3.14159265358979323846;
inline constexpr double kPi = 3.14159265358979323846;

// Exception hierarchy. The CLI maps each kind onto an exit code.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < kAlphaMax))
    throw ConfigError("coupling alpha=" + std::to_string(alpha) +
                      " outside [0, 4/pi): the energy is only bounded below for alpha < 4/pi");
}

}  // namespace bdf
