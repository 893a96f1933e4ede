#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace lqs {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kDefaultTol = 1e-10;
inline constexpr cplx kI{0.0, 1.0};

// Error hierarchy. The CLI maps each family to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// exit code 2
class ValidationError : public Error {
 public:
  using Error::Error;
};
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class ParameterError : public ValidationError {
 public:
  ParameterError(const std::string& field, double residual, const std::string& what)
      : ValidationError(what), field_(field), residual_(residual) {}
  explicit ParameterError(const std::string& what) : ValidationError(what) {}
  const std::string& field() const { return field_; }
  double residual() const { return residual_; }

 private:
  std::string field_;
  double residual_ = 0.0;
};
class StructureError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class CompositionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class CausalityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class ResourceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// exit code 3
class IoError : public Error {
 public:
  using Error::Error;
};

// exit code 4
class NumericalError : public Error {
 public:
  using Error::Error;
};
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Induced 2-norm; every residual reported by the library uses it.
double opnorm(const CMat& X);
double opnorm(const RMat& X);

// Execution policy for the kernels that have a parallel and a serial path.
enum class Exec { serial, parallel };

}  // namespace lqs
