#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace freespec {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix that had to be inverted was (numerically) singular.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Spectral norm (largest singular value).
double opnorm(const Matrix& m);

/// Inverse with a conditioning check; throws SingularMatrixError.
Matrix checked_inverse(const Matrix& m, const char* what = "matrix");

/// Largest |entry| of a - b, the deviation measure used by the identity checks.
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Real and imaginary parts in the C*-sense: (m + m*)/2 and (m - m*)/2i.
Matrix hermitian_part(const Matrix& m);
Matrix imaginary_part(const Matrix& m);

/// Smallest eigenvalue of the Hermitian part of m.
double min_hermitian_eigenvalue(const Matrix& m);

}  // namespace freespec
