#include "freespec/common.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace freespec {

double opnorm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix checked_inverse(const Matrix& m, const char* what) {
  Eigen::PartialPivLU<Matrix> lu(m);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) {
    throw SingularMatrixError(std::string("singular ") + what + " (rcond " + std::to_string(rc) + ")");
  }
  return lu.inverse();
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("max_abs_diff: shape mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

Matrix hermitian_part(const Matrix& m) { return (m + m.adjoint()) / 2.0; }

Matrix imaginary_part(const Matrix& m) { return (m - m.adjoint()) / cplx(0.0, 2.0); }

double min_hermitian_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace freespec

#include "freespec/random.hpp"

namespace freespec {

Matrix random_complex(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      m(i, j) = cplx(re, im);
    }
  return m;
}

Matrix random_hermitian(int size, Rng& rng) {
  Matrix g = random_complex(size, size, rng);
  return (g + g.adjoint()) / 2.0;
}

}  // namespace freespec
