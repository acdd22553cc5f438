#pragma once

#include "freespec/common.hpp"
#include "freespec/ncpoly.hpp"
#include "freespec/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace freespec {

/// A linear pencil L = Σ_{ℓ≥1} X_ℓ ⊗ a_ℓ over S = Mat_s(C), together with the
/// constant block Θ and the corner projection e.
///
/// For designs produced by linearize(), a[0] holds the constant coefficient and
/// theta = −a[0]. For underlined designs theta also carries the nilpotent ◇ part.
struct SaltDesign {
  int s = 0;
  int n = 0;
  int m = 0;
  std::vector<Matrix> a;  // a[0..m]
  Matrix theta;
  Matrix e;
  double cutoff = 0.0;

  /// L(ξ) = Σ_{ℓ≥1} a_ℓ ⊗ ξ_ℓ with the S index outermost, so that the corner
  /// e-block of the result is a contiguous leading block.
  Matrix evaluate_pencil(const std::vector<Matrix>& xi) const;

  /// Σ_ℓ ‖a_ℓ‖ over ℓ ≥ 1.
  double coefficient_norm_sum() const;
};

/// ζ ↦ Σ_{ℓ≥1} a_ℓ ζ a_ℓ, kept in coefficient form; the s²×s² matrix is built on demand.
class CovarianceMap {
 public:
  CovarianceMap() = default;
  CovarianceMap(int s, std::vector<Matrix> coefficients);

  int block_size() const { return s_; }
  const std::vector<Matrix>& coefficients() const { return a_; }

  Matrix apply(const Matrix& zeta) const;
  /// Operator matrix acting on column-major vec coordinates.
  Matrix matrix() const;
  /// Operator norm on S. For a completely positive map this equals ‖Φ(1)‖.
  double norm() const;

 private:
  int s_ = 0;
  std::vector<Matrix> a_;
};

/// Ψ = Σ (−1)^ℓ a_ℓ ⊗ a_ℓ.
struct CovarianceTensor {
  int s = 0;
  TensorSum terms{0, 2};
  Matrix dense() const { return terms.dense(); }
};

CovarianceMap covariance_map(const SaltDesign& d);
CovarianceTensor covariance_tensor(const SaltDesign& d);

/// ‖ℑΘ‖ + 4(1 + ‖Φ‖).
double design_cutoff(const SaltDesign& d);

/// Wrap a degree ≤ 1 self-adjoint matrix polynomial directly (s = n).
SaltDesign design_from_linear(const MatrixPolynomial& f);

/// Self-adjoint linearization of f. Throws Error if f is not self-adjoint.
SaltDesign linearize(const MatrixPolynomial& f);

/// Degree ≤ 1 self-adjoint matrix polynomial whose upper-left n×n Schur
/// complement is f (the intermediate step of linearize()).
MatrixPolynomial linear_pencil(const MatrixPolynomial& f);

struct VerificationResult {
  bool ok = false;
  double max_deviation = 0.0;
  int trials = 0;
  int reshuffles = 0;
};

/// Compare the corner block of (L(ξ) − 1⊗(Θ + z e))⁻¹ with (f(ξ) − z)⁻¹ at z = 2i
/// for random 3×3 Hermitian ξ.
VerificationResult verify_linearization(const MatrixPolynomial& f, const SaltDesign& d, int trials,
                                        std::uint64_t seed, double tolerance = 1e-9);

/// The underlined design (S⊗S⊗M₃, L̄, Θ̄ + ◇, ē). Block index order: M₃ outermost,
/// then the two S factors, so an element is Σ_{ij} A_ij ⊗ e_ij stored with
/// A_ij as the (i,j) coarse block of size s².
SaltDesign underline(const SaltDesign& d);

/// Underline map on S: Λ ↦ Λ⊗1⊗e₁₁ + 1⊗Λ⊗e₂₂ + 1⊗Λᵀ⊗e₃₃.
Matrix underline_element(const Matrix& lambda);

/// ◇ = 1⊗1⊗(e₁₂ + e₁₃).
Matrix diamond(int s);

/// Coarse block (i,j) (0-based) of an element of the underlined algebra.
Matrix coarse_block(const Matrix& big, int s, int i, int j);

/// ∂₁: bullet operator (on vec coordinates) of the (1,2) coarse block.
Matrix partial1(const Matrix& big, int s);
/// ∂₂: half-transpose of the (1,3) coarse block.
Matrix partial2(const Matrix& big, int s);

std::string design_to_json(const SaltDesign& d);
SaltDesign design_from_json(const std::string& text);

}  // namespace freespec
