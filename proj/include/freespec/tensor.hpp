#pragma once

// Tensor-power helpers for block algebras S = Mat_s(C).
//
// An element of S⊗S is stored as an s²×s² matrix in the product basis, so that
// x⊗y is the Kronecker product: M[(αs+β),(γs+δ)] = x[α,γ]·y[β,δ]. Multiplication
// in S⊗S is then ordinary matrix multiplication. Operators on S act on
// column-major vectorizations: vec(ζ)[γ + sβ] = ζ[γ,β].

#include "freespec/common.hpp"

#include <vector>

namespace freespec {

Matrix kron(const Matrix& x, const Matrix& y);

Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Eigen::Index rows);

/// Operator matrix (on vec) of the map ζ ↦ A•(ζ), where (x⊗y)• = (ζ ↦ xζy).
Matrix bullet(const Matrix& a, int s);

/// Apply A• to ζ directly.
Matrix apply_bullet(const Matrix& a, const Matrix& zeta, int s);

/// Inverse of bullet: the S⊗S element whose bullet operator is op.
Matrix unbullet(const Matrix& op, int s);

/// Half-transpose (x⊗y) ↦ x⊗yᵀ.
Matrix half_transpose(const Matrix& a, int s);

/// Factor swap (x⊗y) ↦ y⊗x.
Matrix swap_factors(const Matrix& a, int s);

/// Operator matrix of ζ ↦ x ζ y on vec coordinates, i.e. yᵀ ⊗ x.
Matrix sandwich_operator(const Matrix& x, const Matrix& y);

/// One product tensor coef · f₁⊗…⊗f_k.
struct ProductTerm {
  cplx coef{1.0};
  std::vector<Matrix> factors;
};

/// An element of S^{⊗k} kept as a sum of product tensors.
///
/// This representation makes the shuffle operations exact and cheap even when
/// the dense s^k×s^k form would be enormous.
class TensorSum {
 public:
  TensorSum(int s, int k) : s_(s), k_(k) {}

  int block_size() const { return s_; }
  int order() const { return k_; }
  const std::vector<ProductTerm>& terms() const { return terms_; }

  void add(cplx coef, std::vector<Matrix> factors);
  void add(const TensorSum& other, cplx scale = 1.0);

  /// x^{⊗k}.
  static TensorSum power(const Matrix& x, int k);
  /// Decompose a dense S⊗S element as Σ e_ij ⊗ B_ij (skipping zero B_ij).
  static TensorSum from_dense2(const Matrix& dense, int s);

  /// Dense s^k × s^k Kronecker form (for small s and k only).
  Matrix dense() const;

 private:
  int s_;
  int k_;
  std::vector<ProductTerm> terms_;
};

/// [x, y]_k = x₁⊗y₁⊗⋯⊗x_k⊗y_k, extended bilinearly.
TensorSum shuffle_bracket(const TensorSum& x, const TensorSum& y);

/// ⟨x, y⟩_k = x₁y₁⋯x_k y_k, extended bilinearly.
Matrix shuffle_contract(const TensorSum& x, const TensorSum& y);

}  // namespace freespec
