#pragma once

#include "freespec/linearize.hpp"
#include "freespec/sdsolver.hpp"
#include "freespec/spectra.hpp"
#include "freespec/tensor.hpp"

#include <vector>

namespace freespec {

/// Second-order data of the scalar entries ξ_ℓ = Ξ_ℓ(i,j) for one variable.
struct ScalarEntryMoments {
  cplx pseudo_variance{1.0};  // E ξ²
  double abs_fourth = 3.0;    // E |ξ|⁴
};

/// Diagonal-entry moments E Ξ_ℓ(i,i)^k for one variable.
struct DiagonalEntryMoments {
  double variance = 0.0;
  double third = 0.0;
};

/// Entry moments of the whole model, indexed by variable ℓ = 1..m (slot 0 unused).
struct ModelMoments {
  std::vector<ScalarEntryMoments> offdiag;
  std::vector<DiagonalEntryMoments> diag;
};

/// C⁽⁴⁾ of Y = Σ ξ_ℓ a_ℓ for independent, mean-zero, unit-variance ξ_ℓ:
/// Σ_ℓ (E|ξ_ℓ|⁴ − 2 − |E ξ_ℓ²|²) a_ℓ^{⊗4}.
TensorSum fourth_cumulant(const std::vector<Matrix>& a, const ModelMoments& mm);

/// C⁽⁴⁾ of a scalar random variable from its moments.
double scalar_fourth_cumulant(const ScalarEntryMoments& m);

/// E X(i,i)^{⊗2} and E X(i,i)^{⊗3}.
TensorSum diagonal_second_moment(const std::vector<Matrix>& a, const ModelMoments& mm);
TensorSum diagonal_third_moment(const std::vector<Matrix>& a, const ModelMoments& mm);

/// Pieces of the unwrapped correction, kept separate for inspection.
struct BiasTerms {
  Matrix psi_term;       // ⟨[Ψ,Ψ]₂, [Ǧ, G⊗G]₂⟩₄
  Matrix phi_term;       // −Φ(G)G
  Matrix diag2_term;     // ⟨E X(i,i)^{⊗2}, G^{⊗2}⟩₂
  Matrix diag3_term;     // −N^{−1/2}⟨E X(i,i)^{⊗3}, G^{⊗3}⟩₃
  Matrix cumulant_term;  // ((N−1)/N)⟨C⁽⁴⁾, G^{⊗4}⟩₄
  Matrix unwrapped;
  Matrix wrapped;
};

BiasTerms universal_correction_terms(const SaltDesign& d, const ModelMoments& mm, int N, const Matrix& g);

/// Bias_L^N(Λ) = G'(Bias_hat · G⁻¹).
Matrix universal_correction(const SaltDesign& d, const ModelMoments& mm, int N, const Matrix& lambda,
                            const SpectralOptions& opts = {});

/// τ_{S,e}(Bias_L^N(Θ + z e)).
cplx bias_scalar(const SaltDesign& d, const ModelMoments& mm, cplx z, int N, const SpectralOptions& opts = {});

}  // namespace freespec
