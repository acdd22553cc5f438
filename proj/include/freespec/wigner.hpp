#pragma once

#include "freespec/bias.hpp"
#include "freespec/linearize.hpp"
#include "freespec/ncpoly.hpp"
#include "freespec/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace freespec {

enum class BaseLaw { Gaussian, Rademacher, Uniform };

/// Law of the normalized scalar entries, optionally passed through trunc_C.
struct EntryLaw {
  BaseLaw base = BaseLaw::Gaussian;
  std::optional<double> truncation;  // C
  double diag_variance = 1.0;

  /// "gaussian", "rademacher", "uniform", optionally suffixed ":C" for truncation.
  static EntryLaw parse(const std::string& text);
  std::string name() const;

  /// Moments of the normalized entry (mean 0, variance 1).
  double fourth_moment() const;
  double third_moment() const { return 0.0; }

  /// One normalized draw.
  double draw(SplitMix64& rng) const;

  /// Entry moments for the block model with m variables (odd ℓ: i·antisymmetric, zero diagonal).
  ModelMoments model_moments(int m) const;
};

/// Raw draw from the untruncated base law (unit variance).
double draw_base(BaseLaw law, SplitMix64& rng);

/// E[Z 1{|Z|≤C}] and ρ_C(Z) = sd(Z 1{|Z|≤C}) for the unit-variance base law.
struct TruncationConstants {
  double mean = 0.0;
  double rho = 1.0;
  double fourth = 0.0;  // E[(Z 1{|Z|≤C} − mean)⁴]
};
TruncationConstants truncation_constants(BaseLaw law, double c);

/// trunc_C applied to values drawn from `law`.
std::vector<double> trunc(const std::vector<double>& entries, double c, BaseLaw law);

/// trunc_C with mean and ρ_C estimated from the entries themselves.
std::vector<double> trunc_empirical(const std::vector<double>& entries, double c);

struct WignerSample {
  int N = 0;
  std::uint64_t seed = 0;
  std::vector<Matrix> xi;  // Ξ_ℓ for ℓ = 1..m, stored at index ℓ−1 (unscaled)
};

/// Counter-based sampler: entry (i,j), i ≤ j, of Ξ_ℓ depends only on (seed, ℓ, i, j).
WignerSample sample(const EntryLaw& law, int N, int m, std::uint64_t seed);

struct EmpiricalSpectrum {
  int N = 0;
  int n = 0;
  std::vector<double> eigenvalues;  // ascending
};

/// f evaluated at Ξ/√N.
Matrix evaluate_scaled(const MatrixPolynomial& f, const WignerSample& s);

/// Eigenvalues of a Hermitian matrix, using real arithmetic when the matrix is
/// purely real or purely imaginary.
std::vector<double> hermitian_eigenvalues(const Matrix& h);

EmpiricalSpectrum empirical_spectrum(const MatrixPolynomial& f, const WignerSample& s);

/// (1/(nN)) Σ 1/(λ_k − z).
cplx stieltjes_from_eigenvalues(const std::vector<double>& eigenvalues, cplx z);

struct EmpiricalStieltjes {
  cplx value;
  std::optional<cplx> linearized;  // corner-trace route, when requested
  double discrepancy = 0.0;
};

/// Empirical Stieltjes transform; with `design` it is also computed through the
/// linearized resolvent and the two must agree to `tolerance` (else Error).
EmpiricalStieltjes empirical_stieltjes(const MatrixPolynomial& f, const WignerSample& s, cplx z,
                                       const SaltDesign* design = nullptr, double tolerance = 1e-9);

}  // namespace freespec
