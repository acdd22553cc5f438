#pragma once

#include "freespec/linearize.hpp"
#include "freespec/wigner.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace freespec {

/// Index subsets are sorted vectors of 0-based block indices.
using IndexSet = std::vector<int>;

/// The resolvent "recipes" R, F, T, U, E, H, Q, P, Δ built from one sampled
/// block matrix X (of size (N+1) blocks), a point Λ and a covariance map Φ.
/// All quantities indexed by n use the scaling X/√n.
class RecipeBook {
 public:
  RecipeBook(Matrix x, int blocks, int s, Matrix lambda, CovarianceMap phi);

  int blocks() const { return blocks_; }
  int block_size() const { return s_; }
  const Matrix& x() const { return x_; }
  const Matrix& lambda() const { return lambda_; }
  const CovarianceMap& phi() const { return phi_; }

  /// Selection matrix f_J (|J|s × Ms).
  Matrix f(const IndexSet& j) const;
  /// Projection e_I (Ms × Ms).
  Matrix e(const IndexSet& i) const;
  /// I ⊗ ζ over all blocks.
  Matrix diag_all(const Matrix& zeta) const;
  /// Sum of the diagonal s×s blocks.
  Matrix tr_s(const Matrix& a) const;
  Matrix block(const Matrix& a, int i, int j) const;

  const Matrix& R(int n, const IndexSet& i);
  Matrix F(int n, const IndexSet& i);
  Matrix T(int n, const IndexSet& i, const Matrix& zeta);
  Matrix U(int n, const IndexSet& i);
  Matrix E(int n, const IndexSet& i);
  bool big_e(int n, const IndexSet& i);  // ‖E‖ ≥ 1/2
  Matrix H(int n, const IndexSet& i);

  Matrix R_IJ(int n, const IndexSet& i, const IndexSet& j);
  Matrix H_IJ(int n, const IndexSet& i, const IndexSet& j);
  Matrix Q_IJ(int n, const IndexSet& i, const IndexSet& j);
  /// P_{I,J}(A) for A ∈ Mat_{|J|}(S).
  Matrix P_IJ(int n, const IndexSet& i, const IndexSet& j, const Matrix& a);
  Matrix Delta_IJ(int n, const IndexSet& i, const IndexSet& j);

 private:
  Matrix x_;
  int blocks_;
  int s_;
  Matrix lambda_;
  CovarianceMap phi_;
  std::map<std::pair<int, IndexSet>, Matrix> r_cache_;
};

IndexSet set_minus(const IndexSet& a, const IndexSet& b);
IndexSet range_set(int n);  // {0, …, n−1}

struct IdentityResult {
  std::string name;
  double deviation = 0.0;
  int evaluations = 0;
};

struct IdentityReport {
  int N = 0;
  std::uint64_t seed = 0;
  std::vector<IdentityResult> results;
  double max_deviation() const;
};

struct IdentityOptions {
  cplx z{0.3, 0.8};
  double t = 0.5;
  int subset_trials = 3;  // random (I, J) choices per identity, in addition to I = {1..N}
  EntryLaw law{};
};

/// Evaluate both sides of every identity in the catalog on a sampled block
/// Wigner matrix and report the largest absolute entrywise deviation.
IdentityReport check_identities(const SaltDesign& d, int N, std::uint64_t seed, const IdentityOptions& opts = {});

}  // namespace freespec
