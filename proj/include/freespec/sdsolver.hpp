#pragma once

#include "freespec/common.hpp"
#include "freespec/linearize.hpp"

#include <functional>
#include <string>
#include <vector>

namespace freespec {

/// Continuation in the imaginary shift: Λ + i t 1 for t running down to 0.
struct ContinuationSchedule {
  double t_start = -1.0;  // negative: max(cutoff, 8)
  double factor = 0.7;
  double t_min = 1e-3;
  double damping = 0.5;
  int max_iter = 2000;
  double tol = 1e-11;        // per-step residual target
  double final_tol = 1e-10;  // residual required of the returned solution
  bool use_newton = true;
  int max_newton_dim = 1600;  // Newton is used while s² stays below this
  int max_halvings = 12;

  /// Strictly decreasing t values ending at 0.
  std::vector<double> steps(double cutoff) const;
  void validate() const;
};

struct PathStep {
  double t = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

struct SdSolution {
  Matrix g;
  double residual = 0.0;
  std::vector<PathStep> path;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(double t, double residual);
  double t() const { return t_; }
  double residual() const { return residual_; }

 private:
  double t_;
  double residual_;
};

/// ‖1 + (Λ + Φ(G))G‖ in Frobenius norm.
double sd_residual(const CovarianceMap& phi, const Matrix& lambda, const Matrix& g);

/// Solve 1 + (Λ + Φ(G))G = 0 on the branch reached from large imaginary shift.
/// `cutoff` seeds the default starting shift. The optional trace callback
/// receives one entry per completed continuation step.
SdSolution solve_sd(const CovarianceMap& phi, const Matrix& lambda, const ContinuationSchedule& schedule,
                    double cutoff, const std::function<void(const PathStep&)>& trace = {});

/// JSON line {"t":..,"iterations":..,"residual":..}.
std::string path_step_json(const PathStep& step);

/// Operator matrix (vec coordinates) of D[G](Λ) = (η ↦ G⁻¹ηG⁻¹ − Φ(η))⁻¹.
Matrix derivative_operator(const CovarianceMap& phi, const Matrix& g);

/// D[G](Λ; ζ).
Matrix solve_derivative(const CovarianceMap& phi, const Matrix& g, const Matrix& zeta);

/// Ǧ = ((G⁻¹)^{⊗2} − Ψ)⁻¹ as an s²×s² Kronecker-basis matrix.
Matrix secondary_g(const CovarianceTensor& psi, const Matrix& g);

/// Corner block of (Σ Ξ_ℓ^{(D)} ⊗ a_ℓ − 1⊗Λ)⁻¹ on the Fock space truncated to
/// words of length ≤ depth.
Matrix fock_oracle(const SaltDesign& d, const Matrix& lambda, int depth);

}  // namespace freespec
