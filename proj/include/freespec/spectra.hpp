#pragma once

#include "freespec/linearize.hpp"
#include "freespec/sdsolver.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace freespec {

/// Raised when ℑz is below the configured threshold.
class SolverRefusal : public Error {
 public:
  using Error::Error;
};

struct SpectralOptions {
  ContinuationSchedule schedule{};
  double min_imag = 1e-4;  // refuse to solve closer than this to the real axis
};

/// τ_{S,e}(G_L(Θ + z e)).
cplx stieltjes(const SaltDesign& d, cplx z, const SpectralOptions& opts = {});

/// G_L(Θ + z e) itself.
SdSolution solve_at(const SaltDesign& d, cplx z, const SpectralOptions& opts = {});

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<bool> failed;  // per-point solver failure flags (value set to NaN)
  double epsilon = 0.0;

  /// Trapezoid integral over the grid (failed points skipped).
  double mass() const;
};

DensityCurve density(const SaltDesign& d, const std::vector<double>& grid, double epsilon,
                     const SpectralOptions& opts = {});

std::vector<double> linspace(double lo, double hi, int points);

struct SupportOptions {
  double detect_epsilon = 1e-3;
  double threshold = 1e-2;
  double final_epsilon = 1e-5;
  int epsilon_levels = 5;  // geometric ladder detect_epsilon → final_epsilon
  int scan_points = 1201;
  double tol = 1e-3;          // endpoint accuracy target
  double ratio = 0.75;        // ρ(x, ε/2) ≥ ratio·ρ(x, ε) marks x as inside
  double density_floor = 1e-7;
  SpectralOptions spectral{};
};

struct SupportSet {
  std::vector<std::pair<double, double>> intervals;
  double threshold = 0.0;
  double epsilon = 0.0;
};

class EmptySupportError : public Error {
 public:
  using Error::Error;
};

/// A search interval certainly containing supp μ_f, from the coefficient bound
/// ‖f(Ξ)‖ ≤ Σ_w ‖C_w‖ 2^{|w|}, padded by 10%.
std::pair<double, double> default_search_interval(const MatrixPolynomial& f);

SupportSet support(const SaltDesign& d, double lo, double hi, const SupportOptions& opts = {});

/// Support of μ_f, using the exact eigenvalues when f is constant.
SupportSet support_of(const MatrixPolynomial& f, const SupportOptions& opts = {});

/// ‖f(Ξ)‖ for free semicircular Ξ.
double operator_norm(const MatrixPolynomial& f, const SupportOptions& opts = {});

}  // namespace freespec
