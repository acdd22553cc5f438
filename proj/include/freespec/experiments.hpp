#pragma once

#include "freespec/spectra.hpp"
#include "freespec/wigner.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace freespec {

/// Worker count: FREESPEC_THREADS if set (≥ 1), else the hardware concurrency.
int worker_count(int requested = 0);

/// Run body(k) for k = 0..count−1 on up to `workers` threads. Results must be
/// written to per-index slots so the outcome does not depend on scheduling.
void parallel_for(int count, int workers, const std::function<void(int)>& body);

/// Seed of sample k under a master seed; the same seed is used for every N, so
/// by nesting the smaller matrices are corners of the larger ones.
std::uint64_t sample_seed(std::uint64_t master, int k);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ConvergenceConfig {
  std::vector<int> sizes{100, 400, 1600};
  int samples = 10;
  std::uint64_t seed = 1;
  double epsilon = 0.3;  // fattening of the support used to count outliers
  EntryLaw law{};
  int threads = 0;
};

struct ConvergenceRow {
  int N = 0;
  int sample = 0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  int outliers_eps = 0;
  double edge_gap = 0.0;  // max distance of the extreme eigenvalues to the support edges
};

struct ConvergenceSummary {
  int N = 0;
  double mean_lambda_max = 0.0;
  double max_lambda_max = 0.0;
  double min_lambda_min = 0.0;
  double max_spectral_radius = 0.0;
  int total_outliers = 0;
  double max_edge_gap = 0.0;
};

struct ConvergenceReport {
  SupportSet support;
  double norm = 0.0;
  double epsilon = 0.0;
  std::vector<ConvergenceRow> rows;  // ordered by (N, sample)
  std::vector<ConvergenceSummary> summary;
};

/// Count of points outside the ε-neighbourhood of a union of intervals.
int count_outside(const std::vector<double>& points, const std::vector<std::pair<double, double>>& intervals,
                  double epsilon);

ConvergenceReport convergence_experiment(const MatrixPolynomial& f, const SupportSet& support,
                                         const ConvergenceConfig& config);

struct BiasConfig {
  std::vector<int> sizes{50, 100, 200, 400, 800};
  int samples = 2000;
  std::uint64_t seed = 1;
  cplx z{0.0, 2.0};
  EntryLaw law{};
  int threads = 0;
  SpectralOptions spectral{};
};

struct BiasRow {
  int N = 0;
  int samples = 0;
  cplx avg;          // Monte Carlo mean of the empirical Stieltjes transform
  cplx limit;        // S(z)
  cplx bias_over_N;  // τ(Bias^N)/N
  double deviation = 0.0;  // |avg − S|
  double residual = 0.0;   // |avg − S − bias/N|
  double std_error = 0.0;  // standard error of avg
};

struct BiasReport {
  cplx z;
  std::vector<BiasRow> rows;
  double deviation_slope = 0.0;
  double residual_slope = 0.0;
};

BiasReport bias_experiment(const MatrixPolynomial& f, const BiasConfig& config);

}  // namespace freespec
