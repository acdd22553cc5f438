#include "freespec/experiments.hpp"

#include "freespec/bias.hpp"
#include "freespec/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace freespec {

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FREESPEC_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int k = next++; k < count; k = next++) {
        try {
          body(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t sample_seed(std::uint64_t master, int k) { return hash_keys({master, static_cast<std::uint64_t>(k)}); }

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("loglog_slope: need at least two points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error("loglog_slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

int count_outside(const std::vector<double>& points, const std::vector<std::pair<double, double>>& intervals,
                  double epsilon) {
  int count = 0;
  for (double p : points) {
    const bool inside = std::any_of(intervals.begin(), intervals.end(), [&](const auto& iv) {
      return p >= iv.first - epsilon && p <= iv.second + epsilon;
    });
    if (!inside) ++count;
  }
  return count;
}

ConvergenceReport convergence_experiment(const MatrixPolynomial& f, const SupportSet& support,
                                         const ConvergenceConfig& config) {
  if (support.intervals.empty()) throw Error("convergence_experiment: empty support");
  if (config.samples < 1) throw Error("convergence_experiment: samples must be positive");
  ConvergenceReport report;
  report.support = support;
  report.epsilon = config.epsilon;
  const double lo = support.intervals.front().first;
  const double hi = support.intervals.back().second;
  report.norm = std::max(std::abs(lo), std::abs(hi));

  const int m = std::max(1, f.max_variable());
  const int per_n = config.samples;
  const int total = static_cast<int>(config.sizes.size()) * per_n;
  report.rows.resize(static_cast<std::size_t>(total));
  parallel_for(total, worker_count(config.threads), [&](int idx) {
    const int N = config.sizes[static_cast<std::size_t>(idx / per_n)];
    const int k = idx % per_n;
    const WignerSample ws = sample(config.law, N, m, sample_seed(config.seed, k));
    const EmpiricalSpectrum sp = empirical_spectrum(f, ws);
    ConvergenceRow row;
    row.N = N;
    row.sample = k;
    row.lambda_min = sp.eigenvalues.front();
    row.lambda_max = sp.eigenvalues.back();
    row.outliers_eps = count_outside(sp.eigenvalues, support.intervals, config.epsilon);
    row.edge_gap = std::max(std::abs(row.lambda_max - hi), std::abs(row.lambda_min - lo));
    report.rows[static_cast<std::size_t>(idx)] = row;
  });

  for (std::size_t a = 0; a < config.sizes.size(); ++a) {
    ConvergenceSummary s;
    s.N = config.sizes[a];
    s.min_lambda_min = std::numeric_limits<double>::infinity();
    s.max_lambda_max = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < per_n; ++k) {
      const auto& r = report.rows[a * static_cast<std::size_t>(per_n) + static_cast<std::size_t>(k)];
      s.mean_lambda_max += r.lambda_max / per_n;
      s.max_lambda_max = std::max(s.max_lambda_max, r.lambda_max);
      s.min_lambda_min = std::min(s.min_lambda_min, r.lambda_min);
      s.max_spectral_radius = std::max({s.max_spectral_radius, std::abs(r.lambda_max), std::abs(r.lambda_min)});
      s.total_outliers += r.outliers_eps;
      s.max_edge_gap = std::max(s.max_edge_gap, r.edge_gap);
    }
    report.summary.push_back(s);
  }
  return report;
}

BiasReport bias_experiment(const MatrixPolynomial& f, const BiasConfig& config) {
  if (config.samples < 2) throw Error("bias_experiment: at least two samples are needed");
  if (!(config.z.imag() > 0.0)) throw Error("bias_experiment: Im z must be positive");
  const SaltDesign d = linearize(f);
  const int m = std::max(1, f.max_variable());
  const ModelMoments mm = config.law.model_moments(std::max(m, d.m));
  const cplx limit = stieltjes(d, config.z, config.spectral);

  BiasReport report;
  report.z = config.z;
  const int workers = worker_count(config.threads);
  std::vector<double> sizes, deviations, residuals;
  for (int N : config.sizes) {
    std::vector<cplx> values(static_cast<std::size_t>(config.samples));
    parallel_for(config.samples, workers, [&](int k) {
      const WignerSample ws = sample(config.law, N, m, sample_seed(config.seed, k));
      values[static_cast<std::size_t>(k)] = empirical_stieltjes(f, ws, config.z).value;
    });
    BiasRow row;
    row.N = N;
    row.samples = config.samples;
    cplx mean = 0.0;
    for (const cplx& v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (const cplx& v : values) var += std::norm(v - mean);
    var /= static_cast<double>(values.size() - 1);
    row.avg = mean;
    row.limit = limit;
    row.bias_over_N = bias_scalar(d, mm, config.z, N, config.spectral) / static_cast<double>(N);
    row.deviation = std::abs(mean - limit);
    row.residual = std::abs(mean - limit - row.bias_over_N);
    row.std_error = std::sqrt(var / static_cast<double>(values.size()));
    report.rows.push_back(row);
    sizes.push_back(N);
    deviations.push_back(row.deviation);
    residuals.push_back(row.residual);
  }
  if (sizes.size() >= 2) {
    report.deviation_slope = loglog_slope(sizes, deviations);
    report.residual_slope = loglog_slope(sizes, residuals);
  }
  return report;
}

}  // namespace freespec
