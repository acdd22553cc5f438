#include "freespec/spectra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace freespec {

SdSolution solve_at(const SaltDesign& d, cplx z, const SpectralOptions& opts) {
  if (!(z.imag() > 0.0)) throw SolverRefusal("Stieltjes transform requires Im z > 0");
  if (z.imag() < opts.min_imag)
    throw SolverRefusal("Im z = " + std::to_string(z.imag()) + " is below the solver threshold " +
                        std::to_string(opts.min_imag));
  const Matrix lambda = d.theta + z * d.e;
  return solve_sd(covariance_map(d), lambda, opts.schedule, d.cutoff);
}

cplx stieltjes(const SaltDesign& d, cplx z, const SpectralOptions& opts) {
  if (d.n < 1) throw Error("stieltjes: design has empty corner");
  const SdSolution sol = solve_at(d, z, opts);
  cplx acc = 0.0;
  for (int i = 0; i < d.n; ++i) acc += sol.g(i, i);
  return acc / static_cast<double>(d.n);
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 2) return {lo};
  std::vector<double> xs(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) xs[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (points - 1);
  return xs;
}

double DensityCurve::mass() const {
  double m = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (failed[k] || failed[k - 1]) continue;
    m += 0.5 * (values[k] + values[k - 1]) * (grid[k] - grid[k - 1]);
  }
  return m;
}

DensityCurve density(const SaltDesign& d, const std::vector<double>& grid, double epsilon,
                     const SpectralOptions& opts) {
  if (!(epsilon >= opts.min_imag)) throw SolverRefusal("density: epsilon is below the solver threshold");
  DensityCurve c;
  c.grid = grid;
  c.epsilon = epsilon;
  c.values.resize(grid.size());
  c.failed.assign(grid.size(), false);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    try {
      c.values[k] = stieltjes(d, cplx(grid[k], epsilon), opts).imag() / M_PI;
    } catch (const Error&) {
      c.values[k] = std::numeric_limits<double>::quiet_NaN();
      c.failed[k] = true;
    }
  }
  return c;
}

std::pair<double, double> default_search_interval(const MatrixPolynomial& f) {
  double bound = 0.0;
  for (const auto& w : f.words()) {
    bound += opnorm(f.coefficient_matrix(w)) * std::ldexp(1.0, static_cast<int>(w.size()));
  }
  const double r = 1.1 * bound + 0.1;
  return {-r, r};
}

namespace {

class EdgeLocator {
 public:
  EdgeLocator(const SaltDesign& d, const SupportOptions& o) : d_(d), o_(o), sopts_(o.spectral) {
    sopts_.min_imag = std::min(o.spectral.min_imag, 0.25 * o.final_epsilon);
  }

  double rho(double x, double eps) const { return stieltjes(d_, cplx(x, eps), sopts_).imag() / M_PI; }

  // A point where the solver breaks down counts as inside: this happens where
  // the density is singular, e.g. at a hard edge with an inverse-power blow-up.
  bool inside(double x, double eps) const {
    try {
      const double r1 = rho(x, eps);
      if (!(r1 > o_.density_floor)) return false;
      const double r2 = rho(x, 0.5 * eps);
      return r2 >= o_.ratio * r1;
    } catch (const NonConvergenceError&) {
      return true;
    }
  }

  // Refine an edge given a point `in` classified inside and `out` outside at the
  // detection scale; returns the endpoint estimate.
  double refine(double in, double out, double lo_limit, double hi_limit) const {
    const double dir = out > in ? 1.0 : -1.0;  // direction from inside to outside
    std::vector<double> eps_levels;
    const int levels = std::max(o_.epsilon_levels, 1);
    for (int k = 0; k < levels; ++k) {
      const double frac = levels == 1 ? 1.0 : static_cast<double>(k) / (levels - 1);
      eps_levels.push_back(o_.detect_epsilon * std::pow(o_.final_epsilon / o_.detect_epsilon, frac));
    }
    for (std::size_t k = 0; k < eps_levels.size(); ++k) {
      const double eps = eps_levels[k];
      // Re-validate the bracket at this scale, widening it where needed.
      double step = std::max(std::abs(out - in), 10.0 * eps);
      for (int tries = 0; tries < 40 && !inside(in, eps); ++tries) {
        in -= dir * step;
        step *= 1.5;
        in = std::clamp(in, lo_limit, hi_limit);
      }
      step = std::max(std::abs(out - in), 10.0 * eps);
      for (int tries = 0; tries < 40 && inside(out, eps); ++tries) {
        out += dir * step;
        step *= 1.5;
        out = std::clamp(out, lo_limit, hi_limit);
      }
      const bool last = k + 1 == eps_levels.size();
      const double target = last ? 0.25 * o_.tol : std::max(0.25 * o_.tol, 4.0 * eps);
      while (std::abs(out - in) > target) {
        const double mid = 0.5 * (in + out);
        if (inside(mid, eps)) {
          in = mid;
        } else {
          out = mid;
        }
      }
    }
    return 0.5 * (in + out);
  }

 private:
  const SaltDesign& d_;
  const SupportOptions& o_;
  SpectralOptions sopts_;
};

}  // namespace

SupportSet support(const SaltDesign& d, double lo, double hi, const SupportOptions& opts) {
  if (!(hi > lo)) throw Error("support: empty search interval");
  SpectralOptions scan_opts = opts.spectral;
  scan_opts.min_imag = std::min(scan_opts.min_imag, opts.detect_epsilon);
  const std::vector<double> xs = linspace(lo, hi, std::max(opts.scan_points, 3));
  const DensityCurve scan = density(d, xs, opts.detect_epsilon, scan_opts);
  std::vector<bool> marked(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) marked[k] = !scan.failed[k] && scan.values[k] > opts.threshold;

  SupportSet set;
  set.threshold = opts.threshold;
  set.epsilon = opts.final_epsilon;
  const EdgeLocator loc(d, opts);
  std::size_t k = 0;
  while (k < xs.size()) {
    if (!marked[k]) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end + 1 < xs.size() && marked[end + 1]) ++end;
    const double left_out = k == 0 ? lo : xs[k - 1];
    const double right_out = end + 1 == xs.size() ? hi : xs[end + 1];
    const double left = loc.refine(xs[k], left_out, lo, hi);
    const double right = loc.refine(xs[end], right_out, lo, hi);
    if (!set.intervals.empty() && left <= set.intervals.back().second) {
      set.intervals.back().second = std::max(set.intervals.back().second, right);
    } else {
      set.intervals.emplace_back(left, right);
    }
    k = end + 1;
  }
  if (set.intervals.empty()) throw EmptySupportError("support: no spectral mass detected in the search interval");
  return set;
}

SupportSet support_of(const MatrixPolynomial& f, const SupportOptions& opts) {
  if (f.degree() <= 0) {
    Matrix c = f.coefficient_matrix({});
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(c), Eigen::EigenvaluesOnly);
    SupportSet set;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double v = es.eigenvalues()(i);
      if (!set.intervals.empty() && v <= set.intervals.back().second) continue;
      set.intervals.emplace_back(v, v);
    }
    return set;
  }
  const SaltDesign d = linearize(f);
  const auto [lo, hi] = default_search_interval(f);
  return support(d, lo, hi, opts);
}

double operator_norm(const MatrixPolynomial& f, const SupportOptions& opts) {
  if (f.degree() <= 0) {
    Eigen::JacobiSVD<Matrix> svd(f.coefficient_matrix({}));
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  }
  if (f.is_self_adjoint()) {
    const SupportSet set = support_of(f, opts);
    return std::max(std::abs(set.intervals.front().first), std::abs(set.intervals.back().second));
  }
  const MatrixPolynomial ffstar = f * f.adjoint();
  const SupportSet set = support_of(ffstar, opts);
  return std::sqrt(std::max(0.0, set.intervals.back().second));
}

}  // namespace freespec
