#include "freespec/sdsolver.hpp"

#include "freespec/tensor.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <optional>

namespace freespec {

NonConvergenceError::NonConvergenceError(double t, double residual)
    : Error("Schwinger-Dyson solver did not converge at t=" + std::to_string(t) +
            " (residual " + std::to_string(residual) + ")"),
      t_(t),
      residual_(residual) {}

std::vector<double> ContinuationSchedule::steps(double cutoff) const {
  validate();
  const double start = t_start > 0.0 ? t_start : std::max(cutoff, 8.0);
  std::vector<double> ts;
  for (double t = start; t > t_min; t *= factor) ts.push_back(t);
  ts.push_back(0.0);
  return ts;
}

void ContinuationSchedule::validate() const {
  if (!(factor > 0.0 && factor < 1.0)) throw Error("schedule: factor must lie in (0,1)");
  if (!(damping > 0.0 && damping <= 1.0)) throw Error("schedule: damping must lie in (0,1]");
  if (!(t_min > 0.0)) throw Error("schedule: t_min must be positive");
  if (max_iter < 1) throw Error("schedule: max_iter must be positive");
  if (!(tol > 0.0) || !(final_tol > 0.0)) throw Error("schedule: tolerances must be positive");
}

double sd_residual(const CovarianceMap& phi, const Matrix& lambda, const Matrix& g) {
  Matrix r = (lambda + phi.apply(g)) * g;
  r.diagonal().array() += 1.0;
  return r.norm();
}

std::string path_step_json(const PathStep& step) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "{\"t\": %.12g, \"iterations\": %d, \"residual\": %.12g}", step.t, step.iterations,
                step.residual);
  return buf;
}

namespace {

struct StepOutcome {
  bool ok = false;
  int iterations = 0;
  double residual = 0.0;
};

class Corrector {
 public:
  Corrector(const CovarianceMap& phi, const ContinuationSchedule& sched)
      : phi_(phi), sched_(sched), s_(phi.block_size()) {
    if (sched.use_newton && s_ * s_ <= sched.max_newton_dim) phimat_ = phi.matrix();
  }

  // Refines g in place toward a solution at the shifted point lam.
  StepOutcome run(Matrix& g, const Matrix& lam) const {
    StepOutcome out;
    if (phimat_) {
      out = newton(g, lam);
      if (out.ok) return out;
    }
    const int used = out.iterations;
    out = fixed_point(g, lam);
    out.iterations += used;
    return out;
  }

 private:
  StepOutcome newton(Matrix& g, const Matrix& lam) const {
    StepOutcome out;
    double res = sd_residual(phi_, lam, g);
    const Matrix id = Matrix::Identity(s_, s_);
    for (int it = 0; it < 60; ++it) {
      if (res <= sched_.tol) {
        out.ok = true;
        break;
      }
      const Matrix m = lam + phi_.apply(g);
      Matrix f = m * g;
      f.diagonal().array() += 1.0;
      // d/dG of (Λ + Φ(G))G applied to δ is Φ(δ)G + (Λ + Φ(G))δ.
      const Matrix jac = kron(g.transpose(), id) * (*phimat_) + kron(id, m);
      Eigen::PartialPivLU<Matrix> lu(jac);
      if (!(lu.rcond() > 1e-15)) break;
      const Matrix delta = unvec(lu.solve(-vec(f)), s_);
      double step = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 12; ++ls, step *= 0.5) {
        const Matrix trial = g + step * delta;
        const double r = sd_residual(phi_, lam, trial);
        if (std::isfinite(r) && r < res) {
          g = trial;
          res = r;
          improved = true;
          break;
        }
      }
      ++out.iterations;
      if (!improved) break;
    }
    out.residual = res;
    out.ok = res <= sched_.tol;
    return out;
  }

  StepOutcome fixed_point(Matrix& g, const Matrix& lam) const {
    StepOutcome out;
    double alpha = sched_.damping;
    double res = sd_residual(phi_, lam, g);
    int singular_retries = 0;
    for (int it = 0; it < sched_.max_iter && res > sched_.tol; ++it) {
      Matrix update;
      try {
        update = -checked_inverse(lam + phi_.apply(g), "fixed-point update");
      } catch (const SingularMatrixError&) {
        if (++singular_retries > 8) break;
        alpha *= 0.5;
        continue;
      }
      const Matrix trial = (1.0 - alpha) * g + alpha * update;
      const double r = sd_residual(phi_, lam, trial);
      ++out.iterations;
      if (!std::isfinite(r)) {
        alpha *= 0.5;
        if (alpha < 1e-6) break;
        continue;
      }
      if (r > res) {
        alpha = std::max(alpha * 0.5, 1e-6);
      }
      g = trial;
      res = r;
    }
    out.residual = res;
    out.ok = res <= sched_.tol;
    return out;
  }

  const CovarianceMap& phi_;
  const ContinuationSchedule& sched_;
  int s_;
  std::optional<Matrix> phimat_;
};

cplx ipow(int l) {
  static const cplx table[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
  return table[((l % 4) + 4) % 4];
}

bool is_psd_direction(const Matrix& lam) {
  // Im Λ ≥ 0 means the physical solution has Im G ≥ 0.
  return min_hermitian_eigenvalue(imaginary_part(lam)) >= -1e-12;
}

bool branch_ok(const Matrix& lam, const Matrix& g) {
  if (!is_psd_direction(lam)) return true;
  const double scale = std::max(1.0, opnorm(g));
  return min_hermitian_eigenvalue(imaginary_part(g)) >= -1e-9 * scale;
}

}  // namespace

SdSolution solve_sd(const CovarianceMap& phi, const Matrix& lambda, const ContinuationSchedule& schedule,
                    double cutoff, const std::function<void(const PathStep&)>& trace) {
  const int s = phi.block_size();
  if (lambda.rows() != s || lambda.cols() != s) throw Error("solve_sd: Λ has the wrong block size");
  const std::vector<double> ts = schedule.steps(cutoff);
  const Matrix id = Matrix::Identity(s, s);
  const Corrector corr(phi, schedule);

  SdSolution sol;
  Matrix g = -checked_inverse(lambda + cplx(0.0, ts.front()) * id, "shifted Λ");
  double t_prev = ts.front();
  bool first = true;

  auto attempt = [&](double t, Matrix& gg, StepOutcome& out) {
    const Matrix lam = lambda + cplx(0.0, t) * id;
    Matrix trial = gg;
    out = corr.run(trial, lam);
    if (!out.ok && out.residual > schedule.final_tol) return false;
    const double change = (trial - gg).norm() / std::max(gg.norm(), 1e-300);
    if (!first && change > 0.5 && t > 0.0) return false;
    if (!branch_ok(lam, trial)) return false;
    gg = trial;
    return true;
  };

  for (double t_target : ts) {
    // Advance from t_prev to t_target, bisecting the step when the corrector fails.
    std::vector<double> pending{t_target};
    int halvings = 0;
    while (!pending.empty()) {
      const double t = pending.back();
      StepOutcome out;
      Matrix trial = g;
      if (attempt(t, trial, out)) {
        g = trial;
        pending.pop_back();
        first = false;
        PathStep step{t, out.iterations, out.residual};
        sol.path.push_back(step);
        if (trace) trace(step);
        t_prev = t;
        continue;
      }
      if (first || ++halvings > schedule.max_halvings) {
        throw NonConvergenceError(t, out.residual);
      }
      pending.push_back(0.5 * (t_prev + t));
    }
  }

  sol.g = g;
  sol.residual = sd_residual(phi, lambda, g);
  if (!(sol.residual <= schedule.final_tol)) throw NonConvergenceError(0.0, sol.residual);
  if (sol.g.fullPivLu().rank() < s) throw SingularMatrixError("solve_sd: solution is not invertible");
  return sol;
}

Matrix derivative_operator(const CovarianceMap& phi, const Matrix& g) {
  const Matrix ginv = checked_inverse(g, "G");
  const Matrix k = sandwich_operator(ginv, ginv) - phi.matrix();
  return checked_inverse(k, "linearized Schwinger-Dyson operator");
}

Matrix solve_derivative(const CovarianceMap& phi, const Matrix& g, const Matrix& zeta) {
  const int s = phi.block_size();
  const Matrix ginv = checked_inverse(g, "G");
  const Matrix k = sandwich_operator(ginv, ginv) - phi.matrix();
  Eigen::PartialPivLU<Matrix> lu(k);
  if (!(lu.rcond() > 1e-14)) throw SingularMatrixError("singular linearized Schwinger-Dyson operator");
  return unvec(lu.solve(vec(zeta)), s);
}

Matrix secondary_g(const CovarianceTensor& psi, const Matrix& g) {
  const Matrix ginv = checked_inverse(g, "G");
  Matrix k = kron(ginv, ginv);
  if (!psi.terms.terms().empty()) k -= psi.dense();
  return checked_inverse(k, "secondary tensor operator");
}

Matrix fock_oracle(const SaltDesign& d, const Matrix& lambda, int depth) {
  if (depth < 0) throw Error("fock_oracle: negative depth");
  const int m = d.m;
  const int s = d.s;
  // Level offsets: words of length k occupy [offset[k], offset[k] + m^k).
  std::vector<long> offset{0};
  long count = 1;
  long level = 1;
  for (int k = 1; k <= depth && m > 0; ++k) {
    offset.push_back(count);
    level *= m;
    count += level;
    if (count > 5'000'000) throw Error("fock_oracle: truncated Fock space too large");
  }
  const int levels = static_cast<int>(offset.size());  // depth+1 when m > 0

  using Sp = Eigen::SparseMatrix<cplx>;
  std::vector<Eigen::Triplet<cplx>> trip;
  const long dim = count * s;
  // Block (u, w) of the operator is Σ_ℓ Ξ_ℓ(u,w) a_ℓ minus δ_uw Λ.
  for (long w = 0; w < count; ++w)
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        if (lambda(i, j) != cplx(0.0)) trip.emplace_back(w * s + i, w * s + j, -lambda(i, j));
  long width = 1;
  for (int k = 0; k + 1 < levels; ++k, width *= m) {
    for (long r = 0; r < width; ++r) {
      const long w = offset[static_cast<std::size_t>(k)] + r;
      for (int l = 1; l <= m; ++l) {
        // Σ_ℓ e_w = e_{ℓw}; prepending ℓ puts it in the leading position.
        const long child = offset[static_cast<std::size_t>(k + 1)] + static_cast<long>(l - 1) * width + r;
        const cplx up = ipow(l);  // coefficient of Σ_ℓ
        const cplx down = std::conj(up);
        const Matrix& a = d.a[static_cast<std::size_t>(l)];
        for (int i = 0; i < s; ++i)
          for (int j = 0; j < s; ++j) {
            if (a(i, j) == cplx(0.0)) continue;
            trip.emplace_back(child * s + i, w * s + j, up * a(i, j));
            trip.emplace_back(w * s + i, child * s + j, down * a(i, j));
          }
      }
    }
  }
  Sp op(dim, dim);
  op.setFromTriplets(trip.begin(), trip.end());
  op.makeCompressed();
  Eigen::SparseLU<Sp> lu;
  lu.analyzePattern(op);
  lu.factorize(op);
  if (lu.info() != Eigen::Success) throw SingularMatrixError("fock_oracle: singular truncated operator");
  Matrix rhs = Matrix::Zero(dim, s);
  for (int j = 0; j < s; ++j) rhs(j, j) = 1.0;
  const Matrix x = lu.solve(rhs);
  return x.topRows(s);
}

}  // namespace freespec
