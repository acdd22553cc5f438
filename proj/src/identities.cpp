#include "freespec/identities.hpp"

#include "freespec/random.hpp"
#include "freespec/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace freespec {

namespace {

Matrix identity(int k) { return Matrix::Identity(k, k); }

// Sum of the diagonal s×s blocks of a (k s)×(k s) matrix.
Matrix block_trace(const Matrix& a, int s) {
  Matrix out = Matrix::Zero(s, s);
  for (Eigen::Index k = 0; k * s < a.rows(); ++k) out += a.block(k * s, k * s, s, s);
  return out;
}

Matrix block_of(const Matrix& a, int s, int i, int j) { return a.block(i * s, j * s, s, s); }

Matrix matrix_power(const Matrix& a, int k) {
  Matrix out = identity(static_cast<int>(a.rows()));
  for (int i = 0; i < k; ++i) out = out * a;
  return out;
}

}  // namespace

IndexSet set_minus(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet range_set(int n) {
  IndexSet out(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

RecipeBook::RecipeBook(Matrix x, int blocks, int s, Matrix lambda, CovarianceMap phi)
    : x_(std::move(x)), blocks_(blocks), s_(s), lambda_(std::move(lambda)), phi_(std::move(phi)) {
  if (x_.rows() != blocks_ * s_ || x_.cols() != blocks_ * s_) throw Error("RecipeBook: X has the wrong size");
}

Matrix RecipeBook::f(const IndexSet& j) const {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(j.size()) * s_, blocks_ * s_);
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (j[k] < 0 || j[k] >= blocks_) throw Error("RecipeBook: index out of range");
    out.block(static_cast<Eigen::Index>(k) * s_, j[k] * s_, s_, s_) = identity(s_);
  }
  return out;
}

Matrix RecipeBook::e(const IndexSet& i) const {
  const Matrix fi = f(i);
  return fi.adjoint() * fi;
}

Matrix RecipeBook::diag_all(const Matrix& zeta) const { return kron(identity(blocks_), zeta); }

Matrix RecipeBook::tr_s(const Matrix& a) const { return block_trace(a, s_); }

Matrix RecipeBook::block(const Matrix& a, int i, int j) const { return block_of(a, s_, i, j); }

const Matrix& RecipeBook::R(int n, const IndexSet& i) {
  const auto key = std::make_pair(n, i);
  auto it = r_cache_.find(key);
  if (it != r_cache_.end()) return it->second;
  const Matrix fi = f(i);
  const Matrix a = x_ / std::sqrt(static_cast<double>(n)) - diag_all(lambda_);
  const Matrix inv = checked_inverse(fi * a * fi.adjoint(), "restricted resolvent");
  return r_cache_.emplace(key, fi.adjoint() * inv * fi).first->second;
}

Matrix RecipeBook::F(int n, const IndexSet& i) { return tr_s(R(n, i)) / static_cast<double>(n); }

Matrix RecipeBook::T(int n, const IndexSet& i, const Matrix& zeta) {
  const Matrix& r = R(n, i);
  Matrix out = Matrix::Zero(s_, s_);
  for (int a : i)
    for (int b : i) out += block(r, a, b) * zeta * block(r, b, a);
  return out / static_cast<double>(n);
}

Matrix RecipeBook::U(int n, const IndexSet& i) {
  const Matrix& r = R(n, i);
  Matrix out = Matrix::Zero(s_ * s_, s_ * s_);
  for (int a : i)
    for (int b : i) {
      const Matrix rb = block(r, a, b);
      out += kron(rb, rb);
    }
  return out / static_cast<double>(n);
}

Matrix RecipeBook::E(int n, const IndexSet& i) {
  const Matrix fi = F(n, i);
  return identity(s_) + (lambda_ + phi_.apply(fi)) * fi;
}

bool RecipeBook::big_e(int n, const IndexSet& i) { return opnorm(E(n, i)) >= 0.5; }

Matrix RecipeBook::H(int n, const IndexSet& i) {
  if (big_e(n, i)) return Matrix::Zero(s_, s_);
  return -checked_inverse(lambda_ + phi_.apply(F(n, i)), "Lambda + Phi(F)");
}

Matrix RecipeBook::R_IJ(int n, const IndexSet& i, const IndexSet& j) {
  const Matrix fj = f(j);
  return fj * R(n, i) * fj.adjoint();
}

Matrix RecipeBook::H_IJ(int n, const IndexSet& i, const IndexSet& j) {
  return kron(identity(static_cast<int>(j.size())), H(n, set_minus(i, j)));
}

Matrix RecipeBook::Q_IJ(int n, const IndexSet& i, const IndexSet& j) {
  const double sn = std::sqrt(static_cast<double>(n));
  const IndexSet rest = set_minus(i, j);
  const Matrix fj = f(j);
  const Matrix xf = x_ * fj.adjoint();
  const Matrix scaled = -fj * xf / sn + fj * x_ * R(n, rest) * xf / static_cast<double>(n) -
                        kron(identity(static_cast<int>(j.size())), phi_.apply(F(n, rest)));
  return sn * scaled;
}

Matrix RecipeBook::P_IJ(int n, const IndexSet& i, const IndexSet& j, const Matrix& a) {
  const double sn = std::sqrt(static_cast<double>(n));
  const IndexSet rest = set_minus(i, j);
  const Matrix fj = f(j);
  const Matrix& r = R(n, rest);
  const Matrix inner = r * x_ * fj.adjoint() * a * fj * x_ * r;
  return sn * (tr_s(inner) / static_cast<double>(n) - T(n, rest, phi_.apply(block_trace(a, s_))));
}

Matrix RecipeBook::Delta_IJ(int n, const IndexSet& i, const IndexSet& j) {
  const int k = static_cast<int>(j.size());
  Matrix out = H_IJ(n, i, j) * Q_IJ(n, i, j);
  if (big_e(n, set_minus(i, j))) out += std::sqrt(static_cast<double>(n)) * identity(k * s_);
  return out;
}

double IdentityReport::max_deviation() const {
  double m = 0.0;
  for (const auto& r : results) m = std::max(m, r.deviation);
  return m;
}

namespace {

class Checker {
 public:
  void record(const std::string& name, const Matrix& lhs, const Matrix& rhs) {
    if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) throw Error("identity " + name + ": shape mismatch");
    auto it = std::find_if(results_.begin(), results_.end(), [&](const IdentityResult& r) { return r.name == name; });
    if (it == results_.end()) {
      results_.push_back({name, 0.0, 0});
      it = std::prev(results_.end());
    }
    it->deviation = std::max(it->deviation, max_abs_diff(lhs, rhs));
    ++it->evaluations;
  }
  std::vector<IdentityResult> take() { return std::move(results_); }

 private:
  std::vector<IdentityResult> results_;
};

IndexSet random_subset(Rng& rng, int n, int min_size) {
  std::uniform_int_distribution<int> size_dist(min_size, n);
  const int k = size_dist(rng);
  IndexSet all = range_set(n);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

IndexSet random_part(Rng& rng, const IndexSet& i) {
  // |J| ∈ {1, 2} with I \ J nonempty.
  const int max_size = std::min<int>(2, static_cast<int>(i.size()) - 1);
  std::uniform_int_distribution<int> size_dist(1, max_size);
  IndexSet pool = i;
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<std::size_t>(size_dist(rng)));
  std::sort(pool.begin(), pool.end());
  return pool;
}

Matrix sampled_block_matrix(const std::vector<Matrix>& xi, const std::vector<Matrix>& a) {
  const Eigen::Index size = xi.front().rows() * a.front().rows();
  Matrix x = Matrix::Zero(size, size);
  for (std::size_t l = 1; l < a.size() && l - 1 < xi.size(); ++l) x += kron(xi[l - 1], a[l]);
  return x;
}

// Identities involving only (n, I, J) for one pair with J ⊂ I.
void check_pair(RecipeBook& b, Checker& c, int n, const IndexSet& i, const IndexSet& j) {
  const int s = b.block_size();
  const int k = static_cast<int>(j.size());
  const double N = n;
  const double sn = std::sqrt(N);
  const IndexSet rest = set_minus(i, j);
  const Matrix fj = b.f(j);
  const Matrix& x = b.x();
  const Matrix lam = b.lambda();
  const Matrix rij = b.R_IJ(n, i, j);
  const Matrix& ri = b.R(n, i);
  const Matrix& rrest = b.R(n, rest);
  const Matrix hij = b.H_IJ(n, i, j);
  const Matrix qij = b.Q_IJ(n, i, j);
  const Matrix dij = b.Delta_IJ(n, i, j);
  const Matrix ik = identity(k * s);

  c.record("schur_complement_block", rij,
           checked_inverse(fj * x * fj.adjoint() / sn - kron(identity(k), lam) -
                               fj * x * rrest * x * fj.adjoint() / N,
                           "Schur complement"));

  c.record("resolvent_rank_update", ri - rrest,
           (fj.adjoint() - rrest * x / sn * fj.adjoint()) * rij * (fj - fj * x / sn * rrest));

  c.record("block_resolvent_relation", -kron(identity(k), lam + b.phi().apply(b.F(n, rest))) * rij, ik + qij * rij / sn);

  for (int order = 1; order <= 3; ++order) {
    Matrix rhs = hij;
    const Matrix hq = hij * qij;
    for (int nu = 1; nu < order; ++nu) rhs += matrix_power(hq, nu) * hij / std::pow(N, nu / 2.0);
    rhs += matrix_power(dij, order) * rij / std::pow(N, order / 2.0);
    c.record("block_resolvent_expansion(k=" + std::to_string(order) + ")", rij, rhs);
  }

  const Matrix hrest = b.H(n, rest);
  const Matrix d1 = dij * rij / sn;
  const Matrix d2 = dij * dij * rij / N;
  for (int a = 0; a < k; ++a)
    for (int bb = 0; bb < k; ++bb) {
      const Matrix entry = b.block(ri, j[static_cast<std::size_t>(a)], j[static_cast<std::size_t>(bb)]);
      const Matrix delta = a == bb ? hrest : Matrix(Matrix::Zero(s, s));
      c.record("entry_expansion_first_order", entry - delta, block_of(d1, s, a, bb));
      c.record("entry_expansion_second_order", entry - delta - hrest * block_of(qij, s, a, bb) * hrest / sn, block_of(d2, s, a, bb));
    }

  const auto t_phi_tr = [&](const Matrix& m) -> Matrix { return b.T(n, rest, b.phi().apply(block_trace(m, s))); };
  const Matrix lhs_f = N * (b.F(n, i) - b.F(n, rest));
  c.record("partial_trace_difference", lhs_f,
           block_trace(rij, s) + b.tr_s(rrest * x / sn * fj.adjoint() * rij * fj * x / sn * rrest));
  c.record("partial_trace_difference_recipes", lhs_f, block_trace(rij, s) + t_phi_tr(rij) + b.P_IJ(n, i, j, rij) / sn);

  const Matrix hi = b.H(n, i);
  const double ind_rest = b.big_e(n, rest) ? 1.0 : 0.0;
  const double ind_i = b.big_e(n, i) ? 1.0 : 0.0;
  c.record("approximate_resolvent_difference", hi - hrest,
           hi * ind_rest - hrest * ind_i + hi * b.phi().apply(b.F(n, i) - b.F(n, rest)) * hrest);

  const Matrix fbis_lhs = b.F(n, i) - b.F(n, rest) -
                          static_cast<double>(k) * (hrest + b.T(n, rest, b.phi().apply(hrest))) / N;
  const Matrix dr = dij * rij;
  c.record("partial_trace_difference_expansion", fbis_lhs,
           (b.P_IJ(n, i, j, rij) + block_trace(dr, s) + t_phi_tr(dr)) / std::pow(N, 1.5));
}

// Identities built from the singleton sums over j ∈ I.
void check_sums(RecipeBook& b, Checker& c, int n, const IndexSet& i) {
  const int s = b.block_size();
  const double N = n;
  const double sn = std::sqrt(N);
  const Matrix one = identity(s);
  const auto& phi = b.phi();
  const Matrix ei = b.E(n, i);
  const Matrix fi = b.F(n, i);
  const Matrix hi = b.H(n, i);
  const double size_term = (static_cast<double>(i.size()) - N) / N;

  Matrix ur_rhs = Matrix::Zero(s, s), cor_lhs_sum = Matrix::Zero(s, s), cor_rhs = Matrix::Zero(s, s);
  Matrix hf2_lhs_sum = Matrix::Zero(s, s), hf2_rhs_sum = Matrix::Zero(s, s);
  Matrix pre_lhs_sum = Matrix::Zero(s, s), pre_rhs = Matrix::Zero(s, s);
  for (int jj : i) {
    const IndexSet j{jj};
    const IndexSet rest = set_minus(i, j);
    const Matrix r = b.R_IJ(n, i, j);
    const Matrix q = b.Q_IJ(n, i, j);
    const Matrix h = b.H(n, rest);
    const Matrix d = b.Delta_IJ(n, i, j);
    const Matrix frest = b.F(n, rest);
    const Matrix dphi = phi.apply(fi - frest) * r;
    const Matrix qh = q * h;
    ur_rhs += dphi - q * r / sn;
    cor_lhs_sum += qh / sn;
    cor_rhs += dphi - q * d * r / N;
    hf2_lhs_sum += frest * qh / sn;
    hf2_rhs_sum += fi * dphi - fi * q * d * r / N - (fi - frest) * qh / sn;
    const Matrix t_tilde_r = phi.apply(r) + phi.apply(b.T(n, rest, phi.apply(r)));
    pre_lhs_sum += (qh * qh - t_tilde_r * r) / N + qh * qh * qh / std::pow(N, 1.5);
    pre_rhs += -qh / sn - q * d * d * d * r / (N * N) + phi.apply(b.P_IJ(n, i, j, r)) * r / std::pow(N, 1.5);
  }
  c.record("approximate_sd_equation", ei + size_term * one, ur_rhs / N);
  c.record("approximate_sd_equation_corrected", ei + size_term * one + cor_lhs_sum / N, cor_rhs / N);

  const double ind = b.big_e(n, i) ? 1.0 : 0.0;
  c.record("approximate_vs_partial_trace", hi - fi, hi * ei - fi * ind);
  c.record("approximate_vs_partial_trace_corrected", hi - fi + hf2_lhs_sum / N,
           (N - static_cast<double>(i.size())) / N * fi + hi * ei * ei - (fi + fi * ei) * ind + hf2_rhs_sum / N);

  c.record("second_order_sd_expansion", ei + size_term * one + pre_lhs_sum / N, pre_rhs / N);
}

// The bias identity at I = {1..n}.
void check_bias(RecipeBook& b, Checker& c, int n) {
  const int s = b.block_size();
  const double N = n;
  const double sn = std::sqrt(N);
  const auto& phi = b.phi();
  const IndexSet all = range_set(n);
  Matrix lhs_sum = Matrix::Zero(s, s), rhs_sum = Matrix::Zero(s, s);
  for (int jj : all) {
    const IndexSet j{jj};
    const IndexSet rest = set_minus(all, j);
    const auto t_tilde = [&](const Matrix& m) -> Matrix { return phi.apply(m) + phi.apply(b.T(n, rest, phi.apply(m))); };
    const auto p_tilde = [&](const Matrix& m) -> Matrix { return phi.apply(b.P_IJ(n, all, j, m)); };
    const Matrix h = b.H(n, rest);
    const Matrix q = b.Q_IJ(n, all, j);
    const Matrix r = b.R_IJ(n, all, j);
    const Matrix d = b.Delta_IJ(n, all, j);
    const Matrix r_check = h * q * h;
    const Matrix qh = q * h;
    const Matrix dr = d * r;
    const Matrix d2r = d * dr;
    const Matrix err = qh * qh - t_tilde(h) * h + qh * qh * qh / sn;
    const Matrix err1 = (t_tilde(h) * r_check + t_tilde(r_check) * h + p_tilde(h) * h) / N - qh;
    const Matrix err2 = t_tilde(h) * d2r + t_tilde(r_check) * dr + t_tilde(d2r) * r + p_tilde(h) * dr +
                        p_tilde(dr) * r - q * d * d2r;
    lhs_sum += err / N;
    rhs_sum += err1 / sn + err2 / (N * N);
  }
  c.record("bias_identity", b.E(n, all) + lhs_sum / N, rhs_sum / N);
}

// Identities comparing scales n and n+1.
void check_rescaling(RecipeBook& b, Checker& c, int n, const IndexSet& i) {
  const double N = n;
  const double sn = std::sqrt(N);
  const double delta = sn * (1.0 / sn - 1.0 / std::sqrt(N + 1.0));
  const Matrix& r = b.R(n, i);
  const Matrix& r_next = b.R(n + 1, i);
  const Matrix ei = b.e(i);
  const Matrix step = delta * r * ei * b.x() * ei / sn;
  for (int order = 1; order <= 3; ++order) {
    Matrix rhs = r;
    for (int nu = 1; nu < order; ++nu) rhs += matrix_power(step, nu) * r;
    rhs += matrix_power(step, order) * r_next;
    c.record("scale_change_expansion(k=" + std::to_string(order) + ")", r_next, rhs);
  }

  const Matrix lam = b.lambda();
  const Matrix w = ei + r * b.diag_all(lam);
  const double nd = N * delta;
  c.record("partial_trace_scale_change", (N + 1.0) * b.F(n + 1, i) - N * b.F(n, i) - 0.5 * (b.F(n, i) + b.T(n, i, lam)),
           b.tr_s((nd - 0.5) * w * r + nd * nd / N * w * w * r_next) / N);
}

void check_link(RecipeBook& b, Checker& c, int n) {
  const double N = n;
  const IndexSet first = range_set(n);
  const IndexSet next = range_set(n + 1);
  const Matrix h = b.H(n + 1, first);
  const Matrix t_phi_h = b.T(n + 1, first, b.phi().apply(h));
  const Matrix half = 0.5 * (b.F(n, first) + b.T(n, first, b.lambda()));
  const Matrix link = half - b.F(n + 1, next) + h + t_phi_h;
  c.record("scale_change_rearrangement", N * (b.F(n + 1, next) - b.F(n, first)) - link,
           (N + 1.0) * b.F(n + 1, first) - N * b.F(n, first) - half +
               (N + 1.0) * (b.F(n + 1, next) - b.F(n + 1, first)) - h - t_phi_h);
}

// ∂₁F̲ = T and ∂₂F̲ = U for the underlined triple.
void check_underline(RecipeBook& b, RecipeBook& under, Checker& c, int n, const IndexSet& i) {
  const int s = b.block_size();
  const Matrix fu = under.F(n, i);
  const Matrix& r = b.R(n, i);
  Matrix t_op = Matrix::Zero(s * s, s * s);
  for (int a : i)
    for (int bb : i) t_op += sandwich_operator(b.block(r, a, bb), b.block(r, bb, a));
  c.record("underline_bullet_derivative", partial1(fu, s), t_op / static_cast<double>(n));
  c.record("underline_half_transpose_derivative", partial2(fu, s), b.U(n, i));
}

}  // namespace

IdentityReport check_identities(const SaltDesign& d, int N, std::uint64_t seed, const IdentityOptions& opts) {
  if (N < 4) throw Error("check_identities: N must be at least 4");
  if (!(opts.z.imag() > 0.0)) throw Error("check_identities: Im z must be positive");
  if (opts.t < 0.0) throw Error("check_identities: t must be nonnegative");

  const int blocks = N + 1;
  const Matrix lambda = d.theta + opts.z * d.e + kI * opts.t * identity(d.s);
  const SaltDesign under = underline(d);
  const Matrix under_lambda = under.theta + opts.z * under.e + kI * opts.t * identity(under.s);

  for (int attempt = 0;; ++attempt) {
    const std::uint64_t sample_seed = attempt == 0 ? seed : hash_keys({seed, static_cast<std::uint64_t>(attempt)});
    try {
      const WignerSample ws = sample(opts.law, blocks, d.m, sample_seed);
      RecipeBook book(sampled_block_matrix(ws.xi, d.a), blocks, d.s, lambda, covariance_map(d));
      RecipeBook under_book(sampled_block_matrix(ws.xi, under.a), blocks, under.s, under_lambda,
                            covariance_map(under));
      Checker c;
      Rng rng(hash_keys({sample_seed, 0x5e75ULL}));

      std::vector<std::pair<IndexSet, IndexSet>> pairs;
      const IndexSet all = range_set(N);
      pairs.emplace_back(all, random_part(rng, all));
      for (int k = 0; k < opts.subset_trials; ++k) {
        const IndexSet i = random_subset(rng, N, 3);
        pairs.emplace_back(i, random_part(rng, i));
      }
      for (const auto& [i, j] : pairs) {
        check_pair(book, c, N, i, j);
        check_sums(book, c, N, i);
        check_rescaling(book, c, N, i);
      }
      // The underlined algebra has block size 3s², so one subset suffices.
      check_underline(book, under_book, c, N, pairs.back().first);
      check_bias(book, c, N);
      check_link(book, c, N);

      IdentityReport report;
      report.N = N;
      report.seed = sample_seed;
      report.results = c.take();
      return report;
    } catch (const SingularMatrixError&) {
      if (attempt >= 8) throw;
    }
  }
}

}  // namespace freespec
