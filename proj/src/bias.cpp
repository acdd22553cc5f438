#include "freespec/bias.hpp"

#include <cmath>

namespace freespec {

namespace {

const ScalarEntryMoments& offdiag_of(const ModelMoments& mm, int l) {
  if (l >= static_cast<int>(mm.offdiag.size())) throw Error("model moments missing for variable " + std::to_string(l));
  return mm.offdiag[static_cast<std::size_t>(l)];
}

const DiagonalEntryMoments& diag_of(const ModelMoments& mm, int l) {
  if (l >= static_cast<int>(mm.diag.size())) throw Error("model moments missing for variable " + std::to_string(l));
  return mm.diag[static_cast<std::size_t>(l)];
}

bool nonzero(const Matrix& m) { return m.size() > 0 && m.cwiseAbs().maxCoeff() > 0.0; }

}  // namespace

double scalar_fourth_cumulant(const ScalarEntryMoments& m) {
  return m.abs_fourth - 2.0 - std::norm(m.pseudo_variance);
}

TensorSum fourth_cumulant(const std::vector<Matrix>& a, const ModelMoments& mm) {
  const int s = a.empty() ? 0 : static_cast<int>(a.front().rows());
  TensorSum t(s, 4);
  for (int l = 1; l < static_cast<int>(a.size()); ++l) {
    const Matrix& c = a[static_cast<std::size_t>(l)];
    if (!nonzero(c)) continue;
    const double k4 = scalar_fourth_cumulant(offdiag_of(mm, l));
    if (k4 != 0.0) t.add(k4, {c, c, c, c});
  }
  return t;
}

TensorSum diagonal_second_moment(const std::vector<Matrix>& a, const ModelMoments& mm) {
  const int s = a.empty() ? 0 : static_cast<int>(a.front().rows());
  TensorSum t(s, 2);
  for (int l = 1; l < static_cast<int>(a.size()); ++l) {
    const Matrix& c = a[static_cast<std::size_t>(l)];
    const double v = diag_of(mm, l).variance;
    if (nonzero(c) && v != 0.0) t.add(v, {c, c});
  }
  return t;
}

TensorSum diagonal_third_moment(const std::vector<Matrix>& a, const ModelMoments& mm) {
  const int s = a.empty() ? 0 : static_cast<int>(a.front().rows());
  TensorSum t(s, 3);
  for (int l = 1; l < static_cast<int>(a.size()); ++l) {
    const Matrix& c = a[static_cast<std::size_t>(l)];
    const double m3 = diag_of(mm, l).third;
    if (nonzero(c) && m3 != 0.0) t.add(m3, {c, c, c});
  }
  return t;
}

BiasTerms universal_correction_terms(const SaltDesign& d, const ModelMoments& mm, int N, const Matrix& g) {
  if (N < 1) throw Error("universal_correction: N must be positive");
  const int s = d.s;
  const CovarianceMap phi = covariance_map(d);
  const CovarianceTensor psi = covariance_tensor(d);
  BiasTerms b;

  const Matrix gcheck = secondary_g(psi, g);
  const TensorSum psi_psi = shuffle_bracket(psi.terms, psi.terms);
  const TensorSum gcheck_gg = shuffle_bracket(TensorSum::from_dense2(gcheck, s), TensorSum::power(g, 2));
  b.psi_term = psi_psi.terms().empty() ? Matrix(Matrix::Zero(s, s)) : shuffle_contract(psi_psi, gcheck_gg);
  b.phi_term = -phi.apply(g) * g;

  const TensorSum m2 = diagonal_second_moment(d.a, mm);
  const TensorSum m3 = diagonal_third_moment(d.a, mm);
  const TensorSum c4 = fourth_cumulant(d.a, mm);
  const auto contract_or_zero = [&](const TensorSum& x, int k) {
    return x.terms().empty() ? Matrix(Matrix::Zero(s, s)) : shuffle_contract(x, TensorSum::power(g, k));
  };
  // The model's entry laws do not depend on the index, so the averages over
  // i (and over ordered pairs i ≠ j) collapse to single terms.
  b.diag2_term = contract_or_zero(m2, 2);
  b.diag3_term = -contract_or_zero(m3, 3) / std::sqrt(static_cast<double>(N));
  b.cumulant_term = contract_or_zero(c4, 4) * (static_cast<double>(N - 1) / N);

  b.unwrapped = b.psi_term + b.phi_term + b.diag2_term + b.diag3_term + b.cumulant_term;
  b.wrapped = solve_derivative(phi, g, b.unwrapped * checked_inverse(g, "G"));
  return b;
}

Matrix universal_correction(const SaltDesign& d, const ModelMoments& mm, int N, const Matrix& lambda,
                            const SpectralOptions& opts) {
  const SdSolution sol = solve_sd(covariance_map(d), lambda, opts.schedule, d.cutoff);
  return universal_correction_terms(d, mm, N, sol.g).wrapped;
}

cplx bias_scalar(const SaltDesign& d, const ModelMoments& mm, cplx z, int N, const SpectralOptions& opts) {
  const SdSolution sol = solve_at(d, z, opts);
  const Matrix bias = universal_correction_terms(d, mm, N, sol.g).wrapped;
  cplx acc = 0.0;
  for (int i = 0; i < d.n; ++i) acc += bias(i, i);
  return acc / static_cast<double>(d.n);
}

}  // namespace freespec
