#include "freespec/tensor.hpp"

namespace freespec {

Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
  return out;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Eigen::Index rows) {
  return Eigen::Map<const Matrix>(v.data(), rows, v.size() / rows);
}

namespace {
void check_dim(const Matrix& a, int s, const char* what) {
  if (a.rows() != s * s || a.cols() != s * s) throw Error(std::string(what) + ": expected an s²×s² matrix");
}
}  // namespace

Matrix bullet(const Matrix& a, int s) {
  check_dim(a, s, "bullet");
  Matrix op(s * s, s * s);
  for (int al = 0; al < s; ++al)
    for (int be = 0; be < s; ++be)
      for (int ga = 0; ga < s; ++ga)
        for (int de = 0; de < s; ++de) op(al + s * de, ga + s * be) = a(al * s + be, ga * s + de);
  return op;
}

Matrix unbullet(const Matrix& op, int s) {
  check_dim(op, s, "unbullet");
  Matrix a(s * s, s * s);
  for (int al = 0; al < s; ++al)
    for (int be = 0; be < s; ++be)
      for (int ga = 0; ga < s; ++ga)
        for (int de = 0; de < s; ++de) a(al * s + be, ga * s + de) = op(al + s * de, ga + s * be);
  return a;
}

Matrix apply_bullet(const Matrix& a, const Matrix& zeta, int s) {
  return unvec(bullet(a, s) * vec(zeta), s);
}

Matrix half_transpose(const Matrix& a, int s) {
  check_dim(a, s, "half_transpose");
  Matrix out(s * s, s * s);
  for (int al = 0; al < s; ++al)
    for (int be = 0; be < s; ++be)
      for (int ga = 0; ga < s; ++ga)
        for (int de = 0; de < s; ++de) out(al * s + be, ga * s + de) = a(al * s + de, ga * s + be);
  return out;
}

Matrix swap_factors(const Matrix& a, int s) {
  check_dim(a, s, "swap_factors");
  Matrix out(s * s, s * s);
  for (int al = 0; al < s; ++al)
    for (int be = 0; be < s; ++be)
      for (int ga = 0; ga < s; ++ga)
        for (int de = 0; de < s; ++de) out(al * s + be, ga * s + de) = a(be * s + al, de * s + ga);
  return out;
}

Matrix sandwich_operator(const Matrix& x, const Matrix& y) { return kron(y.transpose(), x); }

// ---------------------------------------------------------------------------

void TensorSum::add(cplx coef, std::vector<Matrix> factors) {
  if (static_cast<int>(factors.size()) != k_) throw Error("TensorSum: wrong number of factors");
  for (const auto& f : factors)
    if (f.rows() != s_ || f.cols() != s_) throw Error("TensorSum: factor has wrong block size");
  terms_.push_back({coef, std::move(factors)});
}

void TensorSum::add(const TensorSum& other, cplx scale) {
  if (other.s_ != s_ || other.k_ != k_) throw Error("TensorSum: shape mismatch");
  for (const auto& t : other.terms_) terms_.push_back({t.coef * scale, t.factors});
}

TensorSum TensorSum::power(const Matrix& x, int k) {
  TensorSum t(static_cast<int>(x.rows()), k);
  t.add(1.0, std::vector<Matrix>(static_cast<std::size_t>(k), x));
  return t;
}

TensorSum TensorSum::from_dense2(const Matrix& dense, int s) {
  check_dim(dense, s, "from_dense2");
  TensorSum t(s, 2);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      Matrix b = dense.block(i * s, j * s, s, s);
      if (b.cwiseAbs().maxCoeff() == 0.0) continue;
      Matrix eij = Matrix::Zero(s, s);
      eij(i, j) = 1.0;
      t.add(1.0, {eij, b});
    }
  return t;
}

Matrix TensorSum::dense() const {
  Eigen::Index dim = 1;
  for (int k = 0; k < k_; ++k) dim *= s_;
  Matrix out = Matrix::Zero(dim, dim);
  for (const auto& t : terms_) {
    Matrix p = t.factors[0];
    for (std::size_t k = 1; k < t.factors.size(); ++k) p = kron(p, t.factors[k]);
    out += t.coef * p;
  }
  return out;
}

TensorSum shuffle_bracket(const TensorSum& x, const TensorSum& y) {
  if (x.order() != y.order() || x.block_size() != y.block_size()) throw Error("shuffle_bracket: shape mismatch");
  TensorSum out(x.block_size(), 2 * x.order());
  for (const auto& tx : x.terms())
    for (const auto& ty : y.terms()) {
      std::vector<Matrix> f;
      f.reserve(static_cast<std::size_t>(2 * x.order()));
      for (std::size_t k = 0; k < tx.factors.size(); ++k) {
        f.push_back(tx.factors[k]);
        f.push_back(ty.factors[k]);
      }
      out.add(tx.coef * ty.coef, std::move(f));
    }
  return out;
}

Matrix shuffle_contract(const TensorSum& x, const TensorSum& y) {
  if (x.order() != y.order() || x.block_size() != y.block_size()) throw Error("shuffle_contract: shape mismatch");
  const int s = x.block_size();
  Matrix out = Matrix::Zero(s, s);
  for (const auto& tx : x.terms())
    for (const auto& ty : y.terms()) {
      Matrix p = Matrix::Identity(s, s);
      for (std::size_t k = 0; k < tx.factors.size(); ++k) p = p * tx.factors[k] * ty.factors[k];
      out += tx.coef * ty.coef * p;
    }
  return out;
}

}  // namespace freespec
