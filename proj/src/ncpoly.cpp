#include "freespec/ncpoly.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace freespec {

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_coefficient(cplx c) {
  if (c.imag() == 0.0) return format_real(c.real());
  std::string im = format_real(std::abs(c.imag()));
  return "(" + format_real(c.real()) + (c.imag() < 0 ? "-" : "+") + im + "i)";
}

}  // namespace

NcPolynomial::NcPolynomial(cplx constant) { add_term({}, constant); }

NcPolynomial NcPolynomial::variable(int index) {
  if (index < 1) throw Error("variable index must be >= 1");
  return monomial({index});
}

NcPolynomial NcPolynomial::monomial(const Monomial& word, cplx coeff) {
  for (int v : word)
    if (v < 1) throw Error("variable index must be >= 1");
  NcPolynomial p;
  p.add_term(word, coeff);
  return p;
}

void NcPolynomial::add_term(const Monomial& w, cplx c) {
  auto it = terms_.find(w);
  if (it == terms_.end()) {
    if (std::abs(c) > kPruneTolerance) terms_.emplace(w, c);
    return;
  }
  it->second += c;
  if (std::abs(it->second) <= kPruneTolerance) terms_.erase(it);
}

int NcPolynomial::degree() const {
  int d = -1;
  for (const auto& [w, c] : terms_) d = std::max(d, static_cast<int>(w.size()));
  return d;
}

int NcPolynomial::max_variable() const {
  int m = 0;
  for (const auto& [w, c] : terms_)
    for (int v : w) m = std::max(m, v);
  return m;
}

cplx NcPolynomial::coefficient(const Monomial& word) const {
  auto it = terms_.find(word);
  return it == terms_.end() ? cplx(0.0) : it->second;
}

NcPolynomial NcPolynomial::adjoint() const {
  NcPolynomial r;
  for (const auto& [w, c] : terms_) r.add_term(Monomial(w.rbegin(), w.rend()), std::conj(c));
  return r;
}

NcPolynomial NcPolynomial::transpose_action() const {
  NcPolynomial r;
  for (const auto& [w, c] : terms_) {
    int odd = 0;
    for (int v : w) odd += v % 2;
    r.add_term(Monomial(w.rbegin(), w.rend()), odd % 2 ? -c : c);
  }
  return r;
}

NcPolynomial& NcPolynomial::operator+=(const NcPolynomial& o) {
  for (const auto& [w, c] : o.terms_) add_term(w, c);
  return *this;
}

NcPolynomial& NcPolynomial::operator-=(const NcPolynomial& o) {
  for (const auto& [w, c] : o.terms_) add_term(w, -c);
  return *this;
}

NcPolynomial& NcPolynomial::operator*=(cplx c) {
  NcPolynomial r;
  for (const auto& [w, v] : terms_) r.add_term(w, v * c);
  *this = std::move(r);
  return *this;
}

NcPolynomial operator*(const NcPolynomial& a, const NcPolynomial& b) {
  NcPolynomial r;
  for (const auto& [wa, ca] : a.terms_)
    for (const auto& [wb, cb] : b.terms_) {
      Monomial w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      r.add_term(w, ca * cb);
    }
  return r;
}

bool NcPolynomial::approx_equal(const NcPolynomial& o, double tol) const {
  std::set<Monomial> keys;
  for (const auto& [w, c] : terms_) keys.insert(w);
  for (const auto& [w, c] : o.terms_) keys.insert(w);
  for (const auto& w : keys)
    if (std::abs(coefficient(w) - o.coefficient(w)) > tol) return false;
  return true;
}

std::string NcPolynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [w, c] : terms_) {
    if (!first) out += " + ";
    first = false;
    out += format_coefficient(c);
    for (int v : w) out += "*x" + std::to_string(v);
  }
  return out;
}

// ---------------------------------------------------------------------------

MatrixPolynomial::MatrixPolynomial(int n) : n_(n), entries_(static_cast<std::size_t>(n * n)) {
  if (n < 1) throw Error("matrix polynomial size must be positive");
}

MatrixPolynomial::MatrixPolynomial(const NcPolynomial& scalar) : n_(1), entries_{scalar} {}

int MatrixPolynomial::degree() const {
  int d = -1;
  for (const auto& e : entries_) d = std::max(d, e.degree());
  return d;
}

int MatrixPolynomial::max_variable() const {
  int m = 0;
  for (const auto& e : entries_) m = std::max(m, e.max_variable());
  return m;
}

bool MatrixPolynomial::is_self_adjoint(double tol) const {
  return approx_equal(adjoint(), tol);
}

MatrixPolynomial MatrixPolynomial::adjoint() const {
  MatrixPolynomial r(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) r(j, i) = (*this)(i, j).adjoint();
  return r;
}

MatrixPolynomial MatrixPolynomial::transpose_action() const {
  MatrixPolynomial r(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) r(j, i) = (*this)(i, j).transpose_action();
  return r;
}

MatrixPolynomial& MatrixPolynomial::operator+=(const MatrixPolynomial& o) {
  if (o.n_ != n_) throw Error("matrix polynomial size mismatch");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
  return *this;
}

MatrixPolynomial operator*(const MatrixPolynomial& a, const MatrixPolynomial& b) {
  if (a.n_ != b.n_) throw Error("matrix polynomial size mismatch");
  MatrixPolynomial r(a.n_);
  for (int i = 0; i < a.n_; ++i)
    for (int j = 0; j < a.n_; ++j)
      for (int k = 0; k < a.n_; ++k) r(i, j) += a(i, k) * b(k, j);
  return r;
}

MatrixPolynomial operator*(cplx c, MatrixPolynomial a) {
  for (auto& e : a.entries_) e *= c;
  return a;
}

bool MatrixPolynomial::approx_equal(const MatrixPolynomial& o, double tol) const {
  if (o.n_ != n_) return false;
  for (std::size_t k = 0; k < entries_.size(); ++k)
    if (!entries_[k].approx_equal(o.entries_[k], tol)) return false;
  return true;
}

Matrix MatrixPolynomial::coefficient_matrix(const Monomial& word) const {
  Matrix m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j).coefficient(word);
  return m;
}

std::vector<Monomial> MatrixPolynomial::words() const {
  std::set<Monomial> all;
  for (const auto& e : entries_)
    for (const auto& [w, c] : e.terms()) all.insert(w);
  return {all.begin(), all.end()};
}

std::string MatrixPolynomial::to_string() const {
  if (n_ == 1) return entries_[0].to_string();
  std::ostringstream os;
  os << "{\"n\": " << n_ << ", \"entries\": [";
  for (int i = 0; i < n_; ++i) {
    os << (i ? ", [" : "[");
    for (int j = 0; j < n_; ++j) os << (j ? ", " : "") << '"' << (*this)(i, j).to_string() << '"';
    os << ']';
  }
  os << "]}";
  return os.str();
}

// ---------------------------------------------------------------------------

Matrix evaluate(const NcPolynomial& p, const std::vector<Matrix>& xs) {
  if (xs.empty() && p.max_variable() == 0) {
    // Constant polynomial with no size information: treat as 1x1.
    return Matrix::Constant(1, 1, p.coefficient({}));
  }
  if (xs.empty()) throw Error("evaluate: missing variable x1");
  const Eigen::Index s = xs.front().rows();
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (xs[k].rows() != s || xs[k].cols() != s) throw Error("evaluate: inconsistent matrix sizes");
  if (p.max_variable() > static_cast<int>(xs.size()))
    throw Error("evaluate: missing variable x" + std::to_string(p.max_variable()));
  Matrix out = Matrix::Zero(s, s);
  for (const auto& [w, c] : p.terms()) {
    if (w.empty()) {
      out.diagonal().array() += c;
      continue;
    }
    Matrix prod = xs[static_cast<std::size_t>(w[0] - 1)];
    for (std::size_t k = 1; k < w.size(); ++k) prod = prod * xs[static_cast<std::size_t>(w[k] - 1)];
    out += c * prod;
  }
  return out;
}

Matrix evaluate(const MatrixPolynomial& f, const std::vector<Matrix>& xs) {
  const int n = f.size();
  const Eigen::Index s = xs.empty() ? 1 : xs.front().rows();
  Matrix out = Matrix::Zero(n * s, n * s);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (f(i, j).is_zero()) continue;
      Matrix block = evaluate(f(i, j), xs);
      if (block.rows() != s) throw Error("evaluate: inconsistent matrix sizes");
      out.block(i * s, j * s, s, s) = block;
    }
  return out;
}

}  // namespace freespec
