#pragma once

#include "freespec/common.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace freespec {

/// A word in the self-adjoint variables X_1, X_2, ...; the empty word is the unit.
using Monomial = std::vector<int>;

/// Thrown by the expression parser, carrying the byte offset of the failure.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t pos);
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

/// Sparse noncommutative polynomial with complex coefficients.
///
/// Terms are kept in lexicographic word order; coefficients with magnitude
/// below kPruneTolerance are dropped so that no stored coefficient is zero.
class NcPolynomial {
 public:
  static constexpr double kPruneTolerance = 1e-14;

  NcPolynomial() = default;
  explicit NcPolynomial(cplx constant);
  static NcPolynomial variable(int index);
  static NcPolynomial monomial(const Monomial& word, cplx coeff = 1.0);

  const std::map<Monomial, cplx>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;  // -1 for the zero polynomial
  int max_variable() const;
  cplx coefficient(const Monomial& word) const;

  /// Conjugate coefficients and reverse every word.
  NcPolynomial adjoint() const;
  /// The transposition X_l -> (-1)^l X_l, extended anti-multiplicatively.
  NcPolynomial transpose_action() const;

  NcPolynomial& operator+=(const NcPolynomial& o);
  NcPolynomial& operator-=(const NcPolynomial& o);
  NcPolynomial& operator*=(cplx c);
  friend NcPolynomial operator+(NcPolynomial a, const NcPolynomial& b) { return a += b; }
  friend NcPolynomial operator-(NcPolynomial a, const NcPolynomial& b) { return a -= b; }
  friend NcPolynomial operator*(NcPolynomial a, cplx c) { return a *= c; }
  friend NcPolynomial operator*(cplx c, NcPolynomial a) { return a *= c; }
  friend NcPolynomial operator*(const NcPolynomial& a, const NcPolynomial& b);
  NcPolynomial operator-() const { return *this * cplx(-1.0); }

  /// True when every coefficient agrees within tol.
  bool approx_equal(const NcPolynomial& o, double tol = 1e-12) const;
  bool operator==(const NcPolynomial& o) const { return approx_equal(o, 0.0); }

  /// Canonical text form, parseable by parse_polynomial.
  std::string to_string() const;

 private:
  void add_term(const Monomial& w, cplx c);
  std::map<Monomial, cplx> terms_;
};

/// Square matrix of noncommutative polynomials, stored row-major.
class MatrixPolynomial {
 public:
  MatrixPolynomial() = default;
  explicit MatrixPolynomial(int n);
  MatrixPolynomial(const NcPolynomial& scalar);  // NOLINT: 1x1 promotion

  int size() const { return n_; }
  NcPolynomial& operator()(int i, int j) { return entries_[static_cast<std::size_t>(i * n_ + j)]; }
  const NcPolynomial& operator()(int i, int j) const {
    return entries_[static_cast<std::size_t>(i * n_ + j)];
  }

  int degree() const;
  int max_variable() const;
  bool is_self_adjoint(double tol = 1e-12) const;

  /// Entrywise adjoint composed with transposition of the entry grid.
  MatrixPolynomial adjoint() const;
  /// Entrywise transpose_action composed with transposition of the entry grid.
  MatrixPolynomial transpose_action() const;

  MatrixPolynomial& operator+=(const MatrixPolynomial& o);
  friend MatrixPolynomial operator+(MatrixPolynomial a, const MatrixPolynomial& b) { return a += b; }
  friend MatrixPolynomial operator*(const MatrixPolynomial& a, const MatrixPolynomial& b);
  friend MatrixPolynomial operator*(cplx c, MatrixPolynomial a);

  bool approx_equal(const MatrixPolynomial& o, double tol = 1e-12) const;

  /// Coefficient matrix of a given word (n x n).
  Matrix coefficient_matrix(const Monomial& word) const;

  /// Every word occurring in some entry.
  std::vector<Monomial> words() const;

  /// DSL text for n == 1, JSON object text otherwise.
  std::string to_string() const;

 private:
  int n_ = 0;
  std::vector<NcPolynomial> entries_;
};

/// Evaluate at matrices xs[l-1] for X_l; entry (i,j) becomes the (i,j) block.
Matrix evaluate(const MatrixPolynomial& f, const std::vector<Matrix>& xs);
Matrix evaluate(const NcPolynomial& p, const std::vector<Matrix>& xs);

/// Parse a scalar DSL expression.
NcPolynomial parse_polynomial(std::string_view text);

/// Parse either a scalar DSL expression (n = 1) or the JSON matrix form
/// {"n": k, "entries": [[expr, ...], ...]}.
MatrixPolynomial parse_matrix_polynomial(std::string_view text);

}  // namespace freespec
