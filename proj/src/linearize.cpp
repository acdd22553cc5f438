#include "freespec/linearize.hpp"

#include "freespec/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

namespace freespec {

Matrix SaltDesign::evaluate_pencil(const std::vector<Matrix>& xi) const {
  if (xi.size() < static_cast<std::size_t>(m)) throw Error("evaluate_pencil: missing variable matrices");
  const Eigen::Index k = xi.empty() ? 1 : xi.front().rows();
  Matrix out = Matrix::Zero(s * k, s * k);
  for (int l = 1; l <= m; ++l) {
    if (a[static_cast<std::size_t>(l)].cwiseAbs().maxCoeff() == 0.0) continue;
    out += kron(a[static_cast<std::size_t>(l)], xi[static_cast<std::size_t>(l - 1)]);
  }
  return out;
}

double SaltDesign::coefficient_norm_sum() const {
  double sum = 0.0;
  for (int l = 1; l <= m; ++l) sum += opnorm(a[static_cast<std::size_t>(l)]);
  return sum;
}

// ---------------------------------------------------------------------------

CovarianceMap::CovarianceMap(int s, std::vector<Matrix> coefficients) : s_(s), a_(std::move(coefficients)) {
  for (const auto& c : a_)
    if (c.rows() != s || c.cols() != s) throw Error("CovarianceMap: coefficient has wrong block size");
}

Matrix CovarianceMap::apply(const Matrix& zeta) const {
  Matrix out = Matrix::Zero(s_, s_);
  for (const auto& c : a_) out.noalias() += c * zeta * c;
  return out;
}

Matrix CovarianceMap::matrix() const {
  Matrix out = Matrix::Zero(s_ * s_, s_ * s_);
  for (const auto& c : a_) out += sandwich_operator(c, c);
  return out;
}

double CovarianceMap::norm() const { return opnorm(apply(Matrix::Identity(s_, s_))); }

CovarianceMap covariance_map(const SaltDesign& d) {
  std::vector<Matrix> coeffs;
  for (int l = 1; l <= d.m; ++l) {
    const Matrix& c = d.a[static_cast<std::size_t>(l)];
    if (c.cwiseAbs().maxCoeff() > 0.0) coeffs.push_back(c);
  }
  return CovarianceMap(d.s, std::move(coeffs));
}

CovarianceTensor covariance_tensor(const SaltDesign& d) {
  CovarianceTensor t{d.s, TensorSum(d.s, 2)};
  for (int l = 1; l <= d.m; ++l) {
    const Matrix& c = d.a[static_cast<std::size_t>(l)];
    if (c.cwiseAbs().maxCoeff() == 0.0) continue;
    t.terms.add(l % 2 ? -1.0 : 1.0, {c, c});
  }
  return t;
}

double design_cutoff(const SaltDesign& d) {
  return opnorm(imaginary_part(d.theta)) + 4.0 * (1.0 + covariance_map(d).norm());
}

// ---------------------------------------------------------------------------

SaltDesign design_from_linear(const MatrixPolynomial& f) {
  if (f.degree() > 1) throw Error("design_from_linear: polynomial has degree > 1");
  SaltDesign d;
  d.s = f.size();
  d.n = f.size();
  d.m = f.max_variable();
  d.a.push_back(hermitian_part(f.coefficient_matrix({})));
  for (int l = 1; l <= d.m; ++l) d.a.push_back(hermitian_part(f.coefficient_matrix({l})));
  d.theta = -d.a[0];
  d.e = Matrix::Identity(d.s, d.s);
  d.cutoff = design_cutoff(d);
  return d;
}

namespace {

using Entry = std::tuple<int, int, Monomial>;

struct Column {
  int row;
  NcPolynomial poly;
};

// One splitting round: every monomial of degree ≥ 2 is written as u·v with
// |u| = ⌈d/2⌉ and moved into a rectangular block B so that g = g_low − B D⁻¹ B*.
MatrixPolynomial split_round(const MatrixPolynomial& g) {
  const int k = g.size();
  MatrixPolynomial low(k);
  std::vector<Column> cols;
  std::vector<double> single_sign;  // per column: 0 for paired columns, ±1 for singles
  std::set<Entry> used;

  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (const auto& [w, c] : g(i, j).terms()) {
        if (w.size() <= 1) {
          low(i, j) += NcPolynomial::monomial(w, c);
          continue;
        }
        if (used.count({i, j, w})) continue;
        const Monomial rev(w.rbegin(), w.rend());
        used.insert({i, j, w});
        used.insert({j, i, rev});
        const std::size_t cut = (w.size() + 1) / 2;
        const Monomial u(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(cut));
        const Monomial vtail(w.begin() + static_cast<std::ptrdiff_t>(cut), w.end());
        const Monomial vstar(vtail.rbegin(), vtail.rend());
        const bool self_partner = (i == j) && (w == rev);
        if (self_partner && w.size() % 2 == 0) {
          // w = u u*; a single column √|c| u with sign(c) in the D block.
          const double cr = c.real();
          cols.push_back({i, NcPolynomial::monomial(u, std::sqrt(std::abs(cr)))});
          single_sign.push_back(cr >= 0 ? 1.0 : -1.0);
          continue;
        }
        const cplx scale = self_partner ? cplx(c.real() / 2.0) : c;
        cols.push_back({i, NcPolynomial::monomial(u, scale)});
        single_sign.push_back(0.0);
        cols.push_back({j, NcPolynomial::monomial(vstar, 1.0)});
        single_sign.push_back(0.0);
      }

  const int r = static_cast<int>(cols.size());
  MatrixPolynomial h(k + r);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) h(i, j) = low(i, j);
  for (int c = 0; c < r; ++c) {
    h(cols[static_cast<std::size_t>(c)].row, k + c) = cols[static_cast<std::size_t>(c)].poly;
    h(k + c, cols[static_cast<std::size_t>(c)].row) = cols[static_cast<std::size_t>(c)].poly.adjoint();
  }
  for (int c = 0; c < r;) {
    if (single_sign[static_cast<std::size_t>(c)] != 0.0) {
      h(k + c, k + c) = NcPolynomial(cplx(-single_sign[static_cast<std::size_t>(c)]));
      ++c;
    } else {
      // D = −[[0,1],[1,0]] on the column pair (f₁, f₂).
      h(k + c, k + c + 1) = NcPolynomial(cplx(-1.0));
      h(k + c + 1, k + c) = NcPolynomial(cplx(-1.0));
      c += 2;
    }
  }
  return h;
}

MatrixPolynomial symmetrized(const MatrixPolynomial& f) { return cplx(0.5) * (f + f.adjoint()); }

}  // namespace

MatrixPolynomial linear_pencil(const MatrixPolynomial& f) {
  if (!f.is_self_adjoint(1e-12)) throw Error("linearize: polynomial is not self-adjoint");
  MatrixPolynomial cur = symmetrized(f);
  while (cur.degree() > 1) cur = split_round(cur);
  return cur;
}

SaltDesign linearize(const MatrixPolynomial& f) {
  const MatrixPolynomial pencil = linear_pencil(f);
  SaltDesign d = design_from_linear(pencil);
  d.m = std::max(d.m, f.max_variable());
  while (static_cast<int>(d.a.size()) <= d.m) d.a.push_back(Matrix::Zero(d.s, d.s));
  d.n = f.size();
  d.e = Matrix::Zero(d.s, d.s);
  for (int i = 0; i < d.n; ++i) d.e(i, i) = 1.0;
  d.cutoff = design_cutoff(d);
  return d;
}

VerificationResult verify_linearization(const MatrixPolynomial& f, const SaltDesign& d, int trials,
                                        std::uint64_t seed, double tolerance) {
  if (d.n != f.size()) throw Error("verify_linearization: corner size differs from polynomial size");
  const int k = 3;
  const cplx z(0.0, 2.0);
  const int m = std::max(d.m, f.max_variable());
  VerificationResult res;
  std::uint64_t stream = seed;
  for (int t = 0; t < trials; ++t) {
    for (int attempt = 0;; ++attempt) {
      Rng rng(hash_keys({stream, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(attempt)}));
      std::vector<Matrix> xi;
      for (int l = 0; l < std::max(m, 1); ++l) xi.push_back(random_hermitian(k, rng));
      try {
        Matrix pencil = d.evaluate_pencil(xi) - kron(d.theta + z * d.e, Matrix::Identity(k, k));
        Matrix big = checked_inverse(pencil, "linearized pencil");
        Matrix fx = evaluate(f, xi);
        fx.diagonal().array() -= z;
        Matrix direct = checked_inverse(fx, "shifted polynomial");
        const double dev = (big.topLeftCorner(d.n * k, d.n * k) - direct).norm();
        res.max_deviation = std::max(res.max_deviation, dev);
        break;
      } catch (const SingularMatrixError&) {
        ++res.reshuffles;
        if (attempt > 8) throw;
      }
    }
    ++res.trials;
  }
  res.ok = res.max_deviation <= tolerance;
  return res;
}

// ---------------------------------------------------------------------------

Matrix underline_element(const Matrix& lambda) {
  const Eigen::Index s = lambda.rows();
  const Eigen::Index q = s * s;
  const Matrix id = Matrix::Identity(s, s);
  Matrix out = Matrix::Zero(3 * q, 3 * q);
  out.block(0, 0, q, q) = kron(lambda, id);
  out.block(q, q, q, q) = kron(id, lambda);
  out.block(2 * q, 2 * q, q, q) = kron(id, lambda.transpose());
  return out;
}

Matrix diamond(int s) {
  const int q = s * s;
  Matrix out = Matrix::Zero(3 * q, 3 * q);
  out.block(0, q, q, q) = Matrix::Identity(q, q);
  out.block(0, 2 * q, q, q) = Matrix::Identity(q, q);
  return out;
}

SaltDesign underline(const SaltDesign& d) {
  const int s = d.s;
  const int q = s * s;
  const Matrix id = Matrix::Identity(s, s);
  SaltDesign u;
  u.s = 3 * q;
  u.m = d.m;
  u.a.push_back(underline_element(d.a[0]));
  for (int l = 1; l <= d.m; ++l) {
    const Matrix& c = d.a[static_cast<std::size_t>(l)];
    Matrix big = Matrix::Zero(3 * q, 3 * q);
    big.block(0, 0, q, q) = kron(c, id);
    big.block(q, q, q, q) = kron(id, c);
    // The transposed copy picks up the parity sign of X_ℓᵀ = (−1)^ℓ X_ℓ.
    big.block(2 * q, 2 * q, q, q) = (l % 2 ? -1.0 : 1.0) * kron(id, c.transpose());
    u.a.push_back(std::move(big));
  }
  u.theta = underline_element(d.theta) + diamond(s);
  u.e = underline_element(d.e);
  u.n = static_cast<int>(std::lround(u.e.trace().real()));
  u.cutoff = design_cutoff(u);
  return u;
}

Matrix coarse_block(const Matrix& big, int s, int i, int j) {
  const int q = s * s;
  if (big.rows() != 3 * q || big.cols() != 3 * q) throw Error("coarse_block: not an underlined element");
  return big.block(i * q, j * q, q, q);
}

Matrix partial1(const Matrix& big, int s) { return bullet(coarse_block(big, s, 0, 1), s); }

Matrix partial2(const Matrix& big, int s) { return half_transpose(coarse_block(big, s, 0, 2), s); }

// ---------------------------------------------------------------------------

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, int s) {
  if (!j.is_array() || static_cast<int>(j.size()) != s) throw Error("design JSON: matrix has wrong row count");
  Matrix m(s, s);
  for (int r = 0; r < s; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != s) throw Error("design JSON: matrix has wrong column count");
    for (int c = 0; c < s; ++c) {
      const auto& cell = row[static_cast<std::size_t>(c)];
      if (cell.is_number()) {
        m(r, c) = cell.get<double>();
      } else {
        m(r, c) = cplx(cell.at(0).get<double>(), cell.at(1).get<double>());
      }
    }
  }
  return m;
}

}  // namespace

std::string design_to_json(const SaltDesign& d) {
  nlohmann::json j;
  j["s"] = d.s;
  j["n"] = d.n;
  j["m"] = d.m;
  nlohmann::json a = nlohmann::json::array();
  for (const auto& c : d.a) a.push_back(matrix_json(c));
  j["a"] = std::move(a);
  j["theta"] = matrix_json(d.theta);
  j["e"] = matrix_json(d.e);
  j["cutoff"] = d.cutoff;
  return j.dump(1);
}

SaltDesign design_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("design JSON: ") + e.what());
  }
  SaltDesign d;
  try {
    d.s = j.at("s").get<int>();
    d.n = j.at("n").get<int>();
    d.m = j.at("m").get<int>();
    for (const auto& c : j.at("a")) d.a.push_back(matrix_from_json(c, d.s));
    if (static_cast<int>(d.a.size()) != d.m + 1) throw Error("design JSON: expected m+1 coefficient matrices");
    d.theta = j.contains("theta") ? matrix_from_json(j["theta"], d.s) : Matrix(-d.a[0]);
    if (j.contains("e")) {
      d.e = matrix_from_json(j["e"], d.s);
    } else {
      d.e = Matrix::Zero(d.s, d.s);
      for (int i = 0; i < d.n; ++i) d.e(i, i) = 1.0;
    }
    d.cutoff = j.contains("cutoff") ? j["cutoff"].get<double>() : design_cutoff(d);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("design JSON: ") + e.what());
  }
  return d;
}

}  // namespace freespec
