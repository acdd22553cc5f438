#include "freespec/linearize.hpp"
#include "freespec/random.hpp"
#include "freespec/tensor.hpp"

#include <doctest.h>

using namespace freespec;

namespace {

// Corner block of (L(ξ) − 1⊗(Θ + z e))⁻¹, assembled here from the raw design data.
Matrix corner_resolvent(const SaltDesign& d, const std::vector<Matrix>& xi, cplx z) {
  const Eigen::Index N = xi.front().rows();
  Matrix pencil = Matrix::Zero(d.s * N, d.s * N);
  for (int l = 1; l <= d.m; ++l) pencil += kron(d.a[static_cast<std::size_t>(l)], xi[static_cast<std::size_t>(l - 1)]);
  pencil -= kron(d.theta + z * d.e, Matrix::Identity(N, N));
  const Matrix inv = pencil.inverse();
  return inv.topLeftCorner(d.n * N, d.n * N);
}

void check_corner(const char* text, std::uint64_t seed) {
  const MatrixPolynomial f = parse_matrix_polynomial(text);
  const SaltDesign d = linearize(f);
  Rng rng(seed);
  std::vector<Matrix> xi;
  for (int l = 0; l < std::max(1, d.m); ++l) xi.push_back(random_hermitian(3, rng));
  const cplx z(0.3, 1.1);
  const Matrix direct = (evaluate(f, xi) - z * Matrix::Identity(3 * f.size(), 3 * f.size())).inverse();
  CHECK((corner_resolvent(d, xi, z) - direct).norm() < 1e-10);
}

}  // namespace

TEST_CASE("linearized corner block reproduces the resolvent of f") {
  check_corner("x1", 1);
  check_corner("x1^2", 2);
  check_corner("x1*x2 + x2*x1", 3);
  check_corner("x1*x2*x1 - 2*x2^3 + (0+1i)*(x1*x2 - x2*x1) + 0.5", 4);
  check_corner(R"({"n": 2, "entries": [["x1^2", "x1*x2"], ["x2*x1", "x2 - 1"]]})", 5);
  check_corner("3", 6);
}

TEST_CASE("design invariants") {
  const SaltDesign d = linearize(parse_matrix_polynomial("x1*x2*x1 + x2^2"));
  CHECK(d.a.size() == static_cast<std::size_t>(d.m + 1));
  for (const auto& a : d.a) CHECK((a - a.adjoint()).norm() < 1e-14);
  CHECK((d.theta + d.a[0]).norm() < 1e-14);
  CHECK((d.e * d.e - d.e).norm() < 1e-14);
  CHECK(d.e.trace().real() == doctest::Approx(d.n));
  CHECK(d.cutoff == doctest::Approx(design_cutoff(d)));
}

TEST_CASE("linearize refuses non-self-adjoint input") {
  CHECK_THROWS_AS(linearize(parse_matrix_polynomial("x1*x2")), Error);
}

TEST_CASE("covariance map in coefficient and matrix form") {
  Rng rng(8);
  const std::vector<Matrix> a = {random_hermitian(3, rng), random_hermitian(3, rng)};
  const CovarianceMap phi(3, a);
  const Matrix z = random_complex(3, 3, rng);
  const Matrix expected = a[0] * z * a[0] + a[1] * z * a[1];
  CHECK((phi.apply(z) - expected).norm() < 1e-12);
  CHECK((unvec(phi.matrix() * vec(z), 3) - expected).norm() < 1e-12);
  // Completely positive: the norm is attained at the identity.
  CHECK(phi.norm() == doctest::Approx(opnorm(a[0] * a[0] + a[1] * a[1])));
  for (int k = 0; k < 20; ++k) {
    Matrix u = random_complex(3, 3, rng);
    u /= opnorm(u);
    CHECK(opnorm(phi.apply(u)) <= phi.norm() * (1 + 1e-12));
  }
}

TEST_CASE("covariance tensor carries the parity signs") {
  const SaltDesign d = linearize(parse_matrix_polynomial("x1 + 2*x2"));
  Matrix expected = Matrix::Zero(d.s * d.s, d.s * d.s);
  for (int l = 1; l <= d.m; ++l) {
    const Matrix& a = d.a[static_cast<std::size_t>(l)];
    expected += (l % 2 ? -1.0 : 1.0) * kron(a, a);
  }
  CHECK((covariance_tensor(d).dense() - expected).norm() < 1e-14);
}

TEST_CASE("underlined pencil has the same norm as the original") {
  const SaltDesign d = linearize(parse_matrix_polynomial("x1*x2 + x2*x1 + x1"));
  const SaltDesign u = underline(d);
  CHECK(u.s == 3 * d.s * d.s);
  Rng rng(11);
  for (int k = 0; k < 5; ++k) {
    std::vector<Matrix> xi;
    for (int l = 0; l < d.m; ++l) {
      // Realize the parity symmetry Ξᵀ = (−1)^ℓ Ξ.
      const Matrix h = random_hermitian(3, rng);
      xi.push_back(l % 2 == 0 ? Matrix((h - h.transpose()) / 2.0) : Matrix((h + h.transpose()) / 2.0));
    }
    const double n1 = opnorm(d.evaluate_pencil(xi));
    const double n2 = opnorm(u.evaluate_pencil(xi));
    CHECK(n1 == doctest::Approx(n2).epsilon(1e-10));
  }
}

TEST_CASE("underline map and diamond structure") {
  Rng rng(12);
  const Matrix x = random_complex(2, 2, rng);
  const Matrix one = Matrix::Identity(2, 2);
  const Matrix u = underline_element(x);
  CHECK((coarse_block(u, 2, 0, 0) - kron(x, one)).norm() < 1e-15);
  CHECK((coarse_block(u, 2, 1, 1) - kron(one, x)).norm() < 1e-15);
  CHECK((coarse_block(u, 2, 2, 2) - kron(one, x.transpose())).norm() < 1e-15);
  CHECK(coarse_block(u, 2, 0, 1).norm() == 0.0);
  const Matrix dm = diamond(2);
  CHECK((dm * dm).norm() == 0.0);
  CHECK(coarse_block(dm, 2, 0, 1).isIdentity());
  CHECK(coarse_block(dm, 2, 0, 2).isIdentity());
}

TEST_CASE("design JSON round trip") {
  const SaltDesign d = linearize(parse_matrix_polynomial("(0+1i)*(x1*x2 - x2*x1) + x1^2"));
  const SaltDesign back = design_from_json(design_to_json(d));
  CHECK(back.s == d.s);
  CHECK(back.n == d.n);
  CHECK(back.m == d.m);
  for (int l = 0; l <= d.m; ++l) CHECK((back.a[static_cast<std::size_t>(l)] - d.a[static_cast<std::size_t>(l)]).norm() == 0.0);
  CHECK((back.theta - d.theta).norm() == 0.0);
  CHECK_THROWS_AS(design_from_json("{\"s\": 2}"), Error);
}

TEST_CASE("verification helper") {
  const MatrixPolynomial f = parse_matrix_polynomial("x1^3 - x2*x1*x2");
  const VerificationResult v = verify_linearization(f, linearize(f), 4, 9);
  CHECK(v.ok);
  CHECK(v.max_deviation < 1e-10);
  CHECK(v.trials == 4);
}

TEST_CASE("covariance map preserves positivity and the tensor is swap-symmetric") {
  const SaltDesign d = linearize(parse_matrix_polynomial("x1*x2*x1 + x2^3 + x1"));
  const CovarianceMap phi = covariance_map(d);
  Rng rng(14);
  for (int k = 0; k < 100; ++k) {
    const Matrix b = random_complex(d.s, d.s, rng);
    CHECK(min_hermitian_eigenvalue(phi.apply(b * b.adjoint())) >= -1e-10);
  }
  const Matrix psi = covariance_tensor(d).dense();
  CHECK((swap_factors(psi, d.s) - psi).norm() == 0.0);
  for (const auto& a : d.a) CHECK(opnorm(imaginary_part(a)) <= 1e-12);
}

TEST_CASE("scalar covariance tensors") {
  const auto scalar_psi = [](const char* text) {
    const SaltDesign d = linearize(parse_matrix_polynomial(text));
    REQUIRE(d.s == 1);
    return covariance_tensor(d).dense()(0, 0);
  };
  CHECK(scalar_psi("x1") == cplx(-1.0));
  CHECK(scalar_psi("x2") == cplx(1.0));
  CHECK(std::abs(scalar_psi("x1 + x2")) == 0.0);
}

TEST_CASE("partial derivations read the off-diagonal coarse blocks") {
  const int s = 2;
  Rng rng(15);
  const Matrix x = random_complex(s, s, rng), y = random_complex(s, s, rng);
  const Matrix a = kron(x, y);
  Matrix big = Matrix::Zero(3 * s * s, 3 * s * s);
  big.block(0, 2 * s * s, s * s, s * s) = a;  // coarse (1,3) slot
  CHECK((partial2(big, s) - kron(x, y.transpose())).norm() < 1e-15);
  CHECK(partial1(big, s).norm() == 0.0);
  Matrix diag_only = Matrix::Zero(3 * s * s, 3 * s * s);
  diag_only.block(0, 0, s * s, s * s) = a;
  CHECK(partial1(diag_only, s).norm() == 0.0);
  CHECK(partial2(diag_only, s).norm() == 0.0);
  Matrix first_row = Matrix::Zero(3 * s * s, 3 * s * s);
  first_row.block(0, s * s, s * s, s * s) = a;
  CHECK((partial1(first_row, s) - sandwich_operator(x, y)).norm() < 1e-14);
}
