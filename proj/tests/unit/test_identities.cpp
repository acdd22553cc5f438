#include "freespec/identities.hpp"
#include "freespec/random.hpp"
#include "freespec/tensor.hpp"

#include <doctest.h>

using namespace freespec;

TEST_CASE("identity catalog holds on a sampled block matrix") {
  const SaltDesign d = linearize(parse_matrix_polynomial("x1*x2 + x2*x1"));
  for (const int n : {4, 6}) {
    const IdentityReport r = check_identities(d, n, 5);
    CHECK(r.N == n);
    CHECK_FALSE(r.results.empty());
    CHECK(r.max_deviation() < 1e-9);
    for (const auto& item : r.results) CHECK(item.evaluations > 0);
  }
}

TEST_CASE("identity catalog with a non-Gaussian law") {
  IdentityOptions opts;
  opts.law = EntryLaw::parse("rademacher");
  opts.z = cplx(-0.4, 0.3);
  const IdentityReport r = check_identities(linearize(parse_matrix_polynomial("x1 + x2^2")), 5, 2, opts);
  CHECK(r.max_deviation() < 1e-9);
}

TEST_CASE("R is the inverse of the restricted shifted matrix") {
  Rng rng(3);
  const int s = 2, blocks = 4, n = 3;
  const Matrix x = random_hermitian(s * blocks, rng);
  const Matrix lambda = Matrix::Identity(s, s) * cplx(0.1, 1.0);
  RecipeBook book(x, blocks, s, lambda, CovarianceMap(s, {Matrix::Identity(s, s)}));
  const IndexSet sel{0, 2};
  // Gather the selected blocks by hand, invert, and scatter back.
  Matrix sub(2 * s, 2 * s);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      const Matrix b = x.block(sel[p] * s, sel[q] * s, s, s) / std::sqrt(double(n));
      sub.block(p * s, q * s, s, s) = p == q ? Matrix(b - lambda) : b;
    }
  const Matrix inv = sub.inverse();
  Matrix expected = Matrix::Zero(s * blocks, s * blocks);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) expected.block(sel[p] * s, sel[q] * s, s, s) = inv.block(p * s, q * s, s, s);
  CHECK((book.R(n, sel) - expected).norm() < 1e-12);
  CHECK(set_minus({0, 1, 2, 3}, {1, 3}) == IndexSet{0, 2});
  CHECK(range_set(3) == IndexSet{0, 1, 2});
}

TEST_CASE("identity check validates its inputs") {
  const SaltDesign d = linearize(parse_matrix_polynomial("x1"));
  CHECK_THROWS_AS(check_identities(d, 3, 1), Error);
  IdentityOptions bad;
  bad.z = cplx(0.0, -1.0);
  CHECK_THROWS_AS(check_identities(d, 4, 1, bad), Error);
}
