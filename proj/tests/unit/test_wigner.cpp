#include "freespec/linearize.hpp"
#include "freespec/wigner.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace freespec;

TEST_CASE("samples are Hermitian with the parity symmetry") {
  const WignerSample s = sample(EntryLaw{}, 7, 3, 42);
  REQUIRE(s.xi.size() == 3);
  for (int l = 1; l <= 3; ++l) {
    const Matrix& x = s.xi[static_cast<std::size_t>(l - 1)];
    CHECK((x - x.adjoint()).norm() == 0.0);
    const double sign = l % 2 ? -1.0 : 1.0;
    CHECK((x.transpose() - sign * x).norm() == 0.0);
  }
  CHECK(s.xi[0].diagonal().norm() == 0.0);
}

TEST_CASE("samples nest and are reproducible") {
  const EntryLaw law = EntryLaw::parse("uniform");
  const WignerSample small = sample(law, 5, 2, 9), big = sample(law, 12, 2, 9), again = sample(law, 12, 2, 9);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK((big.xi[l].topLeftCorner(5, 5) - small.xi[l]).norm() == 0.0);
    CHECK((big.xi[l] - again.xi[l]).norm() == 0.0);
  }
  CHECK((sample(law, 12, 2, 10).xi[1] - big.xi[1]).norm() > 0.0);
}

TEST_CASE("normalized entries have unit variance") {
  for (const char* name : {"gaussian", "rademacher", "uniform", "gaussian:1.5"}) {
    const EntryLaw law = EntryLaw::parse(name);
    SplitMix64 rng(5);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
      const double x = law.draw(rng);
      sum += x;
      sq += x * x;
    }
    CHECK(sum / n == doctest::Approx(0.0).scale(1).epsilon(1e-2));
    CHECK(sq / n == doctest::Approx(1.0).epsilon(1e-2));
  }
}

TEST_CASE("truncation constants match closed forms") {
  const double c = 1.3;
  // Gaussian: E Z²1{|Z|≤C} = erf(C/√2) − 2Cφ(C).
  const double phi = std::exp(-c * c / 2) / std::sqrt(2 * std::numbers::pi);
  const TruncationConstants g = truncation_constants(BaseLaw::Gaussian, c);
  CHECK(g.mean == doctest::Approx(0.0));
  CHECK(g.rho == doctest::Approx(std::sqrt(std::erf(c / std::sqrt(2.0)) - 2 * c * phi)).epsilon(1e-8));
  // Uniform on [−√3, √3]: E Z²1{|Z|≤C} = C³/(3√3) for C < √3.
  const TruncationConstants u = truncation_constants(BaseLaw::Uniform, c);
  CHECK(u.rho == doctest::Approx(std::sqrt(c * c * c / (3 * std::sqrt(3.0)))).epsilon(1e-8));
  CHECK_THROWS_AS(truncation_constants(BaseLaw::Rademacher, 0.5), Error);
}

TEST_CASE("truncation normalizes the kept entries") {
  const std::vector<double> raw{-3.0, -1.0, 0.5, 2.5, 0.1};
  const std::vector<double> t = trunc(raw, 2.0, BaseLaw::Gaussian);
  REQUIRE(t.size() == raw.size());
  const TruncationConstants k = truncation_constants(BaseLaw::Gaussian, 2.0);
  CHECK(t[0] == doctest::Approx(-k.mean / k.rho));
  CHECK(t[1] == doctest::Approx((-1.0 - k.mean) / k.rho));
  const std::vector<double> e = trunc_empirical(raw, 2.0);
  double mean = 0.0;
  for (double x : e) mean += x;
  CHECK(mean == doctest::Approx(0.0).scale(1).epsilon(1e-12));
}

TEST_CASE("real fast path agrees with the complex eigensolver") {
  for (const int n : {300, 301}) {
    const WignerSample s = sample(EntryLaw{}, n, 2, 3);
    for (const Matrix& x : s.xi) {
      const std::vector<double> fast = hermitian_eigenvalues(x);
      Eigen::SelfAdjointEigenSolver<Matrix> es(x, Eigen::EigenvaluesOnly);
      REQUIRE(fast.size() == static_cast<std::size_t>(n));
      double worst = 0.0;
      for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(fast[static_cast<std::size_t>(k)] - es.eigenvalues()(k)));
      CHECK(worst < 1e-9);
    }
  }
}

TEST_CASE("empirical Stieltjes transform through both routes") {
  const MatrixPolynomial f = parse_matrix_polynomial("x1*x2 + x2*x1 + x1");
  const SaltDesign d = linearize(f);
  const WignerSample s = sample(EntryLaw::parse("rademacher"), 40, d.m, 17);
  const EmpiricalStieltjes r = empirical_stieltjes(f, s, cplx(0.2, 0.7), &d);
  REQUIRE(r.linearized.has_value());
  CHECK(r.discrepancy < 1e-9);
  const std::vector<double> ev = empirical_spectrum(parse_matrix_polynomial("1"), sample(EntryLaw{}, 6, 1, 1)).eigenvalues;
  CHECK(std::abs(stieltjes_from_eigenvalues(ev, kI) - 1.0 / (1.0 - kI)) < 1e-14);
}

TEST_CASE("law names round trip") {
  CHECK(EntryLaw::parse("gaussian:2").name() == "gaussian:2");
  CHECK(EntryLaw::parse("uniform").name() == "uniform");
  CHECK_THROWS_AS(EntryLaw::parse("cauchy"), Error);
  CHECK_THROWS_AS(EntryLaw::parse("gaussian:-1"), Error);
}
