#include "freespec/wigner.hpp"

#include "freespec/tensor.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace freespec {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

const char* base_name(BaseLaw b) {
  switch (b) {
    case BaseLaw::Gaussian:
      return "gaussian";
    case BaseLaw::Rademacher:
      return "rademacher";
    case BaseLaw::Uniform:
      return "uniform";
  }
  return "?";
}

}  // namespace

EntryLaw EntryLaw::parse(const std::string& text) {
  EntryLaw law;
  std::string head = text;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    head = text.substr(0, colon);
    const std::string tail = text.substr(colon + 1);
    try {
      std::size_t used = 0;
      law.truncation = std::stod(tail, &used);
      if (used != tail.size()) throw std::invalid_argument(tail);
    } catch (const std::exception&) {
      throw Error("law: invalid truncation level '" + tail + "'");
    }
    if (!(*law.truncation > 0.0)) throw Error("law: truncation level must be positive");
  }
  if (head == "gaussian") {
    law.base = BaseLaw::Gaussian;
  } else if (head == "rademacher") {
    law.base = BaseLaw::Rademacher;
  } else if (head == "uniform") {
    law.base = BaseLaw::Uniform;
  } else {
    throw Error("law: unknown entry law '" + head + "' (expected gaussian, rademacher or uniform)");
  }
  if (law.truncation) truncation_constants(law.base, *law.truncation);  // validates ρ_C > 0
  return law;
}

std::string EntryLaw::name() const {
  std::string s = base_name(base);
  if (truncation) {
    char buf[32];
    std::snprintf(buf, sizeof buf, ":%g", *truncation);
    s += buf;
  }
  return s;
}

TruncationConstants truncation_constants(BaseLaw law, double c) {
  TruncationConstants k;
  double second = 1.0;
  switch (law) {
    case BaseLaw::Gaussian: {
      const double phi = normal_pdf(c);
      const double tail = 1.0 - normal_cdf(c);
      second = 1.0 - 2.0 * (c * phi + tail);
      k.fourth = 3.0 * (2.0 * normal_cdf(c) - 1.0) - 2.0 * phi * (c * c * c + 3.0 * c);
      break;
    }
    case BaseLaw::Uniform:
      if (c >= kSqrt3) {
        second = 1.0;
        k.fourth = 9.0 / 5.0;
      } else {
        second = c * c * c / (3.0 * kSqrt3);
        k.fourth = std::pow(c, 5) / (5.0 * kSqrt3);
      }
      break;
    case BaseLaw::Rademacher:
      second = c >= 1.0 ? 1.0 : 0.0;
      k.fourth = second;
      break;
  }
  if (!(second > 0.0)) throw Error("trunc: rho_C vanishes (truncation level too small)");
  k.rho = std::sqrt(second);
  return k;
}

double draw_base(BaseLaw law, SplitMix64& rng) {
  switch (law) {
    case BaseLaw::Gaussian: {
      std::normal_distribution<double> nd(0.0, 1.0);
      return nd(rng);
    }
    case BaseLaw::Rademacher:
      return (rng() >> 63) ? 1.0 : -1.0;
    case BaseLaw::Uniform: {
      std::uniform_real_distribution<double> ud(-kSqrt3, kSqrt3);
      return ud(rng);
    }
  }
  return 0.0;
}

std::vector<double> trunc(const std::vector<double>& entries, double c, BaseLaw law) {
  const TruncationConstants k = truncation_constants(law, c);
  std::vector<double> out(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i)
    out[i] = ((std::abs(entries[i]) <= c ? entries[i] : 0.0) - k.mean) / k.rho;
  return out;
}

std::vector<double> trunc_empirical(const std::vector<double>& entries, double c) {
  if (entries.empty()) return {};
  std::vector<double> kept(entries.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    kept[i] = std::abs(entries[i]) <= c ? entries[i] : 0.0;
    mean += kept[i];
  }
  mean /= static_cast<double>(entries.size());
  double var = 0.0;
  for (double v : kept) var += (v - mean) * (v - mean);
  var /= static_cast<double>(entries.size());
  if (!(var > 0.0)) throw Error("trunc: rho_C vanishes (truncation level too small)");
  const double rho = std::sqrt(var);
  for (double& v : kept) v = (v - mean) / rho;
  return kept;
}

double EntryLaw::fourth_moment() const {
  if (truncation) {
    const TruncationConstants k = truncation_constants(base, *truncation);
    return k.fourth / std::pow(k.rho, 4);
  }
  switch (base) {
    case BaseLaw::Gaussian:
      return 3.0;
    case BaseLaw::Rademacher:
      return 1.0;
    case BaseLaw::Uniform:
      return 9.0 / 5.0;
  }
  return 0.0;
}

double EntryLaw::draw(SplitMix64& rng) const {
  const double z = draw_base(base, rng);
  if (!truncation) return z;
  const TruncationConstants k = truncation_constants(base, *truncation);
  return ((std::abs(z) <= *truncation ? z : 0.0) - k.mean) / k.rho;
}

ModelMoments EntryLaw::model_moments(int m) const {
  ModelMoments mm;
  mm.offdiag.resize(static_cast<std::size_t>(m + 1));
  mm.diag.resize(static_cast<std::size_t>(m + 1));
  const double mu4 = fourth_moment();
  for (int l = 1; l <= m; ++l) {
    auto& od = mm.offdiag[static_cast<std::size_t>(l)];
    od.abs_fourth = mu4;
    od.pseudo_variance = l % 2 ? -1.0 : 1.0;
    auto& dg = mm.diag[static_cast<std::size_t>(l)];
    if (l % 2 == 0) {
      dg.variance = diag_variance;
      dg.third = std::pow(diag_variance, 1.5) * third_moment();
    }
  }
  return mm;
}

// ---------------------------------------------------------------------------

WignerSample sample(const EntryLaw& law, int N, int m, std::uint64_t seed) {
  if (N < 1) throw Error("sample: N must be positive");
  WignerSample ws;
  ws.N = N;
  ws.seed = seed;
  const double dscale = std::sqrt(law.diag_variance);
  for (int l = 1; l <= m; ++l) {
    Matrix x = Matrix::Zero(N, N);
    const bool odd = l % 2 == 1;
    for (int j = 0; j < N; ++j)
      for (int i = 0; i <= j; ++i) {
        SplitMix64 rng(hash_keys({seed, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(i),
                                  static_cast<std::uint64_t>(j)}));
        const double z = law.draw(rng);
        if (i == j) {
          if (!odd) x(i, i) = dscale * z;
        } else if (odd) {
          x(i, j) = cplx(0.0, z);
          x(j, i) = cplx(0.0, -z);
        } else {
          x(i, j) = z;
          x(j, i) = z;
        }
      }
    ws.xi.push_back(std::move(x));
  }
  return ws;
}

Matrix evaluate_scaled(const MatrixPolynomial& f, const WignerSample& s) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(s.N));
  std::vector<Matrix> xs;
  xs.reserve(s.xi.size());
  for (const auto& x : s.xi) xs.push_back(scale * x);
  if (f.max_variable() > static_cast<int>(xs.size())) throw Error("sample has too few variables for polynomial");
  if (xs.empty()) xs.push_back(Matrix::Zero(s.N, s.N));
  return evaluate(f, xs);
}

std::vector<double> hermitian_eigenvalues(const Matrix& h) {
  const Eigen::Index n = h.rows();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  const double re_max = h.real().cwiseAbs().maxCoeff();
  const double im_max = h.imag().cwiseAbs().maxCoeff();
  if (im_max == 0.0) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h.real(), Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(es.eigenvalues()(i));
  } else if (re_max == 0.0 && n > 256) {
    // h = iA with A real antisymmetric: the spectrum is ±σ with σ² the
    // eigenvalues of AᵀA, each appearing twice (plus one zero when n is odd).
    const RealMatrix a = h.imag();
    const RealMatrix ata = a.transpose() * a;
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(ata, Eigen::EigenvaluesOnly);
    const auto& mu = es.eigenvalues();
    Eigen::Index r = 0;
    if (n % 2 == 1) {
      out.push_back(0.0);
      r = 1;
    }
    for (; r + 1 < n; r += 2) {
      const double sigma = std::sqrt(std::max(0.0, 0.5 * (mu(r) + mu(r + 1))));
      out.push_back(sigma);
      out.push_back(-sigma);
    }
    std::sort(out.begin(), out.end());
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(es.eigenvalues()(i));
  }
  return out;
}

EmpiricalSpectrum empirical_spectrum(const MatrixPolynomial& f, const WignerSample& s) {
  EmpiricalSpectrum sp;
  sp.N = s.N;
  sp.n = f.size();
  sp.eigenvalues = hermitian_eigenvalues(hermitian_part(evaluate_scaled(f, s)));
  return sp;
}

cplx stieltjes_from_eigenvalues(const std::vector<double>& eigenvalues, cplx z) {
  cplx acc = 0.0;
  for (double l : eigenvalues) acc += 1.0 / (l - z);
  return acc / static_cast<double>(eigenvalues.size());
}

EmpiricalStieltjes empirical_stieltjes(const MatrixPolynomial& f, const WignerSample& s, cplx z,
                                       const SaltDesign* design, double tolerance) {
  if (!(z.imag() > 0.0)) throw Error("empirical_stieltjes: Im z must be positive");
  EmpiricalStieltjes out;
  out.value = stieltjes_from_eigenvalues(empirical_spectrum(f, s).eigenvalues, z);
  if (design) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(s.N));
    std::vector<Matrix> xs;
    for (const auto& x : s.xi) xs.push_back(scale * x);
    while (static_cast<int>(xs.size()) < design->m) xs.push_back(Matrix::Zero(s.N, s.N));
    const Matrix pencil =
        design->evaluate_pencil(xs) - kron(design->theta + z * design->e, Matrix::Identity(s.N, s.N));
    const Matrix inv = checked_inverse(pencil, "linearized resolvent");
    const int k = design->n * s.N;
    out.linearized = inv.topLeftCorner(k, k).trace() / static_cast<double>(k);
    out.discrepancy = std::abs(*out.linearized - out.value);
    if (out.discrepancy > tolerance)
      throw Error("empirical_stieltjes: linearized and direct values disagree by " + std::to_string(out.discrepancy));
  }
  return out;
}

}  // namespace freespec
