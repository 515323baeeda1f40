#include "qproc/haar.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qproc {

double unitarity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m * m.adjoint() - identity(static_cast<std::size_t>(m.rows()))).norm();
}

UnitaryMatrix::UnitaryMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (!m_.allFinite()) throw std::invalid_argument("unitary has non-finite entries");
  if (unitarity_defect(m_) > kTolerance) throw std::invalid_argument("matrix is not unitary");
}

UnitaryMatrix UnitaryMatrix::trusted(ComplexMatrix m) {
  return UnitaryMatrix(std::move(m), TrustedTag{});
}

ComplexMatrix ginibre(std::size_t d, RngStream& rng) {
  if (d < 1) throw std::invalid_argument("ginibre: dimension must be >= 1");
  const auto n = static_cast<Eigen::Index>(d);
  ComplexMatrix z(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) z(i, j) = rng.complex_normal();
  return z;
}

UnitaryMatrix haar_unitary(std::size_t d, RngStream& rng) {
  Eigen::MatrixXcd z = ginibre(d, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const cplx rjj = r(j, j);
    const double a = std::abs(rjj);
    if (a > 0.0) q.col(j) *= rjj / a;
  }
  return UnitaryMatrix::trusted(q);
}

std::size_t nth_root_dim(std::size_t dim, std::size_t n) {
  if (n < 1) throw std::invalid_argument("moment order must be >= 1");
  auto d = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(dim), 1.0 / n)));
  for (std::size_t cand : {d - 1, d, d + 1}) {
    if (cand < 1) continue;
    std::size_t p = 1;
    for (std::size_t i = 0; i < n; ++i) p *= cand;
    if (p == dim) return cand;
  }
  throw std::invalid_argument("dimension is not a perfect n-th power");
}

TwirlEstimate mc_twirl(std::size_t n, const ComplexMatrix& x, std::size_t samples,
                       RngStream& rng) {
  if (x.rows() != x.cols()) throw std::invalid_argument("mc_twirl: operator must be square");
  if (samples < 1) throw std::invalid_argument("mc_twirl: need at least one sample");
  const std::size_t d = nth_root_dim(static_cast<std::size_t>(x.rows()), n);
  const auto dim = x.rows();
  ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t s = 0; s < samples; ++s) {
    const ComplexMatrix u = haar_unitary(d, rng).matrix();
    ComplexMatrix un = u;
    for (std::size_t i = 1; i < n; ++i) un = kron(un, u);
    const ComplexMatrix y = un * x * un.adjoint();
    sum += y;
    sum_sq += y.cwiseAbs2();
  }
  const double ns = static_cast<double>(samples);
  TwirlEstimate est;
  est.mean = sum / ns;
  if (samples > 1) {
    Eigen::MatrixXd var = (sum_sq - ns * est.mean.cwiseAbs2()) / (ns - 1.0);
    est.std_error = (var.cwiseMax(0.0) / ns).cwiseSqrt();
  } else {
    est.std_error = Eigen::MatrixXd::Zero(dim, dim);
  }
  return est;
}

MeanEstimate reduced_purity_experiment(std::size_t dA, std::size_t dB, std::size_t samples,
                                       RngStream& rng) {
  if (samples < 2) throw std::invalid_argument("reduced_purity_experiment: need >= 2 samples");
  if (dA < 1 || dB < 1) throw std::invalid_argument("dimensions must be >= 1");
  std::vector<double> values;
  values.reserve(samples);
  const auto a = static_cast<Eigen::Index>(dA);
  const auto b = static_cast<Eigen::Index>(dB);
  for (std::size_t s = 0; s < samples; ++s) {
    const ComplexMatrix u = haar_unitary(dA * dB, rng).matrix();
    // Column 0 of U is U|0>; reshape with A as the row index.
    ComplexMatrix m(a, b);
    for (Eigen::Index i = 0; i < a; ++i)
      for (Eigen::Index j = 0; j < b; ++j) m(i, j) = u(i * b + j, 0);
    values.push_back(purity(ComplexMatrix(m * m.adjoint())));
  }
  return mean_and_stderr(values);
}

TypicalityResult canonical_typicality_experiment(std::size_t dS, std::size_t dE,
                                                 std::size_t dR, std::size_t samples,
                                                 RngStream& rng) {
  if (dS < 1 || dE < 1) throw std::invalid_argument("dimensions must be >= 1");
  if (dR < 1 || dR > dS * dE) throw std::invalid_argument("restriction dimension out of range");
  if (samples < 2) throw std::invalid_argument("canonical_typicality_experiment: need >= 2 samples");

  const std::vector<std::size_t> dims{dE, dS};
  const std::vector<std::size_t> keep_s{1};
  const std::vector<std::size_t> keep_e{0};
  const auto total = static_cast<Eigen::Index>(dS * dE);
  ComplexMatrix proj = ComplexMatrix::Zero(total, total);
  for (std::size_t i = 0; i < dR; ++i)
    proj(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0 / static_cast<double>(dR);
  const ComplexMatrix omega_s = partial_trace(proj, dims, keep_s);
  const ComplexMatrix omega_e = partial_trace(proj, dims, keep_e);

  TypicalityResult res;
  res.omega_e_purity = purity(omega_e);
  res.bound = 0.5 * std::sqrt(static_cast<double>(dS) * res.omega_e_purity);

  std::vector<double> values;
  values.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    const ComplexMatrix u = haar_unitary(dR, rng).matrix();
    ComplexVector psi = ComplexVector::Zero(total);
    psi.head(static_cast<Eigen::Index>(dR)) = u.col(0);
    const ComplexMatrix rho = psi * psi.adjoint();
    const ComplexMatrix rho_s = partial_trace(rho, dims, keep_s);
    values.push_back(half_trace_norm(rho_s - omega_s));
  }
  res.distance = mean_and_stderr(values);
  return res;
}

double levy_tail(double d, double delta, double lipschitz) {
  if (!(delta > 0.0) || !(lipschitz > 0.0) || !(d > 0.0))
    throw std::invalid_argument("levy_tail: parameters must be positive");
  const double c = 9.0 * std::pow(std::numbers::pi, 3);
  return 2.0 * std::exp(-d * delta * delta / (c * lipschitz * lipschitz));
}

double levy_tail_entanglement(double dAB, double delta) {
  if (!(delta > 0.0) || !(dAB > 0.0))
    throw std::invalid_argument("levy_tail_entanglement: parameters must be positive");
  const double c = 9.0 * std::pow(std::numbers::pi, 3);
  return 2.0 * std::exp(-2.0 * dAB * delta * delta / c);
}

}  // namespace qproc
