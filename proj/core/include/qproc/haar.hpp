// Haar-random unitaries and Monte Carlo estimators built on them.
#pragma once

#include "qproc/qmath.hpp"
#include "qproc/rng.hpp"

namespace qproc {

class UnitaryMatrix {
 public:
  /// Validates U U^dagger = I to 1e-9 in Frobenius norm.
  explicit UnitaryMatrix(ComplexMatrix m);
  static UnitaryMatrix trusted(ComplexMatrix m);

  const ComplexMatrix& matrix() const { return m_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }

 private:
  struct TrustedTag {};
  UnitaryMatrix(ComplexMatrix m, TrustedTag) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

double unitarity_defect(const ComplexMatrix& m);

/// d x d matrix of i.i.d. complex normals with E|z|^2 = 1, filled row by row.
ComplexMatrix ginibre(std::size_t d, RngStream& rng);

/// QR of a Ginibre draw with the phases of diag(R) moved into Q.
UnitaryMatrix haar_unitary(std::size_t d, RngStream& rng);

struct TwirlEstimate {
  ComplexMatrix mean;
  /// Entrywise standard error of the complex mean, sqrt(var(re) + var(im)) / sqrt(N).
  Eigen::MatrixXd std_error;
};

/// Sample mean of U^{(x)n} x U^{dagger (x)n} over Haar U.
TwirlEstimate mc_twirl(std::size_t n, const ComplexMatrix& x, std::size_t samples,
                       RngStream& rng);

/// Integer d with d^n == dim, or an argument error.
std::size_t nth_root_dim(std::size_t dim, std::size_t n);

/// Mean purity of tr_B U|0><0|U^dagger for Haar U on dA * dB.
MeanEstimate reduced_purity_experiment(std::size_t dA, std::size_t dB, std::size_t samples,
                                       RngStream& rng);

struct TypicalityResult {
  MeanEstimate distance;   // D(rho_S, Omega_S)
  double bound = 0.0;      // 0.5 * sqrt(dS * tr Omega_E^2)
  double omega_e_purity = 0.0;
};

/// Haar-random pure states on span of the first dR basis vectors of E (x) S
/// (E slowest), compared with the canonical state tr_E(1_R) / dR.
TypicalityResult canonical_typicality_experiment(std::size_t dS, std::size_t dE,
                                                 std::size_t dR, std::size_t samples,
                                                 RngStream& rng);

/// 2 exp(-d delta^2 / (9 pi^3 L^2)).
double levy_tail(double d, double delta, double lipschitz);
/// 2 exp(-2 dAB delta^2 / (9 pi^3)), the bipartite-entanglement variant.
double levy_tail_entanglement(double dAB, double delta);

}  // namespace qproc
