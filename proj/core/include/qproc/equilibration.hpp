// Equilibration of closed dynamics observed with finite temporal resolution.
//
// A fuzzy clock is a waiting-time density P_T. Averaging e^{-iHt} rho e^{iHt}
// over it gives the partial dephasing sum G_nm P_n rho P_m, which tends to
// the full dephasing sum P_n rho P_n as T grows.
#pragma once

#include "qproc/channels.hpp"
#include "qproc/qmath.hpp"

#include <limits>
#include <vector>

namespace qproc {

class Hamiltonian {
 public:
  /// Validates orthogonality, completeness and strictly increasing energies.
  Hamiltonian(std::vector<double> energies, std::vector<ComplexMatrix> projectors);
  /// Spectral decomposition with levels closer than merge_tol merged.
  static Hamiltonian from_matrix(const ComplexMatrix& h, double merge_tol = kEigenCutoff);

  const std::vector<double>& energies() const { return energies_; }
  const std::vector<ComplexMatrix>& projectors() const { return projectors_; }
  std::size_t levels() const { return energies_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(basis_.rows()); }
  ComplexMatrix matrix() const;
  /// Smallest spacing between distinct levels; +inf with one level.
  double min_gap() const;

  /// Orthonormal eigenbasis (columns) and the level of each column.
  const ComplexMatrix& basis() const { return basis_; }
  const std::vector<std::size_t>& level_of() const { return level_of_; }

 private:
  std::vector<double> energies_;
  std::vector<ComplexMatrix> projectors_;
  ComplexMatrix basis_;
  std::vector<std::size_t> level_of_;
};

class FuzzyClock {
 public:
  enum class Kind { uniform, half_normal, numeric, sharp };

  /// Flat density of width T on [tau - T/2, tau + T/2].
  static FuzzyClock uniform(double T, double tau);
  static FuzzyClock uniform(double T) { return uniform(T, T / 2.0); }
  /// (2/sqrt(pi T)) exp(-t^2/T) on t >= 0; the mean is sqrt(T/pi).
  static FuzzyClock half_normal(double T);
  /// Piecewise-linear density through (times, pdf); must integrate to one
  /// within 1e-6. T is kept as a label.
  static FuzzyClock numeric(std::vector<double> times, std::vector<double> pdf, double T);
  /// A fixed waiting time tau, with no averaging.
  static FuzzyClock sharp(double tau);

  Kind kind() const { return kind_; }
  double T() const { return T_; }
  double tau() const { return tau_; }

  /// Average of e^{-i omega t} over the density.
  cplx average_phase(double omega) const;

 private:
  FuzzyClock() = default;
  Kind kind_ = Kind::sharp;
  double T_ = 0.0;
  double tau_ = 0.0;
  std::vector<double> times_, pdf_;
};

ComplexMatrix dephase(const ComplexMatrix& rho, const Hamiltonian& h);
DensityMatrix dephase(const DensityMatrix& rho, const Hamiltonian& h);

/// G_nm = E[e^{-i t (E_n - E_m)}] over the clock.
ComplexMatrix g_factor(const Hamiltonian& h, const FuzzyClock& clock);

ComplexMatrix partial_dephase(const ComplexMatrix& rho, const Hamiltonian& h, const FuzzyClock& clock);
DensityMatrix partial_dephase(const DensityMatrix& rho, const Hamiltonian& h, const FuzzyClock& clock);

/// max_{n != m} |G_nm|; needs at least two levels.
double s_factor(const Hamiltonian& h, const FuzzyClock& clock);

/// 1 / sum_n (tr P_n rho)^2.
double d_eff(const ComplexMatrix& rho, const Hamiltonian& h);
double d_eff(const DensityMatrix& rho, const Hamiltonian& h);

/// Largest number of ordered gaps E_n - E_m (n != m) inside any window [E, E + eps].
std::size_t gap_count(const Hamiltonian& h, double eps);

/// ||A||^2 / d_eff * N(eps) * (1 + 8 log2(levels) / (eps T)); T may be +inf.
double short_bound(const ComplexMatrix& a, const DensityMatrix& rho, const Hamiltonian& h, double eps,
                   double T);
/// (1/2) dS / sqrt(d_eff) * sqrt(N(eps) (1 + 8 log2(levels) / (eps T))).
double short_bound_subsystem(std::size_t dS, const DensityMatrix& rho, const Hamiltonian& h, double eps,
                             double T);

/// Largest singular value of a superoperator in the matrix-unit basis.
double induced_2norm(const ComplexMatrix& superop);

struct MultitimeSetup {
  /// One Hamiltonian on S (x) E shared by all steps, or k + 1 of them with a
  /// common projector set.
  std::vector<Hamiltonian> hamiltonians;
  /// A_0 .. A_k on S (x) Gamma (S slower).
  std::vector<KrausMap> ops;
  /// Initial state on S (x) E (S slower).
  DensityMatrix rho = DensityMatrix::maximally_mixed(1);
  DensityMatrix gamma = DensityMatrix::maximally_mixed(1);
  std::size_t dS = 2;

  std::size_t k() const { return ops.empty() ? 0 : ops.size() - 1; }
};

/// Guard on dS * dE * dGamma for materialized superoperators.
inline constexpr std::size_t kMaxMultitimeDim = 64;

struct MultitimeBound {
  double a_k = 0.0;
  std::vector<double> b;  // B_0 .. B_{k-1}
  std::vector<double> c;  // C_0 .. C_{k-1}
  /// ||A_{k:l+1}|| for l = 0 .. k-1.
  std::vector<double> tail_norms;
  double total = 0.0;
};

MultitimeBound multitime_bound(const MultitimeSetup& setup, const FuzzyClock& clock);

/// |tr[A_k G A_{k-1} ... A_0 G(rho (x) gamma)] - same with D|. Steps with a
/// sharp clock use the fixed evolution on both sides.
double multitime_lhs(const MultitimeSetup& setup, const FuzzyClock& clock);
double multitime_lhs(const MultitimeSetup& setup, const std::vector<FuzzyClock>& clocks);

/// k = 1 with a sharp second interval: |tr[F (G_0 - D)(rho (x) gamma)]| with
/// F = A_0^*(U^*(B)) and B = A_1^*(1).
double single_time_equivalent(const MultitimeSetup& setup, const FuzzyClock& first, double tau1);

}  // namespace qproc
