// Large-deviation bounds for processes built from approximate unitary
// t-designs, and the random diagonal circuit (RDC) ensemble.
#pragma once

#include "qproc/haar.hpp"
#include "qproc/rng.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace qproc {

struct DesignSpec {
  std::size_t t = 1;
  double eps = 0.0;

  void validate() const;
};

struct LdbParams {
  std::size_t dS = 2;
  /// Stored as a double so environments far beyond 2^53 can be scanned.
  double dE = 2.0;
  std::size_t k = 1;
  double delta = 0.1;
  /// Real exponent in (0, t/4]; ignored by optimize_m.
  double m = 1.0;
};

/// (dSE^4 dS^(2k) + dS^-(2k+1)) / 4.
double eta(double dS, double dE, std::size_t k);
double log_eta(double dS, double dE, std::size_t k);

/// dSE (k+1)/16 ((dS-1)/(dS^(k+1)-1))^2; dS = 1 is rejected.
double lipschitz_C(double dS, double dE, std::size_t k);

/// Natural log of the bound, evaluated with log-sum-exp.
double ldb_log_bound(const LdbParams& p, const DesignSpec& spec);
/// exp(ldb_log_bound); may be +inf for tiny environments.
double ldb_bound(const LdbParams& p, const DesignSpec& spec);

struct MOptimum {
  double m = 0.0;
  double log_bound = 0.0;
  double bound = 0.0;
};

/// Minimizes over m in (0, t/4]: 200-point grid, then golden-section search
/// on the log-bound around the best grid point. Ties go to the smaller m.
MOptimum optimize_m(const LdbParams& p, const DesignSpec& spec);

/// t - log2(eps)/n.
double required_depth(std::size_t t, double eps, std::size_t n);

struct RdcSchedule {
  std::size_t n_qubits = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  /// All pairs i < j in lexicographic order.
  static RdcSchedule all_pairs(std::size_t n);
  void validate() const;
};

/// (diag(1, e^{i phi1}) (x) diag(1, e^{i phi2})) diag(1, 1, 1, e^{i theta})
/// on qubits (i, j). Qubit 0 is the most significant bit.
struct RdcGate {
  std::size_t i = 0, j = 0;
  double phi1 = 0.0, phi2 = 0.0, theta = 0.0;
};

inline constexpr std::size_t kMaxRdcQubits = 12;
inline constexpr std::size_t kMaxCircuitQubits = 10;

/// Phases phi from {2 pi m/(t+1)} and theta from {2 pi m/(floor(t/2)+1)},
/// drawn per pair in schedule order as phi1, phi2, theta.
std::vector<RdcGate> sample_rdc_gates(const RdcSchedule& sched, std::size_t t, RngStream& rng);
/// Diagonal of the product of the gates.
ComplexVector rdc_diagonal(std::size_t n_qubits, const std::vector<RdcGate>& gates);
UnitaryMatrix rdc_layer(const RdcSchedule& sched, std::size_t t, RngStream& rng);

/// (RDC H)^(2 ell) RDC with fresh layers drawn right to left.
UnitaryMatrix build_W(std::size_t n, std::size_t t, std::size_t ell, const RdcSchedule& sched,
                      RngStream& rng);

using UnitarySampler = std::function<ComplexMatrix(RngStream&)>;

struct MomentError {
  /// Largest |sampled - Haar| over the probe operators' entries.
  double max_deviation = 0.0;
  /// Standard error of the entry attaining the maximum.
  double std_error = 0.0;
};

/// Sampled n-fold twirl of fixed probes against analytic_twirl, n in {1, 2}.
MomentError design_moment_error(const UnitarySampler& sampler, std::size_t n_moment, std::size_t d,
                                std::size_t samples, RngStream& rng);

}  // namespace qproc
