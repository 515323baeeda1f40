// Exact Haar averages for processes driven by one repeated interaction U.
//
// The initial state lives on E (x) S with E the slower index. Averages are
// finite sums over pairs of permutations weighted by Weingarten values, with
// the index contractions counted by delta_degree.
#pragma once

#include "qproc/qmath.hpp"

namespace qproc {

struct AverageProcess {
  /// Unit-trace average Choi state on [S_out, A_k, B_k, ..., A_1, B_1].
  ComplexMatrix choi;
  std::size_t k = 0;
  std::size_t dS = 0;
  std::size_t dE = 0;
  /// Trace of the same average when ancilla pairs are left unnormalized
  /// (dS^k); multiply `choi` by it to change convention.
  double unnormalized_trace = 1.0;
};

/// E[Upsilon] for U_0 = ... = U_k = U Haar on dS * dE. Needs k <= 2 and
/// dS * dE >= k + 1. `rho` is the initial state on E (x) S.
AverageProcess avg_process_constant(std::size_t k, std::size_t dS, std::size_t dE,
                                    const DensityMatrix& rho);

/// E[tr Upsilon^2] (unit trace) for the same ensemble. Needs k <= 2 and
/// dS * dE >= 2k + 2. The sum is bilinear in `rho`, so mixed inputs are
/// accepted, although the process purity is usually quoted for pure ones.
double avg_purity_constant(std::size_t k, std::size_t dS, std::size_t dE,
                           const DensityMatrix& rho);

}  // namespace qproc
