// Non-Markovianity measures of process tensors and the typicality bounds
// for processes generated by Haar-random interactions.
//
// Entropies are in bits. All trace-distance measures here are upper bounds
// on the minimum over Markov processes: they use a fixed Markov competitor.
#pragma once

#include "qproc/process.hpp"

#include <string>
#include <utility>

namespace qproc {

struct BoundParams {
  std::size_t dS = 2;
  std::size_t dE = 2;
  std::size_t k = 1;
  Interaction interaction = Interaction::random;

  void validate() const;
};

/// Trace distance to the maximally mixed process 1/dS^(2k+1).
double n1_maxmixed(const ProcessTensor& p);
/// Trace distance to the product of the process's own marginals.
double n1_marginals(const ProcessTensor& p);
/// (1/2) sqrt(tr Y^2 - dS^-(2k+1)), clipped at zero.
double n2_maxmixed(const ProcessTensor& p);
/// S(Y || product of marginals), via the marginal-entropy identity.
double n_rel(const ProcessTensor& p);

enum class IntervalProvenance { exact_n1, n1_upper_bound };

/// Interval for the generalized diamond measure implied by
/// dS^-(2k+1) N_diamond <= N_1 <= N_diamond.
struct DiamondInterval {
  double lower = 0.0;
  double upper = 0.0;
  /// The lower endpoint is n1 only when n1 is exact; otherwise 0.
  IntervalProvenance lower_provenance = IntervalProvenance::n1_upper_bound;
  /// The upper endpoint inherits the provenance of the input.
  IntervalProvenance upper_provenance = IntervalProvenance::n1_upper_bound;
};

DiamondInterval diamond_interval(double n1, std::size_t dS, std::size_t k, bool n1_is_exact = false);

struct NonMarkovReport {
  double n1_maxmixed = 0.0;
  double n1_marginals = 0.0;
  double n2_maxmixed = 0.0;
  double n_rel = 0.0;
  DiamondInterval diamond_interval;
};

NonMarkovReport nonmarkov_report(const ProcessTensor& p);

/// Closed-form E[tr Y^2] for independent Haar interactions at each step.
double avg_purity_random(const BoundParams& params);
/// E[tr Y^2] - dS^-(2k+1) for the random ensemble, without cancellation.
double avg_purity_random_excess(const BoundParams& params);
/// Average purity for either ensemble; the constant one starts from |0> on
/// E (x) S and needs k <= 2.
double avg_purity(const BoundParams& params);

struct BoundResult {
  double value = 0.0;
  /// 1 when dE < dS^(2k+1), 2 otherwise.
  int branch = 0;
  double avg_purity = 0.0;
};

/// Upper bound on the average of n1_maxmixed over the ensemble.
BoundResult bound_Bk(const BoundParams& params);
/// Same bound for a given average purity.
BoundResult bound_Bk_from_purity(std::size_t dS, std::size_t dE, std::size_t k, double avg_purity);

/// Exponent constant C with c = 1/4 (constant) or (k+1)/4 (random).
double concentration_constant(const BoundParams& params);
/// exp(-C delta^2).
double concentration_tail(const BoundParams& params, double delta);

}  // namespace qproc
