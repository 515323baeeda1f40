// Process tensors: sampling, Markov construction, contraction with
// operations, marginals and coarse-graining.
//
// Leg layout of a k-step process on a dS-dimensional system:
//   [S_out, A_k, B_k, ..., A_1, B_1]
// A_i holds the system output at time i-1 (A_1 is the initial state) and B_i
// the input fed into step i. Step i therefore maps B_i to A_{i+1}, with
// A_{k+1} read as S_out. The Choi state is normalized to unit trace.
#pragma once

#include "qproc/channels.hpp"
#include "qproc/qmath.hpp"
#include "qproc/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qproc {

enum class Interaction { random, constant };

std::string to_string(Interaction i);
Interaction interaction_from_string(const std::string& s);

SubsystemLayout process_leg_layout(std::size_t dS, std::size_t k);

class ProcessTensor {
 public:
  /// Validates shape, Hermiticity, PSD, unit trace and causality.
  ProcessTensor(ComplexMatrix choi, std::size_t dS, std::size_t k);
  static ProcessTensor trusted(ComplexMatrix choi, std::size_t dS, std::size_t k);

  const ComplexMatrix& choi() const { return choi_; }
  std::size_t dS() const { return dS_; }
  std::size_t k() const { return k_; }
  std::size_t dim() const { return static_cast<std::size_t>(choi_.rows()); }
  SubsystemLayout leg_layout() const { return process_leg_layout(dS_, k_); }

  /// Largest Frobenius defect of the nested marginals
  /// tr_{out_j} Y_j = 1_{B_j}/dS (x) Y_{j-1}, plus |tr Y_0 - 1|.
  double causality_residual() const;

 private:
  struct TrustedTag {};
  ProcessTensor(ComplexMatrix choi, std::size_t dS, std::size_t k, TrustedTag);
  ComplexMatrix choi_;
  std::size_t dS_ = 1;
  std::size_t k_ = 0;
};

inline constexpr std::size_t kDefaultVectorCap = std::size_t{1} << 24;

struct ProcessConfig {
  std::size_t dS = 2;
  std::size_t dE = 2;
  std::size_t k = 1;
  Interaction interaction = Interaction::random;
  /// Initial pure state on E (x) S (E slower); |0> when empty.
  std::optional<PureState> fiducial;
  RngStream seed{0, 0};
  std::size_t max_vector_length = kDefaultVectorCap;
};

/// Draws U_0..U_k (independent, or one shared U) and builds the process.
ProcessTensor sample_process(const ProcessConfig& cfg);
ProcessTensor sample_process(const ProcessConfig& cfg, RngStream& rng);

/// Process generated by explicit unitaries U_0..U_k on E (x) S (E slower).
ProcessTensor process_from_unitaries(const std::vector<ComplexMatrix>& unitaries,
                                     std::size_t dS, std::size_t dE,
                                     const std::optional<PureState>& fiducial = std::nullopt,
                                     std::size_t max_vector_length = kDefaultVectorCap);

/// rho0 on A_1 and step i's Choi on (A_{i+1}, B_i); steps must be TP.
ProcessTensor markov_process(const DensityMatrix& rho0, const std::vector<ChoiMatrix>& steps);

/// Operations applied between the steps of a process.
struct OperationSequence {
  /// k maps, maps[i-1] applied before step i. They act on S, or on S (x) Gamma
  /// (S slower) when `ancilla` is set.
  std::vector<KrausMap> maps;
  std::optional<DensityMatrix> ancilla;
  /// Precontracted tester on [A_k, B_k, ..., A_1, B_1], used instead of maps.
  std::optional<ComplexMatrix> tester;
  /// Optional POVM element on S applied to the output.
  std::optional<ComplexMatrix> final_effect;
};

/// Tester of independent maps: product of Choi matrices with input on A_i
/// and output on B_i.
ComplexMatrix tester_from_maps(const std::vector<KrausMap>& maps, std::size_t dS);
/// Tester of maps sharing an ancilla Gamma prepared in gamma and traced at the end.
ComplexMatrix tester_with_ancilla(const std::vector<KrausMap>& maps, const DensityMatrix& gamma,
                                  std::size_t dS);

struct ContractResult {
  ComplexMatrix output;               // on S, trace one for TP operations
  std::optional<double> probability;  // tr(E output) when a final effect is given
};

/// dS^k tr_in[Y (1_out (x) Lambda^T)].
ContractResult contract(const ProcessTensor& p, const OperationSequence& ops);

/// Unnormalized TP Choi of step `step` in [1, k], on (output, input).
ChoiMatrix marginal(const ProcessTensor& p, std::size_t step);
/// Reduced state on A_1.
DensityMatrix initial_state(const ProcessTensor& p);
ProcessTensor product_of_marginals(const ProcessTensor& p);

/// Contracts the identity operation into each dropped step.
ProcessTensor coarse_grain(const ProcessTensor& p, const std::set<std::size_t>& drop);

// ---------------------------------------------------------------- archives

struct ChoiDumpHeader {
  std::uint64_t dS = 0;
  std::uint64_t dE = 0;
  std::uint64_t k = 0;
  std::uint64_t seed = 0;
  std::string mode;
};

/// Magic "QPCHOI1\0", five header fields (mode as length + bytes), the
/// dimension, then row-major (re, im) doubles. Native little-endian.
void write_choi_binary(std::ostream& os, const ComplexMatrix& choi, const ChoiDumpHeader& h);
std::pair<ChoiDumpHeader, ComplexMatrix> read_choi_binary(std::istream& is);
/// "# key=value" header lines followed by "row,col,re,im" rows.
void write_choi_csv(std::ostream& os, const ComplexMatrix& choi, const ChoiDumpHeader& h);

}  // namespace qproc
