// Quantum operations in operator-sum and Choi form.
//
// Choi convention: C = sum_ij Phi(|i><j|) (x) |i><j| with the output factor
// first (slower index), i.e. (Phi (x) id) applied to the unnormalized
// sum_ij |ii><jj|. Then Phi(rho) = tr_in[C (1_out (x) rho^T)], transposes in
// the computational basis.
#pragma once

#include "qproc/haar.hpp"
#include "qproc/qmath.hpp"

#include <utility>
#include <vector>

namespace qproc {

/// Operators K_mu (d_out x d_in) with real weights a_mu, acting as
/// sum_mu a_mu K_mu rho K_mu^dagger. The unweighted set must satisfy
/// sum K^dagger K <= 1.
class KrausMap {
 public:
  explicit KrausMap(std::vector<ComplexMatrix> operators, std::vector<double> weights = {});

  const std::vector<ComplexMatrix>& operators() const { return ops_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t d_in() const { return static_cast<std::size_t>(ops_.front().cols()); }
  std::size_t d_out() const { return static_cast<std::size_t>(ops_.front().rows()); }
  /// sum K^dagger K = 1 within 1e-9 and all weights equal to one.
  bool is_tp() const { return tp_; }
  bool unit_weights() const { return unit_weights_; }

 private:
  std::vector<ComplexMatrix> ops_;
  std::vector<double> weights_;
  bool tp_ = false;
  bool unit_weights_ = true;
};

enum class ChoiNormalization { unnormalized, unit_trace };

class ChoiMatrix {
 public:
  ChoiMatrix(ComplexMatrix matrix, std::size_t d_in, std::size_t d_out,
             ChoiNormalization normalization);

  const ComplexMatrix& matrix() const { return m_; }
  std::size_t d_in() const { return d_in_; }
  std::size_t d_out() const { return d_out_; }
  ChoiNormalization normalization() const { return norm_; }

  /// Converts by the factor d_in (exact for trace-preserving maps).
  ChoiMatrix to(ChoiNormalization target) const;
  bool is_cp(double tol = kTolerance) const;
  /// tr_out of the unnormalized form equals 1_in.
  bool is_tp(double tol = kTolerance) const;

 private:
  ComplexMatrix m_;
  std::size_t d_in_, d_out_;
  ChoiNormalization norm_;
};

class Instrument {
 public:
  explicit Instrument(std::vector<KrausMap> branches);
  const std::vector<KrausMap>& branches() const { return branches_; }

 private:
  std::vector<KrausMap> branches_;
};

ComplexMatrix apply_kraus(const KrausMap& m, const ComplexMatrix& rho);
ComplexMatrix apply_kraus(const KrausMap& m, const DensityMatrix& rho);

/// Unnormalized Choi matrix of the map.
ChoiMatrix choi_of(const KrausMap& m);
ChoiMatrix choi_of(const Instrument& inst, std::size_t branch);

/// Requires the unnormalized convention.
ComplexMatrix apply_via_choi(const ChoiMatrix& c, const ComplexMatrix& rho);
ComplexMatrix apply_via_choi(const ChoiMatrix& c, const DensityMatrix& rho);

/// One operator per eigenvalue above 1e-12; argument error if c is not PSD.
KrausMap kraus_from_choi(const ChoiMatrix& c);

/// tr_env[U (rho (x) beta) U^dagger] with the system factor first.
ComplexMatrix dilate_apply(const UnitaryMatrix& u, const DensityMatrix& beta,
                           const DensityMatrix& rho);

struct StandardChannel {
  enum class Kind { identity, unitary, depolarizing, dephasing };
  Kind kind = Kind::identity;
  std::size_t d = 0;       // identity, depolarizing
  ComplexMatrix matrix;    // unitary U or Hermitian H
  double q = 1.0;          // depolarizing: q rho + (1 - q) tr(rho) 1/d
};

KrausMap standard_channel(const StandardChannel& spec);
KrausMap identity_channel(std::size_t d);
KrausMap unitary_channel(const ComplexMatrix& u);
KrausMap depolarizing_channel(std::size_t d, double q);
KrausMap dephasing_channel(const ComplexMatrix& h);

/// Eigenvalues of a Hermitian matrix grouped within `merge_tol`, each with
/// its spectral projector, in increasing order.
std::vector<std::pair<double, ComplexMatrix>> spectral_projectors(const ComplexMatrix& h,
                                                                  double merge_tol = kEigenCutoff);

/// Matrix S with vec(Phi(X)) = S vec(X) for row-major vec, i.e.
/// sum a K (x) conj(K).
ComplexMatrix superoperator(const KrausMap& m);
/// Superoperator of X -> A X B.
ComplexMatrix sandwich_superoperator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector vectorize(const ComplexMatrix& x);
ComplexMatrix unvectorize(const ComplexVector& v, std::size_t rows, std::size_t cols);

}  // namespace qproc
