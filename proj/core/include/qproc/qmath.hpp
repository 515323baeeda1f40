// Dense complex linear algebra and quantum-state primitives.
//
// Storage is row-major. For a multipartite operator the leftmost subsystem
// label is the slowest-varying index, so kron(a, b) and the subsystem
// permutations below agree on index layout.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qproc {

using cplx = std::complex<double>;
using ComplexMatrix =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
using RealVector = Eigen::VectorXd;

/// Absolute tolerance for Hermiticity, positivity, trace and norm checks.
inline constexpr double kTolerance = 1e-9;
/// Eigenvalues below this are treated as zero in entropies and ranks.
inline constexpr double kEigenCutoff = 1e-12;

/// Raised when a request falls outside the sizes or parameter ranges an
/// operation is built for (memory guards, unsupported moment orders).
class UnsupportedRegime : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SubsystemLayout {
 public:
  SubsystemLayout() = default;
  SubsystemLayout(std::vector<std::string> labels, std::vector<std::size_t> dims);

  static SubsystemLayout single(std::size_t dim, std::string label = "0");

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t count() const { return dims_.size(); }
  std::size_t dimension() const { return dimension_; }

  bool contains(std::string_view label) const;
  std::size_t position(std::string_view label) const;
  std::size_t dim_of(std::string_view label) const { return dims_[position(label)]; }

  /// Sub-layout made of the given positions, in the given order.
  SubsystemLayout select(std::span<const std::size_t> positions) const;

  bool operator==(const SubsystemLayout&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> dims_;
  std::size_t dimension_ = 1;
};

class PureState {
 public:
  PureState(ComplexVector amplitudes, SubsystemLayout layout);
  explicit PureState(ComplexVector amplitudes);

  static PureState basis(SubsystemLayout layout, std::size_t index);

  const ComplexVector& amplitudes() const { return amplitudes_; }
  const SubsystemLayout& layout() const { return layout_; }
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }

 private:
  ComplexVector amplitudes_;
  SubsystemLayout layout_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity, positivity and unit trace.
  DensityMatrix(ComplexMatrix matrix, SubsystemLayout layout);
  explicit DensityMatrix(ComplexMatrix matrix);

  /// Skips validation. For matrices that are states by construction.
  static DensityMatrix trusted(ComplexMatrix matrix, SubsystemLayout layout);
  static DensityMatrix from_pure(const PureState& psi);
  static DensityMatrix maximally_mixed(std::size_t dim);

  const ComplexMatrix& matrix() const { return matrix_; }
  const SubsystemLayout& layout() const { return layout_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }

 private:
  struct TrustedTag {};
  DensityMatrix(ComplexMatrix matrix, SubsystemLayout layout, TrustedTag);

  ComplexMatrix matrix_;
  SubsystemLayout layout_;
};

class Povm {
 public:
  explicit Povm(std::vector<ComplexMatrix> elements);
  const std::vector<ComplexMatrix>& elements() const { return elements_; }
  std::size_t dim() const;

 private:
  std::vector<ComplexMatrix> elements_;
};

enum class Schatten { one, two, inf };

struct HermitianEigen {
  RealVector values;     // ascending
  ComplexMatrix vectors; // columns are eigenvectors
};

ComplexMatrix identity(std::size_t dim);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

bool is_hermitian(const ComplexMatrix& m, double tol = kTolerance);
double hermiticity_defect(const ComplexMatrix& m);

/// Partial trace keeping the subsystems at `keep` (any order; the result
/// follows layout order).
ComplexMatrix partial_trace(const ComplexMatrix& m,
                            std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep);
ComplexMatrix partial_trace(const ComplexMatrix& m, const SubsystemLayout& layout,
                            const std::vector<std::string>& keep);
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<std::string>& keep);

/// Reorders tensor factors. `order[p]` is the old position placed at new
/// position p.
ComplexVector permute_vector(const ComplexVector& v, std::span<const std::size_t> dims,
                             std::span<const std::size_t> order);
ComplexMatrix permute_operator(const ComplexMatrix& m,
                               std::span<const std::size_t> dims,
                               std::span<const std::size_t> order);

/// New state whose layout lists the labels in `order`.
PureState permute_subsystems(const PureState& s, const std::vector<std::string>& order);

double schatten_norm(const ComplexMatrix& m, Schatten p);
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
/// Half the trace norm of a Hermitian difference, without state validation.
double half_trace_norm(const ComplexMatrix& hermitian);
double povm_distance(const DensityMatrix& rho, const DensityMatrix& sigma,
                     const Povm& povm);
double purity(const DensityMatrix& rho);
double purity(const ComplexMatrix& rho);

/// Normalized: |Psi><Psi| with |Psi> = d^{-1/2} sum_i |ii>. Unnormalized:
/// sum_ij |ii><jj| with trace d.
ComplexMatrix max_entangled(std::size_t d, bool normalized);
DensityMatrix max_entangled_state(std::size_t d);
/// SWAP on C^d (x) C^d: |ij> -> |ji>.
ComplexMatrix swap_operator(std::size_t d);

double vn_entropy(const DensityMatrix& rho);
double vn_entropy(const ComplexMatrix& hermitian);
/// Returns +infinity when the support of rho is not inside that of sigma.
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

HermitianEigen eig_hermitian(const ComplexMatrix& m);
/// Eigenvalues of a matrix assumed Hermitian (lower triangle used).
RealVector hermitian_eigenvalues(const ComplexMatrix& m);

}  // namespace qproc
