#include "qproc/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace qproc {

namespace {

std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

std::vector<std::size_t> strides_of(std::span<const std::size_t> dims) {
  std::vector<std::size_t> strides(dims.size(), 1);
  for (std::size_t p = dims.size(); p-- > 1;) strides[p - 1] = strides[p] * dims[p];
  return strides;
}

void check_permutation(std::span<const std::size_t> order, std::size_t n) {
  if (order.size() != n) throw std::invalid_argument("permutation has wrong length");
  std::vector<bool> seen(n, false);
  for (auto p : order) {
    if (p >= n || seen[p]) throw std::invalid_argument("order is not a bijection");
    seen[p] = true;
  }
}

// Maps each old flat index to its flat index after reordering factors.
std::vector<std::size_t> permuted_indices(std::span<const std::size_t> dims,
                                          std::span<const std::size_t> order) {
  check_permutation(order, dims.size());
  const std::size_t n = dims.size();
  std::vector<std::size_t> new_dims(n);
  for (std::size_t p = 0; p < n; ++p) new_dims[p] = dims[order[p]];
  const auto new_strides = strides_of(new_dims);
  // stride in the new layout of each old position
  std::vector<std::size_t> target_stride(n);
  for (std::size_t p = 0; p < n; ++p) target_stride[order[p]] = new_strides[p];

  const std::size_t total = product(dims);
  std::vector<std::size_t> map(total);
  std::vector<std::size_t> digit(n, 0);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t j = 0;
    for (std::size_t p = 0; p < n; ++p) j += digit[p] * target_stride[p];
    map[i] = j;
    for (std::size_t p = n; p-- > 0;) {
      if (++digit[p] < dims[p]) break;
      digit[p] = 0;
    }
  }
  return map;
}

void check_state_matrix(const ComplexMatrix& m, std::size_t expected_dim) {
  if (m.rows() != m.cols()) throw std::invalid_argument("density matrix must be square");
  if (static_cast<std::size_t>(m.rows()) != expected_dim)
    throw std::invalid_argument("density matrix dimension does not match layout");
  if (!m.allFinite()) throw std::invalid_argument("density matrix has non-finite entries");
  if (hermiticity_defect(m) > kTolerance)
    throw std::invalid_argument("density matrix is not Hermitian");
  const cplx tr = m.trace();
  if (std::abs(tr - cplx(1.0, 0.0)) > kTolerance)
    throw std::invalid_argument("density matrix trace differs from one");
  const RealVector ev = hermitian_eigenvalues(m);
  if (ev.size() > 0 && ev.minCoeff() < -kTolerance)
    throw std::invalid_argument("density matrix is not positive semidefinite");
}

}  // namespace

// ---------------------------------------------------------------- layout

SubsystemLayout::SubsystemLayout(std::vector<std::string> labels,
                                 std::vector<std::size_t> dims)
    : labels_(std::move(labels)), dims_(std::move(dims)) {
  if (labels_.size() != dims_.size())
    throw std::invalid_argument("layout labels and dims differ in length");
  std::unordered_set<std::string> unique(labels_.begin(), labels_.end());
  if (unique.size() != labels_.size())
    throw std::invalid_argument("layout labels must be unique");
  for (auto d : dims_)
    if (d < 1) throw std::invalid_argument("layout dimensions must be >= 1");
  dimension_ = product(dims_);
}

SubsystemLayout SubsystemLayout::single(std::size_t dim, std::string label) {
  return SubsystemLayout({std::move(label)}, {dim});
}

bool SubsystemLayout::contains(std::string_view label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t SubsystemLayout::position(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end())
    throw std::invalid_argument("unknown subsystem label: " + std::string(label));
  return static_cast<std::size_t>(it - labels_.begin());
}

SubsystemLayout SubsystemLayout::select(std::span<const std::size_t> positions) const {
  std::vector<std::string> labels;
  std::vector<std::size_t> dims;
  for (auto p : positions) {
    if (p >= dims_.size()) throw std::invalid_argument("layout position out of range");
    labels.push_back(labels_[p]);
    dims.push_back(dims_[p]);
  }
  return SubsystemLayout(std::move(labels), std::move(dims));
}

// ---------------------------------------------------------------- states

PureState::PureState(ComplexVector amplitudes, SubsystemLayout layout)
    : amplitudes_(std::move(amplitudes)), layout_(std::move(layout)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != layout_.dimension())
    throw std::invalid_argument("state length does not match layout");
  if (!amplitudes_.allFinite()) throw std::invalid_argument("state has non-finite amplitudes");
  if (std::abs(amplitudes_.norm() - 1.0) > kTolerance)
    throw std::invalid_argument("state is not normalized");
}

PureState::PureState(ComplexVector amplitudes)
    : PureState(amplitudes, SubsystemLayout::single(static_cast<std::size_t>(amplitudes.size()))) {}

PureState PureState::basis(SubsystemLayout layout, std::size_t index) {
  if (index >= layout.dimension()) throw std::invalid_argument("basis index out of range");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return PureState(std::move(v), std::move(layout));
}

DensityMatrix::DensityMatrix(ComplexMatrix matrix, SubsystemLayout layout)
    : matrix_(std::move(matrix)), layout_(std::move(layout)) {
  check_state_matrix(matrix_, layout_.dimension());
}

DensityMatrix::DensityMatrix(ComplexMatrix matrix)
    : DensityMatrix(matrix, SubsystemLayout::single(static_cast<std::size_t>(matrix.rows()))) {}

DensityMatrix::DensityMatrix(ComplexMatrix matrix, SubsystemLayout layout, TrustedTag)
    : matrix_(std::move(matrix)), layout_(std::move(layout)) {
  if (static_cast<std::size_t>(matrix_.rows()) != layout_.dimension() ||
      matrix_.rows() != matrix_.cols())
    throw std::invalid_argument("density matrix dimension does not match layout");
}

DensityMatrix DensityMatrix::trusted(ComplexMatrix matrix, SubsystemLayout layout) {
  return DensityMatrix(std::move(matrix), std::move(layout), TrustedTag{});
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  ComplexMatrix m = psi.amplitudes() * psi.amplitudes().adjoint();
  return trusted(std::move(m), psi.layout());
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  return trusted(identity(dim) / static_cast<double>(dim), SubsystemLayout::single(dim));
}

Povm::Povm(std::vector<ComplexMatrix> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) throw std::invalid_argument("POVM needs at least one element");
  const auto d = elements_.front().rows();
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (const auto& e : elements_) {
    if (e.rows() != d || e.cols() != d)
      throw std::invalid_argument("POVM elements must share one square shape");
    if (hermiticity_defect(e) > kTolerance)
      throw std::invalid_argument("POVM element is not Hermitian");
    if (hermitian_eigenvalues(e).minCoeff() < -kTolerance)
      throw std::invalid_argument("POVM element is not positive semidefinite");
    sum += e;
  }
  if ((sum - identity(static_cast<std::size_t>(d))).cwiseAbs().maxCoeff() > kTolerance)
    throw std::invalid_argument("POVM elements do not sum to the identity");
}

std::size_t Povm::dim() const { return static_cast<std::size_t>(elements_.front().rows()); }

// ---------------------------------------------------------------- algebra

ComplexMatrix identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return ComplexMatrix::Identity(d, d);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& m, double tol) { return hermiticity_defect(m) <= tol; }

ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep) {
  const std::size_t n = dims.size();
  const std::size_t total = product(dims);
  if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != total)
    throw std::invalid_argument("partial_trace: matrix does not match dimensions");
  std::vector<bool> kept(n, false);
  for (auto p : keep) {
    if (p >= n) throw std::invalid_argument("partial_trace: position out of range");
    if (kept[p]) throw std::invalid_argument("partial_trace: repeated position");
    kept[p] = true;
  }
  std::size_t dk = 1, dt = 1;
  for (std::size_t p = 0; p < n; ++p) (kept[p] ? dk : dt) *= dims[p];

  // Flat index of each full index in the kept and traced factors.
  std::vector<std::size_t> pos(total);
  std::vector<std::size_t> digit(n, 0);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t ki = 0, ti = 0;
    for (std::size_t p = 0; p < n; ++p) {
      if (kept[p])
        ki = ki * dims[p] + digit[p];
      else
        ti = ti * dims[p] + digit[p];
    }
    pos[ti * dk + ki] = i;
    for (std::size_t p = n; p-- > 0;) {
      if (++digit[p] < dims[p]) break;
      digit[p] = 0;
    }
  }

  const auto dke = static_cast<Eigen::Index>(dk);
  ComplexMatrix out = ComplexMatrix::Zero(dke, dke);
  for (std::size_t t = 0; t < dt; ++t) {
    const std::size_t* block = pos.data() + t * dk;
    for (std::size_t a = 0; a < dk; ++a) {
      const auto ra = static_cast<Eigen::Index>(block[a]);
      for (std::size_t b = 0; b < dk; ++b)
        out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
            m(ra, static_cast<Eigen::Index>(block[b]));
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, const SubsystemLayout& layout,
                            const std::vector<std::string>& keep) {
  std::vector<std::size_t> positions;
  for (const auto& label : keep) positions.push_back(layout.position(label));
  return partial_trace(m, layout.dims(), positions);
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep) {
  std::vector<std::size_t> positions;
  for (const auto& label : keep) positions.push_back(rho.layout().position(label));
  std::sort(positions.begin(), positions.end());
  ComplexMatrix reduced = partial_trace(rho.matrix(), rho.layout().dims(), positions);
  return DensityMatrix::trusted(std::move(reduced), rho.layout().select(positions));
}

ComplexVector permute_vector(const ComplexVector& v, std::span<const std::size_t> dims,
                             std::span<const std::size_t> order) {
  if (static_cast<std::size_t>(v.size()) != product(dims))
    throw std::invalid_argument("permute_vector: length does not match dimensions");
  const auto map = permuted_indices(dims, order);
  ComplexVector out(v.size());
  for (std::size_t i = 0; i < map.size(); ++i)
    out(static_cast<Eigen::Index>(map[i])) = v(static_cast<Eigen::Index>(i));
  return out;
}

ComplexMatrix permute_operator(const ComplexMatrix& m, std::span<const std::size_t> dims,
                               std::span<const std::size_t> order) {
  if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != product(dims))
    throw std::invalid_argument("permute_operator: shape does not match dimensions");
  const auto map = permuted_indices(dims, order);
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < map.size(); ++i)
    for (std::size_t j = 0; j < map.size(); ++j)
      out(static_cast<Eigen::Index>(map[i]), static_cast<Eigen::Index>(map[j])) =
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

PureState permute_subsystems(const PureState& s, const std::vector<std::string>& order) {
  const auto& layout = s.layout();
  if (order.size() != layout.count())
    throw std::invalid_argument("permutation must name every subsystem once");
  std::vector<std::size_t> positions;
  for (const auto& label : order) positions.push_back(layout.position(label));
  ComplexVector v = permute_vector(s.amplitudes(), layout.dims(), positions);
  return PureState(std::move(v), layout.select(positions));
}

// ---------------------------------------------------------------- norms

double schatten_norm(const ComplexMatrix& m, Schatten p) {
  if (m.rows() != m.cols()) throw std::invalid_argument("schatten_norm: matrix must be square");
  if (p == Schatten::two) return m.norm();
  Eigen::MatrixXcd cm = m;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(cm);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0.0;
  return p == Schatten::one ? s.sum() : s.maxCoeff();
}

double half_trace_norm(const ComplexMatrix& hermitian) {
  return 0.5 * hermitian_eigenvalues(hermitian).cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
  return half_trace_norm(rho.matrix() - sigma.matrix());
}

double povm_distance(const DensityMatrix& rho, const DensityMatrix& sigma, const Povm& povm) {
  if (rho.dim() != sigma.dim() || povm.dim() != rho.dim())
    throw std::invalid_argument("povm_distance: dimension mismatch");
  const ComplexMatrix diff = rho.matrix() - sigma.matrix();
  double sum = 0.0;
  for (const auto& e : povm.elements()) sum += std::abs((e * diff).trace());
  return 0.5 * sum;
}

double purity(const ComplexMatrix& rho) { return rho.cwiseAbs2().sum(); }

double purity(const DensityMatrix& rho) { return purity(rho.matrix()); }

ComplexMatrix max_entangled(std::size_t d, bool normalized) {
  const auto n = static_cast<Eigen::Index>(d * d);
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  const double w = normalized ? 1.0 / static_cast<double>(d) : 1.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      m(static_cast<Eigen::Index>(i * d + i), static_cast<Eigen::Index>(j * d + j)) = w;
  return m;
}

DensityMatrix max_entangled_state(std::size_t d) {
  return DensityMatrix::trusted(max_entangled(d, true), SubsystemLayout({"A", "B"}, {d, d}));
}

ComplexMatrix swap_operator(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d * d);
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      m(static_cast<Eigen::Index>(j * d + i), static_cast<Eigen::Index>(i * d + j)) = 1.0;
  return m;
}

// ---------------------------------------------------------------- spectra

RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
  if (m.size() == 0) return RealVector();
  Eigen::MatrixXcd cm = m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cm, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

HermitianEigen eig_hermitian(const ComplexMatrix& m) {
  if (hermiticity_defect(m) > kTolerance)
    throw std::invalid_argument("eig_hermitian: matrix is not Hermitian");
  Eigen::MatrixXcd cm = m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cm);
  return {es.eigenvalues(), es.eigenvectors()};
}

double vn_entropy(const ComplexMatrix& hermitian) {
  double s = 0.0;
  for (double l : hermitian_eigenvalues(hermitian))
    if (l > kEigenCutoff) s -= l * std::log2(l);
  return std::max(s, 0.0);
}

double vn_entropy(const DensityMatrix& rho) { return vn_entropy(rho.matrix()); }

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("relative_entropy: dimension mismatch");
  Eigen::MatrixXcd cs = sigma.matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cs);
  const Eigen::MatrixXcd& v = es.eigenvectors();
  const Eigen::MatrixXcd r = rho.matrix();
  double cross = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const double weight = (v.col(j).adjoint() * r * v.col(j))(0, 0).real();
    const double s = es.eigenvalues()(j);
    if (s <= kEigenCutoff) {
      if (weight > kEigenCutoff) return std::numeric_limits<double>::infinity();
      continue;
    }
    cross -= weight * std::log2(s);
  }
  return std::max(cross - vn_entropy(rho), 0.0);
}

}  // namespace qproc
