#include "qproc/channels.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace qproc {

namespace {

ComplexMatrix kraus_gram(const std::vector<ComplexMatrix>& ops) {
  ComplexMatrix sum = ComplexMatrix::Zero(ops.front().cols(), ops.front().cols());
  for (const auto& k : ops) sum += k.adjoint() * k;
  return sum;
}

}  // namespace

// ---------------------------------------------------------------- KrausMap

KrausMap::KrausMap(std::vector<ComplexMatrix> operators, std::vector<double> weights)
    : ops_(std::move(operators)), weights_(std::move(weights)) {
  if (ops_.empty()) throw std::invalid_argument("Kraus map needs at least one operator");
  const auto rows = ops_.front().rows();
  const auto cols = ops_.front().cols();
  if (rows < 1 || cols < 1) throw std::invalid_argument("Kraus operators must be nonempty");
  for (const auto& k : ops_) {
    if (k.rows() != rows || k.cols() != cols)
      throw std::invalid_argument("Kraus operators must share one shape");
    if (!k.allFinite()) throw std::invalid_argument("Kraus operator has non-finite entries");
  }
  if (weights_.empty()) weights_.assign(ops_.size(), 1.0);
  if (weights_.size() != ops_.size())
    throw std::invalid_argument("one weight per Kraus operator is required");
  for (double w : weights_) {
    if (!std::isfinite(w)) throw std::invalid_argument("Kraus weights must be finite");
    if (w != 1.0) unit_weights_ = false;
  }
  const ComplexMatrix gram = kraus_gram(ops_);
  const ComplexMatrix slack = identity(static_cast<std::size_t>(cols)) - gram;
  if (hermitian_eigenvalues(slack).minCoeff() < -kTolerance)
    throw std::invalid_argument("Kraus operators are not trace non-increasing");
  tp_ = unit_weights_ && slack.cwiseAbs().maxCoeff() <= kTolerance;
}

// ---------------------------------------------------------------- ChoiMatrix

ChoiMatrix::ChoiMatrix(ComplexMatrix matrix, std::size_t d_in, std::size_t d_out,
                       ChoiNormalization normalization)
    : m_(std::move(matrix)), d_in_(d_in), d_out_(d_out), norm_(normalization) {
  if (d_in < 1 || d_out < 1) throw std::invalid_argument("Choi dimensions must be >= 1");
  const auto n = static_cast<Eigen::Index>(d_in * d_out);
  if (m_.rows() != n || m_.cols() != n)
    throw std::invalid_argument("Choi matrix must be (d_out d_in) square");
  if (!m_.allFinite()) throw std::invalid_argument("Choi matrix has non-finite entries");
}

ChoiMatrix ChoiMatrix::to(ChoiNormalization target) const {
  if (target == norm_) return *this;
  const double f = static_cast<double>(d_in_);
  ComplexMatrix m = target == ChoiNormalization::unit_trace ? ComplexMatrix(m_ / f) : ComplexMatrix(m_ * f);
  return ChoiMatrix(std::move(m), d_in_, d_out_, target);
}

bool ChoiMatrix::is_cp(double tol) const {
  return hermiticity_defect(m_) <= tol && hermitian_eigenvalues(m_).minCoeff() >= -tol;
}

bool ChoiMatrix::is_tp(double tol) const {
  const ComplexMatrix un = to(ChoiNormalization::unnormalized).matrix();
  const std::vector<std::size_t> dims{d_out_, d_in_};
  const std::vector<std::size_t> keep{1};
  const ComplexMatrix marg = partial_trace(un, dims, keep);
  return (marg - identity(d_in_)).cwiseAbs().maxCoeff() <= tol;
}

Instrument::Instrument(std::vector<KrausMap> branches) : branches_(std::move(branches)) {
  if (branches_.empty()) throw std::invalid_argument("instrument needs at least one branch");
  const auto din = branches_.front().d_in();
  ComplexMatrix sum = ComplexMatrix::Zero(static_cast<Eigen::Index>(din), static_cast<Eigen::Index>(din));
  for (const auto& b : branches_) {
    if (b.d_in() != din || b.d_out() != branches_.front().d_out())
      throw std::invalid_argument("instrument branches must share dimensions");
    if (!b.unit_weights()) throw std::invalid_argument("instrument branches must be unweighted");
    sum += kraus_gram(b.operators());
  }
  if ((sum - identity(din)).cwiseAbs().maxCoeff() > kTolerance)
    throw std::invalid_argument("instrument branches do not sum to a trace-preserving map");
}

// ---------------------------------------------------------------- application

ComplexMatrix apply_kraus(const KrausMap& m, const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols() || static_cast<std::size_t>(rho.rows()) != m.d_in())
    throw std::invalid_argument("apply_kraus: input dimension mismatch");
  const auto d = static_cast<Eigen::Index>(m.d_out());
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (std::size_t i = 0; i < m.operators().size(); ++i) {
    const auto& k = m.operators()[i];
    out += m.weights()[i] * (k * rho * k.adjoint());
  }
  return out;
}

ComplexMatrix apply_kraus(const KrausMap& m, const DensityMatrix& rho) {
  return apply_kraus(m, rho.matrix());
}

ChoiMatrix choi_of(const KrausMap& m) {
  const std::size_t din = m.d_in(), dout = m.d_out();
  const auto n = static_cast<Eigen::Index>(din * dout);
  ComplexMatrix c = ComplexMatrix::Zero(n, n);
  // (K (x) 1)|Psi~> has amplitude K(o, i) at (o, i).
  for (std::size_t mu = 0; mu < m.operators().size(); ++mu) {
    const auto& k = m.operators()[mu];
    ComplexVector v(n);
    for (std::size_t o = 0; o < dout; ++o)
      for (std::size_t i = 0; i < din; ++i)
        v(static_cast<Eigen::Index>(o * din + i)) = k(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i));
    c += m.weights()[mu] * (v * v.adjoint());
  }
  return ChoiMatrix(std::move(c), din, dout, ChoiNormalization::unnormalized);
}

ChoiMatrix choi_of(const Instrument& inst, std::size_t branch) {
  return choi_of(inst.branches().at(branch));
}

ComplexMatrix apply_via_choi(const ChoiMatrix& c, const ComplexMatrix& rho) {
  if (c.normalization() != ChoiNormalization::unnormalized)
    throw std::invalid_argument("apply_via_choi expects the unnormalized Choi convention");
  if (rho.rows() != rho.cols() || static_cast<std::size_t>(rho.rows()) != c.d_in())
    throw std::invalid_argument("apply_via_choi: input dimension mismatch");
  const std::size_t din = c.d_in(), dout = c.d_out();
  const auto& m = c.matrix();
  // out(o, o') = sum_{i,j} C[(o,i),(o',j)] rho(i, j)
  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(dout), static_cast<Eigen::Index>(dout));
  for (std::size_t o = 0; o < dout; ++o)
    for (std::size_t p = 0; p < dout; ++p) {
      cplx s = 0.0;
      for (std::size_t i = 0; i < din; ++i)
        for (std::size_t j = 0; j < din; ++j)
          s += m(static_cast<Eigen::Index>(o * din + i), static_cast<Eigen::Index>(p * din + j)) *
               rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      out(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(p)) = s;
    }
  return out;
}

ComplexMatrix apply_via_choi(const ChoiMatrix& c, const DensityMatrix& rho) {
  return apply_via_choi(c, rho.matrix());
}

KrausMap kraus_from_choi(const ChoiMatrix& c) {
  const ChoiMatrix un = c.to(ChoiNormalization::unnormalized);
  if (hermiticity_defect(un.matrix()) > kTolerance)
    throw std::invalid_argument("kraus_from_choi: Choi matrix is not Hermitian");
  const auto eig = eig_hermitian(un.matrix());
  if (eig.values.minCoeff() < -kTolerance)
    throw std::invalid_argument("kraus_from_choi: Choi matrix is not positive semidefinite");
  const std::size_t din = un.d_in(), dout = un.d_out();
  std::vector<ComplexMatrix> ops;
  for (Eigen::Index j = eig.values.size(); j-- > 0;) {
    const double lam = eig.values(j);
    if (lam <= kEigenCutoff) continue;
    ComplexMatrix k(static_cast<Eigen::Index>(dout), static_cast<Eigen::Index>(din));
    for (std::size_t o = 0; o < dout; ++o)
      for (std::size_t i = 0; i < din; ++i)
        k(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) =
            std::sqrt(lam) * eig.vectors(static_cast<Eigen::Index>(o * din + i), j);
    ops.push_back(std::move(k));
  }
  if (ops.empty())
    ops.push_back(ComplexMatrix::Zero(static_cast<Eigen::Index>(dout), static_cast<Eigen::Index>(din)));
  return KrausMap(std::move(ops));
}

ComplexMatrix dilate_apply(const UnitaryMatrix& u, const DensityMatrix& beta,
                           const DensityMatrix& rho) {
  if (u.dim() != rho.dim() * beta.dim())
    throw std::invalid_argument("dilate_apply: unitary must act on d_in * d_env");
  const ComplexMatrix joint = kron(rho.matrix(), beta.matrix());
  const ComplexMatrix out = u.matrix() * joint * u.matrix().adjoint();
  const std::vector<std::size_t> dims{rho.dim(), beta.dim()};
  const std::vector<std::size_t> keep{0};
  return partial_trace(out, dims, keep);
}

// ---------------------------------------------------------------- constructors

KrausMap identity_channel(std::size_t d) {
  if (d < 1) throw std::invalid_argument("identity_channel: d must be >= 1");
  return KrausMap({identity(d)});
}

KrausMap unitary_channel(const ComplexMatrix& u) {
  if (u.rows() != u.cols() || unitarity_defect(u) > kTolerance)
    throw std::invalid_argument("unitary_channel: matrix is not unitary");
  return KrausMap({u});
}

KrausMap depolarizing_channel(std::size_t d, double q) {
  if (d < 1) throw std::invalid_argument("depolarizing_channel: d must be >= 1");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("depolarizing_channel: q must lie in [0, 1]");
  // Weyl operators X^a Z^b form a unitary 1-design, so their uniform mixture
  // is the completely depolarizing map.
  const double dd = static_cast<double>(d);
  const auto n = static_cast<Eigen::Index>(d);
  const cplx omega = std::polar(1.0, 2.0 * std::numbers::pi / dd);
  std::vector<ComplexMatrix> ops;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      ComplexMatrix w = ComplexMatrix::Zero(n, n);
      for (std::size_t j = 0; j < d; ++j)
        w(static_cast<Eigen::Index>((j + a) % d), static_cast<Eigen::Index>(j)) =
            std::pow(omega, static_cast<double>(b * j));
      const double p = (a == 0 && b == 0) ? q + (1.0 - q) / (dd * dd) : (1.0 - q) / (dd * dd);
      if (p > 0.0) ops.push_back(std::sqrt(p) * w);
    }
  return KrausMap(std::move(ops));
}

std::vector<std::pair<double, ComplexMatrix>> spectral_projectors(const ComplexMatrix& h,
                                                                  double merge_tol) {
  const auto eig = eig_hermitian(h);
  std::vector<std::pair<double, ComplexMatrix>> out;
  const auto d = eig.values.size();
  Eigen::Index start = 0;
  while (start < d) {
    Eigen::Index end = start + 1;
    while (end < d && eig.values(end) - eig.values(end - 1) <= merge_tol) ++end;
    const auto block = eig.vectors.middleCols(start, end - start);
    ComplexMatrix p = block * block.adjoint();
    out.emplace_back(eig.values.segment(start, end - start).mean(), std::move(p));
    start = end;
  }
  return out;
}

KrausMap dephasing_channel(const ComplexMatrix& h) {
  if (h.rows() != h.cols() || hermiticity_defect(h) > kTolerance)
    throw std::invalid_argument("dephasing_channel: H must be Hermitian");
  std::vector<ComplexMatrix> ops;
  for (auto& [e, p] : spectral_projectors(h)) ops.push_back(std::move(p));
  return KrausMap(std::move(ops));
}

KrausMap standard_channel(const StandardChannel& spec) {
  switch (spec.kind) {
    case StandardChannel::Kind::identity:
      return identity_channel(spec.d);
    case StandardChannel::Kind::unitary:
      return unitary_channel(spec.matrix);
    case StandardChannel::Kind::depolarizing:
      return depolarizing_channel(spec.d, spec.q);
    case StandardChannel::Kind::dephasing:
      return dephasing_channel(spec.matrix);
  }
  throw std::invalid_argument("unknown channel kind");
}

// ---------------------------------------------------------------- superoperators

ComplexMatrix sandwich_superoperator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return kron(a, b.transpose());
}

ComplexMatrix superoperator(const KrausMap& m) {
  const auto n_out = static_cast<Eigen::Index>(m.d_out() * m.d_out());
  const auto n_in = static_cast<Eigen::Index>(m.d_in() * m.d_in());
  ComplexMatrix s = ComplexMatrix::Zero(n_out, n_in);
  for (std::size_t i = 0; i < m.operators().size(); ++i) {
    const auto& k = m.operators()[i];
    s += m.weights()[i] * kron(k, k.conjugate());
  }
  return s;
}

ComplexVector vectorize(const ComplexMatrix& x) {
  ComplexVector v(x.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) v(i * x.cols() + j) = x(i, j);
  return v;
}

ComplexMatrix unvectorize(const ComplexVector& v, std::size_t rows, std::size_t cols) {
  if (static_cast<std::size_t>(v.size()) != rows * cols)
    throw std::invalid_argument("unvectorize: length mismatch");
  ComplexMatrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v(static_cast<Eigen::Index>(i * cols + j));
  return x;
}

}  // namespace qproc
