#include "qproc/equilibration.hpp"

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qproc {

namespace {

// (e^z - 1)/z and (e^z (z - 1) + 1)/z^2, with series near zero.
cplx phi1(cplx z) {
  if (std::abs(z) < 0.5) {
    cplx term = 1.0, sum = 0.0;
    for (int n = 1; n <= 20; ++n) {
      sum += term;
      term *= z / static_cast<double>(n + 1);
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

cplx phi2(cplx z) {
  if (std::abs(z) < 0.5) {
    // sum_n z^n (n+1)/(n+2)!
    cplx zn = 1.0, sum = 0.0;
    double fact = 2.0;  // (n+2)!
    for (int n = 0; n <= 20; ++n) {
      sum += zn * static_cast<double>(n + 1) / fact;
      zn *= z;
      fact *= static_cast<double>(n + 3);
    }
    return sum;
  }
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

// Level factors applied entrywise in the eigenbasis of h lifted by 1_Gamma.
ComplexMatrix apply_levels(const ComplexMatrix& x, const Hamiltonian& h, const ComplexMatrix& g,
                           std::size_t d_gamma = 1) {
  const auto dim = static_cast<Eigen::Index>(h.dim() * d_gamma);
  if (x.rows() != dim || x.cols() != dim) throw std::invalid_argument("operator dimension does not match H");
  const ComplexMatrix v = d_gamma == 1 ? h.basis() : kron(h.basis(), identity(d_gamma));
  ComplexMatrix y = v.adjoint() * x * v;
  const auto& lvl = h.level_of();
  const auto dg = static_cast<Eigen::Index>(d_gamma);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      y(i, j) *= g(static_cast<Eigen::Index>(lvl[static_cast<std::size_t>(i / dg)]),
                   static_cast<Eigen::Index>(lvl[static_cast<std::size_t>(j / dg)]));
  return v * y * v.adjoint();
}

ComplexMatrix dephasing_factors(std::size_t levels) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(levels), static_cast<Eigen::Index>(levels));
}

std::vector<double> sorted_gaps(const Hamiltonian& h) {
  std::vector<double> gaps;
  const auto& e = h.energies();
  for (std::size_t n = 0; n < e.size(); ++n)
    for (std::size_t m = 0; m < e.size(); ++m)
      if (n != m) gaps.push_back(e[n] - e[m]);
  std::sort(gaps.begin(), gaps.end());
  return gaps;
}

}  // namespace

// ---------------------------------------------------------------- Hamiltonian

Hamiltonian::Hamiltonian(std::vector<double> energies, std::vector<ComplexMatrix> projectors)
    : energies_(std::move(energies)), projectors_(std::move(projectors)) {
  if (energies_.empty() || energies_.size() != projectors_.size())
    throw std::invalid_argument("Hamiltonian needs one projector per energy");
  for (std::size_t n = 1; n < energies_.size(); ++n)
    if (!(energies_[n] > energies_[n - 1])) throw std::invalid_argument("energies must be strictly increasing");
  const auto d = projectors_.front().rows();
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (std::size_t n = 0; n < projectors_.size(); ++n) {
    const auto& p = projectors_[n];
    if (p.rows() != d || p.cols() != d) throw std::invalid_argument("projector dimensions differ");
    if (hermiticity_defect(p) > kTolerance) throw std::invalid_argument("projector is not Hermitian");
    for (std::size_t m = 0; m < projectors_.size(); ++m) {
      const ComplexMatrix prod = p * projectors_[m];
      const double defect = n == m ? (prod - p).norm() : prod.norm();
      if (defect > kTolerance) throw std::invalid_argument("projectors are not orthogonal projections");
    }
    sum += p;
  }
  if ((sum - ComplexMatrix::Identity(d, d)).norm() > kTolerance)
    throw std::invalid_argument("projectors do not resolve the identity");

  basis_.resize(d, d);
  Eigen::Index col = 0;
  for (std::size_t n = 0; n < projectors_.size(); ++n) {
    const auto eig = eig_hermitian(projectors_[n]);
    for (Eigen::Index j = 0; j < d; ++j)
      if (eig.values(j) > 0.5) {
        basis_.col(col++) = eig.vectors.col(j);
        level_of_.push_back(n);
      }
  }
  if (col != d) throw std::invalid_argument("projector ranks do not add up to the dimension");
}

Hamiltonian Hamiltonian::from_matrix(const ComplexMatrix& h, double merge_tol) {
  if (h.rows() != h.cols() || hermiticity_defect(h) > kTolerance)
    throw std::invalid_argument("Hamiltonian matrix must be Hermitian");
  std::vector<double> e;
  std::vector<ComplexMatrix> p;
  for (auto& [val, proj] : spectral_projectors(h, merge_tol)) {
    e.push_back(val);
    p.push_back(std::move(proj));
  }
  return Hamiltonian(std::move(e), std::move(p));
}

ComplexMatrix Hamiltonian::matrix() const {
  ComplexMatrix h = ComplexMatrix::Zero(basis_.rows(), basis_.cols());
  for (std::size_t n = 0; n < energies_.size(); ++n) h += energies_[n] * projectors_[n];
  return h;
}

double Hamiltonian::min_gap() const {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < energies_.size(); ++n) g = std::min(g, energies_[n] - energies_[n - 1]);
  return g;
}

// ---------------------------------------------------------------- clocks

FuzzyClock FuzzyClock::uniform(double T, double tau) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("uniform clock needs finite T > 0");
  if (!std::isfinite(tau)) throw std::invalid_argument("clock mean time must be finite");
  FuzzyClock c;
  c.kind_ = Kind::uniform;
  c.T_ = T;
  c.tau_ = tau;
  return c;
}

FuzzyClock FuzzyClock::half_normal(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("half-normal clock needs finite T > 0");
  FuzzyClock c;
  c.kind_ = Kind::half_normal;
  c.T_ = T;
  c.tau_ = std::sqrt(T / std::numbers::pi);
  return c;
}

FuzzyClock FuzzyClock::numeric(std::vector<double> times, std::vector<double> pdf, double T) {
  if (times.size() < 2 || times.size() != pdf.size())
    throw std::invalid_argument("numeric clock needs matching time and density samples");
  double mass = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(pdf[i] >= 0.0) || !std::isfinite(pdf[i])) throw std::invalid_argument("density must be non-negative");
    if (i == 0) continue;
    const double h = times[i] - times[i - 1];
    if (!(h > 0.0)) throw std::invalid_argument("clock times must be strictly increasing");
    mass += 0.5 * h * (pdf[i] + pdf[i - 1]);
    // Exact integral of t p(t) over a linear segment.
    const double a = times[i - 1], b = times[i], pa = pdf[i - 1], pb = pdf[i];
    mean += h * (pa * (2.0 * a + b) + pb * (a + 2.0 * b)) / 6.0;
  }
  if (std::abs(mass - 1.0) > 1e-6) throw std::invalid_argument("numeric clock density must integrate to one");
  FuzzyClock c;
  c.kind_ = Kind::numeric;
  c.T_ = T;
  c.tau_ = mean;
  c.times_ = std::move(times);
  c.pdf_ = std::move(pdf);
  return c;
}

FuzzyClock FuzzyClock::sharp(double tau) {
  if (!std::isfinite(tau)) throw std::invalid_argument("clock mean time must be finite");
  FuzzyClock c;
  c.kind_ = Kind::sharp;
  c.tau_ = tau;
  return c;
}

cplx FuzzyClock::average_phase(double omega) const {
  if (omega == 0.0) return 1.0;
  switch (kind_) {
    case Kind::sharp:
      return std::polar(1.0, -omega * tau_);
    case Kind::uniform: {
      const double x = 0.5 * T_ * omega;
      return std::polar(std::sin(x) / x, -omega * tau_);
    }
    case Kind::half_normal: {
      // t = sqrt(T) s turns the density into (2/sqrt(pi)) e^{-s^2}.
      if (omega < 0.0) return std::conj(average_phase(-omega));
      const double w = omega * std::sqrt(T_);
      auto f = [](double s) { return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-s * s); };
      static thread_local boost::math::quadrature::ooura_fourier_cos<double> cos_integrator(1e-10);
      static thread_local boost::math::quadrature::ooura_fourier_sin<double> sin_integrator(1e-10);
      const double re = cos_integrator.integrate(f, w).first;
      const double im = sin_integrator.integrate(f, w).first;
      return {re, -im};
    }
    case Kind::numeric: {
      cplx sum = 0.0;
      for (std::size_t i = 1; i < times_.size(); ++i) {
        const double a = times_[i - 1], h = times_[i] - a;
        const double slope = (pdf_[i] - pdf_[i - 1]) / h;
        const cplx z(0.0, -omega * h);
        sum += std::polar(1.0, -omega * a) * (pdf_[i - 1] * h * phi1(z) + slope * h * h * phi2(z));
      }
      return sum;
    }
  }
  throw std::logic_error("unknown clock kind");
}

// ---------------------------------------------------------------- dephasing

ComplexMatrix dephase(const ComplexMatrix& rho, const Hamiltonian& h) {
  return apply_levels(rho, h, dephasing_factors(h.levels()));
}

DensityMatrix dephase(const DensityMatrix& rho, const Hamiltonian& h) {
  return DensityMatrix::trusted(dephase(rho.matrix(), h), rho.layout());
}

ComplexMatrix g_factor(const Hamiltonian& h, const FuzzyClock& clock) {
  const auto n = static_cast<Eigen::Index>(h.levels());
  ComplexMatrix g(n, n);
  const auto& e = h.energies();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      g(i, j) = i == j ? cplx(1.0) : clock.average_phase(e[static_cast<std::size_t>(i)] - e[static_cast<std::size_t>(j)]);
  return g;
}

ComplexMatrix partial_dephase(const ComplexMatrix& rho, const Hamiltonian& h, const FuzzyClock& clock) {
  return apply_levels(rho, h, g_factor(h, clock));
}

DensityMatrix partial_dephase(const DensityMatrix& rho, const Hamiltonian& h, const FuzzyClock& clock) {
  ComplexMatrix m = partial_dephase(rho.matrix(), h, clock);
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityMatrix::trusted(std::move(m), rho.layout());
}

double s_factor(const Hamiltonian& h, const FuzzyClock& clock) {
  if (h.levels() < 2) throw std::invalid_argument("s_factor needs at least two energy levels");
  const ComplexMatrix g = g_factor(h, clock);
  double s = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      if (i != j) s = std::max(s, std::abs(g(i, j)));
  return std::min(s, 1.0);
}

double d_eff(const ComplexMatrix& rho, const Hamiltonian& h) {
  if (rho.rows() != static_cast<Eigen::Index>(h.dim())) throw std::invalid_argument("d_eff: dimension mismatch");
  double s = 0.0;
  for (const auto& p : h.projectors()) {
    const double occ = (p * rho).trace().real();
    s += occ * occ;
  }
  return 1.0 / s;
}

double d_eff(const DensityMatrix& rho, const Hamiltonian& h) { return d_eff(rho.matrix(), h); }

std::size_t gap_count(const Hamiltonian& h, double eps) {
  if (h.levels() < 2) throw std::invalid_argument("gap_count needs at least two energy levels");
  if (!(eps > 0.0)) throw std::invalid_argument("gap_count: eps must be positive");
  const auto gaps = sorted_gaps(h);
  std::size_t best = 0, lo = 0;
  for (std::size_t hi = 0; hi < gaps.size(); ++hi) {
    while (gaps[hi] - gaps[lo] > eps) ++lo;
    best = std::max(best, hi - lo + 1);
  }
  return best;
}

namespace {

double short_factor(const Hamiltonian& h, double eps, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("short_bound: T must be positive");
  const double n = static_cast<double>(gap_count(h, eps));
  const double f = std::isinf(T) ? 1.0 : 1.0 + 8.0 * std::log2(static_cast<double>(h.levels())) / (eps * T);
  return n * f;
}

}  // namespace

double short_bound(const ComplexMatrix& a, const DensityMatrix& rho, const Hamiltonian& h, double eps,
                   double T) {
  const double norm = schatten_norm(a, Schatten::inf);
  return norm * norm / d_eff(rho, h) * short_factor(h, eps, T);
}

double short_bound_subsystem(std::size_t dS, const DensityMatrix& rho, const Hamiltonian& h, double eps,
                             double T) {
  return 0.5 * static_cast<double>(dS) / std::sqrt(d_eff(rho, h)) * std::sqrt(short_factor(h, eps, T));
}

double induced_2norm(const ComplexMatrix& superop) {
  if (superop.rows() != superop.cols()) throw std::invalid_argument("induced_2norm: square representation required");
  if (superop.size() == 0) return 0.0;
  return Eigen::BDCSVD<ComplexMatrix>(superop).singularValues()(0);
}

// ---------------------------------------------------------------- multitime

namespace {

// Everything below lives on S (x) E (x) Gamma.
struct MultitimeContext {
  std::size_t dS = 0, dE = 0, dG = 0, k = 0;
  std::vector<const Hamiltonian*> h;             // per step
  std::vector<std::vector<ComplexMatrix>> kraus;  // lifted, per op
  std::vector<std::vector<double>> weights;
  std::vector<ComplexMatrix> super_sg;  // superoperators on S (x) Gamma
  ComplexMatrix varrho;

  ComplexMatrix apply_op(std::size_t i, const ComplexMatrix& x) const {
    ComplexMatrix y = ComplexMatrix::Zero(x.rows(), x.cols());
    for (std::size_t mu = 0; mu < kraus[i].size(); ++mu)
      y += weights[i][mu] * (kraus[i][mu] * x * kraus[i][mu].adjoint());
    return y;
  }
  ComplexMatrix apply_op_adjoint(std::size_t i, const ComplexMatrix& x) const {
    ComplexMatrix y = ComplexMatrix::Zero(x.rows(), x.cols());
    for (std::size_t mu = 0; mu < kraus[i].size(); ++mu)
      y += weights[i][mu] * (kraus[i][mu].adjoint() * x * kraus[i][mu]);
    return y;
  }
  ComplexMatrix clock_map(std::size_t step, const FuzzyClock& clock, const ComplexMatrix& x) const {
    return apply_levels(x, *h[step], g_factor(*h[step], clock), dG);
  }
  ComplexMatrix dephase_map(const ComplexMatrix& x) const {
    return apply_levels(x, *h[0], dephasing_factors(h[0]->levels()), dG);
  }
  // ||A_{j:i}|| for i <= j.
  double chain_norm(std::size_t j, std::size_t i) const {
    ComplexMatrix s = super_sg[i];
    for (std::size_t l = i + 1; l <= j; ++l) s = super_sg[l] * s;
    return induced_2norm(s);
  }
};

bool same_projectors(const Hamiltonian& a, const Hamiltonian& b) {
  if (a.levels() != b.levels() || a.dim() != b.dim()) return false;
  for (std::size_t n = 0; n < a.levels(); ++n)
    if ((a.projectors()[n] - b.projectors()[n]).norm() > kTolerance) return false;
  return true;
}

MultitimeContext make_context(const MultitimeSetup& s) {
  if (s.ops.empty()) throw std::invalid_argument("multitime setup needs at least one operation");
  MultitimeContext c;
  c.k = s.ops.size() - 1;
  c.dS = s.dS;
  if (c.dS < 1 || s.rho.dim() % c.dS != 0) throw std::invalid_argument("rho dimension must be a multiple of dS");
  c.dE = s.rho.dim() / c.dS;
  c.dG = s.gamma.dim();
  if (c.dS * c.dE * c.dG > kMaxMultitimeDim)
    throw UnsupportedRegime("multitime evaluation limited to dS * dE * dGamma <= 64");
  if (s.hamiltonians.size() != 1 && s.hamiltonians.size() != c.k + 1)
    throw std::invalid_argument("need one Hamiltonian or one per step");
  for (std::size_t i = 0; i <= c.k; ++i) {
    const auto& h = s.hamiltonians.size() == 1 ? s.hamiltonians[0] : s.hamiltonians[i];
    if (h.dim() != c.dS * c.dE) throw std::invalid_argument("Hamiltonian must act on S (x) E");
    if (!same_projectors(h, s.hamiltonians[0]))
      throw std::invalid_argument("per-step Hamiltonians must share one projector set");
    c.h.push_back(&h);
  }
  const std::vector<std::size_t> dims{c.dS, c.dG, c.dE};
  const std::vector<std::size_t> order{0, 2, 1};
  const ComplexMatrix id_e = identity(c.dE);
  for (const auto& op : s.ops) {
    if (op.d_in() != c.dS * c.dG || op.d_out() != c.dS * c.dG)
      throw std::invalid_argument("operations must act on S (x) Gamma");
    std::vector<ComplexMatrix> lifted;
    for (const auto& kop : op.operators()) lifted.push_back(permute_operator(kron(kop, id_e), dims, order));
    c.kraus.push_back(std::move(lifted));
    c.weights.push_back(op.weights());
    c.super_sg.push_back(superoperator(op));
  }
  c.varrho = kron(s.rho.matrix(), s.gamma.matrix());
  return c;
}

std::vector<FuzzyClock> repeat_clock(const FuzzyClock& clock, std::size_t n) {
  return std::vector<FuzzyClock>(n, clock);
}

}  // namespace

MultitimeBound multitime_bound(const MultitimeSetup& setup, const FuzzyClock& clock) {
  const auto c = make_context(setup);
  const std::size_t k = c.k;
  if (clock.kind() == FuzzyClock::Kind::sharp)
    throw std::invalid_argument("multitime_bound needs a fuzzy clock");

  // varrho_i = G A_{i-1} ... A_0 G(varrho), varpi_i = D A_{i-1} ... A_0 D(varrho).
  std::vector<ComplexMatrix> rho_l{c.clock_map(0, clock, c.varrho)};
  std::vector<ComplexMatrix> pi_l{c.dephase_map(c.varrho)};
  for (std::size_t i = 1; i <= k; ++i) {
    rho_l.push_back(c.clock_map(i, clock, c.apply_op(i - 1, rho_l.back())));
    pi_l.push_back(c.dephase_map(c.apply_op(i - 1, pi_l.back())));
  }

  MultitimeBound out;
  double s_all = 1.0;
  for (std::size_t i = 0; i <= k; ++i) s_all *= s_factor(*c.h[i], clock);
  out.a_k = s_all * c.chain_norm(k, 0) * (c.varrho - pi_l[0]).norm();
  out.total = out.a_k;
  for (std::size_t l = 0; l < k; ++l) {
    // (G_{k:l+1} - D) applied to an operator.
    auto g_minus_d = [&](const ComplexMatrix& x) {
      ComplexMatrix y = x;
      for (std::size_t j = l + 1; j <= k; ++j) y = c.clock_map(j, clock, y);
      return ComplexMatrix(y - c.dephase_map(x));
    };
    const ComplexMatrix b_op = g_minus_d(c.apply_op(l, rho_l[l])) - c.apply_op(l, g_minus_d(rho_l[l]));
    const ComplexMatrix delta = rho_l[l] - pi_l[l];
    const ComplexMatrix c_op = c.dephase_map(c.apply_op(l, delta)) - c.apply_op(l, c.dephase_map(delta));
    out.b.push_back(b_op.norm());
    out.c.push_back(c_op.norm());
    out.tail_norms.push_back(c.chain_norm(k, l + 1));
    out.total += out.tail_norms.back() * (out.b.back() + out.c.back());
  }
  return out;
}

double multitime_lhs(const MultitimeSetup& setup, const std::vector<FuzzyClock>& clocks) {
  const auto c = make_context(setup);
  if (clocks.size() != c.k + 1) throw std::invalid_argument("need one clock per step");
  ComplexMatrix fuzzy = c.varrho, equil = c.varrho;
  for (std::size_t i = 0; i <= c.k; ++i) {
    fuzzy = c.apply_op(i, c.clock_map(i, clocks[i], fuzzy));
    const bool sharp = clocks[i].kind() == FuzzyClock::Kind::sharp;
    equil = c.apply_op(i, sharp ? c.clock_map(i, clocks[i], equil) : c.dephase_map(equil));
  }
  return std::abs(fuzzy.trace() - equil.trace());
}

double multitime_lhs(const MultitimeSetup& setup, const FuzzyClock& clock) {
  return multitime_lhs(setup, repeat_clock(clock, setup.ops.size()));
}

double single_time_equivalent(const MultitimeSetup& setup, const FuzzyClock& first, double tau1) {
  const auto c = make_context(setup);
  if (c.k != 1) throw std::invalid_argument("single_time_equivalent is defined for k = 1");
  const auto d = static_cast<Eigen::Index>(c.dS * c.dE * c.dG);
  const ComplexMatrix b = c.apply_op_adjoint(1, ComplexMatrix::Identity(d, d));
  // Heisenberg picture of the fixed evolution: U^dagger B U is the sharp clock at -tau1.
  const ComplexMatrix ub = c.clock_map(1, FuzzyClock::sharp(-tau1), b);
  const ComplexMatrix f = c.apply_op_adjoint(0, ub);
  const ComplexMatrix diff = c.clock_map(0, first, c.varrho) - c.dephase_map(c.varrho);
  return std::abs((f * diff).trace());
}

}  // namespace qproc
