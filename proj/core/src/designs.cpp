#include "qproc/designs.hpp"

#include "qproc/nonmarkov.hpp"
#include "qproc/weingarten.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qproc {

namespace {

double log_sum_exp(std::initializer_list<double> xs) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : xs) hi = std::max(hi, x);
  if (std::isinf(hi)) return hi;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - hi);
  return hi + std::log(s);
}

void check_dims(double dS, double dE) {
  if (!(dS >= 1.0) || !(dE >= 1.0)) throw std::invalid_argument("dimensions must be >= 1");
}

// In-place Walsh-Hadamard transform of each column, normalized.
void hadamard_rows(ComplexMatrix& m) {
  const auto n = m.rows();
  const double s = 1.0 / std::sqrt(2.0);
  for (Eigen::Index h = 1; h < n; h *= 2)
    for (Eigen::Index i = 0; i < n; i += 2 * h)
      for (Eigen::Index j = i; j < i + h; ++j) {
        const auto a = m.row(j).eval();
        const auto b = m.row(j + h).eval();
        m.row(j) = s * (a + b);
        m.row(j + h) = s * (a - b);
      }
}

}  // namespace

void DesignSpec::validate() const {
  if (t < 1) throw std::invalid_argument("design order t must be >= 1");
  if (!(eps >= 0.0)) throw std::invalid_argument("design error must be non-negative");
}

double log_eta(double dS, double dE, std::size_t k) {
  check_dims(dS, dE);
  const double kk = static_cast<double>(k);
  return log_sum_exp({4.0 * std::log(dS * dE) + 2.0 * kk * std::log(dS), -(2.0 * kk + 1.0) * std::log(dS)}) -
         std::log(4.0);
}

double eta(double dS, double dE, std::size_t k) { return std::exp(log_eta(dS, dE, k)); }

double lipschitz_C(double dS, double dE, std::size_t k) {
  check_dims(dS, dE);
  if (dS < 2.0) throw std::invalid_argument("lipschitz_C needs dS >= 2");
  const double ratio = (dS - 1.0) / (std::pow(dS, static_cast<double>(k + 1)) - 1.0);
  return dS * dE * static_cast<double>(k + 1) / 16.0 * ratio * ratio;
}

double ldb_log_bound(const LdbParams& p, const DesignSpec& spec) {
  spec.validate();
  const double t = static_cast<double>(spec.t);
  if (!(p.m > 0.0) || p.m > t / 4.0) throw std::invalid_argument("m must lie in (0, t/4]");
  if (!(p.delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const double dS = static_cast<double>(p.dS);
  check_dims(dS, p.dE);
  const double m = p.m;
  const double kk = static_cast<double>(p.k);
  const double c = lipschitz_C(dS, p.dE, p.k);

  // Random-interaction bound evaluated directly in double dE.
  const double D = std::pow(dS, 2.0 * kk + 1.0);
  const double u = 1.0 / p.dE;
  const double log_f = std::log1p(-u * u) - std::log1p(u / dS) +
                       kk * (std::log1p(-u * u) - std::log1p(-u * u / (dS * dS)));
  const double excess = (std::expm1(log_f) + D * u) / D;
  const BoundResult b = [&] {
    if (p.dE < 9.0e15) return bound_Bk_from_purity(p.dS, static_cast<std::size_t>(p.dE), p.k, 1.0 / D + excess);
    BoundResult r;
    r.value = 0.5 * std::sqrt(std::max(0.0, D * excess));
    r.branch = 2;
    return r;
  }();

  const double ninf = -std::numeric_limits<double>::infinity();
  const double first = m * std::log(m / c);
  const double second = b.value > 0.0 ? 2.0 * m * std::log(2.0 * b.value) : ninf;
  const double third =
      spec.eps > 0.0 ? std::log(spec.eps) - t * std::log(dS * p.dE) + 2.0 * m * log_eta(dS, p.dE, p.k) : ninf;
  return 3.0 * m * (2.0 * kk + 1.0) * std::log(dS) - 2.0 * m * std::log(p.delta) +
         log_sum_exp({first, second, third});
}

double ldb_bound(const LdbParams& p, const DesignSpec& spec) { return std::exp(ldb_log_bound(p, spec)); }

MOptimum optimize_m(const LdbParams& p, const DesignSpec& spec) {
  spec.validate();
  const double cap = static_cast<double>(spec.t) / 4.0;
  constexpr int kGrid = 200;
  auto eval = [&](double m) {
    LdbParams q = p;
    q.m = m;
    return ldb_log_bound(q, spec);
  };
  const double step = cap / kGrid;
  int best = 0;
  auto grid = [&](int i) { return cap * (i + 1) / kGrid; };
  double best_val = eval(grid(0));
  for (int i = 1; i < kGrid; ++i) {
    const double v = eval(grid(i));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  MOptimum out{grid(best), best_val, 0.0};
  double lo = best == 0 ? 1e-3 * step : step * best;
  double hi = best + 1 == kGrid ? cap : grid(best + 1);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = eval(x1), f2 = eval(x2);
  for (int it = 0; it < 100 && hi - lo > 1e-12 * cap; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = eval(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = eval(x2);
    }
  }
  const double cand = f1 <= f2 ? x1 : x2;
  const double cand_val = std::min(f1, f2);
  if (cand_val < out.log_bound) {
    out.m = cand;
    out.log_bound = cand_val;
  }
  out.bound = std::exp(out.log_bound);
  return out;
}

double required_depth(std::size_t t, double eps, std::size_t n) {
  if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("required_depth: eps must lie in (0, 1]");
  if (n < 1) throw std::invalid_argument("required_depth: need n >= 1");
  return static_cast<double>(t) - std::log2(eps) / static_cast<double>(n);
}

RdcSchedule RdcSchedule::all_pairs(std::size_t n) {
  RdcSchedule s;
  s.n_qubits = n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s.pairs.emplace_back(i, j);
  return s;
}

void RdcSchedule::validate() const {
  for (const auto& [i, j] : pairs)
    if (i == j || i >= n_qubits || j >= n_qubits)
      throw std::invalid_argument("RDC schedule pair out of range");
}

std::vector<RdcGate> sample_rdc_gates(const RdcSchedule& sched, std::size_t t, RngStream& rng) {
  sched.validate();
  if (t < 1) throw std::invalid_argument("design order t must be >= 1");
  const double two_pi = 2.0 * std::numbers::pi;
  const std::size_t nphi = t + 1, ntheta = t / 2 + 1;
  std::vector<RdcGate> gates;
  gates.reserve(sched.pairs.size());
  for (const auto& [i, j] : sched.pairs) {
    RdcGate g{i, j, 0.0, 0.0, 0.0};
    g.phi1 = two_pi * static_cast<double>(rng.uniform_index(nphi)) / static_cast<double>(nphi);
    g.phi2 = two_pi * static_cast<double>(rng.uniform_index(nphi)) / static_cast<double>(nphi);
    g.theta = two_pi * static_cast<double>(rng.uniform_index(ntheta)) / static_cast<double>(ntheta);
    gates.push_back(g);
  }
  return gates;
}

ComplexVector rdc_diagonal(std::size_t n_qubits, const std::vector<RdcGate>& gates) {
  if (n_qubits > kMaxRdcQubits) throw UnsupportedRegime("RDC layer limited to 12 qubits");
  const std::size_t dim = std::size_t{1} << n_qubits;
  RealVector phase = RealVector::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t x = 0; x < dim; ++x) {
    double a = 0.0;
    for (const auto& g : gates) {
      const std::size_t bi = (x >> (n_qubits - 1 - g.i)) & 1U;
      const std::size_t bj = (x >> (n_qubits - 1 - g.j)) & 1U;
      a += g.phi1 * static_cast<double>(bi) + g.phi2 * static_cast<double>(bj) +
           g.theta * static_cast<double>(bi & bj);
    }
    phase(static_cast<Eigen::Index>(x)) = a;
  }
  ComplexVector out(static_cast<Eigen::Index>(dim));
  for (Eigen::Index x = 0; x < out.size(); ++x) out(x) = std::polar(1.0, phase(x));
  return out;
}

UnitaryMatrix rdc_layer(const RdcSchedule& sched, std::size_t t, RngStream& rng) {
  if (sched.n_qubits > kMaxRdcQubits) throw UnsupportedRegime("RDC layer limited to 12 qubits");
  const auto gates = sample_rdc_gates(sched, t, rng);
  return UnitaryMatrix::trusted(rdc_diagonal(sched.n_qubits, gates).asDiagonal().toDenseMatrix());
}

UnitaryMatrix build_W(std::size_t n, std::size_t t, std::size_t ell, const RdcSchedule& sched,
                      RngStream& rng) {
  if (n > kMaxCircuitQubits) throw UnsupportedRegime("circuit W limited to 10 qubits");
  if (sched.n_qubits != n) throw std::invalid_argument("schedule qubit count must equal n");
  ComplexMatrix w = rdc_diagonal(n, sample_rdc_gates(sched, t, rng)).asDiagonal().toDenseMatrix();
  for (std::size_t r = 0; r < 2 * ell; ++r) {
    hadamard_rows(w);
    const ComplexVector d = rdc_diagonal(n, sample_rdc_gates(sched, t, rng));
    w = d.asDiagonal() * w;
  }
  return UnitaryMatrix::trusted(std::move(w));
}

MomentError design_moment_error(const UnitarySampler& sampler, std::size_t n_moment, std::size_t d,
                                std::size_t samples, RngStream& rng) {
  if (n_moment < 1 || n_moment > 2) throw UnsupportedRegime("design_moment_error supports n = 1, 2");
  if (samples < 2) throw std::invalid_argument("design_moment_error: need >= 2 samples");
  const auto dim = static_cast<Eigen::Index>(n_moment == 1 ? d : d * d);

  // Fixed probes: a diagonal projector, an off-diagonal unit and a generic operator.
  std::vector<ComplexMatrix> probes(3, ComplexMatrix::Zero(dim, dim));
  probes[0](0, 0) = 1.0;
  // For n = 2 this is |01><10|, which picks up the swap term of the twirl.
  if (n_moment == 2 && d > 1)
    probes[1](1, static_cast<Eigen::Index>(d)) = 1.0;
  else
    probes[1](0, dim - 1) = 1.0;
  RngStream probe_rng(0x5eed, stream_id("design_probe", n_moment));
  probes[2] = ginibre(static_cast<std::size_t>(dim), probe_rng);

  std::vector<ComplexMatrix> sum(probes.size(), ComplexMatrix::Zero(dim, dim));
  std::vector<Eigen::MatrixXd> sum_sq(probes.size(), Eigen::MatrixXd::Zero(dim, dim));
  for (std::size_t s = 0; s < samples; ++s) {
    ComplexMatrix u = sampler(rng);
    if (u.rows() != static_cast<Eigen::Index>(d)) throw std::invalid_argument("sampler returned wrong dimension");
    if (n_moment == 2) u = kron(u, u);
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const ComplexMatrix y = u * probes[p] * u.adjoint();
      sum[p] += y;
      sum_sq[p] += y.cwiseAbs2();
    }
  }
  const double ns = static_cast<double>(samples);
  MomentError out;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const ComplexMatrix mean = sum[p] / ns;
    const Eigen::MatrixXd var = ((sum_sq[p] - ns * mean.cwiseAbs2()) / (ns - 1.0)).cwiseMax(0.0);
    const ComplexMatrix ref = analytic_twirl(n_moment, probes[p], d);
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index c = 0; c < dim; ++c) {
        const double dev = std::abs(mean(r, c) - ref(r, c));
        if (dev > out.max_deviation) {
          out.max_deviation = dev;
          out.std_error = std::sqrt(var(r, c) / ns);
        }
      }
  }
  return out;
}

}  // namespace qproc
