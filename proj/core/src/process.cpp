#include "qproc/process.hpp"

#include "qproc/haar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qproc {

namespace {

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

// Positions within [S_out, A_k, B_k, ..., A_1, B_1].
std::size_t pos_a(std::size_t k, std::size_t i) { return 1 + 2 * (k - i); }
std::size_t pos_b(std::size_t k, std::size_t i) { return 2 + 2 * (k - i); }
std::size_t output_pos(std::size_t k, std::size_t step) { return step == k ? 0 : pos_a(k, step + 1); }

std::vector<std::size_t> uniform_dims(std::size_t d, std::size_t n) { return std::vector<std::size_t>(n, d); }

// Order vector taking the `from` label sequence to the `to` sequence.
std::vector<std::size_t> relabel_order(const std::vector<std::string>& from,
                                       const std::vector<std::string>& to) {
  std::vector<std::size_t> order;
  for (const auto& label : to) {
    auto it = std::find(from.begin(), from.end(), label);
    if (it == from.end()) throw std::logic_error("relabel_order: missing label " + label);
    order.push_back(static_cast<std::size_t>(it - from.begin()));
  }
  return order;
}

// In-place exchange of two equal-dimension tensor factors of a vector.
void swap_factors(ComplexVector& v, std::span<const std::size_t> dims, std::size_t p,
                  std::size_t q) {
  if (p == q) return;
  if (p > q) std::swap(p, q);
  std::size_t sp = 1, sq = 1;
  for (std::size_t i = dims.size(); i-- > p + 1;) {
    if (i > q) sq *= dims[i];
    sp *= dims[i];
  }
  const std::size_t d = dims[p];
  const auto n = static_cast<std::size_t>(v.size());
  for (std::size_t idx = 0; idx < n; ++idx) {
    const std::size_t dp = (idx / sp) % d;
    const std::size_t dq = (idx / sq) % d;
    if (dp < dq) {
      const std::size_t j = idx + (dq - dp) * sp - (dq - dp) * sq;
      std::swap(v(static_cast<Eigen::Index>(idx)), v(static_cast<Eigen::Index>(j)));
    }
  }
}

void apply_front(ComplexVector& v, const ComplexMatrix& u) {
  const auto f = u.rows();
  const auto rest = v.size() / f;
  Eigen::Map<ComplexMatrix> m(v.data(), f, rest);
  ComplexMatrix out = u * m;
  m = out;
}

ProcessTensor markov_unchecked(const ComplexMatrix& rho0, const std::vector<ComplexMatrix>& steps,
                               std::size_t dS) {
  const std::size_t k = steps.size();
  if (k == 0) return ProcessTensor::trusted(rho0, dS, 0);
  // Factors in kron order: step k, step k-1, ..., step 1, then rho0.
  ComplexMatrix acc = steps[k - 1];
  std::vector<std::string> labels{"S_out", "B" + std::to_string(k)};
  for (std::size_t i = k - 1; i >= 1; --i) {
    acc = kron(acc, steps[i - 1]);
    labels.push_back("A" + std::to_string(i + 1));
    labels.push_back("B" + std::to_string(i));
  }
  acc = kron(acc, rho0);
  labels.push_back("A1");
  const auto target = process_leg_layout(dS, k);
  const auto order = relabel_order(labels, target.labels());
  ComplexMatrix choi = permute_operator(acc, uniform_dims(dS, 2 * k + 1), order);
  choi /= std::pow(static_cast<double>(dS), static_cast<double>(k));
  return ProcessTensor::trusted(std::move(choi), dS, k);
}

ComplexMatrix swap_two(const ComplexMatrix& m, std::size_t d0, std::size_t d1) {
  const std::vector<std::size_t> dims{d0, d1};
  const std::vector<std::size_t> order{1, 0};
  return permute_operator(m, dims, order);
}

}  // namespace

std::string to_string(Interaction i) { return i == Interaction::random ? "random" : "constant"; }

Interaction interaction_from_string(const std::string& s) {
  if (s == "random") return Interaction::random;
  if (s == "constant") return Interaction::constant;
  throw std::invalid_argument("unknown interaction mode: " + s);
}

SubsystemLayout process_leg_layout(std::size_t dS, std::size_t k) {
  std::vector<std::string> labels{"S_out"};
  for (std::size_t i = k; i >= 1; --i) {
    labels.push_back("A" + std::to_string(i));
    labels.push_back("B" + std::to_string(i));
  }
  return SubsystemLayout(std::move(labels), uniform_dims(dS, 2 * k + 1));
}

// ---------------------------------------------------------------- ProcessTensor

ProcessTensor::ProcessTensor(ComplexMatrix choi, std::size_t dS, std::size_t k, TrustedTag)
    : choi_(std::move(choi)), dS_(dS), k_(k) {
  if (dS < 1) throw std::invalid_argument("process dimension must be >= 1");
  const auto n = static_cast<Eigen::Index>(ipow(dS, 2 * k + 1));
  if (choi_.rows() != n || choi_.cols() != n)
    throw std::invalid_argument("process Choi must have dimension dS^(2k+1)");
}

ProcessTensor::ProcessTensor(ComplexMatrix choi, std::size_t dS, std::size_t k)
    : ProcessTensor(std::move(choi), dS, k, TrustedTag{}) {
  if (!choi_.allFinite()) throw std::invalid_argument("process Choi has non-finite entries");
  if (hermiticity_defect(choi_) > kTolerance) throw std::invalid_argument("process Choi is not Hermitian");
  if (std::abs(choi_.trace() - cplx(1.0)) > kTolerance)
    throw std::invalid_argument("process Choi must have unit trace");
  if (hermitian_eigenvalues(choi_).minCoeff() < -kTolerance)
    throw std::invalid_argument("process Choi is not positive semidefinite");
  if (causality_residual() > 1e-8) throw std::invalid_argument("process Choi violates causality");
}

ProcessTensor ProcessTensor::trusted(ComplexMatrix choi, std::size_t dS, std::size_t k) {
  return ProcessTensor(std::move(choi), dS, k, TrustedTag{});
}

double ProcessTensor::causality_residual() const {
  double worst = 0.0;
  ComplexMatrix cur = choi_;
  for (std::size_t j = k_; j >= 1; --j) {
    // cur lives on [out, A_j, B_j, ..., A_1, B_1] with 2j + 1 legs.
    const std::size_t legs = 2 * j + 1;
    const auto dims = uniform_dims(dS_, legs);
    std::vector<std::size_t> keep(legs - 1);
    for (std::size_t p = 1; p < legs; ++p) keep[p - 1] = p;
    const ComplexMatrix reduced = partial_trace(cur, dims, keep);  // [A_j, B_j, ...]
    const auto rdims = uniform_dims(dS_, legs - 1);
    std::vector<std::size_t> keep_rest;
    for (std::size_t p = 0; p < legs - 1; ++p)
      if (p != 1) keep_rest.push_back(p);
    const ComplexMatrix rest = partial_trace(reduced, rdims, keep_rest);
    ComplexMatrix expected = kron(identity(dS_) / static_cast<double>(dS_), rest);  // [B_j, A_j, ...]
    std::vector<std::size_t> order(legs - 1);
    order[0] = 1;
    order[1] = 0;
    for (std::size_t p = 2; p < legs - 1; ++p) order[p] = p;
    expected = permute_operator(expected, rdims, order);
    worst = std::max(worst, (reduced - expected).norm());
    cur = rest;
  }
  worst = std::max(worst, std::abs(cur.trace() - cplx(1.0)));
  return worst;
}

// ---------------------------------------------------------------- sampling

ProcessTensor process_from_unitaries(const std::vector<ComplexMatrix>& unitaries,
                                     std::size_t dS, std::size_t dE,
                                     const std::optional<PureState>& fiducial,
                                     std::size_t max_vector_length) {
  if (unitaries.empty()) throw std::invalid_argument("need at least one unitary (U_0)");
  if (dS < 1 || dE < 1) throw std::invalid_argument("dimensions must be >= 1");
  const std::size_t k = unitaries.size() - 1;
  const std::size_t dse = dS * dE;
  const std::size_t anc = ipow(dS, 2 * k);
  const double length = static_cast<double>(dE) * std::pow(static_cast<double>(dS), 2.0 * k + 1.0);
  if (length > static_cast<double>(max_vector_length))
    throw UnsupportedRegime("process vector length dE*dS^(2k+1) exceeds the memory guard");
  for (const auto& u : unitaries)
    if (u.rows() != static_cast<Eigen::Index>(dse) || u.cols() != static_cast<Eigen::Index>(dse))
      throw std::invalid_argument("each unitary must act on dS * dE");

  ComplexVector phi = ComplexVector::Zero(static_cast<Eigen::Index>(dse));
  if (fiducial) {
    if (fiducial->dim() != dse) throw std::invalid_argument("fiducial must live on dS * dE");
    phi = fiducial->amplitudes();
  } else {
    phi(0) = 1.0;
  }
  // Ancilla pairs (A_i, B_i), each (1/sqrt dS) sum_a |aa>.
  ComplexVector pairs = ComplexVector::Ones(1);
  const double amp = 1.0 / std::sqrt(static_cast<double>(dS));
  ComplexVector bell = ComplexVector::Zero(static_cast<Eigen::Index>(dS * dS));
  for (std::size_t a = 0; a < dS; ++a) bell(static_cast<Eigen::Index>(a * dS + a)) = amp;
  for (std::size_t i = 0; i < k; ++i) {
    ComplexVector next(pairs.size() * bell.size());
    for (Eigen::Index r = 0; r < pairs.size(); ++r) next.segment(r * bell.size(), bell.size()) = pairs(r) * bell;
    pairs = std::move(next);
  }

  // Registers [E, S, A_k, B_k, ..., A_1, B_1].
  ComplexVector psi(static_cast<Eigen::Index>(dse * anc));
  for (std::size_t f = 0; f < dse; ++f)
    psi.segment(static_cast<Eigen::Index>(f * anc), static_cast<Eigen::Index>(anc)) =
        phi(static_cast<Eigen::Index>(f)) * pairs;
  std::vector<std::size_t> dims{dE, dS};
  for (std::size_t i = 0; i < 2 * k; ++i) dims.push_back(dS);

  apply_front(psi, unitaries[0]);
  for (std::size_t i = 1; i <= k; ++i) {
    swap_factors(psi, dims, 1, 1 + pos_a(k, i));
    apply_front(psi, unitaries[i]);
  }

  const auto cols = static_cast<Eigen::Index>(dS * anc);
  Eigen::Map<const ComplexMatrix> m(psi.data(), static_cast<Eigen::Index>(dE), cols);
  ComplexMatrix choi = m.transpose() * m.conjugate();
  choi = 0.5 * (choi + choi.adjoint()).eval();
  return ProcessTensor::trusted(std::move(choi), dS, k);
}

ProcessTensor sample_process(const ProcessConfig& cfg, RngStream& rng) {
  const double length = static_cast<double>(cfg.dE) * std::pow(static_cast<double>(cfg.dS), 2.0 * cfg.k + 1.0);
  if (length > static_cast<double>(cfg.max_vector_length))
    throw UnsupportedRegime("process vector length dE*dS^(2k+1) exceeds the memory guard");
  std::vector<ComplexMatrix> us;
  if (cfg.interaction == Interaction::random) {
    for (std::size_t i = 0; i <= cfg.k; ++i) us.push_back(haar_unitary(cfg.dS * cfg.dE, rng).matrix());
  } else {
    const ComplexMatrix u = haar_unitary(cfg.dS * cfg.dE, rng).matrix();
    us.assign(cfg.k + 1, u);
  }
  return process_from_unitaries(us, cfg.dS, cfg.dE, cfg.fiducial, cfg.max_vector_length);
}

ProcessTensor sample_process(const ProcessConfig& cfg) {
  RngStream rng = cfg.seed;
  return sample_process(cfg, rng);
}

ProcessTensor markov_process(const DensityMatrix& rho0, const std::vector<ChoiMatrix>& steps) {
  const std::size_t dS = rho0.dim();
  std::vector<ComplexMatrix> mats;
  for (const auto& c : steps) {
    if (c.d_in() != dS || c.d_out() != dS)
      throw std::invalid_argument("markov_process: step dimensions must match the initial state");
    if (!c.is_tp()) throw std::invalid_argument("markov_process: step is not trace preserving");
    mats.push_back(c.to(ChoiNormalization::unnormalized).matrix());
  }
  return markov_unchecked(rho0.matrix(), mats, dS);
}

// ---------------------------------------------------------------- contraction

ComplexMatrix tester_from_maps(const std::vector<KrausMap>& maps, std::size_t dS) {
  ComplexMatrix acc = ComplexMatrix::Ones(1, 1);
  for (std::size_t i = maps.size(); i >= 1; --i) {
    const auto& m = maps[i - 1];
    if (m.d_in() != dS || m.d_out() != dS)
      throw std::invalid_argument("operation dimensions must equal the system dimension");
    acc = kron(acc, swap_two(choi_of(m).matrix(), dS, dS));
  }
  return acc;
}

ComplexMatrix tester_with_ancilla(const std::vector<KrausMap>& maps, const DensityMatrix& gamma,
                                  std::size_t dS) {
  const std::size_t K = maps.size();
  const std::size_t dG = gamma.dim();
  for (const auto& m : maps)
    if (m.d_in() != dS * dG || m.d_out() != dS * dG)
      throw std::invalid_argument("ancilla operations must act on dS * dGamma");
  if (K == 0) return ComplexMatrix::Ones(1, 1);

  // Registers [X_1, ..., X_K, Gamma]; X_i holds A_i and then B_i.
  std::vector<std::size_t> dims = uniform_dims(dS, K);
  dims.push_back(dG);
  const std::size_t na = ipow(dS, K);
  const std::size_t rest = na / dS;
  std::vector<std::vector<ComplexMatrix>> lifted(K);
  std::vector<std::vector<std::size_t>> fwd(K), back(K);
  for (std::size_t i = 0; i < K; ++i) {
    for (const auto& op : maps[i].operators()) lifted[i].push_back(kron(op, identity(rest)));
    fwd[i] = {i, K};
    for (std::size_t p = 0; p < K; ++p)
      if (p != i) fwd[i].push_back(p);
    back[i].assign(K + 1, 0);
    for (std::size_t p = 0; p <= K; ++p) back[i][fwd[i][p]] = p;
  }
  std::vector<std::size_t> front_dims(K + 1);

  // Choi in [A_1..A_K, B_1..B_K] order.
  ComplexMatrix lam = ComplexMatrix::Zero(static_cast<Eigen::Index>(na * na), static_cast<Eigen::Index>(na * na));
  const std::vector<std::size_t> keep_x = [&] {
    std::vector<std::size_t> v(K);
    for (std::size_t p = 0; p < K; ++p) v[p] = p;
    return v;
  }();
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t b = 0; b < na; ++b) {
      ComplexMatrix unit = ComplexMatrix::Zero(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(na));
      unit(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 1.0;
      ComplexMatrix y = kron(unit, gamma.matrix());
      for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t p = 0; p <= K; ++p) front_dims[p] = dims[fwd[i][p]];
        ComplexMatrix z = permute_operator(y, dims, fwd[i]);
        ComplexMatrix acc = ComplexMatrix::Zero(z.rows(), z.cols());
        for (std::size_t mu = 0; mu < lifted[i].size(); ++mu)
          acc += maps[i].weights()[mu] * (lifted[i][mu] * z * lifted[i][mu].adjoint());
        y = permute_operator(acc, front_dims, back[i]);
      }
      const ComplexMatrix out = partial_trace(y, dims, keep_x);
      const auto n = static_cast<Eigen::Index>(na);
      lam.block(static_cast<Eigen::Index>(a) * n, static_cast<Eigen::Index>(b) * n, n, n) = out;
    }
  // Reorder [A_1..A_K, B_1..B_K] to [A_K, B_K, ..., A_1, B_1].
  std::vector<std::size_t> order;
  for (std::size_t i = K; i >= 1; --i) {
    order.push_back(i - 1);
    order.push_back(K + i - 1);
  }
  return permute_operator(lam, uniform_dims(dS, 2 * K), order);
}

ContractResult contract(const ProcessTensor& p, const OperationSequence& ops) {
  const std::size_t dS = p.dS(), k = p.k();
  const std::size_t r = ipow(dS, 2 * k);
  ComplexMatrix lam;
  if (ops.tester) {
    lam = *ops.tester;
    if (lam.rows() != static_cast<Eigen::Index>(r) || lam.cols() != static_cast<Eigen::Index>(r))
      throw std::invalid_argument("tester must act on dS^(2k)");
  } else {
    if (ops.maps.size() != k) throw std::invalid_argument("need exactly k operations");
    lam = ops.ancilla ? tester_with_ancilla(ops.maps, *ops.ancilla, dS) : tester_from_maps(ops.maps, dS);
  }
  const auto n = static_cast<Eigen::Index>(r);
  const auto& y = p.choi();
  ComplexMatrix out(static_cast<Eigen::Index>(dS), static_cast<Eigen::Index>(dS));
  const double scale = std::pow(static_cast<double>(dS), static_cast<double>(k));
  for (Eigen::Index o = 0; o < static_cast<Eigen::Index>(dS); ++o)
    for (Eigen::Index q = 0; q < static_cast<Eigen::Index>(dS); ++q)
      out(o, q) = scale * y.block(o * n, q * n, n, n).cwiseProduct(lam).sum();
  ContractResult res{out, std::nullopt};
  if (ops.final_effect) {
    const auto& e = *ops.final_effect;
    if (e.rows() != static_cast<Eigen::Index>(dS) || e.cols() != static_cast<Eigen::Index>(dS))
      throw std::invalid_argument("final effect must act on the system");
    res.probability = (e * out).trace().real();
  }
  return res;
}

// ---------------------------------------------------------------- marginals

ChoiMatrix marginal(const ProcessTensor& p, std::size_t step) {
  const std::size_t k = p.k(), dS = p.dS();
  if (step < 1 || step > k) throw std::invalid_argument("marginal: step out of range");
  const std::vector<std::size_t> keep{output_pos(k, step), pos_b(k, step)};
  ComplexMatrix m = partial_trace(p.choi(), uniform_dims(dS, 2 * k + 1), keep);
  m *= static_cast<double>(dS);
  return ChoiMatrix(std::move(m), dS, dS, ChoiNormalization::unnormalized);
}

DensityMatrix initial_state(const ProcessTensor& p) {
  const std::size_t k = p.k(), dS = p.dS();
  const std::vector<std::size_t> keep{k == 0 ? std::size_t{0} : pos_a(k, 1)};
  ComplexMatrix m = partial_trace(p.choi(), uniform_dims(dS, 2 * k + 1), keep);
  return DensityMatrix::trusted(std::move(m), SubsystemLayout::single(dS, k == 0 ? "S_out" : "A1"));
}

ProcessTensor product_of_marginals(const ProcessTensor& p) {
  std::vector<ComplexMatrix> steps;
  for (std::size_t i = 1; i <= p.k(); ++i) steps.push_back(marginal(p, i).matrix());
  return markov_unchecked(initial_state(p).matrix(), steps, p.dS());
}

ProcessTensor coarse_grain(const ProcessTensor& p, const std::set<std::size_t>& drop) {
  for (auto i : drop)
    if (i < 1 || i > p.k()) throw std::invalid_argument("coarse_grain: step index out of range");
  const std::size_t dS = p.dS();
  ComplexMatrix cur = p.choi();
  std::size_t k = p.k();
  for (auto it = drop.rbegin(); it != drop.rend(); ++it) {
    const std::size_t i = *it;
    const std::size_t h = ipow(dS, pos_a(k, i));
    const std::size_t l = ipow(dS, 2 * (i - 1));
    const std::size_t mid = dS * dS;
    const auto nd = static_cast<Eigen::Index>(h * l);
    ComplexMatrix next = ComplexMatrix::Zero(nd, nd);
    for (std::size_t hr = 0; hr < h; ++hr)
      for (std::size_t hc = 0; hc < h; ++hc)
        for (std::size_t a = 0; a < dS; ++a)
          for (std::size_t b = 0; b < dS; ++b) {
            const auto row0 = static_cast<Eigen::Index>((hr * mid + a * dS + a) * l);
            const auto col0 = static_cast<Eigen::Index>((hc * mid + b * dS + b) * l);
            const auto L = static_cast<Eigen::Index>(l);
            next.block(static_cast<Eigen::Index>(hr) * L, static_cast<Eigen::Index>(hc) * L, L, L) +=
                cur.block(row0, col0, L, L);
          }
    const cplx tr = next.trace();
    if (std::abs(tr) < kEigenCutoff) throw std::runtime_error("coarse_grain: contraction has zero trace");
    cur = next / tr;
    --k;
  }
  return ProcessTensor::trusted(std::move(cur), dS, k);
}

}  // namespace qproc
