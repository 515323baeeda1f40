#include "qproc/nonmarkov.hpp"
#include "qproc/process.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace qproc;
using oracle::embed_step;

namespace {

KrausMap random_channel(std::size_t d, std::size_t rank, RngStream& rng) {
  const ComplexMatrix u = haar_unitary(d * rank, rng).matrix();
  std::vector<ComplexMatrix> ks;
  for (std::size_t mu = 0; mu < rank; ++mu) {
    ComplexMatrix k(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) k(i, j) = u(i * rank + mu, j * rank);
    ks.push_back(k);
  }
  return KrausMap(ks);
}

DensityMatrix random_state(std::size_t d, RngStream& rng) {
  const ComplexMatrix g = ginibre(d, rng);
  ComplexMatrix r = g * g.adjoint();
  r /= r.trace();
  return DensityMatrix(r);
}

DensityMatrix ket0(std::size_t d) {
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  m(0, 0) = 1.0;
  return DensityMatrix(m);
}

// Discards the input and prepares |psi><psi|.
KrausMap replacement(const ComplexVector& psi) {
  std::vector<ComplexMatrix> ks;
  for (Eigen::Index j = 0; j < psi.size(); ++j) {
    ComplexMatrix k = ComplexMatrix::Zero(psi.size(), psi.size());
    k.col(j) = psi;
    ks.push_back(k);
  }
  return KrausMap(ks);
}

OperationSequence with_maps(std::vector<KrausMap> maps) {
  OperationSequence ops;
  ops.maps = std::move(maps);
  return ops;
}

// Dense construction: rho_ES (x) Psi^{(x)k} on [E, S, A_k, B_k, ..., A_1, B_1],
// with explicit swap matrices S <-> A_i between the unitaries.
ComplexMatrix dense_process(const std::vector<ComplexMatrix>& us, std::size_t dS, std::size_t dE) {
  const std::size_t k = us.size() - 1;
  ComplexMatrix state = ket0(dE * dS).matrix();
  for (std::size_t i = 0; i < k; ++i) state = kron(state, max_entangled(dS, true));
  std::vector<std::size_t> dims{dE};
  for (std::size_t i = 0; i < 2 * k + 1; ++i) dims.push_back(dS);
  const std::size_t rest = static_cast<std::size_t>(state.rows()) / (dE * dS);
  auto apply_u = [&](const ComplexMatrix& u) {
    const ComplexMatrix big = kron(u, identity(rest));
    state = big * state * big.adjoint();
  };
  apply_u(us[0]);
  for (std::size_t i = 1; i <= k; ++i) {
    // A_i sits at register 2 + 2(k - i)
    std::vector<std::size_t> order(dims.size());
    for (std::size_t p = 0; p < order.size(); ++p) order[p] = p;
    std::swap(order[1], order[2 + 2 * (k - i)]);
    state = permute_operator(state, dims, order);
    apply_u(us[i]);
  }
  std::vector<std::size_t> keep;
  for (std::size_t p = 1; p < dims.size(); ++p) keep.push_back(p);
  return partial_trace(state, dims, keep);
}


}  // namespace

TEST_CASE("sampled process basics") {
  const auto trivial = process_from_unitaries({identity(6)}, 2, 3);
  CHECK((trivial.choi() - ket0(2).matrix()).norm() < 1e-14);
  CHECK(trivial.leg_layout().labels() == std::vector<std::string>{"S_out"});
  CHECK(process_leg_layout(2, 2).labels() == std::vector<std::string>{"S_out", "A2", "B2", "A1", "B1"});

  RngStream rng(20, 1);
  for (std::size_t k : {1u, 2u}) {
    for (auto mode : {Interaction::random, Interaction::constant}) {
      ProcessConfig cfg;
      cfg.dS = 2;
      cfg.dE = 3;
      cfg.k = k;
      cfg.interaction = mode;
      const auto p = sample_process(cfg, rng);
      CHECK(std::abs(p.choi().trace() - cplx(1.0)) < 1e-9);
      CHECK(hermitian_eigenvalues(p.choi()).minCoeff() > -1e-9);
      CHECK(p.causality_residual() < 1e-8);
      CHECK_NOTHROW(ProcessTensor(p.choi(), 2, k));
    }
  }
  ProcessConfig seeded;
  seeded.seed = RngStream(5, 5);
  CHECK(sample_process(seeded).choi() == sample_process(seeded).choi());

  ProcessConfig huge;
  huge.dE = 64;
  huge.k = 3;
  huge.max_vector_length = 1000;
  CHECK_THROWS_AS(sample_process(huge, rng), UnsupportedRegime);
  ComplexMatrix acausal = ComplexMatrix::Zero(8, 8);
  acausal(0, 0) = 1.0;
  CHECK_THROWS_AS(ProcessTensor(acausal, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(ProcessTensor(identity(4) / 4.0, 2, 1), std::invalid_argument);
}

TEST_CASE("sampled purities") {
  RngStream rng(20, 2);
  std::vector<double> zero, one;
  for (int s = 0; s < 2000; ++s) {
    ProcessConfig cfg;
    cfg.dS = 2;
    cfg.dE = 3;
    cfg.k = 0;
    zero.push_back(purity(sample_process(cfg, rng).choi()));
  }
  const auto e0 = mean_and_stderr(zero);
  CHECK(std::abs(e0.mean - 5.0 / 7.0) < 3.0 * e0.std_error);
  for (int s = 0; s < 600; ++s) {
    ProcessConfig cfg;
    cfg.dS = 2;
    cfg.dE = 4;
    cfg.k = 1;
    one.push_back(purity(sample_process(cfg, rng).choi()));
  }
  const auto e1 = mean_and_stderr(one);
  CHECK(std::abs(e1.mean - 0.349206349206) < 3.0 * e1.std_error);
}

TEST_CASE("average random process is maximally noisy") {
  RngStream rng(20, 3);
  const int n = 2000;
  ComplexMatrix sum = ComplexMatrix::Zero(8, 8);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(8, 8);
  for (int s = 0; s < n; ++s) {
    ProcessConfig cfg;
    cfg.dS = 2;
    cfg.dE = 8;
    cfg.k = 1;
    const ComplexMatrix c = sample_process(cfg, rng).choi();
    sum += c;
    sum_sq += c.cwiseAbs2();
  }
  const ComplexMatrix mean = sum / n;
  int outside = 0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const double se = std::sqrt((sum_sq(i, j) / n - std::norm(mean(i, j))) / n);
      if (std::abs(mean(i, j) - (i == j ? 0.125 : 0.0)) > 3.0 * se) ++outside;
    }
  // 64 entries at 3 standard errors
  CHECK(outside <= 2);
}

TEST_CASE("pure-state pipeline equals the dense construction") {
  RngStream rng(20, 4);
  for (std::size_t k : {1u, 2u}) {
    std::vector<ComplexMatrix> us;
    for (std::size_t i = 0; i <= k; ++i) us.push_back(haar_unitary(4, rng).matrix());
    const auto p = process_from_unitaries(us, 2, 2);
    const ComplexMatrix dense = dense_process(us, 2, 2);
    CHECK((p.choi() - dense).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("markov processes") {
  RngStream rng(20, 5);
  const auto sigma = random_state(2, rng);
  const auto id_proc = markov_process(ket0(2), {choi_of(identity_channel(2))});
  const ComplexVector psi = haar_unitary(2, rng).matrix().col(0);
  const auto prepared = contract(id_proc, with_maps({replacement(psi)}));
  CHECK((prepared.output - psi * psi.adjoint()).norm() < 1e-12);

  const auto noisy = markov_process(DensityMatrix::maximally_mixed(2),
                                    {choi_of(depolarizing_channel(2, 0.0)), choi_of(depolarizing_channel(2, 0.0))});
  CHECK((noisy.choi() - identity(32) / 32.0).norm() < 1e-14);

  ComplexMatrix leaky = identity(4) * 0.25;
  CHECK_THROWS_AS(markov_process(sigma, {ChoiMatrix(leaky, 2, 2, ChoiNormalization::unnormalized)}),
                  std::invalid_argument);

  // fresh environment for every step
  for (std::size_t k : {1u, 2u}) {
    const std::size_t de = 2, ds = 2;
    std::vector<ComplexMatrix> local, global;
    for (std::size_t i = 0; i <= k; ++i) {
      local.push_back(haar_unitary(de * ds, rng).matrix());
      global.push_back(embed_step(local.back(), i, k, de, ds));
    }
    const auto fresh = process_from_unitaries(global, ds, static_cast<std::size_t>(std::pow(de, k + 1)));
    auto dilated = [&](const ComplexMatrix& u) {
      std::vector<ComplexMatrix> ks;
      for (std::size_t mu = 0; mu < de; ++mu) ks.push_back(u.block(mu * ds, 0, ds, ds));
      return KrausMap(ks);
    };
    const ComplexMatrix rho0 = apply_kraus(dilated(local[0]), ket0(ds));
    std::vector<ChoiMatrix> steps;
    for (std::size_t i = 1; i <= k; ++i) steps.push_back(choi_of(dilated(local[i])));
    const auto markov = markov_process(DensityMatrix(rho0), steps);
    CHECK((fresh.choi() - markov.choi()).norm() < 1e-8);
    CHECK(n1_marginals(fresh) < 1e-8);
  }
}

TEST_CASE("contraction") {
  RngStream rng(20, 6);
  const auto rho0 = random_state(2, rng);
  std::vector<ComplexMatrix> vs;
  std::vector<ChoiMatrix> steps;
  for (int i = 0; i < 3; ++i) {
    vs.push_back(haar_unitary(2, rng).matrix());
    steps.push_back(choi_of(unitary_channel(vs.back())));
  }
  const auto p = markov_process(rho0, steps);
  const ComplexMatrix v = vs[2] * vs[1] * vs[0];
  const auto out = contract(p, with_maps({identity_channel(2), identity_channel(2), identity_channel(2)}));
  CHECK((out.output - v * rho0.matrix() * v.adjoint()).norm() < 1e-12);

  // complete final POVM after TP operations
  std::vector<KrausMap> tp{random_channel(2, 2, rng), random_channel(2, 3, rng), random_channel(2, 1, rng)};
  double total = 0.0;
  for (int e = 0; e < 2; ++e) {
    auto ops = with_maps(tp);
    ops.final_effect = ket0(2).matrix();
    if (e == 1) *ops.final_effect = identity(2) - *ops.final_effect;
    const auto r = contract(p, ops);
    REQUIRE(r.probability);
    CHECK(*r.probability >= -1e-12);
    total += *r.probability;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

  // causal break after step 1: the output cannot depend on what came before
  const ComplexVector psi = haar_unitary(2, rng).matrix().col(0);
  const ComplexMatrix reference =
      contract(p, with_maps({random_channel(2, 2, rng), replacement(psi), identity_channel(2)})).output;
  for (int trial = 0; trial < 5; ++trial) {
    const auto o = contract(p, with_maps({random_channel(2, 2, rng), replacement(psi), identity_channel(2)}));
    CHECK((o.output - reference).norm() < 1e-9);
  }

  // multilinearity through weighted maps
  ProcessConfig cfg;
  cfg.k = 2;
  const auto q = sample_process(cfg, rng);
  const auto m1 = random_channel(2, 2, rng), m2 = random_channel(2, 2, rng), fixed = random_channel(2, 2, rng);
  // halve every operator so the union stays trace non-increasing
  std::vector<ComplexMatrix> ks;
  for (const auto* m : {&m1, &m2})
    for (const auto& op : m->operators()) ks.push_back(op / std::sqrt(2.0));
  const KrausMap mix(ks, {0.6, 0.6, -3.4, -3.4});
  const ComplexMatrix lhs = contract(q, with_maps({mix, fixed})).output;
  const ComplexMatrix rhs =
      0.3 * contract(q, with_maps({m1, fixed})).output - 1.7 * contract(q, with_maps({m2, fixed})).output;
  CHECK((lhs - rhs).norm() < 1e-12);

  // precontracted tester gives the same output
  auto tested = with_maps({});
  tested.tester = tester_from_maps({m1, fixed}, 2);
  CHECK((contract(q, tested).output - contract(q, with_maps({m1, fixed})).output).norm() < 1e-12);

  CHECK_THROWS_AS(contract(q, with_maps({m1})), std::invalid_argument);
  CHECK_THROWS_AS(contract(q, with_maps({random_channel(3, 1, rng), m1})), std::invalid_argument);
}

TEST_CASE("contraction with a shared ancilla matches direct evolution") {
  RngStream rng(20, 7);
  const std::size_t ds = 2, de = 2, dg = 2, k = 2;
  std::vector<ComplexMatrix> us;
  for (std::size_t i = 0; i <= k; ++i) us.push_back(haar_unitary(ds * de, rng).matrix());
  std::vector<KrausMap> maps{random_channel(ds * dg, 2, rng), random_channel(ds * dg, 3, rng)};
  const auto gamma = random_state(dg, rng);
  const auto p = process_from_unitaries(us, ds, de);

  // [E, S, Gamma]
  ComplexMatrix state = kron(ket0(de * ds).matrix(), gamma.matrix());
  auto evolve = [&](const ComplexMatrix& u) {
    const ComplexMatrix big = kron(u, identity(dg));
    state = big * state * big.adjoint();
  };
  evolve(us[0]);
  for (std::size_t i = 1; i <= k; ++i) {
    ComplexMatrix next = ComplexMatrix::Zero(state.rows(), state.cols());
    for (const auto& kk : maps[i - 1].operators()) {
      const ComplexMatrix big = kron(identity(de), kk);
      next += big * state * big.adjoint();
    }
    state = next;
    evolve(us[i]);
  }
  const std::vector<std::size_t> dims{de, ds, dg}, keep{1};
  const ComplexMatrix direct = partial_trace(state, dims, keep);

  OperationSequence ops;
  ops.maps = maps;
  ops.ancilla = gamma;
  CHECK((contract(p, ops).output - direct).norm() < 1e-10);

  const auto trivial = DensityMatrix::maximally_mixed(1);
  std::vector<KrausMap> plain{random_channel(ds, 2, rng), random_channel(ds, 2, rng)};
  CHECK((tester_with_ancilla(plain, trivial, ds) - tester_from_maps(plain, ds)).norm() < 1e-12);
}

TEST_CASE("marginals") {
  RngStream rng(20, 8);
  const auto rho0 = random_state(2, rng);
  std::vector<ChoiMatrix> steps;
  for (int i = 0; i < 3; ++i) steps.push_back(choi_of(random_channel(2, 2, rng)));
  const auto p = markov_process(rho0, steps);
  for (std::size_t i = 1; i <= 3; ++i) CHECK((marginal(p, i).matrix() - steps[i - 1].matrix()).norm() < 1e-9);
  CHECK((initial_state(p).matrix() - rho0.matrix()).norm() < 1e-12);
  CHECK((product_of_marginals(p).choi() - p.choi()).norm() < 1e-9);
  CHECK_THROWS_AS(marginal(p, 0), std::invalid_argument);
  CHECK_THROWS_AS(marginal(p, 4), std::invalid_argument);

  // step-k marginal is the (S_out, B_k) reduction, scaled to TP
  const auto lay = p.leg_layout();
  const ComplexMatrix direct = partial_trace(p.choi(), lay, {"S_out", "B3"}) * 2.0;
  CHECK((marginal(p, 3).matrix() - direct).norm() < 1e-12);

  ProcessConfig cfg;
  cfg.k = 2;
  cfg.dE = 3;
  cfg.interaction = Interaction::constant;
  const auto q = sample_process(cfg, rng);
  for (std::size_t i = 1; i <= 2; ++i) CHECK(marginal(q, i).is_tp(1e-8));
}

TEST_CASE("product of marginals is the closest markov process") {
  RngStream rng(20, 9);
  ProcessConfig cfg;
  cfg.k = 1;
  cfg.dE = 4;
  const auto p = sample_process(cfg, rng);
  const auto pm = product_of_marginals(p);
  const double best = relative_entropy(DensityMatrix(p.choi()), DensityMatrix(pm.choi()));
  CHECK(best > 1e-6);
  CHECK(best == doctest::Approx(n_rel(p)).epsilon(1e-8));
  for (int trial = 0; trial < 20; ++trial) {
    const auto other = markov_process(random_state(2, rng), {choi_of(random_channel(2, 4, rng))});
    CHECK(best <= relative_entropy(DensityMatrix(p.choi()), DensityMatrix(other.choi())) + 1e-9);
  }
  const auto markov = markov_process(random_state(2, rng), {choi_of(random_channel(2, 4, rng))});
  CHECK(relative_entropy(DensityMatrix(markov.choi()), DensityMatrix(product_of_marginals(markov).choi())) <
        1e-9);
}

TEST_CASE("coarse graining") {
  RngStream rng(20, 10);
  ProcessConfig cfg;
  cfg.k = 2;
  const auto p = sample_process(cfg, rng);
  CHECK((coarse_grain(p, {}).choi() - p.choi()).norm() < 1e-14);
  CHECK_THROWS_AS(coarse_grain(p, {3}), std::invalid_argument);

  const auto rho0 = random_state(2, rng);
  std::vector<ComplexMatrix> vs;
  std::vector<ChoiMatrix> steps;
  for (int i = 0; i < 2; ++i) {
    vs.push_back(haar_unitary(2, rng).matrix());
    steps.push_back(choi_of(unitary_channel(vs.back())));
  }
  const auto m = markov_process(rho0, steps);
  const ComplexMatrix v = vs[1] * vs[0];
  const auto state = coarse_grain(m, {1, 2});
  CHECK(state.k() == 0);
  CHECK((state.choi() - v * rho0.matrix() * v.adjoint()).norm() < 1e-12);

  // dropping one step equals the process with that step's identity contracted
  const auto one = coarse_grain(p, {1});
  CHECK(one.k() == 1);
  CHECK(one.causality_residual() < 1e-8);
  const auto id = identity_channel(2);
  const auto r = random_channel(2, 2, rng);
  CHECK((contract(one, with_maps({r})).output - contract(p, with_maps({id, r})).output).norm() < 1e-10);

  for (int trial = 0; trial < 50; ++trial) {
    ProcessConfig c;
    c.k = 2;
    c.dE = 2 + trial % 3;
    c.interaction = trial % 2 ? Interaction::constant : Interaction::random;
    const auto fine = sample_process(c, rng);
    const double n1 = n1_maxmixed(fine);
    for (const auto& drop : std::vector<std::set<std::size_t>>{{1}, {2}, {1, 2}})
      CHECK(n1_maxmixed(coarse_grain(fine, drop)) <= n1 + 1e-9);
  }
}

TEST_CASE("choi archives") {
  RngStream rng(20, 11);
  ProcessConfig cfg;
  const auto p = sample_process(cfg, rng);
  const ChoiDumpHeader h{2, 2, 1, 99, "random"};
  std::stringstream bin;
  write_choi_binary(bin, p.choi(), h);
  const auto [h2, m2] = read_choi_binary(bin);
  CHECK(h2.dS == 2);
  CHECK(h2.seed == 99);
  CHECK(h2.mode == "random");
  CHECK(m2 == p.choi());

  std::string raw;
  {
    std::stringstream again;
    write_choi_binary(again, p.choi(), h);
    raw = again.str();
  }
  std::stringstream truncated(raw.substr(0, raw.size() - 5));
  CHECK_THROWS(read_choi_binary(truncated));
  std::stringstream garbage("not a dump");
  CHECK_THROWS(read_choi_binary(garbage));

  std::stringstream csv;
  write_choi_csv(csv, p.choi(), h);
  const std::string text = csv.str();
  CHECK(text.rfind("# dS=2\n", 0) == 0);
  CHECK(text.find("# mode=random\nrow,col,re,im\n") != std::string::npos);
}
