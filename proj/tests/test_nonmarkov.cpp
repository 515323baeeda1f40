#include "qproc/nonmarkov.hpp"

#include <doctest.h>

#include <cmath>

using namespace qproc;

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

ProcessTensor random_markov(std::size_t k, RngStream& rng) {
  std::vector<ChoiMatrix> steps;
  for (std::size_t i = 0; i < k; ++i) steps.push_back(choi_of(random_channel(2, 1 + i % 4, rng)));
  return markov_process(random_state(2, rng), steps);
}

ProcessTensor sampled(std::size_t dE, std::size_t k, RngStream& rng) {
  ProcessConfig cfg;
  cfg.dS = 2;
  cfg.dE = dE;
  cfg.k = k;
  return sample_process(cfg, rng);
}

double random_purity_oracle(double dS, double dE, double k) {
  const double dse = dS * dE;
  return (dE * dE - 1.0) / (dE * (dse + 1.0)) * std::pow((dE * dE - 1.0) / (dse * dse - 1.0), k) + 1.0 / dE;
}

}  // namespace

TEST_CASE("trace-distance measures") {
  const auto noisy = ProcessTensor(identity(8) / 8.0, 2, 1);
  CHECK(n1_maxmixed(noisy) == doctest::Approx(0.0));
  CHECK(n2_maxmixed(noisy) == doctest::Approx(0.0));
  ComplexMatrix pure = ComplexMatrix::Zero(2, 2);
  pure(0, 0) = 1.0;
  const auto state = ProcessTensor(pure, 2, 0);
  CHECK(n1_maxmixed(state) == doctest::Approx(0.5));
  CHECK(n2_maxmixed(state) == doctest::Approx(0.5 * std::sqrt(0.5)));

  RngStream rng(30, 1);
  int tighter = 0;
  for (int s = 0; s < 200; ++s) {
    const auto p = sampled(2, 1, rng);
    const double n1 = n1_maxmixed(p), n2 = n2_maxmixed(p), nm = n1_marginals(p);
    CHECK(n1 <= 1.0 - 1.0 / 8.0 + 1e-12);
    CHECK(n1 >= 0.0);
    CHECK(n2 <= n1 + 1e-12);
    CHECK((nm >= 0.0 && nm <= 1.0));
    if (nm <= n1) ++tighter;
  }
  // empirical, not a theorem
  CHECK(tighter >= 180);
}

TEST_CASE("markov processes have zero measures") {
  RngStream rng(30, 2);
  for (std::size_t k : {1u, 2u, 3u}) {
    const auto m = random_markov(k, rng);
    CHECK(n1_marginals(m) < 1e-9);
    CHECK(n_rel(m) < 1e-8);
    const auto r = nonmarkov_report(m);
    CHECK(diamond_interval(r.n1_marginals, 2, k).upper < 1e-6);
  }
  const auto p = sampled(4, 1, rng);
  CHECK(n_rel(p) > 1e-6);
  CHECK(n1_marginals(p) > 1e-6);
}

TEST_CASE("relative-entropy measure") {
  RngStream rng(30, 3);
  for (int s = 0; s < 10; ++s) {
    const auto p = sampled(2 + s % 3, 1 + s % 2, rng);
    const double nr = n_rel(p);
    const double direct = relative_entropy(DensityMatrix(p.choi()), DensityMatrix(product_of_marginals(p).choi()));
    CHECK(nr == doctest::Approx(direct).epsilon(1e-8));
    // Pinsker with the entropy in bits
    const double d = n1_marginals(p);
    CHECK(nr >= 2.0 * d * d / std::log(2.0) - 1e-9);
  }
}

TEST_CASE("diamond interval") {
  const auto zero = diamond_interval(0.0, 2, 1);
  CHECK(zero.lower == 0.0);
  CHECK(zero.upper == 0.0);
  const auto up = diamond_interval(0.1, 2, 1);
  CHECK(up.upper == doctest::Approx(0.8));
  CHECK(up.lower == 0.0);
  CHECK(up.lower_provenance == IntervalProvenance::n1_upper_bound);
  const auto exact = diamond_interval(0.1, 2, 1, true);
  CHECK(exact.lower == doctest::Approx(0.1));
  CHECK(exact.lower_provenance == IntervalProvenance::exact_n1);
  CHECK(exact.lower <= exact.upper);
}

TEST_CASE("average purity of random interactions") {
  CHECK(avg_purity_random({2, 2, 1, Interaction::random}) == doctest::Approx(0.56));
  CHECK(avg_purity_random({2, 4, 1, Interaction::random}) == doctest::Approx(0.349206349206).epsilon(1e-10));
  for (std::size_t dS : {2u, 3u})
    for (std::size_t dE : {2u, 5u, 64u})
      for (std::size_t k : {0u, 1u, 3u}) {
        const BoundParams p{dS, dE, k, Interaction::random};
        const double oracle = random_purity_oracle(dS, dE, k);
        CHECK(avg_purity_random(p) == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(avg_purity_random_excess(p) ==
              doctest::Approx(oracle - std::pow(dS, -(2.0 * k + 1.0))).epsilon(1e-9));
      }
  CHECK(avg_purity_random({2, 1 << 20, 1, Interaction::random}) == doctest::Approx(0.125).epsilon(1e-5));
  CHECK(avg_purity_random({2, 3, 200, Interaction::random}) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK_THROWS_AS(avg_purity_random({2, 2, 1, Interaction::constant}), std::invalid_argument);
  // the constant ensemble goes through the exact permutation sum
  CHECK(avg_purity({2, 3, 0, Interaction::constant}) == doctest::Approx(5.0 / 7.0));
}

TEST_CASE("typicality bound") {
  const auto b = bound_Bk({2, 2, 1, Interaction::random});
  CHECK(b.branch == 1);
  CHECK(b.value == doctest::Approx(0.788068).epsilon(1e-6));
  CHECK(b.avg_purity == doctest::Approx(0.56));
  // substitute by hand: y = 3/4, x = (1/4)(7/4)
  CHECK(b.value == doctest::Approx(0.5 * (std::sqrt(2.0 * 0.56 - 7.0 / 16.0) + 0.75)));

  const auto big = bound_Bk({2, 1 << 20, 1, Interaction::random});
  CHECK(big.branch == 2);
  CHECK(big.value < 5e-3);
  CHECK(bound_Bk({2, 2, 30, Interaction::random}).value == doctest::Approx(1.0).epsilon(1e-6));

  // both branches meet at dE = dS^(2k+1)
  const double purity = 0.2;
  const double branch1_at_d = 0.5 * (std::sqrt(8.0 * purity - 1.0) + 0.0);
  CHECK(bound_Bk_from_purity(2, 8, 1, purity).value == doctest::Approx(branch1_at_d).epsilon(1e-12));
  CHECK(bound_Bk_from_purity(2, 8, 1, purity).branch == 2);

  for (std::size_t dE : {4u, 8u, 16u, 32u, 64u, 128u}) {
    const auto lo = bound_Bk({2, dE, 1, Interaction::random});
    const auto hi = bound_Bk({2, dE * 2, 1, Interaction::random});
    CHECK(hi.value < lo.value);
  }
}

TEST_CASE("sampled means sit below the bound") {
  RngStream rng(30, 4);
  for (std::size_t dE : {2u, 8u}) {
    std::vector<double> v;
    for (int s = 0; s < 40; ++s) v.push_back(n1_maxmixed(sampled(dE, 1, rng)));
    CHECK(mean_and_stderr(v).mean <= bound_Bk({2, dE, 1, Interaction::random}).value);
  }
}

TEST_CASE("concentration tail") {
  const BoundParams p{2, 2, 1, Interaction::random};
  CHECK(concentration_constant(p) == doctest::Approx(2.0 / 9.0));
  CHECK(concentration_tail(p, 1.0) == doctest::Approx(std::exp(-2.0 / 9.0)));
  CHECK(concentration_tail(p, 1.0) == doctest::Approx(0.8007).epsilon(1e-4));
  CHECK(concentration_tail(p, 1e-9) == doctest::Approx(1.0));
  CHECK(concentration_constant({2, 2, 1, Interaction::constant}) == doctest::Approx(1.0 / 9.0));
  CHECK(concentration_tail({2, 8, 1, Interaction::random}, 1.0) < concentration_tail(p, 1.0));
  CHECK(concentration_tail(p, 2.0) < concentration_tail(p, 1.0));
  CHECK_THROWS_AS(concentration_tail(p, 0.0), std::invalid_argument);
}
