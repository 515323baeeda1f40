#include "qproc/haar.hpp"
#include "qproc/weingarten.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qproc;

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 5; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  CHECK(stream_id("exp", 1) != stream_id("exp", 2));
  CHECK(stream_id("exp", 1) != stream_id("exq", 1));
  RngStream u(1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK((x > 0.0 && x <= 1.0));
  }
}

TEST_CASE("ginibre moments") {
  RngStream rng(2, 1);
  const int draws = 10000;
  double sum_re = 0, sum_im = 0, sum_sq = 0, sum_sq2 = 0;
  for (int i = 0; i < draws; ++i) {
    const ComplexMatrix g = ginibre(2, rng);
    for (const auto& z : g.reshaped()) {
      sum_re += z.real();
      sum_im += z.imag();
      sum_sq += std::norm(z);
      sum_sq2 += std::norm(z) * std::norm(z);
    }
  }
  const double n = 4.0 * draws;
  CHECK(std::abs(sum_re / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(sum_im / n) < 4.0 / std::sqrt(n));
  const double mean = sum_sq / n;
  const double se = std::sqrt((sum_sq2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0) < 3.0 * se);

  RngStream r1(9, 9), r2(9, 9);
  CHECK(ginibre(3, r1) == ginibre(3, r2));
}

TEST_CASE("haar unitaries") {
  RngStream rng(3, 1);
  const auto u1 = haar_unitary(1, rng);
  CHECK(std::abs(u1.matrix()(0, 0)) == doctest::Approx(1.0));

  const int samples = 10000;
  ComplexMatrix mean = ComplexMatrix::Zero(4, 4), mean_left = ComplexMatrix::Zero(4, 4);
  ComplexMatrix twirl = ComplexMatrix::Zero(4, 4);
  Eigen::MatrixXd twirl_sq = Eigen::MatrixXd::Zero(4, 4);
  const ComplexMatrix v = haar_unitary(4, rng).matrix();
  ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
  rho(0, 0) = 1.0;
  double worst_defect = 0.0;
  for (int i = 0; i < 2 * samples; ++i) {
    const ComplexMatrix u = haar_unitary(4, rng).matrix();
    worst_defect = std::max(worst_defect, unitarity_defect(u));
    if (i < samples) {
      mean += u;
      mean_left += v * u;
    }
    const ComplexMatrix t = u * rho * u.adjoint();
    twirl += t;
    twirl_sq += t.cwiseAbs2();
  }
  CHECK(worst_defect < 1e-9);
  mean /= samples;
  mean_left /= samples;
  CHECK(mean.cwiseAbs().maxCoeff() < 3.0 / std::sqrt(samples));
  CHECK((mean - mean_left).cwiseAbs().maxCoeff() < 6.0 / std::sqrt(samples));
  const double n = 2.0 * samples;
  twirl /= n;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double var = twirl_sq(i, j) / n - std::norm(twirl(i, j));
      const double target = i == j ? 0.25 : 0.0;
      CHECK(std::abs(twirl(i, j) - target) <= 3.0 * std::sqrt(var / n) + 1e-12);
    }
}

TEST_CASE("monte carlo twirls") {
  RngStream rng(4, 1);
  ComplexMatrix rho = ComplexMatrix::Zero(3, 3);
  rho(1, 1) = 0.5;
  rho(2, 2) = 0.5;
  rho(1, 2) = rho(2, 1) = 0.25;
  const auto one = mc_twirl(1, rho, 4000, rng);
  const ComplexMatrix expect1 = identity(3) / 3.0;
  CHECK(((one.mean - expect1).cwiseAbs().array() <= 3.0 * one.std_error.array() + 1e-12).all());

  ComplexMatrix x = ComplexMatrix::Zero(4, 4);
  x(0, 0) = 1.0;
  const auto two = mc_twirl(2, x, 6000, rng);
  const ComplexMatrix expect2 = (identity(4) + swap_operator(2)) / 6.0;
  CHECK((analytic_twirl(2, x, 2) - expect2).norm() < 1e-14);
  CHECK(((two.mean - expect2).cwiseAbs().array() <= 3.0 * two.std_error.array() + 1e-12).all());

  const auto inv = mc_twirl(2, swap_operator(3), 200, rng);
  CHECK((inv.mean - swap_operator(3)).norm() < 1e-10);

  for (std::size_t d : {2u, 3u}) {
    const ComplexMatrix g = ginibre(d * d, rng);
    const auto est = mc_twirl(2, g, 6000, rng);
    const ComplexMatrix exact = analytic_twirl(2, g, d);
    const auto dev = (est.mean - exact).cwiseAbs().array();
    const auto bad = (dev > 3.0 * est.std_error.array() + 1e-12).count();
    // 3-sigma per entry: allow a handful of excursions among d^4 entries
    CHECK(bad <= std::max<Eigen::Index>(1, static_cast<Eigen::Index>(d * d * d * d) / 20));
  }
  CHECK_THROWS_AS(mc_twirl(2, identity(5), 10, rng), std::invalid_argument);
}

TEST_CASE("reduced purity typicality") {
  RngStream rng(5, 1);
  const auto p22 = reduced_purity_experiment(2, 2, 3000, rng);
  CHECK(std::abs(p22.mean - 0.8) < 3.0 * p22.std_error);
  const auto p24 = reduced_purity_experiment(2, 4, 3000, rng);
  CHECK(std::abs(p24.mean - 2.0 / 3.0) < 3.0 * p24.std_error);
  const auto p14 = reduced_purity_experiment(1, 4, 20, rng);
  CHECK(p14.mean == doctest::Approx(1.0));
  CHECK(p14.std_error < 1e-12);
}

TEST_CASE("canonical typicality") {
  RngStream rng(6, 1);
  const auto full = canonical_typicality_experiment(2, 16, 32, 500, rng);
  CHECK(full.omega_e_purity == doctest::Approx(1.0 / 16.0));
  CHECK(full.bound == doctest::Approx(0.5 * std::sqrt(1.0 / 8.0)));
  CHECK(full.distance.mean < full.bound);

  const auto trivial = canonical_typicality_experiment(1, 8, 8, 50, rng);
  CHECK(trivial.distance.mean < 1e-12);

  for (std::size_t dR : {4u, 9u, 20u}) {
    const auto r = canonical_typicality_experiment(2, 16, dR, 200, rng);
    CHECK(r.omega_e_purity <= 2.0 / static_cast<double>(dR) + 1e-12);
    CHECK(r.distance.mean <= r.bound + 3.0 * r.distance.std_error);
  }
  CHECK_THROWS_AS(canonical_typicality_experiment(2, 4, 9, 10, rng), std::invalid_argument);
  CHECK_THROWS_AS(canonical_typicality_experiment(2, 4, 0, 10, rng), std::invalid_argument);
}

TEST_CASE("levy tails") {
  const double c = 9.0 * std::pow(std::numbers::pi, 3);
  CHECK(levy_tail(100, 1e-12, 1.0) == doctest::Approx(2.0));
  CHECK(levy_tail(c, 1.0, 1.0) == doctest::Approx(2.0 / std::numbers::e));
  CHECK(levy_tail(200, 1.0, 1.0) < levy_tail(100, 1.0, 1.0));
  CHECK(levy_tail(100, 2.0, 1.0) < levy_tail(100, 1.0, 1.0));
  CHECK(levy_tail(100, 1.0, 2.0) > levy_tail(100, 1.0, 1.0));
  CHECK(levy_tail_entanglement(c, 1.0) == doctest::Approx(2.0 * std::exp(-2.0)));
  CHECK_THROWS_AS(levy_tail(10, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(levy_tail(10, 1.0, 0.0), std::invalid_argument);
}
