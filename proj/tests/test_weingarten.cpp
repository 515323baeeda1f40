#include "qproc/constant_average.hpp"
#include "qproc/haar.hpp"
#include "qproc/process.hpp"
#include "qproc/weingarten.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <array>
#include <chrono>
#include <cmath>
#include <sstream>

using namespace qproc;
using oracle::fiducial;
using oracle::superchannel_purity_formula;

namespace {

// |0>_E (x) psi_S for a random pure psi_S.
std::pair<DensityMatrix, ComplexMatrix> product_fiducial(std::size_t dS, std::size_t dE, RngStream& rng) {
  ComplexVector s(static_cast<Eigen::Index>(dS));
  for (auto& z : s) z = rng.complex_normal();
  s.normalize();
  ComplexVector e = ComplexVector::Zero(static_cast<Eigen::Index>(dE));
  e(0) = 1.0;
  ComplexVector es(static_cast<Eigen::Index>(dE * dS));
  for (std::size_t a = 0; a < dE; ++a)
    for (std::size_t b = 0; b < dS; ++b) es(a * dS + b) = e(a) * s(b);
  return {DensityMatrix::from_pure(PureState(es)), s * s.adjoint()};
}

// Closed-form k = 1 average with the initial system state transposed on B.
ComplexMatrix superchannel_average(std::size_t dS, std::size_t dE, const ComplexMatrix& rho_s) {
  const double s = static_cast<double>(dS), e = static_cast<double>(dE);
  const ComplexMatrix rt = rho_s.transpose();
  const ComplexMatrix sw = swap_operator(dS);
  ComplexMatrix out = (e * e / s) * identity(dS * dS * dS) + kron(sw, rt) / s - kron(sw, identity(dS)) / (s * s) -
                      kron(identity(dS * dS), rt) / (s * s);
  return out / (e * e * s * s - 1.0);
}

}  // namespace

TEST_CASE("cycle counts") {
  CHECK(cycle_count(Permutation::identity(3)) == 3);
  CHECK(cycle_count(Permutation({1, 2, 0})) == 1);
  CHECK(cycle_count(Permutation({1, 0, 2})) == 2);
  CHECK(cycle_type(Permutation({1, 0, 2})).str() == "2-1");
  CHECK_THROWS_AS(Permutation({0, 0, 1}), std::invalid_argument);
  const auto g = SymmetricGroup::get(4);
  CHECK(g->order() == 24);
  for (std::size_t a = 0; a < g->order(); ++a) CHECK(g->product(a, g->inverse(a)) == 0);
}

TEST_CASE("weingarten table values") {
  for (std::size_t d : {2u, 3u, 4u, 8u}) {
    const double x = static_cast<double>(d);
    CHECK(std::abs(weingarten_table(1, d).value(CycleType{{1}}) - 1.0 / x) < 1e-12);
    const auto t2 = weingarten_table(2, d);
    CHECK(std::abs(t2.value(CycleType{{1, 1}}) - 1.0 / (x * x - 1.0)) < 1e-12);
    CHECK(std::abs(t2.value(CycleType{{2}}) + 1.0 / (x * (x * x - 1.0))) < 1e-12);
    if (d >= 3) {
      // textbook n = 3 values
      const double den = x * (x * x - 1.0) * (x * x - 4.0);
      const auto t3 = weingarten_table(3, d);
      CHECK(std::abs(t3.value(CycleType{{1, 1, 1}}) - (x * x - 2.0) / den) < 1e-12);
      CHECK(std::abs(t3.value(CycleType{{2, 1}}) + x / den) < 1e-12);
      CHECK(std::abs(t3.value(CycleType{{3}}) - 2.0 / den) < 1e-12);
    }
  }
}

TEST_CASE("weingarten defining system") {
  const auto t = weingarten_table(3, 4);
  const auto& g = t.group();
  for (std::size_t s = 0; s < g.order(); ++s) {
    double row = 0.0;
    for (std::size_t u = 0; u < g.order(); ++u)
      row += std::pow(4.0, static_cast<double>(g.cycles(g.product(s, g.inverse(u))))) * t.value_at(u);
    CHECK(std::abs(row - (s == 0 ? 1.0 : 0.0)) < 1e-10);
  }
  for (std::size_t n = 1; n <= 5; ++n)
    for (std::size_t d : {n, n + 1, std::size_t{8}}) CHECK(weingarten_table(n, d).row_residual() < 1e-10);
  CHECK_THROWS_AS(weingarten_table(3, 2), UnsupportedRegime);
  CHECK_THROWS_AS(weingarten_table(7, 8), UnsupportedRegime);
}

TEST_CASE("weingarten is a class function") {
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto t = weingarten_table(n, n + 2);
    const auto& g = t.group();
    for (std::size_t a = 0; a < g.order(); ++a)
      for (std::size_t b = 0; b < g.order(); ++b)
        if (cycle_type(g.at(a)) == cycle_type(g.at(b))) CHECK(t.value_at(a) == doctest::Approx(t.value_at(b)));
  }
}

TEST_CASE("weingarten leading order stabilizes") {
  const auto g = SymmetricGroup::get(3);
  std::vector<double> prev;
  for (std::size_t d : {8u, 16u, 32u, 64u}) {
    const auto t = weingarten_table(3, d);
    std::vector<double> scaled;
    for (std::size_t a = 0; a < g->order(); ++a)
      scaled.push_back(std::abs(t.value_at(a)) *
                       std::pow(static_cast<double>(d), 6.0 - static_cast<double>(g->cycles(a))));
    if (d == 64)
      for (std::size_t a = 0; a < scaled.size(); ++a) {
        CHECK(scaled[a] > 0.0);
        CHECK(std::abs(scaled[a] / prev[a] - 1.0) < 0.1);
      }
    prev = scaled;
  }
}

TEST_CASE("haar moment tensor") {
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
          const std::array<std::size_t, 1> r{i}, c{j}, rc{a}, cc{b};
          const double expect = (i == a && j == b) ? 1.0 / 3.0 : 0.0;
          CHECK(std::abs(haar_moment_tensor(1, 3, r, c, rc, cc) - expect) < 1e-14);
        }
  const std::array<std::size_t, 2> z{0, 0};
  CHECK(std::abs(haar_moment_tensor(2, 2, z, z, z, z) - 1.0 / 3.0) < 1e-14);

  RngStream rng(7, 1);
  const int samples = 100000;
  double sum = 0, sum_sq = 0;
  for (int s = 0; s < samples; ++s) {
    const double v = std::pow(std::abs(haar_unitary(2, rng).matrix()(0, 0)), 4);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / samples;
  const double se = std::sqrt((sum_sq / samples - mean * mean) / samples);
  CHECK(std::abs(mean - 1.0 / 3.0) < 3.0 * se);

  // every entry of the analytic 2-twirl of every matrix unit
  for (std::size_t in = 0; in < 16; ++in) {
    ComplexMatrix x = ComplexMatrix::Zero(4, 4);
    x(in / 4, in % 4) = 1.0;
    const ComplexMatrix tw = analytic_twirl(2, x, 2);
    const std::array<std::size_t, 2> cols{in / 8, (in / 4) % 2}, conj_cols{(in % 4) / 2, in % 2};
    for (std::size_t out = 0; out < 16; ++out) {
      const std::array<std::size_t, 2> rows{out / 8, (out / 4) % 2}, conj_rows{(out % 4) / 2, out % 2};
      CHECK(std::abs(tw(out / 4, out % 4) - haar_moment_tensor(2, 2, rows, cols, conj_rows, conj_cols)) < 1e-14);
    }
  }
  const std::array<std::size_t, 1> bad{3};
  const std::array<std::size_t, 1> ok{0};
  CHECK_THROWS_AS(haar_moment_tensor(1, 3, bad, ok, ok, ok), std::invalid_argument);
}

TEST_CASE("analytic twirls") {
  RngStream rng(7, 2);
  ComplexMatrix g = ginibre(3, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace();
  CHECK((analytic_twirl(1, rho, 3) - identity(3) / 3.0).norm() < 1e-14);
  CHECK((analytic_twirl(2, identity(9), 3) - identity(9)).norm() < 1e-13);
  CHECK_THROWS_AS(analytic_twirl(3, identity(8), 2), UnsupportedRegime);
}

TEST_CASE("delta degree") {
  DeltaSystem free;
  for (int i = 0; i < 3; ++i) free.add_variable(5);
  CHECK(delta_degree(free) == 125.0);

  DeltaSystem chain;
  const auto a = chain.add_variable(4), b = chain.add_variable(4), c = chain.add_variable(4);
  chain.equate(a, b);
  chain.equate(b, c);
  CHECK(delta_degree(chain) == 4.0);
  chain.pin(a, 1);
  CHECK(delta_degree(chain) == 1.0);
  chain.pin(c, 2);
  CHECK(delta_degree(chain) == 0.0);

  // identity permutations: e_0..e_k and e'_1..e'_k with e_{l-1} = e'_l
  for (std::size_t k = 0; k <= 3; ++k) {
    DeltaSystem s;
    std::vector<std::size_t> e, ep;
    for (std::size_t l = 0; l <= k; ++l) e.push_back(s.add_variable(3));
    for (std::size_t l = 1; l <= k; ++l) ep.push_back(s.add_variable(3));
    for (std::size_t l = 1; l <= k; ++l) s.equate(e[l - 1], ep[l - 1]);
    s.equate(e[k], e[k]);
    CHECK(delta_degree(s) == std::pow(3.0, static_cast<double>(k + 1)));
  }
}

TEST_CASE("weingarten csv") {
  std::ostringstream os;
  write_weingarten_csv(os, weingarten_table(2, 3));
  const std::string s = os.str();
  CHECK(s.rfind("n,d,cycle_type,value\n", 0) == 0);
  CHECK(s.find("2,3,1-1,0.125") != std::string::npos);
}

TEST_CASE("constant-interaction average process") {
  for (std::size_t dS : {2u, 3u}) {
    const auto zero = avg_process_constant(0, dS, 2, fiducial(dS, 2));
    CHECK((zero.choi - identity(dS) / static_cast<double>(dS)).norm() < 1e-12);
  }
  RngStream rng(8, 1);
  for (auto [dS, dE] : std::vector<std::array<std::size_t, 2>>{{2, 2}, {2, 3}}) {
    const auto [rho, rho_s] = product_fiducial(dS, dE, rng);
    const auto avg = avg_process_constant(1, dS, dE, rho);
    CHECK((avg.choi - superchannel_average(dS, dE, rho_s)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(avg.unnormalized_trace == doctest::Approx(static_cast<double>(dS)));
  }
  const auto big = avg_process_constant(1, 2, 64, fiducial(2, 64));
  CHECK((big.choi - identity(8) / 8.0).cwiseAbs().maxCoeff() < 2.0 / (64.0 * 64.0));
  CHECK_THROWS_AS(avg_process_constant(3, 2, 4, fiducial(2, 4)), UnsupportedRegime);
}

TEST_CASE("constant-interaction average purity") {
  for (auto [dS, dE] : std::vector<std::array<std::size_t, 2>>{{2, 2}, {2, 3}, {3, 2}, {4, 5}}) {
    const double s = static_cast<double>(dS), e = static_cast<double>(dE);
    CHECK(avg_purity_constant(0, dS, dE, fiducial(dS, dE)) == doctest::Approx((e + s) / (e * s + 1.0)).epsilon(1e-12));
  }
  // The excess over 1/dS^3 decays like 7.5/dE, so 5% is reached near dE = 256.
  const double r64 = avg_purity_constant(1, 2, 64, fiducial(2, 64)) * 8.0;
  const double r256 = avg_purity_constant(1, 2, 256, fiducial(2, 256)) * 8.0;
  CHECK(r64 == doctest::Approx(1.1168).epsilon(1e-3));
  CHECK(r256 < r64);
  CHECK(std::abs(r256 - 1.0) < 0.05);
  CHECK_THROWS_AS(avg_purity_constant(3, 2, 8, fiducial(2, 8)), UnsupportedRegime);
  CHECK_THROWS_AS(avg_purity_constant(1, 2, 1, fiducial(2, 1)), UnsupportedRegime);
}

TEST_CASE("closed-form superchannel purity is the purity of the average") {
  // The closed form equals tr[(E Upsilon)^2], which is not E[tr Upsilon^2].
  for (auto [dS, dE] : std::vector<std::array<std::size_t, 2>>{{2, 2}, {2, 3}, {3, 2}}) {
    const auto rho = fiducial(dS, dE);
    const auto avg = avg_process_constant(1, dS, dE, rho);
    const double formula = superchannel_purity_formula(static_cast<double>(dS), static_cast<double>(dE), 1.0);
    CHECK(std::abs(purity(avg.choi) - formula) < 1e-12);
    CHECK(avg_purity_constant(1, dS, dE, rho) > formula + 0.1);
  }
}

TEST_CASE("constant-interaction purity against monte carlo") {
  for (auto [dE, k] : std::vector<std::array<std::size_t, 2>>{{2, 1}, {4, 1}, {4, 2}}) {
    RngStream rng(9, dE * 10 + k);
    std::vector<double> samples;
    for (int s = 0; s < 400; ++s) {
      ProcessConfig cfg;
      cfg.dS = 2;
      cfg.dE = dE;
      cfg.k = k;
      cfg.interaction = Interaction::constant;
      samples.push_back(purity(sample_process(cfg, rng).choi()));
    }
    const auto est = mean_and_stderr(samples);
    const double exact = avg_purity_constant(k, 2, dE, fiducial(2, dE));
    CHECK(std::abs(est.mean - exact) < 3.0 * est.std_error);
  }
}
