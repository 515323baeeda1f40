// Independent reference computations shared by the unit and acceptance tests.
#pragma once

#include "qproc/equilibration.hpp"
#include "qproc/qmath.hpp"
#include "qproc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qproc::oracle {

/// |0> on E (x) S.
inline DensityMatrix fiducial(std::size_t dS, std::size_t dE) {
  return DensityMatrix::from_pure(PureState::basis(SubsystemLayout({"E", "S"}, {dE, dS}), 0));
}

/// Closed-form k = 1 constant-interaction expression in the unit-trace
/// convention, for an initial system state of the given purity.
inline double superchannel_purity_formula(double dS, double dE, double rho_purity) {
  const double D2 = dE * dE * dS * dS;
  return 2.0 / ((D2 - 1.0) * (D2 - 1.0)) *
         (1.0 / (dS * dS * dS) + rho_purity * (dS * dS - dS - 1.0) / (2.0 * dS * dS) - dE * dE / dS +
          dE * dE * dE * dE * dS / 2.0);
}

/// U on (E_i, S) embedded into [E_k, ..., E_0, S].
inline ComplexMatrix embed_step(const ComplexMatrix& u, std::size_t i, std::size_t k, std::size_t de,
                                std::size_t ds) {
  ComplexMatrix m = kron(u, identity(static_cast<std::size_t>(std::pow(de, k))));
  // current factors: [E_i, S, E_k .. E_0 without E_i]
  std::vector<std::size_t> dims{de, ds};
  std::vector<std::size_t> labels{i, k + 1};
  for (std::size_t j = k + 1; j-- > 0;)
    if (j != i) {
      dims.push_back(de);
      labels.push_back(j);
    }
  std::vector<std::size_t> order;
  for (std::size_t j = k + 1; j-- > 0;)
    for (std::size_t p = 0; p < labels.size(); ++p)
      if (labels[p] == j) order.push_back(p);
  order.push_back(1);
  return permute_operator(m, dims, order);
}

/// Smallest spacing between consecutive sorted gaps E_n - E_m.
inline double min_gap_spacing(const Hamiltonian& h) {
  std::vector<double> gaps;
  for (double a : h.energies())
    for (double b : h.energies())
      if (a != b) gaps.push_back(a - b);
  std::sort(gaps.begin(), gaps.end());
  double s = INFINITY;
  for (std::size_t i = 1; i < gaps.size(); ++i) s = std::min(s, gaps[i] - gaps[i - 1]);
  return s;
}

/// Time average of (<A>_t - <A>_omega)^2 over `samples` uniform times in [0, T].
inline double sampled_fluctuation(const ComplexMatrix& h, const ComplexMatrix& rho, const ComplexMatrix& a,
                                  double T, int samples, RngStream& rng) {
  const auto eig = eig_hermitian(h);
  const ComplexMatrix r = eig.vectors.adjoint() * rho * eig.vectors;
  const ComplexMatrix o = eig.vectors.adjoint() * a * eig.vectors;
  const Eigen::Index d = r.rows();
  double eq = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) eq += (r(i, i) * o(i, i)).real();
  double var = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double t = T * rng.uniform();
    cplx v = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) v += r(i, j) * o(j, i) * std::polar(1.0, -t * (eig.values(i) - eig.values(j)));
    var += std::pow(v.real() - eq, 2);
  }
  return var / samples;
}

}  // namespace qproc::oracle
