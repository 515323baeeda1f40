#include "qproc/nonmarkov.hpp"

#include "qproc/constant_average.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qproc {

namespace {

double dpow(double b, double e) { return std::pow(b, e); }

std::vector<std::size_t> uniform_dims(std::size_t d, std::size_t n) { return std::vector<std::size_t>(n, d); }

}  // namespace

void BoundParams::validate() const {
  if (dS < 1 || dE < 1) throw std::invalid_argument("bound parameters need dS, dE >= 1");
}

double n1_maxmixed(const ProcessTensor& p) {
  ComplexMatrix diff = p.choi();
  const double level = 1.0 / static_cast<double>(p.dim());
  diff.diagonal().array() -= level;
  return half_trace_norm(diff);
}

double n1_marginals(const ProcessTensor& p) {
  return half_trace_norm(p.choi() - product_of_marginals(p).choi());
}

double n2_maxmixed(const ProcessTensor& p) {
  const double excess = purity(p.choi()) - 1.0 / static_cast<double>(p.dim());
  return 0.5 * std::sqrt(std::max(0.0, excess));
}

double n_rel(const ProcessTensor& p) {
  const std::size_t k = p.k(), dS = p.dS();
  if (k == 0) return 0.0;
  const auto dims = uniform_dims(dS, 2 * k + 1);
  double total = vn_entropy(initial_state(p).matrix()) - vn_entropy(p.choi());
  for (std::size_t i = 1; i <= k; ++i) {
    const std::vector<std::size_t> keep{i == k ? std::size_t{0} : 1 + 2 * (k - i - 1), 2 + 2 * (k - i)};
    total += vn_entropy(partial_trace(p.choi(), dims, keep));
  }
  return std::max(0.0, total);
}

DiamondInterval diamond_interval(double n1, std::size_t dS, std::size_t k, bool n1_is_exact) {
  if (!(n1 >= 0.0)) throw std::invalid_argument("diamond_interval: n1 must be non-negative");
  DiamondInterval out;
  out.lower = n1_is_exact ? n1 : 0.0;
  out.upper = dpow(static_cast<double>(dS), static_cast<double>(2 * k + 1)) * n1;
  const auto prov = n1_is_exact ? IntervalProvenance::exact_n1 : IntervalProvenance::n1_upper_bound;
  out.lower_provenance = prov;
  out.upper_provenance = prov;
  return out;
}

NonMarkovReport nonmarkov_report(const ProcessTensor& p) {
  NonMarkovReport r;
  r.n1_maxmixed = n1_maxmixed(p);
  r.n1_marginals = n1_marginals(p);
  r.n2_maxmixed = n2_maxmixed(p);
  r.n_rel = n_rel(p);
  r.diamond_interval = diamond_interval(r.n1_maxmixed, p.dS(), p.k());
  return r;
}

double avg_purity_random(const BoundParams& params) {
  params.validate();
  if (params.interaction != Interaction::random)
    throw std::invalid_argument("closed-form average purity needs the random ensemble");
  const double dS = static_cast<double>(params.dS), dE = static_cast<double>(params.dE);
  const double k = static_cast<double>(params.k);
  const double dse = dS * dE;
  return (dE * dE - 1.0) / (dE * (dse + 1.0)) * dpow((dE * dE - 1.0) / (dse * dse - 1.0), k) + 1.0 / dE;
}

double avg_purity_random_excess(const BoundParams& params) {
  params.validate();
  if (params.interaction != Interaction::random)
    throw std::invalid_argument("closed-form average purity needs the random ensemble");
  const double dS = static_cast<double>(params.dS), u = 1.0 / static_cast<double>(params.dE);
  const double k = static_cast<double>(params.k);
  const double D = dpow(dS, 2.0 * k + 1.0);
  // D * first term = f written in u = 1/dE; D * E[tr Y^2] - 1 = (f - 1) + D u.
  const double log_f = std::log1p(-u * u) - std::log1p(u / dS) +
                       k * (std::log1p(-u * u) - std::log1p(-u * u / (dS * dS)));
  return (std::expm1(log_f) + D * u) / D;
}

double avg_purity(const BoundParams& params) {
  params.validate();
  if (params.interaction == Interaction::random) return avg_purity_random(params);
  const auto layout = SubsystemLayout({"E", "S"}, {params.dE, params.dS});
  return avg_purity_constant(params.k, params.dS, params.dE,
                             DensityMatrix::from_pure(PureState::basis(layout, 0)));
}

BoundResult bound_Bk_from_purity(std::size_t dS, std::size_t dE, std::size_t k, double avg_purity) {
  const double D = dpow(static_cast<double>(dS), 2.0 * static_cast<double>(k) + 1.0);
  BoundResult r;
  r.avg_purity = avg_purity;
  const double excess = avg_purity - 1.0 / D;
  const double de = static_cast<double>(dE);
  if (de < D) {
    const double y = 1.0 - de / D;
    // dE P - x with x = (dE/D)(1 + y).
    const double inner = de * excess - (de / D) * y;
    r.value = 0.5 * (std::sqrt(std::max(0.0, inner)) + y);
    r.branch = 1;
  } else {
    r.value = 0.5 * std::sqrt(std::max(0.0, D * excess));
    r.branch = 2;
  }
  return r;
}

BoundResult bound_Bk(const BoundParams& params) {
  params.validate();
  if (params.interaction == Interaction::constant)
    return bound_Bk_from_purity(params.dS, params.dE, params.k, avg_purity(params));
  const double D = dpow(static_cast<double>(params.dS), 2.0 * static_cast<double>(params.k) + 1.0);
  const double excess = avg_purity_random_excess(params);
  return bound_Bk_from_purity(params.dS, params.dE, params.k, 1.0 / D + excess);
}

double concentration_constant(const BoundParams& params) {
  params.validate();
  const double c = params.interaction == Interaction::constant ? 0.25 : 0.25 * static_cast<double>(params.k + 1);
  const double dS = static_cast<double>(params.dS);
  const double ratio =
      params.dS == 1 ? 1.0 / static_cast<double>(params.k + 1)
                     : (dS - 1.0) / (dpow(dS, static_cast<double>(params.k + 1)) - 1.0);
  return c * dS * static_cast<double>(params.dE) * ratio * ratio;
}

double concentration_tail(const BoundParams& params, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("concentration_tail: delta must be positive");
  return std::exp(-concentration_constant(params) * delta * delta);
}

}  // namespace qproc
