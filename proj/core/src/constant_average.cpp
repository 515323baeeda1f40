#include "qproc/constant_average.hpp"

#include "qproc/weingarten.hpp"

#include <cmath>
#include <stdexcept>

namespace qproc {

namespace {

struct Entry {
  std::size_t env_row, sys_row, env_col, sys_col;
  cplx value;
};

// Nonzero entries of rho indexed as (e, s) with E the slower factor.
std::vector<Entry> fiducial_entries(const DensityMatrix& rho, std::size_t dS, std::size_t dE) {
  if (rho.dim() != dS * dE) throw std::invalid_argument("initial state must act on dS * dE");
  ComplexMatrix m = rho.matrix();
  const auto& layout = rho.layout();
  if (layout.count() == 2 && layout.contains("E") && layout.contains("S") &&
      layout.position("S") == 0) {
    const std::vector<std::size_t> order{1, 0};
    m = permute_operator(m, layout.dims(), order);
  }
  std::vector<Entry> out;
  for (std::size_t a = 0; a < dS * dE; ++a)
    for (std::size_t b = 0; b < dS * dE; ++b) {
      const cplx v = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (std::abs(v) > 1e-15) out.push_back({a / dS, a % dS, b / dS, b % dS, v});
    }
  return out;
}

// Leg positions within [S_out, A_k, B_k, ..., A_1, B_1].
std::size_t pos_a(std::size_t k, std::size_t i) { return 1 + 2 * (k - i); }
std::size_t pos_b(std::size_t k, std::size_t i) { return 2 + 2 * (k - i); }

std::vector<std::vector<std::size_t>> leg_digits(std::size_t dS, std::size_t legs) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < legs; ++i) total *= dS;
  std::vector<std::vector<std::size_t>> out(total, std::vector<std::size_t>(legs));
  for (std::size_t x = 0; x < total; ++x) {
    std::size_t r = x;
    for (std::size_t p = legs; p-- > 0;) {
      out[x][p] = r % dS;
      r /= dS;
    }
  }
  return out;
}

// One ket or bra chain of k + 1 interaction copies inside a trace.
struct Chain {
  std::vector<std::size_t> env;  // environment after copies 0..k-1
  std::size_t top_env = 0;       // environment after copy k (traced)
  std::size_t in_env = 0, in_sys = 0;
  std::vector<std::size_t> legs;  // system leg variables
  std::size_t k = 0;

  std::size_t row_env(std::size_t l) const { return l < k ? env[l] : top_env; }
  std::size_t col_env(std::size_t l) const { return l >= 1 ? env[l - 1] : in_env; }
  std::size_t row_sys(std::size_t l) const { return l < k ? legs[pos_a(k, l + 1)] : legs[0]; }
  std::size_t col_sys(std::size_t l) const { return l >= 1 ? legs[pos_b(k, l)] : in_sys; }
};

Chain make_chain(DeltaSystem& sys, std::size_t k, std::size_t dE, std::size_t dS,
                 std::size_t top_env, const std::vector<std::size_t>& legs) {
  Chain c;
  c.k = k;
  for (std::size_t l = 0; l < k; ++l) c.env.push_back(sys.add_variable(dE));
  c.top_env = top_env;
  c.in_env = sys.add_variable(dE);
  c.in_sys = sys.add_variable(dS);
  c.legs = legs;
  return c;
}

}  // namespace

AverageProcess avg_process_constant(std::size_t k, std::size_t dS, std::size_t dE,
                                    const DensityMatrix& rho) {
  if (dS < 1 || dE < 1) throw std::invalid_argument("dimensions must be >= 1");
  if (k > 2) throw UnsupportedRegime("avg_process_constant supports k <= 2");
  const std::size_t n = k + 1;
  if (dS * dE < n) throw UnsupportedRegime("avg_process_constant needs dS * dE >= k + 1");
  const auto entries = fiducial_entries(rho, dS, dE);
  const auto table = weingarten_table(n, dS * dE);
  const auto& g = table.group();

  const std::size_t legs = 2 * k + 1;
  const auto digits = leg_digits(dS, legs);
  const std::size_t dim = digits.size();

  // Environment indices only; system indices are fixed by the matrix entry.
  DeltaSystem sys;
  std::vector<std::size_t> e(k), ep(k);
  for (auto& v : e) v = sys.add_variable(dE);
  for (auto& v : ep) v = sys.add_variable(dE);
  const std::size_t eps = sys.add_variable(dE);
  const std::size_t ein = sys.add_variable(dE);
  const std::size_t epin = sys.add_variable(dE);
  auto row_env = [&](const std::vector<std::size_t>& c, std::size_t l) { return l < k ? c[l] : eps; };
  auto col_env = [&](const std::vector<std::size_t>& c, std::size_t in, std::size_t l) {
    return l >= 1 ? c[l - 1] : in;
  };
  auto row_sys = [&](const std::vector<std::size_t>& d, std::size_t l) {
    return l < k ? d[pos_a(k, l + 1)] : d[0];
  };
  auto col_sys = [&](const std::vector<std::size_t>& d, std::size_t fid, std::size_t l) {
    return l >= 1 ? d[pos_b(k, l)] : fid;
  };

  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < g.order(); ++s) {
    const auto& sigma = g.at(s);
    for (std::size_t u = 0; u < g.order(); ++u) {
      const auto& tau = g.at(u);
      const double wg = table.value_at(g.product(u, g.inverse(s)));
      for (const auto& ent : entries) {
        sys.clear_constraints();
        for (std::size_t l = 0; l < n; ++l) {
          sys.equate(row_env(e, l), row_env(ep, sigma(l)));
          sys.equate(col_env(e, ein, l), col_env(ep, epin, tau(l)));
        }
        sys.pin(ein, ent.env_row);
        sys.pin(epin, ent.env_col);
        const double env = delta_degree(sys);
        if (env == 0.0) continue;
        const cplx weight = wg * env * ent.value;
        for (std::size_t x = 0; x < dim; ++x) {
          const auto& dx = digits[x];
          for (std::size_t y = 0; y < dim; ++y) {
            const auto& dy = digits[y];
            bool ok = true;
            for (std::size_t l = 0; l < n && ok; ++l)
              ok = row_sys(dx, l) == row_sys(dy, sigma(l)) &&
                   col_sys(dx, ent.sys_row, l) == col_sys(dy, ent.sys_col, tau(l));
            if (ok) out(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) += weight;
          }
        }
      }
    }
  }
  const double pairs_norm = std::pow(static_cast<double>(dS), static_cast<double>(k));
  AverageProcess res;
  res.choi = out / pairs_norm;
  res.k = k;
  res.dS = dS;
  res.dE = dE;
  res.unnormalized_trace = pairs_norm;
  return res;
}

double avg_purity_constant(std::size_t k, std::size_t dS, std::size_t dE,
                           const DensityMatrix& rho) {
  if (dS < 1 || dE < 1) throw std::invalid_argument("dimensions must be >= 1");
  if (k > 2) throw UnsupportedRegime("avg_purity_constant supports k <= 2");
  const std::size_t n = 2 * k + 2;
  if (dS * dE < n) throw UnsupportedRegime("avg_purity_constant needs dS * dE >= 2k + 2");
  const auto entries = fiducial_entries(rho, dS, dE);
  const auto table = weingarten_table(n, dS * dE);
  const auto& g = table.group();

  // tr Upsilon^2 = sum_{x,y} Upsilon(x;y) Upsilon(y;x) with
  // Upsilon(x;y) = sum_eps psi(eps,x) conj(psi(eps,y)). Ket chains P, R and
  // bra chains Q, T; P and T carry the x legs, Q and R the y legs.
  const std::size_t legs = 2 * k + 1;
  DeltaSystem sys;
  std::vector<std::size_t> xl(legs), yl(legs);
  for (auto& v : xl) v = sys.add_variable(dS);
  for (auto& v : yl) v = sys.add_variable(dS);
  const std::size_t eps = sys.add_variable(dE);
  const std::size_t eps2 = sys.add_variable(dE);
  const Chain P = make_chain(sys, k, dE, dS, eps, xl);
  const Chain Q = make_chain(sys, k, dE, dS, eps, yl);
  const Chain R = make_chain(sys, k, dE, dS, eps2, yl);
  const Chain T = make_chain(sys, k, dE, dS, eps2, xl);
  auto ket = [&](std::size_t c) -> std::pair<const Chain*, std::size_t> {
    return c <= k ? std::pair{&P, c} : std::pair{&R, c - k - 1};
  };
  auto bra = [&](std::size_t c) -> std::pair<const Chain*, std::size_t> {
    return c <= k ? std::pair{&Q, c} : std::pair{&T, c - k - 1};
  };

  double total = 0.0;
  for (std::size_t s = 0; s < g.order(); ++s) {
    const auto& sigma = g.at(s);
    for (std::size_t u = 0; u < g.order(); ++u) {
      const auto& tau = g.at(u);
      const double wg = table.value_at(g.product(u, g.inverse(s)));
      for (const auto& a : entries) {
        for (const auto& b : entries) {
          sys.clear_constraints();
          for (std::size_t c = 0; c < n; ++c) {
            const auto [kc, kl] = ket(c);
            const auto [rc, rl] = bra(sigma(c));
            const auto [cc, cl] = bra(tau(c));
            sys.equate(kc->row_env(kl), rc->row_env(rl));
            sys.equate(kc->row_sys(kl), rc->row_sys(rl));
            sys.equate(kc->col_env(kl), cc->col_env(cl));
            sys.equate(kc->col_sys(kl), cc->col_sys(cl));
          }
          sys.pin(P.in_env, a.env_row);
          sys.pin(P.in_sys, a.sys_row);
          sys.pin(Q.in_env, a.env_col);
          sys.pin(Q.in_sys, a.sys_col);
          sys.pin(R.in_env, b.env_row);
          sys.pin(R.in_sys, b.sys_row);
          sys.pin(T.in_env, b.env_col);
          sys.pin(T.in_sys, b.sys_col);
          const double deg = delta_degree(sys);
          if (deg != 0.0) total += wg * deg * (a.value * b.value).real();
        }
      }
    }
  }
  return total / std::pow(static_cast<double>(dS), static_cast<double>(2 * k));
}

}  // namespace qproc
