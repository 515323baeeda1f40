#include "qproc/weingarten.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace qproc {

// ---------------------------------------------------------------- permutations

Permutation::Permutation(std::vector<std::size_t> mapping) : map_(std::move(mapping)) {
  std::vector<bool> seen(map_.size(), false);
  for (auto v : map_) {
    if (v >= map_.size() || seen[v]) throw std::invalid_argument("mapping is not a bijection");
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = i;
  return Permutation(std::move(inv));
}

Permutation Permutation::operator*(const Permutation& rhs) const {
  if (rhs.degree() != degree()) throw std::invalid_argument("permutation degrees differ");
  std::vector<std::size_t> out(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) out[i] = map_[rhs.map_[i]];
  return Permutation(std::move(out));
}

CycleType cycle_type(const Permutation& p) {
  const std::size_t n = p.degree();
  std::vector<bool> seen(n, false);
  CycleType c;
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = p(j)) {
      seen[j] = true;
      ++len;
    }
    c.parts.push_back(len);
  }
  std::sort(c.parts.rbegin(), c.parts.rend());
  return c;
}

std::size_t cycle_count(const Permutation& p) { return cycle_type(p).parts.size(); }

std::string CycleType::str() const {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(parts[i]);
  }
  return s;
}

std::vector<Permutation> all_permutations(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  std::vector<Permutation> out;
  do {
    out.emplace_back(m);
  } while (std::next_permutation(m.begin(), m.end()));
  return out;
}

namespace {

std::size_t lehmer_rank(const std::vector<std::size_t>& m) {
  const std::size_t n = m.size();
  std::size_t rank = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j)
      if (m[j] < m[i]) ++smaller;
    rank = rank * (n - i) + smaller;
  }
  return rank;
}

}  // namespace

SymmetricGroup::SymmetricGroup(std::size_t n) : n_(n) {
  if (n < 1 || n > 6) throw UnsupportedRegime("symmetric group tables are limited to 1 <= n <= 6");
  perms_ = all_permutations(n);
  const std::size_t order = perms_.size();
  table_.resize(order * order);
  inv_.resize(order);
  cycles_.resize(order);
  for (std::size_t a = 0; a < order; ++a) {
    inv_[a] = static_cast<std::uint16_t>(index_of(perms_[a].inverse()));
    cycles_[a] = static_cast<std::uint8_t>(cycle_count(perms_[a]));
    for (std::size_t b = 0; b < order; ++b) {
      std::vector<std::size_t> m(n);
      for (std::size_t i = 0; i < n; ++i) m[i] = perms_[a](perms_[b](i));
      table_[a * order + b] = static_cast<std::uint16_t>(lehmer_rank(m));
    }
  }
}

std::shared_ptr<const SymmetricGroup> SymmetricGroup::get(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const SymmetricGroup>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const SymmetricGroup>(n);
  return slot;
}

std::size_t SymmetricGroup::index_of(const Permutation& p) const {
  if (p.degree() != n_) throw std::invalid_argument("permutation degree does not match group");
  return lehmer_rank(p.mapping());
}

// ---------------------------------------------------------------- Weingarten

double WeingartenTable::value(const CycleType& c) const {
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (cycle_type(group_->at(i)) == c) return values_[i];
  throw std::invalid_argument("cycle type does not belong to this table");
}

std::vector<std::pair<CycleType, double>> WeingartenTable::by_cycle_type() const {
  std::map<CycleType, double, std::greater<>> seen;
  for (std::size_t i = 0; i < values_.size(); ++i) seen.emplace(cycle_type(group_->at(i)), values_[i]);
  return {seen.begin(), seen.end()};
}

WeingartenTable weingarten_table(std::size_t n, std::size_t d) {
  if (n < 1 || n > 6) throw UnsupportedRegime("Weingarten tables need 1 <= n <= 6");
  if (d < n) throw UnsupportedRegime("Weingarten Gram matrix is singular for d < n");

  WeingartenTable t;
  t.group_ = SymmetricGroup::get(n);
  t.d_ = d;
  const auto& g = *t.group_;
  const auto order = static_cast<Eigen::Index>(g.order());
  const double dd = static_cast<double>(d);

  // Scaled by d^-n so entries lie in (0, 1] with unit diagonal.
  std::vector<double> powers(n + 1);
  for (std::size_t c = 0; c <= n; ++c) powers[c] = std::pow(dd, static_cast<double>(c) - static_cast<double>(n));
  Eigen::MatrixXd gram(order, order);
  for (Eigen::Index s = 0; s < order; ++s)
    for (Eigen::Index u = 0; u < order; ++u) {
      const auto su = g.product(static_cast<std::size_t>(s), g.inverse(static_cast<std::size_t>(u)));
      gram(s, u) = powers[g.cycles(su)];
    }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(order);
  rhs(0) = 1.0;  // identity is first in lexicographic order

  auto residual_of = [&](const Eigen::VectorXd& w) { return (gram * w - rhs).cwiseAbs().maxCoeff(); };

  Eigen::VectorXd w;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  double residual = std::numeric_limits<double>::infinity();
  if (llt.info() == Eigen::Success) {
    w = llt.solve(rhs);
    residual = residual_of(w);
  }
  if (!(residual <= 1e-8)) {
    w = gram.partialPivLu().solve(rhs);
    residual = residual_of(w);
    t.fallback_ = true;
    if (!(residual <= 1e-8))
      throw UnsupportedRegime("Weingarten system could not be solved to 1e-8");
  }
  const double scale = std::pow(dd, static_cast<double>(n));
  t.values_.resize(g.order());
  for (Eigen::Index i = 0; i < order; ++i) t.values_[static_cast<std::size_t>(i)] = w(i) / scale;
  t.residual_ = residual;
  return t;
}

cplx haar_moment_tensor(std::size_t n, std::size_t d, std::span<const std::size_t> rows,
                        std::span<const std::size_t> cols,
                        std::span<const std::size_t> conj_rows,
                        std::span<const std::size_t> conj_cols) {
  if (rows.size() != n || cols.size() != n || conj_rows.size() != n || conj_cols.size() != n)
    throw std::invalid_argument("haar_moment_tensor: index lists must have length n");
  for (auto list : {rows, cols, conj_rows, conj_cols})
    for (auto i : list)
      if (i >= d) throw std::invalid_argument("haar_moment_tensor: index out of range");
  const auto table = weingarten_table(n, d);
  const auto& g = table.group();
  double sum = 0.0;
  for (std::size_t s = 0; s < g.order(); ++s) {
    const auto& sigma = g.at(s);
    bool ok = true;
    for (std::size_t l = 0; l < n && ok; ++l) ok = rows[l] == conj_rows[sigma(l)];
    if (!ok) continue;
    for (std::size_t u = 0; u < g.order(); ++u) {
      const auto& tau = g.at(u);
      bool ok2 = true;
      for (std::size_t l = 0; l < n && ok2; ++l) ok2 = cols[l] == conj_cols[tau(l)];
      if (ok2) sum += table.value_at(g.product(u, g.inverse(s)));
    }
  }
  return {sum, 0.0};
}

ComplexMatrix analytic_twirl(std::size_t n, const ComplexMatrix& x, std::size_t d) {
  if (x.rows() != x.cols()) throw std::invalid_argument("analytic_twirl: operator must be square");
  if (n == 1) {
    if (static_cast<std::size_t>(x.rows()) != d)
      throw std::invalid_argument("analytic_twirl: operator must act on d dimensions");
    return x.trace() / static_cast<double>(d) * identity(d);
  }
  if (n != 2) throw UnsupportedRegime("analytic_twirl covers n = 1, 2; use haar_moment_tensor");
  if (static_cast<std::size_t>(x.rows()) != d * d)
    throw std::invalid_argument("analytic_twirl: operator must act on d^2 dimensions");
  if (d == 1) return x;
  const ComplexMatrix swap = swap_operator(d);
  const cplx tr = x.trace();
  const cplx trs = (swap * x).trace();
  const double dd = static_cast<double>(d);
  const cplx alpha = tr / (dd * dd - 1.0) - trs / (dd * (dd * dd - 1.0));
  const cplx beta = trs / (dd * dd - 1.0) - tr / (dd * (dd * dd - 1.0));
  return alpha * identity(d * d) + beta * swap;
}

void write_weingarten_csv(std::ostream& os, const WeingartenTable& table, bool header) {
  if (header) os << "n,d,cycle_type,value\n";
  char buf[64];
  for (const auto& [type, value] : table.by_cycle_type()) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
    os << table.n() << ',' << table.d() << ',' << type.str() << ',' << buf << '\n';
  }
}

// ---------------------------------------------------------------- delta systems

std::size_t DeltaSystem::add_variable(std::size_t alphabet) {
  if (alphabet < 1) throw std::invalid_argument("alphabet size must be >= 1");
  alphabet_.push_back(alphabet);
  return alphabet_.size() - 1;
}

void DeltaSystem::equate(std::size_t a, std::size_t b) {
  if (a >= alphabet_.size() || b >= alphabet_.size())
    throw std::invalid_argument("unknown delta variable");
  if (alphabet_[a] != alphabet_[b])
    throw std::invalid_argument("cannot equate variables over different alphabets");
  equalities_.emplace_back(a, b);
}

void DeltaSystem::pin(std::size_t var, std::size_t value) {
  if (var >= alphabet_.size()) throw std::invalid_argument("unknown delta variable");
  pins_.emplace_back(var, value);
}

void DeltaSystem::clear_constraints() {
  equalities_.clear();
  pins_.clear();
}

double delta_degree(const DeltaSystem& sys) {
  const std::size_t n = sys.variable_count();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (auto [a, b] : sys.equalities()) {
    const auto ra = find(a), rb = find(b);
    if (ra != rb) parent[ra] = rb;
  }
  constexpr std::size_t kFree = static_cast<std::size_t>(-1);
  std::vector<std::size_t> value(n, kFree);
  for (auto [v, c] : sys.pins()) {
    if (c >= sys.alphabet(v)) return 0.0;
    const auto r = find(v);
    if (value[r] == kFree)
      value[r] = c;
    else if (value[r] != c)
      return 0.0;
  }
  double result = 1.0;
  for (std::size_t v = 0; v < n; ++v)
    if (find(v) == v && value[v] == kFree) result *= static_cast<double>(sys.alphabet(v));
  return result;
}

}  // namespace qproc
