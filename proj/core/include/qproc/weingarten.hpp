// Symmetric-group helpers, unitary Weingarten values and Haar moments.
//
// Permutations of {0..n-1} are stored as mapping arrays and enumerated in
// lexicographic order. Composition is (a * b)(i) = a(b(i)).
#pragma once

#include "qproc/qmath.hpp"

#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace qproc {

class Permutation {
 public:
  explicit Permutation(std::vector<std::size_t> mapping);
  static Permutation identity(std::size_t n);

  std::size_t degree() const { return map_.size(); }
  const std::vector<std::size_t>& mapping() const { return map_; }
  std::size_t operator()(std::size_t i) const { return map_[i]; }

  Permutation inverse() const;
  Permutation operator*(const Permutation& rhs) const;
  bool operator==(const Permutation&) const = default;
  auto operator<=>(const Permutation&) const = default;

 private:
  std::vector<std::size_t> map_;
};

struct CycleType {
  std::vector<std::size_t> parts;  // descending
  /// Parts joined by '-', e.g. "2-1".
  std::string str() const;
  bool operator==(const CycleType&) const = default;
  auto operator<=>(const CycleType&) const = default;
};

std::size_t cycle_count(const Permutation& p);
CycleType cycle_type(const Permutation& p);

/// All permutations of degree n in lexicographic order of their mappings.
std::vector<Permutation> all_permutations(std::size_t n);

/// Enumeration of S_n with a product table, for n <= 6.
class SymmetricGroup {
 public:
  explicit SymmetricGroup(std::size_t n);
  /// Shared instance per degree.
  static std::shared_ptr<const SymmetricGroup> get(std::size_t n);

  std::size_t degree() const { return n_; }
  std::size_t order() const { return perms_.size(); }
  const Permutation& at(std::size_t idx) const { return perms_[idx]; }
  std::size_t index_of(const Permutation& p) const;
  /// Index of at(a) * at(b).
  std::size_t product(std::size_t a, std::size_t b) const { return table_[a * order() + b]; }
  std::size_t inverse(std::size_t a) const { return inv_[a]; }
  std::size_t cycles(std::size_t a) const { return cycles_[a]; }

 private:
  std::size_t n_;
  std::vector<Permutation> perms_;
  std::vector<std::uint16_t> table_;
  std::vector<std::uint16_t> inv_;
  std::vector<std::uint8_t> cycles_;
};

class WeingartenTable {
 public:
  std::size_t n() const { return group_->degree(); }
  std::size_t d() const { return d_; }
  const SymmetricGroup& group() const { return *group_; }

  double value(const Permutation& p) const { return values_[group_->index_of(p)]; }
  double value_at(std::size_t idx) const { return values_[idx]; }
  /// Value on a cycle type; argument error if no permutation has it.
  double value(const CycleType& c) const;
  /// Distinct cycle types with their values, largest type first.
  std::vector<std::pair<CycleType, double>> by_cycle_type() const;

  /// max over sigma of |sum_tau d^{#(sigma tau^-1)} Wg(tau) - delta_{sigma,id}|.
  double row_residual() const { return residual_; }
  /// True when the pivoted-LU fallback produced the table.
  bool used_fallback() const { return fallback_; }

 private:
  friend WeingartenTable weingarten_table(std::size_t n, std::size_t d);
  std::shared_ptr<const SymmetricGroup> group_;
  std::size_t d_ = 0;
  std::vector<double> values_;
  double residual_ = 0.0;
  bool fallback_ = false;
};

/// Solves the Gram system G[s][t] = d^{#(s t^-1)}. Needs 1 <= n <= 6, d >= n.
WeingartenTable weingarten_table(std::size_t n, std::size_t d);

/// E[U_{i1 j1}..U_{in jn} conj(U_{i'1 j'1})..conj(U_{i'n j'n})] for Haar U on d.
cplx haar_moment_tensor(std::size_t n, std::size_t d, std::span<const std::size_t> rows,
                        std::span<const std::size_t> cols,
                        std::span<const std::size_t> conj_rows,
                        std::span<const std::size_t> conj_cols);

/// n = 1: tr(x) I / d. n = 2: alpha I + beta SWAP.
ComplexMatrix analytic_twirl(std::size_t n, const ComplexMatrix& x, std::size_t d);

/// Writes "n,d,cycle_type,value" rows (with header) for the table.
void write_weingarten_csv(std::ostream& os, const WeingartenTable& table, bool header = true);

/// Index variables over finite alphabets with equality and pin constraints.
class DeltaSystem {
 public:
  std::size_t add_variable(std::size_t alphabet);
  void equate(std::size_t a, std::size_t b);
  void pin(std::size_t var, std::size_t value);
  /// Drops equalities and pins, keeping the variables.
  void clear_constraints();

  std::size_t variable_count() const { return alphabet_.size(); }
  std::size_t alphabet(std::size_t var) const { return alphabet_.at(var); }
  const std::vector<std::pair<std::size_t, std::size_t>>& equalities() const { return equalities_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& pins() const { return pins_; }

 private:
  std::vector<std::size_t> alphabet_;
  std::vector<std::pair<std::size_t, std::size_t>> equalities_;
  std::vector<std::pair<std::size_t, std::size_t>> pins_;
};

/// Number of assignments satisfying all constraints: the product of alphabet
/// sizes over unpinned components, or 0 on a pin contradiction.
double delta_degree(const DeltaSystem& sys);

}  // namespace qproc
