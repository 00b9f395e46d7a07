#pragma once

#include <span>
#include <string>
#include <vector>

namespace projlab {

// `general` is a covariant tensor of the given rank with no symmetry; it is
// needed for the derivative of a 1-form and for the higher derivatives used
// by the direct adjoint formulas.
enum class Symmetry { scalar, one_form, cov2, sym2, cov1_sym2, general };

struct Valence {
  Symmetry symmetry = Symmetry::scalar;
  int rank = 0;
  bool trace_free_tail = false;

  static Valence scalar() { return {Symmetry::scalar, 0, false}; }
  static Valence one_form() { return {Symmetry::one_form, 1, false}; }
  static Valence cov2() { return {Symmetry::cov2, 2, false}; }
  static Valence sym2() { return {Symmetry::sym2, 2, false}; }
  static Valence cov1_sym2(bool trace_free = false) { return {Symmetry::cov1_sym2, 3, trace_free}; }
  static Valence general(int rank);

  bool symmetric_tail() const { return symmetry == Symmetry::sym2 || symmetry == Symmetry::cov1_sym2; }
  // Stored components per node.
  int num_components(int n) const;
  // Degrees of freedom per node once trace constraints are imposed.
  int independent_count(int n) const;
  std::string name() const;

  // Storage class only; trace_free_tail is a constraint on values.
  bool same_storage(const Valence& o) const { return symmetry == o.symmetry && rank == o.rank; }
  bool operator==(const Valence& o) const = default;
};

// Maps between stored components and full index tuples for a valence in
// dimension n. Full tuples are linearised row-major (first slot slowest).
class ComponentLayout {
public:
  ComponentLayout(Valence v, int n);

  int size() const { return static_cast<int>(tuples_.size()); }
  int full_size() const { return static_cast<int>(full_to_comp_.size()); }
  int rank() const { return rank_; }
  int dim() const { return n_; }
  std::span<const int> tuple(int comp) const { return tuples_[comp]; }
  // stored component holding the given full tuple (symmetric tail canonicalised)
  int comp_of(std::span<const int> full) const;
  int comp_of_full(int full_linear) const { return full_to_comp_[full_linear]; }
  int full_linear(std::span<const int> full) const;
  std::vector<int> full_tuple(int full_linear) const;
  // number of full tuples represented by a stored component
  int multiplicity(int comp) const { return mult_[comp]; }
  std::string label(int comp) const;

private:
  int n_;
  int rank_;
  bool sym_tail_;
  std::vector<std::vector<int>> tuples_;
  std::vector<int> full_to_comp_;
  std::vector<int> mult_;
};

} // namespace projlab
