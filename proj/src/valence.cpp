#include "projlab/valence.hpp"

#include <algorithm>

#include "projlab/errors.hpp"

namespace projlab {

Valence Valence::general(int rank) {
  if (rank < 0 || rank > 5) throw Error(ErrorCode::invalid_argument, "general valence rank out of range");
  switch (rank) {
  case 0: return scalar();
  case 1: return one_form();
  case 2: return cov2();
  default: return {Symmetry::general, rank, false};
  }
}

int Valence::num_components(int n) const {
  switch (symmetry) {
  case Symmetry::scalar: return 1;
  case Symmetry::one_form: return n;
  case Symmetry::cov2: return n * n;
  case Symmetry::sym2: return n * (n + 1) / 2;
  case Symmetry::cov1_sym2: return n * n * (n + 1) / 2;
  case Symmetry::general: {
    int c = 1;
    for (int r = 0; r < rank; ++r) c *= n;
    return c;
  }
  }
  return 0;
}

int Valence::independent_count(int n) const {
  int c = num_components(n);
  if (trace_free_tail) c -= (symmetry == Symmetry::cov1_sym2) ? n : 1;
  return c;
}

std::string Valence::name() const {
  std::string s;
  switch (symmetry) {
  case Symmetry::scalar: s = "scalar"; break;
  case Symmetry::one_form: s = "one_form"; break;
  case Symmetry::cov2: s = "cov2"; break;
  case Symmetry::sym2: s = "sym2"; break;
  case Symmetry::cov1_sym2: s = "cov1_sym2"; break;
  case Symmetry::general: s = "general" + std::to_string(rank); break;
  }
  if (trace_free_tail) s += "_tf";
  return s;
}

ComponentLayout::ComponentLayout(Valence v, int n) : n_(n), rank_(v.rank), sym_tail_(v.symmetric_tail()) {
  int full = 1;
  for (int r = 0; r < rank_; ++r) full *= n;
  full_to_comp_.assign(full, -1);
  for (int f = 0; f < full; ++f) {
    auto t = full_tuple(f);
    if (sym_tail_ && t[rank_ - 2] > t[rank_ - 1]) continue;
    full_to_comp_[f] = static_cast<int>(tuples_.size());
    tuples_.push_back(t);
  }
  mult_.assign(tuples_.size(), 0);
  for (int f = 0; f < full; ++f) {
    auto t = full_tuple(f);
    if (sym_tail_ && t[rank_ - 2] > t[rank_ - 1]) std::swap(t[rank_ - 2], t[rank_ - 1]);
    full_to_comp_[f] = full_to_comp_[full_linear(t)];
    ++mult_[full_to_comp_[f]];
  }
}

int ComponentLayout::full_linear(std::span<const int> t) const {
  int f = 0;
  for (int r = 0; r < rank_; ++r) f = f * n_ + t[r];
  return f;
}

std::vector<int> ComponentLayout::full_tuple(int f) const {
  std::vector<int> t(rank_);
  for (int r = rank_ - 1; r >= 0; --r) {
    t[r] = f % n_;
    f /= n_;
  }
  return t;
}

int ComponentLayout::comp_of(std::span<const int> full) const { return full_to_comp_[full_linear(full)]; }

std::string ComponentLayout::label(int comp) const {
  std::string s = "c";
  for (int i : tuples_[comp]) s += std::to_string(i);
  return s;
}

} // namespace projlab
