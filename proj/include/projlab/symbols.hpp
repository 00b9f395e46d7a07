#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "projlab/valence.hpp"

namespace projlab {

enum class SymbolTag { S, E, EstarE };
const char* to_string(SymbolTag t) noexcept;

// Principal symbol as a dense map between stored component spaces, the
// factor i dropped.
struct SymbolMap {
  int n;
  Eigen::VectorXd covector;
  Eigen::MatrixXd matrix;
  SymbolTag tag;
};

// sym2 -> cov1_sym2: theta_k phi_ij - (g_ki theta^l phi_lj + g_kj theta^l phi_li)/(n+1)
SymbolMap sigma_S(int n, const Eigen::VectorXd& theta, const Eigen::MatrixXd& g);
// one_form -> cov1_sym2:
// (n+1) w_k (w_i t_j + w_j t_i) - (2 g_ij w_k + g_kj w_i + g_ki w_j) w^l t_l
SymbolMap sigma_E(int n, const Eigen::VectorXd& omega, const Eigen::MatrixXd& g);

// Metric-induced Gram matrix on the stored components of a valence.
Eigen::MatrixXd component_gram(const Valence& v, const Eigen::MatrixXd& g);

struct SymbolCheck {
  double deviation;     // max |lhs - rhs| / max(|rhs|, tiny)
  Eigen::MatrixXd lhs;  // sigma_E^T G sigma_E
  Eigen::MatrixXd rhs;  // 4 (n+1)^2 |xi|^4 G_1
  bool discrepancy;     // deviation > 1e-10
};
SymbolCheck sigma_EstarE_check(int n, const Eigen::VectorXd& xi, const Eigen::MatrixXd& g);

struct InjectivityCertificate {
  SymbolTag tag;
  int n;
  int trials;
  double min_singular_value;  // relative to the largest, Gram-weighted
  bool flagged;
};

// `trials` random unit covectors plus the coordinate axes, g = identity.
InjectivityCertificate injectivity_certificate(SymbolTag tag, int n, int trials, std::uint64_t seed);

// Gram-weighted singular values of a symbol, descending.
Eigen::VectorXd symbol_singular_values(const SymbolMap& s, const Eigen::MatrixXd& g);

} // namespace projlab
