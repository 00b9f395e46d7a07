#pragma once

#include <string>

#include "projlab/fields.hpp"

namespace projlab {

// First-derivative stencils. `biased` is the one-sided second-order stencil
// (-3, 4, -1)/(2h) on taps (0, +1, +2); its Fourier symbol vanishes only at
// zero wavenumber, so assembled normal operators inherit no grid-scale null
// modes. `centered` is (-1, 0, 1)/(2h): skew-adjoint on the periodic grid,
// which makes discrete summation by parts exact.
enum class Stencil { biased, centered };

const char* to_string(Stencil s) noexcept;

struct StencilTaps {
  int offsets[5];
  double coeffs[5];
  int count;
};

StencilTaps stencil_taps(Stencil s);
// Taps used along `axis` of `grid`. The sphere's longitude axis gets the
// fourth-order member of the family ((-3, -10, 18, -6, 1)/(12h) on taps -1..3,
// resp. (1, -8, 0, 8, -1)/(12h) centered): near the poles a longitude step is
// physically short, and the O(dphi^2) error of the 3-tap rule, divided by
// sin(theta) in every metric contraction, does not vanish under refinement.
StencilTaps stencil_taps(Stencil s, const ManifoldGrid& grid, int axis);

struct DiscreteOperator {
  std::string name;
  GridPtr grid;
  Valence domain;
  Valence codomain;
  SpMat matrix;
  SpMat domain_mass;
  SpMat codomain_mass;
  // sign and index conventions of the assembled expression
  std::string convention;

  TensorField apply(const TensorField& f) const;
};

// The pair (A, M) of the generalized problem A x = mu M x, A = D^T M_cod D.
struct NormalOperator {
  std::string name;
  GridPtr grid;
  Valence valence;
  SpMat A;
  SpMat M;

  TensorField apply(const TensorField& f) const;  // M^{-1} A f
};

// Pointwise block-diagonal map built from per-node dense blocks.
SpMat pointwise(const ManifoldGrid& grid, const Valence& in, const Valence& out,
                const std::function<void(std::size_t, Eigen::MatrixXd&)>& block);
SpMat mass_inverse(const ManifoldGrid& grid, const Valence& v);

// Covariant derivative of a full rank-r tensor (all n^r components).
SpMat nabla_full(const ManifoldGrid& grid, int rank, Stencil s);
// Valence of nabla's output for a given input valence.
Valence nabla_codomain(const Valence& v);

DiscreteOperator covariant_derivative(GridPtr grid, Valence v, Stencil s = Stencil::biased);
DiscreteOperator delta_star(GridPtr grid, Stencil s = Stencil::biased);
// delta = weighted transpose of d, delta* or nabla (one_form, sym2, cov1_sym2 sources)
DiscreteOperator delta_div(GridPtr grid, Valence source, Stencil s = Stencil::biased);
// Direct first-slot contraction of nabla. This is the divergence used inside S
// and E: near the poles the cell weights vary on the grid scale and -delta
// (a transpose) is not a consistent divergence there.
DiscreteOperator divergence(GridPtr grid, Valence source, Stencil s = Stencil::biased);
DiscreteOperator sinjukov_S(GridPtr grid, Stencil s = Stencil::biased);
DiscreteOperator eisenhart_E(GridPtr grid, Stencil s = Stencil::biased);

// M_dom^{-1} D^T M_cod
DiscreteOperator weighted_adjoint(const DiscreteOperator& d);

enum class AdjointConstruction {
  weighted_transpose,
  // direct discretization of the integration-by-parts expression
  formula,
  // E only: 2(n+1) nabla^i nabla^j Phi_jik + 2 nabla_k nabla_i sigma^i, i.e.
  // without the last-slot trace term and with the opposite sign on the
  // remaining trace term; kept to quantify how far it is from the adjoint
  reduced_formula,
};

DiscreteOperator sinjukov_S_star(GridPtr grid, AdjointConstruction c = AdjointConstruction::weighted_transpose);
DiscreteOperator eisenhart_E_star(GridPtr grid, AdjointConstruction c = AdjointConstruction::weighted_transpose);

NormalOperator normal_operator(const DiscreteOperator& d);
// nabla* nabla phi - (2/(n+1)) delta* delta phi, with every derivative
// discretized directly by the forward stencil (no transposes).
DiscreteOperator sinjukov_normal_formula(GridPtr grid);
// Weitzenbock form nabla* nabla + Ric on one-forms.
NormalOperator hodge_laplacian_1forms(GridPtr grid);
NormalOperator rough_laplacian(GridPtr grid, Valence v);

struct IdentityTerms {
  double curvature_term;   // integral of K(phi, phi)
  double cross_term;       // integral of nabla^k phi^ij nabla_i phi_kj
  double divergence_term;  // integral of |div phi|^2
  double residual;         // curvature + cross - divergence
  double norm_sq;          // ||phi||^2 + ||nabla phi||^2
  double relative() const { return residual / norm_sq; }
};

IdentityTerms integral_identity(const TensorField& phi, Stencil s = Stencil::centered);
double integral_identity_residual(const TensorField& phi, Stencil s = Stencil::centered);

// Matrix Market export: <stem>.mtx and <stem>-mass.mtx (domain mass).
void write_matrix_market(const DiscreteOperator& d, const std::string& stem);

double frobenius(const SpMat& a);

} // namespace projlab
