#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>

#include <Eigen/Core>

#include "projlab/geometry.hpp"
#include "projlab/kernels.hpp"
#include "projlab/valence.hpp"

namespace projlab {

using GridPtr = std::shared_ptr<const ManifoldGrid>;

// Covariant tensor field, node-major storage of the valence's stored
// components (all indices down, symmetric slots stored once).
class TensorField {
public:
  TensorField(GridPtr grid, Valence valence, Eigen::VectorXd components);
  static TensorField zeros(GridPtr grid, Valence valence);

  const ManifoldGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Valence& valence() const { return valence_; }
  const Eigen::VectorXd& components() const { return c_; }
  int comps_per_node() const { return ncomp_; }
  double at(std::size_t node, int comp) const { return c_[node * ncomp_ + comp]; }
  std::span<const double> node_components(std::size_t node) const {
    return {c_.data() + node * ncomp_, static_cast<std::size_t>(ncomp_)};
  }

  TensorField with_components(Eigen::VectorXd c) const { return {grid_, valence_, std::move(c)}; }
  TensorField with_valence(Valence v) const;

  TensorField operator+(const TensorField& o) const;
  TensorField operator-(const TensorField& o) const;
  TensorField operator*(double s) const;

private:
  GridPtr grid_;
  Valence valence_;
  int ncomp_;
  Eigen::VectorXd c_;
};

inline TensorField operator*(double s, const TensorField& f) { return f * s; }

// Metric-induced inner product on the stored components at one node.
Eigen::MatrixXd node_gram(const ManifoldGrid& grid, std::size_t node, const Valence& v);
// Block-diagonal w_x * Gram_x over all nodes.
SpMat mass_matrix(const ManifoldGrid& grid, const Valence& v);

double l2_inner(const TensorField& a, const TensorField& b);
double l2_norm(const TensorField& a);

// Full-component array with one slot raised.
struct MixedTensor {
  GridPtr grid;
  Valence valence;  // valence of the covariant field it came from
  int raised_slot;
  Eigen::VectorXd full;  // n^rank components per node, row-major tuples
};

MixedTensor raise_index(const TensorField& f, int slot);
TensorField lower_index(const MixedTensor& t);

// Full n^rank components per node.
Eigen::VectorXd expand_full(const TensorField& f);
TensorField compress_full(GridPtr grid, Valence v, const Eigen::VectorXd& full);

TensorField metric_field(GridPtr grid);
// Removes the g-trace of the last two slots (sym2 or cov1_sym2).
TensorField project_trace_free(const TensorField& f);
// max over nodes of |g^ij trace| of the last two slots
double max_tail_trace(const TensorField& f);

// L_xi g for xi the dual of a one-form, via the discrete covariant derivative.
TensorField lie_derivative_metric(const TensorField& xi_form);

// Deterministic band-limited field. Torus: Fourier modes with |m_j| <= bandwidth.
// Sphere: ambient Cartesian polynomials of degree <= bandwidth pulled back to
// the chart, which keeps the field smooth through the poles.
TensorField random_field(GridPtr grid, Valence v, std::uint64_t seed, int bandwidth);

// Fill stored components from a function of (chart point, full index tuple).
TensorField sample_field(GridPtr grid, Valence v,
                         const std::function<double(std::span<const double>, std::span<const int>)>& f);

// Unit sphere embedding p(theta, phi) and chart tangent vectors dp/dx^a.
std::array<double, 3> sphere_point(double theta, double phi);
std::array<std::array<double, 3>, 2> sphere_tangents(double theta, double phi);

// One-form theta_a = <V(p), d_a p> from an ambient vector field V.
TensorField sphere_one_form(GridPtr grid, const std::function<std::array<double, 3>(const std::array<double, 3>&)>& V);
// Sym2 field phi_ab = <A d_a p, d_b p> for a constant symmetric 3x3 matrix A.
TensorField sphere_sym2_from_matrix(GridPtr grid, const Eigen::Matrix3d& A);

void write_field_csv(const TensorField& f, std::ostream& os);

} // namespace projlab
