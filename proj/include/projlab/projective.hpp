#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "projlab/fields.hpp"

namespace projlab {

struct ReconstructionResult {
  GridPtr grid;
  std::vector<Eigen::MatrixXd> gbar;  // per node
  Eigen::VectorXd rho;                // zero (weighted) mean
  TensorField omega;                  // div(phi)/(n+1)
  double closedness_residual = 0.0;   // |d rho - alpha|
  double alpha_norm = 0.0;
  double kernel_membership = 0.0;     // |S phi| / |phi|, reported only
  double min_det = 0.0;               // min over nodes of det(g^{-1} phi)
};

// gbar_ij = e^{2 rho} phi^{kl} g_ki g_lj with phi^{kl} the matrix inverse of
// phi_kl, and d rho = alpha = -omega_k phi^{kl} g_li solved in least squares.
// Throws DegenerateTensor for a non-definite or nearly singular phi and
// NonIntegrable when the least-squares residual exceeds max(1e-3, h^2) |alpha|,
// h the grid step in radians.
ReconstructionResult reconstruct_projective_metric(GridPtr grid, const TensorField& phi);

// Orthogonal projection of `target` onto span(columns of `basis`) in the
// weighted L2 product, rescaled to max pointwise |psi|_g = 1.
TensorField project_to_span(const TensorField& target, const Eigen::MatrixXd& basis);
double max_pointwise_norm(const TensorField& f);

// Christoffel symbols along a curve: either the chart's closed form for g or
// bilinear interpolation of nodal values for a reconstructed metric.
class MetricSource {
public:
  static MetricSource background(GridPtr grid);
  static MetricSource reconstructed(const ReconstructionResult& r);

  int dim() const { return grid_->dim(); }
  const ManifoldGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  bool is_background() const { return nodal_gamma_.empty(); }
  // Gamma^k_ij at x, index (k*n + i)*n + j
  std::vector<double> christoffel(std::span<const double> x) const;
  Eigen::MatrixXd metric(std::span<const double> x) const;

private:
  GridPtr grid_;
  std::vector<double> nodal_gamma_;  // n^3 per node, difference tensor added to the closed form
  std::vector<double> nodal_metric_; // n^2 per node
  std::vector<double> interpolate(const std::vector<double>& nodal, int width, std::span<const double> x) const;
};

struct Curve {
  std::vector<double> t;
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> v;
};

// Classical RK4 for x'' + Gamma(x)(x', x') = 0. Raises PoleProximity when a
// sphere trajectory gets closer than 2h to a pole.
Curve geodesic_integrate(const MetricSource& m, std::vector<double> x0, std::vector<double> v0, double T, int steps);

// Max over samples of the gbar geodesic curvature of a g geodesic,
// |a_perp|_gbar / |x'|^2_gbar with a = x'' + Gamma_bar(x', x').
double unparametrized_geodesic_residual(const MetricSource& gbar, const Curve& c,
                                        std::vector<double>* per_sample = nullptr);

// Chart data of a unit-speed great circle through p with unit normal nrm.
void great_circle_start(const Eigen::Vector3d& p, const Eigen::Vector3d& nrm, std::vector<double>& x0,
                        std::vector<double>& v0);

// A fixed target for kernel perturbations: on S^2 the tangential part of an
// ambient quadratic form, on T^n a constant tensor.
TensorField perturbation_target(GridPtr grid);

struct GeodesicSurvey {
  double max_residual = 0.0;
  std::vector<double> per_curve;
  int worst = -1;
  Curve worst_curve;
  std::vector<double> worst_samples;
};
// `count` random unit-speed geodesics of the background metric over [0, 2 pi],
// scored with the gbar residual. Sphere great circles keep |z| <= 0.95.
GeodesicSurvey geodesic_survey(const MetricSource& gbar, int count, std::uint64_t seed, int steps = 2000);

void write_curve_csv(const Curve& c, const std::vector<double>& residual, std::ostream& os);

} // namespace projlab
