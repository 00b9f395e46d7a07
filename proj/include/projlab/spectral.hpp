#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "projlab/linalg.hpp"
#include "projlab/operators.hpp"

namespace projlab {

enum class EigenMode { automatic, dense, shift_invert };
enum class OperatorTag { sinjukov, eisenhart };

const char* to_string(EigenMode m) noexcept;
const char* to_string(OperatorTag t) noexcept;

struct ReferenceValue {
  std::string label;
  double value;
  std::string branch;  // e.g. "exact", "coexact", "trace", "im_delta_star", "tt", "kernel"
  int degree;
  bool flagged = false;  // value known to conflict with structural facts
};

struct ReferenceMatch {
  std::string label;
  double reference;
  std::optional<double> computed;  // cluster mean, absent if UNMATCHED
  int multiplicity = 0;
  double rel_error = 0.0;
  int first = -1;  // index of the matched cluster's first eigenvalue
};

struct ComparisonTable {
  std::vector<ReferenceMatch> matches;            // one per reference, matched or not
  std::vector<std::pair<double, int>> unmatched;  // computed clusters (mean, multiplicity) left over
  double max_rel_error = 0.0;                     // over matched entries
  bool all_matched() const;
};

struct SpectrumReport {
  std::string operator_tag;
  std::string geometry;
  std::uint64_t grid_hash = 0;
  std::vector<double> eigenvalues;
  std::vector<double> residuals;
  Eigen::MatrixXd vectors;  // M-orthonormal columns (not serialized)
  int kernel_count = 0;
  double gap_ratio = 0.0;
  bool unstable = false;
  double scale = 0.0;
  double shift = 0.0;
  int iterations = 0;
  std::string mode;
  std::optional<ComparisonTable> comparison;
};

// k smallest eigenpairs of A x = mu M x.
SpectrumReport solve_smallest(const SpMat& A, const SpMat& M, int k, EigenMode mode = EigenMode::automatic,
                              std::uint64_t seed = 1, bool want_vectors = true);
SpectrumReport solve_smallest(const NormalOperator& op, int k, EigenMode mode = EigenMode::automatic,
                              std::uint64_t seed = 1, bool want_vectors = true);

// Kernel count: position of the last jump mu_K / mu_{K-1} >= 50 between
// computed values (values below 1e-12 max|mu| clamped). Without one, the best
// jump >= 10 is used and flagged unstable, else K = 0. Updates kernel_count,
// gap_ratio and unstable in the report.
int kernel_dimension(SpectrumReport& report);

std::vector<ReferenceValue> analytic_sphere_spectrum(OperatorTag tag, int n, int k_max);
// Closed forms obtained from the Bochner-Weitzenbock calculus on S^n for the
// exact and coexact branches of E*E (independent of the table above).
std::vector<ReferenceValue> weitzenbock_sphere_spectrum(int n, int k_max);

struct Cluster {
  double mean;
  int first;
  int multiplicity;
};
std::vector<Cluster> cluster_eigenvalues(const std::vector<double>& values, double rel_tol, double abs_floor);

ComparisonTable compare_to_reference(const std::vector<double>& eigenvalues, const std::vector<ReferenceValue>& refs,
                                     double rel_tol, double cluster_rel_tol = 1e-2, double abs_floor = 1e-8);

// Compares the eigenvalues above the report's kernel with the nonzero
// references (the kernel itself is judged by kernel_count); `first` indices
// refer to the full report.
ComparisonTable compare_nonkernel(const SpectrumReport& r, const std::vector<ReferenceValue>& refs, double rel_tol);

// Exact eigenvalues of the assembled torus normal operator restricted to the
// Fourier mode m, from the stencil symbol alone.
std::vector<double> torus_fourier_oracle(int n, int N, double L, OperatorTag tag, const std::vector<int>& m,
                                         Stencil s = Stencil::biased);
// Oracle eigenpairs with eigenvectors in stored-component coordinates.
void torus_fourier_oracle_pairs(int n, int N, double L, OperatorTag tag, const std::vector<int>& m,
                                Eigen::VectorXd& values, Eigen::MatrixXcd& vectors);
// Smallest `count` oracle eigenvalues over all modes with |m_j| <= max_mode.
std::vector<double> torus_oracle_smallest(int n, int N, double L, OperatorTag tag, int count, int max_mode);

struct BergerEbinParts {
  TensorField trace_part;
  TensorField im_part;
  TensorField tt_part;
  double trace_fraction;
  double im_fraction;
  double tt_fraction;
};

// L2-orthogonal splitting phi = (conformal part) + delta* theta + TT. The
// image of delta* is projected first; the conformal part is the projection
// onto the complement of im delta* inside im delta* + C(M) g.
// Projectors are Q_1 Q_1^T from sparse QR of the mass-weighted generators
// ([delta*] and [C(M) g | delta*]) rather than normal equations: on S^2 the
// trace-free part of delta* has a band of near-null pole modes that makes any
// regularized solve lose idempotence.
class BergerEbin {
public:
  explicit BergerEbin(GridPtr grid);
  ~BergerEbin();
  BergerEbin(BergerEbin&&) noexcept;
  BergerEbin& operator=(BergerEbin&&) noexcept;

  TensorField project_image(const TensorField& phi) const;   // onto im delta*
  TensorField project_span(const TensorField& phi) const;    // onto im delta* + C g
  BergerEbinParts decompose(const TensorField& phi) const;

private:
  struct Range;
  GridPtr grid_;
  SpMat chol_t_, chol_t_inv_;  // M = L L^T blockwise; stores L^T and L^-T
  std::unique_ptr<Range> im_, span_;
};

BergerEbinParts classify_sinjukov_eigentensor(GridPtr grid, const TensorField& phi);

// Exact part d u of a one-form, u = least-squares potential.
class HodgeProjector {
public:
  explicit HodgeProjector(GridPtr grid);
  TensorField exact_part(const TensorField& theta) const;
  Eigen::VectorXd potential(const TensorField& theta) const;

private:
  GridPtr grid_;
  SpMat d_, m1_;
  std::unique_ptr<PsdSolver> solve_;
};

// Rotation of an M-orthonormal cluster basis V (one-form columns) that
// diagonalizes the exact-part projector inside span V. Degenerate clusters
// mix branches arbitrarily; after the rotation each column is (nearly) pure.
struct HodgeSplit {
  Eigen::MatrixXd basis;            // V U
  Eigen::VectorXd exact_fraction;   // ascending, |P_exact v|^2 per column
  Eigen::VectorXd rayleigh;         // v^T A v per column
  int exact_count = 0;              // fraction >= 0.5
  int coexact_count = 0;
};
HodgeSplit hodge_split(const HodgeProjector& hp, GridPtr grid, const SpMat& A, const Eigen::MatrixXd& V,
                       const SpMat& M);

struct RichardsonEstimate {
  double order;
  double limit;
  bool noisy;
};
// coarse, medium, fine at ratio 2
RichardsonEstimate richardson(double coarse, double medium, double fine);

struct ConvergenceRow {
  int index;
  std::vector<double> values;  // per resolution
  RichardsonEstimate estimate;
};

struct ConvergenceStudy {
  std::vector<std::string> grids;
  std::vector<ConvergenceRow> rows;
};

// Sphere grids with n_theta in `n_thetas` (each twice the previous) or torus
// grids with N in `ns`; tracks the k smallest eigenvalues by index.
ConvergenceStudy convergence_study(const std::vector<GridPtr>& grids, OperatorTag tag, int k);

NormalOperator build_normal(GridPtr grid, OperatorTag tag);

} // namespace projlab
