#pragma once

#include <memory>

#include <Eigen/Core>

#include "projlab/kernels.hpp"

namespace projlab {

// Sparse Cholesky of a symmetric positive definite matrix (CHOLMOD when
// available, Eigen's simplicial LLT otherwise).
class SpdFactor {
public:
  SpdFactor();
  ~SpdFactor();
  SpdFactor(SpdFactor&&) noexcept;
  SpdFactor& operator=(SpdFactor&&) noexcept;

  bool compute(const SpMat& a);
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  static const char* backend();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// max_i A_ii / M_ii, a cheap upper estimate of the generalized spectrum
double spectral_scale(const SpMat& a, const SpMat& m);

// Solves A x = b for symmetric positive semidefinite A and b in range(A), by
// conjugate gradients preconditioned with the factor of A + eps*scale*M.
class PsdSolver {
public:
  PsdSolver(const SpMat& a, const SpMat& m, double rel_shift = 1e-10);
  Eigen::VectorXd solve(const Eigen::VectorXd& b, double tol = 1e-14, int max_iter = 500) const;
  int last_iterations() const { return iterations_; }
  double last_residual() const { return residual_; }

private:
  SpMat a_;
  SpdFactor factor_;
  mutable int iterations_ = 0;
  mutable double residual_ = 0.0;
};

} // namespace projlab
