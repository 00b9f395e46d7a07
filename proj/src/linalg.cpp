#include "projlab/linalg.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>
#ifdef PROJLAB_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

#include "projlab/errors.hpp"

namespace projlab {

struct SpdFactor::Impl {
#ifdef PROJLAB_HAVE_CHOLMOD
  Eigen::CholmodSimplicialLLT<SpMatCol, Eigen::Lower> llt;
#else
  Eigen::SimplicialLLT<SpMatCol, Eigen::Lower> llt;
#endif
};

SpdFactor::SpdFactor() : impl_(std::make_unique<Impl>()) {}
SpdFactor::~SpdFactor() = default;
SpdFactor::SpdFactor(SpdFactor&&) noexcept = default;
SpdFactor& SpdFactor::operator=(SpdFactor&&) noexcept = default;

const char* SpdFactor::backend() {
#ifdef PROJLAB_HAVE_CHOLMOD
  return "cholmod-simplicial-llt";
#else
  return "eigen-simplicial-llt";
#endif
}

bool SpdFactor::compute(const SpMat& a) {
  const SpMatCol c = a;
  impl_->llt.compute(c);
  return impl_->llt.info() == Eigen::Success;
}

Eigen::MatrixXd SpdFactor::solve(const Eigen::MatrixXd& b) const { return impl_->llt.solve(b); }
Eigen::VectorXd SpdFactor::solve(const Eigen::VectorXd& b) const { return impl_->llt.solve(b); }

double spectral_scale(const SpMat& a, const SpMat& m) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    const double mi = m.coeff(i, i);
    if (mi > 0.0) s = std::max(s, a.coeff(i, i) / mi);
  }
  return s;
}

PsdSolver::PsdSolver(const SpMat& a, const SpMat& m, double rel_shift) : a_(a) {
  const double scale = spectral_scale(a, m);
  double eps = rel_shift * std::max(scale, 1e-300);
  for (int attempt = 0; attempt < 4; ++attempt, eps *= 100.0) {
    if (factor_.compute(SpMat(a + eps * m))) return;
  }
  throw Error(ErrorCode::solver_error, "regularized factorization failed");
}

Eigen::VectorXd PsdSolver::solve(const Eigen::VectorXd& b, double tol, int max_iter) const {
  const double bn = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  iterations_ = 0;
  residual_ = 0.0;
  if (bn == 0.0) return x;
  Eigen::VectorXd r = b, z = factor_.solve(r), p = z;
  double rz = r.dot(z);
  Eigen::VectorXd best = x;
  double best_res = 1.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd ap = a_ * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    iterations_ = it;
    // true residual every few steps to guard against drift
    if (it % 10 == 0) r = b - a_ * x;
    const double res = r.norm() / bn;
    if (res < best_res) {
      best_res = res;
      best = x;
    }
    if (res <= tol) break;
    z = factor_.solve(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  residual_ = (b - a_ * best).norm() / bn;
  return best;
}

} // namespace projlab
