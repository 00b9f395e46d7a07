#include "projlab/symbols.hpp"

#include <cmath>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "projlab/errors.hpp"

namespace projlab {

const char* to_string(SymbolTag t) noexcept {
  switch (t) {
  case SymbolTag::S: return "S";
  case SymbolTag::E: return "E";
  case SymbolTag::EstarE: return "EstarE";
  }
  return "?";
}

namespace {

void check_args(int n, const Eigen::VectorXd& cov, const Eigen::MatrixXd& g) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "symbols need n >= 2");
  if (cov.size() != n || g.rows() != n || g.cols() != n)
    throw Error(ErrorCode::invalid_argument, "covector and metric must have dimension n");
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * g.cwiseAbs().maxCoeff())
    throw Error(ErrorCode::invalid_metric, "metric is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::invalid_metric, "metric is not positive definite");
}

} // namespace

SymbolMap sigma_S(int n, const Eigen::VectorXd& theta, const Eigen::MatrixXd& g) {
  check_args(n, theta, g);
  const Eigen::VectorXd up = g.inverse() * theta;
  ComponentLayout in(Valence::sym2(), n), out(Valence::cov1_sym2(), n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(out.size(), in.size());
  const double c = 1.0 / (n + 1);
  for (int r = 0; r < out.size(); ++r) {
    const int k = out.tuple(r)[0], i = out.tuple(r)[1], j = out.tuple(r)[2];
    m(r, in.comp_of(std::vector<int>{i, j})) += theta[k];
    for (int l = 0; l < n; ++l) {
      m(r, in.comp_of(std::vector<int>{l, j})) -= c * g(k, i) * up[l];
      m(r, in.comp_of(std::vector<int>{l, i})) -= c * g(k, j) * up[l];
    }
  }
  return {n, theta, std::move(m), SymbolTag::S};
}

SymbolMap sigma_E(int n, const Eigen::VectorXd& w, const Eigen::MatrixXd& g) {
  check_args(n, w, g);
  const Eigen::VectorXd up = g.inverse() * w;
  ComponentLayout out(Valence::cov1_sym2(), n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(out.size(), n);
  for (int r = 0; r < out.size(); ++r) {
    const int k = out.tuple(r)[0], i = out.tuple(r)[1], j = out.tuple(r)[2];
    m(r, j) += (n + 1) * w[k] * w[i];
    m(r, i) += (n + 1) * w[k] * w[j];
    const double trace_coef = 2.0 * g(i, j) * w[k] + g(k, j) * w[i] + g(k, i) * w[j];
    for (int l = 0; l < n; ++l) m(r, l) -= trace_coef * up[l];
  }
  return {n, w, std::move(m), SymbolTag::E};
}

Eigen::MatrixXd component_gram(const Valence& v, const Eigen::MatrixXd& g) {
  const int n = static_cast<int>(g.rows());
  const Eigen::MatrixXd gi = g.inverse();
  ComponentLayout lay(v, n);
  const int F = lay.full_size();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(lay.size(), lay.size());
  for (int a = 0; a < F; ++a) {
    const auto I = lay.full_tuple(a);
    for (int b = 0; b < F; ++b) {
      const auto J = lay.full_tuple(b);
      double p = 1.0;
      for (std::size_t s = 0; s < I.size(); ++s) p *= gi(I[s], J[s]);
      G(lay.comp_of_full(a), lay.comp_of_full(b)) += p;
    }
  }
  return G;
}

SymbolCheck sigma_EstarE_check(int n, const Eigen::VectorXd& xi, const Eigen::MatrixXd& g) {
  const SymbolMap s = sigma_E(n, xi, g);
  const Eigen::MatrixXd G3 = component_gram(Valence::cov1_sym2(), g);
  const Eigen::MatrixXd G1 = component_gram(Valence::one_form(), g);
  SymbolCheck c;
  c.lhs = s.matrix.transpose() * G3 * s.matrix;
  const double norm2 = xi.dot(g.inverse() * xi);
  c.rhs = 4.0 * (n + 1.0) * (n + 1.0) * norm2 * norm2 * G1;
  const double ref = c.rhs.cwiseAbs().maxCoeff();
  const double diff = (c.lhs - c.rhs).cwiseAbs().maxCoeff();
  c.deviation = ref > 0.0 ? diff / ref : diff;
  c.discrepancy = c.deviation > 1e-10;
  return c;
}

Eigen::VectorXd symbol_singular_values(const SymbolMap& s, const Eigen::MatrixXd& g) {
  const Valence dom = s.tag == SymbolTag::S ? Valence::sym2() : Valence::one_form();
  const Eigen::MatrixXd Ld = component_gram(dom, g).llt().matrixL();
  const Eigen::MatrixXd Lc = component_gram(Valence::cov1_sym2(), g).llt().matrixL();
  // |X v|_G over |v|_G: the operator Lc^T X Ld^{-T}
  const Eigen::MatrixXd W = Lc.transpose() * s.matrix * Ld.transpose().inverse();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(W).singularValues();
}

InjectivityCertificate injectivity_certificate(SymbolTag tag, int n, int trials, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "injectivity needs n >= 2");
  if (trials < 1) throw Error(ErrorCode::invalid_argument, "trials must be positive");
  if (tag == SymbolTag::EstarE) throw Error(ErrorCode::invalid_argument, "certificate is defined for S and E");
  const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double worst = INFINITY;
  auto probe = [&](const Eigen::VectorXd& c) {
    const SymbolMap s = tag == SymbolTag::S ? sigma_S(n, c, g) : sigma_E(n, c, g);
    const Eigen::VectorXd sv = symbol_singular_values(s, g);
    worst = std::min(worst, sv[sv.size() - 1] / sv[0]);
  };
  for (int a = 0; a < n; ++a) probe(Eigen::VectorXd::Unit(n, a));
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd c(n);
    for (int a = 0; a < n; ++a) c[a] = nd(rng);
    probe(c / c.norm());
  }
  return {tag, n, trials, worst, !(worst > 1e-10)};
}

} // namespace projlab
