#include "projlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseQR>
#include <Eigen/OrderingMethods>

#include <arpack/arpack.hpp>

#include "projlab/errors.hpp"

namespace projlab {

const char* to_string(EigenMode m) noexcept {
  switch (m) {
  case EigenMode::automatic: return "automatic";
  case EigenMode::dense: return "dense";
  case EigenMode::shift_invert: return "shift_invert";
  }
  return "?";
}

const char* to_string(OperatorTag t) noexcept { return t == OperatorTag::sinjukov ? "sinjukov" : "eisenhart"; }

bool ComparisonTable::all_matched() const {
  for (const auto& m : matches)
    if (!m.computed) return false;
  return unmatched.empty();
}

namespace {

constexpr int dense_limit = 1500;

Eigen::VectorXd residual_norms(const SpMat& A, const SpMat& M, const Eigen::MatrixXd& X, const Eigen::VectorXd& mu,
                               double scale) {
  Eigen::VectorXd r(X.cols());
  const Eigen::MatrixXd AX = A * X, MX = M * X;
  for (int i = 0; i < X.cols(); ++i) {
    const double den = scale * MX.col(i).norm();
    r[i] = (AX.col(i) - mu[i] * MX.col(i)).norm() / (den > 0 ? den : 1.0);
  }
  return r;
}

void dense_solve(const SpMat& A, const SpMat& M, int k, bool want_vectors, SpectrumReport& rep) {
  const Eigen::MatrixXd Ad = Eigen::MatrixXd(A), Md = Eigen::MatrixXd(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      Ad, Md, (want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly) | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::solver_error, "dense generalized eigensolver failed");
  rep.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + k);
  rep.mode = "dense";
  if (want_vectors) {
    rep.vectors = es.eigenvectors().leftCols(k);
    const Eigen::VectorXd r = residual_norms(A, M, rep.vectors, es.eigenvalues().head(k), rep.scale);
    rep.residuals.assign(r.data(), r.data() + k);
  }
}

// Implicitly restarted Lanczos on (A - sigma M)^{-1} M with a small negative
// shift, so the factorized matrix stays positive definite even though A is
// singular on the kernel.
void shift_invert_solve(const SpMat& A, const SpMat& M, int k, std::uint64_t seed, SpectrumReport& rep) {
  const int dim = static_cast<int>(A.rows());
  SpdFactor factor;
  // the smallest shift that still factorizes: a large one merges the kernel and
  // the first clusters into one near-degenerate cluster of the inverted operator
  double sigma = -1e-15 * rep.scale;
  int attempt = 0;
  while (!factor.compute(SpMat(A - sigma * M))) {
    if (++attempt == 5) throw Error(ErrorCode::solver_error, "shifted factorization failed");
    sigma *= 100.0;
  }
  rep.shift = sigma;

  const int ncv = std::min(dim, std::max(2 * k + 1, k + 24));
  const int lworkl = ncv * (ncv + 8);
  std::vector<double> resid(dim), v(static_cast<std::size_t>(dim) * ncv), workd(3 * dim), workl(lworkl);
  std::vector<a_int> iparam(11, 0), ipntr(14, 0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (double& r : resid) r = ud(rng);
  iparam[0] = 1;     // exact shifts
  iparam[2] = 3000;  // max restarts
  iparam[6] = 3;     // shift-invert, generalized
  a_int ido = 0, info = 1;
  Eigen::VectorXd buf(dim);
  while (true) {
    arpack::saupd(ido, arpack::bmat::generalized, dim, arpack::which::largest_magnitude, k, 0.0, resid.data(), ncv,
                  v.data(), dim, iparam.data(), ipntr.data(), workd.data(), workl.data(), lworkl, info);
    if (ido == 99) break;
    double* x = workd.data() + ipntr[0] - 1;
    double* y = workd.data() + ipntr[1] - 1;
    Eigen::Map<Eigen::VectorXd> xv(x, dim), yv(y, dim);
    if (ido == -1) {
      buf = M * xv;
      yv = factor.solve(buf);
    } else if (ido == 1) {
      yv = factor.solve(Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(workd.data() + ipntr[2] - 1, dim)));
    } else if (ido == 2) {
      yv = M * xv;
    } else {
      throw Error(ErrorCode::solver_error, "unexpected ARPACK request " + std::to_string(ido));
    }
  }
  if (info < 0 || info == 1)
    throw Error(ErrorCode::solver_error, "ARPACK saupd failed, info = " + std::to_string(info));
  std::vector<a_int> select(ncv);
  Eigen::VectorXd d(k);
  Eigen::MatrixXd z(dim, k);
  a_int einfo = 0;
  arpack::seupd(1, arpack::howmny::ritz_vectors, select.data(), d.data(), z.data(), dim, sigma,
                arpack::bmat::generalized, dim, arpack::which::largest_magnitude, k, 0.0, resid.data(), ncv, v.data(),
                dim, iparam.data(), ipntr.data(), workd.data(), workl.data(), lworkl, einfo);
  if (einfo != 0) throw Error(ErrorCode::solver_error, "ARPACK seupd failed, info = " + std::to_string(einfo));
  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
  Eigen::VectorXd mu(k);
  rep.vectors.resize(dim, k);
  for (int i = 0; i < k; ++i) {
    mu[i] = d[order[i]];
    rep.vectors.col(i) = z.col(order[i]);
  }
  rep.iterations = iparam[2];
  rep.mode = "shift_invert";
  rep.eigenvalues.assign(mu.data(), mu.data() + k);
  const Eigen::VectorXd res = residual_norms(A, M, rep.vectors, mu, rep.scale);
  rep.residuals.assign(res.data(), res.data() + k);
  if (res.maxCoeff() > 1e-8) throw Error(ErrorCode::solver_error, "shift-invert Lanczos residual too large");
}

} // namespace

SpectrumReport solve_smallest(const SpMat& A, const SpMat& M, int k, EigenMode mode, std::uint64_t seed,
                              bool want_vectors) {
  const int dim = static_cast<int>(A.rows());
  if (k < 1 || k > dim / 4) throw Error(ErrorCode::invalid_argument, "need 1 <= k <= dim/4");
  SpectrumReport rep;
  rep.scale = spectral_scale(A, M);
  if (mode == EigenMode::automatic) mode = dim <= dense_limit ? EigenMode::dense : EigenMode::shift_invert;
  if (mode == EigenMode::dense) dense_solve(A, M, k, want_vectors, rep);
  else shift_invert_solve(A, M, k, seed, rep);
  if (!want_vectors) rep.vectors.resize(0, 0);
  kernel_dimension(rep);
  return rep;
}

SpectrumReport solve_smallest(const NormalOperator& op, int k, EigenMode mode, std::uint64_t seed, bool want_vectors) {
  SpectrumReport rep = solve_smallest(op.A, op.M, k, mode, seed, want_vectors);
  rep.operator_tag = op.name;
  rep.geometry = op.grid->parameter_string();
  rep.grid_hash = op.grid->hash();
  return rep;
}

int kernel_dimension(SpectrumReport& rep) {
  const auto& mu = rep.eigenvalues;
  const int k = static_cast<int>(mu.size());
  if (k == 0) return 0;
  double top = 0.0;
  for (double v : mu) top = std::max(top, std::abs(v));
  // values at roundoff level are clamped so that their scatter cannot pose as a gap
  const double floor = 1e-12 * std::max(top, 1e-300);
  auto clamp = [&](int i) { return i < 0 ? floor : std::max(mu[i], floor); };
  constexpr double required_gap = 50.0;
  // the kernel ends at the last jump of at least `required_gap`; discretization
  // error spreads kernel values over decades, so the largest jump can sit inside it
  // only jumps between computed values count; the jump off the floor at index 0
  // would otherwise mask an under-resolved kernel
  int K = -1, best_i = 0;
  double best = 0.0;
  for (int i = 1; i < k; ++i) {
    const double r = clamp(i) / clamp(i - 1);
    if (r >= required_gap) K = i;
    if (r > best) best = r, best_i = i;
  }
  // a weaker interior jump still beats "no kernel" but stays flagged below
  if (K < 0) K = best >= 10.0 ? best_i : 0;
  rep.kernel_count = K;
  rep.gap_ratio = clamp(K) / clamp(K - 1);
  // threshold halfway (geometrically) across the gap must give the same count when halved
  const double tau = std::sqrt(clamp(K - 1) * clamp(K));
  int below = 0, below_half = 0;
  for (double v : mu) {
    below += v < tau;
    below_half += v < 0.5 * tau;
  }
  rep.unstable = rep.gap_ratio < required_gap || below != K || below_half != K;
  return K;
}

std::vector<ReferenceValue> analytic_sphere_spectrum(OperatorTag tag, int n, int k_max) {
  if (n < 2 || k_max < 2) throw Error(ErrorCode::invalid_argument, "need n >= 2 and k_max >= 2");
  std::vector<ReferenceValue> out;
  const double np1sq = (n + 1.0) * (n + 1.0);
  if (tag == OperatorTag::sinjukov) {
    out.push_back({"trace_first_nonzero", static_cast<double>(n), "trace", 0});
    for (int k = 1; k <= k_max; ++k) {
      const double v = k * (n + k - 1.0) / n;
      out.push_back({"im_delta_star_k" + std::to_string(k), v, "im_delta_star", k});
      out.push_back({"tt_k" + std::to_string(k), v, "tt", k});
    }
  } else {
    out.push_back({"KILLING_KERNEL", 0.0, "kernel", 1});
    out.push_back({"coexact_k1_formula", np1sq * (2.0 * (n - 1) + 1.0), "coexact", 1, true});
    for (int k = 2; k <= k_max; ++k) {
      out.push_back({"exact_k" + std::to_string(k), np1sq * (k * (k + n - 1.0) + 2.0 * n), "exact", k});
      out.push_back({"coexact_k" + std::to_string(k), np1sq * ((k + 1.0) * (k + n - 2.0) + 1.0), "coexact", k});
    }
  }
  return out;
}

std::vector<ReferenceValue> weitzenbock_sphere_spectrum(int n, int k_max) {
  std::vector<ReferenceValue> out;
  const double a = n + 1.0;
  for (int k = 1; k <= k_max; ++k) {
    const double l = k * (k + n - 1.0);
    const double ex = 4 * a * a * ((l - 2 * n) * (l - n + 1) + 2 * l) + 4 * a * l * (2.0 * (n - 1) - 4 * l) +
                      l * l * (6.0 * n + 10.0);
    const double lc = (k + 1.0) * (k + n - 2.0);
    const double co = 2 * a * a * (lc - 2 * n) * (lc - 2 * n + 2);
    out.push_back({"exact_k" + std::to_string(k), ex, "exact", k});
    out.push_back({"coexact_k" + std::to_string(k), co, "coexact", k});
  }
  return out;
}

std::vector<Cluster> cluster_eigenvalues(const std::vector<double>& v, double rel_tol, double abs_floor) {
  std::vector<Cluster> out;
  for (int i = 0; i < static_cast<int>(v.size()); ++i) {
    if (!out.empty()) {
      const double prev = v[i - 1];
      if (std::abs(v[i] - prev) <= rel_tol * std::max(std::abs(v[i]), abs_floor)) {
        auto& c = out.back();
        c.mean = (c.mean * c.multiplicity + v[i]) / (c.multiplicity + 1);
        ++c.multiplicity;
        continue;
      }
    }
    out.push_back({v[i], i, 1});
  }
  return out;
}

ComparisonTable compare_to_reference(const std::vector<double>& eigenvalues, const std::vector<ReferenceValue>& refs,
                                     double rel_tol, double cluster_rel_tol, double abs_floor) {
  ComparisonTable t;
  const auto clusters = cluster_eigenvalues(eigenvalues, cluster_rel_tol, abs_floor);
  std::vector<bool> used(clusters.size(), false);
  std::vector<std::size_t> order(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return refs[a].value < refs[b].value; });
  std::vector<ReferenceMatch> matched(refs.size());
  for (std::size_t oi : order) {
    const auto& r = refs[oi];
    ReferenceMatch m{r.label, r.value, std::nullopt, 0, 0.0};
    int best = -1;
    double best_err = 0.0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (used[c]) continue;
      const double err = std::abs(clusters[c].mean - r.value) / std::max(std::abs(r.value), abs_floor);
      if (best < 0 || err < best_err) {
        best = static_cast<int>(c);
        best_err = err;
      }
    }
    if (best >= 0 && best_err <= rel_tol) {
      used[best] = true;
      m.computed = clusters[best].mean;
      m.multiplicity = clusters[best].multiplicity;
      m.rel_error = best_err;
      m.first = clusters[best].first;
      t.max_rel_error = std::max(t.max_rel_error, best_err);
    }
    matched[oi] = m;
  }
  t.matches = std::move(matched);
  for (std::size_t c = 0; c < clusters.size(); ++c)
    if (!used[c]) t.unmatched.emplace_back(clusters[c].mean, clusters[c].multiplicity);
  return t;
}

ComparisonTable compare_nonkernel(const SpectrumReport& r, const std::vector<ReferenceValue>& refs, double rel_tol) {
  std::vector<ReferenceValue> nz;
  for (const auto& ref : refs)
    if (ref.value != 0.0) nz.push_back(ref);
  const std::vector<double> tail(r.eigenvalues.begin() + std::min<std::size_t>(r.kernel_count, r.eigenvalues.size()),
                                 r.eigenvalues.end());
  ComparisonTable t = compare_to_reference(tail, nz, rel_tol);
  for (auto& m : t.matches)
    if (m.first >= 0) m.first += r.kernel_count;
  return t;
}

// ---------------------------------------------------------------- torus oracle

namespace {

using Cd = std::complex<double>;

struct SymbolAlgebra {
  int n;
  std::vector<Cd> d;  // stencil eigenvalue per axis
  ComponentLayout s0, s1, c2, s2, c3;

  SymbolAlgebra(int n_, std::vector<Cd> d_)
      : n(n_), d(std::move(d_)), s0(Valence::scalar(), n_), s1(Valence::one_form(), n_), c2(Valence::cov2(), n_),
        s2(Valence::sym2(), n_), c3(Valence::cov1_sym2(), n_) {}

  static Eigen::VectorXd gram(const ComponentLayout& l) {
    Eigen::VectorXd g(l.size());
    for (int c = 0; c < l.size(); ++c) g[c] = l.multiplicity(c);
    return g;
  }

  // derivative: out tuple (k, I) <- d_k * in(I)
  Eigen::MatrixXcd nab(const ComponentLayout& in, const ComponentLayout& out) const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(out.size(), in.size());
    for (int c = 0; c < out.size(); ++c) {
      const auto t = out.tuple(c);
      std::vector<int> rest(t.begin() + 1, t.end());
      m(c, in.comp_of(rest)) += d[t[0]];
    }
    return m;
  }

  Eigen::MatrixXcd sym() const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(s2.size(), c2.size());
    for (int c = 0; c < s2.size(); ++c) {
      const int i = s2.tuple(c)[0], j = s2.tuple(c)[1];
      m(c, i * n + j) += 0.5;
      m(c, j * n + i) += 0.5;
    }
    return m;
  }

  // out_kij = a g_ij v_k + b (g_kj v_i + g_ki v_j), g = identity
  Eigen::MatrixXcd metric_product(double a, double b) const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(c3.size(), n);
    for (int c = 0; c < c3.size(); ++c) {
      const int k = c3.tuple(c)[0], i = c3.tuple(c)[1], j = c3.tuple(c)[2];
      if (i == j) m(c, k) += a;
      if (k == j) m(c, i) += b;
      if (k == i) m(c, j) += b;
    }
    return m;
  }

  Eigen::MatrixXcd delta_star() const { return sym() * nab(s1, c2); }

  // first-slot divergence of a sym2 (or one-form when `scalar_out`), forward stencil
  Eigen::MatrixXcd div(bool scalar_out) const {
    const ComponentLayout& in = scalar_out ? s1 : s2;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(scalar_out ? 1 : n, in.size());
    for (int j = 0; j < m.rows(); ++j)
      for (int a = 0; a < n; ++a) {
        std::vector<int> t{a};
        if (!scalar_out) t.push_back(j);
        m(j, in.comp_of(t)) += d[a];
      }
    return m;
  }

  Eigen::MatrixXcd S() const {
    return nab(s2, c3) - metric_product(0.0, 1.0) * div(false) / double(n + 1);
  }

  Eigen::MatrixXcd E() const {
    const Eigen::MatrixXcd grad = nab(s0, s1);
    return 2.0 * (n + 1) * nab(s2, c3) * delta_star() - metric_product(2.0, 1.0) * grad * div(true);
  }
};

} // namespace

void torus_fourier_oracle_pairs(int n, int N, double L, OperatorTag tag, const std::vector<int>& m,
                                Eigen::VectorXd& values, Eigen::MatrixXcd& vectors) {
  if (static_cast<int>(m.size()) != n) throw Error(ErrorCode::invalid_argument, "wavevector length must be n");
  for (int q : m)
    if (2 * std::abs(q) >= N) throw Error(ErrorCode::invalid_argument, "need |m_j| < N/2");
  const double h = L / N;
  const StencilTaps taps = stencil_taps(Stencil::biased);
  std::vector<Cd> d(n);
  for (int a = 0; a < n; ++a) {
    const double kappa = 2.0 * std::numbers::pi * m[a] / N;
    Cd s = 0.0;
    for (int t = 0; t < taps.count; ++t) s += taps.coeffs[t] * std::exp(Cd(0.0, kappa * taps.offsets[t]));
    d[a] = s / h;
  }
  SymbolAlgebra alg(n, d);
  const Eigen::MatrixXcd X = tag == OperatorTag::sinjukov ? alg.S() : alg.E();
  const auto& dom = tag == OperatorTag::sinjukov ? alg.s2 : alg.s1;
  const Eigen::VectorXd gd = SymbolAlgebra::gram(dom), gc = SymbolAlgebra::gram(alg.c3);
  Eigen::MatrixXcd H = X.adjoint() * gc.asDiagonal() * X;
  const Eigen::VectorXd gis = gd.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXcd B = gis.asDiagonal() * H * gis.asDiagonal();
  B = 0.5 * (B + B.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B);
  values = es.eigenvalues();
  vectors = gis.asDiagonal() * es.eigenvectors();
}

std::vector<double> torus_fourier_oracle(int n, int N, double L, OperatorTag tag, const std::vector<int>& m,
                                         Stencil s) {
  if (s != Stencil::biased) throw Error(ErrorCode::invalid_argument, "oracle models the assembled (biased) stencil");
  Eigen::VectorXd v;
  Eigen::MatrixXcd V;
  torus_fourier_oracle_pairs(n, N, L, tag, m, v, V);
  return {v.data(), v.data() + v.size()};
}

std::vector<double> torus_oracle_smallest(int n, int N, double L, OperatorTag tag, int count, int max_mode) {
  std::vector<double> all;
  std::vector<int> m(n, -max_mode);
  while (true) {
    const auto v = torus_fourier_oracle(n, N, L, tag, m);
    all.insert(all.end(), v.begin(), v.end());
    int a = n - 1;
    while (a >= 0 && m[a] == max_mode) m[a--] = -max_mode;
    if (a < 0) break;
    ++m[a];
  }
  std::sort(all.begin(), all.end());
  all.resize(std::min<std::size_t>(all.size(), count));
  return all;
}

// ---------------------------------------------------------------- decompositions

struct BergerEbin::Range {
  // the node numbering is already banded; COLAMD fills in far more here
  Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::NaturalOrdering<int>> qr;
  Eigen::Index rank = 0;

  explicit Range(const SpMat& b) {
    Eigen::SparseMatrix<double> cm(b);
    cm.makeCompressed();
    qr.compute(cm);
    if (qr.info() != Eigen::Success) throw Error(ErrorCode::solver_error, "sparse QR failed");
    rank = qr.rank();
  }
  // Q_1 Q_1^T y with Q_1 the first rank columns of Q
  Eigen::VectorXd project(const Eigen::VectorXd& y) const {
    Eigen::VectorXd c = qr.matrixQ().transpose() * y;
    c.tail(c.size() - rank).setZero();
    return qr.matrixQ() * c;
  }
};

BergerEbin::BergerEbin(GridPtr grid) : grid_(std::move(grid)) {
  const ManifoldGrid& g = *grid_;
  const int n = g.dim();
  ComponentLayout lay(Valence::sym2(), n);
  const int nc = lay.size();
  const SpMat ds = delta_star(grid_).matrix;
  // column x: the metric at node x, spanning C(M) g
  SpMat conformal(ds.rows(), static_cast<Eigen::Index>(g.num_nodes()));
  {
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index x = 0; x < conformal.cols(); ++x)
      for (int c = 0; c < nc; ++c) t.emplace_back(x * nc + c, x, g.metric(x, lay.tuple(c)[0], lay.tuple(c)[1]));
    conformal.setFromTriplets(t.begin(), t.end());
  }
  // the mass matrix is block diagonal with one nc x nc block per node
  const SpMat mass = mass_matrix(g, Valence::sym2());
  std::vector<Eigen::Triplet<double>> lt, lti;
  for (Eigen::Index x = 0; x < static_cast<Eigen::Index>(g.num_nodes()); ++x) {
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(nc, nc);
    for (int a = 0; a < nc; ++a)
      for (SpMat::InnerIterator it(mass, x * nc + a); it; ++it) blk(a, it.col() - x * nc) = it.value();
    const Eigen::MatrixXd U = blk.llt().matrixU();
    const Eigen::MatrixXd Ui = U.inverse().transpose();
    for (int a = 0; a < nc; ++a)
      for (int b = 0; b < nc; ++b) {
        if (U(a, b) != 0.0) lt.emplace_back(x * nc + a, x * nc + b, U(a, b));
        if (Ui(a, b) != 0.0) lti.emplace_back(x * nc + a, x * nc + b, Ui(a, b));
      }
  }
  chol_t_.resize(mass.rows(), mass.cols());
  chol_t_.setFromTriplets(lt.begin(), lt.end());
  chol_t_inv_.resize(mass.rows(), mass.cols());
  chol_t_inv_.setFromTriplets(lti.begin(), lti.end());
  // columns interleaved per node ([g_x, dual frame of x]) to keep the natural ordering banded
  const int n1 = n + 1;
  SpMat both(ds.rows(), conformal.cols() + ds.cols());
  {
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index r = 0; r < ds.rows(); ++r) {
      for (SpMat::InnerIterator it(conformal, r); it; ++it) t.emplace_back(r, it.col() * n1, it.value());
      for (SpMat::InnerIterator it(ds, r); it; ++it)
        t.emplace_back(r, (it.col() / n) * n1 + 1 + it.col() % n, it.value());
    }
    both.setFromTriplets(t.begin(), t.end());
  }
  im_ = std::make_unique<Range>(SpMat(chol_t_ * ds));
  span_ = std::make_unique<Range>(SpMat(chol_t_ * both));
}

BergerEbin::~BergerEbin() = default;
BergerEbin::BergerEbin(BergerEbin&&) noexcept = default;
BergerEbin& BergerEbin::operator=(BergerEbin&&) noexcept = default;

TensorField BergerEbin::project_image(const TensorField& phi) const {
  const Eigen::VectorXd y = chol_t_ * phi.components();
  return phi.with_components(chol_t_inv_ * im_->project(y)).with_valence(Valence::sym2());
}

TensorField BergerEbin::project_span(const TensorField& phi) const {
  const Eigen::VectorXd y = chol_t_ * phi.components();
  return phi.with_components(chol_t_inv_ * span_->project(y)).with_valence(Valence::sym2());
}

BergerEbinParts BergerEbin::decompose(const TensorField& phi) const {
  if (phi.valence().symmetry != Symmetry::sym2) throw Error(ErrorCode::valence_mismatch, "Berger-Ebin needs sym2");
  TensorField im = project_image(phi);
  TensorField span = project_span(phi);
  TensorField tr = span - im;
  TensorField tt = phi - span;
  const double total = l2_inner(phi, phi);
  const double ft = l2_inner(tr, tr) / total, fi = l2_inner(im, im) / total, fz = l2_inner(tt, tt) / total;
  return {std::move(tr), std::move(im), std::move(tt), ft, fi, fz};
}

BergerEbinParts classify_sinjukov_eigentensor(GridPtr grid, const TensorField& phi) {
  return BergerEbin(std::move(grid)).decompose(phi);
}

HodgeProjector::HodgeProjector(GridPtr grid) : grid_(std::move(grid)) {
  d_ = covariant_derivative(grid_, Valence::scalar()).matrix;
  m1_ = mass_matrix(*grid_, Valence::one_form());
  const SpMat m0 = mass_matrix(*grid_, Valence::scalar());
  const SpMat dt = d_.transpose();
  solve_ = std::make_unique<PsdSolver>(SpMat(SpMat(dt * m1_) * d_), m0);
}

Eigen::VectorXd HodgeProjector::potential(const TensorField& theta) const {
  return solve_->solve(d_.transpose() * (m1_ * theta.components()));
}

TensorField HodgeProjector::exact_part(const TensorField& theta) const {
  if (theta.valence().symmetry != Symmetry::one_form) throw Error(ErrorCode::valence_mismatch, "needs a one-form");
  return theta.with_components(d_ * potential(theta));
}

HodgeSplit hodge_split(const HodgeProjector& hp, GridPtr grid, const SpMat& A, const Eigen::MatrixXd& V,
                       const SpMat& M) {
  const Eigen::Index k = V.cols();
  HodgeSplit out;
  if (k == 0) return out;
  Eigen::MatrixXd E(V.rows(), k);
  for (Eigen::Index c = 0; c < k; ++c)
    E.col(c) = hp.exact_part(TensorField(grid, Valence::one_form(), V.col(c))).components();
  Eigen::MatrixXd C = V.transpose() * (M * E);
  C = 0.5 * (C + C.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  out.basis = V * es.eigenvectors();
  out.exact_fraction = es.eigenvalues();
  out.rayleigh = (out.basis.transpose() * (A * out.basis)).diagonal();
  for (Eigen::Index c = 0; c < k; ++c) (out.exact_fraction[c] >= 0.5 ? out.exact_count : out.coexact_count)++;
  return out;
}

// ---------------------------------------------------------------- convergence

RichardsonEstimate richardson(double coarse, double medium, double fine) {
  const double d1 = medium - coarse, d2 = fine - medium;
  RichardsonEstimate e{std::nan(""), fine, false};
  if (d1 == 0.0 || d2 == 0.0) {
    e.noisy = true;
    return e;
  }
  e.order = std::log2(std::abs(d1) / std::abs(d2));
  e.noisy = d1 * d2 < 0.0 || !std::isfinite(e.order) || e.order <= 0.0;
  if (!e.noisy) e.limit = fine + d2 / (std::pow(2.0, e.order) - 1.0);
  return e;
}

NormalOperator build_normal(GridPtr grid, OperatorTag tag) {
  return tag == OperatorTag::sinjukov ? normal_operator(sinjukov_S(std::move(grid)))
                                      : normal_operator(eisenhart_E(std::move(grid)));
}

ConvergenceStudy convergence_study(const std::vector<GridPtr>& grids, OperatorTag tag, int k) {
  if (grids.size() < 3) throw Error(ErrorCode::invalid_argument, "convergence study needs at least 3 resolutions");
  for (std::size_t i = 1; i < grids.size(); ++i)
    if (grids[i]->extent(0) != 2 * grids[i - 1]->extent(0) || grids[i]->kind() != grids[0]->kind())
      throw Error(ErrorCode::invalid_argument, "resolutions must double along one geometry");
  ConvergenceStudy st;
  std::vector<std::vector<double>> vals;
  for (const auto& g : grids) {
    st.grids.push_back(g->parameter_string());
    vals.push_back(solve_smallest(build_normal(g, tag), k, EigenMode::automatic, 1, false).eigenvalues);
  }
  for (int i = 0; i < k; ++i) {
    ConvergenceRow row;
    row.index = i;
    for (const auto& v : vals) row.values.push_back(v[i]);
    const std::size_t L = row.values.size();
    row.estimate = richardson(row.values[L - 3], row.values[L - 2], row.values[L - 1]);
    st.rows.push_back(std::move(row));
  }
  return st;
}

} // namespace projlab
