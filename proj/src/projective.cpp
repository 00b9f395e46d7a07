#include "projlab/projective.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <ostream>

#include <Eigen/Dense>

#include "projlab/errors.hpp"
#include "projlab/linalg.hpp"
#include "projlab/operators.hpp"

namespace projlab {

namespace {

Eigen::MatrixXd node_matrix(const Eigen::VectorXd& full, std::size_t x, int n) {
  Eigen::MatrixXd m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) m(a, b) = full[x * n * n + a * n + b];
  return m;
}

Eigen::MatrixXd grid_metric(const ManifoldGrid& g, std::size_t x) {
  const int n = g.dim();
  Eigen::MatrixXd m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) m(a, b) = g.metric(x, a, b);
  return m;
}

} // namespace

ReconstructionResult reconstruct_projective_metric(GridPtr grid, const TensorField& phi) {
  if (phi.valence().symmetry != Symmetry::sym2) throw Error(ErrorCode::valence_mismatch, "reconstruction needs sym2");
  const ManifoldGrid& g = *grid;
  const int n = g.dim();
  const std::size_t nn = g.num_nodes();
  ReconstructionResult r{grid, {}, {}, TensorField::zeros(grid, Valence::one_form())};

  const TensorField Sphi = sinjukov_S(grid).apply(phi);
  r.kernel_membership = l2_norm(Sphi) / l2_norm(phi);

  const Eigen::VectorXd full = expand_full(phi);
  std::vector<Eigen::MatrixXd> inv(nn);
  r.min_det = INFINITY;
  for (std::size_t x = 0; x < nn; ++x) {
    const Eigen::MatrixXd P = node_matrix(full, x, n), G = grid_metric(g, x);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(P, G, Eigen::EigenvaluesOnly);
    const double det = es.eigenvalues().prod();
    r.min_det = std::min(r.min_det, det);
    if (es.eigenvalues().minCoeff() <= 0.0 || std::abs(det) < 1e-6)
      throw Error(ErrorCode::degenerate_tensor, "phi is not positive definite at node " + std::to_string(x));
    inv[x] = P.inverse();
  }

  r.omega = divergence(grid, Valence::sym2()).apply(phi) * (1.0 / (n + 1));
  Eigen::VectorXd alpha(nn * n);
  for (std::size_t x = 0; x < nn; ++x) {
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(r.omega.components().data() + x * n, n);
    alpha.segment(x * n, n) = -(grid_metric(g, x) * (inv[x] * w));
  }

  const SpMat d = covariant_derivative(grid, Valence::scalar()).matrix;
  const SpMat m1 = mass_matrix(g, Valence::one_form()), m0 = mass_matrix(g, Valence::scalar());
  const SpMat dt = d.transpose();
  PsdSolver solver(SpMat(SpMat(dt * m1) * d), m0);
  r.rho = solver.solve(dt * (m1 * alpha));
  double mean = 0.0;
  for (std::size_t x = 0; x < nn; ++x) mean += g.quad_weight(x) * r.rho[x];
  r.rho.array() -= mean / g.total_volume();

  const Eigen::VectorXd res = d * r.rho - alpha;
  r.closedness_residual = std::sqrt(res.dot(m1 * res));
  r.alpha_norm = std::sqrt(alpha.dot(m1 * alpha));
  // a discrete kernel element is only O(h^2) integrable, so the bound is h^2 on coarse grids
  const double h = 2.0 * std::numbers::pi / g.extent(n - 1);  // angular step, either geometry
  const double tol = std::max(1e-3, h * h);
  if (r.closedness_residual > tol * r.alpha_norm && r.closedness_residual > 1e-12)
    throw Error(ErrorCode::non_integrable, "d rho = alpha has residual " + std::to_string(r.closedness_residual) +
                                               " against |alpha| = " + std::to_string(r.alpha_norm));

  r.gbar.resize(nn);
  for (std::size_t x = 0; x < nn; ++x) {
    const Eigen::MatrixXd G = grid_metric(g, x);
    Eigen::MatrixXd gb = std::exp(2.0 * r.rho[x]) * G * inv[x] * G;
    r.gbar[x] = 0.5 * (gb + gb.transpose());
  }
  return r;
}

double max_pointwise_norm(const TensorField& f) {
  const ManifoldGrid& g = f.grid();
  double m = 0.0;
  for (std::size_t x = 0; x < g.num_nodes(); ++x) {
    const auto c = f.node_components(x);
    const Eigen::Map<const Eigen::VectorXd> v(c.data(), static_cast<Eigen::Index>(c.size()));
    m = std::max(m, std::sqrt(v.dot(node_gram(g, x, f.valence()) * v)));
  }
  return m;
}

TensorField project_to_span(const TensorField& target, const Eigen::MatrixXd& basis) {
  const SpMat M = mass_matrix(target.grid(), target.valence());
  const Eigen::MatrixXd MB = M * basis;
  const Eigen::MatrixXd gram = basis.transpose() * MB;
  const Eigen::VectorXd coef = gram.ldlt().solve(MB.transpose() * target.components());
  TensorField psi = target.with_components(basis * coef);
  const double s = max_pointwise_norm(psi);
  if (!(s > 0.0)) throw Error(ErrorCode::invalid_field, "projection onto the span vanishes");
  return psi * (1.0 / s);
}

// ---------------------------------------------------------------- metric sources

MetricSource MetricSource::background(GridPtr grid) {
  MetricSource m;
  m.grid_ = std::move(grid);
  return m;
}

MetricSource MetricSource::reconstructed(const ReconstructionResult& r) {
  MetricSource m;
  m.grid_ = r.grid;
  const ManifoldGrid& g = *r.grid;
  const int n = g.dim();
  const std::size_t nn = g.num_nodes();
  ComponentLayout lay(Valence::sym2(), n);
  Eigen::VectorXd comps(nn * lay.size());
  m.nodal_metric_.resize(nn * n * n);
  for (std::size_t x = 0; x < nn; ++x) {
    for (int c = 0; c < lay.size(); ++c) comps[x * lay.size() + c] = r.gbar[x](lay.tuple(c)[0], lay.tuple(c)[1]);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) m.nodal_metric_[(x * n + a) * n + b] = r.gbar[x](a, b);
  }
  // Gamma_bar - Gamma = C^k_ij = gbar^kl (nabla_i gbar_jl + nabla_j gbar_il - nabla_l gbar_ij) / 2
  const TensorField gb(r.grid, Valence::sym2(), std::move(comps));
  const Eigen::VectorXd T = expand_full(covariant_derivative(r.grid, Valence::sym2(), Stencil::centered).apply(gb));
  m.nodal_gamma_.assign(nn * n * n * n, 0.0);
  for (std::size_t x = 0; x < nn; ++x) {
    const Eigen::MatrixXd gi = r.gbar[x].inverse();
    auto D = [&](int k, int i, int j) { return T[x * n * n * n + (k * n + i) * n + j]; };
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = 0.0;
          for (int l = 0; l < n; ++l) v += gi(k, l) * (D(i, j, l) + D(j, i, l) - D(l, i, j));
          m.nodal_gamma_[x * n * n * n + (k * n + i) * n + j] = 0.5 * v;
        }
  }
  return m;
}

std::vector<double> MetricSource::interpolate(const std::vector<double>& nodal, int width,
                                              std::span<const double> x) const {
  const ManifoldGrid& g = *grid_;
  const int n = g.dim();
  const bool sphere = g.kind() == GeometryKind::round_sphere;
  std::vector<int> base(n);
  std::vector<double> frac(n);
  for (int a = 0; a < n; ++a) {
    const double u = (x[a] - g.coord(0, a)) / g.spacing(a);
    int i0 = static_cast<int>(std::floor(u));
    frac[a] = u - i0;
    if (sphere && a == 0) {
      if (i0 < 0 || i0 + 1 >= g.extent(0)) throw Error(ErrorCode::pole_proximity, "interpolation stencil reaches a pole");
    }
    base[a] = i0;
  }
  std::vector<double> out(width, 0.0);
  std::vector<int> idx(n);
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    for (int a = 0; a < n; ++a) {
      const int bit = (corner >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      int i = base[a] + bit;
      if (!(sphere && a == 0)) i = ((i % g.extent(a)) + g.extent(a)) % g.extent(a);
      idx[a] = i;
    }
    if (w == 0.0) continue;
    const std::size_t node = g.node_index(idx);
    for (int c = 0; c < width; ++c) out[c] += w * nodal[node * width + c];
  }
  return out;
}

std::vector<double> MetricSource::christoffel(std::span<const double> x) const {
  const int n = dim();
  std::vector<double> G(n * n * n);
  grid_->christoffel_at(x, G);
  if (!is_background()) {
    const auto C = interpolate(nodal_gamma_, n * n * n, x);
    for (int i = 0; i < n * n * n; ++i) G[i] += C[i];
  }
  return G;
}

Eigen::MatrixXd MetricSource::metric(std::span<const double> x) const {
  const int n = dim();
  std::vector<double> m(n * n);
  if (is_background()) grid_->metric_at(x, m);
  else m = interpolate(nodal_metric_, n * n, x);
  return Eigen::Map<Eigen::MatrixXd>(m.data(), n, n);
}

// ---------------------------------------------------------------- geodesics

namespace {

void check_pole(const ManifoldGrid& g, std::span<const double> x) {
  if (g.kind() == GeometryKind::round_sphere && std::abs(std::sin(x[0])) < 2.0 * g.spacing(0))
    throw Error(ErrorCode::pole_proximity, "trajectory within 2h of a pole");
}

// acceleration -Gamma(x)(v, v)
std::vector<double> accel(const MetricSource& m, std::span<const double> x, std::span<const double> v) {
  const int n = m.dim();
  const auto G = m.christoffel(x);
  std::vector<double> a(n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a[k] -= G[(k * n + i) * n + j] * v[i] * v[j];
  return a;
}

} // namespace

Curve geodesic_integrate(const MetricSource& m, std::vector<double> x, std::vector<double> v, double T, int steps) {
  const int n = m.dim();
  if (static_cast<int>(x.size()) != n || static_cast<int>(v.size()) != n)
    throw Error(ErrorCode::invalid_argument, "initial data must have dimension n");
  if (!(T > 0.0) || steps < 100.0 * T) throw Error(ErrorCode::invalid_argument, "need T > 0 and steps >= 100 T");
  const double dt = T / steps;
  Curve c;
  c.t.reserve(steps + 1);
  auto record = [&](double t) {
    c.t.push_back(t);
    c.x.push_back(x);
    c.v.push_back(v);
  };
  check_pole(m.grid(), x);
  record(0.0);
  std::vector<double> xs(n), vs(n);
  for (int s = 0; s < steps; ++s) {
    const auto a1 = accel(m, x, v);
    std::vector<double> k1x = v, k1v = a1;
    for (int i = 0; i < n; ++i) { xs[i] = x[i] + 0.5 * dt * k1x[i]; vs[i] = v[i] + 0.5 * dt * k1v[i]; }
    check_pole(m.grid(), xs);
    std::vector<double> k2x = vs, k2v = accel(m, xs, vs);
    for (int i = 0; i < n; ++i) { xs[i] = x[i] + 0.5 * dt * k2x[i]; vs[i] = v[i] + 0.5 * dt * k2v[i]; }
    check_pole(m.grid(), xs);
    std::vector<double> k3x = vs, k3v = accel(m, xs, vs);
    for (int i = 0; i < n; ++i) { xs[i] = x[i] + dt * k3x[i]; vs[i] = v[i] + dt * k3v[i]; }
    check_pole(m.grid(), xs);
    std::vector<double> k4x = vs, k4v = accel(m, xs, vs);
    for (int i = 0; i < n; ++i) {
      x[i] += dt / 6.0 * (k1x[i] + 2 * k2x[i] + 2 * k3x[i] + k4x[i]);
      v[i] += dt / 6.0 * (k1v[i] + 2 * k2v[i] + 2 * k3v[i] + k4v[i]);
    }
    check_pole(m.grid(), x);
    record((s + 1) * dt);
  }
  return c;
}

double unparametrized_geodesic_residual(const MetricSource& gbar, const Curve& c, std::vector<double>* per_sample) {
  if (c.x.size() < 100) throw Error(ErrorCode::invalid_curve, "curve needs at least 100 samples");
  const int n = gbar.dim();
  const MetricSource g = MetricSource::background(gbar.grid_ptr());
  double worst = 0.0;
  if (per_sample) per_sample->clear();
  for (std::size_t s = 0; s < c.x.size(); ++s) {
    const auto& x = c.x[s];
    const Eigen::Map<const Eigen::VectorXd> v(c.v[s].data(), n);
    const auto acc = accel(g, x, c.v[s]);  // the curve's own x''
    const auto Gb = gbar.christoffel(x);
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(acc.data(), n);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[k] += Gb[(k * n + i) * n + j] * v[i] * v[j];
    const Eigen::MatrixXd G = gbar.metric(x);
    const double vv = v.dot(G * v);
    if (!(vv > 0.0)) throw Error(ErrorCode::invalid_curve, "zero velocity sample");
    const Eigen::VectorXd perp = a - (v.dot(G * a) / vv) * v;
    const double r = std::sqrt(std::max(0.0, perp.dot(G * perp))) / vv;
    if (per_sample) per_sample->push_back(r);
    worst = std::max(worst, r);
  }
  return worst;
}

void great_circle_start(const Eigen::Vector3d& p, const Eigen::Vector3d& nrm, std::vector<double>& x0,
                        std::vector<double>& v0) {
  const double theta = std::acos(std::clamp(p.z(), -1.0, 1.0));
  const double ph = std::atan2(p.y(), p.x());
  const Eigen::Vector3d vel = nrm.cross(p);
  const auto e = sphere_tangents(theta, ph);
  const Eigen::Vector3d et(e[0][0], e[0][1], e[0][2]), ep(e[1][0], e[1][1], e[1][2]);
  x0 = {theta, ph};
  v0 = {vel.dot(et), vel.dot(ep) / ep.squaredNorm()};
}

TensorField perturbation_target(GridPtr grid) {
  Eigen::Matrix3d A;
  A << 0.2, 0.5, -0.3, 0.5, -0.6, 0.1, -0.3, 0.1, 0.4;
  if (grid->kind() == GeometryKind::round_sphere) return sphere_sym2_from_matrix(std::move(grid), A);
  const int n = grid->dim();
  ComponentLayout lay(Valence::sym2(), n);
  Eigen::VectorXd c(static_cast<Eigen::Index>(grid->num_nodes()) * lay.size());
  for (Eigen::Index x = 0; x < static_cast<Eigen::Index>(grid->num_nodes()); ++x)
    for (int k = 0; k < lay.size(); ++k) {
      const int i = lay.tuple(k)[0], j = lay.tuple(k)[1];
      c[x * lay.size() + k] = A(i % 3, j % 3) + (i == j && i >= 3 ? 1.0 : 0.0);
    }
  return TensorField(std::move(grid), Valence::sym2(), std::move(c));
}

GeodesicSurvey geodesic_survey(const MetricSource& gbar, int count, std::uint64_t seed, int steps) {
  if (count < 1) throw Error(ErrorCode::invalid_argument, "need at least one geodesic");
  const ManifoldGrid& g = gbar.grid();
  const MetricSource bg = MetricSource::background(gbar.grid_ptr());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  GeodesicSurvey out;
  for (int t = 0; t < count; ++t) {
    std::vector<double> x0, v0;
    if (g.kind() == GeometryKind::round_sphere) {
      Eigen::Vector3d nrm;
      do nrm = Eigen::Vector3d(nd(rng), nd(rng), nd(rng)).normalized();
      while (std::abs(nrm.z()) < 0.3);
      const Eigen::Vector3d q(nd(rng), nd(rng), nd(rng));
      great_circle_start((q - q.dot(nrm) * nrm).normalized(), nrm, x0, v0);
    } else {
      Eigen::VectorXd d(g.dim());
      for (int a = 0; a < g.dim(); ++a) d[a] = nd(rng);
      d.normalize();
      for (int a = 0; a < g.dim(); ++a) {
        x0.push_back(ud(rng) * g.period());
        v0.push_back(d[a]);
      }
    }
    Curve c = geodesic_integrate(bg, x0, v0, 2.0 * std::numbers::pi, steps);
    std::vector<double> samples;
    const double r = unparametrized_geodesic_residual(gbar, c, &samples);
    out.per_curve.push_back(r);
    if (out.worst < 0 || r > out.max_residual) {
      out.max_residual = r;
      out.worst = t;
      out.worst_curve = std::move(c);
      out.worst_samples = std::move(samples);
    }
  }
  return out;
}

void write_curve_csv(const Curve& c, const std::vector<double>& residual, std::ostream& os) {
  const std::size_t n = c.x.empty() ? 0 : c.x[0].size();
  os << "s";
  for (std::size_t a = 0; a < n; ++a) os << ",x" << a;
  os << ",residual\n";
  os.precision(17);
  for (std::size_t s = 0; s < c.t.size(); ++s) {
    os << c.t[s];
    for (double xa : c.x[s]) os << ',' << xa;
    os << ',' << (s < residual.size() ? residual[s] : 0.0) << '\n';
  }
}

} // namespace projlab
