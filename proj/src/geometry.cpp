#include "projlab/geometry.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "projlab/errors.hpp"

namespace projlab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::invalid_argument: return "InvalidArgument";
  case ErrorCode::valence_mismatch: return "ValenceMismatch";
  case ErrorCode::degenerate_plane: return "DegeneratePlane";
  case ErrorCode::invalid_metric: return "InvalidMetric";
  case ErrorCode::invalid_field: return "InvalidField";
  case ErrorCode::solver_error: return "SolverError";
  case ErrorCode::degenerate_tensor: return "DegenerateTensor";
  case ErrorCode::non_integrable: return "NonIntegrable";
  case ErrorCode::pole_proximity: return "PoleProximity";
  case ErrorCode::invalid_curve: return "InvalidCurve";
  case ErrorCode::io_error: return "IOError";
  }
  return "Unknown";
}

const char* to_string(GeometryKind kind) noexcept {
  return kind == GeometryKind::flat_torus ? "torus" : "sphere";
}

namespace {

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
  auto p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

template <class T>
std::uint64_t fnv1a(const std::vector<T>& v, std::uint64_t h) {
  return fnv1a(v.data(), v.size() * sizeof(T), h);
}

} // namespace

std::vector<int> ManifoldGrid::multi_index(std::size_t node) const {
  std::vector<int> idx(dim_);
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(node % extents_[a]);
    node /= extents_[a];
  }
  return idx;
}

std::size_t ManifoldGrid::node_index(std::span<const int> idx) const {
  std::size_t node = 0;
  for (int a = 0; a < dim_; ++a) node = node * extents_[a] + idx[a];
  return node;
}

double ManifoldGrid::total_volume() const {
  // pairwise to keep the sum independent of traversal details
  std::vector<double> buf(weights_);
  for (std::size_t width = 1; width < buf.size(); width *= 2)
    for (std::size_t i = 0; i + width < buf.size(); i += 2 * width) buf[i] += buf[i + width];
  return buf.empty() ? 0.0 : buf[0];
}

double ManifoldGrid::lame_at(int axis, std::span<const double> x) const {
  if (kind_ == GeometryKind::round_sphere && axis == 1) return std::sin(x[0]);
  return 1.0;
}

void ManifoldGrid::metric_at(std::span<const double> x, std::span<double> g) const {
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) g[i * dim_ + j] = 0.0;
  for (int a = 0; a < dim_; ++a) {
    double s = lame_at(a, x);
    g[a * dim_ + a] = s * s;
  }
}

void ManifoldGrid::christoffel_at(std::span<const double> x, std::span<double> gamma) const {
  std::fill(gamma.begin(), gamma.end(), 0.0);
  if (kind_ != GeometryKind::round_sphere) return;
  const double s = std::sin(x[0]), c = std::cos(x[0]);
  gamma[0 * 4 + 1 * 2 + 1] = -s * c;   // Gamma^theta_phiphi
  gamma[1 * 4 + 0 * 2 + 1] = c / s;    // Gamma^phi_thetaphi
  gamma[1 * 4 + 1 * 2 + 0] = c / s;
}

double ManifoldGrid::riemann(std::size_t node, int l, int k, int i, int j) const {
  // constant curvature: R^l_kij = K (delta^l_i g_jk - delta^l_j g_ik)
  double r = 0.0;
  if (l == i) r += metric(node, j, k);
  if (l == j) r -= metric(node, i, k);
  return curvature_ * r;
}

Neighbor ManifoldGrid::neighbor(std::size_t node, int axis, int offset) const {
  auto idx = multi_index(node);
  const int N = extents_[axis];
  int t = idx[axis] + offset;
  const double ext = coords_[node * dim_ + axis] + offset * spacing_[axis];
  bool crossed = false;
  if (kind_ == GeometryKind::round_sphere && axis == 0) {
    if (t < 0) {
      t = -1 - t;
      crossed = true;
    } else if (t >= N) {
      t = 2 * N - 1 - t;
      crossed = true;
    }
    if (t < 0 || t >= N) throw Error(ErrorCode::invalid_argument, "stencil offset exceeds a hemisphere");
    if (crossed) idx[1] = (idx[1] + extents_[1] / 2) % extents_[1];
  } else {
    t = ((t % N) + N) % N;
  }
  idx[axis] = t;
  return {node_index(idx), crossed, ext};
}

std::string ManifoldGrid::parameter_string() const {
  std::ostringstream os;
  os << "geometry=" << to_string(kind_) << ";dim=" << dim_;
  for (int a = 0; a < dim_; ++a) os << ";N" << a << "=" << extents_[a];
  if (kind_ == GeometryKind::flat_torus) {
    os.precision(17);
    os << ";L=" << period_;
  }
  return os.str();
}

void ManifoldGrid::finalize() {
  const std::size_t nn = num_nodes();
  const int n = dim_;
  metric_.assign(nn * n * n, 0.0);
  metric_inv_.assign(nn * n * n, 0.0);
  christoffel_.assign(nn * n * n * n, 0.0);
  dlog_lame_.assign(nn * n * n, 0.0);
  lame_.assign(nn * n, 1.0);
  for (std::size_t x = 0; x < nn; ++x) {
    auto c = coords(x);
    metric_at(c, std::span<double>(metric_.data() + x * n * n, n * n));
    christoffel_at(c, std::span<double>(christoffel_.data() + x * n * n * n, n * n * n));
    for (int a = 0; a < n; ++a) {
      lame_[x * n + a] = lame_at(a, c);
      metric_inv_[(x * n + a) * n + a] = 1.0 / metric_[(x * n + a) * n + a];
    }
    if (kind_ == GeometryKind::round_sphere) dlog_lame_[(x * n + 0) * n + 1] = std::cos(c[0]) / std::sin(c[0]);
  }
  std::uint64_t h = 1469598103934665603ULL;
  const std::string p = parameter_string();
  h = fnv1a(p.data(), p.size(), h);
  h = fnv1a(coords_, h);
  h = fnv1a(weights_, h);
  hash_ = h;
}

ManifoldGrid build_flat_torus(int n, int N, double L) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "torus dimension must be >= 2");
  if (n > 4) throw Error(ErrorCode::invalid_argument, "torus dimension above 4 rejected (memory guard)");
  if (N < 4 || N % 2 != 0) throw Error(ErrorCode::invalid_argument, "torus needs an even N >= 4");
  if (!(L > 0.0)) throw Error(ErrorCode::invalid_argument, "torus period must be positive");
  ManifoldGrid grid;
  grid.kind_ = GeometryKind::flat_torus;
  grid.dim_ = n;
  grid.period_ = L;
  grid.curvature_ = 0.0;
  grid.extents_.assign(n, N);
  grid.spacing_.assign(n, L / N);
  std::size_t nn = 1;
  for (int a = 0; a < n; ++a) nn *= N;
  grid.coords_.resize(nn * n);
  const double w = std::pow(L / N, n);
  grid.weights_.assign(nn, w);
  for (std::size_t x = 0; x < nn; ++x) {
    auto idx = grid.multi_index(x);
    for (int a = 0; a < n; ++a) grid.coords_[x * n + a] = idx[a] * (L / N);
  }
  grid.finalize();
  return grid;
}

ManifoldGrid build_round_sphere(int n_theta, int n_phi) {
  if (n_theta < 8) throw Error(ErrorCode::invalid_argument, "sphere needs n_theta >= 8");
  if (n_phi != 2 * n_theta) throw Error(ErrorCode::invalid_argument, "sphere needs n_phi = 2 n_theta");
  const double pi = std::numbers::pi;
  const double dt = pi / n_theta, dp = 2.0 * pi / n_phi;
  if (std::sin(0.5 * dt) < 10.0 * std::numeric_limits<double>::epsilon())
    throw Error(ErrorCode::invalid_argument, "colatitude spacing too fine for the chart");
  ManifoldGrid grid;
  grid.kind_ = GeometryKind::round_sphere;
  grid.dim_ = 2;
  grid.curvature_ = 1.0;
  grid.extents_ = {n_theta, n_phi};
  grid.spacing_ = {dt, dp};
  const std::size_t nn = static_cast<std::size_t>(n_theta) * n_phi;
  grid.coords_.resize(2 * nn);
  grid.weights_.resize(nn);
  for (int i = 0; i < n_theta; ++i) {
    const double th = (i + 0.5) * dt;
    // exact area of the cell [th - dt/2, th + dt/2] x [phi - dp/2, phi + dp/2]
    const double w = 2.0 * std::sin(th) * std::sin(0.5 * dt) * dp;
    for (int j = 0; j < n_phi; ++j) {
      const std::size_t x = static_cast<std::size_t>(i) * n_phi + j;
      grid.coords_[2 * x] = th;
      grid.coords_[2 * x + 1] = j * dp;
      grid.weights_[x] = w;
    }
  }
  grid.finalize();
  return grid;
}

double sectional_curvature(const ManifoldGrid& grid, std::size_t node, std::span<const double> u,
                           std::span<const double> v) {
  const int n = grid.dim();
  if (static_cast<int>(u.size()) != n || static_cast<int>(v.size()) != n)
    throw Error(ErrorCode::invalid_argument, "plane vectors must have length dim");
  double uu = 0, vv = 0, uv = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double g = grid.metric(node, i, j);
      uu += g * u[i] * u[j];
      vv += g * v[i] * v[j];
      uv += g * u[i] * v[j];
    }
  const double gram = uu * vv - uv * uv;
  if (gram < 1e-12 * std::max(1.0, uu * vv)) throw Error(ErrorCode::degenerate_plane, "plane vectors are dependent");
  // <R(u,v)v, u>
  double num = 0.0;
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) {
      const double glm = grid.metric(node, l, m);
      if (glm == 0.0) continue;
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            num += glm * u[m] * grid.riemann(node, l, k, i, j) * u[i] * v[j] * v[k];
    }
  return num / gram;
}

GridCache::GridCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io_error, "grid cache " + path_ + ": " + e.what());
  }
  for (auto& [k, v] : j.items()) entries_.emplace_back(k, std::stoull(v.get<std::string>(), nullptr, 16));
}

std::uint64_t GridCache::record(const ManifoldGrid& grid) {
  const std::string key = grid.parameter_string();
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = grid.hash();
      return v;
    }
  entries_.emplace_back(key, grid.hash());
  return grid.hash();
}

void GridCache::save() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : entries_) {
    std::ostringstream os;
    os << std::hex << v;
    j[k] = os.str();
  }
  std::ofstream out(path_);
  if (!out) throw Error(ErrorCode::io_error, "cannot write grid cache " + path_);
  out << j.dump(2) << '\n';
}

std::size_t GridCache::size() const { return entries_.size(); }

} // namespace projlab
