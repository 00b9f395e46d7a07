#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace projlab {

enum class GeometryKind { flat_torus, round_sphere };

const char* to_string(GeometryKind kind) noexcept;

// Result of stepping `offset` nodes along one chart axis. On the sphere a step
// past a pole lands on the antipodal meridian; `crossed_pole` records that the
// chart orientation of the theta axis flipped, and `ext_coord` is the
// unwrapped coordinate along the stepping axis (theta may leave [0, pi]).
struct Neighbor {
  std::size_t node;
  bool crossed_pole;
  double ext_coord;
};

// Structured grid over a chart of a constant-curvature model manifold.
// Chart axes are orthogonal: g is diagonal and g_aa = lame(a)^2.
class ManifoldGrid {
public:
  GeometryKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  std::size_t num_nodes() const noexcept { return weights_.size(); }
  int extent(int axis) const { return extents_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double period() const noexcept { return period_; }

  std::vector<int> multi_index(std::size_t node) const;
  std::size_t node_index(std::span<const int> idx) const;
  double coord(std::size_t node, int axis) const { return coords_[node * dim_ + axis]; }
  std::span<const double> coords(std::size_t node) const {
    return {coords_.data() + node * dim_, static_cast<std::size_t>(dim_)};
  }

  double metric(std::size_t node, int i, int j) const { return metric_[(node * dim_ + i) * dim_ + j]; }
  double metric_inv(std::size_t node, int i, int j) const {
    return metric_inv_[(node * dim_ + i) * dim_ + j];
  }
  // Gamma^k_ij
  double christoffel(std::size_t node, int k, int i, int j) const {
    return christoffel_[((node * dim_ + k) * dim_ + i) * dim_ + j];
  }
  double quad_weight(std::size_t node) const { return weights_[node]; }
  std::span<const double> quad_weights() const { return weights_; }
  double total_volume() const;

  double lame(std::size_t node, int axis) const { return lame_[node * dim_ + axis]; }
  // d_k log(lame_a)
  double dlog_lame(std::size_t node, int k, int a) const {
    return dlog_lame_[(node * dim_ + k) * dim_ + a];
  }
  // Scale factor evaluated at an arbitrary (possibly extended) chart point.
  double lame_at(int axis, std::span<const double> x) const;
  // Closed-form metric and connection at an arbitrary chart point.
  void metric_at(std::span<const double> x, std::span<double> g) const;
  void christoffel_at(std::span<const double> x, std::span<double> gamma) const;

  // Sectional curvature of the constant-curvature model.
  double constant_curvature() const noexcept { return curvature_; }
  // R^l_kij with R(d_i, d_j) d_k = R^l_kij d_l
  double riemann(std::size_t node, int l, int k, int i, int j) const;

  Neighbor neighbor(std::size_t node, int axis, int offset) const;

  std::uint64_t hash() const noexcept { return hash_; }
  // Canonical "key=value;..." description of the construction parameters.
  std::string parameter_string() const;

private:
  friend ManifoldGrid build_flat_torus(int, int, double);
  friend ManifoldGrid build_round_sphere(int, int);
  void finalize();

  GeometryKind kind_ = GeometryKind::flat_torus;
  int dim_ = 0;
  double period_ = 0.0;
  double curvature_ = 0.0;
  std::vector<int> extents_;
  std::vector<double> spacing_;
  std::vector<double> coords_;
  std::vector<double> metric_;
  std::vector<double> metric_inv_;
  std::vector<double> christoffel_;
  std::vector<double> lame_;
  std::vector<double> dlog_lame_;
  std::vector<double> weights_;
  std::uint64_t hash_ = 0;
};

ManifoldGrid build_flat_torus(int n, int N, double L);
ManifoldGrid build_round_sphere(int n_theta, int n_phi);

double sectional_curvature(const ManifoldGrid& grid, std::size_t node, std::span<const double> u,
                           std::span<const double> v);

// Parameters -> grid hash, persisted as JSON.
class GridCache {
public:
  explicit GridCache(std::string path);
  std::uint64_t record(const ManifoldGrid& grid);
  void save() const;
  std::size_t size() const;

private:
  std::string path_;
  std::vector<std::pair<std::string, std::uint64_t>> entries_;
};

} // namespace projlab
