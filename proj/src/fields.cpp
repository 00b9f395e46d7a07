#include "projlab/fields.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "projlab/errors.hpp"
#include "projlab/operators.hpp"

namespace projlab {

TensorField::TensorField(GridPtr grid, Valence valence, Eigen::VectorXd components)
    : grid_(std::move(grid)), valence_(valence), ncomp_(valence.num_components(grid_->dim())),
      c_(std::move(components)) {
  if (static_cast<std::size_t>(c_.size()) != grid_->num_nodes() * ncomp_)
    throw Error(ErrorCode::invalid_field, "component array size does not match grid and valence");
}

TensorField TensorField::zeros(GridPtr grid, Valence valence) {
  const auto size = grid->num_nodes() * valence.num_components(grid->dim());
  return {std::move(grid), valence, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))};
}

TensorField TensorField::with_valence(Valence v) const {
  if (!v.same_storage(valence_)) throw Error(ErrorCode::valence_mismatch, "storage class differs");
  return {grid_, v, c_};
}

namespace {

void require_same(const TensorField& a, const TensorField& b) {
  if (a.grid_ptr() != b.grid_ptr() && a.grid().hash() != b.grid().hash())
    throw Error(ErrorCode::valence_mismatch, "fields live on different grids");
  if (!a.valence().same_storage(b.valence()))
    throw Error(ErrorCode::valence_mismatch, a.valence().name() + " vs " + b.valence().name());
}

} // namespace

TensorField TensorField::operator+(const TensorField& o) const {
  require_same(*this, o);
  return {grid_, valence_, c_ + o.c_};
}

TensorField TensorField::operator-(const TensorField& o) const {
  require_same(*this, o);
  return {grid_, valence_, c_ - o.c_};
}

TensorField TensorField::operator*(double s) const { return {grid_, valence_, c_ * s}; }

Eigen::MatrixXd node_gram(const ManifoldGrid& grid, std::size_t node, const Valence& v) {
  const int n = grid.dim();
  ComponentLayout lay(v, n);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(lay.size(), lay.size());
  const int full = lay.full_size();
  for (int I = 0; I < full; ++I) {
    const auto ti = lay.full_tuple(I);
    for (int J = 0; J < full; ++J) {
      const auto tj = lay.full_tuple(J);
      double p = 1.0;
      for (int m = 0; m < lay.rank() && p != 0.0; ++m) p *= grid.metric_inv(node, ti[m], tj[m]);
      if (p != 0.0) G(lay.comp_of_full(I), lay.comp_of_full(J)) += p;
    }
  }
  return G;
}

SpMat mass_matrix(const ManifoldGrid& grid, const Valence& v) {
  const int nc = v.num_components(grid.dim());
  const int nn = static_cast<int>(grid.num_nodes());
  return kernels::assemble(nn, nc, nn * nc, [&](int x, kernels::RowBuffer& rows) {
    const Eigen::MatrixXd G = node_gram(grid, x, v) * grid.quad_weight(x);
    for (int a = 0; a < nc; ++a)
      for (int b = 0; b < nc; ++b)
        if (G(a, b) != 0.0) rows[a].push_back({x * nc + b, G(a, b)});
  });
}

double l2_inner(const TensorField& a, const TensorField& b) {
  require_same(a, b);
  const SpMat M = mass_matrix(a.grid(), a.valence());
  return kernels::bilinear_parallel(M, {a.components().data(), static_cast<std::size_t>(a.components().size())},
                                    {b.components().data(), static_cast<std::size_t>(b.components().size())});
}

double l2_norm(const TensorField& a) { return std::sqrt(std::max(0.0, l2_inner(a, a))); }

Eigen::VectorXd expand_full(const TensorField& f) {
  const int n = f.grid().dim();
  ComponentLayout lay(f.valence(), n);
  const std::size_t nn = f.grid().num_nodes();
  const int full = lay.full_size(), nc = lay.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(nn * full));
  for (std::size_t x = 0; x < nn; ++x)
    for (int I = 0; I < full; ++I) out[x * full + I] = f.components()[x * nc + lay.comp_of_full(I)];
  return out;
}

TensorField compress_full(GridPtr grid, Valence v, const Eigen::VectorXd& full_c) {
  const int n = grid->dim();
  ComponentLayout lay(v, n);
  const std::size_t nn = grid->num_nodes();
  const int full = lay.full_size(), nc = lay.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nn * nc));
  for (std::size_t x = 0; x < nn; ++x)
    for (int I = 0; I < full; ++I) {
      const int c = lay.comp_of_full(I);
      out[x * nc + c] += full_c[x * full + I] / lay.multiplicity(c);
    }
  return {std::move(grid), v, std::move(out)};
}

MixedTensor raise_index(const TensorField& f, int slot) {
  const int n = f.grid().dim();
  const int r = f.valence().rank;
  if (slot < 0 || slot >= r) throw Error(ErrorCode::invalid_argument, "slot out of range");
  ComponentLayout lay(f.valence(), n);
  const Eigen::VectorXd low = expand_full(f);
  const int full = lay.full_size();
  Eigen::VectorXd up = Eigen::VectorXd::Zero(low.size());
  for (std::size_t x = 0; x < f.grid().num_nodes(); ++x)
    for (int I = 0; I < full; ++I) {
      auto t = lay.full_tuple(I);
      const int a = t[slot];
      double s = 0.0;
      for (int b = 0; b < n; ++b) {
        t[slot] = b;
        s += f.grid().metric_inv(x, a, b) * low[x * full + lay.full_linear(t)];
      }
      up[x * full + I] = s;
    }
  return {f.grid_ptr(), f.valence(), slot, std::move(up)};
}

TensorField lower_index(const MixedTensor& t) {
  const ManifoldGrid& grid = *t.grid;
  const int n = grid.dim();
  ComponentLayout lay(Valence::general(t.valence.rank), n);
  const int full = lay.full_size();
  Eigen::VectorXd low = Eigen::VectorXd::Zero(t.full.size());
  for (std::size_t x = 0; x < grid.num_nodes(); ++x)
    for (int I = 0; I < full; ++I) {
      auto tup = lay.full_tuple(I);
      const int a = tup[t.raised_slot];
      double s = 0.0;
      for (int b = 0; b < n; ++b) {
        tup[t.raised_slot] = b;
        s += grid.metric(x, a, b) * t.full[x * full + lay.full_linear(tup)];
      }
      low[x * full + I] = s;
    }
  return compress_full(t.grid, t.valence, low);
}

TensorField metric_field(GridPtr grid) {
  const ManifoldGrid& g = *grid;
  ComponentLayout lay(Valence::sym2(), g.dim());
  Eigen::VectorXd c(static_cast<Eigen::Index>(g.num_nodes() * lay.size()));
  for (std::size_t x = 0; x < g.num_nodes(); ++x)
    for (int k = 0; k < lay.size(); ++k) c[x * lay.size() + k] = g.metric(x, lay.tuple(k)[0], lay.tuple(k)[1]);
  return {std::move(grid), Valence::sym2(), std::move(c)};
}

namespace {

// trace of the last two slots for each leading index (one value for sym2)
std::vector<double> tail_traces(const TensorField& f, std::size_t x, const ComponentLayout& lay) {
  const ManifoldGrid& g = f.grid();
  const int n = g.dim();
  const int lead = f.valence().rank == 3 ? n : 1;
  std::vector<double> tr(lead, 0.0);
  std::vector<int> t(f.valence().rank);
  for (int k = 0; k < lead; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double gij = g.metric_inv(x, i, j);
        if (gij == 0.0) continue;
        if (f.valence().rank == 3) t = {k, i, j};
        else t = {i, j};
        tr[k] += gij * f.at(x, lay.comp_of(t));
      }
  return tr;
}

} // namespace

TensorField project_trace_free(const TensorField& f) {
  if (!f.valence().symmetric_tail()) throw Error(ErrorCode::valence_mismatch, "trace-free projection needs a symmetric tail");
  const ManifoldGrid& g = f.grid();
  const int n = g.dim();
  ComponentLayout lay(f.valence(), n);
  Eigen::VectorXd c = f.components();
  for (std::size_t x = 0; x < g.num_nodes(); ++x) {
    const auto tr = tail_traces(f, x, lay);
    for (int comp = 0; comp < lay.size(); ++comp) {
      auto t = lay.tuple(comp);
      const int k = f.valence().rank == 3 ? t[0] : 0;
      const int i = t[f.valence().rank - 2], j = t[f.valence().rank - 1];
      c[x * lay.size() + comp] -= tr[k] / n * g.metric(x, i, j);
    }
  }
  Valence v = f.valence();
  v.trace_free_tail = true;
  return {f.grid_ptr(), v, std::move(c)};
}

double max_tail_trace(const TensorField& f) {
  ComponentLayout lay(f.valence(), f.grid().dim());
  double m = 0.0;
  for (std::size_t x = 0; x < f.grid().num_nodes(); ++x)
    for (double t : tail_traces(f, x, lay)) m = std::max(m, std::abs(t));
  return m;
}

TensorField lie_derivative_metric(const TensorField& xi_form) {
  if (xi_form.valence().symmetry != Symmetry::one_form)
    throw Error(ErrorCode::valence_mismatch, "Lie derivative of g needs a one-form");
  return delta_star(xi_form.grid_ptr()).apply(xi_form) * 2.0;
}

TensorField sample_field(GridPtr grid, Valence v,
                         const std::function<double(std::span<const double>, std::span<const int>)>& f) {
  const ManifoldGrid& g = *grid;
  ComponentLayout lay(v, g.dim());
  const int full = lay.full_size(), nc = lay.size();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.num_nodes() * nc));
  for (std::size_t x = 0; x < g.num_nodes(); ++x) {
    const auto xc = g.coords(x);
    for (int I = 0; I < full; ++I) {
      const auto t = lay.full_tuple(I);
      const int comp = lay.comp_of_full(I);
      c[x * nc + comp] += f(xc, t) / lay.multiplicity(comp);
    }
  }
  return {std::move(grid), v, std::move(c)};
}

std::array<double, 3> sphere_point(double th, double ph) {
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

std::array<std::array<double, 3>, 2> sphere_tangents(double th, double ph) {
  return {{{std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), -std::sin(th)},
           {-std::sin(th) * std::sin(ph), std::sin(th) * std::cos(ph), 0.0}}};
}

TensorField sphere_one_form(GridPtr grid, const std::function<std::array<double, 3>(const std::array<double, 3>&)>& V) {
  return sample_field(std::move(grid), Valence::one_form(), [&](std::span<const double> x, std::span<const int> t) {
    const auto p = sphere_point(x[0], x[1]);
    const auto e = sphere_tangents(x[0], x[1])[t[0]];
    const auto v = V(p);
    return v[0] * e[0] + v[1] * e[1] + v[2] * e[2];
  });
}

TensorField sphere_sym2_from_matrix(GridPtr grid, const Eigen::Matrix3d& A) {
  return sample_field(std::move(grid), Valence::sym2(), [&](std::span<const double> x, std::span<const int> t) {
    const auto e = sphere_tangents(x[0], x[1]);
    const Eigen::Vector3d a(e[t[0]][0], e[t[0]][1], e[t[0]][2]);
    const Eigen::Vector3d b(e[t[1]][0], e[t[1]][1], e[t[1]][2]);
    return a.dot(A * b);
  });
}

namespace {

TensorField random_torus_field(GridPtr grid, Valence v, std::uint64_t seed, int bw) {
  const ManifoldGrid& g = *grid;
  const int n = g.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int nc = v.num_components(n);
  // enumerate wavevectors in [-bw, bw]^n
  std::vector<std::vector<int>> modes;
  std::vector<int> m(n, -bw);
  while (true) {
    modes.push_back(m);
    int a = n - 1;
    while (a >= 0 && m[a] == bw) m[a--] = -bw;
    if (a < 0) break;
    ++m[a];
  }
  struct Term {
    std::vector<int> m;
    std::vector<double> cos_amp, sin_amp;
  };
  std::vector<Term> terms;
  for (const auto& mm : modes) {
    double k2 = 0.0;
    for (int q : mm) k2 += q * q;
    const double scale = 1.0 / (1.0 + k2);
    Term t{mm, std::vector<double>(nc), std::vector<double>(nc)};
    for (int c = 0; c < nc; ++c) {
      t.cos_amp[c] = scale * normal(rng);
      t.sin_amp[c] = scale * normal(rng);
    }
    terms.push_back(std::move(t));
  }
  const double k0 = 2.0 * std::numbers::pi / g.period();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.num_nodes() * nc));
  for (std::size_t x = 0; x < g.num_nodes(); ++x)
    for (const auto& t : terms) {
      double arg = 0.0;
      for (int a = 0; a < n; ++a) arg += t.m[a] * k0 * g.coord(x, a);
      const double ca = std::cos(arg), sa = std::sin(arg);
      for (int comp = 0; comp < nc; ++comp) c[x * nc + comp] += t.cos_amp[comp] * ca + t.sin_amp[comp] * sa;
    }
  return {std::move(grid), v, std::move(c)};
}

TensorField random_sphere_field(GridPtr grid, Valence v, std::uint64_t seed, int bw) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  // monomials x^a y^b z^c with a+b+c <= bw
  std::vector<std::array<int, 3>> monos;
  for (int a = 0; a <= bw; ++a)
    for (int b = 0; a + b <= bw; ++b)
      for (int c = 0; a + b + c <= bw; ++c) monos.push_back({a, b, c});
  int amb = 1;
  for (int r = 0; r < v.rank; ++r) amb *= 3;
  // coefficient[ambient tuple][monomial]
  std::vector<std::vector<double>> coef(amb, std::vector<double>(monos.size()));
  for (auto& row : coef)
    for (std::size_t q = 0; q < monos.size(); ++q) {
      const int deg = monos[q][0] + monos[q][1] + monos[q][2];
      row[q] = normal(rng) / ((1.0 + deg) * (1.0 + deg));
    }
  return sample_field(std::move(grid), v, [&](std::span<const double> x, std::span<const int> t) {
    const auto p = sphere_point(x[0], x[1]);
    const auto e = sphere_tangents(x[0], x[1]);
    double s = 0.0;
    for (int A = 0; A < amb; ++A) {
      double proj = 1.0;
      int rem = A;
      for (int m = v.rank - 1; m >= 0; --m) {
        proj *= e[t[m]][rem % 3];
        rem /= 3;
      }
      if (proj == 0.0) continue;
      double val = 0.0;
      for (std::size_t q = 0; q < monos.size(); ++q)
        val += coef[A][q] * std::pow(p[0], monos[q][0]) * std::pow(p[1], monos[q][1]) * std::pow(p[2], monos[q][2]);
      s += proj * val;
    }
    return s;
  });
}

} // namespace

TensorField random_field(GridPtr grid, Valence v, std::uint64_t seed, int bandwidth) {
  const ManifoldGrid& g = *grid;
  if (bandwidth < 0) throw Error(ErrorCode::invalid_argument, "bandwidth must be nonnegative");
  const int limit = g.kind() == GeometryKind::flat_torus ? g.extent(0) / 2 : g.extent(0) / 2;
  if (bandwidth >= limit) throw Error(ErrorCode::invalid_argument, "bandwidth too large for the grid");
  TensorField f = g.kind() == GeometryKind::flat_torus ? random_torus_field(grid, v, seed, bandwidth)
                                                       : random_sphere_field(grid, v, seed, bandwidth);
  if (v.trace_free_tail) f = project_trace_free(f);
  return f;
}

void write_field_csv(const TensorField& f, std::ostream& os) {
  const ManifoldGrid& g = f.grid();
  ComponentLayout lay(f.valence(), g.dim());
  os << "node";
  for (int a = 0; a < g.dim(); ++a) os << ",x" << a;
  for (int c = 0; c < lay.size(); ++c) os << "," << lay.label(c);
  os << '\n';
  os.precision(17);
  for (std::size_t x = 0; x < g.num_nodes(); ++x) {
    os << x;
    for (int a = 0; a < g.dim(); ++a) os << ',' << g.coord(x, a);
    for (int c = 0; c < lay.size(); ++c) os << ',' << f.at(x, c);
    os << '\n';
  }
}

} // namespace projlab
