#include "projlab/operators.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/SparseExtra>

#include "projlab/errors.hpp"

namespace projlab {

const char* to_string(Stencil s) noexcept { return s == Stencil::biased ? "biased" : "centered"; }

StencilTaps stencil_taps(Stencil s) {
  if (s == Stencil::biased) return {{0, 1, 2}, {-1.5, 2.0, -0.5}, 3};
  return {{-1, 1}, {-0.5, 0.5}, 2};
}

StencilTaps stencil_taps(Stencil s, const ManifoldGrid& grid, int axis) {
  if (grid.kind() != GeometryKind::round_sphere || axis != 1) return stencil_taps(s);
  if (s == Stencil::biased) return {{-1, 0, 1, 2, 3}, {-3.0 / 12, -10.0 / 12, 18.0 / 12, -6.0 / 12, 1.0 / 12}, 5};
  return {{-2, -1, 1, 2}, {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12}, 4};
}

TensorField DiscreteOperator::apply(const TensorField& f) const {
  if (!f.valence().same_storage(domain))
    throw Error(ErrorCode::valence_mismatch, name + " expects " + domain.name() + ", got " + f.valence().name());
  Eigen::VectorXd y(matrix.rows());
  kernels::spmv_parallel(matrix, {f.components().data(), static_cast<std::size_t>(f.components().size())},
                         {y.data(), static_cast<std::size_t>(y.size())});
  return {grid, codomain, std::move(y)};
}

TensorField NormalOperator::apply(const TensorField& f) const {
  if (!f.valence().same_storage(valence)) throw Error(ErrorCode::valence_mismatch, name + ": wrong valence");
  Eigen::VectorXd y(A.rows());
  kernels::spmv_parallel(A, {f.components().data(), static_cast<std::size_t>(f.components().size())},
                         {y.data(), static_cast<std::size_t>(y.size())});
  const SpMat Minv = mass_inverse(*grid, valence);
  return {grid, valence, Minv * y};
}

SpMat pointwise(const ManifoldGrid& grid, const Valence& in, const Valence& out,
                const std::function<void(std::size_t, Eigen::MatrixXd&)>& block) {
  const int n = grid.dim();
  const int ni = in.num_components(n), no = out.num_components(n);
  const int nn = static_cast<int>(grid.num_nodes());
  return kernels::assemble(nn, no, nn * ni, [&](int x, kernels::RowBuffer& rows) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(no, ni);
    block(x, B);
    for (int a = 0; a < no; ++a)
      for (int b = 0; b < ni; ++b)
        if (B(a, b) != 0.0) rows[a].push_back({x * ni + b, B(a, b)});
  });
}

SpMat mass_inverse(const ManifoldGrid& grid, const Valence& v) {
  return pointwise(grid, v, v, [&](std::size_t x, Eigen::MatrixXd& B) {
    B = (node_gram(grid, x, v) * grid.quad_weight(x)).inverse();
  });
}

double frobenius(const SpMat& a) {
  return std::sqrt(kernels::dot_serial({a.valuePtr(), static_cast<std::size_t>(a.nonZeros())},
                                       {a.valuePtr(), static_cast<std::size_t>(a.nonZeros())}));
}

namespace {

int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

SpMat expand_matrix(const ManifoldGrid& grid, const Valence& v) {
  ComponentLayout lay(v, grid.dim());
  return pointwise(grid, v, Valence::general(v.rank), [&](std::size_t, Eigen::MatrixXd& B) {
    for (int I = 0; I < lay.full_size(); ++I) B(I, lay.comp_of_full(I)) = 1.0;
  });
}

// picks the representative full tuple of each stored component
SpMat compress_matrix(const ManifoldGrid& grid, const Valence& v) {
  ComponentLayout lay(v, grid.dim());
  return pointwise(grid, Valence::general(v.rank), v, [&](std::size_t, Eigen::MatrixXd& B) {
    for (int c = 0; c < lay.size(); ++c) B(c, lay.full_linear(lay.tuple(c))) = 1.0;
  });
}

// cov2 -> sym2, (a_ij + a_ji)/2
SpMat symmetrize_matrix(const ManifoldGrid& grid) {
  const int n = grid.dim();
  ComponentLayout lay(Valence::sym2(), n);
  return pointwise(grid, Valence::cov2(), Valence::sym2(), [&](std::size_t, Eigen::MatrixXd& B) {
    for (int c = 0; c < lay.size(); ++c) {
      const int i = lay.tuple(c)[0], j = lay.tuple(c)[1];
      B(c, i * n + j) += 0.5;
      B(c, j * n + i) += 0.5;
    }
  });
}

// general(R) -> out: contraction of slots (s0, s1) with g^ab. The remaining
// slots keep their order; `out` must have rank R-2.
SpMat contract_matrix(const ManifoldGrid& grid, int R, int s0, int s1, const Valence& out) {
  const int n = grid.dim();
  ComponentLayout in_lay(Valence::general(R), n), out_lay(out, n);
  return pointwise(grid, Valence::general(R), out, [&](std::size_t x, Eigen::MatrixXd& B) {
    for (int c = 0; c < out_lay.size(); ++c) {
      const auto t = out_lay.tuple(c);
      std::vector<int> full(R);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const double gab = grid.metric_inv(x, a, b);
          if (gab == 0.0) continue;
          int q = 0;
          for (int m = 0; m < R; ++m) full[m] = (m == s0) ? a : (m == s1) ? b : t[q++];
          B(c, in_lay.full_linear(full)) += gab;
        }
    }
  });
}

// one_form -> cov1_sym2 with coefficients (c_ij v_k) + (c_k v) terms
SpMat metric_product_matrix(const ManifoldGrid& grid, double a_ij_k, double a_kj_i) {
  // out_kij = a_ij_k g_ij v_k + a_kj_i (g_kj v_i + g_ki v_j)
  const int n = grid.dim();
  ComponentLayout lay(Valence::cov1_sym2(), n);
  return pointwise(grid, Valence::one_form(), Valence::cov1_sym2(), [&](std::size_t x, Eigen::MatrixXd& B) {
    for (int c = 0; c < lay.size(); ++c) {
      const int k = lay.tuple(c)[0], i = lay.tuple(c)[1], j = lay.tuple(c)[2];
      B(c, k) += a_ij_k * grid.metric(x, i, j);
      B(c, i) += a_kj_i * grid.metric(x, k, j);
      B(c, j) += a_kj_i * grid.metric(x, k, i);
    }
  });
}

SpMat scalar_times(const SpMat& a, double s) { return SpMat(a * s); }

DiscreteOperator make_op(std::string name, GridPtr grid, Valence dom, Valence cod, SpMat m, std::string conv) {
  DiscreteOperator d;
  d.name = std::move(name);
  d.domain = dom;
  d.codomain = cod;
  d.matrix = std::move(m);
  d.domain_mass = mass_matrix(*grid, dom);
  d.codomain_mass = mass_matrix(*grid, cod);
  d.convention = std::move(conv);
  d.grid = std::move(grid);
  return d;
}

} // namespace

SpMat nabla_full(const ManifoldGrid& grid, int rank, Stencil s) {
  const int n = grid.dim();
  const int nin = ipow(n, rank), nout = nin * n;
  const int nn = static_cast<int>(grid.num_nodes());
  ComponentLayout lay(Valence::general(rank), n);
  std::vector<std::vector<int>> tuples(nin);
  for (int I = 0; I < nin; ++I) tuples[I] = lay.full_tuple(I);
  const bool sphere = grid.kind() == GeometryKind::round_sphere;

  return kernels::assemble(nn, nout, nn * nin, [&](int x, kernels::RowBuffer& rows) {
    std::vector<double> ext(grid.coords(x).begin(), grid.coords(x).end());
    for (int k = 0; k < n; ++k) {
      const double inv_h = 1.0 / grid.spacing(k);
      const StencilTaps taps = stencil_taps(s, grid, k);
      for (int t = 0; t < taps.count; ++t) {
        const Neighbor nb = grid.neighbor(x, k, taps.offsets[t]);
        ext.assign(grid.coords(x).begin(), grid.coords(x).end());
        ext[k] = nb.ext_coord;
        for (int I = 0; I < nin; ++I) {
          // difference the frame components f_I / prod(lame), then rescale
          double factor = taps.coeffs[t] * inv_h;
          for (int m = 0; m < rank; ++m) {
            const int a = tuples[I][m];
            if (sphere) {
              factor *= grid.lame(x, a) / grid.lame_at(a, ext);
              if (nb.crossed_pole && a == 0) factor = -factor;
            }
          }
          rows[k * nin + I].push_back({static_cast<int>(nb.node) * nin + I, factor});
        }
      }
      for (int I = 0; I < nin; ++I) {
        auto& row = rows[k * nin + I];
        double diag = 0.0;
        for (int m = 0; m < rank; ++m) diag += grid.dlog_lame(x, k, tuples[I][m]);
        if (diag != 0.0) row.push_back({x * nin + I, diag});
        for (int m = 0; m < rank; ++m) {
          auto t = tuples[I];
          const int a = t[m];
          for (int p = 0; p < n; ++p) {
            const double G = grid.christoffel(x, p, k, a);
            if (G == 0.0) continue;
            t[m] = p;
            row.push_back({x * nin + lay.full_linear(t), -G});
          }
        }
      }
    }
  });
}

Valence nabla_codomain(const Valence& v) {
  switch (v.symmetry) {
  case Symmetry::scalar: return Valence::one_form();
  case Symmetry::one_form: return Valence::cov2();
  case Symmetry::sym2: return Valence::cov1_sym2();
  default: return Valence::general(v.rank + 1);
  }
}

DiscreteOperator covariant_derivative(GridPtr grid, Valence v, Stencil s) {
  if (v.rank > 4) throw Error(ErrorCode::invalid_argument, "covariant derivative supports rank <= 4");
  const ManifoldGrid& g = *grid;
  const Valence out = nabla_codomain(v);
  SpMat m = SpMat(compress_matrix(g, out) * nabla_full(g, v.rank, s)) * expand_matrix(g, v);
  return make_op("nabla", std::move(grid), v, out, std::move(m),
                 "(nabla f)_{k I} = d_k f_I - sum_s Gamma^m_{k i_s} f_{..m..}; derivative slot first");
}

DiscreteOperator delta_star(GridPtr grid, Stencil s) {
  const ManifoldGrid& g = *grid;
  const SpMat nab = covariant_derivative(grid, Valence::one_form(), s).matrix;
  SpMat m = symmetrize_matrix(g) * nab;
  return make_op("delta_star", std::move(grid), Valence::one_form(), Valence::sym2(), std::move(m),
                 "(delta* theta)_ij = (nabla_i theta_j + nabla_j theta_i)/2");
}

DiscreteOperator weighted_adjoint(const DiscreteOperator& d) {
  const SpMat minv = mass_inverse(*d.grid, d.domain);
  const SpMat dt = d.matrix.transpose();
  SpMat m = SpMat(minv * dt) * d.codomain_mass;
  DiscreteOperator a;
  a.name = d.name + "_adjoint";
  a.grid = d.grid;
  a.domain = d.codomain;
  a.codomain = d.domain;
  a.matrix = std::move(m);
  a.domain_mass = d.codomain_mass;
  a.codomain_mass = d.domain_mass;
  a.convention = "M_dom^{-1} D^T M_cod of " + d.name;
  return a;
}

DiscreteOperator delta_div(GridPtr grid, Valence source, Stencil s) {
  DiscreteOperator a;
  switch (source.symmetry) {
  case Symmetry::one_form: a = weighted_adjoint(covariant_derivative(grid, Valence::scalar(), s)); break;
  case Symmetry::sym2: a = weighted_adjoint(delta_star(grid, s)); break;
  case Symmetry::cov1_sym2: a = weighted_adjoint(covariant_derivative(grid, Valence::sym2(), s)); break;
  default: throw Error(ErrorCode::valence_mismatch, "delta needs a one_form, sym2 or cov1_sym2 source");
  }
  a.name = "delta";
  a.domain = source;
  a.convention = "(delta h)_J = -nabla^i h_{iJ}, first slot contracted; weighted transpose of nabla/delta*";
  return a;
}


namespace {

// h_{J} = g^{ab} (nabla Phi)_{a b J}, a direct divergence on the first slot. S and E use
// this rather than the weighted transpose: near the poles the cell weights vary on
// the grid scale and the transpose loses consistency there.
SpMat div_first_slot(const ManifoldGrid& g, const Valence& in, const Valence& out, Stencil s = Stencil::biased) {
  return SpMat(contract_matrix(g, in.rank + 1, 0, 1, out) * nabla_full(g, in.rank, s)) *
         expand_matrix(g, in);
}

} // namespace

DiscreteOperator divergence(GridPtr grid, Valence source, Stencil s) {
  Valence out;
  switch (source.symmetry) {
  case Symmetry::one_form: out = Valence::scalar(); break;
  case Symmetry::sym2: out = Valence::one_form(); break;
  case Symmetry::cov1_sym2: out = Valence::sym2(); break;
  default: throw Error(ErrorCode::valence_mismatch, "div needs a one_form, sym2 or cov1_sym2 source");
  }
  const ManifoldGrid& g = *grid;
  SpMat m = div_first_slot(g, source, out, s);
  return make_op("div", std::move(grid), source, out, std::move(m),
                 "(div h)_J = g^{ab} (nabla h)_{abJ}, direct contraction; equals -delta up to O(h^2)");
}

DiscreteOperator sinjukov_S(GridPtr grid, Stencil s) {
  const ManifoldGrid& g = *grid;
  const double c = 1.0 / (g.dim() + 1);
  const SpMat nab = covariant_derivative(grid, Valence::sym2(), s).matrix;
  const SpMat div = div_first_slot(g, Valence::sym2(), Valence::one_form(), s);
  SpMat m = nab - scalar_times(SpMat(metric_product_matrix(g, 0.0, 1.0) * div), c);
  return make_op("S", std::move(grid), Valence::sym2(), Valence::cov1_sym2(), std::move(m),
                 "(S phi)_kij = nabla_k phi_ij - (g_ki (div phi)_j + g_kj (div phi)_i)/(n+1), div = nabla^a phi_a.");
}

DiscreteOperator eisenhart_E(GridPtr grid, Stencil s) {
  const ManifoldGrid& g = *grid;
  const int n = g.dim();
  const SpMat nab2 = covariant_derivative(grid, Valence::sym2(), s).matrix;
  const SpMat ds = delta_star(grid, s).matrix;
  const SpMat d0 = covariant_derivative(grid, Valence::scalar(), s).matrix;
  const SpMat del1 = scalar_times(div_first_slot(g, Valence::one_form(), Valence::scalar(), s), -1.0);
  const SpMat first = scalar_times(SpMat(nab2 * ds), 2.0 * (n + 1));
  const SpMat second = SpMat(metric_product_matrix(g, 2.0, 1.0) * d0) * del1;
  SpMat m = first + second;
  return make_op("E", std::move(grid), Valence::one_form(), Valence::cov1_sym2(true), std::move(m),
                 "(E theta)_kij = 2(n+1) nabla_k (delta* theta)_ij + 2 g_ij nabla_k u + g_kj nabla_i u + g_ki nabla_j u,"
                 " u = delta theta = -nabla^l theta_l");
}


DiscreteOperator sinjukov_S_star(GridPtr grid, AdjointConstruction c) {
  if (c == AdjointConstruction::weighted_transpose) {
    DiscreteOperator a = weighted_adjoint(sinjukov_S(grid));
    a.name = "S_star";
    return a;
  }
  if (c != AdjointConstruction::formula) throw Error(ErrorCode::invalid_argument, "S* has no reduced formula");
  const ManifoldGrid& g = *grid;
  const int n = g.dim();
  const Valence V3 = Valence::cov1_sym2();
  const SpMat divPhi = div_first_slot(g, V3, Valence::sym2());
  const SpMat sigma = SpMat(contract_matrix(g, 3, 0, 1, Valence::one_form()) * expand_matrix(g, V3));
  const SpMat ds = delta_star(grid).matrix;
  SpMat m = scalar_times(divPhi, -1.0) + scalar_times(SpMat(ds * sigma), 2.0 / (n + 1));
  return make_op("S_star_formula", std::move(grid), V3, Valence::sym2(), std::move(m),
                 "S* Phi = -nabla^k Phi_kij + (nabla_i s_j + nabla_j s_i)/(n+1), s_j = Phi_k^k_j");
}

DiscreteOperator eisenhart_E_star(GridPtr grid, AdjointConstruction c) {
  if (c == AdjointConstruction::weighted_transpose) {
    DiscreteOperator a = weighted_adjoint(eisenhart_E(grid));
    a.name = "E_star";
    return a;
  }
  const ManifoldGrid& g = *grid;
  const int n = g.dim();
  const Valence V3 = Valence::cov1_sym2();
  // 2(n+1) nabla^i nabla^j Phi_jik
  const SpMat h = div_first_slot(g, V3, Valence::sym2());
  const SpMat leading = scalar_times(SpMat(div_first_slot(g, Valence::sym2(), Valence::one_form()) * h), 2.0 * (n + 1));
  const SpMat ex = expand_matrix(g, V3);
  const SpMat sigma = contract_matrix(g, 3, 0, 1, Valence::one_form()) * ex;
  const SpMat tau = contract_matrix(g, 3, 1, 2, Valence::one_form()) * ex;
  const SpMat d0 = covariant_derivative(grid, Valence::scalar()).matrix;
  const SpMat div1 = div_first_slot(g, Valence::one_form(), Valence::scalar());
  SpMat m;
  std::string conv;
  if (c == AdjointConstruction::formula) {
    m = leading - scalar_times(SpMat(SpMat(d0 * div1) * SpMat(tau + sigma)), 2.0);
    conv = "E* Phi_k = 2(n+1) nabla^i nabla^j Phi_jik - 2 nabla_k nabla_i (tau^i + sigma^i),"
           " tau^k = Phi^k_i^i, sigma^j = Phi_i^ij";
  } else {
    m = leading + scalar_times(SpMat(SpMat(d0 * div1) * sigma), 2.0);
    conv = "2(n+1) nabla^i nabla^j Phi_jik + 2 nabla_k nabla_i sigma^i (not the adjoint of E)";
  }
  return make_op(c == AdjointConstruction::formula ? "E_star_formula" : "E_star_reduced", std::move(grid), V3,
                 Valence::one_form(), std::move(m), conv);
}

NormalOperator normal_operator(const DiscreteOperator& d) {
  const SpMat dt = d.matrix.transpose();
  SpMat A = SpMat(dt * d.codomain_mass) * d.matrix;
  const SpMat At = A.transpose();
  A = scalar_times(SpMat(A + At), 0.5);
  return {d.name + "*" + d.name, d.grid, d.domain, std::move(A), d.domain_mass};
}

DiscreteOperator sinjukov_normal_formula(GridPtr grid) {
  const ManifoldGrid& g = *grid;
  const int n = g.dim();
  // -g^ab nabla_a nabla_b phi_ij
  const SpMat nab2 = covariant_derivative(grid, Valence::sym2()).matrix;
  const SpMat rough = scalar_times(div_first_slot(g, Valence::cov1_sym2(), Valence::sym2()) * nab2, -1.0);
  const SpMat divfwd = div_first_slot(g, Valence::sym2(), Valence::one_form());
  const SpMat ds = delta_star(grid).matrix;
  SpMat m = rough + scalar_times(SpMat(ds * divfwd), 2.0 / (n + 1));
  return make_op("SstarS_formula", std::move(grid), Valence::sym2(), Valence::sym2(), std::move(m),
                 "nabla*nabla phi + (nabla_i v_j + nabla_j v_i)/(n+1), v = div phi");
}

NormalOperator rough_laplacian(GridPtr grid, Valence v) {
  NormalOperator r = normal_operator(covariant_derivative(std::move(grid), v));
  r.name = "rough_laplacian";
  return r;
}

NormalOperator hodge_laplacian_1forms(GridPtr grid) {
  const ManifoldGrid& g = *grid;
  const int n = g.dim();
  NormalOperator r = rough_laplacian(grid, Valence::one_form());
  // Ric_kj = R^l_klj contracted nodewise, acting as theta_k -> Ric_k^j theta_j
  const SpMat ric = pointwise(g, Valence::one_form(), Valence::one_form(), [&](std::size_t x, Eigen::MatrixXd& B) {
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n), gi(n, n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        gi(k, j) = g.metric_inv(x, k, j);
        for (int l = 0; l < n; ++l) R(k, j) += g.riemann(x, l, k, l, j);
      }
    B = R * gi;
  });
  SpMat A = r.A + SpMat(r.M * ric);
  const SpMat At = A.transpose();
  r.A = scalar_times(SpMat(A + At), 0.5);
  r.name = "hodge_laplacian";
  return r;
}

IdentityTerms integral_identity(const TensorField& phi, Stencil s) {
  if (phi.valence().symmetry != Symmetry::sym2) throw Error(ErrorCode::valence_mismatch, "identity needs sym2");
  const ManifoldGrid& g = phi.grid();
  const int n = g.dim();
  const std::size_t nn = g.num_nodes();
  const Eigen::VectorXd full = expand_full(phi);
  const Eigen::VectorXd dphi = nabla_full(g, 2, s) * full;
  const int n2 = n * n, n3 = n2 * n;
  std::vector<double> K(nn), cross(nn), divsq(nn), norm(nn);
  for (std::size_t x = 0; x < nn; ++x) {
    const double* T = dphi.data() + x * n3;
    const double* P = full.data() + x * n2;
    Eigen::MatrixXd gi(n, n), gm(n, n), ph(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        gi(a, b) = g.metric_inv(x, a, b);
        gm(a, b) = g.metric(x, a, b);
        ph(a, b) = P[a * n + b];
      }
    if ((ph - ph.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + ph.cwiseAbs().maxCoeff()))
      throw Error(ErrorCode::invalid_field, "non-symmetric tensor in integral identity");
    std::vector<double> Tu(n3, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          double v = 0.0;
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
              for (int r = 0; r < n; ++r) v += gi(a, p) * gi(b, q) * gi(c, r) * T[(p * n + q) * n + r];
          Tu[(a * n + b) * n + c] = v;
        }
    double cr = 0.0, gsq = 0.0;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          cr += Tu[(k * n + i) * n + j] * T[(i * n + k) * n + j];
          gsq += Tu[(k * n + i) * n + j] * T[(k * n + i) * n + j];
        }
    Eigen::VectorXd div = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) div[j] += gi(i, k) * T[(i * n + k) * n + j];
    const double dsq = div.dot(gi * div);
    const double psq = (gi * ph * gi * ph).trace();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ph, gm);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::invalid_field, "nodewise eigen-decomposition failed");
    double k_term = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const Eigen::VectorXd ei = es.eigenvectors().col(i), ej = es.eigenvectors().col(j);
        const double d = es.eigenvalues()[i] - es.eigenvalues()[j];
        if (d == 0.0) continue;
        k_term += sectional_curvature(g, x, {ei.data(), static_cast<std::size_t>(n)},
                                      {ej.data(), static_cast<std::size_t>(n)}) *
                  d * d;
      }
    const double w = g.quad_weight(x);
    K[x] = w * k_term;
    cross[x] = w * cr;
    divsq[x] = w * dsq;
    norm[x] = w * (psq + gsq);
  }
  IdentityTerms t;
  t.curvature_term = kernels::pairwise_sum(K);
  t.cross_term = kernels::pairwise_sum(cross);
  t.divergence_term = kernels::pairwise_sum(divsq);
  t.norm_sq = kernels::pairwise_sum(norm);
  t.residual = t.curvature_term + t.cross_term - t.divergence_term;
  return t;
}

double integral_identity_residual(const TensorField& phi, Stencil s) { return integral_identity(phi, s).residual; }

void write_matrix_market(const DiscreteOperator& d, const std::string& stem) {
  const SpMatCol a = d.matrix, m = d.domain_mass;
  if (!Eigen::saveMarket(a, stem + ".mtx") || !Eigen::saveMarket(m, stem + "-mass.mtx"))
    throw Error(ErrorCode::io_error, "cannot write " + stem + ".mtx");
}

} // namespace projlab
