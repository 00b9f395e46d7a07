#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "projlab/errors.hpp"
#include "projlab/operators.hpp"

using namespace projlab;
using std::numbers::pi;

namespace {

GridPtr torus(int n, int N) { return std::make_shared<const ManifoldGrid>(build_flat_torus(n, N, 2 * pi)); }
GridPtr sphere(int nt) { return std::make_shared<const ManifoldGrid>(build_round_sphere(nt, 2 * nt)); }

double rel(const TensorField& a, const TensorField& ref) { return l2_norm(a) / l2_norm(ref); }

TensorField killing_x(GridPtr g) {
  return sphere_one_form(std::move(g), [](const std::array<double, 3>& p) {
    return std::array<double, 3>{0.0, -p[2], p[1]};
  });
}

// shift every node by +1 along axis 0 of a torus
TensorField shifted(const TensorField& f) {
  const ManifoldGrid& g = f.grid();
  const int nc = f.comps_per_node();
  Eigen::VectorXd c(f.components().size());
  for (std::size_t x = 0; x < g.num_nodes(); ++x) {
    const std::size_t y = g.neighbor(x, 0, 1).node;
    for (int k = 0; k < nc; ++k) c[x * nc + k] = f.at(y, k);
  }
  return f.with_components(c);
}

} // namespace

TEST_CASE("metric is parallel") {
  const GridPtr t = torus(3, 8);
  CHECK(l2_norm(covariant_derivative(t, Valence::sym2()).apply(metric_field(t))) <= 1e-13);
  // Christoffels come from the same stencil as d g, so the sphere metric is parallel to roundoff too
  for (int nt : {16, 32, 64}) {
    const GridPtr s = sphere(nt);
    CHECK(rel(covariant_derivative(s, Valence::sym2()).apply(metric_field(s)), metric_field(s)) <= 1e-12);
  }
}

TEST_CASE("delta* kills constants on the torus and Killing forms on the sphere") {
  const GridPtr t = torus(2, 16);
  const TensorField c = sample_field(t, Valence::one_form(), [](auto, auto idx) { return idx[0] == 0 ? 2.0 : -0.5; });
  CHECK(l2_norm(delta_star(t).apply(c)) <= 1e-14);
  double prev = 0;
  for (int nt : {16, 32, 64}) {
    const GridPtr g = sphere(nt);
    const double r = rel(delta_star(g).apply(killing_x(g)), killing_x(g));
    if (prev > 0) CHECK(std::log2(prev / r) > 1.8);
    prev = r;
  }
}

TEST_CASE("S annihilates constant multiples of g") {
  const GridPtr t = torus(3, 6);
  CHECK(l2_norm(sinjukov_S(t).apply(metric_field(t) * 3.0)) <= 1e-13);
  for (int nt : {16, 32, 64}) {
    const GridPtr s = sphere(nt);
    CHECK(rel(sinjukov_S(s).apply(metric_field(s) * 3.0), metric_field(s)) <= 1e-12);
  }
}

TEST_CASE("S of cos(x) g by hand") {
  // phi = f g, f = cos x0 on T^2: (S phi)_kij = D_k f g_ij - (g_ki D_j f + g_kj D_i f)/3,
  // D the one-sided stencil (-3, 4, -1)/(2h) along x0 and D_1 f = 0
  const int N = 16;
  const GridPtr g = torus(2, N);
  const double h = 2 * pi / N;
  const TensorField phi = sample_field(g, Valence::sym2(), [](auto x, auto idx) {
    return idx[0] == idx[1] ? std::cos(x[0]) : 0.0;
  });
  const TensorField s = sinjukov_S(g).apply(phi);
  const ComponentLayout lay(Valence::cov1_sym2(), 2);
  for (std::size_t node = 0; node < g->num_nodes(); node += 5) {
    const double x = g->coord(node, 0);
    const double D = (-3 * std::cos(x) + 4 * std::cos(x + h) - std::cos(x + 2 * h)) / (2 * h);
    auto at = [&](int k, int i, int j) {
      const int t[] = {k, i, j};
      return s.at(node, lay.comp_of(t));
    };
    CHECK(at(0, 0, 0) == doctest::Approx(D / 3).epsilon(1e-13).scale(1.0));
    CHECK(at(0, 1, 1) == doctest::Approx(D).epsilon(1e-13).scale(1.0));
    CHECK(at(1, 0, 1) == doctest::Approx(-D / 3).epsilon(1e-13).scale(1.0));
    CHECK(at(0, 0, 1) == doctest::Approx(0.0).scale(1.0));
    CHECK(at(1, 0, 0) == doctest::Approx(0.0).scale(1.0));
    CHECK(at(1, 1, 1) == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("Eisenhart operator on projective and non-projective forms") {
  auto grad = [](GridPtr g, bool quadratic) {
    return sphere_one_form(std::move(g), [quadratic](const std::array<double, 3>& p) {
      return quadratic ? std::array<double, 3>{p[1], p[0], 0.0} : std::array<double, 3>{0.0, 0.0, 1.0};
    });
  };
  // d(xy) and rotations lie in ker E, d(z) does not
  std::vector<double> r_grad, r_kill;
  for (int nt : {16, 32}) {
    const GridPtr g = sphere(nt);
    const DiscreteOperator E = eisenhart_E(g);
    r_grad.push_back(rel(E.apply(grad(g, true)), grad(g, true)));
    r_kill.push_back(rel(E.apply(killing_x(g)), killing_x(g)));
    CHECK(rel(E.apply(grad(g, false)), grad(g, false)) > 1.0);
  }
  CHECK(std::log2(r_grad[0] / r_grad[1]) > 1.8);
  CHECK(std::log2(r_kill[0] / r_kill[1]) > 1.8);
  CHECK(max_tail_trace(eisenhart_E(sphere(16)).apply(random_field(sphere(16), Valence::one_form(), 1, 3))) <= 1e-10);
}

TEST_CASE("weighted adjoints") {
  for (GridPtr g : {torus(2, 12), sphere(12)}) {
    for (const DiscreteOperator& D : {covariant_derivative(g, Valence::one_form()), delta_star(g), sinjukov_S(g),
                                      eisenhart_E(g)}) {
      const DiscreteOperator Ds = weighted_adjoint(D);
      for (int p = 0; p < 3; ++p) {
        const TensorField x = random_field(g, D.domain, 10 + p, 3);
        TensorField y = random_field(g, D.codomain, 20 + p, 3);
        const TensorField Dx = D.apply(x);
        CHECK(std::abs(l2_inner(Dx, y) - l2_inner(x, Ds.apply(y))) <= 1e-13 * l2_norm(Dx) * l2_norm(y));
      }
    }
  }
}

TEST_CASE("torus operators commute with translations") {
  const GridPtr g = torus(2, 12);
  const TensorField phi = random_field(g, Valence::sym2(), 4, 3);
  const TensorField th = random_field(g, Valence::one_form(), 5, 3);
  const DiscreteOperator S = sinjukov_S(g), E = eisenhart_E(g);
  CHECK(l2_norm(S.apply(shifted(phi)) - shifted(S.apply(phi))) <= 1e-13 * l2_norm(S.apply(phi)));
  CHECK(l2_norm(E.apply(shifted(th)) - shifted(E.apply(th))) <= 1e-13 * l2_norm(E.apply(th)));
}

TEST_CASE("adjoint formulas converge to the weighted transpose") {
  std::vector<double> s, e;
  for (int N : {16, 32}) {
    const GridPtr g = torus(2, N);
    const TensorField y = random_field(g, Valence::cov1_sym2(), 3, 2);
    const TensorField a = sinjukov_S_star(g).apply(y), b = eisenhart_E_star(g).apply(y);
    s.push_back(rel(a - sinjukov_S_star(g, AdjointConstruction::formula).apply(y), a));
    e.push_back(rel(b - eisenhart_E_star(g, AdjointConstruction::formula).apply(y), b));
  }
  CHECK(std::log2(s[0] / s[1]) > 1.8);
  CHECK(std::log2(e[0] / e[1]) > 1.8);
  CHECK_THROWS_AS(sinjukov_S_star(torus(2, 8), AdjointConstruction::reduced_formula), Error);
}

TEST_CASE("Weitzenbock form of the Hodge Laplacian") {
  const GridPtr g = sphere(16);
  const NormalOperator H = hodge_laplacian_1forms(g);
  const NormalOperator R = rough_laplacian(g, Valence::one_form());
  // Ric = (n - 1) g on the unit sphere
  CHECK(frobenius(SpMat(H.A - R.A - H.M)) <= 1e-14 * frobenius(H.A));
  const NormalOperator Ht = hodge_laplacian_1forms(torus(2, 8));
  CHECK(frobenius(SpMat(Ht.A - rough_laplacian(torus(2, 8), Valence::one_form()).A)) == 0.0);
}

TEST_CASE("normal operators are symmetric") {
  for (GridPtr g : {torus(2, 8), sphere(12)})
    for (const DiscreteOperator& D : {sinjukov_S(g), eisenhart_E(g)}) {
      const NormalOperator op = normal_operator(D);
      CHECK(frobenius(SpMat(op.A - SpMat(op.A.transpose()))) <= 1e-14 * frobenius(op.A));
    }
}

TEST_CASE("integral identity") {
  const GridPtr t = torus(2, 16);
  for (int s = 0; s < 3; ++s) {
    const TensorField phi = random_field(t, Valence::sym2(), s, 3);
    const IdentityTerms it = integral_identity(phi);
    CHECK(std::abs(it.residual) <= 1e-12 * l2_inner(phi, phi));
    CHECK(it.curvature_term == 0.0);
  }
  // g-eigenvalues 1 and 3 everywhere: K = sec (1 - 3)^2 = 4 pointwise
  const GridPtr s = sphere(32);
  const TensorField phi = sample_field(s, Valence::sym2(), [](auto x, auto idx) {
    const double sn = std::sin(x[0]);
    return idx[0] != idx[1] ? 0.0 : idx[0] == 0 ? 1.0 : 3.0 * sn * sn;
  });
  CHECK(integral_identity(phi).curvature_term == doctest::Approx(16 * pi).epsilon(1e-12));
  CHECK(std::abs(integral_identity(metric_field(s)).curvature_term) <= 1e-12);
  CHECK_THROWS_AS(integral_identity(random_field(t, Valence::one_form(), 1, 2)), Error);
}

TEST_CASE("matrix market export") {
  const GridPtr g = torus(2, 4);
  const DiscreteOperator D = delta_star(g);
  const auto stem = (std::filesystem::temp_directory_path() / "projlab_ds").string();
  write_matrix_market(D, stem);
  std::ifstream in(stem + ".mtx");
  std::string header;
  std::getline(in, header);
  std::istringstream words(header);
  std::string banner, object, format, field, symmetry;
  words >> banner >> object >> format >> field >> symmetry;
  CHECK(banner == "%%MatrixMarket");
  CHECK(format == "coordinate");
  CHECK(field == "real");
  CHECK(symmetry == "general");
  std::string line;
  while (std::getline(in, line) && line[0] == '%') {
  }
  std::istringstream dims(line);
  long r, c, nnz;
  dims >> r >> c >> nnz;
  CHECK(r == 48);
  CHECK(c == 32);
  CHECK(nnz == D.matrix.nonZeros());
  CHECK(std::filesystem::exists(stem + "-mass.mtx"));
  std::filesystem::remove(stem + ".mtx");
  std::filesystem::remove(stem + "-mass.mtx");
}

TEST_CASE("valence checks") {
  const GridPtr g = torus(2, 8);
  CHECK_THROWS_AS(sinjukov_S(g).apply(random_field(g, Valence::one_form(), 1, 2)), Error);
  CHECK_THROWS_AS(delta_div(g, Valence::scalar()), Error);
}
