#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "projlab/errors.hpp"
#include "projlab/fields.hpp"

using namespace projlab;
using std::numbers::pi;

namespace {
GridPtr torus(int n, int N) { return std::make_shared<const ManifoldGrid>(build_flat_torus(n, N, 2 * pi)); }
GridPtr sphere(int nt) { return std::make_shared<const ManifoldGrid>(build_round_sphere(nt, 2 * nt)); }
} // namespace

TEST_CASE("component layouts") {
  CHECK(Valence::sym2().num_components(2) == 3);
  CHECK(Valence::sym2().num_components(3) == 6);
  CHECK(Valence::cov1_sym2().num_components(2) == 6);
  CHECK(Valence::cov1_sym2().num_components(4) == 40);
  CHECK(Valence::cov1_sym2(true).independent_count(3) == 15);
  CHECK(Valence::sym2().name() == "sym2");
  CHECK(Valence::cov1_sym2(true).name() == "cov1_sym2_tf");

  const ComponentLayout lay(Valence::cov1_sym2(), 3);
  CHECK(lay.size() == 18);
  CHECK(lay.full_size() == 27);
  const int a[] = {2, 0, 1}, b[] = {2, 1, 0};
  CHECK(lay.comp_of(a) == lay.comp_of(b));
  CHECK(lay.multiplicity(lay.comp_of(a)) == 2);
  const int d[] = {1, 2, 2};
  CHECK(lay.multiplicity(lay.comp_of(d)) == 1);
  CHECK(lay.label(lay.comp_of(a)) == "c201");
  int total = 0;
  for (int c = 0; c < lay.size(); ++c) total += lay.multiplicity(c);
  CHECK(total == 27);
}

TEST_CASE("metric norm and raise/lower") {
  for (GridPtr g : {torus(2, 8), torus(3, 4), sphere(12)}) {
    const TensorField m = metric_field(g);
    const int n = g->dim();
    // |g|^2 = n pointwise
    CHECK(l2_inner(m, m) == doctest::Approx(n * g->total_volume()).epsilon(1e-13));
    const MixedTensor up = raise_index(m, 0);
    for (std::size_t x = 0; x < g->num_nodes(); x += 7)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) CHECK(up.full[x * n * n + i * n + j] == doctest::Approx(i == j ? 1.0 : 0.0));
    const TensorField f = random_field(g, Valence::cov1_sym2(), 5, 1);
    for (int slot = 0; slot < 3; ++slot) {
      const TensorField back = lower_index(raise_index(f, slot));
      CHECK(l2_norm(back - f) <= 1e-13 * l2_norm(f));
    }
  }
  CHECK_THROWS_AS(raise_index(metric_field(torus(2, 8)), 2), Error);
}

TEST_CASE("random fields are deterministic and band-limited") {
  const GridPtr g = torus(2, 16);
  const TensorField a = random_field(g, Valence::sym2(), 42, 3);
  const TensorField b = random_field(g, Valence::sym2(), 42, 3);
  const TensorField c = random_field(g, Valence::sym2(), 43, 3);
  CHECK((a.components().array() == b.components().array()).all());
  CHECK(l2_norm(a - c) > 0.1 * l2_norm(a));
  CHECK_THROWS_AS(random_field(g, Valence::sym2(), 1, 8), Error);
  CHECK_THROWS_AS(random_field(g, Valence::sym2(), 1, -1), Error);

  // the same ambient polynomial at every resolution
  const GridPtr s1 = sphere(16), s2 = sphere(32);
  const TensorField f1 = random_field(s1, Valence::scalar(), 9, 3), f2 = random_field(s2, Valence::scalar(), 9, 3);
  // no node is shared between the two grids, so compare an integral
  const double m1 = l2_inner(f1, f1), m2 = l2_inner(f2, f2);
  CHECK(m1 == doctest::Approx(m2).epsilon(2e-2));

  const TensorField tf = random_field(sphere(12), Valence::cov1_sym2(true), 3, 2);
  CHECK(max_tail_trace(tf) <= 1e-13);
}

TEST_CASE("ambient constructions") {
  const GridPtr g = sphere(16);
  // <I d_a p, d_b p> is the induced metric
  const TensorField m = sphere_sym2_from_matrix(g, Eigen::Matrix3d::Identity());
  CHECK(l2_norm(m - metric_field(g)) <= 1e-14 * l2_norm(metric_field(g)));
  // rotation about z: theta = sin^2(theta) dphi
  const TensorField k = sphere_one_form(g, [](const std::array<double, 3>& p) {
    return std::array<double, 3>{-p[1], p[0], 0.0};
  });
  for (std::size_t x = 0; x < g->num_nodes(); x += 13) {
    const double s = std::sin(g->coord(x, 0));
    CHECK(k.at(x, 0) == doctest::Approx(0.0).scale(1.0));
    CHECK(k.at(x, 1) == doctest::Approx(s * s));
  }
}

TEST_CASE("Killing forms have small Lie derivative at second order") {
  auto rel = [](int nt) {
    const GridPtr g = sphere(nt);
    const TensorField k = sphere_one_form(g, [](const std::array<double, 3>& p) {
      return std::array<double, 3>{0.0, -p[2], p[1]};  // rotation about x
    });
    return l2_norm(lie_derivative_metric(k)) / l2_norm(k);
  };
  const double a = rel(16), b = rel(32);
  CHECK(a < 5e-2);
  CHECK(std::log2(a / b) > 1.8);
}

TEST_CASE("trace-free projection and arithmetic guards") {
  const GridPtr g = sphere(12);
  const TensorField f = random_field(g, Valence::sym2(), 2, 2);
  CHECK(max_tail_trace(project_trace_free(f)) <= 1e-13);
  CHECK_THROWS_AS(f + random_field(g, Valence::one_form(), 2, 2), Error);
  CHECK_THROWS_AS(f + random_field(sphere(16), Valence::sym2(), 2, 2), Error);
  CHECK_THROWS_AS(TensorField(g, Valence::sym2(), Eigen::VectorXd::Zero(5)), Error);
  CHECK_THROWS_AS(project_trace_free(random_field(g, Valence::one_form(), 2, 2)), Error);
  const TensorField z = f * 2.0 - f - f;
  CHECK(l2_norm(z) == 0.0);
}

TEST_CASE("field CSV") {
  const GridPtr g = torus(2, 4);
  std::ostringstream os;
  write_field_csv(metric_field(g), os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "node,x0,x1,c00,c01,c11");
  std::getline(is, line);
  CHECK(line == "0,0,0,1,0,1");
  int rows = 1;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 16);
}
