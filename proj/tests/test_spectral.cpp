#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "projlab/errors.hpp"
#include "projlab/spectral.hpp"

using namespace projlab;
using std::numbers::pi;

namespace {

GridPtr torus(int N) { return std::make_shared<const ManifoldGrid>(build_flat_torus(2, N, 2 * pi)); }
GridPtr sphere(int nt) { return std::make_shared<const ManifoldGrid>(build_round_sphere(nt, 2 * nt)); }

// Restriction of the assembled pair (A, M) to the plane waves exp(i m.x) e_c:
// a reference that only assumes translation invariance of the assembly.
std::vector<double> projected_mode(const NormalOperator& op, const std::vector<int>& m) {
  const ManifoldGrid& g = *op.grid;
  const int nc = op.valence.num_components(g.dim());
  const Eigen::Index dim = op.A.rows();
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(dim, nc);
  for (std::size_t x = 0; x < g.num_nodes(); ++x) {
    double phase = 0.0;
    for (int a = 0; a < g.dim(); ++a) phase += m[a] * g.coord(x, a) * 2 * pi / g.period();
    for (int c = 0; c < nc; ++c) B(x * nc + c, c) = std::polar(1.0, phase);
  }
  const Eigen::MatrixXd Ad = Eigen::MatrixXd(op.A), Md = Eigen::MatrixXd(op.M);
  const Eigen::MatrixXcd a = B.adjoint() * Ad * B, mm = B.adjoint() * Md * B;
  // M is block diagonal with a constant block here, so mm is Hermitian positive definite
  Eigen::LLT<Eigen::MatrixXcd> llt(mm);
  const Eigen::MatrixXcd L = llt.matrixL();
  const Eigen::MatrixXcd Li = L.inverse();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Li * a * Li.adjoint());
  return {es.eigenvalues().data(), es.eigenvalues().data() + nc};
}

SpectrumReport synthetic(std::vector<double> v) {
  SpectrumReport r;
  r.eigenvalues = std::move(v);
  return r;
}

} // namespace

TEST_CASE("kernel counting") {
  auto r = synthetic({1e-15, 3e-14, 2e-13, 0.4, 0.4, 0.9, 1.3});
  CHECK(kernel_dimension(r) == 3);
  CHECK(r.gap_ratio > 1e10);
  CHECK_FALSE(r.unstable);

  // discretization spreads the kernel over decades; the last interior jump counts
  r = synthetic({2.6e-5, 4e-4, 3e-2, 3e-2, 16.2, 16.2, 145});
  CHECK(kernel_dimension(r) == 4);
  CHECK(r.gap_ratio == doctest::Approx(16.2 / 3e-2));

  r = synthetic({0.01, 0.2, 0.25, 0.3});
  CHECK(kernel_dimension(r) == 1);
  CHECK(r.unstable);

  r = synthetic({1.0, 2.0, 3.0, 5.0});
  CHECK(kernel_dimension(r) == 0);

  r = synthetic({1e-3, 2.0, 2.0, 3.0});
  CHECK(kernel_dimension(r) == 1);
  CHECK(r.gap_ratio == doctest::Approx(2000.0));
}

TEST_CASE("clusters and comparison tables") {
  const std::vector<double> v{1.0, 1.001, 1.002, 2.0, 2.0, 7.5};
  const auto cl = cluster_eigenvalues(v, 1e-2, 1e-8);
  REQUIRE(cl.size() == 3);
  CHECK(cl[0].multiplicity == 3);
  CHECK(cl[0].mean == doctest::Approx(1.001));
  CHECK(cl[1].first == 3);
  CHECK(cl[2].multiplicity == 1);

  const std::vector<ReferenceValue> refs{{"a", 1.0, "x", 1}, {"b", 2.01, "x", 2}, {"c", 40.0, "x", 3}};
  const ComparisonTable t = compare_to_reference(v, refs, 0.03);
  REQUIRE(t.matches.size() == 3);
  CHECK(t.matches[0].computed);
  CHECK(t.matches[0].multiplicity == 3);
  CHECK(t.matches[1].first == 3);
  CHECK_FALSE(t.matches[2].computed);
  CHECK_FALSE(t.all_matched());
  REQUIRE(t.unmatched.size() == 1);
  CHECK(t.unmatched[0].first == doctest::Approx(7.5));

  SpectrumReport r = synthetic({1e-14, 1e-14, 1.0, 1.0, 2.0});
  r.kernel_count = 2;
  const ComparisonTable nk = compare_nonkernel(r, {{"zero", 0.0, "kernel", 0}, {"one", 1.0, "x", 1}}, 0.01);
  REQUIRE(nk.matches.size() == 1);
  CHECK(nk.matches[0].first == 2);
}

TEST_CASE("Richardson extrapolation") {
  auto mu = [](double h) { return 2.0 + 0.7 * h * h + 0.1 * h * h * h * h; };
  const auto e = richardson(mu(0.4), mu(0.2), mu(0.1));
  CHECK(e.order == doctest::Approx(2.0).epsilon(0.02));
  CHECK(e.limit == doctest::Approx(2.0).epsilon(1e-4));
  CHECK_FALSE(e.noisy);
  CHECK(richardson(1.0, 1.1, 1.05).noisy);
  CHECK(richardson(1.0, 1.0, 1.0).noisy);
}

TEST_CASE("Fourier oracle against the projected assembly") {
  for (OperatorTag tag : {OperatorTag::sinjukov, OperatorTag::eisenhart}) {
    const GridPtr g = torus(8);
    const NormalOperator op = build_normal(g, tag);
    for (const std::vector<int>& m : {std::vector<int>{0, 0}, {1, 0}, {2, -3}, {-3, 1}}) {
      const auto ref = projected_mode(op, m);
      const auto got = torus_fourier_oracle(2, 8, 2 * pi, tag, m);
      REQUIRE(got.size() == ref.size());
      const double scale = std::max(1.0, ref.back());
      for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(got[i] - ref[i]) <= 1e-11 * scale);
    }
  }
  CHECK_THROWS_AS(torus_fourier_oracle(2, 8, 2 * pi, OperatorTag::sinjukov, {4, 0}), Error);
  CHECK_THROWS_AS(torus_fourier_oracle(2, 8, 2 * pi, OperatorTag::sinjukov, {1, 0}, Stencil::centered), Error);
  // m = 0: constants are in ker E
  for (double v : torus_fourier_oracle(2, 8, 2 * pi, OperatorTag::eisenhart, {0, 0})) CHECK(v == 0.0);
}

TEST_CASE("torus spectra at N = 16") {
  // frozen from the projected-mode oracle; S*S: kernel 3, then 4 and 5+ fold clusters
  const GridPtr g = torus(16);
  const auto s = solve_smallest(build_normal(g, OperatorTag::sinjukov), 12, EigenMode::dense);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(s.eigenvalues[i]) <= 1e-12 * s.scale);
  for (int i = 3; i < 7; ++i) CHECK(s.eigenvalues[i] == doctest::Approx(0.366645237470427).epsilon(1e-10));
  for (int i = 7; i < 12; ++i) CHECK(s.eigenvalues[i] == doctest::Approx(0.733290474940854).epsilon(1e-10));
  CHECK(s.kernel_count == 3);

  const auto e = solve_smallest(build_normal(g, OperatorTag::eisenhart), 12, EigenMode::dense);
  CHECK(e.kernel_count == 2);
  const double ref[] = {12.0985857143771, 12.0985857143771, 12.0985857143771, 12.0985857143771,
                        21.7774542858789, 21.7774542858789, 21.7774542858789, 21.7774542858789,
                        48.302743241646,  48.302743241646};
  for (int i = 0; i < 10; ++i) CHECK(e.eigenvalues[i + 2] == doctest::Approx(ref[i]).epsilon(1e-10));
  const auto oracle = torus_oracle_smallest(2, 16, 2 * pi, OperatorTag::eisenhart, 12, 7);
  for (int i = 2; i < 12; ++i) CHECK(oracle[i] == doctest::Approx(ref[i - 2]).epsilon(1e-12));
}

TEST_CASE("shift-invert Lanczos agrees with the dense solver") {
  const GridPtr g = torus(24);  // 1728 unknowns
  const NormalOperator op = build_normal(g, OperatorTag::sinjukov);
  const auto a = solve_smallest(op, 10, EigenMode::dense, 1, false);
  const auto b = solve_smallest(op, 10, EigenMode::shift_invert, 1, true);
  CHECK(b.mode == "shift_invert");
  for (int i = 3; i < 10; ++i) CHECK(b.eigenvalues[i] == doctest::Approx(a.eigenvalues[i]).epsilon(1e-10));
  for (double r : b.residuals) CHECK(r <= 1e-8);
  // M-orthonormal eigenvectors
  const Eigen::MatrixXd G = b.vectors.transpose() * (op.M * b.vectors);
  CHECK((G - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK_THROWS_AS(solve_smallest(op, 0), Error);
}

TEST_CASE("Sinjukov kernel on the sphere") {
  const GridPtr g = sphere(24);
  const auto r = solve_smallest(build_normal(g, OperatorTag::sinjukov), 10);
  CHECK(r.kernel_count == 6);
  CHECK(r.gap_ratio >= 50.0);
  CHECK_FALSE(r.unstable);
  CHECK(r.eigenvalues.front() >= -1e-10 * r.scale);
}

TEST_CASE("Berger-Ebin on simple tensors") {
  // constant diag(1, 2) on T^2: 1.5 g is the trace part, the rest is TT
  const GridPtr t = torus(8);
  const TensorField phi = sample_field(t, Valence::sym2(), [](auto, auto idx) {
    return idx[0] != idx[1] ? 0.0 : idx[0] == 0 ? 1.0 : 2.0;
  });
  const BergerEbin be(t);
  const auto p = be.decompose(phi);
  CHECK(p.trace_fraction == doctest::Approx(0.9).epsilon(1e-10));
  CHECK(p.im_fraction == doctest::Approx(0.0).scale(1.0));
  CHECK(p.tt_fraction == doctest::Approx(0.1).epsilon(1e-10));

  const GridPtr s = sphere(12);
  const BergerEbin bs(s);
  // im delta* is projected first and discretely leaks a little into the trace directions
  const double leak12 = 1.0 - bs.decompose(metric_field(s)).trace_fraction;
  const GridPtr s24 = sphere(24);
  const double leak24 = 1.0 - BergerEbin(s24).decompose(metric_field(s24)).trace_fraction;
  CHECK(leak12 < 2e-3);
  CHECK(std::log2(leak12 / leak24) > 1.8);
  const TensorField im = delta_star(s).apply(random_field(s, Valence::one_form(), 4, 3));
  const auto r = bs.decompose(im);
  CHECK(r.im_fraction >= 1 - 1e-6);
  CHECK(r.tt_fraction <= 1e-6);
  CHECK(std::abs(l2_inner(r.im_part, r.tt_part)) <= 1e-10 * l2_inner(im, im));
  CHECK(std::abs(r.trace_fraction + r.im_fraction + r.tt_fraction - 1.0) <= 1e-8);
}

TEST_CASE("Hodge projector") {
  const GridPtr s = sphere(16);
  const HodgeProjector hp(s);
  // discrete gradients are reproduced to roundoff
  const TensorField f = sample_field(s, Valence::scalar(), [](auto x, auto) {
    return std::sin(x[0]) * std::sin(x[0]) * std::cos(x[1]) * std::sin(x[1]);
  });
  const TensorField dfh = covariant_derivative(s, Valence::scalar()).apply(f);
  CHECK(l2_norm(hp.exact_part(dfh) - dfh) <= 1e-12 * l2_norm(dfh));
  // the sampled continuum d(xy) only up to truncation
  auto defect = [](int nt) {
    const GridPtr g = sphere(nt);
    const TensorField df = sphere_one_form(g, [](const std::array<double, 3>& p) {
      return std::array<double, 3>{p[1], p[0], 0.0};
    });
    return l2_norm(HodgeProjector(g).exact_part(df) - df) / l2_norm(df);
  };
  const double d16 = defect(16), d32 = defect(32);
  CHECK(d16 < 5e-2);
  CHECK(std::log2(d16 / d32) > 1.8);
  const TensorField k = sphere_one_form(s, [](const std::array<double, 3>& p) {
    return std::array<double, 3>{-p[1], p[0], 0.0};
  });
  CHECK(l2_norm(hp.exact_part(k)) <= 1e-2 * l2_norm(k));
  const HodgeSplit empty = hodge_split(hp, s, SpMat(), Eigen::MatrixXd(0, 0), SpMat());
  CHECK(empty.exact_count == 0);
}

TEST_CASE("reference tables") {
  const auto quoted = analytic_sphere_spectrum(OperatorTag::eisenhart, 2, 4);
  auto find = [](const std::vector<ReferenceValue>& v, const std::string& l) {
    for (const auto& r : v)
      if (r.label == l) return r;
    FAIL("missing " << l);
    return v.front();
  };
  CHECK(find(quoted, "exact_k2").value == 90.0);
  CHECK(find(quoted, "exact_k4").value == 216.0);
  CHECK(find(quoted, "coexact_k2").value == 63.0);
  CHECK(find(quoted, "coexact_k3").value == 117.0);
  CHECK(find(quoted, "coexact_k1_formula").value == 27.0);
  CHECK(find(quoted, "coexact_k1_formula").flagged);

  // 2(5l - 12)(l - 6) and 18(l - 4)(l - 2), l = k(k+1)
  const auto w = weitzenbock_sphere_spectrum(2, 4);
  CHECK(find(w, "exact_k1").value == doctest::Approx(16.0));
  CHECK(find(w, "exact_k2").value == doctest::Approx(0.0));
  CHECK(find(w, "exact_k3").value == doctest::Approx(576.0));
  CHECK(find(w, "exact_k4").value == doctest::Approx(2464.0));
  CHECK(find(w, "coexact_k1").value == doctest::Approx(0.0));
  CHECK(find(w, "coexact_k2").value == doctest::Approx(144.0));
  CHECK(find(w, "coexact_k3").value == doctest::Approx(1440.0));

  const auto s = analytic_sphere_spectrum(OperatorTag::sinjukov, 2, 3);
  CHECK(find(s, "trace_first_nonzero").value == 2.0);
  CHECK(find(s, "tt_k3").value == 6.0);
  CHECK_THROWS_AS(analytic_sphere_spectrum(OperatorTag::sinjukov, 1, 3), Error);
}

TEST_CASE("convergence study") {
  const auto st = convergence_study({torus(8), torus(16), torus(32)}, OperatorTag::sinjukov, 6);
  REQUIRE(st.rows.size() == 6);
  CHECK(st.grids.size() == 3);
  CHECK_THROWS_AS(convergence_study({torus(8), torus(16)}, OperatorTag::sinjukov, 4), Error);
  CHECK_THROWS_AS(convergence_study({torus(8), torus(12), torus(16)}, OperatorTag::sinjukov, 4), Error);
}
