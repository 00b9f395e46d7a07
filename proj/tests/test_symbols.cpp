#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "projlab/errors.hpp"
#include "projlab/symbols.hpp"

using namespace projlab;

namespace {

double entry(const SymbolMap& s, Valence out, Valence in, std::initializer_list<int> row, std::initializer_list<int> col) {
  const ComponentLayout lo(out, s.n), li(in, s.n);
  const std::vector<int> r(row), c(col);
  return s.matrix(lo.comp_of(r), li.comp_of(c));
}

} // namespace

TEST_CASE("sigma_S entries by hand") {
  // n = 2, theta = e_0, g = I: (sigma phi)_000 = phi_00 - 2 phi_00 / 3
  const SymbolMap s = sigma_S(2, Eigen::Vector2d(1, 0), Eigen::Matrix2d::Identity());
  CHECK(s.matrix.rows() == 6);
  CHECK(s.matrix.cols() == 3);
  CHECK(entry(s, Valence::cov1_sym2(), Valence::sym2(), {0, 0, 0}, {0, 0}) == doctest::Approx(1.0 / 3));
  CHECK(entry(s, Valence::cov1_sym2(), Valence::sym2(), {0, 1, 1}, {1, 1}) == doctest::Approx(1.0));
  // (sigma phi)_101 = -(g_11 theta^0 phi_00) / 3
  CHECK(entry(s, Valence::cov1_sym2(), Valence::sym2(), {1, 0, 1}, {0, 0}) == doctest::Approx(-1.0 / 3));
  CHECK(entry(s, Valence::cov1_sym2(), Valence::sym2(), {1, 1, 1}, {1, 1}) == doctest::Approx(0.0));
}

TEST_CASE("sigma_E entries and the E*E symbol by hand") {
  // omega = e_0, t = e_0: components 000 -> 3*2 - 4 = 2, 011 -> -2, 101 -> -1
  // t = e_1: 001 -> 3; Gram weights count the symmetric pair twice
  const SymbolMap e = sigma_E(2, Eigen::Vector2d(1, 0), Eigen::Matrix2d::Identity());
  CHECK(entry(e, Valence::cov1_sym2(), Valence::one_form(), {0, 0, 0}, {0}) == doctest::Approx(2.0));
  CHECK(entry(e, Valence::cov1_sym2(), Valence::one_form(), {0, 1, 1}, {0}) == doctest::Approx(-2.0));
  CHECK(entry(e, Valence::cov1_sym2(), Valence::one_form(), {1, 0, 1}, {0}) == doctest::Approx(-1.0));
  CHECK(entry(e, Valence::cov1_sym2(), Valence::one_form(), {0, 0, 1}, {1}) == doctest::Approx(3.0));

  const SymbolCheck c = sigma_EstarE_check(2, Eigen::Vector2d(1, 0), Eigen::Matrix2d::Identity());
  CHECK(c.lhs(0, 0) == doctest::Approx(10.0));
  CHECK(c.lhs(1, 1) == doctest::Approx(18.0));
  CHECK(c.lhs(0, 1) == doctest::Approx(0.0));
  CHECK(c.rhs(0, 0) == doctest::Approx(36.0));
  CHECK(c.deviation == doctest::Approx(26.0 / 36.0));
  CHECK(c.discrepancy);
}

TEST_CASE("zero covector gives the zero symbol") {
  const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(3, 3);
  const SymbolMap s = sigma_S(3, Eigen::VectorXd::Zero(3), g);
  CHECK(s.matrix.cwiseAbs().maxCoeff() == 0.0);
  CHECK(symbol_singular_values(sigma_E(3, Eigen::VectorXd::Zero(3), g), g).maxCoeff() == 0.0);
}

TEST_CASE("metric validation") {
  Eigen::Matrix2d bad;
  bad << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(sigma_S(2, Eigen::Vector2d(1, 0), bad), Error);
  Eigen::Matrix2d indef;
  indef << 1, 0, 0, -1;
  try {
    sigma_E(2, Eigen::Vector2d(1, 0), indef);
    FAIL("indefinite metric accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_metric);
  }
  CHECK_THROWS_AS(sigma_S(1, Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1)), Error);
  CHECK_THROWS_AS(sigma_S(3, Eigen::Vector2d(1, 0), Eigen::Matrix2d::Identity()), Error);
  CHECK_THROWS_AS(injectivity_certificate(SymbolTag::S, 1, 10, 1), Error);
  CHECK_THROWS_AS(injectivity_certificate(SymbolTag::EstarE, 3, 10, 1), Error);
}

TEST_CASE("homogeneity") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int n = 2; n <= 5; ++n) {
    const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd w(n);
    for (int a = 0; a < n; ++a) w[a] = nd(rng);
    for (double lam : {0.5, 3.0, -2.0}) {
      CHECK((sigma_E(n, lam * w, g).matrix - lam * lam * sigma_E(n, w, g).matrix).norm() <=
            1e-14 * sigma_E(n, lam * w, g).matrix.norm());
      CHECK((sigma_S(n, lam * w, g).matrix - lam * sigma_S(n, w, g).matrix).norm() <=
            1e-14 * std::abs(lam) * sigma_S(n, w, g).matrix.norm());
    }
  }
}

TEST_CASE("injectivity certificates") {
  // frozen from a dense SVD run; the S values follow sqrt((n-1)/(n+1))
  const double e_min[] = {0.745355992500, 0.935414346693, 0.962250448649, 0.904534033733,
                          0.868243142124, 0.843274042712, 0.825028647325};
  for (int n = 2; n <= 8; ++n) {
    const auto s = injectivity_certificate(SymbolTag::S, n, 100, 7 + n);
    const auto e = injectivity_certificate(SymbolTag::E, n, 100, 7 + n);
    CHECK_FALSE(s.flagged);
    CHECK_FALSE(e.flagged);
    CHECK(s.trials == 100);
    CHECK(s.min_singular_value == doctest::Approx(std::sqrt((n - 1.0) / (n + 1.0))).epsilon(1e-10));
    CHECK(e.min_singular_value == doctest::Approx(e_min[n - 2]).epsilon(1e-10));
  }
}

TEST_CASE("rotation invariance with the identity metric") {
  const int n = 3;
  const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
  const Eigen::Vector3d w(0.3, -1.2, 0.7);
  const Eigen::Matrix3d Q = Eigen::AngleAxisd(0.8, Eigen::Vector3d(1, 2, 2).normalized()).toRotationMatrix();
  for (auto f : {sigma_S, sigma_E}) {
    const Eigen::VectorXd a = symbol_singular_values(f(n, w, g), g);
    const Eigen::VectorXd b = symbol_singular_values(f(n, Q * w, g), g);
    CHECK((a - b).norm() <= 1e-13 * a.norm());
  }
}

TEST_CASE("a non-identity metric is honoured") {
  // scaling g by c scales |theta|_g; sigma_E is then a pure rescaling
  const Eigen::Vector2d w(0.4, 1.1);
  const Eigen::Matrix2d g = Eigen::Matrix2d::Identity() * 4.0;
  const Eigen::VectorXd s1 = symbol_singular_values(sigma_S(2, w, Eigen::Matrix2d::Identity()), Eigen::Matrix2d::Identity());
  const Eigen::VectorXd s4 = symbol_singular_values(sigma_S(2, w, g), g);
  CHECK(s4.minCoeff() / s4.maxCoeff() == doctest::Approx(s1.minCoeff() / s1.maxCoeff()).epsilon(1e-12));
}
