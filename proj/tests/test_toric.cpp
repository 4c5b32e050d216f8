#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "conevol/toric.hpp"

using namespace conevol;
using namespace conevol::toric;
using ratgeom::make_cone;
using ratgeom::qvec;
using ratgeom::qvec_r;

namespace {

ToricConeVariety orthant(int n) {
  std::vector<QVec> rays;
  for (int i = 0; i < n; ++i) {
    QVec e(static_cast<std::size_t>(n), Rational(0));
    e[static_cast<std::size_t>(i)] = 1;
    rays.push_back(e);
  }
  return make_toric(make_cone(n, rays));
}

ToricConeVariety conifold() {
  return make_toric(
      make_cone(3, {qvec({0, 0, 1}), qvec({1, 0, 1}), qvec({0, 1, 1}), qvec({1, 1, 1})}));
}

ToricConeVariety half_quotient() {  // A_1 surface singularity C^2/Z_2
  return make_toric(make_cone(2, {qvec({1, 0}), qvec({1, 2})}));
}

std::vector<double> dvec(std::initializer_list<double> v) { return {v}; }

}  // namespace

TEST_CASE("gorenstein covectors of the worked cones") {
  auto u3 = gorenstein_covector(make_cone(3, {qvec({1, 0, 0}), qvec({0, 1, 0}), qvec({0, 0, 1})}));
  REQUIRE(u3);
  CHECK(*u3 == qvec({1, 1, 1}));
  auto uc = gorenstein_covector(conifold().sigma);
  REQUIRE(uc);
  CHECK(*uc == qvec({0, 0, 1}));
  auto uq = gorenstein_covector(half_quotient().sigma);
  REQUIRE(uq);
  CHECK(*uq == qvec({1, 0}));
  // Four extremal rays not on one affine hyperplane: no covector.
  auto bad = gorenstein_covector(make_cone(
      3, {qvec({1, 0, 1}), qvec({0, 1, 1}), qvec({-1, 0, 1}), qvec({0, -1, 2})}));
  CHECK(!bad);
}

TEST_CASE("make_toric validates the cone") {
  CHECK_THROWS_AS(make_toric(make_cone(3, {qvec({1, 0, 0}), qvec({0, 1, 0})})),
                  NotFullDimensional);
  CHECK_THROWS_AS(make_toric(make_cone(2, {qvec({1, 0}), qvec({-1, 0}), qvec({0, 1})})),
                  DegenerateGenerators);
}

TEST_CASE("log discrepancy is the Gorenstein pairing") {
  CHECK(log_discrepancy(orthant(3), qvec({1, 1, 1})) == Rational(3));
  CHECK(log_discrepancy(conifold(), qvec_r({Rational(3, 2), Rational(3, 2), Rational(3)})) ==
        Rational(3));
  CHECK(log_discrepancy(orthant(2), qvec({2, 4})) == Rational(6));
  auto no_u = make_toric(make_cone(
      3, {qvec({1, 0, 1}), qvec({0, 1, 1}), qvec({-1, 0, 1}), qvec({0, -1, 2})}));
  CHECK_THROWS_AS(log_discrepancy(no_u, qvec({0, 0, 1})), NotQGorenstein);
}

TEST_CASE("a0 worked values") {
  CHECK(a0(orthant(3), qvec({1, 1, 1})) == Rational(1));
  CHECK(a0(conifold(), qvec_r({Rational(3, 2), Rational(3, 2), Rational(3)})) ==
        Rational(16, 27));
  CHECK(a0(conifold(), qvec({1, 1, 3})) == Rational(3, 4));
  CHECK(a0(half_quotient(), qvec({1, 1})) == Rational(2));
  CHECK(a0(orthant(2), qvec({1, 2})) == Rational(1, 2));
  CHECK_THROWS_AS(a0(conifold(), qvec({1, 0, 1})), ReebConeViolation);
}

TEST_CASE("a1 worked values and the regular-case identity") {
  CHECK(a1(orthant(2), qvec({1, 1})) == Rational(-2));
  CHECK(a1(orthant(3), qvec({1, 1, 1})) == Rational(-3));
  CHECK(a1(orthant(2), qvec({1, 2})) == Rational(-3, 2));
  CHECK(a1(conifold(), qvec({1, 1, 2})) == Rational(-4));
}

TEST_CASE("a1 equals -A*a0 on Q-Gorenstein cones") {
  std::vector<ToricConeVariety> xs;
  xs.push_back(orthant(2));
  xs.push_back(orthant(3));
  xs.push_back(conifold());
  xs.push_back(half_quotient());
  std::vector<std::vector<QVec>> points = {
      {qvec({1, 1}), qvec({3, 5}), qvec_r({Rational(1, 2), Rational(7, 3)})},
      {qvec({1, 1, 1}), qvec({2, 3, 4})},
      {qvec({1, 1, 3}), qvec_r({Rational(3, 2), Rational(3, 2), Rational(3)}),
       qvec_r({Rational(4, 3), Rational(7, 5), Rational(3)})},
      {qvec({1, 1}), qvec({2, 3}), qvec_r({Rational(5, 2), Rational(1, 3)})},
  };
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (const auto& xi : points[i])
      CHECK(a1(xs[i], xi) == -log_discrepancy(xs[i], xi) * a0(xs[i], xi));
}

TEST_CASE("exact homogeneity of a0 and a1") {
  auto X = conifold();
  QVec xi = qvec_r({Rational(4, 3), Rational(7, 5), Rational(3)});
  for (Rational c : {Rational(2), Rational(1, 3), Rational(7, 2)}) {
    QVec cxi = ratgeom::scale(xi, c);
    CHECK(a0(X, cxi) * c * c * c == a0(X, xi));
    CHECK(a1(X, cxi) * c * c == a1(X, xi));
    CHECK(normalized_volume(X, cxi) == normalized_volume(X, xi));
  }
}

TEST_CASE("normalized volume anchors") {
  CHECK(normalized_volume(orthant(3), qvec({1, 1, 1})) == Rational(27));
  CHECK(normalized_volume(conifold(), qvec_r({Rational(3, 2), Rational(3, 2), Rational(3)})) ==
        Rational(16));
  CHECK(normalized_volume(conifold(), qvec({1, 1, 3})) == Rational(81, 4));
  CHECK(normalized_volume(half_quotient(), qvec({1, 1})) == Rational(2));
}

TEST_CASE("float path matches the exact path") {
  auto X = conifold();
  QVec xi = qvec_r({Rational(4, 3), Rational(7, 5), Rational(3)});
  std::vector<double> xid = {4.0 / 3.0, 7.0 / 5.0, 3.0};
  CHECK(a0(X, xid) == doctest::Approx(to_double(a0(X, xi))).epsilon(1e-12));
  CHECK(a1(X, xid) == doctest::Approx(to_double(a1(X, xi))).epsilon(1e-12));
  CHECK(normalized_volume(X, xid) ==
        doctest::Approx(to_double(normalized_volume(X, xi))).epsilon(1e-12));
  auto ge = grad_a0(X, xi);
  auto gd = grad_a0(X, xid);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(gd[k] == doctest::Approx(to_double(ge[k])).epsilon(1e-12));
}

TEST_CASE("triangulation independence of a0 and a1") {
  for (const auto& X : {conifold(), half_quotient()}) {
    auto other = make_pieces(ratgeom::triangulate_halfopen(X.dual, true));
    for (const auto& xi :
         {qvec_r({Rational(1), Rational(1), Rational(3)}),
          qvec_r({Rational(3, 2), Rational(5, 4), Rational(3)})}) {
      QVec x(xi.begin(), xi.begin() + X.n);
      CHECK(pieces_a0(X.pieces, x) == pieces_a0(other, x));
      CHECK(pieces_a1(X.pieces, x) == pieces_a1(other, x));
    }
  }
}

TEST_CASE("gradients match finite differences") {
  auto X = conifold();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.8, 1.6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xi = {u(rng), u(rng), 2.0 + u(rng)};
    auto g0 = grad_a0(X, xi);
    auto g1 = grad_a1(X, xi);
    double h = 1e-6;
    for (std::size_t k = 0; k < 3; ++k) {
      auto xp = xi, xm = xi;
      xp[k] += h;
      xm[k] -= h;
      double fd0 = (a0(X, xp) - a0(X, xm)) / (2 * h);
      double fd1 = (a1(X, xp) - a1(X, xm)) / (2 * h);
      CHECK(g0[k] == doctest::Approx(fd0).epsilon(1e-6));
      CHECK(g1[k] == doctest::Approx(fd1).epsilon(1e-6));
    }
  }
}

TEST_CASE("exact gradient at the simplest cone") {
  auto X = orthant(2);
  auto g = grad_a0(X, qvec({1, 1}));
  CHECK(g[0] == Rational(-1));
  CHECK(g[1] == Rational(-1));
}

TEST_CASE("hessian matches finite differences of the gradient and is positive definite") {
  auto X = conifold();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.9, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> xi = {u(rng), u(rng), 2.0 + u(rng)};
    Eigen::MatrixXd H = hess_a0(X, xi);
    double h = 1e-5;
    for (int k = 0; k < 3; ++k) {
      auto xp = xi, xm = xi;
      xp[static_cast<std::size_t>(k)] += h;
      xm[static_cast<std::size_t>(k)] -= h;
      auto gp = grad_a0(X, xp);
      auto gm = grad_a0(X, xm);
      for (int l = 0; l < 3; ++l) {
        double fd = (gp[static_cast<std::size_t>(l)] - gm[static_cast<std::size_t>(l)]) / (2 * h);
        CHECK(H(k, l) == doctest::Approx(fd).epsilon(1e-5));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    CHECK(es.eigenvalues().minCoeff() > 0);
  }
}

TEST_CASE("truncated index character against closed forms") {
  auto line = make_toric(make_cone(1, {qvec({1})}));
  double f = truncated_index_character(line, {1.0}, 1.0, 40.0);
  CHECK(f == doctest::Approx(1.0 / (1.0 - std::exp(-1.0))).epsilon(1e-12));

  auto X = orthant(2);
  for (double t : {0.1, 0.2}) {
    double full = 1.0 / ((1.0 - std::exp(-t)) * (1.0 - std::exp(-t)));
    double trunc = truncated_index_character(X, {1.0, 1.0}, t, 400.0);
    CHECK(trunc == doctest::Approx(full).epsilon(1e-8));
  }
  CHECK_THROWS_AS(truncated_index_character(X, {1.0, -1.0}, 0.1, 10.0), ReebConeViolation);
}

TEST_CASE("truncated local volume worked values and convergence") {
  auto X = orthant(2);
  CHECK(local_volume_truncated(X, {1.0, 1.0}, 10.0) == doctest::Approx(1.10).epsilon(1e-12));
  CHECK(local_volume_truncated(X, {1.0, 1.0}, 2000.0) == doctest::Approx(1.0).epsilon(2e-3));
  auto C = conifold();
  double v60 = local_volume_truncated(C, {1.5, 1.5, 3.0}, 60.0);
  CHECK(std::abs(v60 / (16.0 / 27.0) - 1.0) < 0.10);
  double v200 = local_volume_truncated(C, {1.5, 1.5, 3.0}, 200.0);
  CHECK(std::abs(v200 / (16.0 / 27.0) - 1.0) < 0.05);
}

TEST_CASE("reeb cone membership") {
  auto C = conifold();
  CHECK(reeb_contains(C, qvec({1, 1, 3})));
  CHECK(!reeb_contains(C, qvec({1, 0, 1})));
  CHECK(!reeb_contains(C, qvec({0, 0, -1})));
  CHECK(reeb_contains(C, dvec({1.5, 1.5, 3.0})));
}

TEST_CASE("monomial valuations") {
  auto X = orthant(2);
  CHECK(monomial_valuation(X, qvec({1, 2}), {qvec({1, 0}), qvec({0, 1})}) == Rational(1));
  CHECK(monomial_valuation(X, qvec({1, 1}), {qvec({2, 3})}) == Rational(5));
  CHECK(monomial_valuation(X, qvec({1, 5}), {qvec({1, 1}), qvec({3, 0})}) == Rational(3));
  CHECK_THROWS_AS(monomial_valuation(X, qvec({1, 1}), {}), EmptySupport);
  // Multiplicativity under Minkowski products of supports.
  std::vector<QVec> f = {qvec({1, 0}), qvec({0, 2})};
  std::vector<QVec> g = {qvec({1, 1}), qvec({4, 0})};
  std::vector<QVec> prod;
  for (const auto& x : f)
    for (const auto& y : g) prod.push_back(ratgeom::add(x, y));
  QVec xi = qvec({3, 2});
  CHECK(monomial_valuation(X, xi, prod) ==
        monomial_valuation(X, xi, f) + monomial_valuation(X, xi, g));
}
