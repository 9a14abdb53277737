#include "doctest.h"

#include <cmath>
#include <numbers>

#include "splitlab/asymptotics.hpp"
#include "splitlab/errors.hpp"

using namespace splitlab;

namespace {

// Composite Simpson rule for the ball volume: the ball of radius R is a union of
// hyperbolic disks of radius sqrt(R^2 - u^2) over fiber offsets u in [-R, R];
// substituting u = R sin(theta) removes the square-root endpoint singularity.
double ball_volume_simpson(double R, double kappa, int n = 20000) {
  const double k = std::sqrt(kappa);
  auto f = [&](double th) {
    const double rho = R * std::cos(th);
    return 2.0 * std::numbers::pi / kappa * (std::cosh(k * rho) - 1.0) * R * std::cos(th);
  };
  const double a = -std::numbers::pi / 2, b = std::numbers::pi / 2, h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("product distance") {
  const ProductPoint p{HPoint{0, 1}, 0.0}, q{HPoint{0, 2}, 0.3};
  CHECK(product_distance(2.0, p, q) == doctest::Approx(std::sqrt(std::log(2.0) * std::log(2.0) + 0.36)).epsilon(1e-14));
  CHECK(product_distance(2.0, p, q) == doctest::Approx(0.9167622).epsilon(1e-7));
  CHECK(product_distance(1.0, p, p) == 0.0);
}

TEST_CASE("Busemann estimates decrease to the limit") {
  const double L = 1.5;
  const ProductPoint x{HPoint{0.4, 1.7}, 0.6};
  double prev = busemann_estimate(L, x, 10.0);
  for (double s : {20.0, 50.0, 1e3, 1e5, 1e8}) {
    const double b = busemann_estimate(L, x, s);
    CHECK(b <= prev + 1e-15);
    prev = b;
  }
  CHECK(busemann_limit(L, x) == doctest::Approx(-L * x.t).epsilon(1e-11));
  CHECK(std::abs(busemann_estimate(L, x, busemann_converged_s(L, x)) - busemann_limit(L, x)) <= 1e-12);
  // the rearranged form agrees with the naive difference where the latter is accurate
  const ProductPoint ray{HPoint{0, 1}, 40.0 / L};
  CHECK(busemann_estimate(L, x, 40.0) ==
        doctest::Approx(product_distance(L, x, ray) - 40.0).epsilon(1e-12));
}

TEST_CASE("Busemann gradient and Hessian") {
  for (const ProductPoint x : {ProductPoint{HPoint{0, 1}, 0.0}, ProductPoint{HPoint{0.3, 2.0}, 0.4},
                               ProductPoint{HPoint{-1.0, 0.6}, -0.7}}) {
    const Vec3 g = busemann_gradient(1.0, x);
    CHECK(std::abs(g[0]) < 1e-6);
    CHECK(std::abs(g[1]) < 1e-6);
    CHECK(g[2] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(busemann_hessian_horizontal(1.0, x).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(busemann_hessian_vertical(1.0, x)) < 1e-6);
  }
}

TEST_CASE("ball volume against an independent quadrature") {
  for (double R : {0.5, 2.0, 10.0}) {
    CHECK(ball_volume(1.0, R) == doctest::Approx(ball_volume_simpson(R, 1.0)).epsilon(1e-10));
    CHECK(ball_volume(3.0, R) == ball_volume(1.0, R));
  }
  CHECK(ball_volume(1.0, 3.0, 4.0) == doctest::Approx(ball_volume_simpson(3.0, 4.0)).epsilon(1e-10));
  // small balls are Euclidean to leading order
  CHECK(ball_volume(1.0, 1e-3) == doctest::Approx(4.0 / 3.0 * std::numbers::pi * 1e-9).epsilon(1e-5));
}

TEST_CASE("volume entropy") {
  const auto e = volume_entropy(1.0, 30.0);
  CHECK(e.fitted == doctest::Approx(1.0).epsilon(0.01));
  CHECK(e.ratio > e.fitted);
  const auto e4 = volume_entropy(1.0, 15.0, 4.0);
  CHECK(e4.fitted == doctest::Approx(2.0).epsilon(0.005));
  CHECK_THROWS_AS(volume_entropy(1.0, 5.0), DomainError);
}
