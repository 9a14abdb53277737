#include "doctest.h"

#include <cmath>

#include <Eigen/LU>

#include "splitlab/errors.hpp"
#include "splitlab/metric.hpp"
#include "splitlab/parallel.hpp"

using namespace splitlab;

namespace {

ChartPoint random_point(std::uint64_t seed, std::uint64_t k) {
  SplitMix64 rng(seed, k);
  return ChartPoint(2.0 * rng.uniform() - 1.0, 0.5 + 1.5 * rng.uniform(), rng.uniform());
}

// d_k g_ij by central differences of metric_at
Mat3 metric_derivative(const MetricSpec& spec, const ChartPoint& p, int k) {
  const double h = 1e-5;
  Vec3 a = p.vec(), b = p.vec();
  a[k] += h;
  b[k] -= h;
  return (metric_at(spec, ChartPoint(a)) - metric_at(spec, ChartPoint(b))) / (2 * h);
}

std::vector<MetricSpec> all_kinds() {
  WarpProfile w;
  w.eps = 0.2;
  w.center = HPoint{0.1, 0.9};
  return {MetricSpec::product(1.5), MetricSpec::warped(w), MetricSpec::twisted(0.3, "log_y"),
          MetricSpec::twisted(0.5, "x")};
}

}  // namespace

TEST_CASE("warp profile is C2 across the blend radii") {
  WarpProfile w;
  for (double r : {w.r0, w.r1}) {
    const double h = 1e-9;
    const auto lo = warp_profile_eval(w, r - h), hi = warp_profile_eval(w, r + h);
    CHECK(std::abs(lo.f - hi.f) < 1e-8);
    CHECK(std::abs(lo.df - hi.df) < 1e-7);
    CHECK(std::abs(lo.d2f - hi.d2f) < 1e-6);
  }
  for (double r : {0.1, 0.55, 0.7}) {
    const double h = 1e-5;
    const auto c = warp_profile_eval(w, r), p = warp_profile_eval(w, r + h), m = warp_profile_eval(w, r - h);
    CHECK(c.df == doctest::Approx((p.f - m.f) / (2 * h)).epsilon(1e-7));
    CHECK(c.d2f == doctest::Approx((p.df - m.df) / (2 * h)).epsilon(1e-6));
  }
  CHECK(warp_profile_eval(w, 0.0).f == doctest::Approx(1.05));
  CHECK(warp_profile_eval(w, 2.0).f == 1.0);
}

TEST_CASE("warp profile validation") {
  WarpProfile w;
  w.eps = -0.1;
  CHECK_THROWS_AS(w.validate(), DomainError);
  w.eps = 0.1;
  w.r1 = 0.4;
  CHECK_THROWS_AS(w.validate(), DomainError);
  w.r1 = 0.75;
  w.eps = 20.0;  // f dips below zero just inside r1
  CHECK_THROWS_AS(w.validate(), DomainError);
}

TEST_CASE("product metric entries") {
  const auto spec = MetricSpec::product(2.0);
  const Mat3 g = metric_at(spec, ChartPoint(0.3, 0.5, 1.0));
  CHECK(g(0, 0) == doctest::Approx(4.0));
  CHECK(g(1, 1) == doctest::Approx(4.0));
  CHECK(g(2, 2) == doctest::Approx(4.0));
  CHECK(g(0, 1) == 0.0);
  CHECK(g(0, 2) == 0.0);
  CHECK_THROWS_AS(MetricSpec::product(0.0), DomainError);
}

TEST_CASE("christoffel symbols are metric compatible") {
  for (const auto& spec : all_kinds()) {
    for (std::uint64_t k = 0; k < 10; ++k) {
      const ChartPoint p = random_point(1, k);
      const Mat3 g = metric_at(spec, p);
      const Christoffel G = christoffel_at(spec, p);
      for (int c = 0; c < 3; ++c) {
        const Mat3 dg = metric_derivative(spec, p, c);
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            double rhs = 0.0;
            for (int l = 0; l < 3; ++l) rhs += G[l](c, a) * g(l, b) + G[l](c, b) * g(a, l);
            CHECK(std::abs(dg(a, b) - rhs) < 1e-7);
          }
        for (int l = 0; l < 3; ++l) CHECK((G[l] - G[l].transpose()).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("analytic and finite-difference christoffels agree") {
  for (const auto& spec : all_kinds()) {
    const ChartPoint p = random_point(2, 0);
    const auto a = christoffel_at(spec, p), f = christoffel_fd(spec, p);
    for (int k = 0; k < 3; ++k) CHECK((a[k] - f[k]).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("product curvature table") {
  const auto spec = MetricSpec::product(1.0);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const ChartPoint p = random_point(3, k);
    const auto c = curvature_at(spec, p);
    CHECK(c.sectionals.at({0, 1}) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(c.sectionals.at({0, 2}) == 0.0);
    CHECK(c.sectionals.at({1, 2}) == 0.0);
    // R_xyxy = -1/y^4 for the hyperbolic factor
    CHECK(c.riemann(0, 1, 0, 1) == doctest::Approx(-1.0 / std::pow(p.y, 4)).epsilon(1e-6));
    const Mat3 ric = ricci(c);
    CHECK(ric(0, 0) * p.y * p.y == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(ric(1, 1) * p.y * p.y == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(ric(2, 2) == 0.0);
  }
}

TEST_CASE("riemann tensor symmetries") {
  for (const auto& spec : all_kinds()) {
    const auto c = curvature_at(spec, random_point(4, 1));
    CHECK(c.symmetry_residual < 1e-4);
    CHECK(c.bianchi_residual < 1e-4);
    const auto& R = c.riemann;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int d = 0; d < 3; ++d)
          for (int e = 0; e < 3; ++e) {
            CHECK(R(a, b, d, e) == doctest::Approx(-R(b, a, d, e)).epsilon(1e-12));
            CHECK(R(a, b, d, e) == doctest::Approx(R(d, e, a, b)).epsilon(1e-12));
            CHECK(std::abs(R(a, b, d, e) + R(a, d, e, b) + R(a, e, b, d)) < 1e-10);
          }
  }
}

TEST_CASE("warped centre: horizontal-vertical sectional curvature") {
  // For g_H + f^2 dt^2 the mixed sectional curvature is -Hess f(X, X) / f. At the
  // bump centre f = 1 + eps/2 - eps r^2 has Hess f = -2 eps g.
  for (double eps : {0.05, 0.1, 0.2}) {
    WarpProfile w;
    w.eps = eps;
    const auto c = curvature_at(MetricSpec::warped(w), ChartPoint(0.0, 1.0, 0.0));
    const double K = 2.0 * eps / (1.0 + eps / 2.0);
    CHECK(c.sectionals.at({0, 2}) == doctest::Approx(K).epsilon(1e-6));
    CHECK(c.sectionals.at({1, 2}) == doctest::Approx(K).epsilon(1e-6));
    CHECK(c.sectionals.at({0, 1}) == doctest::Approx(-1.0).epsilon(1e-6));
  }
}

TEST_CASE("twisted metric is locally isometric to the product") {
  // t' = t + alpha h turns g_H + (dt + alpha dh)^2 into g_H + dt'^2, so every
  // curvature component involving t vanishes.
  for (double alpha : {1e-3, 0.1, 1.0}) {
    const auto spec = MetricSpec::twisted(alpha, "log_y");
    const ChartPoint p(0.0, 1.0, 0.0);
    const auto c = curvature_at(spec, p);
    CHECK(std::abs(c.riemann(kX, kT, kX, kT)) < 1e-6);
    CHECK(std::abs(c.riemann(kY, kT, kY, kT)) < 1e-6);
    // d_x, d_y span a tilted plane once alpha != 0; the horizontal plane keeps K = -1
    const auto H = horizontal_basis(spec, p);
    CHECK(sectional(c, H[0], H[1]) == doctest::Approx(-1.0).epsilon(1e-5));
    CHECK(std::abs(sectional(c, H[0], vertical_field(spec, p))) < 1e-6);
  }
}

TEST_CASE("twisted family is continuous at alpha = 0") {
  const ChartPoint p(0.2, 1.3, 0.4);
  const Mat3 g0 = metric_at(MetricSpec::product(1.0), p);
  for (double alpha : {1e-2, 1e-4, 1e-6}) {
    const Mat3 g = metric_at(MetricSpec::twisted(alpha, "log_y"), p);
    CHECK((g - g0).cwiseAbs().maxCoeff() < 3.0 * alpha);
  }
  CHECK(metric_at(MetricSpec::twisted(0.0, "x"), p) == g0);
}

TEST_CASE("vertical field diagnostics") {
  const ChartPoint p(0.1, 0.8, 0.0);
  const auto prod = MetricSpec::product(1.0);
  CHECK(r_v_operator(prod, p).cwiseAbs().maxCoeff() == 0.0);
  CHECK(nabla_v_norm2(prod, p) == 0.0);
  const auto tw = MetricSpec::twisted(0.7, "log_y");
  CHECK(r_v_operator(tw, p).cwiseAbs().maxCoeff() < 1e-6);

  WarpProfile w;
  const auto warped = MetricSpec::warped(w);
  CHECK(r_v_operator(warped, ChartPoint(5.0, 1.0, 0.0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(nabla_v_norm2(warped, ChartPoint(0.0, 1.0, 0.0)) == 0.0);
  CHECK(nabla_v_norm2(warped, ChartPoint(0.0, 1.3, 0.0)) > 0.0);

  const Vec3 V = vertical_field(tw, p);
  const auto H = horizontal_basis(tw, p);
  const Mat3 g = metric_at(tw, p);
  CHECK(metric_dot(g, V, V) == doctest::Approx(1.0));
  CHECK(std::abs(metric_dot(g, V, H[0])) < 1e-14);
  CHECK(std::abs(metric_dot(g, H[0], H[1])) < 1e-14);
}

TEST_CASE("frame from tangent is orthonormal") {
  const auto spec = MetricSpec::twisted(0.4, "x");
  const ChartPoint p(0.3, 0.6, 0.0);
  const Mat3 g = metric_at(spec, p);
  for (const Vec3& v : {Vec3(1, 0, 0), Vec3(0, 0, 1), Vec3(0.3, -0.2, 0.5)}) {
    const auto F = frame_from_tangent(g, v);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(metric_dot(g, F[i], F[j]) - (i == j ? 1.0 : 0.0)) < 1e-13);
    CHECK((F[2] * std::sqrt(metric_dot(g, v, v)) - v).norm() < 1e-13);
  }
}

TEST_CASE("potential registry") {
  CHECK_THROWS_AS(MetricSpec::twisted(0.1, "no_such_potential"), DomainError);
  Potential p{"quadratic",
              [](double x, double y) { return x * x + y; },
              [](double x, double) { return Vec2(2 * x, 1.0); },
              [](double, double) { return Mat2((Mat2() << 2, 0, 0, 0).finished()); }};
  register_potential(p);
  const auto spec = MetricSpec::twisted(0.2, "quadratic");
  const ChartPoint q(0.5, 1.0, 0.0);
  const Mat3 g = metric_at(spec, q);
  CHECK(g(0, 2) == doctest::Approx(0.2 * 1.0));
  CHECK(g(1, 2) == doctest::Approx(0.2));
  const auto names = registered_potentials();
  CHECK(std::find(names.begin(), names.end(), "quadratic") != names.end());
}

TEST_CASE("chart point validation") {
  CHECK_THROWS_AS(ChartPoint(0.0, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(ChartPoint(std::nan(""), 1.0, 0.0), DomainError);
}
