#include "doctest.h"

#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "splitlab/errors.hpp"
#include "splitlab/jacobi.hpp"

using namespace splitlab;

namespace {

Trajectory framed(const MetricSpec& spec, const ChartPoint& q0, const Vec3& v, double T, double step = 1e-3) {
  IntegratorOptions o;
  o.step = step;
  return integrate_geodesic(spec, q0, normalize_velocity(spec, q0, v), T, o, true);
}

MetricSpec warped(double eps) {
  WarpProfile w;
  w.eps = eps;
  return MetricSpec::warped(w);
}

// Mixed sectional curvature at the bump centre, K = 2 eps / (1 + eps / 2); the
// central vertical geodesic sees R_perp = K I, so t* = pi / sqrt(K).
double centre_conjugate(double eps) { return std::numbers::pi / std::sqrt(2.0 * eps / (1.0 + eps / 2.0)); }

}  // namespace

TEST_CASE("product horizontal run matches diag(sinh t, t)") {
  const auto run = propagate_jacobi(framed(MetricSpec::product(1.0), ChartPoint(0, 1, 0), Vec3(1, 0, 0), 10.0));
  for (std::size_t i = 1; i < run.traj->size(); ++i) {
    const double t = run.traj->times[i];
    CHECK(std::abs(run.A[i](0, 0) / std::sinh(t) - 1.0) < 1e-6);
    CHECK(std::abs(run.A[i](1, 1) / t - 1.0) < 1e-6);
    CHECK(std::abs(run.B[i](0, 0) / std::cosh(t) - 1.0) < 1e-6);
    CHECK(std::abs(run.B[i](1, 1) - 1.0) < 1e-9);
  }
  CHECK(run.conjugates.empty());
  CHECK(run.det_min >= 1.0 - 1e-6);
}

TEST_CASE("wronskian is conserved") {
  const auto run = propagate_jacobi(framed(warped(0.1), ChartPoint(0.05, 1.0, 0), Vec3(0.1, 0.05, 1), 8.0));
  for (std::size_t i = 0; i < run.traj->size(); i += 500) CHECK(wronskian(run, i).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("warped centre conjugate point") {
  const auto spec = warped(0.1);
  const ChartPoint q0(0, 1, 0);
  const auto t_star = first_conjugate_point(spec, q0, normalize_velocity(spec, q0, Vec3(0, 0, 1)), 15.0);
  REQUIRE(t_star.has_value());
  CHECK(*t_star == doctest::Approx(centre_conjugate(0.1)).epsilon(1e-6));
  CHECK(*t_star == doctest::Approx(7.198).epsilon(0.005));
}

TEST_CASE("Sturm comparison: more positive curvature, earlier conjugate point") {
  const ChartPoint q0(0, 1, 0);
  double prev = 0.0;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto spec = warped(eps);
    const auto t = first_conjugate_point(spec, q0, normalize_velocity(spec, q0, Vec3(0, 0, 1)), 15.0);
    REQUIRE(t.has_value());
    CHECK(*t > prev);
    CHECK(*t == doctest::Approx(centre_conjugate(eps)).epsilon(1e-5));
    prev = *t;
  }
}

TEST_CASE("no conjugate points within range returns nothing") {
  const auto spec = warped(0.1);
  const ChartPoint q0(0, 1, 0);
  CHECK_FALSE(first_conjugate_point(spec, q0, normalize_velocity(spec, q0, Vec3(0, 0, 1)), 5.0).has_value());
}

TEST_CASE("sine fit recovers the radial frequency") {
  const auto run = propagate_jacobi(framed(warped(0.1), ChartPoint(0, 1, 0), Vec3(0, 0, 1), 15.0));
  std::vector<double> t, a;
  for (std::size_t i = 0; i < run.traj->size(); ++i) {
    t.push_back(run.traj->times[i]);
    a.push_back(run.A[i](0, 0));
  }
  const double omega = std::sqrt(2.0 * 0.1 / 1.05);
  CHECK(fit_sine_frequency(t, a, 0.2, 0.8) == doctest::Approx(omega).epsilon(1e-5));
}

TEST_CASE("stable Riccati solution on the product") {
  const double T = 20.0;
  const auto tr = framed(MetricSpec::product(1.0), ChartPoint(0, 1, 0), Vec3(0, 1, 0), T);
  const auto run = riccati_stable(tr, T);
  // exact solution from U(T) = 0: u = tanh(t - T) on the H^2 block, 0 on the fiber
  for (std::size_t i = 0; i < run.times.size(); i += 250) {
    CHECK(std::abs(run.U[i](0, 0) - std::tanh(run.times[i] - T)) < 1e-8);
    CHECK(run.U[i](1, 1) == 0.0);
  }
  CHECK(std::abs(run.U.front()(0, 0) + 1.0) < 1e-4);
}

TEST_CASE("Riccati and Jacobi are consistent") {
  const double T = 10.0;
  const auto tr = framed(warped(0.1), ChartPoint(0.1, 1.2, 0), Vec3(0.8, 0.3, 0.5), T);
  const auto ric = riccati_stable(tr, T);
  const auto aj = anchored_jacobi(tr, T);
  REQUIRE(aj.times.size() == ric.times.size());
  for (std::size_t i = 0; i < ric.times.size(); i += 200) {
    const Mat2 U = aj.dA[i] * aj.A[i].inverse();
    CHECK((U - ric.U[i]).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("focal blow-up is reported") {
  const auto tr = framed(warped(0.2), ChartPoint(0, 1, 0), Vec3(0, 0, 1), 12.0);
  CHECK_THROWS_AS(riccati_stable(tr, 12.0), FocalBlowUp);
}

TEST_CASE("stable tensor converges in the anchor") {
  const auto st = stable_tensor(MetricSpec::product(1.0), ChartPoint(0, 1, 0), Vec3(0, 1, 0), 20.0);
  CHECK(st.converged);
  CHECK(st.change <= 1e-6);
  CHECK(st.U_T(0, 0) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("Riccati flow average") {
  const auto prod = riccati_average(MetricSpec::product(1.0), SamplingBox{}, 100, 0);
  CHECK(prod.accepted == 100);
  CHECK(std::abs(prod.mean) <= 1e-8);

  // twisted with h = log y: vertical curves remain geodesics, R_V vanishes
  const auto tw = riccati_average(MetricSpec::twisted(0.3, "log_y"), SamplingBox{}, 100, 0);
  CHECK(tw.accepted == 100);
  CHECK(std::abs(tw.mean) < 1e-6);

  // inside the warped bump vertical curves are not geodesics
  SamplingBox inside{-0.05, 0.05, 0.95, 1.05, 0.0, 1.0};
  CHECK_THROWS_AS(riccati_average(warped(0.1), inside, 100, 0), DomainError);
}

TEST_CASE("Rauch comparison on the product") {
  const auto run = propagate_jacobi(framed(MetricSpec::product(1.0), ChartPoint(0, 1, 0), Vec3(1, 0, 0), 10.0));
  const auto h = rauch_check(run, -1.0, Vec2(1, 0), Vec2(0, 0));
  const auto v = rauch_check(run, -1.0, Vec2(0, 0), Vec2(0, 1));
  CHECK(h.max_equality_gap < 1e-6);
  CHECK(v.max_equality_gap < 1e-6);
  const auto mixed = rauch_check(run, -1.0, Vec2(0.6, 0.2), Vec2(0.3, 0.8));
  CHECK(mixed.max_violation <= 1e-9);
  CHECK(mixed.samples == run.traj->size());

  const auto wrun = propagate_jacobi(framed(warped(0.1), ChartPoint(0, 1, 0), Vec3(0, 0, 1), 2.0));
  CHECK_THROWS_AS(rauch_check(wrun, -1.0, Vec2(1, 0), Vec2(0, 0)), UnsupportedError);
}

TEST_CASE("seeded scans are reproducible and conjugate-free on the product") {
  const auto a = scan_conjugate(MetricSpec::product(1.0), SamplingBox{}, 12, 20.0, 1e-3, 9);
  const auto b = scan_conjugate(MetricSpec::product(1.0), SamplingBox{}, 12, 20.0, 1e-3, 9);
  REQUIRE(a.size() == 12);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].index == i);
    CHECK(a[i].v0 == b[i].v0);
    CHECK(a[i].det_min == b[i].det_min);
    CHECK_FALSE(a[i].t_star.has_value());
  }
}

TEST_CASE("random unit vectors are unit") {
  const auto spec = MetricSpec::twisted(0.5, "x");
  const ChartPoint q(0.3, 0.8, 0.1);
  const Mat3 g = metric_at(spec, q);
  for (std::uint64_t k = 0; k < 50; ++k) {
    SplitMix64 rng(1, k);
    const Vec3 v = random_unit_vector(spec, q, rng);
    CHECK(metric_dot(g, v, v) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sampling box validation") {
  SamplingBox b;
  b.y0 = -0.1;
  CHECK_THROWS_AS(b.validate(), DomainError);
  b.y0 = 0.5;
  b.x1 = -2.0;
  CHECK_THROWS_AS(b.validate(), DomainError);
}
