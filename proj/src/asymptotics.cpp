#include "splitlab/asymptotics.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "splitlab/errors.hpp"

namespace splitlab {

namespace {

constexpr double kHessStep = 1e-4;

double positive_L(double L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("fiber length L must be > 0");
  return L;
}

ProductPoint moved(const ProductPoint& p, int axis, double h) {
  ProductPoint q = p;
  if (axis == kX) q.z.x += h;
  else if (axis == kY) q.z.y += h;
  else q.t += h;
  return q;
}

double step_for(const ProductPoint& p, int axis) { return axis == kT ? kHessStep : kHessStep * p.z.y; }

// Ray parameter shared by every stencil point: the remainder d^2 / (2 s) then
// contributes O(1/s) to the derivatives.
double stencil_s(double L, const ProductPoint& p) { return std::max(busemann_converged_s(L, p), 1e12); }

// central first and second differences with one Richardson level
double d1(double L, const ProductPoint& p, int a) {
  const double s = stencil_s(L, p);
  auto b = [&](const ProductPoint& q) { return busemann_estimate(L, q, s); };
  auto c = [&](double h) { return (b(moved(p, a, h)) - b(moved(p, a, -h))) / (2 * h); };
  const double h = step_for(p, a);
  return (4.0 * c(0.5 * h) - c(h)) / 3.0;
}

double d2(double L, const ProductPoint& p, int a, int b) {
  const double s = stencil_s(L, p);
  auto bs = [&](const ProductPoint& q) { return busemann_estimate(L, q, s); };
  auto c = [&](double h) {
    if (a == b) return (bs(moved(p, a, h)) - 2.0 * bs(p) + bs(moved(p, a, -h))) / (h * h);
    const double hb = h * step_for(p, b) / step_for(p, a);
    auto f = [&](double sa, double sb) { return bs(moved(moved(p, a, sa * h), b, sb * hb)); };
    return (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4.0 * h * hb);
  };
  const double h = step_for(p, a);
  return (4.0 * c(0.5 * h) - c(h)) / 3.0;
}

}  // namespace

double product_distance(double L, const ProductPoint& p, const ProductPoint& q) {
  positive_L(L);
  const double dh = hyp_distance(p.z, q.z);
  return std::hypot(dh, L * (p.t - q.t));
}

double busemann_estimate(double L, const ProductPoint& x, double s) {
  positive_L(L);
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("ray parameter s must be > 0");
  const double dh = hyp_distance(x.z, HPoint(0.0, 1.0));
  const double gap = s - L * x.t;  // signed fiber offset of the ray point
  if (gap <= 0.0) return std::hypot(dh, gap) - s;
  // sqrt(d^2 + gap^2) - s = d^2 / (sqrt(d^2 + gap^2) + gap) - L t
  return dh * dh / (std::hypot(dh, gap) + gap) - L * x.t;
}

double busemann_converged_s(double L, const ProductPoint& x, double tol) {
  positive_L(L);
  if (!(tol > 0.0)) throw DomainError("tolerance must be > 0");
  // remainder d^2 / (sqrt(d^2 + gap^2) + gap) <= d^2 / (2 gap)
  const double dh = hyp_distance(x.z, HPoint(0.0, 1.0));
  return std::max(30.0 + std::abs(x.t) * L, L * x.t + dh * dh / (2.0 * tol) + 1.0);
}

double busemann_limit(double L, const ProductPoint& x) {
  return busemann_estimate(L, x, busemann_converged_s(L, x));
}

Mat2 busemann_hessian_horizontal(double L, const ProductPoint& x) {
  positive_L(L);
  const ChartPoint p(x.z.x, x.z.y, x.t);
  const Christoffel gam = christoffel_at(MetricSpec::product(L), p);
  const Vec3 grad(d1(L, x, kX), d1(L, x, kY), d1(L, x, kT));
  Mat2 hess;
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b) {
      double v = d2(L, x, a, b);
      for (int k = 0; k < 3; ++k) v -= gam[k](a, b) * grad[k];
      hess(a, b) = hess(b, a) = v * x.z.y * x.z.y;  // orthonormal basis y d_x, y d_y
    }
  if (!hess.allFinite()) throw AccuracyError("non-finite Busemann Hessian");
  return hess;
}

double busemann_hessian_vertical(double L, const ProductPoint& x) {
  positive_L(L);
  // Gamma^k_tt = 0 for the product, so the covariant and coordinate second derivatives agree.
  return d2(L, x, kT, kT) / (L * L);
}

Vec3 busemann_gradient(double L, const ProductPoint& x) {
  positive_L(L);
  const double y2 = x.z.y * x.z.y;
  return {y2 * d1(L, x, kX), y2 * d1(L, x, kY), d1(L, x, kT) / (L * L)};
}

double ball_volume(double L, double R, double kappa) {
  positive_L(L);
  if (!(R >= 0.0) || !std::isfinite(R)) throw DomainError("ball radius must be >= 0");
  if (R == 0.0) return 0.0;
  // u = R sin(theta) removes the square-root endpoint behaviour of the slices.
  auto f = [&](double theta) {
    const double c = std::cos(theta);
    return disk_area(R * c, kappa) * R * c;
  };
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  const double half = std::numbers::pi / 2;
  const double v = 2.0 * gauss_kronrod<double, 31>::integrate(f, 0.0, half, 15, 1e-12, &err);
  return v;
}

EntropyEstimate volume_entropy(double L, double R_max, double kappa) {
  positive_L(L);
  if (!(R_max >= 20.0 / std::sqrt(kappa)) || !std::isfinite(R_max)) {
    throw DomainError("volume_entropy needs R_max >= 20 (in units of the curvature radius)");
  }
  EntropyEstimate e{};
  e.ratio = std::log(ball_volume(L, R_max, kappa)) / R_max;
  Eigen::Matrix3d M;
  Eigen::Vector3d rhs;
  const double radii[3] = {0.5 * R_max, 0.75 * R_max, R_max};
  for (int i = 0; i < 3; ++i) {
    M(i, 0) = radii[i];
    M(i, 1) = std::log(radii[i]);
    M(i, 2) = 1.0;
    rhs[i] = std::log(ball_volume(L, radii[i], kappa));
  }
  const Eigen::Vector3d sol = M.partialPivLu().solve(rhs);
  e.fitted = sol[0];
  e.log_power = sol[1];
  return e;
}

}  // namespace splitlab
