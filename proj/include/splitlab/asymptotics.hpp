#pragma once

// Busemann function of the fiber ray and ball-volume growth for the product metric
// (H^2, curvature -kappa) x (R, L^2 dt^2).

#include <vector>

#include "splitlab/hyperbolic.hpp"
#include "splitlab/metric.hpp"

namespace splitlab {

struct ProductPoint {
  HPoint z;
  double t = 0.0;
};

/// sqrt(d_H(z_p, z_q)^2 + L^2 (t_p - t_q)^2).
double product_distance(double L, const ProductPoint& p, const ProductPoint& q);

/// product_distance(x, gamma(s)) - s for the unit-speed fiber ray gamma(s) = (i, s / L).
/// Evaluated in a cancellation-free form so that huge s stays accurate.
double busemann_estimate(double L, const ProductPoint& x, double s);

/// Ray parameter beyond which busemann_estimate is within `tol` of its limit at x.
double busemann_converged_s(double L, const ProductPoint& x, double tol = 1e-12);

/// busemann_estimate at busemann_converged_s.
double busemann_limit(double L, const ProductPoint& x);

/// Covariant Hessian of the converged Busemann function restricted to the
/// horizontal plane, in the orthonormal basis (y d_x, y d_y).
Mat2 busemann_hessian_horizontal(double L, const ProductPoint& x);

/// Hess(b)(V, V) for the unit vertical field V = d_t / L.
double busemann_hessian_vertical(double L, const ProductPoint& x);

/// Coordinate gradient (g^-1 db) of the converged Busemann function.
Vec3 busemann_gradient(double L, const ProductPoint& x);

/// Volume of a metric ball of radius R: integral over fiber offsets u in [-R, R]
/// of the hyperbolic disk area at radius sqrt(R^2 - u^2). L does not enter.
double ball_volume(double L, double R, double kappa = 1.0);

struct EntropyEstimate {
  double ratio;    // log V(R_max) / R_max
  double fitted;   // growth rate h from log V = h R + a log R + c at R_max/2, 3R_max/4, R_max
  double log_power;  // fitted a
};

/// Volume entropy of the product. `fitted` removes the polynomial prefactor of
/// the ball volume and is the value reported as the entropy.
EntropyEstimate volume_entropy(double L, double R_max, double kappa = 1.0);

}  // namespace splitlab
