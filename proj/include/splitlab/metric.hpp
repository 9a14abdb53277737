#pragma once

// Metrics on the chart H^2 x R with coordinates (x, y, t), y > 0.
//
// Three families are supported:
//   Product   g = (dx^2 + dy^2)/y^2 + L^2 dt^2
//   Warped    g = (dx^2 + dy^2)/y^2 + f(p)^2 dt^2, f a radial bump around a center
//   Twisted   g = (dx^2 + dy^2)/y^2 + (dt + alpha dh)^2, h from a registered set
//
// Curvature convention: R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
// lowered as R_abcd = g(R(d_c, d_d) d_b, d_a), so Sec(X,Y) = R_abcd X^a Y^b X^c Y^d
// for an orthonormal pair.

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "splitlab/hyperbolic.hpp"

namespace splitlab {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

enum Coord : int { kX = 0, kY = 1, kT = 2 };

struct ChartPoint {
  double x = 0.0;
  double y = 1.0;
  double t = 0.0;

  ChartPoint() = default;
  ChartPoint(double x_, double y_, double t_);
  explicit ChartPoint(const Vec3& v) : ChartPoint(v[0], v[1], v[2]) {}

  Vec3 vec() const { return {x, y, t}; }
  HPoint base() const { return {x, y}; }
};

/// Radial warping bump: f(r) = 1 + eps/2 - eps r^2 for r <= r0, f = 1 for r >= r1,
/// with the deviation from 1 faded out by a quintic smoothstep on [r0, r1].
/// r is the hyperbolic distance to `center`.
struct WarpProfile {
  HPoint center{0.0, 1.0};
  double eps = 0.1;
  double r0 = 0.5;
  double r1 = 0.75;

  void validate() const;
};

struct WarpValue {
  double f, df, d2f;
};

WarpValue warp_profile_eval(const WarpProfile& w, double r);

/// Analytic potential h(x, y) for the twisted family.
struct Potential {
  std::string name;
  std::function<double(double, double)> value;
  std::function<Vec2(double, double)> gradient;
  std::function<Mat2(double, double)> hessian;  // coordinate second derivatives
};

/// Adds or replaces a potential in the registry. "log_y" and "x" are built in.
void register_potential(Potential p);
Potential lookup_potential(const std::string& name);
std::vector<std::string> registered_potentials();

enum class MetricKind { Product, Warped, Twisted };

std::string to_string(MetricKind k);
MetricKind metric_kind_from_string(const std::string& s);

class MetricSpec {
 public:
  static MetricSpec product(double L);
  static MetricSpec warped(const WarpProfile& w);
  static MetricSpec twisted(double alpha, const std::string& potential);

  MetricKind kind() const { return kind_; }
  double L() const { return L_; }
  const WarpProfile& warp() const { return warp_; }
  double alpha() const { return alpha_; }
  const Potential& potential() const { return *potential_; }

  /// Warping function and its coordinate gradient at (x, y) (Warped only).
  std::pair<double, Vec2> warp_at(double x, double y) const;

 private:
  MetricSpec() = default;

  MetricKind kind_ = MetricKind::Product;
  double L_ = 1.0;
  WarpProfile warp_{};
  double alpha_ = 0.0;
  std::shared_ptr<const Potential> potential_;
};

/// Gamma^k_ij stored as gamma[k](i, j).
using Christoffel = std::array<Mat3, 3>;

/// Rank-4 tensor with 3^4 components, indexed (a, b, c, d).
struct Tensor4 {
  std::array<double, 81> v{};
  double& operator()(int a, int b, int c, int d) { return v[((a * 3 + b) * 3 + c) * 3 + d]; }
  double operator()(int a, int b, int c, int d) const { return v[((a * 3 + b) * 3 + c) * 3 + d]; }
};

struct CurvatureSample {
  ChartPoint point;
  Mat3 metric;
  Tensor4 riemann;                               // lowered, symmetrized
  std::map<std::pair<int, int>, double> sectionals;  // coordinate planes (0,1), (0,2), (1,2)
  double symmetry_residual = 0.0;                // before symmetrization
  double bianchi_residual = 0.0;                 // before symmetrization
};

Mat3 metric_at(const MetricSpec& spec, const ChartPoint& p);

/// Analytic for Product and Warped; finite differences for Twisted.
Christoffel christoffel_at(const MetricSpec& spec, const ChartPoint& p);

/// Generic central differences of the metric (step 1e-5 relative to y, one Richardson level).
Christoffel christoffel_fd(const MetricSpec& spec, const ChartPoint& p);

CurvatureSample curvature_at(const MetricSpec& spec, const ChartPoint& p);

/// R(X, Y, X, Y) / (|X|^2 |Y|^2 - <X,Y>^2).
double sectional(const CurvatureSample& c, const Vec3& X, const Vec3& Y);

/// Ricci tensor in coordinates, Ric_bd = g^ac R_abcd.
Mat3 ricci(const CurvatureSample& c);

/// <R(X, Y) Z, W> with the lowered tensor.
double riemann_apply(const Tensor4& R, const Vec3& X, const Vec3& Y, const Vec3& Z, const Vec3& W);

/// Unit vertical field d_t / sqrt(g_tt).
Vec3 vertical_field(const MetricSpec& spec, const ChartPoint& p);

/// Orthonormal basis of the g-orthogonal complement of V (Gram-Schmidt on d_x, d_y).
std::array<Vec3, 2> horizontal_basis(const MetricSpec& spec, const ChartPoint& p);

/// Matrix of X -> R(X, V) V on the horizontal plane in `horizontal_basis`.
Mat2 r_v_operator(const MetricSpec& spec, const ChartPoint& p);
Mat2 r_v_operator(const MetricSpec& spec, const CurvatureSample& c);

/// |nabla V|^2 for the unit vertical field.
double nabla_v_norm2(const MetricSpec& spec, const ChartPoint& p);

/// g-orthonormal frame for T_pM whose last vector is the unit tangent v.
/// Built by Gram-Schmidt on d_x, d_y, d_t; the first two survivors become e1, e2.
std::array<Vec3, 3> frame_from_tangent(const Mat3& g, const Vec3& v);

double metric_dot(const Mat3& g, const Vec3& a, const Vec3& b);

}  // namespace splitlab
