#pragma once

// Jacobi fields, conjugate points and the Riccati equation along sampled geodesics.
//
// Everything is expressed in the parallel frame (e1, e2) of the normal bundle, where
// the Jacobi equation reads A'' + R_perp(t) A = 0 with
// R_perp(t)_ij = <R(e_i, gamma') gamma', e_j>.

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "splitlab/geodesic.hpp"
#include "splitlab/parallel.hpp"

namespace splitlab {

/// Normal-bundle curvature matrix at every sample of a framed trajectory.
std::vector<Mat2> normal_curvature(const Trajectory& traj);

struct JacobiRun {
  std::shared_ptr<const Trajectory> traj;
  std::vector<Mat2> rperp;
  std::vector<Mat2> A, dA;  // A(0) = 0, A'(0) = I
  std::vector<Mat2> B, dB;  // companion: B(0) = I, B'(0) = 0
  std::vector<double> conjugates;  // strictly increasing
  double det_min = 0.0;  // min over t > 0 samples of det A(t) / t^2
};

/// Integrates both propagators with RK4 on the trajectory's samples. Midpoint
/// curvature comes from cubic interpolation of the cached sample values.
JacobiRun propagate_jacobi(const Trajectory& traj);

/// Conjugate parameters of a run: sign changes of det A refined by bisection,
/// plus tangential zeros found as vanishing local minima of the smallest
/// singular value of A.
std::vector<double> find_conjugates(const JacobiRun& run);

/// Wronskian A'^T A - A^T A' at sample i.
Mat2 wronskian(const JacobiRun& run, std::size_t i);

/// Smallest t* in (0, Tmax] with det A(t*) = 0, if any.
std::optional<double> first_conjugate_point(const MetricSpec& spec, const ChartPoint& q0, const Vec3& v0,
                                            double Tmax, double step = 1e-3);

struct RiccatiRun {
  std::shared_ptr<const Trajectory> traj;
  std::vector<double> times;  // samples 0 .. anchor
  std::vector<Mat2> U;
  double T_anchor = 0.0;
};

/// Backward integration of U' = -U^2 - R_perp from U(T_anchor) = 0 to t = 0.
/// Throws FocalBlowUp when |U| exceeds 1e6.
RiccatiRun riccati_stable(const Trajectory& traj, double T_anchor);

/// Jacobi propagator with A(T_anchor) = I, A'(T_anchor) = 0, integrated backward;
/// A' A^-1 solves the same Riccati problem as riccati_stable.
struct AnchoredJacobi {
  std::vector<double> times;
  std::vector<Mat2> A, dA;
};
AnchoredJacobi anchored_jacobi(const Trajectory& traj, double T_anchor);

struct StableTensor {
  Mat2 U_T;       // U(0) from anchor T
  Mat2 U_2T;      // U(0) from anchor 2T
  double change;  // max-norm of U_2T - U_T
  bool converged;  // change <= 1e-6
};

/// Stable tensor at the start of the geodesic as the limit of anchored solutions.
StableTensor stable_tensor(const MetricSpec& spec, const ChartPoint& q0, const Vec3& v0, double T,
                           double step = 1e-3);

/// Coordinate box used by the Monte Carlo estimators.
struct SamplingBox {
  double x0 = -1.0, x1 = 1.0;
  double y0 = 0.5, y1 = 2.0;
  double t0 = 0.0, t1 = 1.0;

  void validate() const;
  double coordinate_volume() const { return (x1 - x0) * (y1 - y0) * (t1 - t0); }
  ChartPoint at(double u, double v, double w) const;
};

struct RiccatiAverage {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t accepted = 0;
  std::size_t rejected_nongeodesic = 0;
  std::size_t rejected_blowup = 0;
  std::vector<double> values;  // per accepted sample, in index order
};

/// Mean of Tr(U_s^2 + R_V) over vertical geodesics started at points drawn from
/// `box`. Points whose vertical curve is not a geodesic are rejected; more than
/// 50% rejections aborts with a DomainError.
RiccatiAverage riccati_average(const MetricSpec& spec, const SamplingBox& box, std::size_t N,
                               std::uint64_t seed, double T_anchor = 20.0, double step = 1e-3);

struct RauchReport {
  double max_violation = 0.0;      // max of (rhs - lhs) / max(1, rhs), clipped at 0
  double max_equality_gap = 0.0;   // max of |lhs - rhs| / max(1, rhs)
  std::size_t samples = 0;
};

/// Checks |J(t)|^2 >= |J_h(0)|^2 cosh^2(sqrt(-K_min) t) + |J_v'(0)|^2 t^2 for the
/// Jacobi field with initial value `value` and initial derivative `velocity`
/// (frame coordinates), J = B value + A velocity. Product metric only.
RauchReport rauch_check(const JacobiRun& run, double K_min, const Vec2& value, const Vec2& velocity);

struct ScanRow {
  std::size_t index = 0;
  ChartPoint q0;
  Vec3 v0;
  std::optional<double> t_star;
  double det_min = 0.0;
  double t_end = 0.0;
  bool truncated = false;
};

/// Seeded sweep over N random unit initial conditions in `box`.
std::vector<ScanRow> scan_conjugate(const MetricSpec& spec, const SamplingBox& box, std::size_t N,
                                    double Tmax, double step, std::uint64_t seed);

/// Random unit vector at q, uniform on the unit sphere of the metric.
Vec3 random_unit_vector(const MetricSpec& spec, const ChartPoint& q, SplitMix64& rng);

}  // namespace splitlab

namespace splitlab {

/// Least-squares fit of values ~ c sin(omega t) over omega in [lo, hi].
double fit_sine_frequency(const std::vector<double>& t, const std::vector<double>& values, double lo, double hi);

}  // namespace splitlab
