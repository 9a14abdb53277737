#pragma once

#include <iosfwd>
#include <vector>

#include "splitlab/metric.hpp"

namespace splitlab {

struct PhaseState {
  ChartPoint q;
  Vec3 v;
};

struct IntegratorOptions {
  double step = 1e-3;
  bool adaptive = false;
  double tolerance = 1e-10;  // local error per step, adaptive mode only
  double y_min = 1e-6;       // chart boundary: trajectories are truncated below this
};

/// Sampled unit-speed geodesic, optionally carrying a parallel orthonormal frame
/// (e1, e2 normal to the tangent, e3 = tangent).
struct Trajectory {
  MetricSpec spec = MetricSpec::product(1.0);
  IntegratorOptions options;
  double T = 0.0;            // requested length
  std::vector<double> times;
  std::vector<Vec3> q;
  std::vector<Vec3> v;
  std::vector<Vec3> e1, e2;  // empty unless has_frame()
  bool truncated = false;    // stopped at the chart boundary before T

  bool has_frame() const { return !e1.empty(); }
  std::size_t size() const { return times.size(); }
  double end_time() const { return times.empty() ? 0.0 : times.back(); }
  PhaseState state(std::size_t i) const { return {ChartPoint(q[i]), v[i]}; }
};

/// Rescales v so that g(v, v) = 1 at q.
Vec3 normalize_velocity(const MetricSpec& spec, const ChartPoint& q, const Vec3& v);

/// Classical RK4 integration of the geodesic equation for time T.
/// v0 must be unit (|g(v,v) - 1| <= 1e-9). Fixed steps are rounded so that
/// T is an integer number of equal steps.
Trajectory integrate_geodesic(const MetricSpec& spec, const ChartPoint& q0, const Vec3& v0, double T,
                              const IntegratorOptions& opts = {}, bool with_frame = false);

inline Trajectory integrate_geodesic(const MetricSpec& spec, const ChartPoint& q0, const Vec3& v0,
                                     double T, double step) {
  IntegratorOptions o;
  o.step = step;
  return integrate_geodesic(spec, q0, v0, T, o, false);
}

/// Same geodesic with a parallel frame transported in the same state vector.
/// The geodesic samples are bit-identical to the frameless run.
Trajectory parallel_frame(const Trajectory& traj);

/// max over samples of |g(v, v) - 1|.
double speed_drift(const Trajectory& traj);

/// max over samples of the deviation of the frame Gram matrix from the identity.
double frame_orthonormality_error(const Trajectory& traj);

/// CSV with header time,x,y,t,vx,vy,vt.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace splitlab
