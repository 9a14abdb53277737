#include "splitlab/geodesic.hpp"

#include <array>
#include <cmath>
#include <ostream>

#include "splitlab/errors.hpp"
#include "splitlab/numfmt.hpp"

namespace splitlab {

namespace {

// q, v, e1, e2
using State = std::array<Vec3, 4>;

State axpy(const State& y, double h, const State& k) {
  State out;
  for (int i = 0; i < 4; ++i) out[i] = y[i] + h * k[i];
  return out;
}

Vec3 contract(const Christoffel& gam, const Vec3& a, const Vec3& b) {
  return Vec3(a.dot(gam[0] * b), a.dot(gam[1] * b), a.dot(gam[2] * b));
}

class Stepper {
 public:
  Stepper(const MetricSpec& spec, bool frame, double y_min) : spec_(spec), frame_(frame), y_min_(y_min) {}

  // false when a stage leaves the chart
  bool rhs(const State& y, State& dy) const {
    if (!(y[0][1] > 0.0)) return false;
    for (const auto& c : y)
      if (!c.allFinite()) throw IntegrationError("non-finite geodesic state");
    const Christoffel gam = christoffel_at(spec_, ChartPoint(y[0]));
    dy[0] = y[1];
    dy[1] = -contract(gam, y[1], y[1]);
    if (frame_) {
      dy[2] = -contract(gam, y[1], y[2]);
      dy[3] = -contract(gam, y[1], y[3]);
    } else {
      dy[2].setZero();
      dy[3].setZero();
    }
    return true;
  }

  bool step(const State& y, double h, State& out) const {
    State k1, k2, k3, k4;
    if (!rhs(y, k1)) return false;
    if (!rhs(axpy(y, 0.5 * h, k1), k2)) return false;
    if (!rhs(axpy(y, 0.5 * h, k2), k3)) return false;
    if (!rhs(axpy(y, h, k3), k4)) return false;
    for (int i = 0; i < 4; ++i) out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!(out[0][1] >= y_min_)) return false;
    for (const auto& c : out)
      if (!c.allFinite()) throw IntegrationError("non-finite geodesic state");
    return true;
  }

 private:
  const MetricSpec& spec_;
  bool frame_;
  double y_min_;
};

double state_distance(const State& a, const State& b) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i) m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return m;
}

void push(Trajectory& tr, double t, const State& y, bool frame) {
  tr.times.push_back(t);
  tr.q.push_back(y[0]);
  tr.v.push_back(y[1]);
  if (frame) {
    tr.e1.push_back(y[2]);
    tr.e2.push_back(y[3]);
  }
}

}  // namespace

Vec3 normalize_velocity(const MetricSpec& spec, const ChartPoint& q, const Vec3& v) {
  const double n = std::sqrt(metric_dot(metric_at(spec, q), v, v));
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a zero velocity");
  return v / n;
}

Trajectory integrate_geodesic(const MetricSpec& spec, const ChartPoint& q0, const Vec3& v0, double T,
                              const IntegratorOptions& opts, bool with_frame) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("integration time must be >= 0");
  if (!(opts.step > 0.0)) throw DomainError("integration step must be > 0");
  const Mat3 g0 = metric_at(spec, q0);
  if (std::abs(metric_dot(g0, v0, v0) - 1.0) > 1e-9) throw DomainError("initial velocity is not unit speed");

  Trajectory tr;
  tr.spec = spec;
  tr.options = opts;
  tr.T = T;

  State y{q0.vec(), v0, Vec3::Zero(), Vec3::Zero()};
  if (with_frame) {
    const auto f = frame_from_tangent(g0, v0);
    y[2] = f[0];
    y[3] = f[1];
  }
  push(tr, 0.0, y, with_frame);
  if (T == 0.0) return tr;

  const Stepper stepper(spec, with_frame, opts.y_min);
  State next;
  if (!opts.adaptive) {
    const auto n = static_cast<std::size_t>(std::ceil(T / opts.step - 1e-9));
    const double h = T / static_cast<double>(n);
    tr.options.step = h;
    tr.times.reserve(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
      if (!stepper.step(y, h, next)) {
        tr.truncated = true;
        break;
      }
      y = next;
      push(tr, i == n ? T : static_cast<double>(i) * h, y, with_frame);
    }
    return tr;
  }

  // Step doubling with local extrapolation.
  double t = 0.0;
  double h = opts.step;
  State half, full;
  while (t < T) {
    h = std::min(h, T - t);
    if (h < 1e-14 * std::max(1.0, T)) throw IntegrationError("adaptive step size underflow");
    State mid;
    if (!stepper.step(y, h, full) || !stepper.step(y, 0.5 * h, mid) || !stepper.step(mid, 0.5 * h, half)) {
      if (h < 1e-8) {
        tr.truncated = true;
        break;
      }
      h *= 0.5;
      continue;
    }
    const double err = state_distance(half, full) / 15.0;
    if (err <= opts.tolerance) {
      for (int i = 0; i < 4; ++i) y[i] = half[i] + (half[i] - full[i]) / 15.0;
      t = (T - t - h) < 1e-12 * T ? T : t + h;
      push(tr, t, y, with_frame);
    }
    const double factor = err == 0.0 ? 2.0 : 0.9 * std::pow(opts.tolerance / err, 0.2);
    h *= std::clamp(factor, 0.2, 2.0);
  }
  return tr;
}

Trajectory parallel_frame(const Trajectory& traj) {
  if (traj.times.empty()) throw DomainError("empty trajectory");
  if (traj.has_frame()) return traj;
  IntegratorOptions opts = traj.options;
  Trajectory out = integrate_geodesic(traj.spec, ChartPoint(traj.q[0]), traj.v[0], traj.T, opts, true);
  return out;
}

double speed_drift(const Trajectory& traj) {
  double m = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Mat3 g = metric_at(traj.spec, ChartPoint(traj.q[i]));
    m = std::max(m, std::abs(metric_dot(g, traj.v[i], traj.v[i]) - 1.0));
  }
  return m;
}

double frame_orthonormality_error(const Trajectory& traj) {
  if (!traj.has_frame()) throw DomainError("trajectory has no frame");
  double m = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Mat3 g = metric_at(traj.spec, ChartPoint(traj.q[i]));
    const Vec3 f[3] = {traj.e1[i], traj.e2[i], traj.v[i]};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        m = std::max(m, std::abs(metric_dot(g, f[a], f[b]) - (a == b ? 1.0 : 0.0)));
  }
  return m;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "time,x,y,t,vx,vy,vt\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << fmt_num(traj.times[i]);
    for (int k = 0; k < 3; ++k) out << ',' << fmt_num(traj.q[i][k]);
    for (int k = 0; k < 3; ++k) out << ',' << fmt_num(traj.v[i][k]);
    out << '\n';
  }
}

}  // namespace splitlab
