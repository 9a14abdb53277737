#include "splitlab/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/LU>

#include "splitlab/errors.hpp"

namespace splitlab {

namespace {

constexpr double kBlowUp = 1e6;
constexpr double kRootWidth = 1e-10;
constexpr double kTangentialRel = 1e-7;
constexpr double kGeodesicTol = 1e-12;

// Curvature at the midpoint of [t_i, t_{i+1}] by cubic Lagrange interpolation
// through four neighbouring samples (fewer near very short runs).
Mat2 interp_mid(const std::vector<double>& t, const std::vector<Mat2>& R, std::size_t i) {
  const std::size_t n = t.size();
  const double tm = 0.5 * (t[i] + t[i + 1]);
  if (n < 3) return 0.5 * (R[i] + R[i + 1]);
  const std::size_t m = std::min<std::size_t>(n, 4);
  std::size_t j0 = i > 0 ? i - 1 : 0;
  if (j0 + m > n) j0 = n - m;
  Mat2 out = Mat2::Zero();
  for (std::size_t a = j0; a < j0 + m; ++a) {
    double w = 1.0;
    for (std::size_t b = j0; b < j0 + m; ++b)
      if (b != a) w *= (tm - t[b]) / (t[a] - t[b]);
    out += w * R[a];
  }
  return 0.5 * (out + out.transpose());
}

struct Pair {
  Mat2 A, dA;
};

Pair jacobi_rhs(const Mat2& R, const Pair& y) { return {y.dA, -R * y.A}; }

Pair jacobi_step(const Pair& y, double h, const Mat2& R0, const Mat2& Rm, const Mat2& R1) {
  const Pair k1 = jacobi_rhs(R0, y);
  const Pair k2 = jacobi_rhs(Rm, {y.A + 0.5 * h * k1.A, y.dA + 0.5 * h * k1.dA});
  const Pair k3 = jacobi_rhs(Rm, {y.A + 0.5 * h * k2.A, y.dA + 0.5 * h * k2.dA});
  const Pair k4 = jacobi_rhs(R1, {y.A + h * k3.A, y.dA + h * k3.dA});
  return {y.A + (h / 6.0) * (k1.A + 2.0 * k2.A + 2.0 * k3.A + k4.A),
          y.dA + (h / 6.0) * (k1.dA + 2.0 * k2.dA + 2.0 * k3.dA + k4.dA)};
}

Mat2 riccati_rhs(const Mat2& R, const Mat2& U) { return -U * U - R; }

Mat2 riccati_step(const Mat2& U, double h, const Mat2& R0, const Mat2& Rm, const Mat2& R1) {
  const Mat2 k1 = riccati_rhs(R0, U);
  const Mat2 k2 = riccati_rhs(Rm, U + 0.5 * h * k1);
  const Mat2 k3 = riccati_rhs(Rm, U + 0.5 * h * k2);
  const Mat2 k4 = riccati_rhs(R1, U + h * k3);
  return U + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double sigma_min(const Mat2& M) {
  const double f = M.squaredNorm();
  const double d = M.determinant();
  const double smax2 = 0.5 * (f + std::sqrt(std::max(0.0, f * f - 4.0 * d * d)));
  return smax2 > 0.0 ? std::abs(d) / std::sqrt(smax2) : 0.0;
}

// Cubic Hermite interpolation of A (and A') inside sample interval i.
Pair hermite(const JacobiRun& run, std::size_t i, double t) {
  const auto& ts = run.traj->times;
  const double h = ts[i + 1] - ts[i];
  const double s = (t - ts[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  const double d00 = (6 * s2 - 6 * s) / h, d10 = 3 * s2 - 4 * s + 1, d01 = (-6 * s2 + 6 * s) / h,
               d11 = 3 * s2 - 2 * s;
  return {h00 * run.A[i] + h10 * h * run.dA[i] + h01 * run.A[i + 1] + h11 * h * run.dA[i + 1],
          d00 * run.A[i] + d10 * h * run.dA[i] + d01 * run.A[i + 1] + d11 * h * run.dA[i + 1]};
}

Pair hermite_at(const JacobiRun& run, std::size_t lo, std::size_t hi, double t) {
  const auto& ts = run.traj->times;
  std::size_t i = lo;
  while (i + 1 < hi && t > ts[i + 1]) ++i;
  return hermite(run, i, t);
}

std::size_t anchor_index(const Trajectory& traj, double T_anchor) {
  if (!traj.has_frame()) throw DomainError("trajectory has no parallel frame");
  if (!(T_anchor > 0.0)) throw DomainError("anchor time must be > 0");
  const double slack = 1e-9 * std::max(1.0, T_anchor);
  if (T_anchor > traj.end_time() + slack) {
    throw DomainError("anchor time " + std::to_string(T_anchor) + " beyond trajectory end " +
                      std::to_string(traj.end_time()));
  }
  const auto it = std::upper_bound(traj.times.begin(), traj.times.end(), T_anchor + slack);
  return static_cast<std::size_t>(it - traj.times.begin()) - 1;
}

std::vector<Mat2> normal_curvature_upto(const Trajectory& traj, std::size_t last) {
  std::vector<Mat2> out(last + 1);
  for (std::size_t i = 0; i <= last; ++i) {
    const CurvatureSample c = curvature_at(traj.spec, ChartPoint(traj.q[i]));
    const Vec3& v = traj.v[i];
    const Vec3 e[2] = {traj.e1[i], traj.e2[i]};
    Mat2 m;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) m(a, b) = riemann_apply(c.riemann, e[a], v, v, e[b]);
    out[i] = 0.5 * (m + m.transpose());
  }
  return out;
}

}  // namespace

std::vector<Mat2> normal_curvature(const Trajectory& traj) {
  if (!traj.has_frame()) throw DomainError("trajectory has no parallel frame");
  if (traj.times.empty()) return {};
  return normal_curvature_upto(traj, traj.size() - 1);
}

JacobiRun propagate_jacobi(const Trajectory& traj) {
  if (!traj.has_frame()) throw DomainError("propagate_jacobi needs a trajectory with a parallel frame");
  JacobiRun run;
  run.traj = std::make_shared<const Trajectory>(traj);
  run.rperp = normal_curvature(traj);
  const auto& t = traj.times;
  const std::size_t n = t.size();
  run.A.resize(n);
  run.dA.resize(n);
  run.B.resize(n);
  run.dB.resize(n);
  Pair a{Mat2::Zero(), Mat2::Identity()};
  Pair b{Mat2::Identity(), Mat2::Zero()};
  run.A[0] = a.A, run.dA[0] = a.dA, run.B[0] = b.A, run.dB[0] = b.dA;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = t[i + 1] - t[i];
    const Mat2 Rm = interp_mid(t, run.rperp, i);
    a = jacobi_step(a, h, run.rperp[i], Rm, run.rperp[i + 1]);
    b = jacobi_step(b, h, run.rperp[i], Rm, run.rperp[i + 1]);
    if (!a.A.allFinite() || !b.A.allFinite()) throw IntegrationError("non-finite Jacobi propagator");
    run.A[i + 1] = a.A, run.dA[i + 1] = a.dA, run.B[i + 1] = b.A, run.dB[i + 1] = b.dA;
  }
  run.det_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n; ++i) run.det_min = std::min(run.det_min, run.A[i].determinant() / (t[i] * t[i]));
  if (n < 2) run.det_min = 1.0;
  run.conjugates = find_conjugates(run);
  return run;
}

std::vector<double> find_conjugates(const JacobiRun& run) {
  const auto& t = run.traj->times;
  const std::size_t n = t.size();
  std::vector<double> det(n), sig(n);
  for (std::size_t i = 0; i < n; ++i) {
    det[i] = run.A[i].determinant();
    sig[i] = sigma_min(run.A[i]);
  }
  std::vector<double> roots;
  std::vector<bool> sign_change(n, false);  // interval [i, i+1]
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (det[i] == 0.0) {
      roots.push_back(t[i]);
      sign_change[i] = sign_change[i - 1] = true;
      continue;
    }
    if (det[i] * det[i + 1] >= 0.0) continue;
    sign_change[i] = true;
    double lo = t[i], hi = t[i + 1];
    const double dlo = det[i];
    while (hi - lo > kRootWidth) {
      const double mid = 0.5 * (lo + hi);
      const double dm = hermite(run, i, mid).A.determinant();
      if ((dm < 0.0) == (dlo < 0.0)) lo = mid;
      else hi = mid;
    }
    roots.push_back(0.5 * (lo + hi));
  }

  // Tangential zeros: det touches zero without changing sign (e.g. two
  // independent Jacobi fields vanishing together). Look for local minima of the
  // smallest singular value and accept those that vanish to time resolution.
  constexpr double invphi = 0.6180339887498949;
  for (std::size_t i = 2; i + 1 < n; ++i) {
    if (!(sig[i] <= sig[i - 1] && sig[i] <= sig[i + 1])) continue;
    if (sig[i] == sig[i - 1] && sig[i] == sig[i + 1]) continue;
    if (sign_change[i - 1] || sign_change[i]) continue;
    double lo = t[i - 1], hi = t[i + 1];
    auto f = [&](double s) { return sigma_min(hermite_at(run, i - 1, i + 1, s).A); };
    double c = hi - invphi * (hi - lo), d = lo + invphi * (hi - lo);
    double fc = f(c), fd = f(d);
    while (hi - lo > 1e-12) {
      if (fc < fd) {
        hi = d, d = c, fd = fc;
        c = hi - invphi * (hi - lo), fc = f(c);
      } else {
        lo = c, c = d, fc = fd;
        d = lo + invphi * (hi - lo), fd = f(d);
      }
    }
    const double ts = 0.5 * (lo + hi);
    const Pair p = hermite_at(run, i - 1, i + 1, ts);
    const double scale = std::max(p.dA.norm(), 1e-300);
    if (sigma_min(p.A) <= kTangentialRel * scale) roots.push_back(ts);
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(), [](double a, double b) { return b - a < 1e-8; }),
              roots.end());
  return roots;
}

Mat2 wronskian(const JacobiRun& run, std::size_t i) {
  return run.dA[i].transpose() * run.A[i] - run.A[i].transpose() * run.dA[i];
}

std::optional<double> first_conjugate_point(const MetricSpec& spec, const ChartPoint& q0, const Vec3& v0,
                                            double Tmax, double step) {
  if (!(Tmax > 0.0)) throw DomainError("Tmax must be > 0");
  IntegratorOptions o;
  o.step = step;
  const Trajectory tr = integrate_geodesic(spec, q0, v0, Tmax, o, true);
  const JacobiRun run = propagate_jacobi(tr);
  if (run.conjugates.empty()) return std::nullopt;
  return run.conjugates.front();
}

RiccatiRun riccati_stable(const Trajectory& traj, double T_anchor) {
  const std::size_t a = anchor_index(traj, T_anchor);
  const std::vector<Mat2> R = normal_curvature_upto(traj, a);
  std::vector<double> times(traj.times.begin(), traj.times.begin() + static_cast<std::ptrdiff_t>(a + 1));
  RiccatiRun out;
  out.traj = std::make_shared<const Trajectory>(traj);
  out.T_anchor = times.back();
  out.U.resize(a + 1);
  Mat2 U = Mat2::Zero();
  out.U[a] = U;
  for (std::size_t i = a; i-- > 0;) {
    const double h = times[i] - times[i + 1];
    U = riccati_step(U, h, R[i + 1], interp_mid(times, R, i), R[i]);
    U = 0.5 * (U + U.transpose());
    if (!U.allFinite() || U.norm() > kBlowUp) throw FocalBlowUp(times[i]);
    out.U[i] = U;
  }
  out.times = std::move(times);
  return out;
}

AnchoredJacobi anchored_jacobi(const Trajectory& traj, double T_anchor) {
  const std::size_t a = anchor_index(traj, T_anchor);
  const std::vector<Mat2> R = normal_curvature_upto(traj, a);
  AnchoredJacobi out;
  out.times.assign(traj.times.begin(), traj.times.begin() + static_cast<std::ptrdiff_t>(a + 1));
  out.A.resize(a + 1);
  out.dA.resize(a + 1);
  Pair y{Mat2::Identity(), Mat2::Zero()};
  out.A[a] = y.A, out.dA[a] = y.dA;
  for (std::size_t i = a; i-- > 0;) {
    const double h = out.times[i] - out.times[i + 1];
    y = jacobi_step(y, h, R[i + 1], interp_mid(out.times, R, i), R[i]);
    out.A[i] = y.A, out.dA[i] = y.dA;
  }
  return out;
}

StableTensor stable_tensor(const MetricSpec& spec, const ChartPoint& q0, const Vec3& v0, double T,
                           double step) {
  IntegratorOptions o;
  o.step = step;
  const Trajectory tr = integrate_geodesic(spec, q0, v0, 2.0 * T, o, true);
  if (tr.truncated) throw DomainError("geodesic left the chart before the anchor 2T");
  StableTensor s;
  s.U_T = riccati_stable(tr, T).U.front();
  s.U_2T = riccati_stable(tr, 2.0 * T).U.front();
  s.change = (s.U_2T - s.U_T).cwiseAbs().maxCoeff();
  s.converged = s.change <= 1e-6;
  return s;
}

void SamplingBox::validate() const {
  for (double v : {x0, x1, y0, y1, t0, t1})
    if (!std::isfinite(v)) throw DomainError("sampling box bounds must be finite");
  if (!(y0 > 0.0)) throw DomainError("sampling box intersects y <= 0");
  if (x1 < x0 || y1 < y0 || t1 < t0) throw DomainError("sampling box bounds are reversed");
}

ChartPoint SamplingBox::at(double u, double v, double w) const {
  return {x0 + u * (x1 - x0), y0 + v * (y1 - y0), t0 + w * (t1 - t0)};
}

RiccatiAverage riccati_average(const MetricSpec& spec, const SamplingBox& box, std::size_t N,
                               std::uint64_t seed, double T_anchor, double step) {
  box.validate();
  if (N == 0) throw DomainError("riccati_average needs N >= 1");
  enum Status { kOk, kNotGeodesic, kBlowUp };
  std::vector<Status> status(N, kOk);
  std::vector<double> value(N, 0.0);
  parallel_for(N, [&](std::size_t k) {
    SplitMix64 rng(seed, k);
    const double u = rng.uniform(), v = rng.uniform(), w = rng.uniform();
    const ChartPoint q = box.at(u, v, w);
    const Christoffel gam = christoffel_at(spec, q);
    if (std::abs(gam[kX](kT, kT)) > kGeodesicTol || std::abs(gam[kY](kT, kT)) > kGeodesicTol) {
      status[k] = kNotGeodesic;
      return;
    }
    IntegratorOptions o;
    o.step = step;
    const Trajectory tr = integrate_geodesic(spec, q, vertical_field(spec, q), T_anchor, o, true);
    try {
      const RiccatiRun rr = riccati_stable(tr, T_anchor);
      const Mat2 R0 = normal_curvature_upto(tr, 0).front();
      const Mat2& U = rr.U.front();
      value[k] = (U * U + R0).trace();
    } catch (const FocalBlowUp&) {
      status[k] = kBlowUp;
    }
  });

  RiccatiAverage out;
  for (std::size_t k = 0; k < N; ++k) {
    if (status[k] == kNotGeodesic) ++out.rejected_nongeodesic;
    else if (status[k] == kBlowUp) ++out.rejected_blowup;
    else out.values.push_back(value[k]);
  }
  out.accepted = out.values.size();
  const std::size_t rejected = out.rejected_nongeodesic + out.rejected_blowup;
  if (2 * rejected > N) {
    throw DomainError("riccati_average aborted: " + std::to_string(out.rejected_nongeodesic) +
                      " non-geodesic and " + std::to_string(out.rejected_blowup) + " blown-up samples out of " +
                      std::to_string(N));
  }
  const double m = std::accumulate(out.values.begin(), out.values.end(), 0.0) / static_cast<double>(out.accepted);
  double ss = 0.0;
  for (double x : out.values) ss += (x - m) * (x - m);
  out.mean = m;
  out.stderr_ = out.accepted > 1 ? std::sqrt(ss / static_cast<double>(out.accepted - 1) /
                                             static_cast<double>(out.accepted))
                                 : 0.0;
  return out;
}

RauchReport rauch_check(const JacobiRun& run, double K_min, const Vec2& value, const Vec2& velocity) {
  const Trajectory& tr = *run.traj;
  if (tr.spec.kind() != MetricKind::Product) {
    throw UnsupportedError("rauch_check is only defined for the product metric");
  }
  if (!(K_min <= 0.0)) throw DomainError("rauch_check needs K_min <= 0");
  const ChartPoint q0(tr.q[0]);
  const Mat3 g0 = metric_at(tr.spec, q0);
  const Vec3 V = vertical_field(tr.spec, q0);
  const Vec3 J0 = value[0] * tr.e1[0] + value[1] * tr.e2[0];
  const Vec3 dJ0 = velocity[0] * tr.e1[0] + velocity[1] * tr.e2[0];
  const double j0v = metric_dot(g0, J0, V);
  const double h2 = std::max(0.0, metric_dot(g0, J0, J0) - j0v * j0v);
  const double v2 = std::pow(metric_dot(g0, dJ0, V), 2);
  const double k = std::sqrt(-K_min);

  RauchReport rep;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.times[i];
    const Vec2 J = run.B[i] * value + run.A[i] * velocity;
    const double lhs = J.squaredNorm();
    const double ch = std::cosh(k * t);
    const double rhs = h2 * ch * ch + v2 * t * t;
    const double scale = std::max(1.0, rhs);
    rep.max_violation = std::max(rep.max_violation, (rhs - lhs) / scale);
    rep.max_equality_gap = std::max(rep.max_equality_gap, std::abs(lhs - rhs) / scale);
  }
  rep.max_violation = std::max(0.0, rep.max_violation);
  rep.samples = tr.size();
  return rep;
}

Vec3 random_unit_vector(const MetricSpec& spec, const ChartPoint& q, SplitMix64& rng) {
  const double z = 2.0 * rng.uniform() - 1.0;
  const double phi = 2.0 * 3.141592653589793 * rng.uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const auto H = horizontal_basis(spec, q);
  const Vec3 v = r * std::cos(phi) * H[0] + r * std::sin(phi) * H[1] + z * vertical_field(spec, q);
  return normalize_velocity(spec, q, v);
}

std::vector<ScanRow> scan_conjugate(const MetricSpec& spec, const SamplingBox& box, std::size_t N,
                                    double Tmax, double step, std::uint64_t seed) {
  box.validate();
  if (!(Tmax > 0.0) || !(step > 0.0)) throw DomainError("scan needs Tmax > 0 and step > 0");
  std::vector<ScanRow> rows(N);
  parallel_for(N, [&](std::size_t k) {
    SplitMix64 rng(seed, k);
    const double u = rng.uniform(), v = rng.uniform(), w = rng.uniform();
    ScanRow row;
    row.index = k;
    row.q0 = box.at(u, v, w);
    row.v0 = random_unit_vector(spec, row.q0, rng);
    IntegratorOptions o;
    o.step = step;
    const Trajectory tr = integrate_geodesic(spec, row.q0, row.v0, Tmax, o, true);
    const JacobiRun run = propagate_jacobi(tr);
    if (!run.conjugates.empty()) row.t_star = run.conjugates.front();
    row.det_min = run.det_min;
    row.t_end = tr.end_time();
    row.truncated = tr.truncated;
    rows[k] = row;
  });
  return rows;
}

double fit_sine_frequency(const std::vector<double>& t, const std::vector<double>& values, double lo, double hi) {
  if (t.size() != values.size() || t.size() < 3) throw DomainError("fit_sine_frequency needs matching samples");
  auto residual = [&](double w) {
    double ss = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double s = std::sin(w * t[i]);
      ss += s * s;
      sy += s * values[i];
    }
    const double c = ss > 0.0 ? sy / ss : 0.0;
    double r = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) r += std::pow(values[i] - c * std::sin(w * t[i]), 2);
    return r;
  };
  // coarse scan then golden-section refinement
  const int n = 200;
  double best = lo, fbest = residual(lo);
  for (int k = 1; k <= n; ++k) {
    const double w = lo + (hi - lo) * k / n;
    const double f = residual(w);
    if (f < fbest) best = w, fbest = f;
  }
  double a = std::max(lo, best - (hi - lo) / n), b = std::min(hi, best + (hi - lo) / n);
  constexpr double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = residual(c), fd = residual(d);
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - invphi * (b - a), fc = residual(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + invphi * (b - a), fd = residual(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace splitlab
