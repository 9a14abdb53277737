#include "splitlab/metric.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include <Eigen/LU>

#include "splitlab/errors.hpp"

namespace splitlab {

namespace {

// Finite-difference steps, relative to y in the x and y directions
// (the base metric is dilation invariant, so y is its natural length scale).
constexpr double kMetricStep = 1e-5;
constexpr double kChristoffelStep = 1e-4;

double coord_step(double rel, int axis, double y) { return axis == kT ? rel : rel * y; }

Vec3 shifted(const ChartPoint& p, int axis, double h) {
  Vec3 q = p.vec();
  q[axis] += h;
  return q;
}

ChartPoint checked_point(const Vec3& q) {
  if (!(q[1] > 0.0)) throw AccuracyError("finite-difference stencil left the chart (y <= 0)");
  return ChartPoint(q);
}

void check_step(double coord, double h) {
  if (!(h > 0.0) || coord - h == coord || !std::isfinite(h)) {
    throw AccuracyError("finite-difference step underflow at coordinate " + std::to_string(coord));
  }
}

struct Registry {
  std::mutex mu;
  std::map<std::string, std::shared_ptr<const Potential>> items;

  Registry() {
    add({"log_y", [](double, double y) { return std::log(y); },
         [](double, double y) { return Vec2(0.0, 1.0 / y); },
         [](double, double y) {
           Mat2 h = Mat2::Zero();
           h(1, 1) = -1.0 / (y * y);
           return h;
         }});
    add({"x", [](double x, double) { return x; }, [](double, double) { return Vec2(1.0, 0.0); },
         [](double, double) { return Mat2::Zero().eval(); }});
  }
  void add(Potential p) {
    auto name = p.name;
    items[name] = std::make_shared<const Potential>(std::move(p));
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

std::shared_ptr<const Potential> find_potential(const std::string& name) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  auto it = r.items.find(name);
  if (it == r.items.end()) throw DomainError("unknown twist potential '" + name + "'");
  return it->second;
}

// Gram-Schmidt of `c` against the orthonormal vectors in `basis`; returns the
// residual and its length relative to |c|.
std::pair<Vec3, double> orthogonalize(const Mat3& g, const Vec3& c, const std::vector<Vec3>& basis) {
  Vec3 r = c / std::sqrt(metric_dot(g, c, c));
  for (const auto& e : basis) r -= metric_dot(g, r, e) * e;
  return {r, std::sqrt(metric_dot(g, r, r))};
}

}  // namespace

ChartPoint::ChartPoint(double x_, double y_, double t_) : x(x_), y(y_), t(t_) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(t)) {
    throw DomainError("non-finite chart point");
  }
  if (!(y > 0.0)) throw DomainError("chart point needs y > 0");
}

void WarpProfile::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("warp eps must be > 0");
  if (!(r0 > 0.0) || !(r1 > r0) || !std::isfinite(r1)) throw DomainError("warp radii need 0 < r0 < r1");
  if (!(center.y > 0.0)) throw DomainError("warp center needs y > 0");
  // The deviation eps (1/2 - r^2) is most negative at r1 before fading out.
  const double worst = 1.0 + std::min(0.0, eps * (0.5 - r1 * r1));
  if (!(worst > 0.0)) throw DomainError("warp eps too large: f would not stay positive");
}

WarpValue warp_profile_eval(const WarpProfile& w, double r) {
  if (!(r >= 0.0)) throw DomainError("warp radius must be >= 0");
  const double dev = w.eps * (0.5 - r * r);
  const double ddev = -2.0 * w.eps * r;
  const double d2dev = -2.0 * w.eps;
  if (r <= w.r0) return {1.0 + dev, ddev, d2dev};
  if (r >= w.r1) return {1.0, 0.0, 0.0};
  const double width = w.r1 - w.r0;
  const double tau = (r - w.r0) / width;
  const double s = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
  const double ds = 30.0 * tau * tau * (1.0 - tau) * (1.0 - tau) / width;
  const double d2s = 60.0 * tau * (1.0 - tau) * (1.0 - 2.0 * tau) / (width * width);
  const double m = 1.0 - s;
  return {1.0 + dev * m, ddev * m - dev * ds, d2dev * m - 2.0 * ddev * ds - dev * d2s};
}

void register_potential(Potential p) {
  if (p.name.empty() || !p.value || !p.gradient || !p.hessian) {
    throw DomainError("potential needs a name, value, gradient and hessian");
  }
  auto& r = registry();
  std::lock_guard lock(r.mu);
  r.add(std::move(p));
}

Potential lookup_potential(const std::string& name) { return *find_potential(name); }

std::vector<std::string> registered_potentials() {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  std::vector<std::string> out;
  for (const auto& [k, _] : r.items) out.push_back(k);
  return out;
}

std::string to_string(MetricKind k) {
  switch (k) {
    case MetricKind::Product: return "Product";
    case MetricKind::Warped: return "Warped";
    case MetricKind::Twisted: return "Twisted";
  }
  return "?";
}

MetricKind metric_kind_from_string(const std::string& s) {
  if (s == "Product") return MetricKind::Product;
  if (s == "Warped") return MetricKind::Warped;
  if (s == "Twisted") return MetricKind::Twisted;
  throw DomainError("unknown metric kind '" + s + "'");
}

MetricSpec MetricSpec::product(double L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("fiber length L must be > 0");
  MetricSpec s;
  s.kind_ = MetricKind::Product;
  s.L_ = L;
  return s;
}

MetricSpec MetricSpec::warped(const WarpProfile& w) {
  w.validate();
  MetricSpec s;
  s.kind_ = MetricKind::Warped;
  s.warp_ = w;
  return s;
}

MetricSpec MetricSpec::twisted(double alpha, const std::string& potential) {
  if (!std::isfinite(alpha)) throw DomainError("twist amplitude must be finite");
  MetricSpec s;
  s.kind_ = MetricKind::Twisted;
  s.alpha_ = alpha;
  s.potential_ = find_potential(potential);
  return s;
}

std::pair<double, Vec2> MetricSpec::warp_at(double x, double y) const {
  const HPoint& c = warp_.center;
  const double r = hyp_distance({x, y}, c);
  const WarpValue wv = warp_profile_eval(warp_, r);
  if (r >= warp_.r1) return {wv.f, Vec2::Zero()};
  // f as a function of w = cosh r - 1: df/dw = f'(r) / sinh r.
  double df_dw;
  if (r <= warp_.r0) {
    const double r_over_sinh = r < 1e-8 ? 1.0 : r / std::sinh(r);
    df_dw = -2.0 * warp_.eps * r_over_sinh;
  } else {
    df_dw = wv.df / std::sinh(r);
  }
  const double denom = y * c.y;
  const double dx = x - c.x;
  const double dy = y - c.y;
  const double w = (dx * dx + dy * dy) / (2.0 * denom);
  const Vec2 dw(dx / denom, dy / denom - w / y);
  return {wv.f, df_dw * dw};
}

double metric_dot(const Mat3& g, const Vec3& a, const Vec3& b) { return a.dot(g * b); }

Mat3 metric_at(const MetricSpec& spec, const ChartPoint& p) {
  const double base = 1.0 / (p.y * p.y);
  Mat3 g = Mat3::Zero();
  g(0, 0) = base;
  g(1, 1) = base;
  switch (spec.kind()) {
    case MetricKind::Product:
      g(2, 2) = spec.L() * spec.L();
      break;
    case MetricKind::Warped: {
      const double f = spec.warp_at(p.x, p.y).first;
      g(2, 2) = f * f;
      break;
    }
    case MetricKind::Twisted: {
      // (dt + alpha dh) (x) (dt + alpha dh)
      const Vec2 dh = spec.potential().gradient(p.x, p.y);
      const double a = spec.alpha();
      const Vec3 eta(a * dh[0], a * dh[1], 1.0);
      g += eta * eta.transpose();
      break;
    }
  }
  return g;
}

Christoffel christoffel_fd(const MetricSpec& spec, const ChartPoint& p) {
  std::array<Mat3, 3> dg;  // dg[a] = d_a g
  for (int a = 0; a < 3; ++a) {
    const double h = coord_step(kMetricStep, a, p.y);
    check_step(p.vec()[a], h);
    auto central = [&](double step) {
      const Mat3 gp = metric_at(spec, checked_point(shifted(p, a, step)));
      const Mat3 gm = metric_at(spec, checked_point(shifted(p, a, -step)));
      return ((gp - gm) / (2.0 * step)).eval();
    };
    dg[a] = (4.0 * central(0.5 * h) - central(h)) / 3.0;
  }
  const Mat3 ginv = metric_at(spec, p).inverse();
  Christoffel gam;
  for (int k = 0; k < 3; ++k) {
    gam[k].setZero();
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l) s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        gam[k](i, j) = gam[k](j, i) = 0.5 * s;
      }
    }
  }
  return gam;
}

Christoffel christoffel_at(const MetricSpec& spec, const ChartPoint& p) {
  if (spec.kind() == MetricKind::Twisted) return christoffel_fd(spec, p);
  Christoffel gam{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  const double inv_y = 1.0 / p.y;
  gam[kX](kX, kY) = gam[kX](kY, kX) = -inv_y;
  gam[kY](kX, kX) = inv_y;
  gam[kY](kY, kY) = -inv_y;
  if (spec.kind() == MetricKind::Warped) {
    const auto [f, df] = spec.warp_at(p.x, p.y);
    for (int i : {kX, kY}) {
      gam[kT](kT, i) = gam[kT](i, kT) = df[i] / f;
      gam[i](kT, kT) = -p.y * p.y * f * df[i];
    }
  }
  return gam;
}

CurvatureSample curvature_at(const MetricSpec& spec, const ChartPoint& p) {
  const Christoffel gam = christoffel_at(spec, p);
  std::array<Christoffel, 3> dgam;  // dgam[c][a](d, b) = d_c Gamma^a_db
  for (int c = 0; c < 3; ++c) {
    const double h = coord_step(kChristoffelStep, c, p.y);
    check_step(p.vec()[c], h);
    const Christoffel gp = christoffel_at(spec, checked_point(shifted(p, c, h)));
    const Christoffel gm = christoffel_at(spec, checked_point(shifted(p, c, -h)));
    for (int a = 0; a < 3; ++a) dgam[c][a] = (gp[a] - gm[a]) / (2.0 * h);
  }

  // R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb
  Tensor4 up;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          double s = dgam[c][a](d, b) - dgam[d][a](c, b);
          for (int e = 0; e < 3; ++e) s += gam[a](c, e) * gam[e](d, b) - gam[a](d, e) * gam[e](c, b);
          up(a, b, c, d) = s;
        }

  CurvatureSample out;
  out.point = p;
  out.metric = metric_at(spec, p);
  Tensor4 low;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          double s = 0.0;
          for (int e = 0; e < 3; ++e) s += out.metric(a, e) * up(e, b, c, d);
          low(a, b, c, d) = s;
        }

  double sym = 0.0, bianchi = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          const double r = low(a, b, c, d);
          sym = std::max({sym, std::abs(r + low(b, a, c, d)), std::abs(r + low(a, b, d, c)),
                          std::abs(r - low(c, d, a, b))});
          bianchi = std::max(bianchi, std::abs(r + low(a, c, d, b) + low(a, d, b, c)));
          out.riemann(a, b, c, d) =
              0.125 * (r - low(b, a, c, d) - low(a, b, d, c) + low(b, a, d, c) + low(c, d, a, b) -
                       low(d, c, a, b) - low(c, d, b, a) + low(d, c, b, a));
        }
  out.symmetry_residual = sym;
  out.bianchi_residual = bianchi;

  const Mat3& g = out.metric;
  for (auto [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
    out.sectionals[{i, j}] = out.riemann(i, j, i, j) / (g(i, i) * g(j, j) - g(i, j) * g(i, j));
  }
  return out;
}

double riemann_apply(const Tensor4& R, const Vec3& X, const Vec3& Y, const Vec3& Z, const Vec3& W) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) s += R(a, b, c, d) * W[a] * Z[b] * X[c] * Y[d];
  return s;
}

double sectional(const CurvatureSample& c, const Vec3& X, const Vec3& Y) {
  const Mat3& g = c.metric;
  const double xx = metric_dot(g, X, X), yy = metric_dot(g, Y, Y), xy = metric_dot(g, X, Y);
  return riemann_apply(c.riemann, X, Y, Y, X) / (xx * yy - xy * xy);
}

Mat3 ricci(const CurvatureSample& c) {
  const Mat3 ginv = c.metric.inverse();
  Mat3 ric = Mat3::Zero();
  for (int b = 0; b < 3; ++b)
    for (int d = 0; d < 3; ++d) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int cc = 0; cc < 3; ++cc) s += ginv(a, cc) * c.riemann(a, b, cc, d);
      ric(b, d) = s;
    }
  return ric;
}

Vec3 vertical_field(const MetricSpec& spec, const ChartPoint& p) {
  const Mat3 g = metric_at(spec, p);
  return Vec3(0.0, 0.0, 1.0 / std::sqrt(g(2, 2)));
}

std::array<Vec3, 2> horizontal_basis(const MetricSpec& spec, const ChartPoint& p) {
  const Mat3 g = metric_at(spec, p);
  const Vec3 V(0.0, 0.0, 1.0 / std::sqrt(g(2, 2)));
  std::vector<Vec3> done{V};
  auto [e1, n1] = orthogonalize(g, Vec3::UnitX(), done);
  e1 /= n1;
  done.push_back(e1);
  auto [e2, n2] = orthogonalize(g, Vec3::UnitY(), done);
  return {e1, e2 / n2};
}

Mat2 r_v_operator(const MetricSpec& spec, const CurvatureSample& c) {
  const Vec3 V = vertical_field(spec, c.point);
  const auto H = horizontal_basis(spec, c.point);
  Mat2 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = riemann_apply(c.riemann, H[i], V, V, H[j]);
  return 0.5 * (m + m.transpose());
}

Mat2 r_v_operator(const MetricSpec& spec, const ChartPoint& p) {
  return r_v_operator(spec, curvature_at(spec, p));
}

double nabla_v_norm2(const MetricSpec& spec, const ChartPoint& p) {
  const Mat3 g = metric_at(spec, p);
  const Christoffel gam = christoffel_at(spec, p);
  const double s = 1.0 / std::sqrt(g(2, 2));
  // N(a, b) = (nabla_a V)^b with V = s d_t; d_a g_tt = 2 g_tk Gamma^k_at.
  Mat3 N;
  for (int a = 0; a < 3; ++a) {
    double dgtt = 0.0;
    for (int k = 0; k < 3; ++k) dgtt += 2.0 * g(2, k) * gam[k](a, 2);
    const double ds = -0.5 * s * s * s * dgtt;
    for (int b = 0; b < 3; ++b) N(a, b) = (b == 2 ? ds : 0.0) + gam[b](a, 2) * s;
  }
  return (g.inverse() * N * g * N.transpose()).trace();
}

std::array<Vec3, 3> frame_from_tangent(const Mat3& g, const Vec3& v) {
  const double nv = std::sqrt(metric_dot(g, v, v));
  if (!(nv > 0.0) || !std::isfinite(nv)) throw DomainError("degenerate tangent vector for frame");
  std::vector<Vec3> basis{v / nv};
  const Vec3 candidates[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  bool used[3] = {false, false, false};
  for (int k = 0; k < 2; ++k) {
    int pick = -1;
    double best = -1.0;
    Vec3 best_vec;
    for (int c = 0; c < 3; ++c) {
      if (used[c]) continue;
      auto [r, n] = orthogonalize(g, candidates[c], basis);
      if (n >= 0.3) {
        pick = c;
        best_vec = r / n;
        break;
      }
      if (n > best) {
        best = n;
        pick = c;
        best_vec = r / n;
      }
    }
    if (pick < 0) throw DomainError("could not complete an orthonormal frame");
    used[pick] = true;
    basis.push_back(best_vec);
  }
  return {basis[1], basis[2], basis[0]};
}

}  // namespace splitlab
