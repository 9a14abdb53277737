#include "splitlab/hyperbolic.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "splitlab/errors.hpp"

namespace splitlab {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite ") + what);
}

}  // namespace

HPoint::HPoint(double x_, double y_) : x(x_), y(y_) {
  require_finite(x, "x coordinate");
  require_finite(y, "y coordinate");
  if (!(y > 0.0)) throw DomainError("upper half-plane point needs y > 0");
}

MobiusElement MobiusElement::dilation(double lambda) {
  const double s = std::sqrt(lambda);
  return {s, 0.0, 0.0, 1.0 / s};
}

MobiusElement operator*(const MobiusElement& m, const MobiusElement& n) {
  return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
          m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}

MobiusElement make_mobius(double a, double b, double c, double d) {
  for (double v : {a, b, c, d}) require_finite(v, "matrix entry");
  MobiusElement m{a, b, c, d};
  if (std::abs(m.det() - 1.0) > 1e-12) {
    throw DomainError("matrix is not unimodular: det = " + std::to_string(m.det()));
  }
  return m;
}

double hyp_distance(const HPoint& p, const HPoint& q) {
  for (double v : {p.x, p.y, q.x, q.y}) require_finite(v, "coordinate");
  if (!(p.y > 0.0) || !(q.y > 0.0)) throw DomainError("hyp_distance needs y > 0");
  // arccosh(1 + u) == 2 asinh(sqrt(u / 2)); this form has no cancellation near p == q.
  const double chord = std::hypot(p.x - q.x, p.y - q.y);
  return 2.0 * std::asinh(chord / (2.0 * std::sqrt(p.y * q.y)));
}

HPoint mobius_apply(const MobiusElement& m, const HPoint& p) {
  const double scale = std::max({1.0, std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d)});
  if (std::abs(m.det() - 1.0) > 1e-12 * scale * scale) {
    throw DomainError("mobius_apply needs a unimodular matrix");
  }
  const std::complex<double> z = p.z();
  const std::complex<double> den = m.c * z + m.d;
  if (std::abs(den) == 0.0) throw DomainError("point is mapped to infinity");
  const std::complex<double> w = (m.a * z + m.b) / den;
  // Im(w) = y det / |cz+d|^2 is computed directly to keep it positive.
  const double y = p.y * m.det() / std::norm(den);
  return HPoint(w.real(), y);
}

std::complex<double> mobius_push_vector(const MobiusElement& m, const HPoint& p,
                                        std::complex<double> v) {
  const std::complex<double> den = m.c * p.z() + m.d;
  if (std::abs(den) == 0.0) throw DomainError("point is mapped to infinity");
  return v * m.det() / (den * den);
}

double translation_length(const MobiusElement& m) {
  const double tr = std::abs(m.trace());
  if (!std::isfinite(tr)) throw DomainError("non-finite trace");
  if (!(tr > 2.0 + kHyperbolicTraceBand)) throw NotHyperbolicError(tr);
  return 2.0 * std::acosh(tr / 2.0);
}

double vertical_busemann(const HPoint& p) {
  require_finite(p.x, "x coordinate");
  if (!(p.y > 0.0) || !std::isfinite(p.y)) throw DomainError("vertical_busemann needs y > 0");
  return -std::log(p.y);
}

double disk_area(double r, double kappa) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("disk_area needs r >= 0");
  if (!(kappa > 0.0)) throw DomainError("disk_area needs kappa > 0");
  // 2 pi (cosh(k r) - 1) / k^2 written without cancellation
  const double s = std::sinh(0.5 * std::sqrt(kappa) * r);
  return 4.0 * std::numbers::pi * s * s / kappa;
}

std::vector<MobiusElement> parse_generators(std::istream& in) {
  std::vector<MobiusElement> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double a, b, c, d;
    if (!(ls >> a >> b >> c >> d)) {
      throw DomainError("generator line " + std::to_string(lineno) + ": expected four numbers");
    }
    std::string rest;
    if (ls >> rest) {
      throw DomainError("generator line " + std::to_string(lineno) + ": trailing text '" + rest + "'");
    }
    try {
      out.push_back(make_mobius(a, b, c, d));
    } catch (const DomainError& e) {
      throw DomainError("generator line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<MobiusElement> read_generator_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open generator file " + path.string());
  return parse_generators(in);
}

}  // namespace splitlab
