#pragma once

// Exact geometry of the upper half-plane model of the hyperbolic plane.

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace splitlab {

/// Point z = x + iy of the upper half-plane (y > 0).
struct HPoint {
  double x = 0.0;
  double y = 1.0;

  HPoint() = default;
  HPoint(double x_, double y_);

  std::complex<double> z() const { return {x, y}; }
};

/// 2x2 real matrix acting on the upper half-plane by z -> (az+b)/(cz+d).
///
/// Elements built through `make_mobius` or parsed from a generator file are
/// unimodular to 1e-12. Products are not re-validated, since rounding in long
/// words easily exceeds that band.
struct MobiusElement {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }
  MobiusElement inverse() const { return {d, -b, -c, a}; }

  static MobiusElement identity() { return {}; }
  static MobiusElement dilation(double lambda);
};

MobiusElement operator*(const MobiusElement& m, const MobiusElement& n);

/// Validating constructor: throws DomainError unless |ad - bc - 1| <= 1e-12.
MobiusElement make_mobius(double a, double b, double c, double d);

/// Hyperbolic distance arccosh(1 + |p-q|^2 / (2 y_p y_q)).
double hyp_distance(const HPoint& p, const HPoint& q);

/// Image of p under M. Throws DomainError when cz + d = 0.
HPoint mobius_apply(const MobiusElement& m, const HPoint& p);

/// Pushforward of a tangent vector (vx, vy) at p under M: multiplication by 1/(cz+d)^2.
std::complex<double> mobius_push_vector(const MobiusElement& m, const HPoint& p,
                                        std::complex<double> v);

constexpr double kHyperbolicTraceBand = 1e-12;

/// 2 arccosh(|a+d|/2); NotHyperbolicError when |trace| <= 2 + 1e-12.
double translation_length(const MobiusElement& m);

/// Busemann function of the unit-speed upward ray s -> i e^s, i.e. -ln(y).
double vertical_busemann(const HPoint& p);

/// Area of a hyperbolic disk of radius r in curvature -kappa.
double disk_area(double r, double kappa = 1.0);

/// Parses "a b c d" lines; '#' starts a comment line. Every matrix must be unimodular.
std::vector<MobiusElement> parse_generators(std::istream& in);
std::vector<MobiusElement> read_generator_file(const std::filesystem::path& path);

}  // namespace splitlab
