#pragma once

// Closed-form invariants of product metrics on Sigma x S^1 and the comparators
// built on them.

#include <cstdint>
#include <string>
#include <vector>

#include "splitlab/hyperbolic.hpp"
#include "splitlab/jacobi.hpp"
#include "splitlab/metric.hpp"

namespace splitlab {

/// Laplace eigenvalues of the surface, sorted, repeated by multiplicity.
/// The first entry is 0 with multiplicity one.
class SigmaSpectrum {
 public:
  explicit SigmaSpectrum(std::vector<double> eigenvalues);
  const std::vector<double>& eigenvalues() const { return values_; }

  /// Smallest positive eigenvalue; DomainError if there is none.
  double lambda1() const;

 private:
  std::vector<double> values_;
};

SigmaSpectrum read_spectrum_file(const std::string& path);

/// lambda_m + (2 pi n / L)^2 <= cutoff for n in Z, sorted; the +-n pair appears twice.
std::vector<double> product_spectrum(const SigmaSpectrum& sig, double L, double cutoff);

/// Collapses a sorted list into (value, multiplicity) pairs (exact equality).
std::vector<std::pair<double, int>> group_multiplicities(const std::vector<double>& sorted);

/// min(lambda_1, (2 pi / L)^2).
double spectral_gap(const SigmaSpectrum& sig, double L);

/// sqrt(ell_sigma^2 + (n L)^2); the trivial class (0, 0) is rejected.
double mls_length(double ell_sigma, long n, double L);

struct LengthEntry {
  std::string word;   // generators a, b, ...; inverses A, B, ...; empty for pure fiber classes
  double trace = 2.0;
  double ell_sigma = 0.0;
  long n = 0;
  double ell = 0.0;
  int merged = 1;     // words collapsed onto this entry by the |trace| proxy
};

/// All reduced words up to `max_word` letters (max 8). Hyperbolic words give one
/// entry per fiber winding n in [-n_max, n_max]; pure fiber classes are included.
/// Entries with equal n and |trace| (relative 1e-9) are merged, keeping the
/// shortest word. Sorted by ell.
std::vector<LengthEntry> enumerate_length_spectrum(const std::vector<MobiusElement>& generators, int max_word,
                                                   double L, long n_max);

/// 2 pi L sqrt(2 v / (L pi) + (v / (2 pi L))^2).
double isoperimetric_bound(double v, double L);

struct TubeRow {
  std::string family;  // "disk" or "collar"
  double param = 0.0;  // radius r or collar width w
  double volume = 0.0;
  double area = 0.0;
  double bound = 0.0;
  int sign = 0;        // sign(area - bound)
  double ratio = 0.0;  // area / bound
};

/// Disk tubes D_r x S^1 and collar tubes of width w around a closed geodesic of
/// length ell_collar, each compared against isoperimetric_bound.
std::vector<TubeRow> tube_profiles(double L, const std::vector<double>& r_list, double ell_collar,
                                   const std::vector<double>& w_list);

struct GapConstant {
  double delta;
  double eps0;
};

/// delta = min(lambda1 / 2, pi^2 / L^2), eps0 = delta / (4 (1 + diam^2)).
GapConstant epsilon0(double lambda1, double L, double diam);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

/// Integrand |R_V|^2 + |nabla V|^2 (without the volume element).
double curvature_deviation_density(const MetricSpec& spec, const ChartPoint& p);

/// Monte Carlo integral of the density against the Riemannian volume over `box`.
MonteCarloEstimate curvature_deviation(const MetricSpec& spec, const SamplingBox& box, std::size_t N,
                                       std::uint64_t seed);

/// 6 genus - 6 + 1.
int moduli_dimension(int genus);

}  // namespace splitlab
