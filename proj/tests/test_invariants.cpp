#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "splitlab/errors.hpp"
#include "splitlab/invariants.hpp"
#include "splitlab/parallel.hpp"

using namespace splitlab;

namespace {

// Brute force: every pair (lambda_m, n) with n in a generous symmetric window.
std::vector<double> spectrum_oracle(const std::vector<double>& sig, double L, double cutoff) {
  std::vector<double> out;
  for (double lam : sig)
    for (long n = -2000; n <= 2000; ++n) {
      const double k = 2.0 * std::numbers::pi * static_cast<double>(n) / L;
      if (lam + k * k <= cutoff) out.push_back(lam + k * k);
    }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("product spectrum equals brute-force enumeration") {
  for (std::uint64_t k = 0; k < 20; ++k) {
    SplitMix64 rng(21, k);
    std::vector<double> sig{0.0};
    const int m = 1 + static_cast<int>(rng.uniform() * 8);
    for (int i = 0; i < m; ++i) sig.push_back(0.05 + 10.0 * rng.uniform());
    const double L = 0.5 + 10.0 * rng.uniform();
    const double cutoff = 1.0 + 40.0 * rng.uniform();
    CHECK(product_spectrum(SigmaSpectrum(sig), L, cutoff) == spectrum_oracle(sig, L, cutoff));
  }
}

TEST_CASE("spectrum edge cases") {
  const auto only_fiber = product_spectrum(SigmaSpectrum({0.0}), 2.0 * std::numbers::pi, 4.5);
  CHECK(only_fiber == std::vector<double>{0.0, 1.0, 1.0, 4.0, 4.0});
  CHECK(group_multiplicities(only_fiber) == std::vector<std::pair<double, int>>{{0.0, 1}, {1.0, 2}, {4.0, 2}});
  CHECK_THROWS_AS(SigmaSpectrum({}), DomainError);
  CHECK_THROWS_AS(SigmaSpectrum({0.0, 0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(SigmaSpectrum({0.5, 1.0}), DomainError);
  CHECK_THROWS_AS(product_spectrum(SigmaSpectrum({0.0}), -1.0, 4.0), DomainError);
}

TEST_CASE("spectral gap") {
  const SigmaSpectrum sig({0.0, 0.25, 3.0});
  CHECK(spectral_gap(sig, 2.0 * std::numbers::pi) == 0.25);
  const double k = 2.0 * std::numbers::pi / 20.0;
  CHECK(spectral_gap(sig, 20.0) == k * k);
  CHECK(spectral_gap(sig, 10.0) == 0.25);
  CHECK_THROWS_AS(spectral_gap(SigmaSpectrum({0.0}), 1.0), DomainError);
  // the gap is the first positive entry of the product spectrum
  const auto full = product_spectrum(sig, 20.0, 5.0);
  CHECK(full[1] == spectral_gap(sig, 20.0));
}

TEST_CASE("marked length spectrum") {
  for (double ls : {0.0, 0.3, 2.5})
    for (long n : {-2L, 0L, 1L, 3L}) {
      if (ls == 0.0 && n == 0) continue;
      const double e = mls_length(ls, n, 1.7);
      CHECK(std::abs(e * e - (ls * ls + (n * 1.7) * (n * 1.7))) <= 1e-12 * std::max(1.0, e * e));
    }
  CHECK_THROWS_AS(mls_length(0.0, 0, 1.0), DomainError);
}

TEST_CASE("length spectrum of a cyclic group") {
  // a = diag(e, 1/e) translates by 2; a^k by 2k
  const MobiusElement a = make_mobius(std::exp(1.0), 0.0, 0.0, std::exp(-1.0));
  const auto entries = enumerate_length_spectrum({a}, 3, 1.0, 0);
  REQUIRE(entries.size() == 3);
  for (int k = 1; k <= 3; ++k) {
    CHECK(entries[k - 1].ell_sigma == doctest::Approx(2.0 * k).epsilon(1e-12));
    CHECK(entries[k - 1].merged == 2);  // a^k and A^k share the trace
    CHECK(entries[k - 1].word.size() == static_cast<std::size_t>(k));
  }
}

TEST_CASE("length spectrum enumeration") {
  const std::vector<MobiusElement> gens{make_mobius(2, 1, 1, 1), make_mobius(3, 2, 4, 3)};
  const auto entries = enumerate_length_spectrum(gens, 3, 0.8, 1);
  CHECK(std::is_sorted(entries.begin(), entries.end(),
                       [](const LengthEntry& x, const LengthEntry& y) { return x.ell < y.ell; }));
  std::set<std::pair<long, long long>> keys;
  for (const auto& e : entries) {
    CHECK(e.ell == doctest::Approx(std::hypot(e.ell_sigma, e.n * 0.8)));
    if (!e.word.empty()) {
      CHECK(e.trace > 2.0);
      CHECK(e.ell_sigma == doctest::Approx(2.0 * std::acosh(e.trace / 2.0)));
      for (std::size_t i = 1; i < e.word.size(); ++i) {
        const bool cancels = e.word[i] != e.word[i - 1] && std::tolower(e.word[i]) == std::tolower(e.word[i - 1]);
        CHECK_FALSE(cancels);
      }
    }
    keys.insert({e.n, std::llround(e.trace * 1e6)});
  }
  CHECK(keys.size() == entries.size());
  CHECK_THROWS_AS(enumerate_length_spectrum(gens, 9, 1.0, 1), DomainError);
}

TEST_CASE("isoperimetric bound") {
  const double v = 1.0, L = 1.0;
  const double u = v / (2 * std::numbers::pi * L);
  CHECK(isoperimetric_bound(v, L) == 2 * std::numbers::pi * L * std::sqrt(2 * v / (L * std::numbers::pi) + u * u));
  CHECK(isoperimetric_bound(1.0, 1.0) == doctest::Approx(5.1120193).epsilon(1e-7));
  CHECK(isoperimetric_bound(0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(isoperimetric_bound(-1.0, 1.0), DomainError);
}

TEST_CASE("tube profiles") {
  const auto rows = tube_profiles(1.0, {0.0, 1e-6, 1.0, 3.0}, 1.0, {0.5, 2.0});
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(rows[1].ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(rows[2].area == doctest::Approx(2 * std::numbers::pi * std::sinh(1.0)));
  CHECK(rows[2].bound == doctest::Approx(9.8693204).epsilon(1e-7));
  CHECK(rows[2].sign == -1);
  for (const auto& r : rows) {
    if (r.volume > 0) CHECK(r.ratio == doctest::Approx(r.area / r.bound).epsilon(1e-12));
    CHECK(r.bound == doctest::Approx(isoperimetric_bound(r.volume, 1.0)));
  }
  CHECK(rows[4].family == "collar");
  CHECK(rows[4].volume == doctest::Approx(2.0 * std::sinh(0.5)));
}

TEST_CASE("curvature gap constant and moduli dimension") {
  const auto g = epsilon0(2.0, std::numbers::pi, 1.0);
  CHECK(g.delta == 1.0);
  CHECK(g.eps0 == 0.125);
  CHECK(epsilon0(0.5, 1.0, 2.0).delta == 0.25);
  CHECK(moduli_dimension(2) == 7);
  CHECK(moduli_dimension(3) == 13);
  CHECK_THROWS_AS(moduli_dimension(1), DomainError);
  CHECK_THROWS_AS(moduli_dimension(0), DomainError);
}

TEST_CASE("curvature deviation") {
  const auto p = curvature_deviation(MetricSpec::product(1.0), SamplingBox{}, 200, 0);
  CHECK(p.estimate == 0.0);
  CHECK(p.stderr_ == 0.0);
  WarpProfile w;
  SamplingBox far{3.0, 4.0, 0.5, 2.0, 0.0, 1.0};
  CHECK(curvature_deviation(MetricSpec::warped(w), far, 200, 0).estimate == 0.0);
  const auto a = curvature_deviation(MetricSpec::warped(w), SamplingBox{}, 500, 3);
  const auto b = curvature_deviation(MetricSpec::warped(w), SamplingBox{}, 500, 3);
  CHECK(a.estimate > 0.0);
  CHECK(a.estimate == b.estimate);
  CHECK_THROWS_AS(curvature_deviation(MetricSpec::product(1.0), SamplingBox{}, 99, 0), DomainError);
  SamplingBox bad;
  bad.y0 = 0.0;
  CHECK_THROWS_AS(curvature_deviation(MetricSpec::product(1.0), bad, 200, 0), DomainError);
}
