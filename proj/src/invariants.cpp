#include "splitlab/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "splitlab/errors.hpp"
#include "splitlab/parallel.hpp"

namespace splitlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be > 0");
  return v;
}

}  // namespace

SigmaSpectrum::SigmaSpectrum(std::vector<double> eigenvalues) : values_(std::move(eigenvalues)) {
  if (values_.empty()) throw DomainError("surface spectrum is empty");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("surface eigenvalues must be finite and >= 0");
  std::sort(values_.begin(), values_.end());
  if (values_[0] != 0.0) throw DomainError("surface spectrum must start with the eigenvalue 0");
  if (values_.size() > 1 && values_[1] == 0.0) {
    throw DomainError("eigenvalue 0 must be simple (connected surface)");
  }
}

double SigmaSpectrum::lambda1() const {
  for (double v : values_)
    if (v > 0.0) return v;
  throw DomainError("surface spectrum has no positive eigenvalue");
}

SigmaSpectrum read_spectrum_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open spectrum file " + path);
  std::vector<double> vals;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double v;
    std::string rest;
    if (!(ls >> v) || (ls >> rest)) {
      throw DomainError("spectrum line " + std::to_string(lineno) + ": expected one number");
    }
    vals.push_back(v);
  }
  return SigmaSpectrum(std::move(vals));
}

std::vector<double> product_spectrum(const SigmaSpectrum& sig, double L, double cutoff) {
  positive(L, "fiber length L");
  positive(cutoff, "cutoff");
  std::vector<double> out;
  for (double lam : sig.eigenvalues()) {
    for (long n = 0;; ++n) {
      const double k = kTwoPi * static_cast<double>(n) / L;
      const double val = lam + k * k;
      if (val > cutoff) break;
      out.push_back(val);
      if (n != 0) out.push_back(val);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<double, int>> group_multiplicities(const std::vector<double>& sorted) {
  std::vector<std::pair<double, int>> out;
  for (double v : sorted) {
    if (!out.empty() && out.back().first == v) ++out.back().second;
    else out.emplace_back(v, 1);
  }
  return out;
}

double spectral_gap(const SigmaSpectrum& sig, double L) {
  positive(L, "fiber length L");
  const double k = kTwoPi / L;
  return std::min(sig.lambda1(), k * k);
}

double mls_length(double ell_sigma, long n, double L) {
  positive(L, "fiber length L");
  if (!(ell_sigma >= 0.0) || !std::isfinite(ell_sigma)) throw DomainError("surface length must be >= 0");
  if (ell_sigma == 0.0 && n == 0) throw DomainError("not a closed geodesic class: (0, 0)");
  return std::hypot(ell_sigma, static_cast<double>(n) * L);
}

std::vector<LengthEntry> enumerate_length_spectrum(const std::vector<MobiusElement>& generators, int max_word,
                                                   double L, long n_max) {
  positive(L, "fiber length L");
  if (max_word < 0 || max_word > 8) throw DomainError("max_word must be in [0, 8]");
  if (n_max < 0) throw DomainError("n_max must be >= 0");
  if (generators.size() > 26) throw DomainError("at most 26 generators");
  for (const auto& g : generators) make_mobius(g.a, g.b, g.c, g.d);

  // letters 2k and 2k+1 are generator k and its inverse
  std::vector<MobiusElement> letters;
  std::vector<char> names;
  for (std::size_t k = 0; k < generators.size(); ++k) {
    letters.push_back(generators[k]);
    letters.push_back(generators[k].inverse());
    names.push_back(static_cast<char>('a' + k));
    names.push_back(static_cast<char>('A' + k));
  }

  std::vector<LengthEntry> raw;
  for (long n = -n_max; n <= n_max; ++n) {
    if (n == 0) continue;
    raw.push_back({"", 2.0, 0.0, n, mls_length(0.0, n, L), 1});
  }

  struct Word {
    std::string name;
    int last;
    MobiusElement m;
  };
  std::vector<Word> level{{"", -1, MobiusElement::identity()}};
  for (int len = 1; len <= max_word; ++len) {
    std::vector<Word> next;
    for (const auto& w : level) {
      for (int l = 0; l < static_cast<int>(letters.size()); ++l) {
        if (w.last >= 0 && (l ^ 1) == w.last) continue;  // not reduced
        next.push_back({w.name + names[l], l, w.m * letters[l]});
      }
    }
    for (const auto& w : next) {
      const double tr = std::abs(w.m.trace());
      if (!(tr > 2.0 + kHyperbolicTraceBand)) continue;
      const double ls = translation_length(w.m);
      for (long n = -n_max; n <= n_max; ++n) raw.push_back({w.name, tr, ls, n, mls_length(ls, n, L), 1});
    }
    level = std::move(next);
  }

  // merge by (n, |trace|); stable sort keeps the shortest word first
  std::stable_sort(raw.begin(), raw.end(), [](const LengthEntry& a, const LengthEntry& b) {
    return a.n != b.n ? a.n < b.n : a.trace < b.trace;
  });
  std::vector<LengthEntry> merged;
  for (const auto& e : raw) {
    if (!merged.empty()) {
      LengthEntry& last = merged.back();
      if (last.n == e.n && std::abs(last.trace - e.trace) <= 1e-9 * std::max(1.0, e.trace)) {
        ++last.merged;
        if (e.word.size() < last.word.size()) {
          const int count = last.merged;
          last = e;
          last.merged = count;
        }
        continue;
      }
    }
    merged.push_back(e);
  }
  std::stable_sort(merged.begin(), merged.end(), [](const LengthEntry& a, const LengthEntry& b) {
    if (a.ell != b.ell) return a.ell < b.ell;
    if (a.n != b.n) return a.n < b.n;
    return a.word < b.word;
  });
  return merged;
}

double isoperimetric_bound(double v, double L) {
  positive(L, "fiber length L");
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("volume must be >= 0");
  const double u = v / (kTwoPi * L);
  return kTwoPi * L * std::sqrt(2.0 * v / (L * std::numbers::pi) + u * u);
}

std::vector<TubeRow> tube_profiles(double L, const std::vector<double>& r_list, double ell_collar,
                                   const std::vector<double>& w_list) {
  positive(L, "fiber length L");
  positive(ell_collar, "collar geodesic length");
  std::vector<TubeRow> rows;
  auto finish = [](TubeRow& r) {
    r.sign = r.area > r.bound ? 1 : (r.area < r.bound ? -1 : 0);
  };
  for (double r : r_list) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("disk tube radius must be >= 0");
    TubeRow row{"disk", r};
    const double sh = std::sinh(0.5 * r);
    const double u = 2.0 * sh * sh;  // cosh r - 1
    row.volume = kTwoPi * L * u;
    row.area = kTwoPi * L * std::sinh(r);
    row.bound = isoperimetric_bound(row.volume, L);
    // area / bound = sinh r / sqrt(4u + u^2), rewritten to stay finite as r -> 0
    row.ratio = 2.0 * std::cosh(0.5 * r) / (std::sqrt(2.0) * std::sqrt(4.0 + u));
    finish(row);
    rows.push_back(row);
  }
  for (double w : w_list) {
    positive(w, "collar width");
    TubeRow row{"collar", w};
    row.volume = 2.0 * L * ell_collar * std::sinh(w);
    row.area = 2.0 * L * ell_collar * std::cosh(w);
    row.bound = isoperimetric_bound(row.volume, L);
    row.ratio = row.area / row.bound;
    finish(row);
    rows.push_back(row);
  }
  return rows;
}

GapConstant epsilon0(double lambda1, double L, double diam) {
  positive(lambda1, "lambda1");
  positive(L, "fiber length L");
  positive(diam, "diameter");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double delta = std::min(0.5 * lambda1, pi2 / (L * L));
  return {delta, delta / (4.0 * (1.0 + diam * diam))};
}

double curvature_deviation_density(const MetricSpec& spec, const ChartPoint& p) {
  const Mat2 rv = r_v_operator(spec, p);
  return rv.squaredNorm() + nabla_v_norm2(spec, p);
}

MonteCarloEstimate curvature_deviation(const MetricSpec& spec, const SamplingBox& box, std::size_t N,
                                       std::uint64_t seed) {
  box.validate();
  if (N < 100) throw DomainError("curvature_deviation needs N >= 100");
  std::vector<double> vals(N);
  parallel_for(N, [&](std::size_t k) {
    SplitMix64 rng(seed, k);
    const double u = rng.uniform(), v = rng.uniform(), w = rng.uniform();
    const ChartPoint p = box.at(u, v, w);
    const double vol = std::sqrt(metric_at(spec, p).determinant());
    vals[k] = curvature_deviation_density(spec, p) * vol;
  });
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= static_cast<double>(N);
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  const double V = box.coordinate_volume();
  MonteCarloEstimate est;
  est.estimate = V * mean;
  est.stderr_ = V * std::sqrt(ss / static_cast<double>(N - 1) / static_cast<double>(N));
  est.samples = N;
  return est;
}

int moduli_dimension(int genus) {
  if (genus < 2) throw DomainError("theorem hypothesis chi < 0 violated: genus must be >= 2");
  return 6 * genus - 6 + 1;
}

}  // namespace splitlab
