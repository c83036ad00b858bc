#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ec3pt/error.hpp"
#include "ec3pt/rng.hpp"

namespace ec3pt {

// Low-energy level statistics of a random energy landscape: per-level scale
// sigma (spread is sigma * sqrt(N)), entropy density c, and survival
// probability p of a level when a clause is added.
struct SpacingModel {
  double sigma = 1.0;
  double c = 0.02;
  double p = 1.0;

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw InvalidArgument("sigma must be positive");
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("c must be positive");
    if (!(p > 0.0) || !(p <= 1.0)) throw InvalidArgument("p must lie in (0, 1]");
  }
  // Rate of the single-spacing exponential, sqrt(2c)/sigma.
  double rate() const { return std::sqrt(2.0 * c) / sigma; }
};

// Predicted depth of the lowest level below the band centre, N sigma sqrt(2c).
inline double ground_shift(const SpacingModel& m, std::size_t n) {
  m.validate();
  if (n == 0) throw InvalidArgument("n must be positive");
  return static_cast<double>(n) * m.sigma * std::sqrt(2.0 * m.c);
}

// P(E1 - E0 > delta).
inline double spacing_survival(const SpacingModel& m, double delta) {
  m.validate();
  if (!(delta >= 0.0)) throw InvalidArgument("delta must be nonnegative");
  return std::exp(-m.rate() * delta);
}

// Probability that the k-th level (1-based) is the first survivor.
inline double mixture_weight(const SpacingModel& m, std::size_t k) {
  m.validate();
  if (k == 0) throw InvalidArgument("k is 1-based");
  if (m.p == 1.0) return k == 1 ? 1.0 : 0.0;
  return m.p * std::exp(static_cast<double>(k - 1) * std::log1p(-m.p));
}

// Erlang density of the sum of k independent spacings.
inline double erlang_density(const SpacingModel& m, std::size_t k, double x) {
  m.validate();
  if (k == 0) throw InvalidArgument("k is 1-based");
  if (!(x >= 0.0)) throw InvalidArgument("x must be nonnegative");
  const double b = m.rate();
  if (x == 0.0) return k == 1 ? b : 0.0;
  const double kk = static_cast<double>(k);
  return std::exp(kk * std::log(b) + (kk - 1.0) * std::log(x) - b * x -
                  std::lgamma(kk));
}

// Density of the spacing to the first surviving level.
inline double spacing_mixture_pdf(const SpacingModel& m, double x) {
  m.validate();
  if (!(x >= 0.0)) throw InvalidArgument("x must be nonnegative");
  const double r = m.p * m.rate();
  return r * std::exp(-r * x);
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct FitResult {
  double estimate = 0.0;  // slope on the fitted scale
  double stderr_ = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
  std::size_t n_points = 0;
  double window_lo = 0.0;  // x range of the data
  double window_hi = 0.0;
  std::string model;
};

namespace detail {

inline FitResult ols(std::span<const Point> pts, const std::string& model) {
  if (pts.size() < 3) throw FitError("need at least 3 points");
  double sx = 0, sy = 0;
  for (const auto& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw FitError("non-finite point");
    sx += p.x;
    sy += p.y;
  }
  const double n = static_cast<double>(pts.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
    syy += (p.y - my) * (p.y - my);
  }
  if (!(sxx > 0.0)) throw FitError("degenerate design: all x equal");
  FitResult f;
  f.model = model;
  f.estimate = sxy / sxx;
  f.intercept = my - f.estimate * mx;
  double ssr = 0;
  for (const auto& p : pts) {
    const double e = p.y - (f.intercept + f.estimate * p.x);
    ssr += e * e;
  }
  f.stderr_ = std::sqrt(ssr / (n - 2.0) / sxx);
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  f.n_points = pts.size();
  auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(),
                                      [](const Point& a, const Point& b) { return a.x < b.x; });
  f.window_lo = lo->x;
  f.window_hi = hi->x;
  return f;
}

}  // namespace detail

inline FitResult fit_linear(std::span<const Point> pts) {
  return detail::ols(pts, "linear");
}

// Slope of ln y against x.
inline FitResult fit_exp_growth(std::span<const Point> pts) {
  std::vector<Point> t;
  t.reserve(pts.size());
  for (const auto& p : pts) {
    if (!(p.y > 0.0)) throw FitError("exponential fit needs positive y");
    t.push_back({p.x, std::log(p.y)});
  }
  FitResult f = detail::ols(t, "exp_growth");
  auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(),
                                      [](const Point& a, const Point& b) { return a.x < b.x; });
  f.window_lo = lo->x;
  f.window_hi = hi->x;
  return f;
}

// Slope of ln y against ln x.
inline FitResult fit_power_law(std::span<const Point> pts) {
  std::vector<Point> t;
  t.reserve(pts.size());
  for (const auto& p : pts) {
    if (!(p.x > 0.0) || !(p.y > 0.0)) throw FitError("power-law fit needs positive data");
    t.push_back({std::log(p.x), std::log(p.y)});
  }
  FitResult f = detail::ols(t, "power_law");
  auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(),
                                      [](const Point& a, const Point& b) { return a.x < b.x; });
  f.window_lo = lo->x;
  f.window_hi = hi->x;
  return f;
}

// Percentile at level q in [0,1] of sorted data: linear interpolation between
// order statistics at position (size - 1) * q.
inline double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("percentile of empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("percentile level outside [0,1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct SummaryStats {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample standard deviation / sqrt(count)
  std::size_t count = 0;
  std::vector<double> levels;
  std::vector<double> percentiles;
};

inline SummaryStats summarize(std::span<const double> samples,
                              std::span<const double> levels) {
  if (samples.empty()) throw InvalidArgument("summarize needs at least one sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  SummaryStats s;
  s.count = sorted.size();
  double sum = 0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(s.count - 1) / static_cast<double>(s.count));
  }
  for (double q : levels) {
    s.levels.push_back(q);
    s.percentiles.push_back(percentile_sorted(sorted, q));
  }
  return s;
}

// Values in decreasing order paired with 1-based ranks.
inline std::vector<std::pair<std::size_t, double>> sorted_ranks(std::span<const double> samples) {
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end(), std::greater<>());
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(i + 1, v[i]);
  return out;
}

// Linear fit of ln(value) against rank for the decreasing rank plot, keeping
// ranks strictly inside the central `keep` fraction. Non-positive values are
// dropped first.
inline FitResult semilog_rank_fit(std::span<const double> samples, double keep = 0.9) {
  if (!(keep > 0.0 && keep <= 1.0)) throw InvalidArgument("keep must lie in (0, 1]");
  std::vector<double> pos;
  for (double v : samples)
    if (v > 0.0) pos.push_back(v);
  const auto ranks = sorted_ranks(pos);
  // Ranks dropped from each end; the epsilon absorbs rounding in 1 - keep.
  const auto drop = static_cast<std::size_t>(
      std::floor(0.5 * (1.0 - keep) * static_cast<double>(ranks.size()) + 1e-9));
  std::vector<Point> pts;
  for (const auto& [r, v] : ranks)
    if (r > drop && r + drop <= ranks.size())
      pts.push_back({static_cast<double>(r), std::log(v)});
  FitResult f = fit_linear(pts);
  f.model = "semilog_rank";
  return f;
}

// Location-scale Gumbel law for minima, F(x) = 1 - exp(-exp((x - mu)/beta)).
struct GumbelMin {
  double mu = 0.0;
  double beta = 1.0;
  double cdf(double x) const { return 1.0 - std::exp(-std::exp((x - mu) / beta)); }
};

inline GumbelMin fit_gumbel_min(std::span<const double> samples) {
  if (samples.size() < 2) throw FitError("need at least 2 samples");
  double sum = 0;
  for (double v : samples) sum += v;
  const double mean = sum / static_cast<double>(samples.size());
  double ss = 0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(samples.size() - 1);
  if (!(var > 0.0)) throw FitError("zero-variance sample");
  GumbelMin g;
  g.beta = std::sqrt(6.0 * var) / std::numbers::pi;
  g.mu = mean + std::numbers::egamma * g.beta;
  return g;
}

// Kolmogorov-Smirnov distance between the sample and a continuous cdf.
template <class Cdf>
double ks_statistic(std::span<const double> samples, Cdf&& cdf) {
  if (samples.empty()) throw InvalidArgument("empty sample");
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

// Monte Carlo samplers. Each trial draws round(exp(cN)) levels from
// N(0, sigma^2 N) and uses its own stream derive_seed(seed, trial).

struct LowestPair {
  double e0 = 0.0;
  double e1 = 0.0;
};

inline std::vector<LowestPair> sample_lowest_levels(const SpacingModel& m, std::size_t n,
                                                    std::size_t trials, std::uint64_t seed) {
  m.validate();
  const double levels = std::round(std::exp(m.c * static_cast<double>(n)));
  if (!(levels >= 2.0) || levels > 1e8) throw InvalidArgument("exp(cN) out of sampling range");
  const auto count = static_cast<std::size_t>(levels);
  const double scale = m.sigma * std::sqrt(static_cast<double>(n));
  std::vector<LowestPair> out(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    double a = INFINITY, b = INFINITY;
    for (std::size_t i = 0; i < count; ++i) {
      const double e = scale * rng.normal();
      if (e < a) {
        b = a;
        a = e;
      } else if (e < b) {
        b = e;
      }
    }
    out[t] = {a, b};
  }
  return out;
}

// Spacings to the first survivor: successive spacings are exponential with
// the model rate and each level survives independently with probability p.
inline std::vector<double> sample_mixture_spacings(const SpacingModel& m, std::size_t samples,
                                                   std::uint64_t seed) {
  m.validate();
  Rng rng(seed);
  const double mean = 1.0 / m.rate();
  std::vector<double> out(samples);
  for (auto& x : out) {
    double acc = 0;
    do acc += rng.exponential(mean);
    while (!(rng.uniform() < m.p));
    x = acc;
  }
  return out;
}

}  // namespace ec3pt
