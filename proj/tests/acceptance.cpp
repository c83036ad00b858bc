// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria (0 when all pass).
//
//   acceptance --cli <path to ec3pt> [--only 1,5,12]

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "ec3pt/pipeline.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ec3pt;

namespace {

// Tolerances and sizes.
constexpr double kCountLo = 0.015, kCountHi = 0.027;
constexpr double kRangeLo = 0.04, kRangeHi = 0.07;
constexpr double kMedianExponentMax = 0.6;
constexpr double kSemilogR2Min = 0.95;
constexpr double kRatioLo = 0.7, kRatioHi = 1.1;
constexpr double kPtRelErrMax = 0.05;
constexpr double kPtRatioLo = 3.0, kPtRatioHi = 5.0;
constexpr double kGadgetTol = 0.2;
constexpr double kMixtureMeanTol = 0.02;
constexpr double kPdfIntegralTol = 1e-8;
constexpr double kSurvivalSigmas = 3.0;
constexpr std::size_t kCountSamples = 500;
constexpr std::size_t kRangeSamples = 200;
// Usable splittings kept per n. A few percent of draws have no grown
// instance, so more are drawn and the first usable ones kept.
constexpr std::size_t kDeltaSamples = 1000;
constexpr std::size_t kDeltaSamplesN200 = 4000;
constexpr std::size_t kDeltaDraws = 1080;
constexpr std::size_t kDeltaDrawsN200 = 4150;
constexpr std::size_t kSurvivalTrials = 1000;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentConfig base_config(std::size_t samples) {
  ExperimentConfig c;
  c.samples = samples;
  c.master_seed = kSeed;
  c.enumeration_cap = default_cap();
  c.jobs = default_jobs();
  return c;
}

Outcome solution_count_growth() {
  const std::vector<std::size_t> ns{50, 100, 150, 200, 250, 300};
  const auto rows = run_counting(base_config(kCountSamples), ns);
  std::vector<Point> pts;
  std::size_t fewest = SIZE_MAX;
  for (const auto& r : rows) {
    // Geometric mean count.
    pts.push_back({double(r.n), std::exp(r.mean_ln_count)});
    fewest = std::min(fewest, r.used);
  }
  const auto f = fit_exp_growth(pts);
  const bool pass = f.estimate >= kCountLo && f.estimate <= kCountHi;
  return {pass, fmt("c_hat=%.5f +- %.5f (r2=%.3f, min used/n=%zu of %zu) in [%.3f, %.3f]", f.estimate,
                    f.stderr_, f.r_squared, fewest, kCountSamples, kCountLo, kCountHi)};
}

Outcome range_slope() {
  const std::vector<std::size_t> ns{100, 200, 300, 400};
  const auto rows = run_range(base_config(kRangeSamples), ns);
  std::vector<Point> pts;
  for (const auto& r : rows) pts.push_back({double(r.n), r.mean_range});
  const auto f = fit_linear(pts);
  const bool pass = f.estimate >= kRangeLo && f.estimate <= kRangeHi;
  return {pass, fmt("slope=%.5f +- %.5f over n=100..400 (%zu samples/n) in [%.2f, %.2f]", f.estimate,
                    f.stderr_, kRangeSamples, kRangeLo, kRangeHi)};
}

struct DeltaBatches {
  std::vector<std::size_t> ns;
  std::vector<std::vector<double>> deltas;  // ok samples per n
  std::size_t negative = 0;
  std::size_t total = 0;
};

const DeltaBatches& delta_batches() {
  static const DeltaBatches b = [] {
    DeltaBatches out;
    out.ns = {100, 200, 300, 400};
    for (std::size_t n : out.ns) {
      const std::size_t want = n == 200 ? kDeltaSamplesN200 : kDeltaSamples;
      auto cfg = base_config(n == 200 ? kDeltaDrawsN200 : kDeltaDraws);
      cfg.n = n;
      cfg.count_solutions = false;
      std::vector<double> d;
      for (const auto& r : run_delta_e(cfg)) {
        if (r.status != SampleStatus::kOk || d.size() == want) continue;
        d.push_back(r.delta_e);
        out.negative += r.delta_e < 0.0;
        ++out.total;
      }
      out.deltas.push_back(std::move(d));
    }
    return out;
  }();
  return b;
}

Outcome nonnegativity() {
  const auto& b = delta_batches();
  return {b.negative == 0 && b.total > 0,
          fmt("%zu of %zu splitting records negative", b.negative, b.total)};
}

Outcome sub_sqrt_scaling() {
  const auto& b = delta_batches();
  std::vector<Point> pts;
  std::string per_n;
  std::size_t fewest = SIZE_MAX;
  for (std::size_t k = 0; k < b.ns.size(); ++k) {
    std::vector<double> sq;
    for (double d : b.deltas[k]) sq.push_back(d * d);
    const std::vector<double> q{0.5};
    const double med = summarize(sq, q).percentiles[0];
    pts.push_back({double(b.ns[k]), med});
    per_n += fmt(" n=%zu:%.4g", b.ns[k], med);
    fewest = std::min(fewest, sq.size());
  }
  const auto f = fit_power_law(pts);
  const bool pass = f.estimate < kMedianExponentMax && fewest >= kDeltaSamples;
  return {pass, fmt("median-square exponent=%.4f +- %.4f < %.2f (min samples/n=%zu;%s)", f.estimate,
                    f.stderr_, kMedianExponentMax, fewest, per_n.c_str())};
}

Outcome exponential_shape() {
  const auto& b = delta_batches();
  const auto& d = b.deltas[1];
  const auto f = semilog_rank_fit(d, 0.9);
  double msq = 0;
  for (double v : d) msq += v * v;
  msq /= double(d.size());
  const std::vector<double> q{0.75};
  const double p75 = summarize(d, q).percentiles[0];
  const double ratio = p75 * p75 / msq;
  const bool pass = d.size() >= kDeltaSamplesN200 && f.r_squared >= kSemilogR2Min &&
                    ratio >= kRatioLo && ratio <= kRatioHi;
  return {pass, fmt("n=200, %zu samples: semilog r2=%.4f >= %.2f; p75^2/mean(sq)=%.4f in [%.1f, %.1f]",
                    d.size(), f.r_squared, kSemilogR2Min, ratio, kRatioLo, kRatioHi)};
}

Outcome optimizer_exactness() {
  std::size_t checked = 0, mismatches = 0;
  for (std::uint64_t s = 0; checked < 200; ++s) {
    const std::size_t n = 24 + s % 10;
    const auto [t, map] =
        trim(generate(n, std::size_t(std::lround(0.62 * double(n))), derive_seed(kSeed + 6, s)));
    if (t.n_vars() == 0 || t.n_vars() > 25) continue;
    const auto sols = oracle::exhaustive_solutions(t);
    if (sols.empty()) continue;
    CorrectionVector cv;
    try {
      cv = correction_coefficients(t);
    } catch (const UntrimmedDegeneracy&) {
      continue;
    }
    const double tol = tie_tolerance(cv);
    for (Direction dir : {Direction::kMin, Direction::kMax}) {
      const auto want = oracle::best_of(sols, cv.weights, dir == Direction::kMin, tol);
      const auto got = optimize_over_solutions(t, cv, dir);
      mismatches += !(got.argbest == want.x) || std::abs(got.value - want.value) > 1e-12;
    }
    ++checked;
  }
  return {mismatches == 0, fmt("%zu mismatches over %zu instances (MIN and MAX)", mismatches, checked)};
}

Outcome solver_exactness() {
  std::size_t mismatches = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const std::size_t n = 12 + s % 9;
    const Instance inst =
        generate(n, std::size_t(std::lround(0.62 * double(n))), derive_seed(kSeed + 7, s));
    const auto got = enumerate(inst);
    mismatches += got.capped || got.solutions != oracle::exhaustive_solutions(inst);
  }
  return {mismatches == 0, fmt("%zu mismatches over 200 instances, n in [12, 20]", mismatches)};
}

Outcome pt_validation() {
  const auto f = fixtures::pt_fixture();
  const std::vector<double> lambdas{0.01, 0.02};
  const auto r = pt_gap_check(f.inst, f.xa, f.xb, lambdas);
  const double ratio = r[1].rel_error / r[0].rel_error;
  const bool pass = r[0].rel_error <= kPtRelErrMax && ratio >= kPtRatioLo && ratio <= kPtRatioHi;
  return {pass, fmt("n=%zu fixture (draw %llu): rel err %.3e at 0.01 <= %.2f; err(0.02)/err(0.01)=%.3f in [%.0f, %.0f]",
                    f.inst.n_vars(), static_cast<unsigned long long>(f.seed), r[0].rel_error,
                    kPtRelErrMax, ratio, kPtRatioLo, kPtRatioHi)};
}

Outcome gadget_exponents() {
  std::vector<double> lambdas;
  for (int i = 0; i < 7; ++i) lambdas.push_back(3e-3 * std::pow(10.0, i / 6.0));
  const auto g3 = three_flip_gadget();
  const auto g4 = four_flip_gadget();
  const double s3 = splitting_exponent(g3.inst, {0, 1}, lambdas, g3.field).fit.estimate;
  const double s4 = splitting_exponent(g4.inst, {0, 1}, lambdas, g4.field).fit.estimate;
  const bool pass = std::abs(s3 - 3.0) <= kGadgetTol && std::abs(s4 - 4.0) <= kGadgetTol;
  return {pass, fmt("slopes %.4f (3 +- %.1f) and %.4f (4 +- %.1f)", s3, kGadgetTol, s4, kGadgetTol)};
}

Outcome clause_inequality() {
  const std::vector<double> lambdas{0.01, 0.05, 0.1};
  std::size_t held = 0, total = 0;
  double lo = INFINITY, hi = -INFINITY;
  const auto fx = fixtures::growth_fixtures(20);
  for (const auto& f : fx)
    for (const auto& p : clause_monotonicity_check(f.base, f.grown, lambdas)) {
      held += p.holds;
      ++total;
      lo = std::min(lo, p.difference);
      hi = std::max(hi, p.difference);
    }
  return {held == total, fmt("%zu of %zu (fixture, lambda) points strictly inside (0, 1); differences in [%.3g, %.3g]",
                             held, total, lo, hi)};
}

Outcome extreme_value_ops() {
  const SpacingModel mix{1.0, 0.02, 0.4};
  const auto x = sample_mixture_spacings(mix, 1000000, kSeed + 11);
  double sum = 0;
  for (double v : x) sum += v;
  const double target = mix.sigma / (mix.p * std::sqrt(2 * mix.c));
  const double mean_err = std::abs(sum / double(x.size()) - target) / target;

  // Composite Simpson on [0, 60 / rate], where the tail is below 1e-26.
  const double r = mix.p * mix.rate();
  const double top = 60.0 / r;
  const std::size_t cells = 200000;
  const double h = top / double(cells);
  double integral = spacing_mixture_pdf(mix, 0.0) + spacing_mixture_pdf(mix, top);
  for (std::size_t i = 1; i < cells; ++i)
    integral += (i % 2 ? 4.0 : 2.0) * spacing_mixture_pdf(mix, double(i) * h);
  integral *= h / 3.0;
  const double int_err = std::abs(integral - 1.0);

  const SpacingModel lev{1.0, 0.02, 1.0};
  const auto pairs = sample_lowest_levels(lev, 400, kSurvivalTrials, kSeed + 12);
  double worst = 0;
  for (double f : {0.5, 1.0, 2.0}) {
    const double d = f / lev.rate();
    const double p = spacing_survival(lev, d);
    std::size_t hits = 0;
    for (const auto& q : pairs) hits += (q.e1 - q.e0) > d;
    const double emp = double(hits) / double(pairs.size());
    worst = std::max(worst, std::abs(emp - p) / std::sqrt(p * (1 - p) / double(pairs.size())));
  }
  const bool pass = mean_err <= kMixtureMeanTol && int_err <= kPdfIntegralTol && worst <= kSurvivalSigmas;
  return {pass, fmt("mixture mean rel err %.2e <= %.2f; pdf integral err %.2e <= %.0e; survival worst %.2f sigma <= %.0f (%zu trials)",
                    mean_err, kMixtureMeanTol, int_err, kPdfIntegralTol, worst, kSurvivalSigmas,
                    kSurvivalTrials)};
}

std::string cli_path;

std::string capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), got);
  const int st = pclose(p);
  status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return out;
}

Outcome determinism() {
  if (cli_path.empty()) return {false, "no --cli path given"};
  const std::string base = cli_path + " delta --n 100 --samples 200 --seed 7 --jobs ";
  int s1 = 0, s8 = 0;
  const std::string a = capture(base + "1 2>/dev/null", s1);
  const std::string b = capture(base + "8 2>/dev/null", s8);
  const bool pass = s1 == 0 && s8 == 0 && !a.empty() && a == b;
  return {pass, fmt("jobs 1 vs 8: %zu vs %zu bytes, %s (exit %d/%d)", a.size(), b.size(),
                    a == b ? "identical" : "different", s1, s8)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--cli") && i + 1 < argc) {
      cli_path = argv[++i];
    } else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      for (const char* p = argv[++i]; *p;) {
        char* end;
        only.insert(int(std::strtol(p, &end, 10)));
        p = *end ? end + 1 : end;
      }
    } else {
      std::fprintf(stderr, "usage: acceptance --cli <ec3pt> [--only 1,2,...]\n");
      return 64;
    }
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"solution-count growth", solution_count_growth},
      {"range slope", range_slope},
      {"nonnegative splittings", nonnegativity},
      {"sub-sqrt(N) median scaling", sub_sqrt_scaling},
      {"exponential-like splittings at n=200", exponential_shape},
      {"optimizer exactness", optimizer_exactness},
      {"solver exactness", solver_exactness},
      {"perturbative gap validation", pt_validation},
      {"gadget splitting exponents", gadget_exponents},
      {"clause-addition inequality", clause_inequality},
      {"extreme-value laws", extreme_value_ops},
      {"CLI determinism across --jobs", determinism},
  };

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = int(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d criteria failed\n", failed);
  return failed;
}
