#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ec3pt/error.hpp"
#include "ec3pt/evstats.hpp"
#include "ec3pt/instance.hpp"
#include "ec3pt/optimizer.hpp"
#include "ec3pt/perturbation.hpp"
#include "ec3pt/rng.hpp"
#include "ec3pt/solver.hpp"
#include "ec3pt/spectrum.hpp"

namespace ec3pt {

// Satisfiability threshold of the random ensemble.
inline constexpr double kAlphaThreshold = 0.626;

// How x0, the optimum after the clause is added, is selected.
enum class X0Mode {
  kGrownCoefficients,  // argmin of the grown instance's own corrections
  kBaseCoefficients,   // argmin of the base corrections over surviving solutions
};

namespace detail {

inline std::uint64_t env_uint(const char* name, std::uint64_t fallback) {
  const char* s = std::getenv(name);
  if (s == nullptr || *s == '\0') return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0' || v == 0)
    throw InvalidArgument(std::string(name) + " must be a positive integer");
  return v;
}

}  // namespace detail

// EC3PT_CAP overrides the enumeration cap default.
inline std::uint64_t default_cap() { return detail::env_uint("EC3PT_CAP", 100'000'000); }

// EC3PT_JOBS overrides the worker count default (hardware concurrency).
inline std::size_t default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return detail::env_uint("EC3PT_JOBS", hw == 0 ? 1 : hw);
}

struct ExperimentConfig {
  std::size_t n = 200;
  double alpha = 0.62;
  std::size_t samples = 100;
  std::uint64_t master_seed = 1;
  std::uint64_t enumeration_cap = 100'000'000;
  bool spectral_checks = false;  // exact-diagonalization check where n_post <= 12
  std::size_t jobs = 1;
  std::size_t max_unsat_retries = 1000;
  std::size_t max_clause_retries = 64;
  X0Mode x0_mode = X0Mode::kGrownCoefficients;
  bool count_solutions = true;  // fill count_before / count_after in delta runs
  bool record_timing = false;   // otherwise ms is written as 0

  std::size_t m() const { return static_cast<std::size_t>(std::lround(alpha * static_cast<double>(n))); }

  void validate() const {
    if (n < 3) throw InvalidArgument("n must be at least 3");
    if (!(alpha > 0.0 && alpha <= kAlphaThreshold))
      throw InvalidArgument("alpha must lie in (0, 0.626]");
    if (samples == 0) throw InvalidArgument("samples must be at least 1");
    if (enumeration_cap == 0) throw InvalidArgument("cap must be positive");
    if (m() == 0) throw InvalidArgument("alpha * n rounds to zero clauses");
  }
};

// Seed of sample i at size n. Shared by all experiments, so the counting,
// range and splitting runs see the same instances for equal (seed, n, i).
inline std::uint64_t sample_seed(std::uint64_t master, std::size_t n, std::size_t i) {
  return derive_seed(derive_seed(master, n), i);
}

enum class SampleStatus {
  kOk,
  kEmptyTrim,   // trimmed instance has no variables; discarded
  kDegenerate,  // no satisfiable grown instance within the clause retries
  kCapped,      // counting experiments: count above the cap
  kError,       // any other library error
};

inline const char* status_name(SampleStatus s) {
  switch (s) {
    case SampleStatus::kOk: return "ok";
    case SampleStatus::kEmptyTrim: return "empty_trim";
    case SampleStatus::kDegenerate: return "degenerate";
    case SampleStatus::kCapped: return "capped";
    case SampleStatus::kError: return "error";
  }
  return "unknown";
}

struct DeltaRecord {
  std::size_t sample_index = 0;
  std::size_t n_pre = 0;
  std::size_t n_post = 0;
  std::size_t m = 0;  // clauses before trimming
  std::size_t m_post = 0;
  std::uint64_t count_before = 0;
  std::uint64_t count_after = 0;
  bool capped = false;
  double delta_e = 0.0;  // in units of lambda^4
  std::size_t retries = 0;  // unsatisfiable draws plus clause resamples
  std::size_t clause_retries = 0;
  bool random_clause_contradicts = false;
  int spectral_ok = -1;  // -1 not run
  std::uint64_t ms = 0;
  SampleStatus status = SampleStatus::kOk;
  std::string message;
};

// Runs f(i) for i in [0, count) on `jobs` workers. Results must be written to
// per-index slots; f must not throw.
template <class F>
void parallel_for(std::size_t count, std::size_t jobs, F&& f) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const std::size_t workers = std::min(jobs, count);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) f(i);
    });
  for (auto& t : pool) t.join();
}

namespace detail {

inline std::uint64_t elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::steady_clock::now() - t0)
                                        .count());
}

// True if a uniformly drawn new clause has bit sum != 1 under x.
inline bool random_clause_contradicts(const Instance& inst, const Assignment& x,
                                      std::uint64_t seed) {
  const std::size_t n = inst.n_vars();
  if (n < 3 || choose3(n) == inst.n_clauses()) return false;
  Rng rng(seed);
  for (;;) {
    const Var a = static_cast<Var>(rng.below(n));
    const Var b = static_cast<Var>(rng.below(n));
    const Var c = static_cast<Var>(rng.below(n));
    if (a == b || b == c || a == c) continue;
    const Clause cl = make_clause(a, b, c);
    if (inst.contains_clause(cl)) continue;
    return x[cl[0]] + x[cl[1]] + x[cl[2]] != 1;
  }
}

}  // namespace detail

// One splitting sample. Streams of sample_seed: 0 instance, 1 random-clause
// probe, 2 + r contradicting clause attempt r.
inline DeltaRecord run_delta_sample(const ExperimentConfig& cfg, std::size_t i) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t s = sample_seed(cfg.master_seed, cfg.n, i);
  DeltaRecord rec;
  rec.sample_index = i;
  rec.n_pre = cfg.n;
  rec.m = cfg.m();
  try {
    std::size_t unsat = 0;
    const Instance inst =
        generate_satisfiable(cfg.n, cfg.m(), derive_seed(s, 0), cfg.max_unsat_retries, &unsat);
    rec.retries = unsat;
    const Instance base = trim(inst).first;
    rec.n_post = base.n_vars();
    rec.m_post = base.n_clauses();
    if (base.n_vars() == 0) {
      rec.status = SampleStatus::kEmptyTrim;
    } else {
      const CorrectionVector cv_base = correction_coefficients(base);
      const Assignment x1 = optimize_over_solutions(base, cv_base, Direction::kMin).argbest;
      rec.random_clause_contradicts = detail::random_clause_contradicts(base, x1, derive_seed(s, 1));

      std::optional<Instance> grown;
      for (std::size_t r = 0; r < cfg.max_clause_retries && !grown; ++r) {
        Instance g = add_contradicting_clause(base, x1, derive_seed(s, 2 + r));
        if (is_satisfiable(g))
          grown = std::move(g);
        else
          ++rec.clause_retries;
      }
      rec.retries += rec.clause_retries;
      if (!grown) {
        rec.status = SampleStatus::kDegenerate;
        rec.message = "grown instance unsatisfiable after clause retries";
      } else {
        const CorrectionVector cv_x0 = cfg.x0_mode == X0Mode::kGrownCoefficients
                                           ? correction_coefficients(*grown)
                                           : cv_base;
        const Assignment x0 = optimize_over_solutions(*grown, cv_x0, Direction::kMin).argbest;
        double delta = correction_value(cv_base, x0) - correction_value(cv_base, x1);
        // Values within the optimizer's tie tolerance are equal.
        if (std::abs(delta) <= tie_tolerance(cv_base)) delta = 0.0;
        rec.delta_e = delta;
        if (cfg.count_solutions) {
          const auto before = ec3pt::count_solutions(base, cfg.enumeration_cap);
          const auto after = ec3pt::count_solutions(*grown, cfg.enumeration_cap);
          rec.count_before = before.count;
          rec.count_after = after.count;
          rec.capped = before.capped || after.capped;
        }
        if (cfg.spectral_checks && base.n_vars() <= 12) {
          const std::vector<double> grid{0.01, 0.05, 0.1};
          bool ok = true;
          for (const auto& p : clause_monotonicity_check(base, *grown, grid)) ok = ok && p.holds;
          rec.spectral_ok = ok ? 1 : 0;
        }
      }
    }
  } catch (const NoContradictingClause& e) {
    rec.status = SampleStatus::kDegenerate;
    rec.message = e.what();
  } catch (const Error& e) {
    rec.status = SampleStatus::kError;
    rec.message = e.what();
  }
  if (cfg.record_timing) rec.ms = detail::elapsed_ms(t0);
  return rec;
}

inline std::vector<DeltaRecord> run_delta_e(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<DeltaRecord> out(cfg.samples);
  parallel_for(cfg.samples, cfg.jobs, [&](std::size_t i) { out[i] = run_delta_sample(cfg, i); });
  return out;
}

// Columns: sample_index,n_pre,n_post,m,count_before,count_after,capped,delta_e,retries,ms.
// Only samples with status ok are written.
inline std::string delta_csv(const std::vector<DeltaRecord>& recs) {
  std::string s = "sample_index,n_pre,n_post,m,count_before,count_after,capped,delta_e,retries,ms\n";
  char buf[256];
  for (const auto& r : recs) {
    if (r.status != SampleStatus::kOk) continue;
    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%llu,%llu,%d,%.17g,%zu,%llu\n",
                  r.sample_index, r.n_pre, r.n_post, r.m,
                  static_cast<unsigned long long>(r.count_before),
                  static_cast<unsigned long long>(r.count_after), r.capped ? 1 : 0, r.delta_e,
                  r.retries, static_cast<unsigned long long>(r.ms));
    s += buf;
  }
  return s;
}

struct BatchSummary {
  std::size_t total = 0;
  std::size_t ok = 0;
  std::size_t empty_trim = 0;
  std::size_t degenerate = 0;
  std::size_t errors = 0;
  std::size_t contradicting_probes = 0;  // among samples that reached the probe
  std::size_t probes = 0;
  double contradict_fraction() const {
    return probes == 0 ? 0.0 : static_cast<double>(contradicting_probes) / static_cast<double>(probes);
  }
};

inline BatchSummary summarize_batch(const std::vector<DeltaRecord>& recs) {
  BatchSummary b;
  for (const auto& r : recs) {
    ++b.total;
    switch (r.status) {
      case SampleStatus::kOk: ++b.ok; break;
      case SampleStatus::kEmptyTrim: ++b.empty_trim; break;
      case SampleStatus::kDegenerate: ++b.degenerate; break;
      default: ++b.errors; break;
    }
    if (r.status == SampleStatus::kOk || r.status == SampleStatus::kDegenerate) {
      ++b.probes;
      b.contradicting_probes += r.random_clause_contradicts ? 1 : 0;
    }
  }
  return b;
}

// One instance of a counting or range run.
struct SampleRecord {
  std::size_t n = 0;
  std::size_t sample_index = 0;
  std::size_t n_post = 0;
  std::size_t m = 0;
  std::uint64_t count = 0;
  bool capped = false;
  double min_value = 0.0;  // range runs
  double max_value = 0.0;
  std::size_t retries = 0;
  std::uint64_t ms = 0;
  SampleStatus status = SampleStatus::kOk;
  std::string message;
};

enum class SampleTask { kCount, kRange };

inline SampleRecord run_sample(const ExperimentConfig& cfg, std::size_t i, SampleTask task) {
  const auto t0 = std::chrono::steady_clock::now();
  SampleRecord rec;
  rec.n = cfg.n;
  rec.sample_index = i;
  rec.m = cfg.m();
  try {
    const std::uint64_t s = sample_seed(cfg.master_seed, cfg.n, i);
    const Instance inst =
        generate_satisfiable(cfg.n, cfg.m(), derive_seed(s, 0), cfg.max_unsat_retries, &rec.retries);
    const Instance base = trim(inst).first;
    rec.n_post = base.n_vars();
    if (base.n_vars() == 0) {
      rec.status = SampleStatus::kEmptyTrim;
    } else if (task == SampleTask::kCount) {
      const auto c = count_solutions(base, cfg.enumeration_cap);
      rec.count = c.count;
      rec.capped = c.capped;
      if (c.capped) rec.status = SampleStatus::kCapped;
    } else {
      const auto cv = correction_coefficients(base);
      rec.min_value = optimize_over_solutions(base, cv, Direction::kMin).value;
      rec.max_value = optimize_over_solutions(base, cv, Direction::kMax).value;
    }
  } catch (const Error& e) {
    rec.status = SampleStatus::kError;
    rec.message = e.what();
  }
  if (cfg.record_timing) rec.ms = detail::elapsed_ms(t0);
  return rec;
}

inline std::vector<SampleRecord> run_samples(const ExperimentConfig& cfg,
                                             std::span<const std::size_t> n_list, SampleTask task) {
  std::vector<SampleRecord> out;
  for (std::size_t n : n_list) {
    ExperimentConfig c = cfg;
    c.n = n;
    c.validate();
    std::vector<SampleRecord> part(c.samples);
    parallel_for(c.samples, c.jobs, [&](std::size_t i) { part[i] = run_sample(c, i, task); });
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

struct CountRow {
  std::size_t n = 0;
  double mean_ln_count = 0.0;
  double stderr_ = 0.0;
  std::size_t used = 0;
  std::size_t capped = 0;
  std::size_t empty_trim = 0;
  std::size_t errors = 0;
  double mean_n_post = 0.0;
};

struct RangeRow {
  std::size_t n = 0;
  double mean_range = 0.0;
  double stderr_ = 0.0;
  std::size_t used = 0;
  std::size_t empty_trim = 0;
  std::size_t errors = 0;
  double mean_n_post = 0.0;
};

// Aggregates per n, in the order n first appears.
inline std::vector<CountRow> aggregate_counts(const std::vector<SampleRecord>& recs) {
  std::vector<CountRow> rows;
  std::vector<std::vector<double>> lns;
  for (const auto& r : recs) {
    std::size_t k = 0;
    while (k < rows.size() && rows[k].n != r.n) ++k;
    if (k == rows.size()) {
      rows.push_back({});
      rows.back().n = r.n;
      lns.emplace_back();
    }
    CountRow& row = rows[k];
    switch (r.status) {
      case SampleStatus::kOk:
        lns[k].push_back(std::log(static_cast<double>(r.count)));
        row.mean_n_post += static_cast<double>(r.n_post);
        break;
      case SampleStatus::kCapped: ++row.capped; break;
      case SampleStatus::kEmptyTrim: ++row.empty_trim; break;
      default: ++row.errors; break;
    }
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (lns[k].empty()) {
      if (rows[k].capped > 0)
        throw RangeTooLarge("every sample at n = " + std::to_string(rows[k].n) +
                            " exceeded the enumeration cap");
      continue;
    }
    const auto s = summarize(lns[k], {});
    rows[k].mean_ln_count = s.mean;
    rows[k].stderr_ = s.stderr_;
    rows[k].used = s.count;
    rows[k].mean_n_post /= static_cast<double>(s.count);
  }
  return rows;
}

inline std::vector<RangeRow> aggregate_ranges(const std::vector<SampleRecord>& recs) {
  std::vector<RangeRow> rows;
  std::vector<std::vector<double>> vals;
  for (const auto& r : recs) {
    std::size_t k = 0;
    while (k < rows.size() && rows[k].n != r.n) ++k;
    if (k == rows.size()) {
      rows.push_back({});
      rows.back().n = r.n;
      vals.emplace_back();
    }
    RangeRow& row = rows[k];
    if (r.status == SampleStatus::kOk) {
      vals[k].push_back(r.max_value - r.min_value);
      row.mean_n_post += static_cast<double>(r.n_post);
    } else if (r.status == SampleStatus::kEmptyTrim) {
      ++row.empty_trim;
    } else {
      ++row.errors;
    }
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (vals[k].empty()) continue;
    const auto s = summarize(vals[k], {});
    rows[k].mean_range = s.mean;
    rows[k].stderr_ = s.stderr_;
    rows[k].used = s.count;
    rows[k].mean_n_post /= static_cast<double>(s.count);
  }
  return rows;
}

inline std::vector<CountRow> run_counting(const ExperimentConfig& cfg,
                                          std::span<const std::size_t> n_list) {
  return aggregate_counts(run_samples(cfg, n_list, SampleTask::kCount));
}

inline std::vector<RangeRow> run_range(const ExperimentConfig& cfg,
                                       std::span<const std::size_t> n_list) {
  return aggregate_ranges(run_samples(cfg, n_list, SampleTask::kRange));
}

// One row per sample, every status included. Count runs write
// n,sample_index,n_post,m,count,capped,retries,ms,status; range runs write
// n,sample_index,n_post,m,min,max,range,retries,ms,status.
inline std::string samples_csv(const std::vector<SampleRecord>& recs, SampleTask task) {
  std::string s = task == SampleTask::kCount
                      ? "n,sample_index,n_post,m,count,capped,retries,ms,status\n"
                      : "n,sample_index,n_post,m,min,max,range,retries,ms,status\n";
  char buf[320];
  for (const auto& r : recs) {
    if (task == SampleTask::kCount)
      std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%llu,%d,%zu,%llu,%s\n", r.n, r.sample_index,
                    r.n_post, r.m, static_cast<unsigned long long>(r.count), r.capped ? 1 : 0,
                    r.retries, static_cast<unsigned long long>(r.ms), status_name(r.status));
    else
      std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%.17g,%.17g,%.17g,%zu,%llu,%s\n", r.n,
                    r.sample_index, r.n_post, r.m, r.min_value, r.max_value,
                    r.max_value - r.min_value, r.retries, static_cast<unsigned long long>(r.ms),
                    status_name(r.status));
    s += buf;
  }
  return s;
}

}  // namespace ec3pt
