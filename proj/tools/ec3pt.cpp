// Command-line front end: instance generation, trimming, and the counting,
// range and splitting experiments.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ec3pt/report.hpp"

namespace {

using namespace ec3pt;

struct Common {
  std::vector<std::size_t> n;
  std::size_t m = 0;
  double alpha = 0.62;
  std::size_t samples = 100;
  std::uint64_t seed = 1;
  std::uint64_t cap = 0;
  std::string out;
  std::string format = "csv";
  std::size_t jobs = 0;
  std::string in;
  std::vector<double> lambda;
  std::size_t k = 1;
  bool timing = false;
};

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + c.out);
  f << text;
}

ExperimentConfig config_from(const Common& c) {
  ExperimentConfig cfg;
  cfg.alpha = c.alpha;
  cfg.samples = c.samples;
  cfg.master_seed = c.seed;
  cfg.enumeration_cap = c.cap == 0 ? default_cap() : c.cap;
  cfg.jobs = c.jobs == 0 ? default_jobs() : c.jobs;
  cfg.record_timing = c.timing;
  if (!c.n.empty()) cfg.n = c.n.front();
  return cfg;
}

std::size_t single_n(const Common& c) {
  if (c.n.size() != 1) throw CLI::ValidationError("--n", "expects exactly one value here");
  return c.n.front();
}

// Minimal CSV reader for files written by this tool.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw InvalidArgument("CSV has no column " + name);
  }
  bool has(const std::string& name) const {
    for (const auto& h : header)
      if (h == name) return true;
    return false;
  }
};

Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::string cur;
    for (char ch : s) {
      if (ch == ',') {
        f.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    f.push_back(cur);
    return f;
  };
  if (!std::getline(in, line)) throw InvalidArgument("empty CSV");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != t.header.size()) throw InvalidArgument("ragged CSV row");
    t.rows.push_back(std::move(f));
  }
  return t;
}

const std::vector<double> kLevels{0.25, 0.5, 0.75};

Json stats_report(const Table& t) {
  Json out;
  if (t.has("delta_e")) {
    // Splitting records, grouped by pre-trim n.
    std::map<std::size_t, std::vector<double>> by_n;
    const auto cn = t.col("n_pre"), cd = t.col("delta_e");
    for (const auto& r : t.rows) by_n[std::stoul(r[cn])].push_back(std::stod(r[cd]));
    Json groups = Json::array();
    std::vector<Point> med, mean_sq;
    for (const auto& [n, d] : by_n) {
      std::vector<double> sq;
      for (double x : d) sq.push_back(x * x);
      const auto s = summarize(d, kLevels);
      const auto s2 = summarize(sq, kLevels);
      Json g{{"n", n}, {"delta_e", to_json(s)}, {"delta_e_squared", to_json(s2)}};
      g["p75_squared_over_mean_square"] = s.percentiles[2] * s.percentiles[2] / s2.mean;
      if (d.size() >= 20) g["semilog_rank_fit"] = to_json(semilog_rank_fit(d, 0.9));
      groups.push_back(g);
      med.push_back({static_cast<double>(n), s2.percentiles[1]});
      mean_sq.push_back({static_cast<double>(n), s2.mean});
    }
    out["experiment"] = "delta";
    out["groups"] = groups;
    if (med.size() >= 3) {
      out["median_square_power_law"] = to_json(fit_power_law(med));
      out["mean_square_power_law"] = to_json(fit_power_law(mean_sq));
    }
  } else if (t.has("count")) {
    std::map<std::size_t, std::vector<double>> by_n;
    std::map<std::size_t, std::size_t> excluded;
    const auto cn = t.col("n"), cc = t.col("count"), cs = t.col("status");
    for (const auto& r : t.rows) {
      const auto n = std::stoul(r[cn]);
      if (r[cs] == "ok")
        by_n[n].push_back(std::log(std::stod(r[cc])));
      else
        ++excluded[n];
    }
    Json groups = Json::array();
    std::vector<Point> pts;
    for (const auto& [n, l] : by_n) {
      const auto s = summarize(l, {});
      groups.push_back(Json{{"n", n}, {"mean_ln_count", s.mean}, {"stderr", s.stderr_},
                            {"used", s.count}, {"excluded", excluded[n]}});
      pts.push_back({static_cast<double>(n), std::exp(s.mean)});
    }
    out["experiment"] = "count";
    out["groups"] = groups;
    if (pts.size() >= 3) out["exp_growth"] = to_json(fit_exp_growth(pts));
  } else if (t.has("range")) {
    std::map<std::size_t, std::vector<double>> by_n;
    const auto cn = t.col("n"), cr = t.col("range"), cs = t.col("status");
    for (const auto& r : t.rows)
      if (r[cs] == "ok") by_n[std::stoul(r[cn])].push_back(std::stod(r[cr]));
    Json groups = Json::array();
    std::vector<Point> pts;
    for (const auto& [n, v] : by_n) {
      const auto s = summarize(v, kLevels);
      groups.push_back(Json{{"n", n}, {"range", to_json(s)}});
      pts.push_back({static_cast<double>(n), s.mean});
    }
    out["experiment"] = "range";
    out["groups"] = groups;
    if (pts.size() >= 3) out["linear"] = to_json(fit_linear(pts));
  } else {
    throw InvalidArgument("unrecognized CSV: expected count, range or delta output");
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"ec3pt: exact cover 3 level-splitting experiments"};
  app.require_subcommand(1);
  Common c;

  auto add_common = [&](CLI::App* s, bool experiment) {
    s->add_option("--out", c.out, "Output path (default stdout)");
    s->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"csv", "json", "text"}));
    if (experiment) {
      s->add_option("--n", c.n, "Variable count(s), comma separated")->delimiter(',');
      s->add_option("--alpha", c.alpha, "Clause-to-variable ratio")->capture_default_str();
      s->add_option("--samples", c.samples, "Samples per n")->capture_default_str();
      s->add_option("--seed", c.seed, "Master seed")->capture_default_str();
      s->add_option("--cap", c.cap, "Enumeration cap (default EC3PT_CAP or 1e8)");
      s->add_option("--jobs", c.jobs, "Worker threads (default EC3PT_JOBS or all cores)");
      s->add_flag("--timing", c.timing, "Record per-sample wall time in ms");
    }
  };

  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  add_common(gen, true);
  gen->add_option("--m", c.m, "Clause count (default round(alpha * n))");
  bool satisfiable = false, provenance = false;
  gen->add_flag("--satisfiable", satisfiable, "Resample until satisfiable");
  gen->add_flag("--provenance", provenance, "Write a seed comment line");

  auto* trim_cmd = app.add_subcommand("trim", "Leaf-removal trimming of an instance");
  add_common(trim_cmd, false);
  trim_cmd->add_option("--in", c.in, "Instance file (default stdin)");

  auto* count = app.add_subcommand("count", "Count solutions of a file or of random samples");
  add_common(count, true);
  count->add_option("--in", c.in, "Count this instance instead of sampling");

  auto* range = app.add_subcommand("range", "Max minus min correction over solutions");
  add_common(range, true);
  range->add_option("--in", c.in, "Analyse this instance instead of sampling");

  auto* delta = app.add_subcommand("delta", "Level-splitting experiment");
  add_common(delta, true);
  std::string x0_mode = "grown";
  bool no_count = false, spectral = false;
  delta->add_option("--x0-mode", x0_mode, "Coefficients selecting x0")
      ->check(CLI::IsMember({"grown", "base"}))
      ->capture_default_str();
  delta->add_flag("--no-count", no_count, "Skip solution counts before and after");
  delta->add_flag("--spectral", spectral, "Exact-diagonalization check where n_post <= 12");

  auto* spectrum = app.add_subcommand("spectrum", "Lowest eigenvalues of the quantum Hamiltonian");
  add_common(spectrum, false);
  spectrum->add_option("--in", c.in, "Instance file (default stdin)");
  spectrum->add_option("--lambda", c.lambda, "Transverse field values, comma separated")
      ->delimiter(',')
      ->required();
  spectrum->add_option("--k", c.k, "Number of levels")->capture_default_str();
  std::string method = "auto";
  spectrum->add_option("--method", method, "Eigensolver")
      ->check(CLI::IsMember({"auto", "dense", "iterative"}))
      ->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Fit statistics from count, range or delta CSV");
  add_common(stats, false);
  stats->add_option("--in", c.in, "CSV file (default stdin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return 1;
  }

  try {
    if (*gen) {
      const std::size_t n = single_n(c);
      const std::size_t m = c.m != 0 ? c.m : static_cast<std::size_t>(std::lround(c.alpha * n));
      const Instance inst = satisfiable ? generate_satisfiable(n, m, c.seed, 1000)
                                        : generate(n, m, c.seed);
      emit(c, write_instance(inst, provenance));
    } else if (*trim_cmd) {
      const Instance inst = read_instance(read_input(c.in));
      auto [t, map] = trim(inst);
      if (c.format == "json") {
        Json j{{"n_before", inst.n_vars()},
               {"n_after", t.n_vars()},
               {"m_before", inst.n_clauses()},
               {"m_after", t.n_clauses()},
               {"forward", map.forward},
               {"instance", write_instance(t)}};
        emit(c, j.dump(2) + "\n");
      } else {
        emit(c, write_instance(t));
      }
    } else if (*count || *range) {
      const bool is_count = static_cast<bool>(*count);
      if (!c.in.empty()) {
        const Instance inst = read_instance(read_input(c.in));
        Json j;
        if (is_count) {
          const auto r = count_solutions(inst, c.cap == 0 ? default_cap() : c.cap);
          j = Json{{"n", inst.n_vars()}, {"m", inst.n_clauses()}, {"count", r.count},
                   {"capped", r.capped}};
        } else {
          const auto cv = correction_coefficients(inst);
          const auto lo = optimize_over_solutions(inst, cv, Direction::kMin);
          const auto hi = optimize_over_solutions(inst, cv, Direction::kMax);
          j = Json{{"n", inst.n_vars()}, {"m", inst.n_clauses()}, {"min", lo.value},
                   {"max", hi.value}, {"range", hi.value - lo.value},
                   {"argmin", lo.argbest.to_string()}, {"argmax", hi.argbest.to_string()}};
        }
        emit(c, j.dump(2) + "\n");
        return 0;
      }
      if (c.n.empty()) throw CLI::ValidationError("--n", "required unless --in is given");
      const auto cfg = config_from(c);
      const auto task = is_count ? SampleTask::kCount : SampleTask::kRange;
      const auto recs = run_samples(cfg, c.n, task);
      if (c.format == "json") {
        Json j{{"experiment", is_count ? "count" : "range"}, {"seed", c.seed},
               {"alpha", c.alpha}, {"samples", recs.size()}};
        if (is_count) {
          Json rows = Json::array();
          for (const auto& r : aggregate_counts(recs))
            rows.push_back(Json{{"n", r.n}, {"mean_ln_count", r.mean_ln_count},
                                {"stderr", r.stderr_}, {"used", r.used}, {"capped", r.capped},
                                {"empty_trim", r.empty_trim}, {"errors", r.errors},
                                {"mean_n_post", r.mean_n_post}});
          j["summary"] = rows;
        } else {
          Json rows = Json::array();
          for (const auto& r : aggregate_ranges(recs))
            rows.push_back(Json{{"n", r.n}, {"mean_range", r.mean_range}, {"stderr", r.stderr_},
                                {"used", r.used}, {"empty_trim", r.empty_trim},
                                {"errors", r.errors}, {"mean_n_post", r.mean_n_post}});
          j["summary"] = rows;
        }
        j["records"] = to_json_array(recs);
        emit(c, j.dump(2) + "\n");
      } else {
        emit(c, samples_csv(recs, task));
      }
    } else if (*delta) {
      auto cfg = config_from(c);
      cfg.n = single_n(c);
      cfg.x0_mode = x0_mode == "base" ? X0Mode::kBaseCoefficients : X0Mode::kGrownCoefficients;
      cfg.count_solutions = !no_count;
      cfg.spectral_checks = spectral;
      const auto recs = run_delta_e(cfg);
      const auto batch = summarize_batch(recs);
      if (c.format == "json") {
        Json j{{"experiment", "delta"}, {"n", cfg.n}, {"seed", c.seed},
               {"x0_mode", x0_mode}, {"batch", to_json(batch)},
               {"records", to_json_array(recs)}};
        emit(c, j.dump(2) + "\n");
      } else {
        emit(c, delta_csv(recs));
      }
      std::fprintf(stderr,
                   "delta: %zu ok, %zu empty after trim, %zu degenerate, %zu errors; "
                   "random clause contradicts x1 in %.3f of samples\n",
                   batch.ok, batch.empty_trim, batch.degenerate, batch.errors,
                   batch.contradict_fraction());
    } else if (*spectrum) {
      SpectrumRequest req{read_instance(read_input(c.in)), c.lambda, c.k, {}};
      SpectrumOptions opt;
      if (method == "dense") opt.method = SpectrumOptions::Method::kDense;
      if (method == "iterative") opt.method = SpectrumOptions::Method::kIterative;
      const auto r = lowest_eigenvalues(req, opt);
      emit(c, c.format == "json" ? to_json(r).dump(2) + "\n" : spectrum_csv(r));
    } else if (*stats) {
      emit(c, stats_report(parse_csv(read_input(c.in))).dump(2) + "\n");
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
