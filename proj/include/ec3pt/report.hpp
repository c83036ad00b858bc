#pragma once

// JSON views of results. Needs nlohmann/json (json.hpp) on the include path.

#include <string>
#include <vector>

#include "json.hpp"

#include "ec3pt/evstats.hpp"
#include "ec3pt/perturbation.hpp"
#include "ec3pt/pipeline.hpp"
#include "ec3pt/spectrum.hpp"

namespace ec3pt {

using Json = nlohmann::ordered_json;

inline Json to_json(const FitResult& f) {
  return Json{{"model", f.model},
              {"estimate", f.estimate},
              {"stderr", f.stderr_},
              {"intercept", f.intercept},
              {"r_squared", f.r_squared},
              {"n_points", f.n_points},
              {"window", {f.window_lo, f.window_hi}}};
}

inline Json to_json(const SummaryStats& s) {
  Json p = Json::object();
  for (std::size_t i = 0; i < s.levels.size(); ++i) {
    char key[32];
    std::snprintf(key, sizeof key, "%g", s.levels[i]);
    p[key] = s.percentiles[i];
  }
  return Json{{"mean", s.mean}, {"stderr", s.stderr_}, {"count", s.count}, {"percentiles", p}};
}

inline Json to_json(const DeltaRecord& r) {
  return Json{{"sample_index", r.sample_index},
              {"n_pre", r.n_pre},
              {"n_post", r.n_post},
              {"m", r.m},
              {"m_post", r.m_post},
              {"count_before", r.count_before},
              {"count_after", r.count_after},
              {"capped", r.capped},
              {"delta_e", r.delta_e},
              {"retries", r.retries},
              {"clause_retries", r.clause_retries},
              {"random_clause_contradicts", r.random_clause_contradicts},
              {"spectral_ok", r.spectral_ok},
              {"ms", r.ms},
              {"status", status_name(r.status)},
              {"message", r.message}};
}

inline Json to_json(const SampleRecord& r) {
  return Json{{"n", r.n},
              {"sample_index", r.sample_index},
              {"n_post", r.n_post},
              {"m", r.m},
              {"count", r.count},
              {"capped", r.capped},
              {"min", r.min_value},
              {"max", r.max_value},
              {"retries", r.retries},
              {"ms", r.ms},
              {"status", status_name(r.status)},
              {"message", r.message}};
}

inline Json to_json(const BatchSummary& b) {
  return Json{{"total", b.total},
              {"ok", b.ok},
              {"empty_trim", b.empty_trim},
              {"degenerate", b.degenerate},
              {"errors", b.errors},
              {"random_clause_contradict_fraction", b.contradict_fraction()}};
}

inline Json to_json(const SpectrumResult& r) {
  Json pts = Json::array();
  for (const auto& p : r.points)
    pts.push_back(Json{{"lambda", p.lambda}, {"energies", p.energies}, {"residuals", p.residuals}});
  return pts;
}

inline Json to_json(const CorrectionVector& cv) { return Json(cv.weights); }

template <class T>
Json to_json_array(const std::vector<T>& xs) {
  Json a = Json::array();
  for (const auto& x : xs) a.push_back(to_json(x));
  return a;
}

}  // namespace ec3pt
