#pragma once

// Deterministic spectral fixtures shared by the unit tests and the acceptance
// run.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ec3pt/perturbation.hpp"
#include "ec3pt/solver.hpp"

namespace fixtures {

using namespace ec3pt;

// True if two clauses share two variables. The 4th-order weights assume each
// pair of variables meets in at most one clause.
inline bool has_shared_pair(const Instance& inst) {
  const auto& cl = inst.clauses();
  for (std::size_t i = 0; i < cl.size(); ++i)
    for (std::size_t j = i + 1; j < cl.size(); ++j) {
      int common = 0;
      for (Var a : cl[i])
        for (Var b : cl[j]) common += a == b;
      if (common >= 2) return true;
    }
  return false;
}

struct PtFixture {
  Instance inst;
  Assignment xa, xb;
  std::uint64_t seed = 0;
  double dw = 0.0;
};

// First trimmed instance with exactly two solutions at distance >= 6 whose
// correction difference is at least `min_dw`. A tiny difference lets the
// 6th-order term dominate at moderate lambda.
inline PtFixture pt_fixture(std::size_t n_post = 14, double min_dw = 0.1,
                            std::uint64_t master = 2024) {
  for (std::uint64_t s = 0; s < 1000000; ++s) {
    const std::size_t n = n_post + 4 + s % 10;
    const auto [t, map] = trim(generate(n, std::size_t(std::lround(0.62 * double(n))),
                                        derive_seed(master, s)));
    if (t.n_vars() != n_post || has_shared_pair(t)) continue;
    const auto sols = enumerate(t, 3);
    if (sols.count != 2 || sols.capped) continue;
    const auto& a = sols.solutions[0];
    const auto& b = sols.solutions[1];
    if (hamming_distance(a, b) < 6) continue;
    CorrectionVector cv;
    try {
      cv = correction_coefficients(t);
    } catch (const UntrimmedDegeneracy&) {
      continue;
    }
    const double dw = correction_value(cv, b) - correction_value(cv, a);
    if (std::abs(dw) < min_dw) continue;
    return {t, a, b, s, dw};
  }
  throw std::runtime_error("no perturbation fixture found");
}

struct GrowthFixture {
  Instance base, grown;
  bool contradicting = false;
};

// `count` satisfiable bases with n cycling through 10, 11, 12. Even entries
// add a clause that the first solution violates, odd entries add a uniformly
// random new clause.
inline std::vector<GrowthFixture> growth_fixtures(std::size_t count = 20,
                                                  std::uint64_t master = 99) {
  std::vector<GrowthFixture> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = 10 + i % 3;
    const std::uint64_t s = derive_seed(master, i);
    const Instance base =
        generate_satisfiable(n, std::size_t(std::lround(0.62 * double(n))), s, 1000);
    GrowthFixture f{base, base, i % 2 == 0};
    if (f.contradicting) {
      f.grown = add_contradicting_clause(base, enumerate(base, 1).solutions[0], derive_seed(s, 1));
    } else {
      Rng rng(derive_seed(s, 2));
      while (true) {
        const auto a = Var(rng.below(n)), b = Var(rng.below(n)), c = Var(rng.below(n));
        if (a == b || b == c || a == c) continue;
        const Clause cl = make_clause(a, b, c);
        if (base.contains_clause(cl)) continue;
        f.grown = base.with_clause(cl);
        break;
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace fixtures
