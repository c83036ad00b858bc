#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "ec3pt/error.hpp"
#include "ec3pt/components.hpp"
#include "ec3pt/instance.hpp"
#include "ec3pt/propagator.hpp"

namespace ec3pt {

// Sum over clauses of (x_i + x_j + x_k - 1)^2.
inline std::uint64_t cost(const Instance& inst, const Assignment& x) {
  if (x.size() != inst.n_vars())
    throw DimensionError("assignment has " + std::to_string(x.size()) +
                         " bits, instance has " + std::to_string(inst.n_vars()));
  std::uint64_t total = 0;
  for (const auto& c : inst.clauses()) {
    const int s = x[c[0]] + x[c[1]] + x[c[2]] - 1;
    total += static_cast<std::uint64_t>(s * s);
  }
  return total;
}

struct SolutionSet {
  std::vector<Assignment> solutions;
  std::uint64_t count = 0;
  bool capped = false;
};

namespace detail {

// Depth-first search: branch on the lowest unassigned index, 0 before 1.
// `visit` receives the propagator at each complete assignment and returns
// false to stop the search. Returns false if stopped.
template <class Visit>
bool dfs(Propagator& prop, std::size_t n, Var from, Visit& visit) {
  while (from < n && prop.assigned(from)) ++from;
  if (from == n) return visit(prop);
  for (std::uint8_t b = 0; b <= 1; ++b) {
    const std::size_t m = prop.mark();
    const bool ok = prop.assign(from, b);
    if (ok && !dfs(prop, n, from + 1, visit)) {
      prop.undo(m);
      return false;
    }
    prop.undo(m);
  }
  return true;
}

}  // namespace detail

// Calls visit(const Propagator&) for every satisfying assignment in
// deterministic order until it returns false.
template <class Visit>
void for_each_solution(const Instance& inst, Visit&& visit) {
  Propagator prop(inst);
  detail::dfs(prop, inst.n_vars(), 0, visit);
}

// All satisfying assignments, or the first `cap` of them with capped = true.
inline SolutionSet enumerate(const Instance& inst,
                             std::uint64_t cap = std::numeric_limits<std::uint64_t>::max()) {
  SolutionSet out;
  for_each_solution(inst, [&](const Propagator& p) {
    if (out.count == cap) {
      out.capped = true;
      return false;
    }
    out.solutions.push_back(p.snapshot());
    ++out.count;
    return true;
  });
  return out;
}

namespace detail {

inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) noexcept {
  return a > UINT64_MAX - b ? UINT64_MAX : a + b;
}
inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) noexcept {
  if (a == 0 || b == 0) return 0;
  return a > UINT64_MAX / b ? UINT64_MAX : a * b;
}

// Solutions of one residual component. Branches on which unassigned
// variable of the most constrained open clause is the 1, then splits the
// remainder into independent components whose counts multiply. Saturates at
// UINT64_MAX.
inline std::uint64_t count_component(Propagator& prop, ComponentSplitter& split,
                                     const Component& comp) {
  const Clause* clause = most_constrained_clause(prop, comp);
  if (clause == nullptr) {
    // Only variables outside every clause remain; each is free.
    std::uint64_t c = 1;
    for (std::size_t i = 0; i < comp.vars.size(); ++i) c = sat_mul(c, 2);
    return c;
  }
  const Clause branch = *clause;
  std::uint64_t total = 0;
  for (Var v : branch) {
    if (prop.assigned(v)) continue;
    const std::size_t m = prop.mark();
    if (prop.assign(v, 1)) {
      std::uint64_t prod = 1;
      for (const Component& sub : split.split(prop, comp.vars)) {
        prod = sat_mul(prod, count_component(prop, split, sub));
        if (prod == 0) break;
      }
      total = sat_add(total, prod);
    }
    prop.undo(m);
  }
  return total;
}

inline std::vector<Var> all_vars(const Instance& inst) {
  std::vector<Var> vars(inst.n_vars());
  for (Var v = 0; v < inst.n_vars(); ++v) vars[v] = v;
  return vars;
}

}  // namespace detail

namespace detail {

// True if the component admits a satisfying completion; leaves the
// propagator unchanged.
inline bool satisfiable_component(Propagator& prop, ComponentSplitter& split,
                                  const Component& comp) {
  const Clause* clause = most_constrained_clause(prop, comp);
  if (clause == nullptr) return true;
  const Clause branch = *clause;
  for (Var v : branch) {
    if (prop.assigned(v)) continue;
    const std::size_t m = prop.mark();
    bool ok = prop.assign(v, 1);
    if (ok)
      for (const Component& sub : split.split(prop, comp.vars))
        if (!satisfiable_component(prop, split, sub)) {
          ok = false;
          break;
        }
    prop.undo(m);
    if (ok) return true;
  }
  return false;
}

}  // namespace detail

inline bool is_satisfiable(const Instance& inst) {
  Propagator prop(inst);
  detail::ComponentSplitter split(inst);
  for (const auto& comp : split.split(prop, detail::all_vars(inst)))
    if (!detail::satisfiable_component(prop, split, comp)) return false;
  return true;
}

struct CountResult {
  std::uint64_t count = 0;
  bool capped = false;
};

// Exact solution count by component decomposition. Counts above `cap` are
// reported as count = cap with capped = true.
inline CountResult count_solutions(
    const Instance& inst,
    std::uint64_t cap = std::numeric_limits<std::uint64_t>::max()) {
  Propagator prop(inst);
  detail::ComponentSplitter split(inst);
  std::uint64_t total = 1;
  for (const auto& comp : split.split(prop, detail::all_vars(inst))) {
    total = detail::sat_mul(total, detail::count_component(prop, split, comp));
    if (total == 0) break;
  }
  if (total > cap || total == UINT64_MAX) return {cap, true};
  return {total, false};
}

// Instances are resampled from derive_seed(seed, retry) until one is
// satisfiable. `retries` receives the number of unsatisfiable draws.
inline Instance generate_satisfiable(std::size_t n, std::size_t m,
                                     std::uint64_t seed, std::size_t max_retries,
                                     std::size_t* retries = nullptr) {
  for (std::size_t r = 0; r <= max_retries; ++r) {
    Instance inst = generate(n, m, derive_seed(seed, r));
    if (is_satisfiable(inst)) {
      if (retries) *retries = r;
      return inst;
    }
  }
  throw UnsatisfiableEnsemble("no satisfiable instance after " +
                              std::to_string(max_retries) + " retries");
}

}  // namespace ec3pt
