#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "ec3pt/components.hpp"
#include "ec3pt/error.hpp"
#include "ec3pt/instance.hpp"
#include "ec3pt/perturbation.hpp"
#include "ec3pt/propagator.hpp"
#include "ec3pt/solver.hpp"

namespace ec3pt {

enum class Direction { kMin, kMax };

enum class BranchOrder {
  kLargestWeight,  // default; ties by lowest index
  kLowestIndex,
  kHighestIndex,
};

struct OptResult {
  Assignment argbest;
  double value = 0.0;
  std::uint64_t nodes_expanded = 0;
  Direction direction = Direction::kMin;
};

// Objective values closer than this are treated as equal and resolved by the
// lexicographic rule. Far below the spacing of distinct sums of weights and
// far above accumulated rounding.
inline double tie_tolerance(const CorrectionVector& cv) {
  double total = 0.0;
  for (double w : cv.weights) total += w;
  return 1e-10 * (1.0 + total);
}

namespace detail {

// Assignment over a fixed variable set, stored as its sorted 1-positions.
// Returns true if `a` is lexicographically smaller (index 0 most
// significant): at the first differing position, `a` has the 0.
inline bool ones_lex_less(const std::vector<Var>& a, const std::vector<Var>& b) {
  std::size_t i = 0;
  while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
  if (i == b.size()) return false;
  if (i == a.size()) return true;
  return a[i] > b[i];
}

struct Partial {
  double value = 0.0;
  std::vector<Var> ones;
};

// Branch-and-bound over connected components of the residual problem. The
// objective is a sum over variables, so each component is optimized on its
// own and the optima add. Inside a component, branches are pruned against
// the component's incumbent using bound().
class ComponentOptimizer {
 public:
  ComponentOptimizer(const Instance& inst, const CorrectionVector& cv,
                     Direction dir, BranchOrder order)
      : inst_(inst),
        cv_(cv),
        dir_(dir),
        prop_(inst),
        split_(inst),
        rank_(inst.n_vars()),
        open_count_(inst.n_vars(), 0),
        tol_(tie_tolerance(cv)) {
    std::vector<Var> order_vars(inst.n_vars());
    std::iota(order_vars.begin(), order_vars.end(), Var{0});
    switch (order) {
      case BranchOrder::kLargestWeight:
        std::stable_sort(order_vars.begin(), order_vars.end(),
                         [&](Var a, Var b) { return cv_[a] > cv_[b]; });
        break;
      case BranchOrder::kLowestIndex:
        break;
      case BranchOrder::kHighestIndex:
        std::reverse(order_vars.begin(), order_vars.end());
        break;
    }
    for (std::size_t r = 0; r < order_vars.size(); ++r) rank_[order_vars[r]] = r;
  }

  std::optional<OptResult> run() {
    Partial total;
    for (const Component& comp : split_.split(prop_, all_vars(inst_))) {
      auto r = solve(comp);
      if (!r) return std::nullopt;
      total.ones.insert(total.ones.end(), r->ones.begin(), r->ones.end());
    }
    Assignment x(inst_.n_vars());
    for (Var v : total.ones) x.set(v, true);
    OptResult out;
    out.value = correction_value(cv_, x);
    out.argbest = std::move(x);
    out.nodes_expanded = nodes_;
    out.direction = dir_;
    return out;
  }

 private:
  bool is_min() const noexcept { return dir_ == Direction::kMin; }

  // Optimistic completion value of a component: every open clause gets
  // exactly one more 1 among its unassigned variables. MIN charges each open
  // clause min w_v / d_v (d_v = open clauses containing v); MAX charges
  // max w_v.
  double bound(const Component& comp) {
    double extra = 0.0;
    if (is_min())
      for (std::uint32_t ci : comp.clauses)
        for (Var v : inst_.clauses()[ci])
          if (!prop_.assigned(v)) ++open_count_[v];
    for (std::uint32_t ci : comp.clauses) {
      double pick = is_min() ? std::numeric_limits<double>::infinity() : 0.0;
      for (Var v : inst_.clauses()[ci]) {
        if (prop_.assigned(v)) continue;
        pick = is_min() ? std::min(pick, cv_[v] / open_count_[v])
                        : std::max(pick, cv_[v]);
      }
      extra += pick;
    }
    // Variables outside every clause are free; only MAX can gain from them.
    if (!is_min() && comp.clauses.empty())
      for (Var v : comp.vars) extra += cv_[v];
    if (is_min())
      for (std::uint32_t ci : comp.clauses)
        for (Var v : inst_.clauses()[ci]) open_count_[v] = 0;
    return extra;
  }

  // True if a branch whose optimistic value is `optimistic` can neither beat
  // nor tie the incumbent.
  bool hopeless(double optimistic, const std::optional<Partial>& best) const {
    if (!best) return false;
    return is_min() ? optimistic - tol_ > best->value
                    : optimistic + tol_ < best->value;
  }

  bool improves(const Partial& cand, const std::optional<Partial>& best) const {
    if (!best) return true;
    if (std::abs(cand.value - best->value) <= tol_)
      return ones_lex_less(cand.ones, best->ones);
    return is_min() ? cand.value < best->value : cand.value > best->value;
  }

  std::optional<Partial> solve(const Component& comp) {
    ++nodes_;
    if (comp.clauses.empty()) {
      Partial p;
      for (Var v : comp.vars)
        if (!is_min() && cv_[v] > tol_) {
          p.value += cv_[v];
          p.ones.push_back(v);
        }
      return p;
    }
    // Exact-cover branching: which unassigned variable of the most
    // constrained open clause carries the 1. Candidates are tried lightest
    // first for MIN and heaviest first for MAX, per rank_.
    const Clause clause = *most_constrained_clause(prop_, comp);
    std::array<Var, 3> cands{};
    std::size_t n_cands = 0;
    for (Var v : clause)
      if (!prop_.assigned(v)) cands[n_cands++] = v;
    std::sort(cands.begin(), cands.begin() + n_cands, [&](Var a, Var b) {
      return is_min() ? rank_[a] > rank_[b] : rank_[a] < rank_[b];
    });

    std::optional<Partial> best;
    for (std::size_t k = 0; k < n_cands; ++k) {
      const std::size_t m = prop_.mark();
      if (!prop_.assign(cands[k], 1)) {
        prop_.undo(m);
        continue;
      }
      Partial cand;
      for (std::size_t t = m; t < prop_.trail().size(); ++t) {
        const Var u = prop_.trail()[t];
        if (prop_.value(u) == 1) {
          cand.value += cv_[u];
          cand.ones.push_back(u);
        }
      }
      const auto subs = split_.split(prop_, comp.vars);
      std::vector<double> sub_bound(subs.size());
      double pending = 0.0;
      for (std::size_t i = 0; i < subs.size(); ++i) pending += sub_bound[i] = bound(subs[i]);

      bool feasible = true;
      for (std::size_t i = 0; i < subs.size() && feasible; ++i) {
        if (hopeless(cand.value + pending, best)) {
          feasible = false;
          break;
        }
        auto r = solve(subs[i]);
        if (!r) {
          feasible = false;
          break;
        }
        pending -= sub_bound[i];
        cand.value += r->value;
        cand.ones.insert(cand.ones.end(), r->ones.begin(), r->ones.end());
      }
      prop_.undo(m);
      if (!feasible || hopeless(cand.value, best)) continue;
      std::sort(cand.ones.begin(), cand.ones.end());
      if (improves(cand, best)) best = std::move(cand);
    }
    return best;
  }

  const Instance& inst_;
  const CorrectionVector& cv_;
  Direction dir_;
  Propagator prop_;
  ComponentSplitter split_;
  std::vector<std::size_t> rank_;
  std::vector<std::uint32_t> open_count_;
  double tol_;
  std::uint64_t nodes_ = 0;
};

}  // namespace detail

// Exact optimum of correction_value(cv, x) over the satisfying assignments of
// `inst`. Values within tie_tolerance(cv) are resolved toward the
// lexicographically smallest assignment, so the result does not depend on
// `order`.
inline OptResult optimize_over_solutions(
    const Instance& inst, const CorrectionVector& cv, Direction direction,
    BranchOrder order = BranchOrder::kLargestWeight) {
  if (cv.n_vars() != inst.n_vars())
    throw DimensionError("correction vector does not match instance");
  for (double w : cv.weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InvalidArgument("weights must be finite and nonnegative");
  detail::ComponentOptimizer opt(inst, cv, direction, order);
  auto r = opt.run();
  if (!r) throw NoSolution("instance has no satisfying assignment");
  return std::move(*r);
}

}  // namespace ec3pt
