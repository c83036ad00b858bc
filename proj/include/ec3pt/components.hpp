#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "ec3pt/instance.hpp"
#include "ec3pt/propagator.hpp"

namespace ec3pt::detail {

// Connected piece of the residual problem: unassigned variables linked by
// open clauses (clauses with no variable at 1). Variables are sorted.
struct Component {
  std::vector<Var> vars;
  std::vector<std::uint32_t> clauses;
};

// Epoch-stamped scratch space for repeated component splits.
class ComponentSplitter {
 public:
  explicit ComponentSplitter(const Instance& inst)
      : var_stamp_(inst.n_vars(), 0), clause_stamp_(inst.n_clauses(), 0) {}

  // Partitions the still-unassigned members of `vars` into components.
  std::vector<Component> split(const Propagator& prop, std::span<const Var> vars) {
    const Instance& inst = prop.instance();
    const std::uint32_t epoch = ++epoch_;
    std::vector<Component> out;
    std::vector<Var> stack;
    for (Var root : vars) {
      if (prop.assigned(root) || var_stamp_[root] == epoch) continue;
      Component comp;
      var_stamp_[root] = epoch;
      stack.push_back(root);
      while (!stack.empty()) {
        const Var v = stack.back();
        stack.pop_back();
        comp.vars.push_back(v);
        for (std::uint32_t ci : inst.clauses_of(v)) {
          if (prop.ones_in(ci) != 0 || clause_stamp_[ci] == epoch) continue;
          clause_stamp_[ci] = epoch;
          comp.clauses.push_back(ci);
          for (Var w : inst.clauses()[ci])
            if (!prop.assigned(w) && var_stamp_[w] != epoch) {
              var_stamp_[w] = epoch;
              stack.push_back(w);
            }
        }
      }
      std::sort(comp.vars.begin(), comp.vars.end());
      std::sort(comp.clauses.begin(), comp.clauses.end());
      out.push_back(std::move(comp));
    }
    return out;
  }

 private:
  std::vector<std::uint32_t> var_stamp_;
  std::vector<std::uint32_t> clause_stamp_;
  std::uint32_t epoch_ = 0;
};

// Open clause of `comp` with the fewest unassigned variables (lowest index on
// ties), or nullptr if none is open.
inline const Clause* most_constrained_clause(const Propagator& prop,
                                             const Component& comp) {
  const Clause* pick = nullptr;
  int best = 4;
  for (std::uint32_t ci : comp.clauses) {
    if (prop.ones_in(ci) != 0) continue;
    const int open = 3 - prop.zeros_in(ci);
    if (open < best) {
      best = open;
      pick = &prop.instance().clauses()[ci];
      if (open <= 1) break;
    }
  }
  return pick;
}

}  // namespace ec3pt::detail
