#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ec3pt/instance.hpp"

namespace ec3pt {

// Partial assignment with EC3 unit propagation and an undo trail. Within a
// clause, a variable at 1 forces the other two to 0 and two variables at 0
// force the third to 1; two 1s or three 0s is a conflict.
class Propagator {
 public:
  static constexpr std::int8_t kUnassigned = -1;

  explicit Propagator(const Instance& inst)
      : inst_(&inst),
        value_(inst.n_vars(), kUnassigned),
        ones_(inst.n_clauses(), 0),
        zeros_(inst.n_clauses(), 0) {
    trail_.reserve(inst.n_vars());
    queue_.reserve(inst.n_vars());
  }

  std::int8_t value(Var v) const noexcept { return value_[v]; }
  bool assigned(Var v) const noexcept { return value_[v] != kUnassigned; }
  std::size_t n_assigned() const noexcept { return trail_.size(); }
  std::size_t mark() const noexcept { return trail_.size(); }
  const std::vector<Var>& trail() const noexcept { return trail_; }

  // Assigns v := val and propagates to a fixed point. Returns false on
  // conflict; the caller must then undo() to an earlier mark.
  bool assign(Var v, std::uint8_t val) {
    queue_.clear();
    queue_.push_back({v, val});
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const auto [u, b] = queue_[head];
      if (value_[u] != kUnassigned) {
        if (value_[u] != static_cast<std::int8_t>(b)) return false;
        continue;
      }
      value_[u] = static_cast<std::int8_t>(b);
      trail_.push_back(u);
      const auto cls = inst_->clauses_of(u);
      for (std::uint32_t ci : cls) ++(b ? ones_[ci] : zeros_[ci]);
      for (std::uint32_t ci : cls) {
        if (ones_[ci] >= 2 || zeros_[ci] == 3) return false;
        if (ones_[ci] + zeros_[ci] == 3) continue;
        const Clause& c = inst_->clauses()[ci];
        if (ones_[ci] == 1) {
          for (Var w : c)
            if (value_[w] == kUnassigned) queue_.push_back({w, 0});
        } else if (zeros_[ci] == 2) {
          for (Var w : c)
            if (value_[w] == kUnassigned) queue_.push_back({w, 1});
        }
      }
    }
    return true;
  }

  void undo(std::size_t mark) noexcept {
    while (trail_.size() > mark) {
      const Var u = trail_.back();
      trail_.pop_back();
      const bool b = value_[u] == 1;
      for (std::uint32_t ci : inst_->clauses_of(u)) --(b ? ones_[ci] : zeros_[ci]);
      value_[u] = kUnassigned;
    }
  }

  std::uint8_t ones_in(std::uint32_t ci) const noexcept { return ones_[ci]; }
  std::uint8_t zeros_in(std::uint32_t ci) const noexcept { return zeros_[ci]; }
  const Instance& instance() const noexcept { return *inst_; }

  Assignment snapshot() const {
    Assignment x(value_.size());
    for (std::size_t i = 0; i < value_.size(); ++i) x.set(i, value_[i] == 1);
    return x;
  }

 private:
  struct Pending {
    Var var;
    std::uint8_t value;
  };

  const Instance* inst_;
  std::vector<std::int8_t> value_;
  std::vector<std::uint8_t> ones_;
  std::vector<std::uint8_t> zeros_;
  std::vector<Var> trail_;
  std::vector<Pending> queue_;
};

}  // namespace ec3pt
