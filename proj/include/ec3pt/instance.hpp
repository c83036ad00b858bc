#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ec3pt/error.hpp"
#include "ec3pt/rng.hpp"

namespace ec3pt {

using Var = std::uint32_t;

// Three pairwise-distinct variable indices, kept sorted ascending.
using Clause = std::array<Var, 3>;

inline Clause make_clause(Var a, Var b, Var c) {
  Clause cl{a, b, c};
  std::sort(cl.begin(), cl.end());
  return cl;
}

// Number of 3-subsets of an n-element set.
constexpr std::uint64_t choose3(std::uint64_t n) noexcept {
  return n < 3 ? 0 : n * (n - 1) * (n - 2) / 6;
}

// A bit vector over the variables of an instance.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::size_t n, std::uint8_t value = 0) : bits_(n, value) {}
  explicit Assignment(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}

  // Parses a string of '0'/'1' characters.
  static Assignment from_string(std::string_view s) {
    Assignment a(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '0' && s[i] != '1')
        throw InvalidArgument("assignment string must contain only 0 and 1");
      a.bits_[i] = static_cast<std::uint8_t>(s[i] - '0');
    }
    return a;
  }

  std::size_t size() const noexcept { return bits_.size(); }
  std::uint8_t operator[](std::size_t i) const noexcept { return bits_[i]; }
  void set(std::size_t i, bool v) noexcept { bits_[i] = v ? 1 : 0; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  std::size_t popcount() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
  }

  std::string to_string() const {
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) s[i] = '1';
    return s;
  }

  // Lexicographic, index 0 most significant.
  friend auto operator<=>(const Assignment&, const Assignment&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

inline std::size_t hamming_distance(const Assignment& a, const Assignment& b) {
  if (a.size() != b.size()) throw DimensionError("assignment length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

// An Exact-Cover-3 instance: `n_vars` bits and a list of distinct clauses.
// Immutable after construction.
class Instance {
 public:
  Instance() = default;

  // Validates the invariants: every clause has three distinct indices below
  // n_vars and no two clauses cover the same variable set. Triples are stored
  // sorted. `n_original` defaults to n_vars.
  Instance(std::size_t n_vars, std::vector<Clause> clauses,
           std::uint64_t seed = 0, std::optional<std::size_t> n_original = {})
      : n_vars_(n_vars),
        n_original_(n_original.value_or(n_vars)),
        seed_(seed),
        clauses_(std::move(clauses)) {
    if (n_vars_ >= (std::size_t{1} << 21))
      throw InvalidArgument("instance too large");
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(clauses_.size() * 2);
    for (auto& c : clauses_) {
      std::sort(c.begin(), c.end());
      if (c[0] == c[1] || c[1] == c[2])
        throw InvalidArgument("clause with repeated variable");
      if (c[2] >= n_vars_) throw InvalidArgument("clause index out of range");
      if (!seen.insert(key(c)).second) throw InvalidArgument("duplicate clause");
    }
    build_adjacency();
  }

  std::size_t n_vars() const noexcept { return n_vars_; }
  std::size_t n_original() const noexcept { return n_original_; }
  std::size_t n_clauses() const noexcept { return clauses_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<Clause>& clauses() const noexcept { return clauses_; }
  bool empty() const noexcept { return n_vars_ == 0 && clauses_.empty(); }

  // B_i: number of clauses containing variable i.
  std::uint32_t degree(Var i) const noexcept {
    return offsets_[i + 1] - offsets_[i];
  }
  std::vector<std::uint32_t> degrees() const {
    std::vector<std::uint32_t> d(n_vars_);
    for (Var i = 0; i < n_vars_; ++i) d[i] = degree(i);
    return d;
  }

  // Indices (into clauses()) of the clauses containing variable i, ascending.
  std::span<const std::uint32_t> clauses_of(Var i) const noexcept {
    return {incidence_.data() + offsets_[i], incidence_.data() + offsets_[i + 1]};
  }

  bool contains_clause(Clause c) const {
    std::sort(c.begin(), c.end());
    if (c[2] >= n_vars_) return false;
    for (std::uint32_t idx : clauses_of(c[0]))
      if (clauses_[idx] == c) return true;
    return false;
  }

  // Returns a copy with `c` appended.
  Instance with_clause(Clause c) const {
    auto cl = clauses_;
    cl.push_back(c);
    return Instance(n_vars_, std::move(cl), seed_, n_original_);
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.n_vars_ == b.n_vars_ && a.clauses_ == b.clauses_;
  }

 private:
  static std::uint64_t key(const Clause& c) noexcept {
    return (std::uint64_t{c[0]} << 42) | (std::uint64_t{c[1]} << 21) | c[2];
  }

  void build_adjacency() {
    offsets_.assign(n_vars_ + 1, 0);
    for (const auto& c : clauses_)
      for (Var v : c) ++offsets_[v + 1];
    for (std::size_t i = 0; i < n_vars_; ++i) offsets_[i + 1] += offsets_[i];
    incidence_.resize(offsets_[n_vars_]);
    std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::uint32_t ci = 0; ci < clauses_.size(); ++ci)
      for (Var v : clauses_[ci]) incidence_[fill[v]++] = ci;
  }

  std::size_t n_vars_ = 0;
  std::size_t n_original_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<Clause> clauses_;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<std::uint32_t> incidence_;
};

// Draws `m` distinct clauses uniformly without replacement from the 3-subsets
// of `n` variables. Pure function of (n, m, seed).
inline Instance generate(std::size_t n, std::size_t m, std::uint64_t seed) {
  const std::uint64_t total = choose3(n);
  if (m > total)
    throw InfeasibleRequest("requested " + std::to_string(m) +
                            " clauses but only " + std::to_string(total) +
                            " distinct triples exist");
  Rng rng(seed);
  std::vector<Clause> clauses;
  clauses.reserve(m);
  if (m * 4 > total) {
    // Dense request: partial Fisher-Yates over the full list of triples.
    std::vector<Clause> all;
    all.reserve(total);
    for (Var a = 0; a < n; ++a)
      for (Var b = a + 1; b < n; ++b)
        for (Var c = b + 1; c < n; ++c) all.push_back({a, b, c});
    for (std::size_t i = 0; i < m; ++i) {
      std::swap(all[i], all[i + rng.below(total - i)]);
      clauses.push_back(all[i]);
    }
  } else {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(m * 2);
    while (clauses.size() < m) {
      const auto a = static_cast<Var>(rng.below(n));
      const auto b = static_cast<Var>(rng.below(n));
      const auto c = static_cast<Var>(rng.below(n));
      if (a == b || b == c || a == c) continue;
      const Clause cl = make_clause(a, b, c);
      const std::uint64_t k =
          (std::uint64_t{cl[0]} << 42) | (std::uint64_t{cl[1]} << 21) | cl[2];
      if (seen.insert(k).second) clauses.push_back(cl);
    }
  }
  return Instance(n, std::move(clauses), seed);
}

// Renumbering produced by trim(). Trimming never fixes variable values, so
// frozen_values is empty for maps produced here; the field exists for maps
// composed with other reductions.
struct VariableMap {
  static constexpr std::int64_t kRemoved = -1;

  std::vector<std::int64_t> forward;                   // old index -> new or kRemoved
  std::vector<std::pair<Var, std::uint8_t>> frozen_values;  // old index -> value

  bool is_identity() const {
    for (std::size_t i = 0; i < forward.size(); ++i)
      if (forward[i] != static_cast<std::int64_t>(i)) return false;
    return frozen_values.empty();
  }

  // Kept old indices in new-index order.
  std::vector<Var> inverse() const {
    std::vector<Var> inv;
    for (std::size_t i = 0; i < forward.size(); ++i)
      if (forward[i] != kRemoved) {
        if (static_cast<std::size_t>(forward[i]) >= inv.size())
          inv.resize(static_cast<std::size_t>(forward[i]) + 1);
        inv[static_cast<std::size_t>(forward[i])] = static_cast<Var>(i);
      }
    return inv;
  }
};

namespace detail {

struct TrimTrace {
  std::vector<bool> clause_alive;
  std::vector<std::uint32_t> removal_order;  // clause indices, in removal order
};

// Leaf removal: repeatedly delete clauses holding two or more variables of
// degree 1. Each sweep runs degree-0 removal first (implicit: such variables
// are dropped at compaction) and then removes every currently bad clause in
// index order.
inline TrimTrace leaf_removal(const Instance& inst) {
  TrimTrace t;
  t.clause_alive.assign(inst.n_clauses(), true);
  std::vector<std::uint32_t> deg = inst.degrees();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t ci = 0; ci < inst.n_clauses(); ++ci) {
      if (!t.clause_alive[ci]) continue;
      const Clause& c = inst.clauses()[ci];
      const int leaves = (deg[c[0]] == 1) + (deg[c[1]] == 1) + (deg[c[2]] == 1);
      if (leaves >= 2) {
        t.clause_alive[ci] = false;
        t.removal_order.push_back(ci);
        for (Var v : c) --deg[v];
        changed = true;
      }
    }
  }
  return t;
}

}  // namespace detail

// Removes degree-0 variables and clauses with at least two degree-1 variables
// until a fixed point. Kept variables are renumbered preserving order; kept
// clauses keep their relative order.
inline std::pair<Instance, VariableMap> trim(const Instance& inst) {
  const detail::TrimTrace t = detail::leaf_removal(inst);
  std::vector<std::uint32_t> deg(inst.n_vars(), 0);
  for (std::uint32_t ci = 0; ci < inst.n_clauses(); ++ci)
    if (t.clause_alive[ci])
      for (Var v : inst.clauses()[ci]) ++deg[v];

  VariableMap map;
  map.forward.assign(inst.n_vars(), VariableMap::kRemoved);
  std::int64_t next = 0;
  for (Var v = 0; v < inst.n_vars(); ++v)
    if (deg[v] > 0) map.forward[v] = next++;

  std::vector<Clause> kept;
  for (std::uint32_t ci = 0; ci < inst.n_clauses(); ++ci) {
    if (!t.clause_alive[ci]) continue;
    const Clause& c = inst.clauses()[ci];
    kept.push_back({static_cast<Var>(map.forward[c[0]]),
                    static_cast<Var>(map.forward[c[1]]),
                    static_cast<Var>(map.forward[c[2]])});
  }
  return {Instance(static_cast<std::size_t>(next), std::move(kept), inst.seed(),
                   inst.n_original()),
          std::move(map)};
}

// Extends a satisfying assignment of trim(original) to a satisfying assignment
// of `original` by re-adding removed clauses in reverse removal order; each
// such clause has at least two variables that no later clause constrains.
inline Assignment lift_solution(const Instance& original,
                                const Assignment& trimmed_solution) {
  const detail::TrimTrace t = detail::leaf_removal(original);
  const auto [trimmed, map] = trim(original);
  if (trimmed_solution.size() != trimmed.n_vars())
    throw DimensionError("assignment does not match trimmed instance");
  std::vector<int> value(original.n_vars(), -1);
  for (Var v = 0; v < original.n_vars(); ++v)
    if (map.forward[v] != VariableMap::kRemoved)
      value[v] = trimmed_solution[static_cast<std::size_t>(map.forward[v])];
  for (auto it = t.removal_order.rbegin(); it != t.removal_order.rend(); ++it) {
    const Clause& c = original.clauses()[*it];
    int sum = 0;
    for (Var v : c)
      if (value[v] == 1) ++sum;
    for (Var v : c) {
      if (value[v] != -1) continue;
      value[v] = sum == 0 ? 1 : 0;
      sum += value[v];
    }
  }
  Assignment x(original.n_vars());
  for (Var v = 0; v < original.n_vars(); ++v) x.set(v, value[v] == 1);
  return x;
}

// Appends one clause drawn uniformly from the 3-subsets that are not already
// clauses and whose bits under x1 do not sum to 1. Deterministic in seed.
inline Instance add_contradicting_clause(const Instance& inst,
                                         const Assignment& x1,
                                         std::uint64_t seed) {
  const std::size_t n = inst.n_vars();
  if (x1.size() != n) throw DimensionError("assignment length mismatch");
  const auto contradicts = [&](const Clause& c) {
    return x1[c[0]] + x1[c[1]] + x1[c[2]] != 1;
  };
  const std::uint64_t ones = x1.popcount();
  const std::uint64_t zeros = n - ones;
  std::uint64_t existing = 0;
  for (const auto& c : inst.clauses()) existing += contradicts(c);
  const std::uint64_t exact_one = ones * (zeros < 2 ? 0 : zeros * (zeros - 1) / 2);
  const std::uint64_t candidates = choose3(n) - exact_one - existing;
  if (candidates == 0)
    throw NoContradictingClause("no 3-subset contradicts the assignment");

  Rng rng(seed);
  if (candidates * 64 >= choose3(n)) {
    while (true) {
      const auto a = static_cast<Var>(rng.below(n));
      const auto b = static_cast<Var>(rng.below(n));
      const auto c = static_cast<Var>(rng.below(n));
      if (a == b || b == c || a == c) continue;
      const Clause cl = make_clause(a, b, c);
      if (contradicts(cl) && !inst.contains_clause(cl))
        return inst.with_clause(cl);
    }
  }
  std::uint64_t pick = rng.below(candidates);
  for (Var a = 0; a < n; ++a)
    for (Var b = a + 1; b < n; ++b)
      for (Var c = b + 1; c < n; ++c) {
        const Clause cl{a, b, c};
        if (!contradicts(cl) || inst.contains_clause(cl)) continue;
        if (pick-- == 0) return inst.with_clause(cl);
      }
  throw NoContradictingClause("candidate enumeration exhausted");
}

// Text format:
//   c <comment>
//   c seed <s> n_original <n>   (optional provenance, restored on read)
//   p ec3 <n> <m>
//   <i> <j> <k>      (m lines, 1-based)
inline std::string write_instance(const Instance& inst, bool provenance = false) {
  std::ostringstream out;
  if (provenance)
    out << "c seed " << inst.seed() << " n_original " << inst.n_original() << '\n';
  out << "p ec3 " << inst.n_vars() << ' ' << inst.n_clauses() << '\n';
  for (const auto& c : inst.clauses())
    out << c[0] + 1 << ' ' << c[1] + 1 << ' ' << c[2] + 1 << '\n';
  return out.str();
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::uint64_t parse_uint(std::string_view tok, std::size_t line) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError(line, "expected a nonnegative integer, got '" +
                               std::string(tok) + "'");
  return v;
}

}  // namespace detail

inline Instance read_instance(std::string_view text) {
  std::optional<std::pair<std::uint64_t, std::uint64_t>> header;
  std::vector<Clause> clauses;
  std::unordered_set<std::uint64_t> seen;
  std::uint64_t seed = 0;
  std::optional<std::size_t> n_original;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "c" || line.front() == 'c') {
      // Provenance comment written by write_instance(inst, true).
      if (tok.size() == 5 && tok[0] == "c" && tok[1] == "seed" && tok[3] == "n_original") {
        seed = detail::parse_uint(tok[2], line_no);
        n_original = detail::parse_uint(tok[4], line_no);
      }
      continue;
    }
    if (tok[0] == "p") {
      if (header) throw ParseError(line_no, "duplicate header");
      if (tok.size() != 4 || tok[1] != "ec3")
        throw ParseError(line_no, "header must be 'p ec3 <n> <m>'");
      header.emplace(detail::parse_uint(tok[2], line_no),
                     detail::parse_uint(tok[3], line_no));
      if (header->first >= (std::uint64_t{1} << 21))
        throw ParseError(line_no, "variable count too large");
      continue;
    }
    if (!header) throw ParseError(line_no, "clause before header");
    if (tok.size() != 3) throw ParseError(line_no, "clause needs 3 indices");
    Clause c{};
    for (int k = 0; k < 3; ++k) {
      const std::uint64_t v = detail::parse_uint(tok[k], line_no);
      if (v < 1 || v > header->first)
        throw ParseError(line_no, "index out of range: " + std::to_string(v));
      c[k] = static_cast<Var>(v - 1);
    }
    std::sort(c.begin(), c.end());
    if (c[0] == c[1] || c[1] == c[2])
      throw ParseError(line_no, "repeated index within clause");
    const std::uint64_t k =
        (std::uint64_t{c[0]} << 42) | (std::uint64_t{c[1]} << 21) | c[2];
    if (!seen.insert(k).second) throw ParseError(line_no, "duplicate clause");
    if (clauses.size() == header->second)
      throw ParseError(line_no, "more clauses than declared");
    clauses.push_back(c);
  }
  if (!header) throw ParseError(line_no, "missing header");
  if (clauses.size() != header->second)
    throw ParseError(line_no, "expected " + std::to_string(header->second) +
                                  " clauses, found " +
                                  std::to_string(clauses.size()));
  return Instance(header->first, std::move(clauses), seed, n_original);
}

}  // namespace ec3pt
