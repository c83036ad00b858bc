#pragma once

// Independent reference implementations used by the tests. They work from
// clause lists and bit vectors directly and share no code with the library
// beyond the plain data types.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ec3pt/instance.hpp"

namespace oracle {

using ec3pt::Assignment;
using ec3pt::Instance;

inline Assignment bits_of(std::uint64_t x, std::size_t n) {
  std::vector<std::uint8_t> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (x >> i) & 1;
  return Assignment(std::move(b));
}

inline long clause_cost_sum(const Instance& inst, const Assignment& x) {
  long total = 0;
  for (const auto& c : inst.clauses()) {
    const long s = long(x[c[0]]) + long(x[c[1]]) + long(x[c[2]]) - 1;
    total += s * s;
  }
  return total;
}

// All cost-zero assignments by scanning 2^n, sorted lexicographically.
inline std::vector<Assignment> exhaustive_solutions(const Instance& inst) {
  std::vector<Assignment> out;
  const std::size_t n = inst.n_vars();
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
    Assignment a = bits_of(x, n);
    if (clause_cost_sum(inst, a) == 0) out.push_back(std::move(a));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<double> weights(const Instance& inst) {
  std::vector<int> deg(inst.n_vars(), 0);
  for (const auto& c : inst.clauses())
    for (auto v : c) ++deg[v];
  std::vector<double> w(inst.n_vars(), 0.0);
  for (const auto& c : inst.clauses())
    for (int a = 0; a < 3; ++a) {
      const double bj = deg[c[(a + 1) % 3]], bk = deg[c[(a + 2) % 3]];
      w[c[a]] += (4.0 / (bj * bj * bk * bk)) / (1.0 - 4.0 / ((bj + bk) * (bj + bk)));
    }
  return w;
}

inline double dot(const std::vector<double>& w, const Assignment& x) {
  double s = 0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
  return s;
}

struct Best {
  Assignment x;
  double value;
};

// Optimum over the listed solutions; values within tol are ties, resolved
// toward the lexicographically smallest assignment.
inline Best best_of(const std::vector<Assignment>& sols, const std::vector<double>& w,
                    bool minimize, double tol) {
  Best b{sols.front(), dot(w, sols.front())};
  for (const auto& s : sols) {
    const double v = dot(w, s);
    const bool better = minimize ? v < b.value - tol : v > b.value + tol;
    const bool tie = std::abs(v - b.value) <= tol;
    if (better || (tie && s < b.x)) b = {s, v};
  }
  return b;
}

// H = M - 1/2 sum_i B_i Z_i + 1/2 sum_clauses (Z_i Z_j + Z_i Z_k + Z_j Z_k)
//     - lambda sum_i X_i, built from Kronecker products. Qubit i is bit i of
// the basis index.
inline Eigen::MatrixXd pauli_hamiltonian(const Instance& inst, double lambda) {
  const std::size_t n = inst.n_vars();
  const Eigen::Index d = Eigen::Index{1} << n;
  Eigen::Matrix2d I = Eigen::Matrix2d::Identity(), Z, X;
  Z << 1, 0, 0, -1;
  X << 0, 1, 1, 0;
  // Operator acting as `op` on each listed qubit and identity elsewhere.
  auto embed = [&](const std::vector<std::pair<std::size_t, Eigen::Matrix2d>>& ops) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(1, 1);
    for (std::size_t q = n; q-- > 0;) {
      Eigen::Matrix2d f = I;
      for (const auto& [k, o] : ops)
        if (k == q) f = o;
      Eigen::MatrixXd next(m.rows() * 2, m.cols() * 2);
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
          next.block(2 * r, 2 * c, 2, 2) = m(r, c) * f;
      m = next;
    }
    return m;
  };
  std::vector<int> deg(n, 0);
  for (const auto& c : inst.clauses())
    for (auto v : c) ++deg[v];
  Eigen::MatrixXd h = double(inst.n_clauses()) * Eigen::MatrixXd::Identity(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    h -= 0.5 * deg[i] * embed({{i, Z}});
    h -= lambda * embed({{i, X}});
  }
  for (const auto& c : inst.clauses()) {
    h += 0.5 * embed({{c[0], Z}, {c[1], Z}});
    h += 0.5 * embed({{c[0], Z}, {c[2], Z}});
    h += 0.5 * embed({{c[1], Z}, {c[2], Z}});
  }
  return h;
}

}  // namespace oracle
