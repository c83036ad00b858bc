#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "ec3pt/error.hpp"
#include "ec3pt/instance.hpp"

namespace ec3pt {

// Per-variable coefficients of the configuration-dependent 4th-order energy
// shift of a zero-cost state, in units of lambda^4. The configuration-
// independent part is never computed; every quantity built from these weights
// is a difference between two states.
struct CorrectionVector {
  std::vector<double> weights;

  std::size_t n_vars() const noexcept { return weights.size(); }
  double operator[](std::size_t i) const noexcept { return weights[i]; }
};

// Contribution of one clause to the weight of its bit opposite the pair
// (a, b) with degrees Ba, Bb:  (4 / (Ba Bb)^2) / (1 - 4 / (Ba + Bb)^2).
inline double pair_term(std::uint32_t ba, std::uint32_t bb) {
  const double s = static_cast<double>(ba) + static_cast<double>(bb);
  const double p = static_cast<double>(ba) * static_cast<double>(bb);
  return (4.0 / (p * p)) / (1.0 - 4.0 / (s * s));
}

inline CorrectionVector correction_coefficients(const Instance& inst) {
  const auto deg = inst.degrees();
  std::vector<std::vector<double>> terms(inst.n_vars());
  for (const auto& c : inst.clauses()) {
    for (int k = 0; k < 3; ++k) {
      const Var a = c[(k + 1) % 3];
      const Var b = c[(k + 2) % 3];
      if (deg[a] + deg[b] == 2)
        throw UntrimmedDegeneracy(
            "variables " + std::to_string(a + 1) + " and " +
            std::to_string(b + 1) +
            " each appear in a single clause; the 4th-order term diverges");
      terms[c[k]].push_back(pair_term(deg[a], deg[b]));
    }
  }
  CorrectionVector cv;
  cv.weights.resize(inst.n_vars(), 0.0);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    std::sort(terms[i].begin(), terms[i].end());
    double sum = 0.0;
    for (double t : terms[i]) sum += t;
    cv.weights[i] = sum;
  }
  return cv;
}

// sum_i w_i x_i, accumulated in index order.
inline double correction_value(const CorrectionVector& cv, const Assignment& x) {
  if (x.size() != cv.n_vars())
    throw DimensionError("assignment length does not match correction vector");
  double v = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) v += cv.weights[i];
  return v;
}

}  // namespace ec3pt
