#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ec3pt/error.hpp"
#include "ec3pt/evstats.hpp"
#include "ec3pt/instance.hpp"
#include "ec3pt/perturbation.hpp"
#include "ec3pt/rng.hpp"
#include "ec3pt/solver.hpp"

namespace ec3pt {

struct SpectrumOptions {
  enum class Method { kAuto, kDense, kIterative };

  Method method = Method::kAuto;
  std::size_t n_cap = 22;       // any path
  std::size_t dense_max = 12;   // largest n the dense path accepts
  std::size_t dense_auto = 8;   // kAuto goes dense at or below this n
  double tolerance = 1e-10;     // residual norm ||H u - theta u||
  std::size_t max_iterations = 1000;
  std::size_t max_block = 256;
  std::size_t memory_budget = std::size_t{1} << 30;  // bytes for the basis
  std::uint64_t seed = 0x6a09e667f3bcc909ULL;        // random start components
};

// Basis state index x carries variable i in bit i.
inline std::uint64_t state_index(const Assignment& a) {
  std::uint64_t x = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i]) x |= std::uint64_t{1} << i;
  return x;
}

inline Assignment state_assignment(std::uint64_t x, std::size_t n) {
  Assignment a(n);
  for (std::size_t i = 0; i < n; ++i) a.set(i, (x >> i) & 1);
  return a;
}

// H = sum over clauses of (x_i + x_j + x_k - 1)^2 + sum_i field_i x_i
//     - lambda * sum_i (bit flip on i),
// applied without storing the matrix. `field` is empty or has one entry per
// variable.
class Hamiltonian {
 public:
  Hamiltonian(const Instance& inst, std::span<const double> field = {},
              std::size_t n_cap = 22)
      : n_(inst.n_vars()) {
    if (n_ > n_cap || n_ >= 63)
      throw DimensionError("spectral analysis needs n <= " + std::to_string(n_cap) +
                           ", got " + std::to_string(n_));
    if (!field.empty() && field.size() != n_)
      throw DimensionError("field length does not match instance");
    const std::uint64_t dim = std::uint64_t{1} << n_;
    diag_.assign(dim, 0.0);
    std::vector<std::uint64_t> masks;
    for (const auto& c : inst.clauses())
      masks.push_back((std::uint64_t{1} << c[0]) | (std::uint64_t{1} << c[1]) |
                      (std::uint64_t{1} << c[2]));
    for (std::uint64_t x = 0; x < dim; ++x) {
      int e = 0;
      for (std::uint64_t m : masks) {
        const int s = std::popcount(x & m) - 1;
        e += s * s;
      }
      double d = e;
      if (!field.empty())
        for (std::size_t i = 0; i < n_; ++i)
          if ((x >> i) & 1) d += field[i];
      diag_[x] = d;
    }
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t dim() const noexcept { return diag_.size(); }
  const std::vector<double>& diagonal() const noexcept { return diag_; }

  void apply(double lambda, std::span<const double> v, std::span<double> out) const {
    if (v.size() != dim() || out.size() != dim())
      throw DimensionError("state vector length must be 2^n");
    const std::size_t d = dim();
    for (std::size_t x = 0; x < d; ++x) out[x] = diag_[x] * v[x];
    if (lambda == 0.0) return;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t bit = std::size_t{1} << i;
      for (std::size_t x = 0; x < d; ++x) out[x] -= lambda * v[x ^ bit];
    }
  }

 private:
  std::size_t n_;
  std::vector<double> diag_;
};

inline std::vector<double> apply_hamiltonian(const Instance& inst, double lambda,
                                             std::span<const double> v,
                                             std::size_t n_cap = 22) {
  Hamiltonian h(inst, {}, n_cap);
  std::vector<double> out(h.dim());
  h.apply(lambda, v, out);
  return out;
}

struct SpectrumRequest {
  Instance inst;
  std::vector<double> lambdas;
  std::size_t k = 1;
  std::vector<double> field;  // optional longitudinal bias per variable
};

struct SpectrumPoint {
  double lambda = 0.0;
  std::vector<double> energies;   // ascending
  std::vector<double> residuals;  // ||H u - E u|| per level
};

struct SpectrumResult {
  std::vector<SpectrumPoint> points;
};

namespace detail {

struct EigenPairs {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  std::vector<double> residuals;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double residual_norm(const Hamiltonian& h, double lambda, std::span<const double> u,
                            double theta) {
  std::vector<double> hu(h.dim());
  h.apply(lambda, u, hu);
  for (std::size_t i = 0; i < hu.size(); ++i) hu[i] -= theta * u[i];
  return norm(hu);
}

// Sorted diagonal; exact at lambda = 0.
inline EigenPairs classical_lowest(const Hamiltonian& h, std::size_t k) {
  std::vector<std::size_t> idx(h.dim());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto& d = h.diagonal();
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  EigenPairs out;
  for (std::size_t i = 0; i < k; ++i) {
    out.values.push_back(d[idx[i]]);
    std::vector<double> e(h.dim(), 0.0);
    e[idx[i]] = 1.0;
    out.vectors.push_back(std::move(e));
    out.residuals.push_back(0.0);
  }
  return out;
}

inline EigenPairs dense_lowest(const Hamiltonian& h, double lambda, std::size_t k) {
  const std::size_t d = h.dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                            static_cast<Eigen::Index>(d));
  for (std::size_t x = 0; x < d; ++x) {
    m(x, x) = h.diagonal()[x];
    for (std::size_t i = 0; i < h.n(); ++i) m(x, x ^ (std::size_t{1} << i)) = -lambda;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("dense eigensolver failed", {});
  EigenPairs out;
  for (std::size_t i = 0; i < k; ++i) {
    const auto col = es.eigenvectors().col(static_cast<Eigen::Index>(i));
    std::vector<double> u(col.data(), col.data() + d);
    out.values.push_back(es.eigenvalues()(static_cast<Eigen::Index>(i)));
    out.residuals.push_back(residual_norm(h, lambda, u, out.values.back()));
    out.vectors.push_back(std::move(u));
  }
  return out;
}

// Block Davidson iteration: a Krylov-type subspace grown by residuals with a
// diagonal preconditioner, Rayleigh-Ritz on the subspace, and thick restart
// from the lowest Ritz vectors. The block is sized to hold the lowest
// classical cluster (all basis states with diagonal at most the k-th smallest
// value) plus guard vectors, so near-degenerate levels converge together.
inline EigenPairs iterative_lowest(const Hamiltonian& h, double lambda, std::size_t k,
                                   const SpectrumOptions& opt) {
  using Eigen::Index;
  using Mat = Eigen::MatrixXd;
  const std::size_t d = h.dim();
  const auto& diag = h.diagonal();
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return diag[a] < diag[b]; });
  const double cut = diag[idx[k - 1]] + 1e-9;
  std::size_t cluster = k;
  while (cluster < d && diag[idx[cluster]] <= cut) ++cluster;
  const std::size_t guard = std::max<std::size_t>(2, cluster / 4);
  const auto block = static_cast<Index>(
      std::min({d, cluster + guard, std::max(opt.max_block, k + 1)}));

  // The budget is soft: the basis always holds at least two blocks.
  const std::size_t budget_vecs = opt.memory_budget / (2 * sizeof(double) * d);
  const auto wanted = static_cast<std::size_t>(std::max<Index>(3 * block, block + 40));
  const auto max_basis = static_cast<Index>(
      std::min(d, std::max(static_cast<std::size_t>(2 * block), std::min(wanted, budget_vecs))));

  const auto dd = static_cast<Index>(d);
  Mat v(dd, max_basis), hv(dd, max_basis), t(max_basis, max_basis);
  Index m = 0;

  // Appends the columns of s, orthonormalized against the basis and each
  // other; near-dependent columns are dropped.
  auto append = [&](Mat& s) {
    Index added = 0;
    if (s.cols() == 0) return added;
    const Eigen::VectorXd norm0 = s.colwise().norm().transpose();
    for (int pass = 0; pass < 2 && m > 0; ++pass)
      s -= v.leftCols(m) * (v.leftCols(m).transpose() * s);
    const Index m0 = m;
    for (Index j = 0; j < s.cols() && m < max_basis; ++j) {
      Eigen::VectorXd c = s.col(j);
      for (int pass = 0; pass < 2 && m > m0; ++pass)
        c -= v.middleCols(m0, m - m0) * (v.middleCols(m0, m - m0).transpose() * c);
      const double nc = c.norm();
      if (!(nc > 1e-10 * norm0(j))) continue;
      v.col(m) = c / nc;
      h.apply(lambda, std::span<const double>(v.col(m).data(), d),
              std::span<double>(hv.col(m).data(), d));
      t.col(m).head(m + 1) = v.leftCols(m + 1).transpose() * hv.col(m);
      t.row(m).head(m) = t.col(m).head(m).transpose();
      ++m;
      ++added;
    }
    return added;
  };

  Rng rng(opt.seed);
  Mat start(dd, block);
  for (Index j = 0; j < block; ++j) {
    for (Index x = 0; x < dd; ++x) start(x, j) = 1e-3 * (rng.uniform() - 0.5);
    start(static_cast<Index>(idx[j]), j) += 1.0;
  }
  append(start);

  std::vector<double> last_res(k, INFINITY);
  for (std::size_t iter = 0; iter < opt.max_iterations; ++iter) {
    Eigen::SelfAdjointEigenSolver<Mat> es(t.topLeftCorner(m, m));
    const Index nb = std::min(block, m);
    const Mat y = es.eigenvectors().leftCols(nb);
    Mat u = v.leftCols(m) * y;
    Mat r = hv.leftCols(m) * y;
    std::vector<double> theta(nb), res(nb);
    for (Index a = 0; a < nb; ++a) {
      theta[a] = es.eigenvalues()(a);
      r.col(a) -= theta[a] * u.col(a);
      res[a] = r.col(a).norm();
    }
    for (std::size_t a = 0; a < k; ++a) last_res[a] = res[a];

    bool done = true;
    for (std::size_t a = 0; a < k; ++a) done = done && res[a] <= opt.tolerance;
    if (done) {
      EigenPairs out;
      bool confirmed = true;
      for (std::size_t a = 0; a < k; ++a) {
        const Index ai = static_cast<Index>(a);
        std::vector<double> ua(u.col(ai).data(), u.col(ai).data() + d);
        const double nu = norm(ua);
        for (double& x : ua) x /= nu;
        const double er = residual_norm(h, lambda, ua, theta[a]);
        confirmed = confirmed && er <= opt.tolerance;
        out.values.push_back(theta[a]);
        out.residuals.push_back(er);
        out.vectors.push_back(std::move(ua));
      }
      if (confirmed) return out;
    }

    std::vector<Index> open;
    for (Index a = 0; a < nb; ++a)
      if (res[a] > opt.tolerance * 1e-2) open.push_back(a);
    Mat s(dd, static_cast<Index>(open.size()));
    for (std::size_t j = 0; j < open.size(); ++j) {
      const Index a = open[j];
      for (Index x = 0; x < dd; ++x) {
        double den = diag[x] - theta[a];
        if (std::abs(den) < 0.1) den = den < 0 ? -0.1 : 0.1;
        s(x, static_cast<Index>(j)) = r(x, a) / den;
      }
    }
    if (done || m + s.cols() > max_basis) {
      m = 0;
      append(u);
    }
    if (append(s) == 0 && m < max_basis) {
      Mat g(dd, 1);
      for (Index x = 0; x < dd; ++x) g(x, 0) = rng.uniform() - 0.5;
      append(g);
    }
  }
  throw ConvergenceFailure("eigensolver did not converge in " +
                               std::to_string(opt.max_iterations) + " iterations",
                           last_res);
}

inline EigenPairs lowest(const Hamiltonian& h, double lambda, std::size_t k,
                         const SpectrumOptions& opt) {
  if (k == 0 || k > h.dim()) throw InvalidArgument("k must lie in [1, 2^n]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("lambda must be finite and nonnegative");
  if (lambda == 0.0) return classical_lowest(h, k);
  using M = SpectrumOptions::Method;
  if (opt.method == M::kDense) {
    if (h.n() > opt.dense_max)
      throw DimensionError("dense path needs n <= " + std::to_string(opt.dense_max));
    return dense_lowest(h, lambda, k);
  }
  if (opt.method == M::kAuto && (h.n() <= opt.dense_auto || 4 * k >= h.dim()) &&
      h.n() <= opt.dense_max)
    return dense_lowest(h, lambda, k);
  return iterative_lowest(h, lambda, k, opt);
}

inline void check_lambdas(std::span<const double> lambdas) {
  if (lambdas.empty()) throw InvalidArgument("lambda grid is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 0.0) || !std::isfinite(lambdas[i]))
      throw InvalidArgument("lambda values must be finite and nonnegative");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
      throw InvalidArgument("lambda values must be strictly increasing");
  }
}

}  // namespace detail

inline SpectrumResult lowest_eigenvalues(const SpectrumRequest& req,
                                         const SpectrumOptions& opt = {}) {
  detail::check_lambdas(req.lambdas);
  Hamiltonian h(req.inst, req.field, opt.n_cap);
  SpectrumResult out;
  for (double lambda : req.lambdas) {
    auto ep = detail::lowest(h, lambda, req.k, opt);
    out.points.push_back({lambda, std::move(ep.values), std::move(ep.residuals)});
  }
  return out;
}

// CSV with header lambda,level_index,energy,residual.
inline std::string spectrum_csv(const SpectrumResult& r) {
  std::string s = "lambda,level_index,energy,residual\n";
  char buf[128];
  for (const auto& p : r.points)
    for (std::size_t i = 0; i < p.energies.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.3e\n", p.lambda, i, p.energies[i],
                    p.residuals[i]);
      s += buf;
    }
  return s;
}

struct SplittingFit {
  FitResult fit;  // fit.estimate is the exponent
  std::vector<double> lambdas;
  std::vector<double> splittings;
};

// Power-law exponent of E_b - E_a on the lambda grid.
inline SplittingFit splitting_exponent(const Instance& inst, std::pair<std::size_t, std::size_t> levels,
                                       std::span<const double> lambdas,
                                       std::span<const double> field = {},
                                       const SpectrumOptions& opt = {}) {
  const auto [a, b] = levels;
  if (!(a < b)) throw InvalidArgument("levels must satisfy a < b");
  detail::check_lambdas(lambdas);
  Hamiltonian h(inst, field, opt.n_cap);
  const auto classical = detail::classical_lowest(h, b + 1);
  if (std::abs(classical.values[a] - classical.values[b]) > 1e-12)
    throw InvalidArgument("levels are not degenerate at lambda = 0");
  SplittingFit out;
  std::vector<Point> pts;
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw InvalidArgument("splitting fit needs lambda > 0");
    const auto ep = detail::lowest(h, lambda, b + 1, opt);
    const double gap = ep.values[b] - ep.values[a];
    if (!(gap >= 1e-13))
      throw UnderflowAtScale("splitting below 1e-13 at lambda = " + std::to_string(lambda));
    out.lambdas.push_back(lambda);
    out.splittings.push_back(gap);
    pts.push_back({lambda, gap});
  }
  out.fit = fit_power_law(pts);
  return out;
}

struct PtGapPoint {
  double lambda = 0.0;
  double exact = 0.0;      // E(xB level) - E(xA level)
  double predicted = 0.0;  // lambda^4 (w.xB - w.xA)
  double rel_error = 0.0;
};

// Compares the exact level difference of the states localized on xA and xB
// with the 4th-order prediction from the correction weights.
inline std::vector<PtGapPoint> pt_gap_check(const Instance& inst, const Assignment& xa,
                                            const Assignment& xb,
                                            std::span<const double> lambdas,
                                            const SpectrumOptions& opt = {}) {
  detail::check_lambdas(lambdas);
  if (cost(inst, xa) != 0 || cost(inst, xb) != 0)
    throw InvalidArgument("xA and xB must be solutions");
  if (hamming_distance(xa, xb) < 6)
    throw InvalidArgument("xA and xB must differ in at least 6 bits");
  const auto sols = enumerate(inst);
  for (const auto& s : sols.solutions) {
    if (s == xa || s == xb) continue;
    if (hamming_distance(s, xa) < 3 || hamming_distance(s, xb) < 3)
      throw InvalidArgument("another solution lies within distance 2 of xA or xB");
  }
  const auto cv = correction_coefficients(inst);
  const double dw = correction_value(cv, xb) - correction_value(cv, xa);
  if (dw == 0.0) throw InvalidArgument("xA and xB have equal corrections");

  Hamiltonian h(inst, {}, opt.n_cap);
  const std::size_t k = static_cast<std::size_t>(sols.count);
  const std::uint64_t ia = state_index(xa), ib = state_index(xb);
  std::vector<PtGapPoint> out;
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw InvalidArgument("pt_gap_check needs lambda > 0");
    const auto ep = detail::lowest(h, lambda, k, opt);
    auto match = [&](std::uint64_t x) {
      std::size_t best = 0;
      double ov = -1.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double o = ep.vectors[i][x] * ep.vectors[i][x];
        if (o > ov) {
          ov = o;
          best = i;
        }
      }
      if (ov < 0.9)
        throw TrackingFailure("no level has overlap >= 0.9 with the classical state at lambda = " +
                              std::to_string(lambda));
      return best;
    };
    const std::size_t la = match(ia), lb = match(ib);
    if (la == lb) throw TrackingFailure("xA and xB matched to the same level");
    PtGapPoint p;
    p.lambda = lambda;
    p.exact = ep.values[lb] - ep.values[la];
    p.predicted = std::pow(lambda, 4) * dw;
    p.rel_error = std::abs(p.exact - p.predicted) / std::abs(p.predicted);
    out.push_back(p);
  }
  return out;
}

struct MonotonicityPoint {
  double lambda = 0.0;
  double e0_base = 0.0;
  double e0_grown = 0.0;
  double difference = 0.0;
  bool holds = false;     // 0 < difference < 1 strictly
  bool boundary = false;  // difference is exactly 0 or 1
};

// Ground-energy change when one clause is added, on each lambda.
inline std::vector<MonotonicityPoint> clause_monotonicity_check(const Instance& base,
                                                                const Instance& grown,
                                                                std::span<const double> lambdas,
                                                                const SpectrumOptions& opt = {}) {
  detail::check_lambdas(lambdas);
  if (base.n_vars() != grown.n_vars() || grown.n_clauses() != base.n_clauses() + 1)
    throw InvalidArgument("grown instance must be the base plus one clause");
  for (const auto& c : base.clauses())
    if (!grown.contains_clause(c))
      throw InvalidArgument("grown instance must contain every base clause");
  Hamiltonian hb(base, {}, opt.n_cap), hg(grown, {}, opt.n_cap);
  std::vector<MonotonicityPoint> out;
  for (double lambda : lambdas) {
    MonotonicityPoint p;
    p.lambda = lambda;
    p.e0_base = detail::lowest(hb, lambda, 1, opt).values[0];
    p.e0_grown = detail::lowest(hg, lambda, 1, opt).values[0];
    p.difference = p.e0_grown - p.e0_base;
    p.holds = p.difference > 0.0 && p.difference < 1.0;
    p.boundary = p.difference == 0.0 || p.difference == 1.0;
    out.push_back(p);
  }
  return out;
}

// Small gadgets whose two zero-energy states differ by three (resp. four)
// flips. Attachment bits are real qubits held near 0 by a unit field.
struct Gadget {
  Instance inst;
  std::vector<double> field;
  Assignment a, b;
};

inline Gadget three_flip_gadget() {
  Instance inst(5, {make_clause(0, 2, 3), make_clause(1, 3, 4)});
  return {inst, {1, 1, 0, 0, 0}, Assignment::from_string("00010"),
          Assignment::from_string("00101")};
}

inline Gadget four_flip_gadget() {
  Instance inst(7, {make_clause(0, 3, 4), make_clause(1, 4, 5), make_clause(2, 5, 6)});
  return {inst, {1, 1, 1, 0, 0, 0, 0}, Assignment::from_string("0000101"),
          Assignment::from_string("0001010")};
}

}  // namespace ec3pt
