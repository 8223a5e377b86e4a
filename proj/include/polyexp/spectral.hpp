#pragma once

// Truncated expansions in the polynomial-exponential basis: projection in the
// trapezoid inner product of the sampling grid, residual-based cut-off selection, and term-by-term
// differentiation in 1D and on tensor grids in 2D.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "polyexp/basis.hpp"
#include "polyexp/errors.hpp"
#include "polyexp/grid.hpp"
#include "polyexp/result.hpp"

namespace polyexp {

using BasisPtr = std::shared_ptr<const BasisSpec>;

struct SpectralCoeffs1D {
  BasisPtr basis;
  int N;
  Eigen::VectorXd a;  ///< a(n-1) = <f, Psi_n>
};

struct SpectralCoeffs2D {
  BasisPtr basis;
  int N1;
  int N2;
  Eigen::MatrixXd a;  ///< a(n1-1, n2-1) = <f, Psi_n1 (x) Psi_n2>
};

/// Inclusive cut-off scan range.
struct CutoffRange {
  int lo = 3;
  int hi = 25;
};

struct CutoffReport {
  std::vector<std::pair<int, double>> candidates;  ///< (N, residual_sup)
  int chosen_N = 0;
  double threshold = 0.0;
  bool adaptive = false;  ///< threshold raised to the noise floor of the scan
};

inline constexpr double kDefaultCutoffThreshold = 0.01;
/// Relative slack over the smallest scanned residual in the adaptive rule.
inline constexpr double kNoiseFloorSlack = 0.01;

namespace detail {

inline void check_same_R(const BasisSpec& basis, double R) {
  if (std::abs(basis.R() - R) > 1e-12 * basis.R()) throw DomainError("data grid and basis use different R");
}

inline void check_cutoff(const BasisSpec& basis, int N) {
  if (N < 1 || N > basis.n_max()) throw ArgumentError("cut-off must lie in [1, n_max]");
}

}  // namespace detail

/// Psi tables at the nodes of a grid plus the Cholesky factor of the trapezoid
/// Gram matrix G = Psi W Psi^T. Rows of phi = L^{-1} psi are orthonormal in the
/// trapezoid inner product, so truncations of their coefficients are nested.
struct GridTables : BasisTables {
  Eigen::MatrixXd gram_chol;  ///< lower triangular, leading `usable` columns valid
  Eigen::MatrixXd phi;
  int usable = 0;  ///< largest N whose leading Gram block is positive definite
};

namespace detail {

inline GridTables make_grid_tables(const BasisSpec& basis, const Grid1D& grid) {
  GridTables t{make_tables(basis, grid, basis.n_max()), {}, {}, 0};
  const Eigen::Index n = t.psi.rows();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  G.selfadjointView<Eigen::Lower>().rankUpdate(t.psi * grid.weights().cwiseSqrt().asDiagonal());
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d = G(j, j) - L.row(j).head(j).squaredNorm();
    if (!(d > 1e-10 * G(j, j))) break;
    L(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) L(i, j) = (G(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
    t.usable = static_cast<int>(j + 1);
  }
  t.gram_chol = std::move(L);
  const Eigen::Index u = t.usable;
  const Eigen::MatrixXd Linv =
      t.gram_chol.topLeftCorner(u, u).triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(u, u));
  t.phi.noalias() = Linv * t.psi.topRows(u);
  return t;
}

}  // namespace detail

/// Tables cached per (basis, grid). Entries keep their basis alive.
inline std::shared_ptr<const GridTables> node_tables(const BasisPtr& basis, const Grid1D& grid) {
  detail::check_same_R(*basis, grid.R());
  using Key = std::tuple<const BasisSpec*, double, std::size_t>;
  struct Entry {
    BasisPtr basis;
    std::shared_ptr<const GridTables> tables;
  };
  static std::mutex mu;
  static std::map<Key, Entry> cache;
  const Key key{basis.get(), grid.R(), grid.size()};
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(key); it != cache.end()) return it->second.tables;
  if (cache.size() >= 32) cache.clear();
  auto tables = std::make_shared<const GridTables>(detail::make_grid_tables(*basis, grid));
  cache.emplace(key, Entry{basis, tables});
  return tables;
}

namespace detail {

inline void check_resolvable(const GridTables& t, int N) {
  if (N > t.usable) throw ArgumentError("cut-off " + std::to_string(N) + " exceeds what the grid resolves");
}

// a = G_N^{-1} b from the leading Cholesky block.
inline Eigen::VectorXd gram_solve(const GridTables& t, Eigen::VectorXd b) {
  const auto N = b.size();
  const auto L = t.gram_chol.topLeftCorner(N, N).triangularView<Eigen::Lower>();
  L.solveInPlace(b);
  L.transpose().solveInPlace(b);
  return b;
}

}  // namespace detail

// ---------------------------------------------------------------- 1D

/// Trapezoid least-squares coefficients: a = G_N^{-1} b with b_n = <f, Psi_n>_h.
/// G_N is the identity up to quadrature error, so a_n matches b_n to O(h^2),
/// and any f in the span of Psi_1..Psi_N is recovered to rounding.
inline SpectralCoeffs1D project_1d(const SampledFunction1D& f, const BasisPtr& basis, int N) {
  detail::check_same_R(*basis, f.grid().R());
  detail::check_cutoff(*basis, N);
  const auto tables = node_tables(basis, f.grid());
  detail::check_resolvable(*tables, N);
  const Eigen::VectorXd fw = f.values().cwiseProduct(f.grid().weights());
  return {basis, N, detail::gram_solve(*tables, tables->psi.topRows(N) * fw)};
}

/// Samples of sum_n a_n Psi_n^{(order)} on the grid.
inline Eigen::VectorXd expansion_values(const SpectralCoeffs1D& c, const Grid1D& grid, int order) {
  detail::check_same_R(*c.basis, grid.R());
  const auto tables = node_tables(c.basis, grid);
  return tables->order(order).topRows(c.N).transpose() * c.a;
}

inline DerivativeResult1D reconstruct_1d(const SpectralCoeffs1D& c, const Grid1D& grid, int order) {
  static constexpr Derivative kinds[] = {Derivative::value, Derivative::dx, Derivative::dxx};
  detail::check_order(order);
  return {SampledFunction1D(grid, expansion_values(c, grid, order)), Method::polyexp, kinds[order],
          ParameterRecord{{c.N}, {}, {}, {}}};
}

/// sup |f - sum a_n Psi_n| / sup |f| over the grid nodes.
inline double residual_sup(const SampledFunction1D& f, const SpectralCoeffs1D& c) {
  const double scale = sup_norm(f);
  if (!(scale > 0.0)) throw UndefinedMetricError("residual is undefined for an identically zero function");
  return (f.values() - expansion_values(c, f.grid(), 0)).cwiseAbs().maxCoeff() / scale;
}

/// Trapezoid L2 norm of f - sum a_n Psi_n.
inline double residual_l2(const SampledFunction1D& f, const SpectralCoeffs1D& c) {
  const Eigen::VectorXd r = f.values() - expansion_values(c, f.grid(), 0);
  return std::sqrt(f.grid().weights().dot(r.cwiseAbs2()));
}

namespace detail {

inline void check_range(const BasisSpec& basis, const CutoffRange& range) {
  if (range.lo > range.hi) throw ArgumentError("empty cut-off range");
  if (range.lo < 1 || range.hi > basis.n_max()) throw ArgumentError("cut-off range must lie in [1, n_max]");
}

// Residuals for every N in range. In the trapezoid-orthonormal rows of phi the
// truncations are nested, so one pass at range.hi serves the whole scan.
inline std::vector<std::pair<int, double>> scan_residuals(const SampledFunction1D& f, const BasisPtr& basis,
                                                          const CutoffRange& range) {
  check_same_R(*basis, f.grid().R());
  check_range(*basis, range);
  const double scale = sup_norm(f);
  if (!(scale > 0.0)) throw UndefinedMetricError("residual is undefined for an identically zero function");
  const auto tables = node_tables(basis, f.grid());
  check_resolvable(*tables, range.hi);
  const Eigen::VectorXd c = tables->phi.topRows(range.hi) * f.values().cwiseProduct(f.grid().weights());
  Eigen::VectorXd r = f.values();
  for (int n = 1; n < range.lo; ++n) r -= c[n - 1] * tables->phi.row(n - 1).transpose();
  std::vector<std::pair<int, double>> out;
  for (int n = range.lo; n <= range.hi; ++n) {
    r -= c[n - 1] * tables->phi.row(n - 1).transpose();
    out.emplace_back(n, r.cwiseAbs().maxCoeff() / scale);
  }
  return out;
}

inline int smallest_below(const std::vector<std::pair<int, double>>& c, double threshold) {
  for (const auto& [n, r] : c)
    if (r <= threshold) return n;
  return 0;
}

inline int argmin_residual(const std::vector<std::pair<int, double>>& c) {
  auto best = c.front();
  for (const auto& e : c)
    if (e.second < best.second) best = e;
  return best.first;
}

inline double min_residual(const std::vector<std::pair<int, double>>& c) {
  double m = c.front().second;
  for (const auto& e : c) m = std::min(m, e.second);
  return m;
}

inline CutoffReport choose_from(std::vector<std::pair<int, double>> cands, std::optional<double> threshold) {
  CutoffReport rep;
  if (threshold) {
    rep.threshold = *threshold;
  } else {
    const double floor = (1.0 + kNoiseFloorSlack) * min_residual(cands);
    rep.adaptive = floor > kDefaultCutoffThreshold;
    rep.threshold = std::max(kDefaultCutoffThreshold, floor);
  }
  rep.candidates = std::move(cands);
  rep.chosen_N = smallest_below(rep.candidates, rep.threshold);
  if (rep.chosen_N == 0) rep.chosen_N = argmin_residual(rep.candidates);
  return rep;
}

}  // namespace detail

/// Smallest N in range with residual_sup <= threshold; the argmin (smallest N
/// on ties) when no N qualifies.
inline CutoffReport select_cutoff(const SampledFunction1D& f, const BasisPtr& basis, const CutoffRange& range,
                                  double threshold) {
  return detail::choose_from(detail::scan_residuals(f, basis, range), threshold);
}

/// Default rule. Noise keeps residual_sup near the noise level however large N
/// gets, so the threshold is max(0.01, (1 + slack) * smallest residual in the scan):
/// the first N that reaches the noise floor.
inline CutoffReport select_cutoff(const SampledFunction1D& f, const BasisPtr& basis,
                                  const CutoffRange& range = {}) {
  return detail::choose_from(detail::scan_residuals(f, basis, range), std::nullopt);
}

// ---------------------------------------------------------------- 2D

inline SpectralCoeffs2D project_2d(const SampledField2D& f, const BasisPtr& basis, int N1, int N2) {
  detail::check_same_R(*basis, f.grid().R());
  detail::check_cutoff(*basis, N1);
  detail::check_cutoff(*basis, N2);
  const auto tables = node_tables(basis, f.grid().axis());
  detail::check_resolvable(*tables, std::max(N1, N2));
  const Eigen::VectorXd w = f.grid().axis().weights();
  // y pass, then x pass, then G^{-1} on each side
  const Eigen::MatrixXd along_y = f.values() * w.asDiagonal() * tables->psi.topRows(N2).transpose();
  Eigen::MatrixXd a = tables->psi.topRows(N1) * w.asDiagonal() * along_y;
  for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) = detail::gram_solve(*tables, a.col(j));
  for (Eigen::Index i = 0; i < a.rows(); ++i) a.row(i) = detail::gram_solve(*tables, a.row(i).transpose()).transpose();
  return {basis, N1, N2, std::move(a)};
}

/// sum a(n1, n2) Psi_n1^{(ox)}(x) Psi_n2^{(oy)}(y) on the grid.
inline Eigen::MatrixXd expansion_values_2d(const SpectralCoeffs2D& c, const Grid2D& grid, int ox, int oy) {
  detail::check_same_R(*c.basis, grid.R());
  const auto tables = node_tables(c.basis, grid.axis());
  return tables->order(ox).topRows(c.N1).transpose() * c.a * tables->order(oy).topRows(c.N2);
}

inline DerivativeResult2D derivative_2d(const SpectralCoeffs2D& c, const Grid2D& grid, Derivative which) {
  Eigen::MatrixXd v;
  switch (which) {
    case Derivative::value: v = expansion_values_2d(c, grid, 0, 0); break;
    case Derivative::dx: v = expansion_values_2d(c, grid, 1, 0); break;
    case Derivative::dy: v = expansion_values_2d(c, grid, 0, 1); break;
    case Derivative::dxx: v = expansion_values_2d(c, grid, 2, 0); break;
    case Derivative::dyy: v = expansion_values_2d(c, grid, 0, 2); break;
    case Derivative::dxy: v = expansion_values_2d(c, grid, 1, 1); break;
    case Derivative::grad_mag: {
      const Eigen::MatrixXd gx = expansion_values_2d(c, grid, 1, 0);
      const Eigen::MatrixXd gy = expansion_values_2d(c, grid, 0, 1);
      v = (gx.cwiseAbs2() + gy.cwiseAbs2()).cwiseSqrt();
      break;
    }
    case Derivative::laplacian:
      v = expansion_values_2d(c, grid, 2, 0) + expansion_values_2d(c, grid, 0, 2);
      break;
  }
  return {SampledField2D(grid, std::move(v)), Method::polyexp, which, ParameterRecord{{c.N1, c.N2}, {}, {}, {}}};
}

inline double residual_sup(const SampledField2D& f, const SpectralCoeffs2D& c) {
  const double scale = sup_norm(f);
  if (!(scale > 0.0)) throw UndefinedMetricError("residual is undefined for an identically zero function");
  return (f.values() - expansion_values_2d(c, f.grid(), 0, 0)).cwiseAbs().maxCoeff() / scale;
}

struct CutoffReport2D {
  CutoffReport x;  ///< scan over N1 with N2 at the top of the range
  CutoffReport y;  ///< scan over N2 with N1 at the top of the range
  int N1 = 0;
  int N2 = 0;
  double joint_residual = 0.0;
};

/// Per-axis rule: N1 from the residual scan over N1 with N2 = range.hi, N2 likewise,
/// then the residual of the chosen pair. Without a threshold the adaptive
/// noise-floor rule of the 1D selector applies to each scan.
inline CutoffReport2D select_cutoff_2d(const SampledField2D& f, const BasisPtr& basis, const CutoffRange& range = {},
                                       std::optional<double> threshold = std::nullopt) {
  detail::check_same_R(*basis, f.grid().R());
  detail::check_range(*basis, range);
  const double scale = sup_norm(f);
  if (!(scale > 0.0)) throw UndefinedMetricError("residual is undefined for an identically zero function");
  const auto tables = node_tables(basis, f.grid().axis());
  detail::check_resolvable(*tables, range.hi);
  const Eigen::MatrixXd phi = tables->phi.topRows(range.hi);
  const Eigen::VectorXd w = f.grid().axis().weights();
  // coefficients in the trapezoid-orthonormal rows of phi are nested in (n1, n2)
  const Eigen::MatrixXd C = phi * w.asDiagonal() * f.values() * w.asDiagonal() * phi.transpose();
  auto residual = [&](int n1, int n2) {
    const Eigen::MatrixXd v = phi.topRows(n1).transpose() * C.topLeftCorner(n1, n2) * phi.topRows(n2);
    return (f.values() - v).cwiseAbs().maxCoeff() / scale;
  };
  std::vector<std::pair<int, double>> sx, sy;
  for (int n = range.lo; n <= range.hi; ++n) {
    sx.emplace_back(n, residual(n, range.hi));
    sy.emplace_back(n, residual(range.hi, n));
  }
  CutoffReport2D rep;
  rep.x = detail::choose_from(std::move(sx), threshold);
  rep.y = detail::choose_from(std::move(sy), threshold);
  rep.N1 = rep.x.chosen_N;
  rep.N2 = rep.y.chosen_N;
  rep.joint_residual = residual(rep.N1, rep.N2);
  return rep;
}

}  // namespace polyexp
