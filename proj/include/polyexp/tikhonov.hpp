#pragma once

// Tikhonov differentiation: u approximates f' by minimizing
//   || A u - (f - f(-R)) ||^2 + gamma ||u||^2
// in the trapezoid-weighted discrete L2 norm, A the cumulative trapezoid
// antiderivative from -R. gamma is taken at the corner of the L-curve.
//
// The normal equations A^T W A + gamma W are dense. The same minimizer solves
// the sparse saddle-point system in (v, u, lambda), v = A u imposed through
// its two-term recurrence, which SparseLU factors in O(n).

#include <Eigen/Core>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "polyexp/errors.hpp"
#include "polyexp/grid.hpp"
#include "polyexp/result.hpp"

namespace polyexp {

/// gamma_k = 1e-5 + 5e-4 k, k = 0..19: the uniform partition of (1e-5, 1e-2).
inline std::vector<double> default_gamma_grid() {
  std::vector<double> g;
  for (int k = 0; 1e-5 + 5e-4 * k < 1e-2; ++k) g.push_back(1e-5 + 5e-4 * k);
  return g;
}

struct LCurveCorner {
  std::size_t index;
  double gamma;
  std::vector<double> curvature;  ///< signed, per scan point; zero at the two ends
  bool low_confidence;            ///< the polyline barely turns anywhere
  bool unique_dominant;           ///< one local maximum among points with curvature >= half the peak
};

/// Turning angle (radians) below which a corner is reported as low-confidence.
inline constexpr double kCornerMinTurn = 1e-2;

/// Corner of the polyline (log gamma, log l): the interior point of largest
/// signed three-point (Menger) curvature, counter-clockwise positive; ties go
/// to the smaller gamma.
inline LCurveCorner lcurve_corner(const std::vector<double>& gamma, const std::vector<double>& l) {
  const std::size_t n = gamma.size();
  if (n < 5) throw ArgumentError("L-curve corner needs at least 5 scan points");
  if (l.size() != n) throw ArgumentError("gamma and l have different lengths");
  constexpr double tiny = std::numeric_limits<double>::min();
  std::vector<double> px(n), py(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(gamma[k] > 0.0)) throw ArgumentError("gamma values must be positive");
    px[k] = std::log(gamma[k]);
    py[k] = std::log(std::max(l[k], tiny));
  }
  LCurveCorner out{1, gamma[1], std::vector<double>(n, 0.0), false, false};
  double best = -std::numeric_limits<double>::infinity();
  double best_turn = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double ax = px[k] - px[k - 1], ay = py[k] - py[k - 1];
    const double bx = px[k + 1] - px[k], by = py[k + 1] - py[k];
    const double cx = px[k + 1] - px[k - 1], cy = py[k + 1] - py[k - 1];
    const double cross = ax * by - ay * bx;
    const double denom = std::hypot(ax, ay) * std::hypot(bx, by) * std::hypot(cx, cy);
    const double kappa = denom > 0.0 ? 2.0 * cross / denom : 0.0;
    out.curvature[k] = kappa;
    if (kappa > best) {
      best = kappa;
      out.index = k;
      best_turn = std::abs(std::atan2(cross, ax * bx + ay * by));
    }
  }
  out.gamma = gamma[out.index];
  out.low_confidence = !(best > 0.0) || best_turn < kCornerMinTurn;

  int peaks = 0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double c = out.curvature[k];
    if (!(c >= 0.5 * best) || !(best > 0.0)) continue;
    const bool left_ok = k == 1 || c >= out.curvature[k - 1];
    const bool right_ok = k + 2 == n || c > out.curvature[k + 1];
    if (left_ok && right_ok) ++peaks;
  }
  out.unique_dominant = peaks == 1;
  return out;
}

struct TikhonovScan {
  std::vector<double> gamma_grid;
  std::vector<double> l_values;  ///< ||A u_gamma - g||^2 per gamma
  double chosen_gamma;
  LCurveCorner corner;
  SampledFunction1D minimizer;
};

/// Factorizes the saddle-point system once per gamma on a fixed grid.
class TikhonovSolver {
public:
  explicit TikhonovSolver(const Grid1D& grid) : grid_(grid), w_(grid.weights()) {
    assemble(1.0);
    lu_.analyzePattern(K_);
  }

  const Grid1D& grid() const noexcept { return grid_; }

  /// Minimizer u for the antiderivative data g.
  Eigen::VectorXd solve(const Eigen::VectorXd& g, double gamma) {
    if (!(gamma > 0.0)) throw ArgumentError("gamma must be positive");
    const auto n = static_cast<Eigen::Index>(grid_.size());
    if (g.size() != n) throw ArgumentError("data length does not match the grid");
    assemble(gamma);
    lu_.factorize(K_);
    if (lu_.info() != Eigen::Success) throw SolverError("Tikhonov system factorization failed");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * n);
    for (Eigen::Index i = 0; i < n; ++i) rhs[3 * i] = w_[i] * g[i];
    const Eigen::VectorXd z = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success || !z.allFinite()) throw SolverError("Tikhonov solve failed");
    Eigen::VectorXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = z[3 * i + 1];
    return u;
  }

private:
  // Unknowns interleaved per node: (v_i, u_i, lambda_i) at 3i, 3i+1, 3i+2.
  //   W (v - g) + B^T lambda = 0,  gamma W u - T^T lambda = 0,  B v - T u = 0,
  // with row 0 of B v - T u imposing v_0 = 0 and row i the trapezoid step
  // v_i - v_{i-1} - h/2 (u_{i-1} + u_i) = 0.
  void assemble(double gamma) {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    const double hh = 0.5 * grid_.h();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(12 * n));
    auto V = [](Eigen::Index i) { return 3 * i; };
    auto U = [](Eigen::Index i) { return 3 * i + 1; };
    auto L = [](Eigen::Index i) { return 3 * i + 2; };
    for (Eigen::Index i = 0; i < n; ++i) {
      t.emplace_back(V(i), V(i), w_[i]);
      t.emplace_back(U(i), U(i), gamma * w_[i]);
      // constraint row i and its transpose
      t.emplace_back(L(i), V(i), 1.0);
      t.emplace_back(V(i), L(i), 1.0);
      if (i > 0) {
        t.emplace_back(L(i), V(i - 1), -1.0);
        t.emplace_back(V(i - 1), L(i), -1.0);
        t.emplace_back(L(i), U(i - 1), -hh);
        t.emplace_back(U(i - 1), L(i), -hh);
        t.emplace_back(L(i), U(i), -hh);
        t.emplace_back(U(i), L(i), -hh);
      }
    }
    K_.resize(3 * n, 3 * n);
    K_.setFromTriplets(t.begin(), t.end());
  }

  Grid1D grid_;
  Eigen::VectorXd w_;
  Eigen::SparseMatrix<double> K_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

/// Cumulative trapezoid antiderivative from -R: (A u)_i.
inline Eigen::VectorXd cumulative_trapezoid(const Eigen::VectorXd& u, double h) {
  Eigen::VectorXd v(u.size());
  if (u.size() == 0) return v;
  v[0] = 0.0;
  for (Eigen::Index i = 1; i < u.size(); ++i) v[i] = v[i - 1] + 0.5 * h * (u[i - 1] + u[i]);
  return v;
}

/// A^T y for the cumulative trapezoid operator.
inline Eigen::VectorXd cumulative_trapezoid_adjoint(const Eigen::VectorXd& y, double h) {
  const Eigen::Index n = y.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (n < 2) return out;
  double tail = 0.0;  // sum_{i > j} y_i
  for (Eigen::Index j = n - 1; j >= 1; --j) {
    out[j] = 0.5 * h * y[j] + h * tail;
    tail += y[j];
  }
  out[0] = 0.5 * h * tail;
  return out;
}

/// || (A^T W A + gamma W) u - A^T W g || / || A^T W g ||.
inline double tikhonov_optimality_residual(const Grid1D& grid, const Eigen::VectorXd& g, const Eigen::VectorXd& u,
                                           double gamma) {
  const Eigen::VectorXd w = grid.weights();
  const double h = grid.h();
  const Eigen::VectorXd rhs = cumulative_trapezoid_adjoint(w.cwiseProduct(g), h);
  const Eigen::VectorXd lhs =
      cumulative_trapezoid_adjoint(w.cwiseProduct(cumulative_trapezoid(u, h)), h) + gamma * w.cwiseProduct(u);
  const double scale = rhs.norm();
  return scale > 0.0 ? (lhs - rhs).norm() / scale : (lhs - rhs).norm();
}

namespace detail {

inline void check_gamma_grid(const std::vector<double>& gammas) {
  if (gammas.empty()) throw ArgumentError("gamma grid is empty");
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (!(gammas[k] > 0.0)) throw ArgumentError("gamma values must be positive");
    if (k > 0 && !(gammas[k] > gammas[k - 1])) throw ArgumentError("gamma grid must be increasing");
  }
}

inline TikhonovScan tikhonov_scan(TikhonovSolver& solver, const SampledFunction1D& f,
                                  const std::vector<double>& gammas) {
  check_gamma_grid(gammas);
  const Grid1D& grid = f.grid();
  const Eigen::VectorXd g = f.values().array() - f.values()[0];
  const Eigen::VectorXd w = grid.weights();
  std::vector<Eigen::VectorXd> us;
  std::vector<double> ls;
  for (double gamma : gammas) {
    Eigen::VectorXd u = solver.solve(g, gamma);
    const Eigen::VectorXd r = cumulative_trapezoid(u, grid.h()) - g;
    ls.push_back(w.dot(r.cwiseAbs2()));
    us.push_back(std::move(u));
  }
  LCurveCorner corner;
  if (gammas.size() >= 5) {
    corner = lcurve_corner(gammas, ls);
  } else {
    corner = LCurveCorner{0, gammas.front(), std::vector<double>(gammas.size(), 0.0), true, false};
  }
  return {gammas, ls, corner.gamma, corner, SampledFunction1D(grid, us[corner.index])};
}

}  // namespace detail

inline std::pair<TikhonovScan, DerivativeResult1D> tikhonov_first_derivative(
    const SampledFunction1D& f, const std::vector<double>& gammas = default_gamma_grid()) {
  TikhonovSolver solver(f.grid());
  TikhonovScan scan = detail::tikhonov_scan(solver, f, gammas);
  DerivativeResult1D r{scan.minimizer, Method::tikhonov, Derivative::dx, ParameterRecord{{}, scan.chosen_gamma, {}, {}}};
  return {std::move(scan), std::move(r)};
}

struct TikhonovDerivatives {
  TikhonovScan first_scan;
  TikhonovScan second_scan;
  DerivativeResult1D first;
  DerivativeResult1D second;
};

/// First derivative, then the same procedure on it with a fresh L-curve scan.
inline TikhonovDerivatives tikhonov_derivatives(const SampledFunction1D& f,
                                                const std::vector<double>& gammas = default_gamma_grid()) {
  TikhonovSolver solver(f.grid());
  TikhonovScan s1 = detail::tikhonov_scan(solver, f, gammas);
  TikhonovScan s2 = detail::tikhonov_scan(solver, s1.minimizer, gammas);
  const ParameterRecord p{{}, s1.chosen_gamma, s2.chosen_gamma, {}};
  DerivativeResult1D d1{s1.minimizer, Method::tikhonov, Derivative::dx, p};
  DerivativeResult1D d2{s2.minimizer, Method::tikhonov, Derivative::dxx, p};
  return {std::move(s1), std::move(s2), std::move(d1), std::move(d2)};
}

inline DerivativeResult1D tikhonov_second_derivative(const SampledFunction1D& f,
                                                     const std::vector<double>& gammas = default_gamma_grid()) {
  return tikhonov_derivatives(f, gammas).second;
}

}  // namespace polyexp
