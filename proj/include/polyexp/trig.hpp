#pragma once

// Truncated trigonometric Fourier series on (-R, R) and its termwise derivatives.
// The constant term drops out on differentiation, which is the information
// this baseline loses by construction.

#include <Eigen/Core>

#include <cmath>
#include <numbers>

#include "polyexp/errors.hpp"
#include "polyexp/grid.hpp"
#include "polyexp/result.hpp"

namespace polyexp {

struct TrigCoeffs {
  double R;
  int N;
  double a0;
  Eigen::VectorXd a;  ///< cosine coefficients a_1..a_N
  Eigen::VectorXd b;  ///< sine coefficients b_1..b_N
};

struct TrigRange {
  int lo = 3;
  int hi = 25;
};

namespace detail {

// cos(pi n x / R) and sin(...) for n = 1..N at every node (row n-1).
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> trig_tables(const Grid1D& grid, int N) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd C(N, n), S(N, n);
  const double k = std::numbers::pi / grid.R();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = grid.node(static_cast<std::size_t>(i));
    for (int m = 1; m <= N; ++m) {
      C(m - 1, i) = std::cos(k * m * x);
      S(m - 1, i) = std::sin(k * m * x);
    }
  }
  return {C, S};
}

}  // namespace detail

/// a0 = (1/2R) int f, a_n = (1/R) int f cos(pi n x / R), b_n likewise with sin.
inline TrigCoeffs trig_project(const SampledFunction1D& f, int N) {
  if (N < 1) throw ArgumentError("trigonometric cut-off must be at least 1");
  const Grid1D& g = f.grid();
  const Eigen::VectorXd fw = f.values().cwiseProduct(g.weights());
  const auto [C, S] = detail::trig_tables(g, N);
  return {g.R(), N, fw.sum() / (2.0 * g.R()), C * fw / g.R(), S * fw / g.R()};
}

/// Partial sum (order 0) or its termwise derivative (order 1, 2) at the nodes.
inline Eigen::VectorXd trig_values(const TrigCoeffs& c, const Grid1D& grid, int order) {
  if (order < 0 || order > 2) throw ArgumentError("derivative order must be 0, 1 or 2");
  if (std::abs(grid.R() - c.R) > 1e-12 * c.R) throw DomainError("grid and series use different R");
  const auto [C, S] = detail::trig_tables(grid, c.N);
  Eigen::VectorXd k(c.N);
  for (int m = 1; m <= c.N; ++m) k[m - 1] = std::numbers::pi * m / c.R;
  switch (order) {
    case 0:
      return (C.transpose() * c.a + S.transpose() * c.b).array() + c.a0;
    case 1:
      return S.transpose() * (-k.cwiseProduct(c.a)) + C.transpose() * k.cwiseProduct(c.b);
    default: {
      const Eigen::VectorXd k2 = k.cwiseAbs2();
      return -(C.transpose() * k2.cwiseProduct(c.a) + S.transpose() * k2.cwiseProduct(c.b));
    }
  }
}

/// Misfits closer than this fraction of sup |f| count as ties.
inline constexpr double kTrigTieTolerance = 1e-10;

/// argmin over N in range of sup |f - partial sum_N|, smallest N on ties.
inline int trig_select_cutoff(const SampledFunction1D& f, const TrigRange& range = {}) {
  if (range.lo < 1 || range.lo > range.hi) throw ArgumentError("invalid trigonometric cut-off range");
  const Grid1D& g = f.grid();
  const TrigCoeffs full = trig_project(f, range.hi);
  const auto [C, S] = detail::trig_tables(g, range.hi);
  Eigen::VectorXd r = f.values().array() - full.a0;
  for (int m = 1; m < range.lo; ++m)
    r -= full.a[m - 1] * C.row(m - 1).transpose() + full.b[m - 1] * S.row(m - 1).transpose();
  const double tie = kTrigTieTolerance * f.values().cwiseAbs().maxCoeff();
  int best = range.lo;
  double best_misfit = 0.0;
  for (int m = range.lo; m <= range.hi; ++m) {
    r -= full.a[m - 1] * C.row(m - 1).transpose() + full.b[m - 1] * S.row(m - 1).transpose();
    const double misfit = r.cwiseAbs().maxCoeff();
    if (m == range.lo || misfit < best_misfit - tie) {
      best = m;
      best_misfit = misfit;
    }
  }
  return best;
}

inline DerivativeResult1D trig_derivative(const TrigCoeffs& c, const Grid1D& grid, int order) {
  if (order != 1 && order != 2) throw ArgumentError("trigonometric derivative order must be 1 or 2");
  return {SampledFunction1D(grid, trig_values(c, grid, order)), Method::trig,
          order == 1 ? Derivative::dx : Derivative::dxx, ParameterRecord{{c.N}, {}, {}, {}}};
}

}  // namespace polyexp
