#pragma once

// Natural cubic interpolating spline and its derivatives.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "polyexp/errors.hpp"
#include "polyexp/grid.hpp"
#include "polyexp/result.hpp"

namespace polyexp {

struct SplineCurve {
  std::vector<double> knots;
  /// Interval i: S(x) = c0 + c1 t + c2 t^2 + c3 t^3, t = x - knots[i].
  std::vector<std::array<double, 4>> coeffs;
};

/// Interpolates (knots, values) with S'' = 0 at both ends.
inline SplineCurve spline_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 4) throw ArgumentError("spline needs at least 4 knots");
  if (y.size() != n) throw ArgumentError("knot and value counts differ");
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    if (!(h[i] > 0.0)) throw ArgumentError("spline knots must be strictly increasing");
  }
  // Thomas algorithm for the interior second derivatives M_1..M_{n-2}.
  const std::size_t m = n - 2;
  std::vector<double> diag(m), upper(m), rhs(m), M(n, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    diag[k] = 2.0 * (h[i - 1] + h[i]);
    upper[k] = h[i];
    rhs[k] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
  }
  for (std::size_t k = 1; k < m; ++k) {
    const double factor = h[k] / diag[k - 1];  // sub-diagonal entry of row k is h[k]
    diag[k] -= factor * upper[k - 1];
    rhs[k] -= factor * rhs[k - 1];
  }
  M[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t k = m - 1; k-- > 0;) M[k + 1] = (rhs[k] - upper[k] * M[k + 2]) / diag[k];

  SplineCurve s{x, std::vector<std::array<double, 4>>(n - 1)};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    s.coeffs[i] = {y[i], (y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * M[i] + M[i + 1]) / 6.0, 0.5 * M[i],
                   (M[i + 1] - M[i]) / (6.0 * h[i])};
  }
  return s;
}

inline SplineCurve spline_fit(const SampledFunction1D& f) {
  const Eigen::VectorXd x = f.grid().nodes();
  return spline_fit(std::vector<double>(x.begin(), x.end()),
                    std::vector<double>(f.values().begin(), f.values().end()));
}

/// Every stride-th node of f, endpoints included.
inline SampledFunction1D subsample(const SampledFunction1D& f, std::size_t stride) {
  const std::size_t n = f.grid().size();
  if (stride < 1 || (n - 1) % stride != 0) throw ArgumentError("stride must divide the number of grid cells");
  const Grid1D coarse(f.grid().R(), (n - 1) / stride + 1);
  Eigen::VectorXd v(static_cast<Eigen::Index>(coarse.size()));
  for (std::size_t i = 0; i < coarse.size(); ++i) v[static_cast<Eigen::Index>(i)] = f[i * stride];
  return SampledFunction1D(coarse, std::move(v));
}

/// S^{(order)}(x), order in {0, 1, 2, 3}.
inline double spline_eval(const SplineCurve& s, double x, int order) {
  if (order < 0 || order > 3) throw ArgumentError("spline derivative order must be in [0, 3]");
  const double lo = s.knots.front(), hi = s.knots.back();
  const double tol = 1e-12 * std::max(1.0, hi - lo);
  if (x < lo - tol || x > hi + tol) throw DomainError("evaluation point outside the knot range");
  auto it = std::upper_bound(s.knots.begin(), s.knots.end(), x);
  std::size_t i = it == s.knots.begin() ? 0 : static_cast<std::size_t>(it - s.knots.begin()) - 1;
  i = std::min(i, s.coeffs.size() - 1);
  const auto& c = s.coeffs[i];
  const double t = x - s.knots[i];
  switch (order) {
    case 0: return c[0] + t * (c[1] + t * (c[2] + t * c[3]));
    case 1: return c[1] + t * (2.0 * c[2] + 3.0 * t * c[3]);
    case 2: return 2.0 * c[2] + 6.0 * t * c[3];
    default: return 6.0 * c[3];
  }
}

inline DerivativeResult1D spline_derivative(const SplineCurve& s, const Grid1D& grid, int order) {
  if (order != 1 && order != 2) throw ArgumentError("spline derivative order must be 1 or 2");
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) v[static_cast<Eigen::Index>(i)] = spline_eval(s, grid.node(i), order);
  const double step = s.knots.size() > 1 ? s.knots[1] - s.knots[0] : 0.0;
  return {SampledFunction1D(grid, std::move(v)), Method::spline, order == 1 ? Derivative::dx : Derivative::dxx,
          ParameterRecord{{}, {}, {}, step}};
}

}  // namespace polyexp
