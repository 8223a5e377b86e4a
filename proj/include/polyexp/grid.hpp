#pragma once

// Uniform grids on (-R, R) and (-R, R)^2, sampled functions on them, composite
// trapezoid quadrature and the relative L2 / sup norms used by every report.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "polyexp/errors.hpp"

namespace polyexp {

class Grid1D {
public:
  Grid1D(double R, std::size_t n_points) : R_(R), n_(n_points) {
    if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("grid half-width R must be positive");
    if (n_points < 2) throw ArgumentError("grid needs at least two nodes");
    h_ = 2.0 * R / static_cast<double>(n_points - 1);
  }

  /// Grid with the given step; the step must divide 2R into whole cells.
  static Grid1D with_step(double R, double h) {
    const double cells = 2.0 * R / h;
    const double rounded = std::round(cells);
    if (!(h > 0.0) || std::abs(cells - rounded) > 1e-9 * cells)
      throw ArgumentError("step does not divide the interval into whole cells");
    return Grid1D(R, static_cast<std::size_t>(rounded) + 1);
  }

  double R() const noexcept { return R_; }
  std::size_t size() const noexcept { return n_; }
  double h() const noexcept { return h_; }

  /// Node i (0-based): x_i = -R + i h.
  double node(std::size_t i) const noexcept { return -R_ + static_cast<double>(i) * h_; }

  Eigen::VectorXd nodes() const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) x[static_cast<Eigen::Index>(i)] = node(i);
    return x;
  }

  /// Composite trapezoid weights h(1/2, 1, ..., 1, 1/2).
  Eigen::VectorXd weights() const {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_), h_);
    w[0] *= 0.5;
    w[static_cast<Eigen::Index>(n_ - 1)] *= 0.5;
    return w;
  }

  /// Trapezoid weights restricted to the nodes with lo <= x <= hi (closed at
  /// grid nodes); zero elsewhere.
  Eigen::VectorXd weights_within(double lo, double hi) const {
    auto [first, last] = index_range(lo, hi);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    if (first > last) return w;
    for (std::size_t i = first; i <= last; ++i) w[static_cast<Eigen::Index>(i)] = h_;
    w[static_cast<Eigen::Index>(first)] *= 0.5;
    w[static_cast<Eigen::Index>(last)] *= 0.5;
    if (first == last) w[static_cast<Eigen::Index>(first)] = 0.0;
    return w;
  }

  /// Inclusive index range of nodes inside [lo, hi]; first > last when empty.
  std::pair<std::size_t, std::size_t> index_range(double lo, double hi) const {
    const double tol = 1e-9 * h_;
    const double a = std::ceil((lo + R_ - tol) / h_);
    const double b = std::floor((hi + R_ + tol) / h_);
    const double first = std::max(a, 0.0);
    const double last = std::min(b, static_cast<double>(n_ - 1));
    if (first > last) return {1, 0};
    return {static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
  }

  bool operator==(const Grid1D& o) const noexcept { return R_ == o.R_ && n_ == o.n_; }

private:
  double R_;
  std::size_t n_;
  double h_;
};

/// Tensor product of two identical axes.
class Grid2D {
public:
  Grid2D(double R, std::size_t n_points_per_axis) : axis_(R, n_points_per_axis) {}
  explicit Grid2D(const Grid1D& axis) : axis_(axis) {}

  const Grid1D& axis() const noexcept { return axis_; }
  double R() const noexcept { return axis_.R(); }
  std::size_t size() const noexcept { return axis_.size(); }
  double h() const noexcept { return axis_.h(); }

  bool operator==(const Grid2D& o) const noexcept { return axis_ == o.axis_; }

private:
  Grid1D axis_;
};

/// Closed interval [lo, hi] (a square [lo, hi]^2 in 2D) used to restrict norms.
struct Subdomain {
  double lo;
  double hi;

  static Subdomain full(double R) { return {-R, R}; }
  static Subdomain centered(double half_width) { return {-half_width, half_width}; }
};

class SampledFunction1D {
public:
  SampledFunction1D(Grid1D grid, Eigen::VectorXd values) : grid_(grid), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != grid_.size())
      throw ArgumentError("sample count does not match the grid");
    if (!values_.allFinite()) throw ArgumentError("samples must be finite");
  }

  template <class F>
  static SampledFunction1D sample(const Grid1D& grid, F&& f) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) v[static_cast<Eigen::Index>(i)] = f(grid.node(i));
    return SampledFunction1D(grid, std::move(v));
  }

  static SampledFunction1D zero(const Grid1D& grid) {
    return SampledFunction1D(grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size())));
  }

  const Grid1D& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

private:
  Grid1D grid_;
  Eigen::VectorXd values_;
};

/// Row index runs over x, column index over y.
class SampledField2D {
public:
  SampledField2D(Grid2D grid, Eigen::MatrixXd values) : grid_(grid), values_(std::move(values)) {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    if (values_.rows() != n || values_.cols() != n)
      throw ArgumentError("field shape does not match the grid");
    if (!values_.allFinite()) throw ArgumentError("samples must be finite");
  }

  template <class F>
  static SampledField2D sample(const Grid2D& grid, F&& f) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd v(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        v(i, j) = f(grid.axis().node(static_cast<std::size_t>(i)), grid.axis().node(static_cast<std::size_t>(j)));
    return SampledField2D(grid, std::move(v));
  }

  static SampledField2D zero(const Grid2D& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    return SampledField2D(grid, Eigen::MatrixXd::Zero(n, n));
  }

  const Grid2D& grid() const noexcept { return grid_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

private:
  Grid2D grid_;
  Eigen::MatrixXd values_;
};

inline double trapezoid_integral_1d(const SampledFunction1D& f) {
  return f.grid().weights().dot(f.values());
}

/// Iterated composite trapezoid along both axes.
inline double trapezoid_integral_2d(const SampledField2D& f) {
  const Eigen::VectorXd w = f.grid().axis().weights();
  return w.dot(f.values() * w);
}

inline double sup_norm(const SampledFunction1D& f) { return f.values().cwiseAbs().maxCoeff(); }
inline double sup_norm(const SampledField2D& f) { return f.values().cwiseAbs().maxCoeff(); }

namespace detail {

inline void check_subdomain(double R, const Subdomain& sub) {
  const double tol = 1e-12 * R;
  if (!(sub.lo < sub.hi) || sub.lo < -R - tol || sub.hi > R + tol)
    throw DomainError("subdomain must be a non-empty interval inside (-R, R)");
}

inline double ratio_or_throw(double num2, double den2) {
  if (!(den2 > 0.0)) throw UndefinedMetricError("reference norm vanishes on the subdomain");
  return std::sqrt(num2 / den2);
}

}  // namespace detail

/// ||f_true - f_comp||_{L2(sub)} / ||f_true||_{L2(sub)} with trapezoid norms
/// restricted to the grid nodes inside sub.
inline double relative_l2_error(const SampledFunction1D& f_true, const SampledFunction1D& f_comp,
                                const Subdomain& sub) {
  if (!(f_true.grid() == f_comp.grid())) throw DomainError("relative error needs matching grids");
  detail::check_subdomain(f_true.grid().R(), sub);
  const Eigen::VectorXd w = f_true.grid().weights_within(sub.lo, sub.hi);
  const Eigen::VectorXd d = f_true.values() - f_comp.values();
  return detail::ratio_or_throw(w.dot(d.cwiseAbs2()), w.dot(f_true.values().cwiseAbs2()));
}

inline double relative_l2_error(const SampledFunction1D& f_true, const SampledFunction1D& f_comp) {
  return relative_l2_error(f_true, f_comp, Subdomain::full(f_true.grid().R()));
}

inline double relative_l2_error(const SampledField2D& f_true, const SampledField2D& f_comp,
                                const Subdomain& sub) {
  if (!(f_true.grid() == f_comp.grid())) throw DomainError("relative error needs matching grids");
  detail::check_subdomain(f_true.grid().R(), sub);
  const Eigen::VectorXd w = f_true.grid().axis().weights_within(sub.lo, sub.hi);
  const Eigen::MatrixXd d2 = (f_true.values() - f_comp.values()).cwiseAbs2();
  const Eigen::MatrixXd t2 = f_true.values().cwiseAbs2();
  return detail::ratio_or_throw(w.dot(d2 * w), w.dot(t2 * w));
}

inline double relative_l2_error(const SampledField2D& f_true, const SampledField2D& f_comp) {
  return relative_l2_error(f_true, f_comp, Subdomain::full(f_true.grid().R()));
}

}  // namespace polyexp
