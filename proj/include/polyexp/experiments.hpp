#pragma once

// Test functions, seeded multiplicative noise, per-run error reports and the
// multi-seed tables and error curves built from them.

#include <Eigen/Core>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "polyexp/basis.hpp"
#include "polyexp/errors.hpp"
#include "polyexp/grid.hpp"
#include "polyexp/result.hpp"
#include "polyexp/spectral.hpp"
#include "polyexp/spline.hpp"
#include "polyexp/tikhonov.hpp"
#include "polyexp/trig.hpp"

namespace polyexp {

inline constexpr double kDefaultR = 3.0;
inline constexpr std::size_t kGrid1DPoints = 6001;
inline constexpr std::size_t kGrid2DPoints = 601;
inline constexpr double kInteriorHalfWidth = 2.0;
inline constexpr std::size_t kSplineStride = 100;

enum class TestId { test1 = 1, test2 = 2, test3 = 3, test4 = 4 };

inline std::string to_string(TestId id) { return "test" + std::to_string(static_cast<int>(id)); }

inline TestId parse_test_id(const std::string& s) {
  const std::string t = s.rfind("test", 0) == 0 ? s.substr(4) : s;
  if (t == "1") return TestId::test1;
  if (t == "2") return TestId::test2;
  if (t == "3") return TestId::test3;
  if (t == "4") return TestId::test4;
  throw ArgumentError("unknown test '" + s + "'");
}

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

struct TestCase {
  TestId id;
  int dimension;
  std::string formula;
  Fn1 f1, d1, d2;            ///< 1D: f*, f', f''
  Fn2 f2, grad_mag, laplacian;  ///< 2D: f*, |grad f|, Laplacian
  Fn2 dx, dy;                ///< 2D partials
  std::vector<int> default_cutoff;  ///< cut-offs used for the published tables
};

inline TestCase test_case(TestId id) {
  TestCase c{};
  c.id = id;
  switch (id) {
    case TestId::test1:
      c.dimension = 1;
      c.formula = "sin(4x)";
      c.f1 = [](double x) { return std::sin(4.0 * x); };
      c.d1 = [](double x) { return 4.0 * std::cos(4.0 * x); };
      c.d2 = [](double x) { return -16.0 * std::sin(4.0 * x); };
      c.default_cutoff = {20};
      break;
    case TestId::test2:
      c.dimension = 1;
      c.formula = "sin(x^2)";
      c.f1 = [](double x) { return std::sin(x * x); };
      c.d1 = [](double x) { return 2.0 * x * std::cos(x * x); };
      c.d2 = [](double x) { return 2.0 * std::cos(x * x) - 4.0 * x * x * std::sin(x * x); };
      c.default_cutoff = {25};
      break;
    case TestId::test3:
      c.dimension = 2;
      c.formula = "sin(x^2 + y^2)";
      c.f2 = [](double x, double y) { return std::sin(x * x + y * y); };
      c.dx = [](double x, double y) { return 2.0 * x * std::cos(x * x + y * y); };
      c.dy = [](double x, double y) { return 2.0 * y * std::cos(x * x + y * y); };
      c.grad_mag = [](double x, double y) {
        const double s = x * x + y * y;
        return 2.0 * std::sqrt(s * std::cos(s) * std::cos(s));
      };
      c.laplacian = [](double x, double y) {
        const double s = x * x + y * y;
        return 4.0 * std::cos(s) - 4.0 * s * std::sin(s);
      };
      c.default_cutoff = {20, 20};
      break;
    case TestId::test4:
      c.dimension = 2;
      c.formula = "x^3 sin(y^2)";
      c.f2 = [](double x, double y) { return x * x * x * std::sin(y * y); };
      c.dx = [](double x, double y) { return 3.0 * x * x * std::sin(y * y); };
      c.dy = [](double x, double y) { return 2.0 * x * x * x * y * std::cos(y * y); };
      c.grad_mag = [](double x, double y) {
        const double s = std::sin(y * y), co = std::cos(y * y);
        return std::sqrt(9.0 * std::pow(x, 4) * s * s + 4.0 * std::pow(x, 6) * y * y * co * co);
      };
      c.laplacian = [](double x, double y) {
        return (-4.0 * x * x * x * y * y + 6.0 * x) * std::sin(y * y) + 2.0 * x * x * x * std::cos(y * y);
      };
      c.default_cutoff = {20, 20};
      break;
    default:
      throw ArgumentError("unknown test id");
  }
  return c;
}

// ---------------------------------------------------------------- noise

struct NoiseConfig {
  double delta = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(delta >= 0.0 && delta < 1.0)) throw ArgumentError("noise level must lie in [0, 1)");
  }
};

/// Uniform deviates on [-1, 1) from mt19937_64: u = -1 + 2 (x >> 11) 2^-53.
class NoiseStream {
public:
  explicit NoiseStream(std::uint64_t seed) : gen_(seed) {}
  double next() { return -1.0 + 2.0 * (static_cast<double>(gen_() >> 11) * 0x1.0p-53); }

private:
  std::mt19937_64 gen_;
};

/// f* (1 + delta u_i), nodes in increasing order.
inline SampledFunction1D apply_noise(const SampledFunction1D& f, const NoiseConfig& cfg) {
  cfg.validate();
  NoiseStream rng(cfg.seed);
  Eigen::VectorXd v = f.values();
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] *= 1.0 + cfg.delta * rng.next();
  return SampledFunction1D(f.grid(), std::move(v));
}

/// Same model per node, x index outer and y index inner.
inline SampledField2D apply_noise(const SampledField2D& f, const NoiseConfig& cfg) {
  cfg.validate();
  NoiseStream rng(cfg.seed);
  Eigen::MatrixXd v = f.values();
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) *= 1.0 + cfg.delta * rng.next();
  return SampledField2D(f.grid(), std::move(v));
}

// ---------------------------------------------------------------- runs

struct RunOptions {
  std::optional<std::vector<int>> cutoffs;  ///< fixed polyexp cut-off(s); auto when empty
  bool published_cutoffs = false;               ///< use TestCase::default_cutoff
  CutoffRange range{};
  std::optional<double> threshold;          ///< explicit cut-off threshold instead of the adaptive rule
  std::vector<double> gammas = default_gamma_grid();
  std::size_t spline_stride = kSplineStride;
  TrigRange trig_range{};
  Precision precision{};
  double R = kDefaultR;
  std::size_t points_1d = kGrid1DPoints;
  std::size_t points_2d = kGrid2DPoints;
};

struct DerivativePair1D {
  DerivativeResult1D first;
  DerivativeResult1D second;
  std::optional<CutoffReport> cutoff;
  std::optional<TikhonovScan> first_scan;
  std::optional<TikhonovScan> second_scan;
};

inline int basis_size_for(const RunOptions& opt) {
  int n = opt.range.hi;
  if (opt.cutoffs)
    for (int c : *opt.cutoffs) n = std::max(n, c);
  return n;
}

/// f' and f'' of noisy 1D data by one method.
inline DerivativePair1D differentiate_1d(const SampledFunction1D& f, Method method, const RunOptions& opt = {},
                                         const std::vector<int>& published_cutoff = {}) {
  const Grid1D& grid = f.grid();
  switch (method) {
    case Method::polyexp: {
      const BasisPtr basis = cached_basis(grid.R(), basis_size_for(opt), opt.precision);
      std::optional<CutoffReport> rep;
      int N = 0;
      if (opt.cutoffs && !opt.cutoffs->empty()) {
        N = opt.cutoffs->front();
      } else if (opt.published_cutoffs && !published_cutoff.empty()) {
        N = published_cutoff.front();
      } else if (sup_norm(f) == 0.0) {
        N = opt.range.lo;  // every cut-off reproduces zero data exactly
      } else {
        rep = opt.threshold ? select_cutoff(f, basis, opt.range, *opt.threshold) : select_cutoff(f, basis, opt.range);
        N = rep->chosen_N;
      }
      const SpectralCoeffs1D c = project_1d(f, basis, N);
      return {reconstruct_1d(c, grid, 1), reconstruct_1d(c, grid, 2), rep, {}, {}};
    }
    case Method::trig: {
      const int N = opt.cutoffs && !opt.cutoffs->empty() ? opt.cutoffs->front() : trig_select_cutoff(f, opt.trig_range);
      const TrigCoeffs c = trig_project(f, N);
      return {trig_derivative(c, grid, 1), trig_derivative(c, grid, 2), {}, {}, {}};
    }
    case Method::tikhonov: {
      TikhonovDerivatives t = tikhonov_derivatives(f, opt.gammas);
      return {std::move(t.first), std::move(t.second), {}, std::move(t.first_scan), std::move(t.second_scan)};
    }
    case Method::spline: {
      const SplineCurve s = spline_fit(subsample(f, opt.spline_stride));
      return {spline_derivative(s, grid, 1), spline_derivative(s, grid, 2), {}, {}, {}};
    }
  }
  throw ArgumentError("unknown method");
}

namespace detail {

// Fixed, published or selected (N1, N2) for a noisy 2D field.
inline std::pair<int, int> resolve_cutoffs_2d(const SampledField2D& fd, const BasisPtr& basis, const TestCase& tc,
                                              const RunOptions& opt, std::optional<CutoffReport2D>* report) {
  if (opt.cutoffs && !opt.cutoffs->empty()) {
    const int N1 = opt.cutoffs->front();
    return {N1, opt.cutoffs->size() > 1 ? (*opt.cutoffs)[1] : N1};
  }
  if (opt.published_cutoffs) return {tc.default_cutoff[0], tc.default_cutoff[1]};
  CutoffReport2D r = select_cutoff_2d(fd, basis, opt.range, opt.threshold);
  const std::pair<int, int> out{r.N1, r.N2};
  if (report) *report = std::move(r);
  return out;
}

}  // namespace detail

struct ErrorEntry {
  Derivative which;
  double full;      ///< relative L2 over (-R, R)^d
  double interior;  ///< relative L2 over (-2, 2)^d
};

struct ErrorReport {
  TestId test;
  Method method;
  double delta;
  std::uint64_t seed;
  std::vector<ErrorEntry> entries;
  ParameterRecord parameters;
  std::optional<CutoffReport> cutoff;
  std::optional<CutoffReport2D> cutoff_2d;
  double seconds = 0.0;  ///< derivative computation only, data generation excluded

  const ErrorEntry& entry(Derivative d) const {
    for (const auto& e : entries)
      if (e.which == d) return e;
    throw ArgumentError("report has no entry for " + column_name(d));
  }
};

inline ErrorReport run_test(TestId id, double delta, std::uint64_t seed, Method method, const RunOptions& opt = {}) {
  const TestCase tc = test_case(id);
  const NoiseConfig noise{delta, seed};
  noise.validate();
  const Subdomain interior = Subdomain::centered(std::min(kInteriorHalfWidth, opt.R));
  ErrorReport rep{id, method, delta, seed, {}, {}, {}, {}, 0.0};

  if (tc.dimension == 1) {
    const Grid1D grid(opt.R, opt.points_1d);
    const SampledFunction1D fd = apply_noise(SampledFunction1D::sample(grid, tc.f1), noise);
    const auto t0 = std::chrono::steady_clock::now();
    DerivativePair1D d = differentiate_1d(fd, method, opt, tc.default_cutoff);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto t1 = SampledFunction1D::sample(grid, tc.d1);
    const auto t2 = SampledFunction1D::sample(grid, tc.d2);
    rep.entries = {{Derivative::dx, relative_l2_error(t1, d.first.samples),
                    relative_l2_error(t1, d.first.samples, interior)},
                   {Derivative::dxx, relative_l2_error(t2, d.second.samples),
                    relative_l2_error(t2, d.second.samples, interior)}};
    rep.parameters = d.second.parameters;
    rep.cutoff = std::move(d.cutoff);
    return rep;
  }

  if (method != Method::polyexp) throw ArgumentError("2D tests support only the polyexp method");
  const Grid2D grid(opt.R, opt.points_2d);
  const SampledField2D fd = apply_noise(SampledField2D::sample(grid, tc.f2), noise);
  const auto t0 = std::chrono::steady_clock::now();
  const BasisPtr basis = cached_basis(grid.R(), basis_size_for(opt), opt.precision);
  const auto [N1, N2] = detail::resolve_cutoffs_2d(fd, basis, tc, opt, &rep.cutoff_2d);
  const SpectralCoeffs2D c = project_2d(fd, basis, N1, N2);
  const DerivativeResult2D g = derivative_2d(c, grid, Derivative::grad_mag);
  const DerivativeResult2D l = derivative_2d(c, grid, Derivative::laplacian);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto tg = SampledField2D::sample(grid, tc.grad_mag);
  const auto tl = SampledField2D::sample(grid, tc.laplacian);
  rep.entries = {{Derivative::grad_mag, relative_l2_error(tg, g.samples), relative_l2_error(tg, g.samples, interior)},
                 {Derivative::laplacian, relative_l2_error(tl, l.samples), relative_l2_error(tl, l.samples, interior)}};
  rep.parameters = g.parameters;
  return rep;
}

// ---------------------------------------------------------------- tables

inline const std::vector<double>& reference_deltas() {
  static const std::vector<double> d{0.05, 0.10, 0.20};
  return d;
}

inline int delta_index(double delta) {
  const auto& d = reference_deltas();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (std::abs(d[i] - delta) < 1e-12) return static_cast<int>(i);
  return -1;
}

/// Published value for a table cell, when there is one. `interior` selects the
/// (-2, 2)^d column of Tables 1-4.
inline std::optional<double> reference_value(int table, TestId test, double delta, Method method, Derivative which,
                                         bool interior) {
  const int k = delta_index(delta);
  if (k < 0) return std::nullopt;
  using Row = std::array<double, 3>;
  // Tables 1-4: {full d1, full d2, interior d1, interior d2} per noise level.
  static const std::map<int, std::array<Row, 4>> polyexp_tables{
      {1, {Row{0.0060, 0.0110, 0.0260}, Row{0.0268, 0.0996, 0.1123}, Row{0.0030, 0.0031, 0.0073},
           Row{0.0195, 0.0201, 0.0282}}},
      {2, {Row{0.0052, 0.0074, 0.0240}, Row{0.0380, 0.0955, 0.1734}, Row{0.0017, 0.0047, 0.0117},
           Row{0.0309, 0.0484, 0.0704}}},
      {3, {Row{0.0303, 0.0313, 0.0338}, Row{0.1282, 0.1306, 0.1610}, Row{0.0163, 0.0165, 0.0173},
           Row{0.0320, 0.0324, 0.0337}}},
      {4, {Row{0.0336, 0.0386, 0.0571}, Row{0.1981, 0.2301, 0.3666}, Row{0.0128, 0.0142, 0.0154},
           Row{0.0587, 0.0645, 0.0734}}},
  };
  // Tables 6-7: per method, Test 1 then Test 2.
  static const std::map<Method, std::array<Row, 2>> first_derivative{
      {Method::polyexp, {Row{0.0060, 0.0110, 0.0260}, Row{0.0017, 0.0047, 0.0117}}},
      {Method::trig, {Row{0.4157, 0.4397, 0.4485}, Row{0.2216, 0.2219, 0.2260}}},
      {Method::tikhonov, {Row{0.0652, 0.0879, 0.1484}, Row{0.1115, 0.1248, 0.1780}}},
      {Method::spline, {Row{0.0775, 0.1185, 0.2450}, Row{0.0551, 0.1904, 0.2355}}},
  };
  static const std::map<Method, std::array<Row, 2>> second_derivative{
      {Method::polyexp, {Row{0.0268, 0.0996, 0.1123}, Row{0.0380, 0.0955, 0.1734}}},
      {Method::trig, {Row{1.2419, 1.4411, 1.5455}, Row{1.0224, 1.0314, 1.0674}}},
      {Method::tikhonov, {Row{0.3410, 0.4504, 0.6334}, Row{0.5912, 0.6044, 0.6700}}},
      {Method::spline, {Row{0.5406, 0.6970, 1.2402}, Row{0.5118, 0.7455, 1.0360}}},
  };
  const bool first = which == Derivative::dx || which == Derivative::grad_mag;
  if (table >= 1 && table <= 4) {
    if (static_cast<int>(test) != table || method != Method::polyexp) return std::nullopt;
    const auto& rows = polyexp_tables.at(table);
    return rows[(interior ? 2 : 0) + (first ? 0 : 1)][static_cast<std::size_t>(k)];
  }
  if ((table == 6 || table == 7) && !interior && (test == TestId::test1 || test == TestId::test2)) {
    if (first != (table == 6)) return std::nullopt;
    const auto& m = table == 6 ? first_derivative : second_derivative;
    return m.at(method)[test == TestId::test1 ? 0 : 1][static_cast<std::size_t>(k)];
  }
  return std::nullopt;
}

struct TableCell {
  int table;
  TestId test;
  double delta;
  Method method;
  Derivative which;
  bool interior;
  double mean;
  double min;
  double max;
  std::size_t runs;
  std::optional<double> reference;
};

struct TableReport {
  int table;
  std::vector<std::uint64_t> seeds;
  std::vector<TableCell> cells;
  std::vector<ErrorReport> runs;
};

struct TableLayout {
  std::vector<TestId> tests;
  std::vector<Method> methods;
  std::vector<Derivative> derivatives;
  bool with_interior;
};

inline TableLayout table_layout(int table) {
  switch (table) {
    case 1: return {{TestId::test1}, {Method::polyexp}, {Derivative::dx, Derivative::dxx}, true};
    case 2: return {{TestId::test2}, {Method::polyexp}, {Derivative::dx, Derivative::dxx}, true};
    case 3: return {{TestId::test3}, {Method::polyexp}, {Derivative::grad_mag, Derivative::laplacian}, true};
    case 4: return {{TestId::test4}, {Method::polyexp}, {Derivative::grad_mag, Derivative::laplacian}, true};
    case 6:
      return {{TestId::test1, TestId::test2},
              {Method::polyexp, Method::trig, Method::tikhonov, Method::spline},
              {Derivative::dx},
              false};
    case 7:
      return {{TestId::test1, TestId::test2},
              {Method::polyexp, Method::trig, Method::tikhonov, Method::spline},
              {Derivative::dxx},
              false};
    default: throw ArgumentError("tables 1, 2, 3, 4, 6 and 7 are reproducible");
  }
}

/// Aggregates finished runs into the cells of one table.
inline std::vector<TableCell> tabulate(int table, const std::vector<ErrorReport>& runs) {
  const TableLayout layout = table_layout(table);
  std::vector<TableCell> cells;
  for (TestId test : layout.tests)
    for (double delta : reference_deltas())
      for (Method m : layout.methods)
        for (Derivative d : layout.derivatives)
          for (bool interior : {false, true}) {
            if (interior && !layout.with_interior) continue;
            TableCell cell{table, test, delta, m, d, interior, 0.0, 0.0, 0.0, 0, reference_value(table, test, delta, m, d, interior)};
            for (const auto& r : runs) {
              if (r.test != test || r.method != m || std::abs(r.delta - delta) > 1e-12) continue;
              const ErrorEntry& e = r.entry(d);
              const double v = interior ? e.interior : e.full;
              cell.min = cell.runs ? std::min(cell.min, v) : v;
              cell.max = cell.runs ? std::max(cell.max, v) : v;
              cell.mean += v;
              ++cell.runs;
            }
            if (cell.runs == 0) continue;
            cell.mean /= static_cast<double>(cell.runs);
            cells.push_back(cell);
          }
  return cells;
}

inline TableReport reproduce_table(int table, const std::vector<std::uint64_t>& seeds, const RunOptions& opt = {},
                                   const std::vector<double>& deltas = reference_deltas()) {
  if (seeds.empty()) throw ArgumentError("at least one seed is required");
  const TableLayout layout = table_layout(table);
  TableReport rep{table, seeds, {}, {}};
  for (TestId test : layout.tests)
    for (double delta : deltas)
      for (Method m : layout.methods)
        for (std::uint64_t seed : seeds) rep.runs.push_back(run_test(test, delta, seed, m, opt));
  rep.cells = tabulate(table, rep.runs);
  return rep;
}

// ---------------------------------------------------------------- error curves

/// |f'_method - f'_true| / sup |f'_true| at every node, one curve per method.
inline std::map<Method, SampledFunction1D> error_curves(TestId id, double delta, std::uint64_t seed,
                                                        const RunOptions& opt = {}) {
  const TestCase tc = test_case(id);
  if (tc.dimension != 1) throw ArgumentError("error curves are defined for 1D tests");
  const Grid1D grid(opt.R, opt.points_1d);
  const SampledFunction1D fd = apply_noise(SampledFunction1D::sample(grid, tc.f1), {delta, seed});
  const SampledFunction1D truth = SampledFunction1D::sample(grid, tc.d1);
  const double scale = sup_norm(truth);
  if (!(scale > 0.0)) throw UndefinedMetricError("true derivative vanishes");
  std::map<Method, SampledFunction1D> out;
  for (Method m : {Method::trig, Method::tikhonov, Method::spline, Method::polyexp}) {
    const DerivativePair1D d = differentiate_1d(fd, m, opt, tc.default_cutoff);
    out.emplace(m, SampledFunction1D(grid, (d.first.samples.values() - truth.values()).cwiseAbs() / scale));
  }
  return out;
}

/// |q_comp - q_true| / sup |q_true| on the 2D grid for q = |grad f| or the Laplacian.
inline SampledField2D error_field_2d(TestId id, double delta, std::uint64_t seed, Derivative which,
                                     const RunOptions& opt = {}) {
  const TestCase tc = test_case(id);
  if (tc.dimension != 2) throw ArgumentError("error fields are defined for 2D tests");
  if (which != Derivative::grad_mag && which != Derivative::laplacian)
    throw ArgumentError("error fields cover the gradient magnitude and the Laplacian");
  const Grid2D grid(opt.R, opt.points_2d);
  const SampledField2D fd = apply_noise(SampledField2D::sample(grid, tc.f2), {delta, seed});
  const BasisPtr basis = cached_basis(grid.R(), basis_size_for(opt), opt.precision);
  const auto [N1, N2] = detail::resolve_cutoffs_2d(fd, basis, tc, opt, nullptr);
  const DerivativeResult2D comp = derivative_2d(project_2d(fd, basis, N1, N2), grid, which);
  const SampledField2D truth = SampledField2D::sample(grid, which == Derivative::grad_mag ? tc.grad_mag : tc.laplacian);
  const double scale = sup_norm(truth);
  return SampledField2D(grid, (comp.samples.values() - truth.values()).cwiseAbs() / scale);
}

}  // namespace polyexp
