#pragma once

// The orthonormal polynomial-exponential basis Psi_1, Psi_2, ... of L2(-R, R),
// obtained by Gram-Schmidt on phi_n(x) = x^{n-1} e^x.
//
// Construction works in coefficient space against the exact moment Gram
// matrix <phi_i, phi_j> = m_{i+j-2}, in extended precision, with modified
// Gram-Schmidt and one full reorthogonalization pass. Every Psi_n is p_{n-1}(x) e^x
// with p_k orthonormal for the weight e^{2x}, so the p_k obey a three-term
// recurrence; evaluation runs that recurrence in double. Summing the monomial
// coefficients C in double instead cancels catastrophically near |x| = R
// (about 1e-7 absolute at n = 25), so C is kept for export and as a cross-check.

#include <Eigen/Core>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "polyexp/errors.hpp"
#include "polyexp/grid.hpp"
#include "polyexp/moments.hpp"

namespace polyexp {

class BasisSpec {
public:
  double R() const noexcept { return R_; }
  int n_max() const noexcept { return n_max_; }

  /// Lower-triangular coefficients: row n-1 holds Psi_n = sum_k C(n-1, k-1) phi_k.
  const Eigen::MatrixXd& coefficients() const noexcept { return C_; }

  /// Recurrence x p_n = beta_n p_{n+1} + alpha_n p_n + beta_{n-1} p_{n-1} (0-based).
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  const Eigen::VectorXd& beta() const noexcept { return beta_; }
  double leading() const noexcept { return lead_; }

  int construction_digits() const noexcept { return digits_; }
  double orthonormality_tol() const noexcept { return tol_; }
  /// max |<Psi_m, Psi_n> - delta_mn| of the evaluated basis, from exact moments.
  double orthonormality_defect() const noexcept { return defect_; }

private:
  template <unsigned, unsigned>
  friend BasisSpec build_basis_at(double, int, double);

  double R_ = 0.0;
  int n_max_ = 0;
  Eigen::MatrixXd C_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd beta_;
  double lead_ = 0.0;
  int digits_ = 0;
  double tol_ = 1e-8;
  double defect_ = 0.0;
};

inline constexpr double kDefaultOrthonormalityTol = 1e-8;

namespace detail {

template <class Real>
using MpMatrix = std::vector<std::vector<Real>>;

// Gram-Schmidt of e_0..e_{N-1} against G_ij = m_{i+j}. Returns false on loss of
// positive definiteness (norm^2 <= 0), leaving `failed_at` set.
template <class Real>
bool gram_schmidt(const std::vector<Real>& m, int N, MpMatrix<Real>& Q, int& failed_at) {
  const auto n = static_cast<std::size_t>(N);
  Q.assign(n, std::vector<Real>(n, Real(0)));
  MpMatrix<Real> GQ(n, std::vector<Real>(n, Real(0)));  // G q_k, cached
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<Real> v(n, Real(0));
    v[col] = 1;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < col; ++k) {
        Real r = 0;
        for (std::size_t i = 0; i <= col; ++i) r += v[i] * GQ[k][i];
        for (std::size_t i = 0; i <= k; ++i) v[i] -= r * Q[k][i];
      }
    }
    Real nrm2 = 0;
    for (std::size_t i = 0; i <= col; ++i)
      for (std::size_t j = 0; j <= col; ++j) nrm2 += v[i] * v[j] * m[i + j];
    if (!(nrm2 > 0)) {
      failed_at = static_cast<int>(col) + 1;
      return false;
    }
    const Real inv = 1 / sqrt(nrm2);
    for (std::size_t i = 0; i <= col; ++i) Q[col][i] = v[i] * inv;
    for (std::size_t i = 0; i < n; ++i) {
      Real s = 0;
      for (std::size_t j = 0; j <= col; ++j) s += m[i + j] * Q[col][j];
      GQ[col][i] = s;
    }
  }
  return true;
}

// <x p, q> with p, q given by monomial coefficients: sum p_i q_j m_{i+j+1}.
template <class Real>
Real shifted_inner(const std::vector<Real>& m, const std::vector<Real>& p, const std::vector<Real>& q) {
  Real s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0) continue;
    for (std::size_t j = 0; j < q.size(); ++j) s += p[i] * q[j] * m[i + j + 1];
  }
  return s;
}

// Monomial coefficients of p_0..p_{N-1} regenerated from the double-valued
// recurrence in the type Real (row k holds p_k).
template <class Real>
MpMatrix<Real> recurrence_polynomials(int N, double lead, const Eigen::VectorXd& alpha,
                                      const Eigen::VectorXd& beta) {
  const auto n = static_cast<std::size_t>(N);
  MpMatrix<Real> P(n, std::vector<Real>(n, Real(0)));
  P[0][0] = Real(lead);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Real a(alpha[static_cast<Eigen::Index>(k)]);
    const Real b(beta[static_cast<Eigen::Index>(k)]);
    const Real bm = k > 0 ? Real(beta[static_cast<Eigen::Index>(k - 1)]) : Real(0);
    for (std::size_t i = 0; i < n; ++i) {
      Real v = -a * P[k][i];
      if (i > 0) v += P[k][i - 1];
      if (k > 0) v -= bm * P[k - 1][i];
      P[k + 1][i] = v / b;
    }
  }
  return P;
}

// Orthonormality defect of the basis generated by the double-valued recurrence,
// measured against exact moments in the verification type.
template <class Real>
double recurrence_defect(double R, int N, double lead, const Eigen::VectorXd& alpha,
                         const Eigen::VectorXd& beta) {
  const auto n = static_cast<std::size_t>(N);
  const std::vector<Real> m = exponential_moments(Real(R), 2 * N);
  const MpMatrix<Real> P = recurrence_polynomials<Real>(N, lead, alpha, beta);
  // G = P M P^T, M_ij = m_{i+j}
  MpMatrix<Real> PM(n, std::vector<Real>(n, Real(0)));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < n; ++j) {
      Real s = 0;
      for (std::size_t i = 0; i <= r; ++i) s += P[r][i] * m[i + j];
      PM[r][j] = s;
    }
  double defect = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c <= r; ++c) {
      Real s = 0;
      for (std::size_t j = 0; j <= c; ++j) s += PM[r][j] * P[c][j];
      if (r == c) s -= 1;
      defect = std::max(defect, std::abs(static_cast<double>(s)));
    }
  return defect;
}

inline std::string format_defect(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", d);
  return buf;
}

}  // namespace detail

template <unsigned Digits, unsigned VerifyDigits>
BasisSpec build_basis_at(double R, int n_max, double tol) {
  using Real = Float<Digits>;
  const std::vector<Real> m = exponential_moments(Real(R), 2 * n_max);

  detail::MpMatrix<Real> Q;
  int failed_at = 0;
  if (!detail::gram_schmidt(m, n_max, Q, failed_at)) {
    throw ConstructionError("basis construction broke down at n = " + std::to_string(failed_at) + " with " +
                                std::to_string(Digits) +
                                "-digit arithmetic (Gram matrix no longer positive definite); "
                                "measured orthonormality defect inf",
                            std::numeric_limits<double>::infinity());
  }

  BasisSpec spec;
  spec.R_ = R;
  spec.n_max_ = n_max;
  spec.digits_ = static_cast<int>(Digits);
  spec.tol_ = tol;
  spec.C_ = Eigen::MatrixXd::Zero(n_max, n_max);
  for (int r = 0; r < n_max; ++r)
    for (int c = 0; c <= r; ++c)
      spec.C_(r, c) = static_cast<double>(Q[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
  spec.lead_ = static_cast<double>(Q[0][0]);
  spec.alpha_.resize(n_max);
  spec.beta_.resize(std::max(n_max - 1, 0));
  for (int k = 0; k < n_max; ++k) {
    const auto& p = Q[static_cast<std::size_t>(k)];
    spec.alpha_[k] = static_cast<double>(detail::shifted_inner(m, p, p));
    if (k + 1 < n_max) spec.beta_[k] = static_cast<double>(detail::shifted_inner(m, p, Q[static_cast<std::size_t>(k + 1)]));
  }
  spec.defect_ = detail::recurrence_defect<Float<VerifyDigits>>(R, n_max, spec.lead_, spec.alpha_, spec.beta_);
  return spec;
}

/// Builds Psi_1..Psi_{n_max} on (-R, R). Throws ConstructionError when n_max is
/// above the precision's ceiling or the measured defect exceeds `tol`.
inline BasisSpec build_basis(double R, int n_max, Precision precision = {},
                             double tol = kDefaultOrthonormalityTol) {
  if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("basis needs R > 0");
  if (n_max < 1) throw ArgumentError("basis needs at least one function");
  precision.validate();

  BasisSpec spec = precision.digits == 50 ? build_basis_at<50, 100>(R, n_max, tol)
                                          : build_basis_at<100, 200>(R, n_max, tol);
  const double defect = spec.orthonormality_defect();
  if (n_max > precision.max_basis_size()) {
    throw ConstructionError("n_max = " + std::to_string(n_max) + " exceeds the supported ceiling " +
                                std::to_string(precision.max_basis_size()) + " at " +
                                std::to_string(precision.digits) + " digits; measured orthonormality defect " +
                                detail::format_defect(defect),
                            defect);
  }
  if (!(defect <= tol)) {
    throw ConstructionError("orthonormality defect " + detail::format_defect(defect) + " exceeds tolerance " +
                                detail::format_defect(tol),
                            defect);
  }
  return spec;
}

/// Shared, immutable bases keyed by (R, n_max, digits).
inline std::shared_ptr<const BasisSpec> cached_basis(double R, int n_max, Precision precision = {}) {
  static std::mutex mu;
  static std::map<std::tuple<double, int, int>, std::shared_ptr<const BasisSpec>> cache;
  const auto key = std::make_tuple(R, n_max, precision.digits);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto spec = std::make_shared<const BasisSpec>(build_basis(R, n_max, precision));
  cache.emplace(key, spec);
  return spec;
}

namespace detail {

inline void check_in_interval(const BasisSpec& spec, double x) {
  const double R = spec.R();
  if (!(std::abs(x) <= R * (1.0 + 1e-12))) throw DomainError("evaluation point outside [-R, R]");
}

inline void check_order(int order) {
  if (order < 0 || order > 2) throw ArgumentError("derivative order must be 0, 1 or 2");
}

// Psi_1..Psi_count and their first two derivatives at x, via the recurrence.
inline void evaluate_all(const BasisSpec& spec, double x, int count, double* v0, double* v1, double* v2) {
  const auto& a = spec.alpha();
  const auto& b = spec.beta();
  double p_prev = 0.0, d_prev = 0.0, s_prev = 0.0;
  double p = spec.leading(), d = 0.0, s = 0.0;
  const double ex = std::exp(x);
  for (int k = 0; k < count; ++k) {
    v0[k] = ex * p;
    if (v1) v1[k] = ex * (p + d);
    if (v2) v2[k] = ex * (p + 2.0 * d + s);
    if (k + 1 == count) break;
    const double bm = k > 0 ? b[k - 1] : 0.0;
    const double ib = 1.0 / b[k];
    const double t = x - a[k];
    const double p_next = (t * p - bm * p_prev) * ib;
    const double d_next = (t * d + p - bm * d_prev) * ib;
    const double s_next = (t * s + 2.0 * d - bm * s_prev) * ib;
    p_prev = p, d_prev = d, s_prev = s;
    p = p_next, d = d_next, s = s_next;
  }
}

}  // namespace detail

/// Psi_n^{(order)}(x), n in [1, n_max], order in {0, 1, 2}.
inline double eval_basis(const BasisSpec& spec, int n, double x, int order) {
  detail::check_order(order);
  if (n < 1 || n > spec.n_max()) throw ArgumentError("basis index out of range");
  detail::check_in_interval(spec, x);
  std::vector<double> v0(static_cast<std::size_t>(n)), v1(v0.size()), v2(v0.size());
  detail::evaluate_all(spec, x, n, v0.data(), v1.data(), v2.data());
  const std::size_t k = static_cast<std::size_t>(n - 1);
  return order == 0 ? v0[k] : order == 1 ? v1[k] : v2[k];
}

/// Same quantity summed directly from the monomial coefficients:
/// sum_k C_{n,k} phi_k^{(order)}(x), with p, p', p'' in Horner form. Accurate
/// for small n; loses digits to cancellation as n grows.
inline double eval_basis_monomial(const BasisSpec& spec, int n, double x, int order) {
  detail::check_order(order);
  if (n < 1 || n > spec.n_max()) throw ArgumentError("basis index out of range");
  detail::check_in_interval(spec, x);
  const auto& C = spec.coefficients();
  double p = 0.0, dp = 0.0, ddp = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    ddp = ddp * x + 2.0 * dp;
    dp = dp * x + p;
    p = p * x + C(n - 1, k);
  }
  const double ex = std::exp(x);
  switch (order) {
    case 0: return ex * p;
    case 1: return ex * (p + dp);
    default: return ex * (p + 2.0 * dp + ddp);
  }
}

/// Psi_n^{(order)} at every node of a grid: row n-1, column i.
struct BasisTables {
  Eigen::MatrixXd psi;
  Eigen::MatrixXd dpsi;
  Eigen::MatrixXd d2psi;

  const Eigen::MatrixXd& order(int k) const {
    detail::check_order(k);
    return k == 0 ? psi : k == 1 ? dpsi : d2psi;
  }
  Eigen::Index count() const noexcept { return psi.rows(); }
};

inline BasisTables make_tables(const BasisSpec& spec, const Eigen::VectorXd& nodes, int count) {
  if (count < 1 || count > spec.n_max()) throw ArgumentError("table size out of range");
  const Eigen::Index n = nodes.size();
  if (n > 0) {
    detail::check_in_interval(spec, nodes.minCoeff());
    detail::check_in_interval(spec, nodes.maxCoeff());
  }
  BasisTables t{Eigen::MatrixXd(count, n), Eigen::MatrixXd(count, n), Eigen::MatrixXd(count, n)};
  for (Eigen::Index i = 0; i < n; ++i)
    detail::evaluate_all(spec, nodes[i], count, t.psi.col(i).data(), t.dpsi.col(i).data(), t.d2psi.col(i).data());
  return t;
}

inline BasisTables make_tables(const BasisSpec& spec, const Grid1D& grid, int count) {
  if (std::abs(grid.R() - spec.R()) > 1e-12 * spec.R()) throw DomainError("grid and basis use different R");
  return make_tables(spec, grid.nodes(), count);
}

/// Trapezoid Gram matrix <Psi_m, Psi_n>, m, n <= count, on a uniform grid with
/// n_points nodes. Accumulated in blocks so fine grids stay cheap in memory.
inline Eigen::MatrixXd quadrature_gram(const BasisSpec& spec, int count, std::size_t n_points) {
  const Grid1D grid(spec.R(), n_points);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(count, count);
  constexpr std::size_t kBlock = 1 << 15;
  for (std::size_t start = 0; start < n_points; start += kBlock) {
    const std::size_t len = std::min(kBlock, n_points - start);
    Eigen::VectorXd x(static_cast<Eigen::Index>(len)), w(static_cast<Eigen::Index>(len));
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t g = start + i;
      x[static_cast<Eigen::Index>(i)] = grid.node(g);
      w[static_cast<Eigen::Index>(i)] = (g == 0 || g + 1 == n_points) ? 0.5 * grid.h() : grid.h();
    }
    const Eigen::MatrixXd T = make_tables(spec, x, count).psi;
    G.noalias() += T * w.asDiagonal() * T.transpose();
  }
  return G;
}

/// max |<Psi_m, Psi_n> - delta_mn| by trapezoid quadrature.
inline double quadrature_orthonormality_defect(const BasisSpec& spec, int count, std::size_t n_points) {
  const Eigen::MatrixXd G = quadrature_gram(spec, count, n_points);
  return (G - Eigen::MatrixXd::Identity(count, count)).cwiseAbs().maxCoeff();
}

struct DerivativeGramMatrix {
  int N;
  Eigen::MatrixXd M;  ///< M(m-1, n-1) = <Psi_n, Psi_m'>, trapezoid quadrature
  Eigen::VectorXd singular_values;  ///< of the quadrature M
  double smallest_singular_value;
  double condition_number;
  /// max |M - M_exact|, M_exact from exact moments.
  double quadrature_deviation;
};

namespace detail {

// Exact <Psi_n, Psi_m'> = delta_mn + <p_n, p_m'>_{e^{2x}}; the second term vanishes
// for n >= m, so the matrix is unit lower triangular and its inverse follows by
// forward substitution. Returns {M_exact, M_exact^{-1}} rounded to double.
template <class Real>
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> exact_derivative_gram(const BasisSpec& spec, int N) {
  const auto n = static_cast<std::size_t>(N);
  const std::vector<Real> m = exponential_moments(Real(spec.R()), 2 * N);
  const MpMatrix<Real> P = recurrence_polynomials<Real>(N, spec.leading(), spec.alpha(), spec.beta());
  MpMatrix<Real> M(n, std::vector<Real>(n, Real(0)));
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<Real> dp(n, Real(0));
    for (std::size_t i = 1; i <= r; ++i) dp[i - 1] = Real(static_cast<int>(i)) * P[r][i];
    for (std::size_t c = 0; c < r; ++c) {
      Real s = 0;
      for (std::size_t i = 0; i <= c; ++i)
        for (std::size_t j = 0; j + 1 <= r; ++j) s += P[c][i] * dp[j] * m[i + j];
      M[r][c] = s;
    }
    M[r][r] = 1;
  }
  MpMatrix<Real> inv(n, std::vector<Real>(n, Real(0)));
  for (std::size_t c = 0; c < n; ++c) {
    inv[c][c] = 1;
    for (std::size_t r = c + 1; r < n; ++r) {
      Real s = 0;
      for (std::size_t k = c; k < r; ++k) s += M[r][k] * inv[k][c];
      inv[r][c] = -s;
    }
  }
  Eigen::MatrixXd Md(N, N), Id(N, N);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      Md(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = static_cast<double>(M[r][c]);
      Id(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = static_cast<double>(inv[r][c]);
    }
  return {Md, Id};
}

}  // namespace detail

/// Derivative Gram matrix by trapezoid quadrature. The smallest singular value
/// can sit below double resolution of the quadrature matrix (about 2e-14 at
/// N = 20, R = 3), so it is taken as 1 / sigma_max of the inverse built in
/// extended precision; that largest singular value is well conditioned.
inline DerivativeGramMatrix derivative_gram(const BasisSpec& spec, int N, std::size_t n_points = 200001) {
  if (N < 2 || N > spec.n_max()) throw ArgumentError("derivative Gram size must be in [2, n_max]");
  const Grid1D grid(spec.R(), n_points);
  const BasisTables t = make_tables(spec, grid, N);
  const Eigen::VectorXd w = grid.weights();
  DerivativeGramMatrix out{N, t.dpsi * w.asDiagonal() * t.psi.transpose(), {}, 0.0, 0.0, 0.0};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.M);
  out.singular_values = svd.singularValues();

  const auto [exact, inverse] = detail::exact_derivative_gram<Float<100>>(spec, N);
  const double inv_norm = Eigen::JacobiSVD<Eigen::MatrixXd>(inverse).singularValues()[0];
  const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(exact).singularValues()[0];
  out.smallest_singular_value = 1.0 / inv_norm;
  out.condition_number = norm * inv_norm;
  out.quadrature_deviation = (out.M - exact).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace polyexp
