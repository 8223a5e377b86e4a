#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "polyexp/basis.hpp"
#include "polyexp/moments.hpp"

using namespace polyexp;

namespace {

const BasisSpec& basis25() {
  static const BasisSpec b = build_basis(3.0, 25);
  return b;
}

}  // namespace

TEST(Moments, ClosedFormAndOracle) {
  const MomentTable t = compute_moments(3.0, 0);
  ASSERT_EQ(t.m.size(), 1u);
  EXPECT_NEAR(t.m[0], (std::exp(6.0) - std::exp(-6.0)) / 2.0, 1e-12);
  EXPECT_NEAR(t.m[0], 201.71315737027923, 1e-9 * 201.7);
}

TEST(Moments, FirstRecurrenceSteps) {
  const MomentTable t = compute_moments(3.0, 2);
  EXPECT_NEAR(t.m[1], (3 * std::exp(6.0) + 3 * std::exp(-6.0)) / 2 - t.m[0] / 2, 1e-12 * t.m[1]);
  EXPECT_NEAR(t.m[2], (9 * std::exp(6.0) - 9 * std::exp(-6.0)) / 2 - t.m[1], 1e-12 * t.m[2]);
  EXPECT_NEAR(t.m[1], 504.29032968222807, 1e-12 * 504.3);
  EXPECT_NEAR(t.m[2], 1311.1280866502850, 1e-12 * 1311.1);
}

TEST(Moments, RecurrenceClosureAtWorkingPrecision) {
  using Real = Float<100>;
  const Real R(3);
  const auto m = exponential_moments(R, 60);
  const Real ep = exp(2 * R), em = exp(-2 * R);
  for (int k = 1; k <= 60; ++k) {
    const Real rhs = (pow(R, k) * ep - pow(-R, k) * em) / 2 - Real(k) / 2 * m[k - 1];
    EXPECT_LE(static_cast<double>(abs(m[k] - rhs) / abs(m[k])), 1e-12) << "k = " << k;
  }
  const MomentTable t = compute_moments(3.0, 60);
  for (double v : t.m) EXPECT_TRUE(std::isfinite(v));
  EXPECT_GT(t.m[0], 0.0);
}

TEST(Moments, Errors) {
  EXPECT_THROW(compute_moments(0.0, 3), DomainError);
  EXPECT_THROW(compute_moments(-1.0, 3), DomainError);
  EXPECT_THROW(compute_moments(3.0, -1), ArgumentError);
  EXPECT_THROW(compute_moments(3.0, 3, Precision{64}), ConfigurationError);
  EXPECT_EQ(compute_moments(3.0, 3, Precision{50}).precision_digits, 50);
}

TEST(Basis, FirstFunctionIsNormalizedExponential) {
  const BasisSpec b = build_basis(3.0, 1);
  ASSERT_EQ(b.coefficients().rows(), 1);
  EXPECT_NEAR(b.coefficients()(0, 0), 1.0 / std::sqrt(201.71315737027923), 1e-15);
  EXPECT_NEAR(eval_basis(b, 1, 0.0, 0), 0.070409763623231685, 1e-15);
}

TEST(Basis, TriangularWithPositiveDiagonal) {
  const auto& b = basis25();
  const auto& C = b.coefficients();
  for (Eigen::Index r = 0; r < C.rows(); ++r) {
    EXPECT_GT(C(r, r), 0.0);
    for (Eigen::Index c = r + 1; c < C.cols(); ++c) EXPECT_EQ(C(r, c), 0.0);
  }
}

TEST(Basis, TwoFunctionsOrthonormal) {
  const BasisSpec b = build_basis(3.0, 2);
  const Eigen::MatrixXd G = quadrature_gram(b, 2, 200001);
  EXPECT_NEAR(G(0, 1), 0.0, 1e-9);
  EXPECT_NEAR(G(1, 1), 1.0, 1e-9);
  EXPECT_LE(b.orthonormality_defect(), 1e-14);
}

TEST(Basis, QuadratureOrthonormalityN20) {
  const BasisSpec b = build_basis(3.0, 20);
  EXPECT_LE(quadrature_orthonormality_defect(b, 20, 1000001), 1e-8);
}

TEST(Basis, ExactDefectRecordedAndSmall) {
  EXPECT_LE(basis25().orthonormality_defect(), 1e-12);
  EXPECT_EQ(basis25().construction_digits(), 100);
  EXPECT_EQ(basis25().orthonormality_tol(), 1e-8);
}

TEST(Basis, CeilingFailsLoudlyWithDefect) {
  try {
    build_basis(3.0, 60);
    FAIL() << "expected a construction error";
  } catch (const ConstructionError& e) {
    EXPECT_NE(std::string(e.what()).find("defect"), std::string::npos);
    EXPECT_TRUE(std::isinf(e.defect()) || e.defect() > 0.0);
  }
  EXPECT_THROW(build_basis(3.0, 31), ConstructionError);
  EXPECT_NO_THROW(build_basis(3.0, 30));
  EXPECT_THROW(build_basis(3.0, 25, Precision{50}), ConstructionError);
  EXPECT_NO_THROW(build_basis(3.0, 20, Precision{50}));
}

TEST(Basis, ArgumentErrors) {
  EXPECT_THROW(build_basis(0.0, 5), DomainError);
  EXPECT_THROW(build_basis(3.0, 0), ArgumentError);
  EXPECT_THROW(build_basis(3.0, 5, Precision{30}), ConfigurationError);
  const auto& b = basis25();
  EXPECT_THROW(eval_basis(b, 1, 3.01, 0), DomainError);
  EXPECT_THROW(eval_basis(b, 1, 0.0, 3), ArgumentError);
  EXPECT_THROW(eval_basis(b, 0, 0.0, 0), ArgumentError);
  EXPECT_THROW(eval_basis(b, 26, 0.0, 0), ArgumentError);
  EXPECT_NO_THROW(eval_basis(b, 25, 3.0, 2));
  EXPECT_NO_THROW(eval_basis(b, 25, -3.0, 2));
}

TEST(Basis, FirstFunctionIsItsOwnDerivative) {
  const auto& b = basis25();
  for (double x : {-3.0, -1.3, 0.0, 0.7, 3.0}) {
    EXPECT_EQ(eval_basis(b, 1, x, 1), eval_basis(b, 1, x, 0));
    EXPECT_EQ(eval_basis(b, 1, x, 2), eval_basis(b, 1, x, 0));
  }
}

TEST(Basis, ThirdFunctionDerivativeMatchesFiniteDifference) {
  const auto& b = basis25();
  const double x = 0.5, h = 1e-5;
  const double fd = (eval_basis(b, 3, x + h, 0) - eval_basis(b, 3, x - h, 0)) / (2 * h);
  EXPECT_NEAR(eval_basis(b, 3, x, 1), fd, 1e-6 * std::abs(fd));
}

TEST(Basis, DerivativeConsistencyRandomPoints) {
  const auto& b = basis25();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.9, 2.9);
  const double h = 1e-5;
  for (int k = 0; k < 50; ++k) {
    const double x = U(rng);
    for (int n = 1; n <= b.n_max(); ++n) {
      const double d1 = eval_basis(b, n, x, 1);
      const double d2 = eval_basis(b, n, x, 2);
      const double fd1 = (eval_basis(b, n, x + h, 0) - eval_basis(b, n, x - h, 0)) / (2 * h);
      const double fd2 = (eval_basis(b, n, x + h, 1) - eval_basis(b, n, x - h, 1)) / (2 * h);
      // relative to the function's derivative scale, so nodes of Psi_n' do not blow up the ratio
      const double s1 = std::max(std::abs(d1), std::abs(eval_basis(b, n, x, 0)));
      const double s2 = std::max(std::abs(d2), std::abs(d1));
      EXPECT_LE(std::abs(d1 - fd1), 1e-5 * s1) << "n=" << n << " x=" << x;
      EXPECT_LE(std::abs(d2 - fd2), 1e-5 * s2) << "n=" << n << " x=" << x;
    }
  }
}

TEST(Basis, RecurrenceAgreesWithMonomialSumForSmallN) {
  const auto& b = basis25();
  for (int n = 1; n <= 8; ++n)
    for (double x : {-3.0, -0.4, 0.0, 1.9, 3.0})
      for (int order = 0; order <= 2; ++order) {
        const double r = eval_basis(b, n, x, order);
        EXPECT_NEAR(eval_basis_monomial(b, n, x, order), r, 1e-10 * std::max(1.0, std::abs(r)));
      }
}

TEST(Basis, MonomialSumIsExactAtOrigin) {
  const auto& b = basis25();
  // phi_k''(0) only involves the k = 1, 2, 3 terms; no 0 * inf is formed
  for (int n = 1; n <= 5; ++n) EXPECT_TRUE(std::isfinite(eval_basis_monomial(b, n, 0.0, 2)));
  const auto& C = b.coefficients();
  EXPECT_NEAR(eval_basis_monomial(b, 3, 0.0, 2), C(2, 0) + 2 * C(2, 1) + 2 * C(2, 2), 1e-14);
}

TEST(Basis, CacheReturnsSharedInstance) {
  const auto a = cached_basis(3.0, 12);
  const auto b = cached_basis(3.0, 12);
  EXPECT_EQ(a.get(), b.get());
  EXPECT_NE(cached_basis(3.0, 13).get(), a.get());
}

TEST(DerivativeGram, SmallestSingularValuePositive) {
  const auto& b = basis25();
  const auto g2 = derivative_gram(b, 2);
  EXPECT_NEAR(g2.M(0, 0), 1.0, 1e-9);
  EXPECT_GT(g2.smallest_singular_value, 0.0);
  // exact-arithmetic oracle: sigma_min at N = 2 and N = 10
  EXPECT_NEAR(g2.smallest_singular_value, 0.414084, 1e-6);
  for (int N = 2; N <= 20; ++N) {
    const auto g = derivative_gram(b, N, 20001);
    EXPECT_GT(g.smallest_singular_value, 0.0) << N;
    EXPECT_TRUE(std::isfinite(g.condition_number)) << N;
  }
  EXPECT_NEAR(derivative_gram(b, 10, 20001).smallest_singular_value, 1.01386e-4, 1e-8);
}

TEST(DerivativeGram, QuadratureMatchesExactMatrix) {
  const auto g = derivative_gram(basis25(), 8);
  EXPECT_LE(g.quadrature_deviation, 1e-6);
  EXPECT_THROW(derivative_gram(basis25(), 1), ArgumentError);
  EXPECT_THROW(derivative_gram(basis25(), 26), ArgumentError);
}

TEST(Tables, MatchPointEvaluation) {
  const auto& b = basis25();
  const Grid1D g(3.0, 61);
  const BasisTables t = make_tables(b, g, 25);
  for (std::size_t i = 0; i < g.size(); i += 7)
    for (int n = 1; n <= 25; n += 4)
      for (int o = 0; o <= 2; ++o)
        EXPECT_EQ(t.order(o)(n - 1, static_cast<Eigen::Index>(i)), eval_basis(b, n, g.node(i), o));
}
