#pragma once

// Exponential moments m_k = int_{-R}^{R} x^k e^{2x} dx, the inner products
// <phi_i, phi_j> = m_{i+j-2} of the generating family phi_n(x) = x^{n-1} e^x.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "polyexp/errors.hpp"

namespace polyexp {

/// Working precision of the basis construction, in significant decimal digits.
struct Precision {
  int digits = 100;

  static constexpr int kDefaultDigits = 100;

  static bool supported(int digits) { return digits == 50 || digits == 100; }

  /// Largest basis size the precision orthonormalizes reliably on R = 3.
  int max_basis_size() const { return digits >= 100 ? 30 : 20; }

  void validate() const {
    if (!supported(digits))
      throw ConfigurationError("unsupported construction precision " + std::to_string(digits) +
                               " digits (supported: 50, 100)");
  }
};

template <unsigned Digits>
using Float = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<Digits>,
                                            boost::multiprecision::et_off>;

/// Moments in the working type. The recurrence
///   m_k = [R^k e^{2R} - (-R)^k e^{-2R}]/2 - (k/2) m_{k-1}
/// follows from integration by parts; it cancels badly in double at large k,
/// which is why construction runs it in extended precision.
template <class Real>
std::vector<Real> exponential_moments(const Real& R, int k_max) {
  using std::exp;
  const Real ep = exp(2 * R);
  const Real em = exp(-2 * R);
  std::vector<Real> m(static_cast<std::size_t>(k_max) + 1);
  m[0] = (ep - em) / 2;
  Real rk = 1;   // R^k
  Real nrk = 1;  // (-R)^k
  for (int k = 1; k <= k_max; ++k) {
    rk *= R;
    nrk *= -R;
    m[static_cast<std::size_t>(k)] = (rk * ep - nrk * em) / 2 - Real(k) / 2 * m[static_cast<std::size_t>(k - 1)];
  }
  return m;
}

struct MomentTable {
  double R;
  int k_max;
  std::vector<double> m;  ///< rounded from the working precision
  int precision_digits;
};

namespace detail {

template <unsigned Digits>
MomentTable moments_at(double R, int k_max) {
  const auto work = exponential_moments(Float<Digits>(R), k_max);
  MomentTable t{R, k_max, {}, static_cast<int>(Digits)};
  t.m.reserve(work.size());
  for (const auto& v : work) t.m.push_back(static_cast<double>(v));
  return t;
}

}  // namespace detail

inline MomentTable compute_moments(double R, int k_max, Precision precision = {}) {
  if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("moment table needs R > 0");
  if (k_max < 0) throw ArgumentError("k_max must be non-negative");
  precision.validate();
  return precision.digits == 50 ? detail::moments_at<50>(R, k_max) : detail::moments_at<100>(R, k_max);
}

}  // namespace polyexp
