#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polyexp/errors.hpp"
#include "polyexp/grid.hpp"

namespace polyexp {

enum class Method { polyexp, trig, tikhonov, spline };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::polyexp: return "polyexp";
    case Method::trig: return "trig";
    case Method::tikhonov: return "tikhonov";
    case Method::spline: return "spline";
  }
  return "unknown";
}

inline Method parse_method(const std::string& s) {
  if (s == "polyexp") return Method::polyexp;
  if (s == "trig") return Method::trig;
  if (s == "tikhonov" || s == "tik") return Method::tikhonov;
  if (s == "spline" || s == "cubic") return Method::spline;
  throw ArgumentError("unknown method '" + s + "'");
}

enum class Derivative { value, dx, dxx, dy, dyy, dxy, grad_mag, laplacian };

/// Output column name used in CSV files.
inline std::string column_name(Derivative d) {
  switch (d) {
    case Derivative::value: return "f";
    case Derivative::dx: return "d1";
    case Derivative::dxx: return "d2";
    case Derivative::dy: return "dy";
    case Derivative::dyy: return "dyy";
    case Derivative::dxy: return "dxy";
    case Derivative::grad_mag: return "grad_mag";
    case Derivative::laplacian: return "laplacian";
  }
  return "unknown";
}

/// Parameters a method actually used.
struct ParameterRecord {
  std::vector<int> cutoffs;     ///< polyexp N (1D) or N1, N2; trig N_trig
  std::optional<double> gamma;  ///< Tikhonov, first stage
  std::optional<double> gamma_second;
  std::optional<double> spline_step;
};

struct DerivativeResult1D {
  SampledFunction1D samples;
  Method method;
  Derivative which;
  ParameterRecord parameters;
};

struct DerivativeResult2D {
  SampledField2D samples;
  Method method;
  Derivative which;
  ParameterRecord parameters;
};

}  // namespace polyexp
