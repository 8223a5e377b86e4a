// Differentiates noisy sin(4x) samples on (-3, 3) and prints the chosen cut-off
// and the relative L2 errors of f' and f''.

#include <cmath>
#include <cstdio>

#include "polyexp/polyexp.hpp"

int main() {
  using namespace polyexp;
  const Grid1D grid(3.0, 6001);
  const auto clean = SampledFunction1D::sample(grid, [](double x) { return std::sin(4.0 * x); });
  const auto noisy = apply_noise(clean, {0.05, 1});

  const BasisPtr basis = cached_basis(3.0, 25);
  const CutoffReport rep = select_cutoff(noisy, basis);
  const SpectralCoeffs1D c = project_1d(noisy, basis, rep.chosen_N);
  const auto d1 = reconstruct_1d(c, grid, 1);
  const auto d2 = reconstruct_1d(c, grid, 2);

  const auto t1 = SampledFunction1D::sample(grid, [](double x) { return 4.0 * std::cos(4.0 * x); });
  const auto t2 = SampledFunction1D::sample(grid, [](double x) { return -16.0 * std::sin(4.0 * x); });
  std::printf("chosen N = %d (threshold %.4g)\n", rep.chosen_N, rep.threshold);
  std::printf("relative L2 error f'  = %.4f\n", relative_l2_error(t1, d1.samples));
  std::printf("relative L2 error f'' = %.4f\n", relative_l2_error(t2, d2.samples));
  return 0;
}
