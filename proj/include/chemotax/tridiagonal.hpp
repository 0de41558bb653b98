#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "chemotax/errors.hpp"

namespace chemotax {

// Thomas algorithm for A x = rhs with A tridiagonal: lower[i] = A(i, i-1) (lower[0] unused),
// diag[i] = A(i, i), upper[i] = A(i, i+1) (upper[n-1] unused). No pivoting; intended for
// diagonally dominant systems. Throws NumericalError on a vanishing pivot.
inline std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                             std::span<const double> diag,
                                             std::span<const double> upper,
                                             std::span<const double> rhs) {
  const std::size_t n = diag.size();
  std::vector<double> cp(n), x(n);
  double pivot = diag[0];
  if (pivot == 0.0 || !std::isfinite(pivot)) throw NumericalError("singular tridiagonal system");
  cp[0] = n > 1 ? upper[0] / pivot : 0.0;
  x[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i] * cp[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) throw NumericalError("singular tridiagonal system");
    cp[i] = i + 1 < n ? upper[i] / pivot : 0.0;
    x[i] = (rhs[i] - lower[i] * x[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp[i] * x[i + 1];
  return x;
}

}  // namespace chemotax
