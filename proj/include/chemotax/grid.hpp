#pragma once

#include <cstddef>

#include "chemotax/errors.hpp"

namespace chemotax {

// Regular lattice of n sites per dimension with step h. Site i sits at x = (i + 1) h,
// so an n-site lattice covers (0, n h]. 2D storage is row-major with x fastest:
// index = iy * n + ix.
struct Grid {
  int dim = 1;
  std::size_t n = 0;
  double h = 1.0;

  std::size_t size() const noexcept { return dim == 1 ? n : n * n; }
  double length() const noexcept { return static_cast<double>(n) * h; }
  double cell_volume() const noexcept { return dim == 1 ? h : h * h; }
  double domain_measure() const noexcept { return dim == 1 ? length() : length() * length(); }
  double coordinate(std::size_t i) const noexcept { return static_cast<double>(i + 1) * h; }

  void validate() const {
    if (dim != 1 && dim != 2) throw ValidationError("grid dimension must be 1 or 2");
    if (n < 2) throw ValidationError("grid needs at least two sites per dimension");
    if (!(h > 0.0)) throw ValidationError("grid step must be positive");
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

}  // namespace chemotax
