#pragma once

// Per-point formulas shared by the scalar and SIMD translation units. Kept in an
// anonymous namespace so each TU gets its own copy compiled with its own flags.

#include <cstddef>

#include "chemotax/kernels.hpp"

namespace chemotax::kernels {
namespace {

inline double reaction_diffusion_point(double c, double lap_sum, double u,
                                       const ReactionDiffusionCoeffs& k) {
  const double lap = lap_sum / k.h2;
  return c + k.dt * ((k.diffusivity * lap + k.production * u) - k.decay * c);
}

// lap_sum = (east + west) - 2c
inline double lap_sum_1d(double west, double c, double east) { return (east + west) - (c + c); }

// lap_sum = ((east + west) + (north + south)) - 4c
inline double lap_sum_2d(double west, double east, double south, double north, double c) {
  return ((east + west) + (north + south)) - 4.0 * c;
}

inline double face_flux_point(double ul, double ur, double cl, double cr, double psil,
                              double psir, double dface, const FaceFluxCoeffs& k) {
  const double b = k.chi * ((cr - cl) / k.dx);
  const double bp = b > 0.0 ? b : 0.0;
  const double bm = b < 0.0 ? -b : 0.0;
  const double diff = (k.beta_u * dface) * ((ur - ul) / k.dx);
  const double adv = (bp * ul) * psir - (bm * ur) * psil;
  return diff - adv;
}

inline double divergence_point(double u, double fx_lo, double fx_hi, double fy_lo, double fy_hi,
                               double dt, double dx) {
  return u + dt * (((fx_hi - fx_lo) + (fy_hi - fy_lo)) / dx);
}

inline void reaction_diffusion_2d_edge(const double* c, const double* u, double* out,
                                       std::size_t n, std::size_t i, std::size_t j,
                                       const ReactionDiffusionCoeffs& k) {
  const std::size_t idx = j * n + i;
  const double w = c[i == 0 ? idx : idx - 1];
  const double e = c[i + 1 == n ? idx : idx + 1];
  const double s = c[j == 0 ? idx : idx - n];
  const double no = c[j + 1 == n ? idx : idx + n];
  out[idx] = reaction_diffusion_point(c[idx], lap_sum_2d(w, e, s, no, c[idx]), u[idx], k);
}

}  // namespace
}  // namespace chemotax::kernels
