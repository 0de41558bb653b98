#pragma once

// Data-parallel stencil kernels shared by the lattice model and the PDE solver.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. Variants evaluate the same expression tree in the same order without
// FMA contraction, so their outputs are bitwise identical; `active()` picks the
// widest variant the CPU supports (override with CHEMOTAX_ISA=scalar|avx2).

#include <cstddef>
#include <span>
#include <string_view>

namespace chemotax::kernels {

// out = c + dt * ((diffusivity * lap(c) + production * u) - decay * c)
// with lap the finite-difference Laplacian, mirrored (zero-flux) ghosts and grid step^2 = h2.
struct ReactionDiffusionCoeffs {
  double dt = 0.0;
  double diffusivity = 0.0;
  double h2 = 1.0;
  double production = 0.0;
  double decay = 0.0;
};

// Interface flux of the upwind volume-filling scheme, for `count` faces:
//   F = beta_u * d_face * ((u_right - u_left) / dx)
//       - ((b+ * u_left) * psi_right - (b- * u_right) * psi_left),
//   b = chi * ((c_right - c_left) / dx), b+ = max(b, 0), b- = max(-b, 0).
struct FaceFluxCoeffs {
  double beta_u = 0.0;
  double chi = 0.0;
  double dx = 1.0;
};

struct FaceInputs {
  std::span<const double> u_left, u_right;
  std::span<const double> c_left, c_right;
  std::span<const double> psi_left, psi_right;
  std::span<const double> d_face;
};

using ReactionDiffusion1D = void (*)(std::span<const double> c, std::span<const double> u,
                                     std::span<double> out, const ReactionDiffusionCoeffs& k);
// n x n row-major field.
using ReactionDiffusion2D = void (*)(std::span<const double> c, std::span<const double> u,
                                     std::span<double> out, std::size_t n,
                                     const ReactionDiffusionCoeffs& k);
using FaceFlux = void (*)(const FaceInputs& in, std::span<double> out, const FaceFluxCoeffs& k);
// out[j*n+i] = u + dt * (((fx[j*(n+1)+i+1] - fx[j*(n+1)+i]) + (fy[(j+1)*n+i] - fy[j*n+i])) / dx)
// fx holds n rows of n+1 x-faces, fy holds n+1 rows of n y-faces; boundary faces are zero.
using Divergence2D = void (*)(std::span<const double> u, std::span<const double> fx,
                              std::span<const double> fy, std::span<double> out, std::size_t n,
                              double dt, double dx);

struct KernelTable {
  std::string_view name;
  ReactionDiffusion1D reaction_diffusion_1d;
  ReactionDiffusion2D reaction_diffusion_2d;
  FaceFlux face_flux;
  Divergence2D divergence_2d;
};

enum class Isa { scalar, avx2 };

bool isa_supported(Isa isa) noexcept;
// Throws std::invalid_argument if the ISA was not compiled in or is unsupported by this CPU.
const KernelTable& table(Isa isa);
const KernelTable& active();

namespace detail {
const KernelTable& scalar_table() noexcept;
#if defined(CHEMOTAX_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif
}  // namespace detail

}  // namespace chemotax::kernels
