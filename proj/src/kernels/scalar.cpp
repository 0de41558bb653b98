#include "stencil_point.hpp"

namespace chemotax::kernels {
namespace {

void reaction_diffusion_1d(std::span<const double> c, std::span<const double> u,
                           std::span<double> out, const ReactionDiffusionCoeffs& k) {
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = c[i == 0 ? 0 : i - 1];
    const double e = c[i + 1 == n ? i : i + 1];
    out[i] = reaction_diffusion_point(c[i], lap_sum_1d(w, c[i], e), u[i], k);
  }
}

void reaction_diffusion_2d(std::span<const double> c, std::span<const double> u,
                           std::span<double> out, std::size_t n,
                           const ReactionDiffusionCoeffs& k) {
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      reaction_diffusion_2d_edge(c.data(), u.data(), out.data(), n, i, j, k);
}

void face_flux(const FaceInputs& in, std::span<double> out, const FaceFluxCoeffs& k) {
  for (std::size_t f = 0; f < out.size(); ++f)
    out[f] = face_flux_point(in.u_left[f], in.u_right[f], in.c_left[f], in.c_right[f],
                             in.psi_left[f], in.psi_right[f], in.d_face[f], k);
}

void divergence_2d(std::span<const double> u, std::span<const double> fx,
                   std::span<const double> fy, std::span<double> out, std::size_t n, double dt,
                   double dx) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* fxr = fx.data() + j * (n + 1);
    const double* fy_lo = fy.data() + j * n;
    const double* fy_hi = fy_lo + n;
    for (std::size_t i = 0; i < n; ++i)
      out[j * n + i] =
          divergence_point(u[j * n + i], fxr[i], fxr[i + 1], fy_lo[i], fy_hi[i], dt, dx);
  }
}

constexpr KernelTable kScalar{"scalar", reaction_diffusion_1d, reaction_diffusion_2d, face_flux,
                              divergence_2d};

}  // namespace

const KernelTable& detail::scalar_table() noexcept { return kScalar; }

}  // namespace chemotax::kernels
