// Compiled with -mavx2 (and without FMA); see src/CMakeLists.txt.
#include <immintrin.h>

#include "stencil_point.hpp"

namespace chemotax::kernels {
namespace {

constexpr std::size_t kLanes = 4;

inline __m256d rd_lanes(__m256d c, __m256d lap_sum, __m256d u, __m256d h2, __m256d dt,
                        __m256d diffusivity, __m256d production, __m256d decay) {
  const __m256d lap = _mm256_div_pd(lap_sum, h2);
  const __m256d rhs = _mm256_sub_pd(
      _mm256_add_pd(_mm256_mul_pd(diffusivity, lap), _mm256_mul_pd(production, u)),
      _mm256_mul_pd(decay, c));
  return _mm256_add_pd(c, _mm256_mul_pd(dt, rhs));
}

void reaction_diffusion_1d(std::span<const double> cs, std::span<const double> us,
                           std::span<double> outs, const ReactionDiffusionCoeffs& k) {
  const std::size_t n = cs.size();
  const double* c = cs.data();
  const double* u = us.data();
  double* out = outs.data();
  if (n < 2 + kLanes) {
    detail::scalar_table().reaction_diffusion_1d(cs, us, outs, k);
    return;
  }
  const __m256d h2 = _mm256_set1_pd(k.h2), dt = _mm256_set1_pd(k.dt);
  const __m256d dif = _mm256_set1_pd(k.diffusivity), prod = _mm256_set1_pd(k.production),
                dec = _mm256_set1_pd(k.decay);
  out[0] = reaction_diffusion_point(c[0], lap_sum_1d(c[0], c[0], c[1]), u[0], k);
  std::size_t i = 1;
  for (; i + kLanes <= n - 1; i += kLanes) {
    const __m256d cc = _mm256_loadu_pd(c + i);
    const __m256d w = _mm256_loadu_pd(c + i - 1);
    const __m256d e = _mm256_loadu_pd(c + i + 1);
    const __m256d lap_sum = _mm256_sub_pd(_mm256_add_pd(e, w), _mm256_add_pd(cc, cc));
    _mm256_storeu_pd(out + i,
                     rd_lanes(cc, lap_sum, _mm256_loadu_pd(u + i), h2, dt, dif, prod, dec));
  }
  for (; i + 1 < n; ++i)
    out[i] = reaction_diffusion_point(c[i], lap_sum_1d(c[i - 1], c[i], c[i + 1]), u[i], k);
  out[n - 1] =
      reaction_diffusion_point(c[n - 1], lap_sum_1d(c[n - 2], c[n - 1], c[n - 1]), u[n - 1], k);
}

void reaction_diffusion_2d(std::span<const double> cs, std::span<const double> us,
                           std::span<double> outs, std::size_t n,
                           const ReactionDiffusionCoeffs& k) {
  const double* c = cs.data();
  const double* u = us.data();
  double* out = outs.data();
  const __m256d h2 = _mm256_set1_pd(k.h2), dt = _mm256_set1_pd(k.dt);
  const __m256d dif = _mm256_set1_pd(k.diffusivity), prod = _mm256_set1_pd(k.production),
                dec = _mm256_set1_pd(k.decay);
  const __m256d four = _mm256_set1_pd(4.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double* row = c + j * n;
    const double* south = j == 0 ? row : row - n;
    const double* north = j + 1 == n ? row : row + n;
    reaction_diffusion_2d_edge(c, u, out, n, 0, j, k);
    std::size_t i = 1;
    for (; i + kLanes <= n - 1; i += kLanes) {
      const __m256d cc = _mm256_loadu_pd(row + i);
      const __m256d ew = _mm256_add_pd(_mm256_loadu_pd(row + i + 1), _mm256_loadu_pd(row + i - 1));
      const __m256d ns = _mm256_add_pd(_mm256_loadu_pd(north + i), _mm256_loadu_pd(south + i));
      const __m256d lap_sum = _mm256_sub_pd(_mm256_add_pd(ew, ns), _mm256_mul_pd(four, cc));
      _mm256_storeu_pd(out + j * n + i,
                       rd_lanes(cc, lap_sum, _mm256_loadu_pd(u + j * n + i), h2, dt, dif, prod, dec));
    }
    for (; i < n; ++i) reaction_diffusion_2d_edge(c, u, out, n, i, j, k);
  }
}

void face_flux(const FaceInputs& in, std::span<double> outs, const FaceFluxCoeffs& k) {
  const std::size_t count = outs.size();
  double* out = outs.data();
  const __m256d chi = _mm256_set1_pd(k.chi), dx = _mm256_set1_pd(k.dx),
                beta = _mm256_set1_pd(k.beta_u), zero = _mm256_setzero_pd();
  std::size_t f = 0;
  for (; f + kLanes <= count; f += kLanes) {
    const __m256d ul = _mm256_loadu_pd(in.u_left.data() + f);
    const __m256d ur = _mm256_loadu_pd(in.u_right.data() + f);
    const __m256d cl = _mm256_loadu_pd(in.c_left.data() + f);
    const __m256d cr = _mm256_loadu_pd(in.c_right.data() + f);
    const __m256d pl = _mm256_loadu_pd(in.psi_left.data() + f);
    const __m256d pr = _mm256_loadu_pd(in.psi_right.data() + f);
    const __m256d df = _mm256_loadu_pd(in.d_face.data() + f);
    const __m256d b = _mm256_mul_pd(chi, _mm256_div_pd(_mm256_sub_pd(cr, cl), dx));
    const __m256d bp = _mm256_max_pd(b, zero);
    const __m256d bm = _mm256_max_pd(_mm256_sub_pd(zero, b), zero);
    const __m256d diff =
        _mm256_mul_pd(_mm256_mul_pd(beta, df), _mm256_div_pd(_mm256_sub_pd(ur, ul), dx));
    const __m256d adv = _mm256_sub_pd(_mm256_mul_pd(_mm256_mul_pd(bp, ul), pr),
                                      _mm256_mul_pd(_mm256_mul_pd(bm, ur), pl));
    _mm256_storeu_pd(out + f, _mm256_sub_pd(diff, adv));
  }
  for (; f < count; ++f)
    out[f] = face_flux_point(in.u_left[f], in.u_right[f], in.c_left[f], in.c_right[f],
                             in.psi_left[f], in.psi_right[f], in.d_face[f], k);
}

void divergence_2d(std::span<const double> us, std::span<const double> fx,
                   std::span<const double> fy, std::span<double> outs, std::size_t n, double dt_s,
                   double dx_s) {
  const __m256d dt = _mm256_set1_pd(dt_s), dx = _mm256_set1_pd(dx_s);
  for (std::size_t j = 0; j < n; ++j) {
    const double* fxr = fx.data() + j * (n + 1);
    const double* fy_lo = fy.data() + j * n;
    const double* fy_hi = fy_lo + n;
    const double* u = us.data() + j * n;
    double* out = outs.data() + j * n;
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
      const __m256d dfx = _mm256_sub_pd(_mm256_loadu_pd(fxr + i + 1), _mm256_loadu_pd(fxr + i));
      const __m256d dfy = _mm256_sub_pd(_mm256_loadu_pd(fy_hi + i), _mm256_loadu_pd(fy_lo + i));
      const __m256d inc = _mm256_div_pd(_mm256_add_pd(dfx, dfy), dx);
      _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(u + i), _mm256_mul_pd(dt, inc)));
    }
    for (; i < n; ++i)
      out[i] = divergence_point(u[i], fxr[i], fxr[i + 1], fy_lo[i], fy_hi[i], dt_s, dx_s);
  }
}

constexpr KernelTable kAvx2{"avx2", reaction_diffusion_1d, reaction_diffusion_2d, face_flux,
                            divergence_2d};

}  // namespace

const KernelTable& detail::avx2_table() noexcept { return kAvx2; }

}  // namespace chemotax::kernels
