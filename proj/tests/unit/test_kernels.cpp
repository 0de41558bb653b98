#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "chemotax/kernels.hpp"

using namespace chemotax::kernels;

namespace {

std::vector<double> random_field(std::size_t n, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar kernels are always available") {
  CHECK(isa_supported(Isa::scalar));
  CHECK(table(Isa::scalar).name == "scalar");
  CHECK_FALSE(active().name.empty());
}

TEST_CASE("reaction-diffusion kernel reproduces a hand-computed 1D update") {
  const std::vector<double> c{1.0, 2.0, 4.0};
  const std::vector<double> u{10.0, 0.0, 5.0};
  std::vector<double> out(3);
  const ReactionDiffusionCoeffs k{0.1, 2.0, 1.0, 0.5, 1.0};
  table(Isa::scalar).reaction_diffusion_1d(c, u, out, k);
  // Mirrored ghosts: lap = (1, 1, -2).
  CHECK(out[0] == doctest::Approx(1.0 + 0.1 * (2.0 * 1.0 + 5.0 - 1.0)));
  CHECK(out[1] == doctest::Approx(2.0 + 0.1 * (2.0 * 1.0 + 0.0 - 2.0)));
  CHECK(out[2] == doctest::Approx(4.0 + 0.1 * (2.0 * -2.0 + 2.5 - 4.0)));
}

TEST_CASE("face flux kernel matches the upwind formula") {
  const std::vector<double> ul{1.0, 3.0}, ur{2.0, 1.0}, cl{0.0, 5.0}, cr{1.0, 4.0};
  const std::vector<double> pl{0.9, 0.8}, pr{0.7, 0.6}, d{1.5, 1.2};
  std::vector<double> out(2);
  const FaceFluxCoeffs k{0.5, 2.0, 0.5};
  table(Isa::scalar).face_flux({ul, ur, cl, cr, pl, pr, d}, out, k);
  // Face 0: b = 4 > 0.  Face 1: b = -4 < 0.
  CHECK(out[0] == doctest::Approx(0.5 * 1.5 * 2.0 - 4.0 * 1.0 * 0.7));
  CHECK(out[1] == doctest::Approx(0.5 * 1.2 * -4.0 + 4.0 * 1.0 * 0.8));
}

#if defined(CHEMOTAX_HAVE_AVX2)
TEST_CASE("vector kernels are bitwise identical to the scalar reference") {
  if (!isa_supported(Isa::avx2)) {
    MESSAGE("AVX2 not supported by this CPU; equivalence not exercised");
    return;
  }
  const auto& s = table(Isa::scalar);
  const auto& v = table(Isa::avx2);
  const ReactionDiffusionCoeffs rd{1e-2, 2.5e-3, 1e-4, 1.0, 1.0};
  const FaceFluxCoeffs ff{6.125e-4, 6.1255e-9, 1e-2};

  for (std::size_t n : {2u, 3u, 4u, 5u, 7u, 8u, 13u, 64u, 100u, 257u}) {
    CAPTURE(n);
    const auto c = random_field(n, 11 + n, 0.0, 2e6);
    const auto u = random_field(n, 23 + n, 0.0, 4e6);
    std::vector<double> a(n), b(n);
    s.reaction_diffusion_1d(c, u, a, rd);
    v.reaction_diffusion_1d(c, u, b, rd);
    CHECK(same_bits(a, b));

    const auto c2 = random_field(n * n, 31 + n, 0.0, 2e6);
    const auto u2 = random_field(n * n, 37 + n, 0.0, 4e6);
    std::vector<double> a2(n * n), b2(n * n);
    s.reaction_diffusion_2d(c2, u2, a2, n, rd);
    v.reaction_diffusion_2d(c2, u2, b2, n, rd);
    CHECK(same_bits(a2, b2));

    const auto ul = random_field(n, 41 + n, 0.0, 4e6), ur = random_field(n, 43 + n, 0.0, 4e6);
    const auto cl = random_field(n, 47 + n, 0.0, 2e6), cr = random_field(n, 53 + n, 0.0, 2e6);
    const auto pl = random_field(n, 59 + n, 0.0, 1.0), pr = random_field(n, 61 + n, 0.0, 1.0);
    const auto d = random_field(n, 67 + n, 0.0, 1.0);
    std::vector<double> fa(n), fb(n);
    s.face_flux({ul, ur, cl, cr, pl, pr, d}, fa, ff);
    v.face_flux({ul, ur, cl, cr, pl, pr, d}, fb, ff);
    CHECK(same_bits(fa, fb));

    auto fx = random_field(n * (n + 1), 71 + n, -1e3, 1e3);
    auto fy = random_field((n + 1) * n, 73 + n, -1e3, 1e3);
    for (std::size_t j = 0; j < n; ++j) fx[j * (n + 1)] = fx[j * (n + 1) + n] = 0.0;
    for (std::size_t i = 0; i < n; ++i) fy[i] = fy[n * n + i] = 0.0;
    std::vector<double> da(n * n), db(n * n);
    s.divergence_2d(u2, fx, fy, da, n, 1e-4, 1.0 / 51.0);
    v.divergence_2d(u2, fx, fy, db, n, 1e-4, 1.0 / 51.0);
    CHECK(same_bits(da, db));
  }
}
#endif
