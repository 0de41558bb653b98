#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

#include "chemotax/kernels.hpp"

namespace chemotax::kernels {

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(CHEMOTAX_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!isa_supported(isa)) throw std::invalid_argument("kernel ISA not available on this build/CPU");
#if defined(CHEMOTAX_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("CHEMOTAX_ISA")) {
    const std::string_view want{env};
    if (want == "scalar") return detail::scalar_table();
    if (want == "avx2" && isa_supported(Isa::avx2)) return table(Isa::avx2);
  }
  if (isa_supported(Isa::avx2)) return table(Isa::avx2);
  return detail::scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace chemotax::kernels
